//! Property tests over randomly generated domains, trees and games.

use komwu::efg::{self, best_response, GameTree, Node, SequenceFormGame};
use komwu::harness::random_nfg;
use komwu::kernels::{random_tfsdp, RandomTreeParams};
use komwu::oracle::{brute_kernel, brute_marginals, EnumerateVertices, VertexOmwu};
use komwu::{Domain, HypercubeDomain, KernelDomain, KomwuLearner, LearningRate, NSetDomain, Tfsdp};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_tree(seed: u64) -> Tfsdp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let t = random_tfsdp(&mut rng, RandomTreeParams::default());
        if t.vertex_count() <= 2000 {
            return t;
        }
    }
}

fn domain_strategy() -> impl Strategy<Value = Domain> {
    let leaf = prop_oneof![
        (1usize..9)
            .prop_flat_map(|d| (Just(d), 1..=d))
            .prop_map(|(d, n)| Domain::NSet(NSetDomain::new(d, n).unwrap())),
        (1usize..7).prop_map(|d| Domain::Cube(HypercubeDomain::new(d).unwrap())),
        any::<u64>().prop_map(|s| Domain::Tree(small_tree(s))),
    ];
    prop_oneof![
        3 => leaf.clone(),
        1 => (leaf.clone(), leaf).prop_map(|(a, b)| Domain::product(a, b)),
    ]
    .prop_filter("small enough to enumerate", |d| d.vertex_count() <= 5000)
}

fn vector(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(lo..hi)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_matches_vertex_sum(domain in domain_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vs = domain.enumerate_vertices().unwrap();
        let x = vector(&mut rng, domain.dim(), -2.0, 2.0);
        let y = vector(&mut rng, domain.dim(), 0.1, 2.0);
        let fast = domain.kernel(&x, &y).unwrap();
        let slow = brute_kernel(&vs, &x, &y).unwrap();
        prop_assert!((fast - slow).abs() <= 1e-9 * (1.0 + slow.abs()), "{fast} vs {slow}");
        let ones = vec![1.0; domain.dim()];
        prop_assert_eq!(domain.kernel(&ones, &ones).unwrap(), vs.len() as f64);
    }

    #[test]
    fn marginals_match_vertex_distribution(domain in domain_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vs = domain.enumerate_vertices().unwrap();
        let log_b = vector(&mut rng, domain.dim(), -4.0, 4.0);
        let fast = domain.marginals(&log_b).unwrap();
        let slow = brute_marginals(&vs, &log_b).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
            prop_assert!((0.0..=1.0).contains(a));
        }
        let b: Vec<f64> = log_b.iter().map(|v| v.exp()).collect();
        let reference = domain.marginals_reference(&b).unwrap();
        for (a, r) in fast.iter().zip(&reference) {
            prop_assert!((a - r).abs() <= 1e-8, "{a} vs {r}");
        }
    }

    #[test]
    fn marginals_survive_extreme_inputs(domain in domain_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let log_b = vector(&mut rng, domain.dim(), -500.0, 500.0);
        let x = domain.marginals(&log_b).unwrap();
        prop_assert!(x.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
        prop_assert!(domain.log_partition(&log_b).unwrap().is_finite());
    }

    #[test]
    fn nset_marginals_sum_to_n(d in 1usize..40, frac in 0.0f64..1.0, seed in any::<u64>()) {
        let n = 1 + ((d - 1) as f64 * frac) as usize;
        let domain = NSetDomain::new(d, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = domain.marginals(&vector(&mut rng, d, -6.0, 6.0)).unwrap();
        prop_assert!((x.iter().sum::<f64>() - n as f64).abs() < 1e-9);
    }

    #[test]
    fn tree_marginals_are_sequence_form(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tfsdp(&mut rng, RandomTreeParams { max_depth: 5, ..Default::default() });
        let x = t.marginals(&vector(&mut rng, t.num_sequences(), -20.0, 20.0)).unwrap();
        prop_assert!(t.is_sequence_form(&x, 1e-9));
    }

    #[test]
    fn product_kernel_factorizes(a in domain_strategy(), b in domain_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (da, db) = (a.dim(), b.dim());
        let x = vector(&mut rng, da + db, 0.1, 1.5);
        let y = vector(&mut rng, da + db, 0.1, 1.5);
        let ka = a.kernel(&x[..da], &y[..da]).unwrap();
        let kb = b.kernel(&x[da..], &y[da..]).unwrap();
        let p = Domain::product(a, b);
        let k = p.kernel(&x, &y).unwrap();
        prop_assert!((k - ka * kb).abs() <= 1e-12 * k.abs().max(1.0));
    }

    #[test]
    fn komwu_tracks_vertex_omwu(domain in domain_strategy(), seed in any::<u64>(), eta in 0.05f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schedule = LearningRate::constant(eta).unwrap();
        let mut oracle = VertexOmwu::new(domain.enumerate_vertices().unwrap(), schedule.clone()).unwrap();
        let d = domain.dim();
        let mut learner = KomwuLearner::new(domain, schedule);
        for _ in 0..15 {
            let m = vector(&mut rng, d, -1.0, 1.0);
            let l = vector(&mut rng, d, -1.0, 1.0);
            let x = learner.step(&m).unwrap();
            let y = oracle.step(&m).unwrap();
            for (a, b) in x.iter().zip(&y) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
            learner.observe_loss(&l).unwrap();
            oracle.observe_loss(&l).unwrap();
        }
    }

    #[test]
    fn best_response_is_the_vertex_minimum(seed in any::<u64>()) {
        let t = small_tree(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
        let loss = vector(&mut rng, t.num_sequences(), -1.0, 1.0);
        let (value, v) = best_response(&t, &loss).unwrap();
        let vs = t.enumerate_vertices().unwrap();
        let min = vs.inner_products(&loss).into_iter().fold(f64::INFINITY, f64::min);
        prop_assert!((value - min).abs() < 1e-12);
        prop_assert!(t.is_sequence_form(&v, 0.0));
        let x = t.marginals(&vector(&mut rng, t.num_sequences(), -3.0, 3.0)).unwrap();
        let xl: f64 = x.iter().zip(&loss).map(|(a, b)| a * b).sum();
        prop_assert!(value <= xl + 1e-12);
    }

    #[test]
    fn random_nfg_json_round_trip(players in 1usize..4, actions in 1usize..4, seed in any::<u64>()) {
        let g = random_nfg(players, actions, seed).unwrap();
        prop_assert_eq!(GameTree::from_json(&g.to_json()).unwrap(), g);
    }
}

/// Expected utilities by walking the game tree with behavioral strategies,
/// independently of the sequence-form machinery.
fn tree_walk(game: &GameTree, node: usize, behavior: &[Vec<f64>]) -> Vec<f64> {
    match &game.nodes[node] {
        Node::Terminal { payoffs } => payoffs.clone(),
        Node::Chance { outcomes } => {
            let mut u = vec![0.0; game.players];
            for &(p, child) in outcomes {
                for (acc, v) in u.iter_mut().zip(tree_walk(game, child, behavior)) {
                    *acc += p * v;
                }
            }
            u
        }
        Node::Decision { infoset, children } => {
            let mut u = vec![0.0; game.players];
            for (a, &child) in children.iter().enumerate() {
                let p = behavior[*infoset][a];
                if p == 0.0 {
                    continue;
                }
                for (acc, v) in u.iter_mut().zip(tree_walk(game, child, behavior)) {
                    *acc += p * v;
                }
            }
            u
        }
    }
}

fn check_game(game: &GameTree, seed: u64) {
    let sf = SequenceFormGame::new(game).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let behavior: Vec<Vec<f64>> = game
        .infosets
        .iter()
        .map(|info| {
            let w: Vec<f64> = info
                .actions
                .iter()
                .map(|_| rng.gen_range(0.0..1.0f64).powi(2))
                .collect();
            let total: f64 = w.iter().sum();
            w.iter().map(|v| v / total).collect()
        })
        .collect();
    let profile: Vec<Vec<f64>> = (0..game.players)
        .map(|i| {
            let t = sf.tfsdp(i);
            let mut local = vec![1.0; t.num_sequences()];
            for (id, info) in game.infosets.iter().enumerate() {
                if info.player == i {
                    let j = sf.decision_point_of(i, id).unwrap();
                    for (a, p) in behavior[id].iter().enumerate() {
                        local[t.sequence(j, a)] = *p;
                    }
                }
            }
            t.sequence_form_from_behavior(&local)
        })
        .collect();
    let refs: Vec<&[f64]> = profile.iter().map(Vec::as_slice).collect();
    let utilities = sf.expected_utilities(&refs).unwrap();
    let walked = tree_walk(game, game.root, &behavior);
    let grads = sf.loss_gradients(&refs).unwrap();
    for i in 0..game.players {
        assert!((utilities[i] - walked[i]).abs() < 1e-10);
        let dot: f64 = grads[i].iter().zip(&profile[i]).map(|(a, b)| a * b).sum();
        assert!((dot + utilities[i]).abs() < 1e-10);
        let br = best_response(sf.tfsdp(i), &grads[i]).unwrap().0;
        assert!(br <= dot + 1e-12);
    }
    if let Some(c) = sf.constant_sum() {
        assert!((utilities.iter().sum::<f64>() - c).abs() < 1e-9);
    }
}

#[test]
fn poker_utilities_agree_with_tree_walk() {
    let mut leduc3 = efg::LeducParams::new(3);
    leduc3.ranks = 2;
    let games = [
        efg::kuhn(2, 3).unwrap(),
        efg::kuhn(3, 4).unwrap(),
        efg::kuhn(4, 5).unwrap(),
        efg::leduc(&efg::LeducParams::new(2)).unwrap(),
        efg::leduc(&leduc3).unwrap(),
    ];
    for (k, g) in games.iter().enumerate() {
        for seed in 0..4 {
            check_game(g, 31 * k as u64 + seed);
        }
        assert_eq!(SequenceFormGame::new(g).unwrap().constant_sum(), Some(0.0));
    }
}

#[test]
fn kuhn_best_response_against_enumeration() {
    let sf = SequenceFormGame::new(&efg::kuhn(2, 3).unwrap()).unwrap();
    let vs = sf.tfsdp(0).enumerate_vertices().unwrap();
    assert_eq!(vs.len(), 27);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let y = sf
            .tfsdp(1)
            .marginals(&vector(&mut rng, sf.tfsdp(1).num_sequences(), -3.0, 3.0))
            .unwrap();
        let x = sf.tfsdp(0).uniform_behavior_strategy();
        let l = sf.loss_gradient(0, &[&x, &y]).unwrap();
        let min = vs
            .inner_products(&l)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        assert!((best_response(sf.tfsdp(0), &l).unwrap().0 - min).abs() < 1e-12);
    }
}

#[test]
fn normalized_games_are_constant_sum_on_unit_range() {
    for g in [efg::kuhn(2, 3).unwrap(), efg::kuhn(3, 4).unwrap()] {
        let n = g.normalized();
        let (lo, hi) = n.payoff_bounds();
        assert!((lo - 0.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        assert!(n.constant_sum().is_some());
        check_game(&n, 1);
    }
}
