//! Sequence-form view of a game: one decision problem per player plus a flat
//! list of terminals, each tagged with every player's last sequence.
//!
//! Expected utilities are multilinear in the players' sequence-form
//! strategies, so utilities, gradients and best responses all reduce to
//! single passes over the terminal list or a decision problem.

use crate::error::{check_len, Error, Result};
use crate::kernels::{Tfsdp, TfsdpBuilder, EMPTY_SEQUENCE};

use super::game::{GameTree, Node};

#[derive(Debug, Clone)]
pub struct SequenceFormGame {
    players: usize,
    tfsdps: Vec<Tfsdp>,
    /// Per player, infoset id → decision point (usize::MAX if not theirs).
    infoset_points: Vec<Vec<usize>>,
    chance: Vec<f64>,
    /// `players` entries per terminal.
    sequences: Vec<usize>,
    payoffs: Vec<f64>,
    constant_sum: Option<f64>,
    payoff_bounds: (f64, f64),
}

/// Tolerance used when checking that inputs are sequence-form strategies.
pub const STRATEGY_TOLERANCE: f64 = 1e-6;

impl SequenceFormGame {
    pub fn new(game: &GameTree) -> Result<Self> {
        game.validate()?;
        let m = game.players;
        let mut builders: Vec<TfsdpBuilder> = (0..m).map(|_| TfsdpBuilder::new()).collect();
        let mut infoset_points = vec![vec![usize::MAX; game.infosets.len()]; m];
        let mut point_parent: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut chance = Vec::new();
        let mut sequences = Vec::new();
        let mut payoffs = Vec::new();

        // (node, reach probability of chance, current sequence per player)
        let mut stack = vec![(game.root, 1.0f64, vec![EMPTY_SEQUENCE; m])];
        while let Some((id, prob, seqs)) = stack.pop() {
            match &game.nodes[id] {
                Node::Chance { outcomes } => {
                    for &(p, c) in outcomes.iter().rev() {
                        stack.push((c, prob * p, seqs.clone()));
                    }
                }
                Node::Decision { infoset, children } => {
                    let info = game.infoset(*infoset);
                    let i = info.player;
                    let parent = seqs[i];
                    let j = match infoset_points[i][*infoset] {
                        usize::MAX => {
                            let j = builders[i].add_labeled(
                                parent,
                                info.name.clone(),
                                info.actions.clone(),
                            )?;
                            infoset_points[i][*infoset] = j;
                            point_parent[i].push(parent);
                            j
                        }
                        j => {
                            if point_parent[i][j] != parent {
                                return Err(Error::Validation(format!(
                                    "perfect recall violated at infoset {:?} of player {i}",
                                    info.name
                                )));
                            }
                            j
                        }
                    };
                    for (a, &c) in children.iter().enumerate().rev() {
                        let mut next = seqs.clone();
                        next[i] = builders[i].sequence(j, a);
                        stack.push((c, prob, next));
                    }
                }
                Node::Terminal { payoffs: u } => {
                    chance.push(prob);
                    sequences.extend_from_slice(&seqs);
                    payoffs.extend_from_slice(u);
                }
            }
        }

        Ok(Self {
            players: m,
            tfsdps: builders.into_iter().map(TfsdpBuilder::build).collect(),
            infoset_points,
            chance,
            sequences,
            payoffs,
            constant_sum: game.constant_sum(),
            payoff_bounds: game.payoff_bounds(),
        })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn tfsdp(&self, player: usize) -> &Tfsdp {
        &self.tfsdps[player]
    }

    pub fn tfsdps(&self) -> &[Tfsdp] {
        &self.tfsdps
    }

    /// Decision point of `player` corresponding to a game infoset.
    pub fn decision_point_of(&self, player: usize, infoset: usize) -> Option<usize> {
        match self.infoset_points[player][infoset] {
            usize::MAX => None,
            j => Some(j),
        }
    }

    pub fn num_terminals(&self) -> usize {
        self.chance.len()
    }

    pub fn payoff_range(&self) -> f64 {
        self.payoff_bounds.1 - self.payoff_bounds.0
    }

    pub fn payoff_bounds(&self) -> (f64, f64) {
        self.payoff_bounds
    }

    pub fn constant_sum(&self) -> Option<f64> {
        self.constant_sum
    }

    fn check_profile(&self, profile: &[&[f64]]) -> Result<()> {
        check_len(self.players, profile.len())?;
        for (i, x) in profile.iter().enumerate() {
            check_len(self.tfsdps[i].num_sequences(), x.len())?;
            if !self.tfsdps[i].is_sequence_form(x, STRATEGY_TOLERANCE) {
                return Err(Error::Validation(format!(
                    "strategy of player {i} is not a sequence-form strategy"
                )));
            }
        }
        Ok(())
    }

    /// Expected utility of every player under a sequence-form profile.
    pub fn expected_utilities(&self, profile: &[&[f64]]) -> Result<Vec<f64>> {
        self.check_profile(profile)?;
        let m = self.players;
        let mut out = vec![0.0; m];
        for z in 0..self.num_terminals() {
            let seqs = &self.sequences[z * m..(z + 1) * m];
            let reach: f64 = self.chance[z]
                * seqs
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| profile[i][s])
                    .product::<f64>();
            if reach == 0.0 {
                continue;
            }
            for (o, u) in out.iter_mut().zip(&self.payoffs[z * m..(z + 1) * m]) {
                *o += reach * u;
            }
        }
        Ok(out)
    }

    /// `ℓ_i = −∇_{x_i} Ū_i`, so that `Ū_i = −⟨ℓ_i, x_i⟩`.
    pub fn loss_gradient(&self, player: usize, profile: &[&[f64]]) -> Result<Vec<f64>> {
        if player >= self.players {
            return Err(Error::InvalidArgument(format!("no player {player}")));
        }
        self.check_profile(profile)?;
        Ok(self.gradient_unchecked(player, profile))
    }

    /// Loss gradients of every player from one profile.
    pub fn loss_gradients(&self, profile: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        self.check_profile(profile)?;
        Ok((0..self.players)
            .map(|i| self.gradient_unchecked(i, profile))
            .collect())
    }

    fn gradient_unchecked(&self, player: usize, profile: &[&[f64]]) -> Vec<f64> {
        let m = self.players;
        let mut loss = vec![0.0; self.tfsdps[player].num_sequences()];
        for z in 0..self.num_terminals() {
            let seqs = &self.sequences[z * m..(z + 1) * m];
            let mut others = self.chance[z];
            for (k, &s) in seqs.iter().enumerate() {
                if k != player {
                    others *= profile[k][s];
                }
            }
            if others != 0.0 {
                loss[seqs[player]] -= others * self.payoffs[z * m + player];
            }
        }
        loss
    }

    /// `max_{x̂_1} Ū_1(x̂_1, x_2) + max_{x̂_2} Ū_2(x_1, x̂_2) − c` for a
    /// two-player game with constant payoff sum `c` (zero-sum when `c = 0`).
    pub fn exploitability(&self, x1: &[f64], x2: &[f64]) -> Result<f64> {
        if self.players != 2 {
            return Err(Error::Validation(format!(
                "exploitability needs two players, game has {}",
                self.players
            )));
        }
        let Some(c) = self.constant_sum else {
            return Err(Error::Validation("game is not zero-sum".into()));
        };
        let grads = self.loss_gradients(&[x1, x2])?;
        let gain1 = -best_response_value(&self.tfsdps[0], &grads[0])?;
        let gain2 = -best_response_value(&self.tfsdps[1], &grads[1])?;
        Ok((gain1 + gain2 - c).max(0.0))
    }
}

/// `min_{v∈Π} ⟨loss, v⟩` over deterministic sequence-form strategies.
pub fn best_response_value(tfsdp: &Tfsdp, loss: &[f64]) -> Result<f64> {
    Ok(best_response(tfsdp, loss)?.0)
}

/// Minimising deterministic strategy together with its value. Ties go to
/// the lowest action index.
pub fn best_response(tfsdp: &Tfsdp, loss: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_len(tfsdp.num_sequences(), loss.len())?;
    if loss.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("loss"));
    }
    let n = tfsdp.num_decision_points();
    let mut value = vec![0.0; n];
    let mut choice = vec![0usize; n];
    let mut seq_value = loss.to_vec();
    for j in (0..n).rev() {
        let p = tfsdp.decision_point(j);
        let mut best = f64::INFINITY;
        for (a, s) in p.sequences().enumerate() {
            for &c in tfsdp.children(s) {
                seq_value[s] += value[c];
            }
            if seq_value[s] < best {
                best = seq_value[s];
                choice[j] = a;
            }
        }
        value[j] = best;
    }
    let root = loss[EMPTY_SEQUENCE]
        + tfsdp
            .children(EMPTY_SEQUENCE)
            .iter()
            .map(|&c| value[c])
            .sum::<f64>();

    let mut behavior = vec![0.0; tfsdp.num_sequences()];
    for (j, &a) in choice.iter().enumerate() {
        behavior[tfsdp.sequence(j, a)] = 1.0;
    }
    Ok((root, tfsdp.sequence_form_from_behavior(&behavior)))
}
