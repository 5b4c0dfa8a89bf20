//! Textual game and domain specifications, e.g. `kuhn:p=3,r=4`,
//! `nset:d=6,n=3` or `nset:d=4,n=2*cube:d=3`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::efg::{self, GameTree, LeducParams};
use crate::error::{Error, Result};
use crate::kernels::{
    random_tfsdp, DagFlowDomain, Domain, HypercubeDomain, NSetDomain, RandomTreeParams, Tfsdp,
};

/// Splits `name:k=v,k=v` into the name and its parameters, rejecting keys
/// outside `allowed`.
fn parse_params<'a>(
    text: &'a str,
    allowed: &[&str],
) -> Result<(&'a str, BTreeMap<&'a str, &'a str>)> {
    let (name, rest) = text.split_once(':').unwrap_or((text, ""));
    let mut params = BTreeMap::new();
    for item in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("expected key=value, got `{item}`")))?;
        let k = k.trim();
        if !allowed.contains(&k) {
            return Err(Error::InvalidArgument(format!(
                "unknown parameter `{k}` for `{name}` (expected one of {allowed:?})"
            )));
        }
        if params.insert(k, v.trim()).is_some() {
            return Err(Error::InvalidArgument(format!(
                "parameter `{k}` given twice"
            )));
        }
    }
    Ok((name.trim(), params))
}

fn get<T: FromStr>(params: &BTreeMap<&str, &str>, key: &str, default: T) -> Result<T> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("cannot parse `{key}={v}`"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GameSpec {
    Kuhn {
        players: usize,
        ranks: usize,
    },
    Leduc(LeducParams),
    MatchingPennies,
    /// General-sum normal-form game with payoffs drawn uniformly from
    /// `[-1, 1]` using the run seed.
    RandomNfg {
        players: usize,
        actions: usize,
    },
    Json(PathBuf),
}

impl GameSpec {
    pub fn build(&self, seed: u64) -> Result<GameTree> {
        match self {
            Self::Kuhn { players, ranks } => efg::kuhn(*players, *ranks),
            Self::Leduc(params) => efg::leduc(params),
            Self::MatchingPennies => Ok(efg::matching_pennies()),
            Self::RandomNfg { players, actions } => random_nfg(*players, *actions, seed),
            Self::Json(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::InvalidArgument(format!("cannot read {}: {e}", path.display()))
                })?;
                GameTree::from_json(&text)
            }
        }
    }
}

pub fn random_nfg(players: usize, actions: usize, seed: u64) -> Result<GameTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = actions.checked_pow(players as u32).unwrap_or(usize::MAX);
    if cells > 1 << 20 {
        return Err(Error::InvalidArgument("normal-form game too large".into()));
    }
    let table: Vec<Vec<f64>> = (0..cells)
        .map(|_| (0..players).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    efg::normal_form(&vec![actions; players], |profile| {
        let idx = profile.iter().fold(0, |acc, &a| acc * actions + a);
        table[idx].clone()
    })
}

impl FromStr for GameSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("json:") {
            return Ok(Self::Json(PathBuf::from(path)));
        }
        let (name, params) = parse_params(s, &["p", "r", "s", "bets", "a"])?;
        let only = |keys: &[&str]| -> Result<()> {
            match params.keys().find(|k| !keys.contains(k)) {
                Some(k) => Err(Error::InvalidArgument(format!(
                    "parameter `{k}` does not apply to `{name}`"
                ))),
                None => Ok(()),
            }
        };
        match name {
            "kuhn" => {
                only(&["p", "r"])?;
                let players = get(&params, "p", 2)?;
                let ranks = get(&params, "r", players + 1)?;
                Ok(Self::Kuhn { players, ranks })
            }
            "leduc" => {
                only(&["p", "r", "s", "bets"])?;
                let mut lp = LeducParams::new(get(&params, "p", 2)?);
                lp.ranks = get(&params, "r", lp.ranks)?;
                lp.suits = get(&params, "s", lp.suits)?;
                lp.max_bets = get(&params, "bets", lp.max_bets)?;
                Ok(Self::Leduc(lp))
            }
            "pennies" => {
                only(&[])?;
                Ok(Self::MatchingPennies)
            }
            "nfg" => {
                only(&["p", "a"])?;
                Ok(Self::RandomNfg {
                    players: get(&params, "p", 2)?,
                    actions: get(&params, "a", 2)?,
                })
            }
            _ => Err(Error::InvalidArgument(format!(
                "unknown game `{name}` (expected kuhn, leduc, pennies, nfg or json:PATH)"
            ))),
        }
    }
}

impl fmt::Display for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Kuhn { players, ranks } => write!(f, "kuhn:p={players},r={ranks}"),
            Self::Leduc(p) => write!(
                f,
                "leduc:p={},r={},s={},bets={}",
                p.players, p.ranks, p.suits, p.max_bets
            ),
            Self::MatchingPennies => f.write_str("pennies"),
            Self::RandomNfg { players, actions } => write!(f, "nfg:p={players},a={actions}"),
            Self::Json(path) => write!(f, "json:{}", path.display()),
        }
    }
}

/// The 5-node DAG used when `dag` is given without edges.
pub const DEFAULT_DAG_EDGES: &[(usize, usize)] =
    &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4)];

/// Parses a domain for the oracle self-test. Factors joined by `*` form a
/// Cartesian product.
pub fn parse_domain(spec: &str) -> Result<Domain> {
    let mut factors = spec.split('*').map(|f| parse_factor(f.trim()));
    let first = factors
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty domain".into()))??;
    factors.try_fold(first, |acc, next| Ok(Domain::product(acc, next?)))
}

fn parse_factor(spec: &str) -> Result<Domain> {
    let (name, params) = parse_params(
        spec,
        &["d", "n", "edges", "p", "r", "player", "seed", "depth"],
    )?;
    match name {
        "nset" => Ok(Domain::NSet(NSetDomain::new(
            get(&params, "d", 6)?,
            get(&params, "n", 3)?,
        )?)),
        "cube" => Ok(Domain::Cube(HypercubeDomain::new(get(&params, "d", 5)?)?)),
        "simplex" => Ok(Domain::Tree(Tfsdp::simplex(get(&params, "n", 3)?)?)),
        "dag" => {
            let edges = match params.get("edges") {
                None => DEFAULT_DAG_EDGES.to_vec(),
                Some(text) => parse_edges(text)?,
            };
            let nodes = edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0) + 1;
            Ok(Domain::Flow(DagFlowDomain::new(
                nodes,
                0,
                nodes - 1,
                edges,
            )?))
        }
        "kuhn" => {
            let players = get(&params, "p", 2)?;
            let ranks = get(&params, "r", players + 1)?;
            let player = get(&params, "player", 0)?;
            let game = efg::kuhn(players, ranks)?;
            Ok(Domain::Tree(efg::derive_tfsdp(&game, player)?))
        }
        "tree" => {
            let mut rng = ChaCha8Rng::seed_from_u64(get(&params, "seed", 0)?);
            let tree_params = RandomTreeParams {
                max_depth: get(&params, "depth", RandomTreeParams::default().max_depth)?,
                ..Default::default()
            };
            Ok(Domain::Tree(random_tfsdp(&mut rng, tree_params)))
        }
        _ => Err(Error::InvalidArgument(format!(
            "unknown domain `{name}` (expected nset, cube, simplex, dag, kuhn or tree)"
        ))),
    }
}

/// `0-1/1-2/...`: edges from node 0 (source) to the largest node (sink).
fn parse_edges(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split('/')
        .map(|e| {
            let parsed = e
                .split_once('-')
                .and_then(|(u, v)| Some((u.trim().parse().ok()?, v.trim().parse().ok()?)));
            parsed.ok_or_else(|| Error::InvalidArgument(format!("bad edge `{e}`, expected U-V")))
        })
        .collect()
}
