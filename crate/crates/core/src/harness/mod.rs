//! Self-play in the canonical optimistic setup: at every iteration each
//! player receives its previous loss as prediction, all players commit to a
//! strategy simultaneously, and each then observes the gradient of its
//! negated utility at the joint profile.

mod clock;
mod spec;
mod tools;

use clock::Instant;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

pub use spec::{parse_domain, random_nfg, GameSpec, DEFAULT_DAG_EDGES};
pub use tools::{
    bench, fit_linear, oracle_check, BenchReport, BenchRow, CheckReport, LinearFit, CHECK_TOLERANCE,
};

use crate::baselines::{CfrLearner, LocalMinimizer};
use crate::efg::{best_response_value, GameTree, SequenceFormGame};
use crate::error::{check_len, Error, Result};
use crate::kernels::Tfsdp;
use crate::learning::{KomwuLearner, LearningRate, OnlineLearner};
use crate::numerics::dot;
use crate::oracle::EnumerateVertices;

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "KOMWU_SEED";

pub const CSV_HEADER: &str = "t,player,regret,max_regret,expl_last,expl_avg,iter_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Komwu,
    Kmwu,
    CfrRm,
    CfrRmPlus,
    CfrMwu,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Self::Komwu,
        Self::Kmwu,
        Self::CfrRm,
        Self::CfrRmPlus,
        Self::CfrMwu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Komwu => "komwu",
            Self::Kmwu => "kmwu",
            Self::CfrRm => "cfr-rm",
            Self::CfrRmPlus => "cfr-rm+",
            Self::CfrMwu => "cfr-mwu",
        }
    }

    fn uses_eta(self) -> bool {
        matches!(self, Self::Komwu | Self::Kmwu | Self::CfrMwu)
    }

    fn learner(self, tfsdp: &Tfsdp, schedule: &LearningRate) -> Box<dyn OnlineLearner> {
        let tfsdp = tfsdp.clone();
        let schedule = schedule.clone();
        match self {
            Self::Komwu => Box::new(KomwuLearner::new(tfsdp, schedule)),
            Self::Kmwu => Box::new(KomwuLearner::non_optimistic(tfsdp, schedule)),
            Self::CfrRm => Box::new(CfrLearner::new(tfsdp, LocalMinimizer::RegretMatching)),
            Self::CfrRmPlus => Box::new(CfrLearner::new(tfsdp, LocalMinimizer::RegretMatchingPlus)),
            Self::CfrMwu => Box::new(CfrLearner::new(tfsdp, LocalMinimizer::Mwu(schedule))),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown algorithm `{s}` (expected komwu, kmwu, cfr-rm, cfr-rm+ or cfr-mwu)"
                ))
            })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Constant,
    /// `η/√t`.
    InverseSqrt,
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "inv-sqrt" => Ok(Self::InverseSqrt),
            _ => Err(Error::InvalidArgument(format!(
                "unknown schedule `{s}` (expected constant or inv-sqrt)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub game: GameSpec,
    /// One algorithm for everybody, or one per player.
    pub algorithms: Vec<Algorithm>,
    pub eta: f64,
    pub schedule: Schedule,
    pub iterations: u64,
    /// Regrets and exploitability are evaluated every `stride` iterations
    /// and at the last one.
    pub stride: u64,
    pub seed: u64,
    /// Rescale payoffs affinely to `[0, 1]`.
    pub normalize: bool,
    /// Keep every iterate in the record (needed for [`cce_gap`]).
    pub keep_iterates: bool,
}

impl RunConfig {
    pub fn new(game: GameSpec, algorithm: Algorithm) -> Self {
        Self {
            game,
            algorithms: vec![algorithm],
            eta: 1.0,
            schedule: Schedule::Constant,
            iterations: 1000,
            stride: 10,
            seed: 0,
            normalize: false,
            keep_iterates: false,
        }
    }

    /// Applies the seed override from [`SEED_ENV`], if set.
    pub fn with_env_seed(mut self) -> Result<Self> {
        if let Ok(text) = std::env::var(SEED_ENV) {
            self.seed = text.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("{SEED_ENV}={text} is not an unsigned integer"))
            })?;
        }
        Ok(self)
    }

    pub fn learning_rate(&self) -> Result<LearningRate> {
        let rate = match self.schedule {
            Schedule::Constant => LearningRate::Constant(self.eta),
            Schedule::InverseSqrt => LearningRate::InverseSqrt(self.eta),
        };
        rate.at(1)?;
        Ok(rate)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument(
                "iterations must be at least 1".into(),
            ));
        }
        if self.stride == 0 {
            return Err(Error::InvalidArgument(
                "record stride must be at least 1".into(),
            ));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidArgument("no algorithm given".into()));
        }
        if self.algorithms.iter().any(|a| a.uses_eta()) {
            self.learning_rate()?;
        }
        Ok(())
    }

    fn algorithm_for(&self, player: usize, players: usize) -> Result<Algorithm> {
        match self.algorithms.len() {
            1 => Ok(self.algorithms[0]),
            n if n == players => Ok(self.algorithms[player]),
            n => Err(Error::InvalidArgument(format!(
                "{n} algorithms given for a {players}-player game"
            ))),
        }
    }

    pub fn build_game(&self) -> Result<GameTree> {
        let game = self.game.build(self.seed)?;
        Ok(if self.normalize {
            game.normalized()
        } else {
            game
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub t: u64,
    pub regrets: Vec<f64>,
    pub max_regret: f64,
    /// Exploitability of the current and the averaged profile, for
    /// two-player constant-sum games only.
    pub expl_last: Option<f64>,
    pub expl_avg: Option<f64>,
    /// Mean wall time per iteration since the previous row.
    pub iter_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub players: usize,
    pub rows: Vec<RecordRow>,
    pub last: Vec<Vec<f64>>,
    pub average: Vec<Vec<f64>>,
    /// `iterates[t][i]`, when requested.
    pub iterates: Option<Vec<Vec<Vec<f64>>>>,
    /// Total time spent inside the learners.
    pub learner_seconds: f64,
    pub total_seconds: f64,
}

impl RunRecord {
    pub fn final_row(&self) -> &RecordRow {
        self.rows.last().expect("a run records at least one row")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in &self.rows {
            let (el, ea) = (opt(row.expl_last), opt(row.expl_avg));
            for (i, r) in row.regrets.iter().enumerate() {
                writeln!(
                    out,
                    "{},{i},{r},{},{el},{ea},{}",
                    row.t, row.max_regret, row.iter_ms
                )?;
            }
            let total: f64 = row.regrets.iter().sum();
            writeln!(
                out,
                "{},all,{total},{},{el},{ea},{}",
                row.t, row.max_regret, row.iter_ms
            )?;
        }
        Ok(())
    }
}

/// Running regret: `Σ_t ⟨ℓ^t, x^t⟩ − min_{v} ⟨Σ_t ℓ^t, v⟩`.
#[derive(Debug, Clone)]
pub struct RegretTracker {
    incurred: f64,
    loss_sum: Vec<f64>,
}

impl RegretTracker {
    pub fn new(dim: usize) -> Self {
        Self {
            incurred: 0.0,
            loss_sum: vec![0.0; dim],
        }
    }

    pub fn record(&mut self, loss: &[f64], iterate: &[f64]) -> Result<()> {
        check_len(self.loss_sum.len(), loss.len())?;
        check_len(self.loss_sum.len(), iterate.len())?;
        self.incurred += dot(loss, iterate);
        self.loss_sum
            .iter_mut()
            .zip(loss)
            .for_each(|(s, l)| *s += l);
        Ok(())
    }

    pub fn regret(&self, tfsdp: &Tfsdp) -> Result<f64> {
        Ok(self.incurred - best_response_value(tfsdp, &self.loss_sum)?)
    }
}

pub fn cumulative_regret(tfsdp: &Tfsdp, losses: &[Vec<f64>], iterates: &[Vec<f64>]) -> Result<f64> {
    check_len(losses.len(), iterates.len())?;
    let mut tracker = RegretTracker::new(tfsdp.num_sequences());
    for (l, x) in losses.iter().zip(iterates) {
        tracker.record(l, x)?;
    }
    tracker.regret(tfsdp)
}

pub fn run_cols(config: &RunConfig) -> Result<RunRecord> {
    config.validate()?;
    let game = SequenceFormGame::new(&config.build_game()?)?;
    run_cols_on(&game, config)
}

/// Like [`run_cols`] on an already built game; `config.game` is ignored.
pub fn run_cols_on(game: &SequenceFormGame, config: &RunConfig) -> Result<RunRecord> {
    config.validate()?;
    let n = game.players();
    let schedule = config
        .learning_rate()
        .unwrap_or(LearningRate::Constant(1.0));
    let mut learners = (0..n)
        .map(|i| {
            Ok(config
                .algorithm_for(i, n)?
                .learner(game.tfsdp(i), &schedule))
        })
        .collect::<Result<Vec<_>>>()?;
    let two_player_constant_sum = n == 2 && game.constant_sum().is_some();

    let dims: Vec<usize> = (0..n).map(|i| game.tfsdp(i).num_sequences()).collect();
    let mut predictions: Vec<Vec<f64>> = dims.iter().map(|&d| vec![0.0; d]).collect();
    let mut sums: Vec<Vec<f64>> = predictions.clone();
    let mut trackers: Vec<RegretTracker> = dims.iter().map(|&d| RegretTracker::new(d)).collect();
    let mut profile: Vec<Vec<f64>> = Vec::new();
    let mut iterates = config.keep_iterates.then(Vec::new);
    let mut rows = Vec::new();
    let mut learner_seconds = 0.0;
    let run_start = Instant::now();
    let mut window_start = Instant::now();
    let mut window_len = 0u64;

    for t in 1..=config.iterations {
        let step_start = Instant::now();
        profile = learners
            .iter_mut()
            .zip(&predictions)
            .map(|(l, m)| l.next_iterate(m))
            .collect::<Result<_>>()?;
        learner_seconds += step_start.elapsed_secs();

        let refs: Vec<&[f64]> = profile.iter().map(Vec::as_slice).collect();
        let losses = game.loss_gradients(&refs)?;

        let observe_start = Instant::now();
        for (learner, loss) in learners.iter_mut().zip(&losses) {
            learner.observe_loss(loss)?;
        }
        learner_seconds += observe_start.elapsed_secs();

        for i in 0..n {
            trackers[i].record(&losses[i], &profile[i])?;
            sums[i]
                .iter_mut()
                .zip(&profile[i])
                .for_each(|(s, x)| *s += x);
        }
        if let Some(all) = iterates.as_mut() {
            all.push(profile.clone());
        }
        predictions = losses;
        window_len += 1;

        if t % config.stride == 0 || t == config.iterations {
            let iter_ms = window_start.elapsed_secs() * 1e3 / window_len as f64;
            let regrets = (0..n)
                .map(|i| trackers[i].regret(game.tfsdp(i)))
                .collect::<Result<Vec<f64>>>()?;
            let max_regret = regrets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (expl_last, expl_avg) = if two_player_constant_sum {
                let avg = average(&sums, t);
                (
                    Some(game.exploitability(&profile[0], &profile[1])?),
                    Some(game.exploitability(&avg[0], &avg[1])?),
                )
            } else {
                (None, None)
            };
            rows.push(RecordRow {
                t,
                regrets,
                max_regret,
                expl_last,
                expl_avg,
                iter_ms,
            });
            window_start = Instant::now();
            window_len = 0;
        }
    }

    Ok(RunRecord {
        players: n,
        rows,
        last: profile,
        average: average(&sums, config.iterations),
        iterates,
        learner_seconds,
        total_seconds: run_start.elapsed_secs(),
    })
}

fn average(sums: &[Vec<f64>], t: u64) -> Vec<Vec<f64>> {
    sums.iter()
        .map(|s| s.iter().map(|v| v / t as f64).collect())
        .collect()
}

/// Largest gain any player gets by deviating to a fixed vertex against the
/// average product distribution `(1/T) Σ_t ⊗_i x_i^t`. Deviations are
/// enumerated explicitly, so every player needs at most `cap` vertices.
pub fn cce_gap(game: &SequenceFormGame, iterates: &[Vec<Vec<f64>>], cap: usize) -> Result<f64> {
    if iterates.is_empty() {
        return Err(Error::InvalidArgument("no iterates".into()));
    }
    let n = game.players();
    let vertex_sets = (0..n)
        .map(|i| game.tfsdp(i).enumerate_vertices_capped(cap))
        .collect::<Result<Vec<_>>>()?;
    let t = iterates.len() as f64;
    let mut played = vec![0.0; n];
    let mut deviation: Vec<Vec<f64>> = vertex_sets.iter().map(|v| vec![0.0; v.len()]).collect();
    for profile in iterates {
        check_len(n, profile.len())?;
        let refs: Vec<&[f64]> = profile.iter().map(Vec::as_slice).collect();
        let u = game.expected_utilities(&refs)?;
        for i in 0..n {
            played[i] += u[i] / t;
            for (k, v) in vertex_sets[i].vertices().iter().enumerate() {
                let v: Vec<f64> = v.iter().map(|&b| f64::from(b)).collect();
                let mut swapped = refs.clone();
                swapped[i] = &v;
                deviation[i][k] += game.expected_utilities(&swapped)?[i] / t;
            }
        }
    }
    Ok((0..n)
        .map(|i| {
            deviation[i]
                .iter()
                .map(|d| d - played[i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::NEG_INFINITY, f64::max))
}
