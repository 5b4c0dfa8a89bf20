//! Oracle self-test and per-iteration timing.

use super::clock::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{run_cols_on, Algorithm, GameSpec, RunConfig};
use crate::efg::SequenceFormGame;
use crate::error::{Error, Result};
use crate::kernels::{Domain, KernelDomain};
use crate::learning::{KomwuLearner, LearningRate};
use crate::oracle::{EnumerateVertices, VertexOmwu, DEFAULT_VERTEX_CAP};

/// Maximum coordinate deviation accepted by [`oracle_check`].
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub dim: usize,
    pub vertices: usize,
    pub iterations: u64,
    pub max_deviation: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= CHECK_TOLERANCE
    }
}

/// Runs KOMWU and the explicit vertex OMWU side by side on random losses and
/// predictions in `[0, 1]` and reports the largest iterate difference.
pub fn oracle_check(domain: &Domain, iterations: u64, eta: f64, seed: u64) -> Result<CheckReport> {
    let schedule = LearningRate::constant(eta)?;
    let vertices = domain.enumerate_vertices_capped(DEFAULT_VERTEX_CAP)?;
    let count = vertices.len();
    let d = domain.dim();
    let mut oracle = VertexOmwu::new(vertices, schedule.clone())?;
    let mut learner = KomwuLearner::new(domain, schedule);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_deviation: f64 = 0.0;
    for _ in 0..iterations {
        let m: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
        let l: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
        let x = learner.step(&m)?;
        let y = oracle.step(&m)?;
        for (a, b) in x.iter().zip(&y) {
            max_deviation = max_deviation.max((a - b).abs());
        }
        learner.observe_loss(&l)?;
        oracle.observe_loss(&l)?;
    }
    Ok(CheckReport {
        dim: d,
        vertices: count,
        iterations,
        max_deviation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub ranks: usize,
    /// Sequences summed over players.
    pub sequences: usize,
    /// Time spent in the learners per iteration, microseconds.
    pub learner_us: f64,
    /// Whole iteration including the loss gradients, microseconds.
    pub iteration_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

impl LinearFit {
    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Least-squares line through the points.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two points to fit".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all x values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Fit of learner time against sequence count.
    pub fit: LinearFit,
    /// `max_i |y_i − fit(x_i)| / fit(x_i)`.
    pub max_residual_ratio: f64,
}

/// Times KOMWU self-play for each rank count. `template` must be a Kuhn or
/// Leduc spec; its rank parameter is replaced. Each size is run `repeats`
/// times and the fastest run is kept.
pub fn bench(
    template: &GameSpec,
    ranks: &[usize],
    iterations: u64,
    repeats: usize,
) -> Result<BenchReport> {
    if ranks.len() < 2 {
        return Err(Error::InvalidArgument(
            "bench needs at least two sizes".into(),
        ));
    }
    let mut rows = Vec::with_capacity(ranks.len());
    for &r in ranks {
        let spec = match template {
            GameSpec::Kuhn { players, .. } => GameSpec::Kuhn {
                players: *players,
                ranks: r,
            },
            GameSpec::Leduc(p) => {
                let mut p = p.clone();
                p.ranks = r;
                GameSpec::Leduc(p)
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "bench sweeps ranks of kuhn or leduc, got {other}"
                )))
            }
        };
        let game = SequenceFormGame::new(&spec.build(0)?)?;
        let sequences = game.tfsdps().iter().map(|t| t.num_sequences()).sum();
        let mut cfg = RunConfig::new(spec, Algorithm::Komwu);
        cfg.iterations = iterations.max(1);
        cfg.stride = cfg.iterations;
        let (mut learner_us, mut iteration_us) = (f64::INFINITY, f64::INFINITY);
        for _ in 0..repeats.max(1) {
            let start = Instant::now();
            let rec = run_cols_on(&game, &cfg)?;
            let per = 1e6 / cfg.iterations as f64;
            learner_us = learner_us.min(rec.learner_seconds * per);
            iteration_us = iteration_us.min(start.elapsed_secs() * per);
        }
        rows.push(BenchRow {
            ranks: r,
            sequences,
            learner_us,
            iteration_us,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.sequences as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.learner_us).collect();
    let fit = fit_linear(&xs, &ys)?;
    let max_residual_ratio = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| (y - fit.at(x)).abs() / fit.at(x))
        .fold(0.0, f64::max);
    Ok(BenchReport {
        rows,
        fit,
        max_residual_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::parse_domain;

    #[test]
    fn check_passes_on_small_domains() {
        for spec in [
            "nset:d=5,n=2",
            "cube:d=3",
            "dag",
            "kuhn",
            "simplex:n=4*nset:d=4,n=3",
        ] {
            let report = oracle_check(&parse_domain(spec).unwrap(), 30, 0.5, 1).unwrap();
            assert!(report.passed(), "{spec}: {report:?}");
        }
    }

    #[test]
    fn check_reports_capacity() {
        let d = parse_domain("cube:d=20").unwrap();
        assert!(matches!(
            oracle_check(&d, 1, 0.5, 0),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn exact_line() {
        let fit = fit_linear(&[1.0, 2.0, 4.0], &[3.0, 5.0, 9.0]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12 && (fit.intercept - 1.0).abs() < 1e-12);
        assert!(fit_linear(&[1.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(fit_linear(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn bench_shape() {
        let report = bench(
            &GameSpec::Kuhn {
                players: 2,
                ranks: 3,
            },
            &[3, 4],
            5,
            1,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 2);
        // P1 has 2r decision points, P2 has 2r as well.
        assert_eq!(report.rows[0].sequences, 2 * (1 + 4 * 3));
        assert!(bench(&GameSpec::MatchingPennies, &[3, 4], 5, 1).is_err());
    }
}
