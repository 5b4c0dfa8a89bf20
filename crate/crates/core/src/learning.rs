//! Kernelized (optimistic) multiplicative weights and the plain simplex OMWU.
//!
//! [`KomwuLearner`] never materialises the distribution over vertices. It
//! keeps `s^t = Σ_τ η^τ·w^τ`, so that the vertex weights are proportional to
//! `Π_{k∈v} b^t[k]` with `log b^t = −s^t`, and asks the domain for the
//! resulting marginals.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_finite, check_len, Error, Result};
use crate::kernels::KernelDomain;
use crate::numerics::log_sum_exp;

/// Learning-rate schedule `t ↦ η^t` (with `t` starting at 1).
#[derive(Clone)]
pub enum LearningRate {
    Constant(f64),
    /// `η^t = η / √t`.
    InverseSqrt(f64),
    Custom(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
}

impl LearningRate {
    pub fn constant(eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive and finite, got {eta}"
            )));
        }
        Ok(Self::Constant(eta))
    }

    pub fn at(&self, t: u64) -> Result<f64> {
        let eta = match self {
            Self::Constant(eta) => *eta,
            Self::InverseSqrt(eta) => *eta / (t.max(1) as f64).sqrt(),
            Self::Custom(f) => f(t),
        };
        if eta.is_finite() && eta > 0.0 {
            Ok(eta)
        } else {
            Err(Error::InvalidArgument(format!(
                "learning rate at t={t} is {eta}, expected positive and finite"
            )))
        }
    }
}

impl fmt::Debug for LearningRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(eta) => write!(f, "Constant({eta})"),
            Self::InverseSqrt(eta) => write!(f, "InverseSqrt({eta})"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Step/observe protocol shared by every learner driven by the harness.
pub trait OnlineLearner {
    fn dim(&self) -> usize;

    /// Receives the prediction `m^t` and outputs the iterate `x^t`.
    fn next_iterate(&mut self, prediction: &[f64]) -> Result<Vec<f64>>;

    /// Receives the loss `ℓ^t` for the iterate just produced.
    fn observe_loss(&mut self, loss: &[f64]) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    AwaitingPrediction,
    AwaitingLoss,
}

/// Kernelized OMWU over any [`KernelDomain`]. With `optimistic == false`
/// predictions are ignored (treated as zero), which is kernelized MWU.
#[derive(Debug, Clone)]
pub struct KomwuLearner<D> {
    domain: D,
    schedule: LearningRate,
    optimistic: bool,
    accumulated: Vec<f64>,
    prev_loss: Vec<f64>,
    prev_prediction: Vec<f64>,
    prediction: Vec<f64>,
    t: u64,
    phase: Phase,
}

impl<D: KernelDomain> KomwuLearner<D> {
    pub fn new(domain: D, schedule: LearningRate) -> Self {
        Self::with_optimism(domain, schedule, true)
    }

    /// Kernelized MWU: the non-predictive special case.
    pub fn non_optimistic(domain: D, schedule: LearningRate) -> Self {
        Self::with_optimism(domain, schedule, false)
    }

    fn with_optimism(domain: D, schedule: LearningRate, optimistic: bool) -> Self {
        let d = domain.dim();
        Self {
            domain,
            schedule,
            optimistic,
            accumulated: vec![0.0; d],
            prev_loss: vec![0.0; d],
            prev_prediction: vec![0.0; d],
            prediction: vec![0.0; d],
            t: 0,
            phase: Phase::AwaitingPrediction,
        }
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    pub fn is_optimistic(&self) -> bool {
        self.optimistic
    }

    /// `s^t = Σ_{τ≤t} η^τ·w^τ`.
    pub fn accumulated(&self) -> &[f64] {
        &self.accumulated
    }

    /// Number of completed iterations.
    pub fn iteration(&self) -> u64 {
        self.t
    }

    /// Produces `x^t` given the prediction `m^t`.
    pub fn step(&mut self, prediction: &[f64]) -> Result<Vec<f64>> {
        if self.phase != Phase::AwaitingPrediction {
            return Err(Error::State("step called twice without observe_loss"));
        }
        let d = self.domain.dim();
        check_len(d, prediction.len())?;
        check_finite(prediction, "prediction")?;
        if self.optimistic {
            self.prediction.copy_from_slice(prediction);
        } else {
            self.prediction.fill(0.0);
        }
        let eta = self.schedule.at(self.t + 1)?;
        for k in 0..d {
            let w = self.prev_loss[k] - self.prev_prediction[k] + self.prediction[k];
            self.accumulated[k] += eta * w;
        }
        let log_b: Vec<f64> = self.accumulated.iter().map(|s| -s).collect();
        let x = self.domain.marginals(&log_b)?;
        self.phase = Phase::AwaitingLoss;
        Ok(x)
    }

    pub fn observe_loss(&mut self, loss: &[f64]) -> Result<()> {
        if self.phase != Phase::AwaitingLoss {
            return Err(Error::State("observe_loss called without a preceding step"));
        }
        check_len(self.domain.dim(), loss.len())?;
        check_finite(loss, "loss")?;
        self.prev_loss.copy_from_slice(loss);
        std::mem::swap(&mut self.prev_prediction, &mut self.prediction);
        self.t += 1;
        self.phase = Phase::AwaitingPrediction;
        Ok(())
    }
}

impl<D: KernelDomain> OnlineLearner for KomwuLearner<D> {
    fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn next_iterate(&mut self, prediction: &[f64]) -> Result<Vec<f64>> {
        self.step(prediction)
    }

    fn observe_loss(&mut self, loss: &[f64]) -> Result<()> {
        KomwuLearner::observe_loss(self, loss)
    }
}

/// One multiplicative-weights update on the simplex:
/// `λ'[a] ∝ λ[a]·exp(−η·w[a])`.
pub fn omwu_update(lambda: &[f64], w: &[f64], eta: f64) -> Result<Vec<f64>> {
    if lambda.is_empty() {
        return Err(Error::InvalidArgument("empty choice set".into()));
    }
    check_len(lambda.len(), w.len())?;
    let logits: Vec<f64> = lambda
        .iter()
        .zip(w)
        .map(|(l, wa)| l.ln() - eta * wa)
        .collect();
    let z = log_sum_exp(&logits);
    Ok(logits.iter().map(|l| (l - z).exp()).collect())
}

/// OMWU on a finite choice set, with the distribution kept in log space.
#[derive(Debug, Clone)]
pub struct SimplexOmwu {
    log_lambda: Vec<f64>,
    schedule: LearningRate,
    prev_loss: Vec<f64>,
    prev_prediction: Vec<f64>,
    prediction: Vec<f64>,
    t: u64,
    phase: Phase,
}

impl SimplexOmwu {
    pub fn new(num_choices: usize, schedule: LearningRate) -> Result<Self> {
        if num_choices == 0 {
            return Err(Error::InvalidArgument("empty choice set".into()));
        }
        let uniform = -(num_choices as f64).ln();
        Ok(Self {
            log_lambda: vec![uniform; num_choices],
            schedule,
            prev_loss: vec![0.0; num_choices],
            prev_prediction: vec![0.0; num_choices],
            prediction: vec![0.0; num_choices],
            t: 0,
            phase: Phase::AwaitingPrediction,
        })
    }

    pub fn distribution(&self) -> Vec<f64> {
        self.log_lambda.iter().map(|l| l.exp()).collect()
    }

    pub fn step(&mut self, prediction: &[f64]) -> Result<Vec<f64>> {
        if self.phase != Phase::AwaitingPrediction {
            return Err(Error::State("step called twice without observe_loss"));
        }
        check_len(self.log_lambda.len(), prediction.len())?;
        check_finite(prediction, "prediction")?;
        self.prediction.copy_from_slice(prediction);
        let eta = self.schedule.at(self.t + 1)?;
        for a in 0..self.log_lambda.len() {
            let w = self.prev_loss[a] - self.prev_prediction[a] + self.prediction[a];
            self.log_lambda[a] -= eta * w;
        }
        let z = log_sum_exp(&self.log_lambda);
        self.log_lambda.iter_mut().for_each(|l| *l -= z);
        self.phase = Phase::AwaitingLoss;
        Ok(self.distribution())
    }

    pub fn observe_loss(&mut self, loss: &[f64]) -> Result<()> {
        if self.phase != Phase::AwaitingLoss {
            return Err(Error::State("observe_loss called without a preceding step"));
        }
        check_len(self.log_lambda.len(), loss.len())?;
        check_finite(loss, "loss")?;
        self.prev_loss.copy_from_slice(loss);
        std::mem::swap(&mut self.prev_prediction, &mut self.prediction);
        self.t += 1;
        self.phase = Phase::AwaitingPrediction;
        Ok(())
    }
}

impl OnlineLearner for SimplexOmwu {
    fn dim(&self) -> usize {
        self.log_lambda.len()
    }

    fn next_iterate(&mut self, prediction: &[f64]) -> Result<Vec<f64>> {
        self.step(prediction)
    }

    fn observe_loss(&mut self, loss: &[f64]) -> Result<()> {
        SimplexOmwu::observe_loss(self, loss)
    }
}
