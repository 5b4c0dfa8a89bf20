//! Counterfactual regret minimization with per-decision-point regret
//! matching, regret matching+ or multiplicative weights.

use std::fmt;

use crate::error::{check_finite, check_len, Error, Result};
use crate::kernels::Tfsdp;
use crate::learning::{LearningRate, OnlineLearner};
use crate::numerics::log_sum_exp;

/// Distribution proportional to the positive part of `r`; uniform when no
/// entry is positive.
pub fn regret_matching(r: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; r.len()];
    regret_matching_into(r, &mut out);
    out
}

fn regret_matching_into(r: &[f64], out: &mut [f64]) {
    let total: f64 = r.iter().map(|v| v.max(0.0)).sum();
    if total > 0.0 {
        for (o, v) in out.iter_mut().zip(r) {
            *o = v.max(0.0) / total;
        }
    } else {
        let u = 1.0 / r.len() as f64;
        out.iter_mut().for_each(|o| *o = u);
    }
}

#[derive(Debug, Clone)]
pub enum LocalMinimizer {
    RegretMatching,
    RegretMatchingPlus,
    Mwu(LearningRate),
}

impl LocalMinimizer {
    pub fn name(&self) -> &'static str {
        match self {
            Self::RegretMatching => "cfr-rm",
            Self::RegretMatchingPlus => "cfr-rm+",
            Self::Mwu(_) => "cfr-mwu",
        }
    }
}

impl fmt::Display for LocalMinimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-decision-point CFR state, stored flat by sequence index. For the MWU
/// variant `regrets` holds `η`-weighted cumulative regrets, whose softmax is
/// the local strategy.
#[derive(Debug, Clone)]
pub struct CfrState {
    variant: LocalMinimizer,
    regrets: Vec<f64>,
    behavior: Vec<f64>,
    strategy_sum: Vec<f64>,
    iterations: u64,
}

impl CfrState {
    pub fn new(tfsdp: &Tfsdp, variant: LocalMinimizer) -> Self {
        let n = tfsdp.num_sequences();
        let mut behavior = vec![1.0; n];
        for p in tfsdp.decision_points() {
            for s in p.sequences() {
                behavior[s] = 1.0 / p.num_actions as f64;
            }
        }
        Self {
            variant,
            regrets: vec![0.0; n],
            behavior,
            strategy_sum: vec![0.0; n],
            iterations: 0,
        }
    }

    pub fn variant(&self) -> &LocalMinimizer {
        &self.variant
    }

    /// Cumulative regrets indexed by sequence (entry 0 unused).
    pub fn regrets(&self) -> &[f64] {
        &self.regrets
    }

    /// Local strategies indexed by sequence (entry 0 is 1).
    pub fn behavior(&self) -> &[f64] {
        &self.behavior
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn current(&self, tfsdp: &Tfsdp) -> Vec<f64> {
        tfsdp.sequence_form_from_behavior(&self.behavior)
    }

    /// Uniform average of the sequence-form strategies played so far.
    pub fn average(&self, tfsdp: &Tfsdp) -> Vec<f64> {
        if self.iterations == 0 {
            return self.current(tfsdp);
        }
        let t = self.iterations as f64;
        self.strategy_sum.iter().map(|v| v / t).collect()
    }
}

/// Feeds the loss of the current strategy to every local minimizer and
/// returns the next sequence-form strategy.
pub fn cfr_iteration(state: &mut CfrState, tfsdp: &Tfsdp, loss: &[f64]) -> Result<Vec<f64>> {
    let n = tfsdp.num_sequences();
    check_len(n, loss.len())?;
    check_len(n, state.regrets.len())?;
    check_finite(loss, "loss")?;
    let eta = match &state.variant {
        LocalMinimizer::Mwu(schedule) => schedule.at(state.iterations + 2)?,
        _ => 0.0,
    };

    let played = tfsdp.sequence_form_from_behavior(&state.behavior);
    for (acc, x) in state.strategy_sum.iter_mut().zip(&played) {
        *acc += x;
    }
    state.iterations += 1;

    // Counterfactual losses: v[s] is the loss of sequence s plus the value of
    // every decision point reached right after it.
    let mut value = loss.to_vec();
    for p in tfsdp.decision_points().iter().rev() {
        let mut v_j = 0.0;
        for s in p.sequences() {
            for &c in tfsdp.children(s) {
                value[s] += point_value(tfsdp, c, &value, &state.behavior);
            }
            v_j += state.behavior[s] * value[s];
        }
        for s in p.sequences() {
            let r = &mut state.regrets[s];
            match state.variant {
                LocalMinimizer::RegretMatching => *r += v_j - value[s],
                LocalMinimizer::RegretMatchingPlus => *r = (*r + v_j - value[s]).max(0.0),
                LocalMinimizer::Mwu(_) => *r += eta * (v_j - value[s]),
            }
        }
    }

    for p in tfsdp.decision_points() {
        let range = p.sequences();
        let (r, out) = (&state.regrets[range.clone()], &mut state.behavior[range]);
        match state.variant {
            LocalMinimizer::Mwu(_) => {
                let z = log_sum_exp(r);
                for (o, v) in out.iter_mut().zip(r) {
                    *o = (v - z).exp();
                }
            }
            _ => regret_matching_into(r, out),
        }
    }
    if state.behavior.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("local strategy"));
    }
    Ok(tfsdp.sequence_form_from_behavior(&state.behavior))
}

fn point_value(tfsdp: &Tfsdp, j: usize, value: &[f64], behavior: &[f64]) -> f64 {
    tfsdp
        .decision_point(j)
        .sequences()
        .map(|s| behavior[s] * value[s])
        .sum()
}

/// CFR wrapped in the learner protocol; predictions are ignored.
#[derive(Debug, Clone)]
pub struct CfrLearner {
    tfsdp: Tfsdp,
    state: CfrState,
    awaiting_loss: bool,
}

impl CfrLearner {
    pub fn new(tfsdp: Tfsdp, variant: LocalMinimizer) -> Self {
        let state = CfrState::new(&tfsdp, variant);
        Self {
            tfsdp,
            state,
            awaiting_loss: false,
        }
    }

    pub fn state(&self) -> &CfrState {
        &self.state
    }

    pub fn average(&self) -> Vec<f64> {
        self.state.average(&self.tfsdp)
    }
}

impl OnlineLearner for CfrLearner {
    fn dim(&self) -> usize {
        self.tfsdp.num_sequences()
    }

    fn next_iterate(&mut self, prediction: &[f64]) -> Result<Vec<f64>> {
        if self.awaiting_loss {
            return Err(Error::State("step called twice without observe_loss"));
        }
        check_len(self.dim(), prediction.len())?;
        self.awaiting_loss = true;
        Ok(self.state.current(&self.tfsdp))
    }

    fn observe_loss(&mut self, loss: &[f64]) -> Result<()> {
        if !self.awaiting_loss {
            return Err(Error::State("observe_loss called without a preceding step"));
        }
        cfr_iteration(&mut self.state, &self.tfsdp, loss)?;
        self.awaiting_loss = false;
        Ok(())
    }
}
