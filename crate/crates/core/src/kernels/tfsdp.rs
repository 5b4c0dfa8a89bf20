//! Tree-form sequential decision problems and their sequence-form kernel.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_log_input, check_pair, KernelDomain};
use crate::error::{Error, Result};
use crate::numerics::log_sum_exp_iter;

/// Index of the empty sequence `∅` in every [`Tfsdp`].
pub const EMPTY_SEQUENCE: usize = 0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionPoint {
    /// Parent sequence `p_j`.
    pub parent: usize,
    /// Sequences `ja` occupy `first_sequence .. first_sequence + num_actions`.
    pub first_sequence: usize,
    pub num_actions: usize,
}

impl DecisionPoint {
    pub fn sequences(&self) -> std::ops::Range<usize> {
        self.first_sequence..self.first_sequence + self.num_actions
    }
}

/// A player's decision problem in sequence form.
///
/// Sequences are indexed `0..num_sequences()` with `0` the empty sequence.
/// Decision points are stored top-down: every decision point comes after the
/// decision point owning its parent sequence, so a reverse scan is a valid
/// bottom-up order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tfsdp {
    points: Vec<DecisionPoint>,
    owner: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    point_labels: Vec<String>,
    action_labels: Vec<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct TfsdpBuilder {
    inner: Tfsdp,
}

impl Default for TfsdpBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl TfsdpBuilder {
    pub fn new() -> Self {
        Self {
            inner: Tfsdp {
                points: Vec::new(),
                owner: vec![None],
                children: vec![Vec::new()],
                point_labels: Vec::new(),
                action_labels: Vec::new(),
            },
        }
    }

    /// Adds a decision point below `parent` with `num_actions` actions and
    /// returns its index. Its sequences are `sequence(j, 0..num_actions)`.
    pub fn add_decision_point(&mut self, parent: usize, num_actions: usize) -> Result<usize> {
        let j = self.inner.points.len();
        let labels = (0..num_actions).map(|a| a.to_string()).collect();
        self.add_labeled(parent, format!("j{j}"), labels)
    }

    pub fn add_labeled(
        &mut self,
        parent: usize,
        label: impl Into<String>,
        actions: Vec<String>,
    ) -> Result<usize> {
        let t = &mut self.inner;
        if parent >= t.owner.len() {
            return Err(Error::Construction(format!(
                "parent sequence {parent} does not exist"
            )));
        }
        if actions.is_empty() {
            return Err(Error::Construction(
                "decision point needs at least one action".into(),
            ));
        }
        let j = t.points.len();
        let first_sequence = t.owner.len();
        t.points.push(DecisionPoint {
            parent,
            first_sequence,
            num_actions: actions.len(),
        });
        t.children[parent].push(j);
        for _ in 0..actions.len() {
            t.owner.push(Some(j));
            t.children.push(Vec::new());
        }
        t.point_labels.push(label.into());
        t.action_labels.push(actions);
        Ok(j)
    }

    pub fn num_sequences(&self) -> usize {
        self.inner.owner.len()
    }

    pub fn sequence(&self, j: usize, a: usize) -> usize {
        self.inner.sequence(j, a)
    }

    pub fn build(self) -> Tfsdp {
        self.inner
    }
}

impl Tfsdp {
    /// A single decision point with `n` actions directly under `∅`.
    pub fn simplex(n: usize) -> Result<Self> {
        let mut b = TfsdpBuilder::new();
        b.add_decision_point(EMPTY_SEQUENCE, n)?;
        Ok(b.build())
    }

    pub fn num_sequences(&self) -> usize {
        self.owner.len()
    }

    pub fn num_decision_points(&self) -> usize {
        self.points.len()
    }

    pub fn decision_points(&self) -> &[DecisionPoint] {
        &self.points
    }

    pub fn decision_point(&self, j: usize) -> &DecisionPoint {
        &self.points[j]
    }

    pub fn sequence(&self, j: usize, a: usize) -> usize {
        let p = &self.points[j];
        debug_assert!(a < p.num_actions);
        p.first_sequence + a
    }

    /// Decision point owning a non-empty sequence, `None` for `∅`.
    pub fn owner(&self, sequence: usize) -> Option<usize> {
        self.owner[sequence]
    }

    /// Decision points whose parent sequence is `sequence` (`C_σ`).
    pub fn children(&self, sequence: usize) -> &[usize] {
        &self.children[sequence]
    }

    pub fn point_label(&self, j: usize) -> &str {
        &self.point_labels[j]
    }

    pub fn action_label(&self, j: usize, a: usize) -> &str {
        &self.action_labels[j][a]
    }

    /// `A = max_j |A_j|` (1 for a tree without decision points).
    pub fn max_actions(&self) -> usize {
        self.points.iter().map(|p| p.num_actions).max().unwrap_or(1)
    }

    /// `‖Q‖₁ = max_{q∈Q} ‖q‖₁`, including the empty-sequence coordinate.
    pub fn l1_norm(&self) -> u64 {
        let mut point_norm = vec![0u64; self.points.len()];
        for (j, p) in self.points.iter().enumerate().rev() {
            point_norm[j] = p
                .sequences()
                .map(|s| 1 + self.children[s].iter().map(|&c| point_norm[c]).sum::<u64>())
                .max()
                .unwrap_or(0);
        }
        1 + self.children[EMPTY_SEQUENCE]
            .iter()
            .map(|&c| point_norm[c])
            .sum::<u64>()
    }

    /// Depth of the decision tree counted in decision points along a path.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.points.len()];
        for (j, p) in self.points.iter().enumerate() {
            depth[j] = match self.owner[p.parent] {
                Some(parent) => depth[parent] + 1,
                None => 1,
            };
        }
        depth.into_iter().max().unwrap_or(0)
    }

    /// Bottom-up pass computing `log K_j(b, 1)` for every decision point.
    ///
    /// Also returns, for every sequence `ja`, the log of
    /// `b[ja]·Π_{j'∈C_ja} K_{j'}(b, 1)`, which the top-down marginal pass reuses.
    pub fn log_partial_kernels(&self, log_b: &[f64]) -> Result<Vec<f64>> {
        check_log_input(self.num_sequences(), log_b)?;
        Ok(self.log_partial_pass(log_b).0)
    }

    fn log_partial_pass(&self, log_b: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut log_k = vec![0.0; self.points.len()];
        let mut seq_value = log_b.to_vec();
        for (j, p) in self.points.iter().enumerate().rev() {
            for s in p.sequences() {
                for &c in &self.children[s] {
                    seq_value[s] += log_k[c];
                }
            }
            log_k[j] = log_sum_exp_iter(p.sequences().map(|s| seq_value[s]));
        }
        (log_k, seq_value)
    }

    /// Linear-domain partial kernels `K_j(x, y)`.
    pub fn partial_kernels(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_pair(self.num_sequences(), x, y)?;
        let mut k = vec![0.0; self.points.len()];
        for (j, p) in self.points.iter().enumerate().rev() {
            k[j] = p
                .sequences()
                .map(|s| x[s] * y[s] * self.children[s].iter().map(|&c| k[c]).product::<f64>())
                .sum();
        }
        Ok(k)
    }

    /// Checks the sequence-form constraints `x[∅] = 1` and
    /// `x[p_j] = Σ_a x[ja]`, with entries in `[0, 1]`, up to `tol`.
    pub fn is_sequence_form(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.num_sequences() || (x[EMPTY_SEQUENCE] - 1.0).abs() > tol {
            return false;
        }
        if x.iter().any(|&v| !(-tol..=1.0 + tol).contains(&v)) {
            return false;
        }
        self.points.iter().all(|p| {
            let mass: f64 = p.sequences().map(|s| x[s]).sum();
            (mass - x[p.parent]).abs() <= tol
        })
    }

    /// Sequence-form strategy induced by local behavioural strategies
    /// (`behavior[s]` is the probability of the action of sequence `s` at its
    /// decision point).
    pub fn sequence_form_from_behavior(&self, behavior: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.num_sequences()];
        x[EMPTY_SEQUENCE] = 1.0;
        for p in &self.points {
            let reach = x[p.parent];
            for s in p.sequences() {
                x[s] = reach * behavior[s];
            }
        }
        x
    }

    /// The uniform local strategy at every decision point, in sequence form.
    pub fn uniform_behavior_strategy(&self) -> Vec<f64> {
        let mut behavior = vec![1.0; self.num_sequences()];
        for p in &self.points {
            for s in p.sequences() {
                behavior[s] = 1.0 / p.num_actions as f64;
            }
        }
        self.sequence_form_from_behavior(&behavior)
    }
}

impl KernelDomain for Tfsdp {
    fn dim(&self) -> usize {
        self.num_sequences()
    }

    fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let k = self.partial_kernels(x, y)?;
        let root: f64 = self.children[EMPTY_SEQUENCE]
            .iter()
            .map(|&c| k[c])
            .product();
        Ok(x[EMPTY_SEQUENCE] * y[EMPTY_SEQUENCE] * root)
    }

    fn log_partition(&self, log_b: &[f64]) -> Result<f64> {
        let log_k = self.log_partial_kernels(log_b)?;
        Ok(log_b[EMPTY_SEQUENCE]
            + self.children[EMPTY_SEQUENCE]
                .iter()
                .map(|&c| log_k[c])
                .sum::<f64>())
    }

    fn marginals(&self, log_b: &[f64]) -> Result<Vec<f64>> {
        check_log_input(self.num_sequences(), log_b)?;
        let (log_k, seq_value) = self.log_partial_pass(log_b);
        let mut x = vec![0.0; self.num_sequences()];
        x[EMPTY_SEQUENCE] = 1.0;
        for (j, p) in self.points.iter().enumerate() {
            let reach = x[p.parent];
            for s in p.sequences() {
                x[s] = reach * (seq_value[s] - log_k[j]).exp();
            }
        }
        Ok(x)
    }
}

/// Shape parameters for [`random_tfsdp`].
#[derive(Debug, Clone, Copy)]
pub struct RandomTreeParams {
    /// Maximum number of decision points along any root-to-leaf path.
    pub max_depth: usize,
    pub max_actions: usize,
    /// Maximum number of decision points hanging off a single sequence.
    pub max_children: usize,
    /// Probability that a non-root sequence gets any children at all.
    pub branch_probability: f64,
}

impl Default for RandomTreeParams {
    fn default() -> Self {
        Self {
            max_depth: 3,
            max_actions: 3,
            max_children: 2,
            branch_probability: 0.6,
        }
    }
}

/// Random decision problem; the root always has at least one decision point.
pub fn random_tfsdp<R: Rng + ?Sized>(rng: &mut R, params: RandomTreeParams) -> Tfsdp {
    let mut builder = TfsdpBuilder::new();
    let mut frontier = vec![(EMPTY_SEQUENCE, 0usize)];
    while let Some((seq, depth)) = frontier.pop() {
        if depth >= params.max_depth {
            continue;
        }
        let n_children = if seq == EMPTY_SEQUENCE || rng.gen_bool(params.branch_probability) {
            rng.gen_range(1..=params.max_children.max(1))
        } else {
            0
        };
        for _ in 0..n_children {
            let n_actions = rng.gen_range(1..=params.max_actions.max(1));
            let j = builder
                .add_decision_point(seq, n_actions)
                .expect("parent exists and action count is positive");
            for a in 0..n_actions {
                frontier.push((builder.sequence(j, a), depth + 1));
            }
        }
    }
    builder.build()
}
