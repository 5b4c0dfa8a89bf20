//! 0/1-polyhedral kernels.
//!
//! For a polytope with vertex set `V ⊆ {0,1}^d` the kernel is
//! `K(x, y) = Σ_{v∈V} Π_{k∈v} x[k]·y[k]`. Every domain here evaluates it in
//! polynomial time and, more importantly for the learner, returns the full
//! vector of marginals `x[k] = 1 − K(b, ē_k)/K(b, 1)` in a single pass, with
//! `b` supplied in log space.

mod cube;
mod flow;
mod nset;
mod product;
mod tfsdp;

pub use cube::HypercubeDomain;
pub use flow::DagFlowDomain;
pub use nset::{NSetDomain, NSetMarginals};
pub use product::ProductDomain;
pub use tfsdp::{
    random_tfsdp, DecisionPoint, RandomTreeParams, Tfsdp, TfsdpBuilder, EMPTY_SEQUENCE,
};

use crate::error::{check_finite, check_len, Result};

/// A polytope whose vertices all lie in `{0,1}^d`, exposed through its kernel.
pub trait KernelDomain {
    /// Ambient dimension `d`.
    fn dim(&self) -> usize;

    /// Linear-domain kernel `K(x, y)`. Arbitrary real inputs are accepted.
    fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64>;

    /// `log K(b, 1)` for `b = exp(log_b)`.
    fn log_partition(&self, log_b: &[f64]) -> Result<f64>;

    /// Marginals of the vertex distribution `λ[v] ∝ Π_{k∈v} b[k]`, i.e. the
    /// point `Σ_v λ[v]·v` of the polytope, for `b = exp(log_b)`.
    fn marginals(&self, log_b: &[f64]) -> Result<Vec<f64>>;

    /// Slow path: `d + 1` separate linear-domain kernel evaluations.
    fn marginals_reference(&self, b: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        check_len(d, b.len())?;
        check_finite(b, "kernel input")?;
        let mut ones = vec![1.0; d];
        let total = self.kernel(b, &ones)?;
        let mut out = Vec::with_capacity(d);
        for k in 0..d {
            ones[k] = 0.0;
            out.push(1.0 - self.kernel(b, &ones)? / total);
            ones[k] = 1.0;
        }
        Ok(out)
    }
}

/// Closed set of the concrete domains, used wherever a domain is chosen at
/// runtime (CLI, demo, self-checks).
#[derive(Debug, Clone)]
pub enum Domain {
    Tree(Tfsdp),
    NSet(NSetDomain),
    Cube(HypercubeDomain),
    Flow(DagFlowDomain),
    Product(Box<ProductDomain<Domain, Domain>>),
}

impl Domain {
    pub fn product(left: Domain, right: Domain) -> Self {
        Domain::Product(Box::new(ProductDomain::new(left, right)))
    }
}

macro_rules! dispatch {
    ($self:ident, $d:ident => $e:expr) => {
        match $self {
            Domain::Tree($d) => $e,
            Domain::NSet($d) => $e,
            Domain::Cube($d) => $e,
            Domain::Flow($d) => $e,
            Domain::Product($d) => $e,
        }
    };
}

impl KernelDomain for Domain {
    fn dim(&self) -> usize {
        dispatch!(self, d => d.dim())
    }
    fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        dispatch!(self, d => d.kernel(x, y))
    }
    fn log_partition(&self, log_b: &[f64]) -> Result<f64> {
        dispatch!(self, d => d.log_partition(log_b))
    }
    fn marginals(&self, log_b: &[f64]) -> Result<Vec<f64>> {
        dispatch!(self, d => d.marginals(log_b))
    }
}

impl<D: KernelDomain + ?Sized> KernelDomain for &D {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        (**self).kernel(x, y)
    }
    fn log_partition(&self, log_b: &[f64]) -> Result<f64> {
        (**self).log_partition(log_b)
    }
    fn marginals(&self, log_b: &[f64]) -> Result<Vec<f64>> {
        (**self).marginals(log_b)
    }
}

pub(crate) fn check_pair(d: usize, x: &[f64], y: &[f64]) -> Result<()> {
    check_len(d, x.len())?;
    check_len(d, y.len())?;
    check_finite(x, "kernel input")?;
    check_finite(y, "kernel input")
}

pub(crate) fn check_log_input(d: usize, log_b: &[f64]) -> Result<()> {
    check_len(d, log_b.len())?;
    check_finite(log_b, "log-weights")
}
