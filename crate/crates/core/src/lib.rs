//! Kernelized optimistic multiplicative weights (KOMWU) for games whose
//! strategy sets are polytopes with 0/1 vertices.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernels`]: the 0/1-polyhedral kernel abstraction plus efficient
//!   implementations for sequence-form polytopes, n-sets, the hypercube,
//!   DAG flows and Cartesian products.
//! * [`learning`]: the kernelized (O)MWU learner and the plain simplex OMWU.
//! * [`oracle`]: exponential-time reference implementations (vertex
//!   enumeration, explicit vertex OMWU) used to cross-check everything else.
//! * [`efg`]: extensive-form game trees, sequence-form utilities, best
//!   responses, exploitability and the Kuhn/Leduc generators.
//! * [`baselines`]: CFR with regret matching, regret matching+ and MWU.
//! * [`harness`]: self-play driver, regret accounting, CCE gap and CSV output.

pub mod baselines;
pub mod efg;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod learning;
pub mod numerics;
pub mod oracle;

pub use error::{Error, Result};
pub use kernels::{
    DagFlowDomain, Domain, HypercubeDomain, KernelDomain, NSetDomain, ProductDomain, Tfsdp,
    TfsdpBuilder,
};
pub use learning::{KomwuLearner, LearningRate, OnlineLearner, SimplexOmwu};
