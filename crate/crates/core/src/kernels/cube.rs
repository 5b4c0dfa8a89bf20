//! The unit hypercube `[0,1]^d`: `K(x, y) = Π_k (x[k]·y[k] + 1)`.

use super::{check_log_input, check_pair, KernelDomain};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypercubeDomain {
    d: usize,
}

impl HypercubeDomain {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("hypercube needs d >= 1".into()));
        }
        Ok(Self { d })
    }
}

/// `log(1 + e^v)` without overflow.
fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

impl KernelDomain for HypercubeDomain {
    fn dim(&self) -> usize {
        self.d
    }

    fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_pair(self.d, x, y)?;
        Ok(x.iter().zip(y).map(|(a, b)| a * b + 1.0).product())
    }

    fn log_partition(&self, log_b: &[f64]) -> Result<f64> {
        check_log_input(self.d, log_b)?;
        Ok(log_b.iter().map(|&v| softplus(v)).sum())
    }

    fn marginals(&self, log_b: &[f64]) -> Result<Vec<f64>> {
        check_log_input(self.d, log_b)?;
        // The prefix/suffix products cancel coordinatewise:
        // 1 − A[k−1]·B[k+1]/K = b_k / (1 + b_k).
        Ok(log_b
            .iter()
            .map(|&v| {
                if v >= 0.0 {
                    1.0 / (1.0 + (-v).exp())
                } else {
                    let e = v.exp();
                    e / (1.0 + e)
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_vertices() {
        let c = HypercubeDomain::new(2).unwrap();
        assert_eq!(c.kernel(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 4.0);
    }

    #[test]
    fn uniform_and_skewed_marginals() {
        let c = HypercubeDomain::new(4).unwrap();
        assert_eq!(c.marginals(&[0.0; 4]).unwrap(), vec![0.5; 4]);
        // b = (3, 1): K(b,1) = 8, K(b, ē_1) = 2.
        let c = HypercubeDomain::new(2).unwrap();
        let x = c.marginals(&[3f64.ln(), 0.0]).unwrap();
        assert!((x[0] - 0.75).abs() < 1e-15);
        assert!((x[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn marginals_strictly_inside() {
        let c = HypercubeDomain::new(3).unwrap();
        for v in c.marginals(&[-30.0, 0.1, 30.0]).unwrap() {
            assert!(v > 0.0 && v < 1.0);
        }
    }

    #[test]
    fn log_partition_is_stable() {
        let c = HypercubeDomain::new(2).unwrap();
        let lp = c.log_partition(&[1000.0, -1000.0]).unwrap();
        assert!((lp - 1000.0).abs() < 1e-9);
    }
}
