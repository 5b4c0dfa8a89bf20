//! Kernel for n-sets: the convex hull of 0/1 vectors with exactly `n` ones.
//!
//! `K(x, y)` is the coefficient of `z^n` in `Π_k (x[k]·y[k]·z + 1)`. When
//! `n > d − n` the complementary polynomial `Π_k (z + x[k]·y[k])` is used
//! instead, so every evaluation costs `O(d·min{n, d−n})`.

use super::{check_log_input, check_pair, KernelDomain};
use crate::error::{Error, Result};
use crate::numerics::{log_add_exp, log_sum_exp_iter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NSetDomain {
    d: usize,
    n: usize,
}

/// Marginals together with the number of dynamic-programming cell updates
/// spent computing them.
#[derive(Debug, Clone, PartialEq)]
pub struct NSetMarginals {
    pub marginals: Vec<f64>,
    pub dp_updates: u64,
}

impl NSetDomain {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 || n == 0 || n > d {
            return Err(Error::InvalidArgument(format!(
                "n-set requires 1 <= n <= d, got d={d}, n={n}"
            )));
        }
        Ok(Self { d, n })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Size of the smaller side, `min{n, d − n}`.
    fn reduced(&self) -> usize {
        self.n.min(self.d - self.n)
    }

    /// Whether the complementary polynomial is used (`n > d − n`).
    fn complemented(&self) -> bool {
        self.n > self.d - self.n
    }

    /// Marginals via prefix/suffix coefficient tables kept in log space.
    pub fn marginals_with_ops(&self, log_b: &[f64]) -> Result<NSetMarginals> {
        check_log_input(self.d, log_b)?;
        let d = self.d;
        let m = self.reduced();
        if m == 0 {
            // n == d: the only vertex is the all-ones vector.
            return Ok(NSetMarginals {
                marginals: vec![1.0; d],
                dp_updates: 0,
            });
        }
        let complemented = self.complemented();
        let log_c: Vec<f64> = if complemented {
            log_b.iter().map(|v| -v).collect()
        } else {
            log_b.to_vec()
        };
        let mut ops = 0u64;

        // prefix[k][h]: log coefficient of z^h in Π_{i<k} (c_i z + 1).
        let mut prefix = vec![vec![f64::NEG_INFINITY; m + 1]; d + 1];
        prefix[0][0] = 0.0;
        for k in 1..=d {
            prefix[k][0] = 0.0;
            for h in 1..=m {
                prefix[k][h] = log_add_exp(prefix[k - 1][h], log_c[k - 1] + prefix[k - 1][h - 1]);
                ops += 1;
            }
        }
        // suffix[k][h]: log coefficient of z^h in Π_{i>=k} (c_i z + 1).
        let mut suffix = vec![vec![f64::NEG_INFINITY; m + 1]; d + 1];
        suffix[d][0] = 0.0;
        for k in (0..d).rev() {
            suffix[k][0] = 0.0;
            for h in 1..=m {
                suffix[k][h] = log_add_exp(suffix[k + 1][h], log_c[k] + suffix[k + 1][h - 1]);
                ops += 1;
            }
        }
        let log_total = prefix[d][m];

        let mut marginals = Vec::with_capacity(d);
        for k in 0..d {
            let (pre, suf) = (&prefix[k], &suffix[k + 1]);
            let log_mass = if complemented {
                // Element k is in the n-set iff it is left out of the
                // complementary (d − n)-set: coefficient of z^m without factor k.
                ops += (m + 1) as u64;
                log_sum_exp_iter((0..=m).map(|h| pre[h] + suf[m - h]))
            } else {
                // Vertices containing k: c_k times coefficient of z^(m−1)
                // among the remaining factors.
                ops += m as u64;
                log_c[k] + log_sum_exp_iter((0..m).map(|h| pre[h] + suf[m - 1 - h]))
            };
            marginals.push((log_mass - log_total).exp().min(1.0));
        }
        Ok(NSetMarginals {
            marginals,
            dp_updates: ops,
        })
    }
}

impl KernelDomain for NSetDomain {
    fn dim(&self) -> usize {
        self.d
    }

    fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_pair(self.d, x, y)?;
        let m = self.reduced();
        let mut coef = vec![0.0; m + 1];
        coef[0] = 1.0;
        let complemented = self.complemented();
        for k in 0..self.d {
            let c = x[k] * y[k];
            for h in (1..=m).rev() {
                coef[h] = if complemented {
                    // (z + c)·p(z), tracking degrees 0..=m
                    c * coef[h] + coef[h - 1]
                } else {
                    coef[h] + c * coef[h - 1]
                };
            }
            if complemented {
                coef[0] *= c;
            }
        }
        Ok(coef[m])
    }

    fn log_partition(&self, log_b: &[f64]) -> Result<f64> {
        check_log_input(self.d, log_b)?;
        let m = self.reduced();
        let complemented = self.complemented();
        let mut coef = vec![f64::NEG_INFINITY; m + 1];
        coef[0] = 0.0;
        for &lb in log_b {
            let lc = if complemented { -lb } else { lb };
            for h in (1..=m).rev() {
                coef[h] = log_add_exp(coef[h], lc + coef[h - 1]);
            }
        }
        let shift = if complemented {
            log_b.iter().sum()
        } else {
            0.0
        };
        Ok(coef[m] + shift)
    }

    fn marginals(&self, log_b: &[f64]) -> Result<Vec<f64>> {
        Ok(self.marginals_with_ops(log_b)?.marginals)
    }
}
