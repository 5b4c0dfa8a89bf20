//! Cartesian products: `K_{Ω×Ω'}((x,x'),(y,y')) = K_Ω(x,y)·K_{Ω'}(x',y')`.

use super::KernelDomain;
use crate::error::{check_len, Result};

#[derive(Debug, Clone)]
pub struct ProductDomain<L, R> {
    left: L,
    right: R,
}

impl<L: KernelDomain, R: KernelDomain> ProductDomain<L, R> {
    pub fn new(left: L, right: R) -> Self {
        Self { left, right }
    }

    pub fn left(&self) -> &L {
        &self.left
    }

    pub fn right(&self) -> &R {
        &self.right
    }

    fn split<'a>(&self, v: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        check_len(self.dim(), v.len())?;
        Ok(v.split_at(self.left.dim()))
    }
}

impl<L: KernelDomain, R: KernelDomain> KernelDomain for ProductDomain<L, R> {
    fn dim(&self) -> usize {
        self.left.dim() + self.right.dim()
    }

    fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let (xl, xr) = self.split(x)?;
        let (yl, yr) = self.split(y)?;
        Ok(self.left.kernel(xl, yl)? * self.right.kernel(xr, yr)?)
    }

    fn log_partition(&self, log_b: &[f64]) -> Result<f64> {
        let (l, r) = self.split(log_b)?;
        Ok(self.left.log_partition(l)? + self.right.log_partition(r)?)
    }

    fn marginals(&self, log_b: &[f64]) -> Result<Vec<f64>> {
        let (l, r) = self.split(log_b)?;
        let mut out = self.left.marginals(l)?;
        out.extend(self.right.marginals(r)?);
        Ok(out)
    }
}
