//! Brute-force references: explicit vertex enumeration, the literal kernel
//! sum and OMWU run directly on the vertex simplex.
//!
//! Everything here is exponential in the dimension and exists only to
//! cross-check the polynomial-time code paths. Nothing in this module calls
//! into the kernel implementations.

use crate::error::{check_len, Error, Result};
use crate::kernels::{
    DagFlowDomain, Domain, HypercubeDomain, NSetDomain, ProductDomain, Tfsdp, EMPTY_SEQUENCE,
};
use crate::learning::LearningRate;
use crate::numerics::log_sum_exp;

pub const DEFAULT_VERTEX_CAP: usize = 100_000;

/// Distinct 0/1 vectors of a common length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    dim: usize,
    vertices: Vec<Vec<u8>>,
    source: String,
}

impl VertexSet {
    pub fn new(dim: usize, vertices: Vec<Vec<u8>>, source: impl Into<String>) -> Result<Self> {
        for v in &vertices {
            check_len(dim, v.len())?;
            if v.iter().any(|&c| c > 1) {
                return Err(Error::Validation("vertex coordinate outside {0,1}".into()));
            }
        }
        let mut sorted = vertices.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != vertices.len() {
            return Err(Error::Validation("duplicate vertex".into()));
        }
        Ok(Self {
            dim,
            vertices,
            source: source.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vec<u8>] {
        &self.vertices
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for v in &self.vertices {
            for (mk, &vk) in m.iter_mut().zip(v) {
                *mk += vk as f64;
            }
        }
        let n = self.vertices.len() as f64;
        m.iter_mut().for_each(|x| *x /= n);
        m
    }

    /// `⟨c, v⟩` for every vertex.
    pub fn inner_products(&self, c: &[f64]) -> Vec<f64> {
        self.vertices
            .iter()
            .map(|v| {
                v.iter()
                    .zip(c)
                    .filter(|(&vk, _)| vk == 1)
                    .map(|(_, ck)| ck)
                    .sum()
            })
            .collect()
    }

    /// `Σ_v λ[v]·v`.
    pub fn combine(&self, lambda: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for (v, &l) in self.vertices.iter().zip(lambda) {
            for (xk, &vk) in x.iter_mut().zip(v) {
                if vk == 1 {
                    *xk += l;
                }
            }
        }
        x
    }
}

/// Domains whose vertices can be listed explicitly.
pub trait EnumerateVertices {
    /// Exact vertex count (saturating), computed without listing.
    fn vertex_count(&self) -> u128;

    fn enumerate_vertices_capped(&self, cap: usize) -> Result<VertexSet>;

    fn enumerate_vertices(&self) -> Result<VertexSet> {
        self.enumerate_vertices_capped(DEFAULT_VERTEX_CAP)
    }
}

fn check_cap(count: u128, cap: usize) -> Result<()> {
    if count > cap as u128 {
        Err(Error::Capacity { count, cap })
    } else {
        Ok(())
    }
}

fn to_dense(dim: usize, support: &[usize]) -> Vec<u8> {
    let mut v = vec![0u8; dim];
    for &k in support {
        v[k] = 1;
    }
    v
}

impl EnumerateVertices for Tfsdp {
    fn vertex_count(&self) -> u128 {
        let mut count = vec![0u128; self.num_decision_points()];
        for j in (0..self.num_decision_points()).rev() {
            count[j] = self
                .decision_point(j)
                .sequences()
                .map(|s| {
                    self.children(s)
                        .iter()
                        .fold(1u128, |acc, &c| acc.saturating_mul(count[c]))
                })
                .fold(0u128, |acc, c| acc.saturating_add(c));
        }
        self.children(EMPTY_SEQUENCE)
            .iter()
            .fold(1u128, |acc, &c| acc.saturating_mul(count[c]))
    }

    fn enumerate_vertices_capped(&self, cap: usize) -> Result<VertexSet> {
        check_cap(self.vertex_count(), cap)?;
        // Deterministic strategies as supports, built bottom-up per point.
        let mut per_point: Vec<Vec<Vec<usize>>> = vec![Vec::new(); self.num_decision_points()];
        for j in (0..self.num_decision_points()).rev() {
            let mut out = Vec::new();
            for s in self.decision_point(j).sequences() {
                let mut partial = vec![vec![s]];
                for &c in self.children(s) {
                    partial = cartesian(&partial, &per_point[c]);
                }
                out.extend(partial);
            }
            per_point[j] = out;
        }
        let mut all = vec![vec![EMPTY_SEQUENCE]];
        for &c in self.children(EMPTY_SEQUENCE) {
            all = cartesian(&all, &per_point[c]);
        }
        let d = self.num_sequences();
        VertexSet::new(d, all.iter().map(|s| to_dense(d, s)).collect(), "tfsdp")
    }
}

fn cartesian(left: &[Vec<usize>], right: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for l in left {
        for r in right {
            let mut v = l.clone();
            v.extend_from_slice(r);
            out.push(v);
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

impl EnumerateVertices for NSetDomain {
    fn vertex_count(&self) -> u128 {
        binomial(self.d(), self.n())
    }

    fn enumerate_vertices_capped(&self, cap: usize) -> Result<VertexSet> {
        check_cap(self.vertex_count(), cap)?;
        fn rec(
            start: usize,
            d: usize,
            left: usize,
            cur: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for k in start..=d - left {
                cur.push(k);
                rec(k + 1, d, left - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, self.d(), self.n(), &mut Vec::new(), &mut out);
        let d = self.d();
        VertexSet::new(d, out.iter().map(|s| to_dense(d, s)).collect(), "nset")
    }
}

impl EnumerateVertices for HypercubeDomain {
    fn vertex_count(&self) -> u128 {
        use crate::kernels::KernelDomain;
        1u128.checked_shl(self.dim() as u32).unwrap_or(u128::MAX)
    }

    fn enumerate_vertices_capped(&self, cap: usize) -> Result<VertexSet> {
        use crate::kernels::KernelDomain;
        check_cap(self.vertex_count(), cap)?;
        let d = self.dim();
        let vertices = (0..1usize << d)
            .map(|mask| (0..d).map(|k| ((mask >> k) & 1) as u8).collect())
            .collect();
        VertexSet::new(d, vertices, "cube")
    }
}

impl EnumerateVertices for DagFlowDomain {
    fn vertex_count(&self) -> u128 {
        // Path counting over a DFS memo, independent of the kernel code.
        fn count(g: &DagFlowDomain, v: usize, memo: &mut Vec<Option<u128>>) -> u128 {
            if v == g.sink() {
                return 1;
            }
            if let Some(c) = memo[v] {
                return c;
            }
            let c = g.outgoing(v).iter().fold(0u128, |acc, &e| {
                acc.saturating_add(count(g, g.edges()[e].1, memo))
            });
            memo[v] = Some(c);
            c
        }
        count(self, self.source(), &mut vec![None; self.num_nodes()])
    }

    fn enumerate_vertices_capped(&self, cap: usize) -> Result<VertexSet> {
        check_cap(self.vertex_count(), cap)?;
        fn walk(g: &DagFlowDomain, v: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if v == g.sink() {
                out.push(path.clone());
                return;
            }
            for &e in g.outgoing(v) {
                path.push(e);
                walk(g, g.edges()[e].1, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        walk(self, self.source(), &mut Vec::new(), &mut out);
        let d = self.edges().len();
        VertexSet::new(d, out.iter().map(|s| to_dense(d, s)).collect(), "dag")
    }
}

impl<L: EnumerateVertices, R: EnumerateVertices> EnumerateVertices for ProductDomain<L, R>
where
    L: crate::kernels::KernelDomain,
    R: crate::kernels::KernelDomain,
{
    fn vertex_count(&self) -> u128 {
        self.left()
            .vertex_count()
            .saturating_mul(self.right().vertex_count())
    }

    fn enumerate_vertices_capped(&self, cap: usize) -> Result<VertexSet> {
        check_cap(self.vertex_count(), cap)?;
        let l = self.left().enumerate_vertices_capped(cap)?;
        let r = self.right().enumerate_vertices_capped(cap)?;
        let mut out = Vec::with_capacity(l.len() * r.len());
        for a in l.vertices() {
            for b in r.vertices() {
                let mut v = a.clone();
                v.extend_from_slice(b);
                out.push(v);
            }
        }
        VertexSet::new(l.dim() + r.dim(), out, "product")
    }
}

impl EnumerateVertices for Domain {
    fn vertex_count(&self) -> u128 {
        match self {
            Domain::Tree(d) => d.vertex_count(),
            Domain::NSet(d) => d.vertex_count(),
            Domain::Cube(d) => d.vertex_count(),
            Domain::Flow(d) => d.vertex_count(),
            Domain::Product(d) => d.vertex_count(),
        }
    }

    fn enumerate_vertices_capped(&self, cap: usize) -> Result<VertexSet> {
        match self {
            Domain::Tree(d) => d.enumerate_vertices_capped(cap),
            Domain::NSet(d) => d.enumerate_vertices_capped(cap),
            Domain::Cube(d) => d.enumerate_vertices_capped(cap),
            Domain::Flow(d) => d.enumerate_vertices_capped(cap),
            Domain::Product(d) => d.enumerate_vertices_capped(cap),
        }
    }
}

/// `Σ_v Π_{k∈v} x[k]·y[k]`, literally.
pub fn brute_kernel(vertices: &VertexSet, x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(vertices.dim(), x.len())?;
    check_len(vertices.dim(), y.len())?;
    Ok(vertices
        .vertices()
        .iter()
        .map(|v| {
            v.iter()
                .enumerate()
                .filter(|(_, &vk)| vk == 1)
                .map(|(k, _)| x[k] * y[k])
                .product::<f64>()
        })
        .sum())
}

/// Vertex distribution `λ[v] ∝ Π_{k∈v} b[k]` for `b = exp(log_b)`.
pub fn brute_vertex_distribution(vertices: &VertexSet, log_b: &[f64]) -> Result<Vec<f64>> {
    check_len(vertices.dim(), log_b.len())?;
    let logits = vertices.inner_products(log_b);
    let z = log_sum_exp(&logits);
    Ok(logits.iter().map(|l| (l - z).exp()).collect())
}

/// Marginals `Σ_v λ[v]·v` of [`brute_vertex_distribution`].
pub fn brute_marginals(vertices: &VertexSet, log_b: &[f64]) -> Result<Vec<f64>> {
    let lambda = brute_vertex_distribution(vertices, log_b)?;
    Ok(vertices.combine(&lambda))
}

/// OMWU run explicitly on the simplex over the vertices, emitting
/// `x^t = Σ_v λ^t[v]·v`.
#[derive(Debug, Clone)]
pub struct VertexOmwu {
    vertices: VertexSet,
    schedule: LearningRate,
    log_lambda: Vec<f64>,
    prev_loss: Vec<f64>,
    prev_prediction: Vec<f64>,
    prediction: Vec<f64>,
    t: u64,
}

impl VertexOmwu {
    pub fn new(vertices: VertexSet, schedule: LearningRate) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidArgument("no vertices".into()));
        }
        let d = vertices.dim();
        let uniform = -(vertices.len() as f64).ln();
        Ok(Self {
            log_lambda: vec![uniform; vertices.len()],
            vertices,
            schedule,
            prev_loss: vec![0.0; d],
            prev_prediction: vec![0.0; d],
            prediction: vec![0.0; d],
            t: 0,
        })
    }

    pub fn lambda(&self) -> Vec<f64> {
        self.log_lambda.iter().map(|l| l.exp()).collect()
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn step(&mut self, prediction: &[f64]) -> Result<Vec<f64>> {
        let d = self.vertices.dim();
        check_len(d, prediction.len())?;
        self.prediction.copy_from_slice(prediction);
        let w: Vec<f64> = (0..d)
            .map(|k| self.prev_loss[k] - self.prev_prediction[k] + self.prediction[k])
            .collect();
        let eta = self.schedule.at(self.t + 1)?;
        let vertex_w = self.vertices.inner_products(&w);
        for (l, vw) in self.log_lambda.iter_mut().zip(vertex_w) {
            *l -= eta * vw;
        }
        let z = log_sum_exp(&self.log_lambda);
        self.log_lambda.iter_mut().for_each(|l| *l -= z);
        Ok(self.vertices.combine(&self.lambda()))
    }

    pub fn observe_loss(&mut self, loss: &[f64]) -> Result<()> {
        check_len(self.vertices.dim(), loss.len())?;
        self.prev_loss.copy_from_slice(loss);
        std::mem::swap(&mut self.prev_prediction, &mut self.prediction);
        self.t += 1;
        Ok(())
    }
}

/// Runs [`VertexOmwu`] over a stream of `(prediction, loss)` pairs and
/// returns every iterate.
pub fn vertex_omwu(
    vertices: VertexSet,
    stream: &[(Vec<f64>, Vec<f64>)],
    schedule: LearningRate,
) -> Result<Vec<Vec<f64>>> {
    let mut learner = VertexOmwu::new(vertices, schedule)?;
    let mut out = Vec::with_capacity(stream.len());
    for (m, l) in stream {
        out.push(learner.step(m)?);
        learner.observe_loss(l)?;
    }
    Ok(out)
}
