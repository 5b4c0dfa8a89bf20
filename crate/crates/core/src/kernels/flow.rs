//! Unit flows in a DAG. Vertices are indicator vectors (over edges) of the
//! source→sink paths, so the kernel is a path sum that a forward pass over a
//! topological order evaluates in `O(|edges|)`.

use super::{check_log_input, check_pair, KernelDomain};
use crate::error::{Error, Result};
use crate::numerics::log_sum_exp_iter;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagFlowDomain {
    num_nodes: usize,
    source: usize,
    sink: usize,
    edges: Vec<(usize, usize)>,
    order: Vec<usize>,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

impl DagFlowDomain {
    /// Builds the domain, rejecting cycles and edges that lie on no
    /// source→sink path.
    pub fn new(
        num_nodes: usize,
        source: usize,
        sink: usize,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if source >= num_nodes || sink >= num_nodes || source == sink {
            return Err(Error::Construction(format!(
                "invalid source/sink ({source}, {sink}) for {num_nodes} nodes"
            )));
        }
        let mut incoming = vec![Vec::new(); num_nodes];
        let mut outgoing = vec![Vec::new(); num_nodes];
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u >= num_nodes || v >= num_nodes || u == v {
                return Err(Error::Construction(format!("invalid edge {e}: ({u}, {v})")));
            }
            outgoing[u].push(e);
            incoming[v].push(e);
        }

        // Kahn's algorithm.
        let mut indegree: Vec<usize> = incoming.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> = (0..num_nodes).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(num_nodes);
        while let Some(u) = queue.pop() {
            order.push(u);
            for &e in &outgoing[u] {
                let v = edges[e].1;
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    queue.push(v);
                }
            }
        }
        if order.len() != num_nodes {
            return Err(Error::Construction("graph contains a cycle".into()));
        }

        let mut from_source = vec![false; num_nodes];
        from_source[source] = true;
        for &u in &order {
            if from_source[u] {
                for &e in &outgoing[u] {
                    from_source[edges[e].1] = true;
                }
            }
        }
        let mut to_sink = vec![false; num_nodes];
        to_sink[sink] = true;
        for &v in order.iter().rev() {
            if outgoing[v].iter().any(|&e| to_sink[edges[e].1]) {
                to_sink[v] = true;
            }
        }
        if !from_source[sink] {
            return Err(Error::Construction("no source→sink path".into()));
        }
        for (e, &(u, v)) in edges.iter().enumerate() {
            if !(from_source[u] && to_sink[v]) || v == source || u == sink {
                return Err(Error::Construction(format!(
                    "edge {e} ({u}→{v}) lies on no source→sink path"
                )));
            }
        }

        Ok(Self {
            num_nodes,
            source,
            sink,
            edges,
            order,
            incoming,
            outgoing,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn outgoing(&self, node: usize) -> &[usize] {
        &self.outgoing[node]
    }

    /// `log` of the weighted path sums source→v (forward) and v→sink
    /// (backward) for every node.
    fn log_path_sums(&self, log_b: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut forward = vec![f64::NEG_INFINITY; self.num_nodes];
        forward[self.source] = 0.0;
        for &v in &self.order {
            if v != self.source {
                forward[v] = log_sum_exp_iter(
                    self.incoming[v]
                        .iter()
                        .map(|&e| forward[self.edges[e].0] + log_b[e]),
                );
            }
        }
        let mut backward = vec![f64::NEG_INFINITY; self.num_nodes];
        backward[self.sink] = 0.0;
        for &v in self.order.iter().rev() {
            if v != self.sink {
                backward[v] = log_sum_exp_iter(
                    self.outgoing[v]
                        .iter()
                        .map(|&e| log_b[e] + backward[self.edges[e].1]),
                );
            }
        }
        (forward, backward)
    }
}

impl KernelDomain for DagFlowDomain {
    fn dim(&self) -> usize {
        self.edges.len()
    }

    fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_pair(self.dim(), x, y)?;
        let mut forward = vec![0.0; self.num_nodes];
        forward[self.source] = 1.0;
        for &v in &self.order {
            if v != self.source {
                forward[v] = self.incoming[v]
                    .iter()
                    .map(|&e| forward[self.edges[e].0] * x[e] * y[e])
                    .sum();
            }
        }
        Ok(forward[self.sink])
    }

    fn log_partition(&self, log_b: &[f64]) -> Result<f64> {
        check_log_input(self.dim(), log_b)?;
        let (forward, _) = self.log_path_sums(log_b);
        Ok(forward[self.sink])
    }

    fn marginals(&self, log_b: &[f64]) -> Result<Vec<f64>> {
        check_log_input(self.dim(), log_b)?;
        let (forward, backward) = self.log_path_sums(log_b);
        let log_total = forward[self.sink];
        Ok(self
            .edges
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| (forward[u] + log_b[e] + backward[v] - log_total).exp())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_edges() {
        let g = DagFlowDomain::new(2, 0, 1, vec![(0, 1), (0, 1)]).unwrap();
        assert_eq!(g.marginals(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(g.kernel(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn diamond_is_symmetric() {
        let g = DagFlowDomain::new(4, 0, 3, vec![(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        for v in g.marginals(&[0.0; 4]).unwrap() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn flow_is_conserved() {
        let g = DagFlowDomain::new(
            5,
            0,
            4,
            vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4)],
        )
        .unwrap();
        let x = g.marginals(&[0.3, -1.0, 2.0, 0.1, -0.4, 0.9, 1.5]).unwrap();
        let out_source: f64 = g.outgoing(0).iter().map(|&e| x[e]).sum();
        assert!((out_source - 1.0).abs() < 1e-12);
        for v in 1..4 {
            let inflow: f64 = g.incoming[v].iter().map(|&e| x[e]).sum();
            let outflow: f64 = g.outgoing[v].iter().map(|&e| x[e]).sum();
            assert!((inflow - outflow).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_graphs() {
        // cycle
        assert!(DagFlowDomain::new(3, 0, 2, vec![(0, 1), (1, 0), (1, 2)]).is_err());
        // dangling edge 1→3 never reaches the sink
        assert!(DagFlowDomain::new(4, 0, 2, vec![(0, 1), (1, 2), (1, 3)]).is_err());
        // no path
        assert!(DagFlowDomain::new(3, 0, 2, vec![(0, 1)]).is_err());
        assert!(DagFlowDomain::new(2, 0, 0, vec![]).is_err());
    }
}
