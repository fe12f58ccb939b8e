//! Coupling topologies, weighted Laplacians and their reduced forms.

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::Rng;

pub use crate::linalg::{eig_symmetric, SpectralDecomposition};

/// Maximum number of Erdős–Rényi draws before giving up on connectivity.
pub const ER_RETRY_BUDGET: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    Input,
    Hidden,
    Output,
}

/// Undirected edge `i < j` with a non-negative coupling strength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Per-direction weights of one edge: `to_i` is K_ij (the pull on `i` from
/// `j`), `to_j` is K_ji.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DirectedWeights {
    pub to_i: f64,
    pub to_j: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingGraph {
    n: usize,
    input_nodes: Vec<usize>,
    hidden_nodes: Vec<usize>,
    output_nodes: Vec<usize>,
    edges: Vec<Edge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    directed_overrides: Option<Vec<DirectedWeights>>,
}

impl CouplingGraph {
    pub fn new(
        n: usize,
        input_nodes: Vec<usize>,
        hidden_nodes: Vec<usize>,
        output_nodes: Vec<usize>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        let mut seen = vec![false; n];
        for &v in input_nodes.iter().chain(&hidden_nodes).chain(&output_nodes) {
            if v >= n {
                return Err(Error::Partition(format!("node {v} out of range for n = {n}")));
            }
            if seen[v] {
                return Err(Error::Partition(format!("node {v} assigned twice")));
            }
            seen[v] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Partition(format!("node {missing} has no role")));
        }
        let mut pairs = std::collections::HashSet::new();
        for e in &edges {
            let reason = if e.i >= e.j {
                Some("edges must satisfy i < j")
            } else if e.j >= n {
                Some("endpoint out of range")
            } else if !(e.weight >= 0.0) || !e.weight.is_finite() {
                Some("weight must be finite and non-negative")
            } else if !pairs.insert((e.i, e.j)) {
                Some("duplicate edge")
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(Error::InvalidEdge { i: e.i, j: e.j, reason: reason.into() });
            }
        }
        let g = Self { n, input_nodes, hidden_nodes, output_nodes, edges, directed_overrides: None };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// Layered network: complete bipartite input–hidden and hidden–output
    /// couplings plus a chain through the hidden layer, all at strength `k0`.
    /// Edge count is `n_in·n_hid + n_hid·n_out + n_hid − 1`. Nodes are
    /// numbered inputs first, then hidden, then outputs.
    pub fn layered(n_in: usize, n_hid: usize, n_out: usize, k0: f64) -> Result<Self> {
        if n_in == 0 || n_hid == 0 || n_out == 0 {
            return Err(Error::EmptyLayer { n_in, n_hid, n_out });
        }
        if !(k0 > 0.0) || !k0.is_finite() {
            return Err(Error::InvalidParameter(format!("k0 must be positive, got {k0}")));
        }
        let inputs: Vec<usize> = (0..n_in).collect();
        let hidden: Vec<usize> = (n_in..n_in + n_hid).collect();
        let outputs: Vec<usize> = (n_in + n_hid..n_in + n_hid + n_out).collect();
        let mut edges = Vec::new();
        let mut connect = |a: &[usize], b: &[usize]| {
            for &i in a {
                for &j in b {
                    edges.push(Edge { i: i.min(j), j: i.max(j), weight: k0 });
                }
            }
        };
        connect(&inputs, &hidden);
        connect(&hidden, &outputs);
        for w in hidden.windows(2) {
            edges.push(Edge { i: w[0], j: w[1], weight: k0 });
        }
        edges.sort_by_key(|e| (e.i, e.j));
        Self::new(n_in + n_hid + n_out, inputs, hidden, outputs, edges)
    }

    /// Random graph with independent edges of probability `p` and weights
    /// `k_mean * U(0.5, 1.5)`, redrawn until connected. The last two nodes
    /// are outputs (only node 1 when `n = 2`), the rest hidden.
    pub fn erdos_renyi(n: usize, p: f64, k_mean: f64, rng: &mut Rng) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 nodes, got {n}")));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!("edge probability must lie in (0, 1], got {p}")));
        }
        if !(k_mean > 0.0) || !k_mean.is_finite() {
            return Err(Error::InvalidParameter(format!("k_mean must be positive, got {k_mean}")));
        }
        let n_out = if n == 2 { 1 } else { 2 };
        let hidden: Vec<usize> = (0..n - n_out).collect();
        let outputs: Vec<usize> = (n - n_out..n).collect();
        for _ in 0..ER_RETRY_BUDGET {
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random::<f64>() < p {
                        let u: f64 = rng.random_range(0.5..1.5);
                        edges.push(Edge { i, j, weight: k_mean * u });
                    }
                }
            }
            match Self::new(n, vec![], hidden.clone(), outputs.clone(), edges) {
                Ok(g) => return Ok(g),
                Err(Error::Disconnected) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::ConnectivityRetries(ER_RETRY_BUDGET))
    }

    /// Same topology with new symmetric edge weights.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::DimensionMismatch { expected: self.edges.len(), got: weights.len() });
        }
        let mut edges = self.edges.clone();
        for (e, &weight) in edges.iter_mut().zip(weights) {
            if !(weight >= 0.0) || !weight.is_finite() {
                return Err(Error::InvalidEdge {
                    i: e.i,
                    j: e.j,
                    reason: "weight must be finite and non-negative".into(),
                });
            }
            e.weight = weight;
        }
        let g = Self { edges, directed_overrides: None, ..self.clone_topology() };
        if weights.contains(&0.0) && !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    fn clone_topology(&self) -> Self {
        Self {
            n: self.n,
            input_nodes: self.input_nodes.clone(),
            hidden_nodes: self.hidden_nodes.clone(),
            output_nodes: self.output_nodes.clone(),
            edges: Vec::new(),
            directed_overrides: None,
        }
    }

    /// Perturbs each direction of each edge independently:
    /// `K_ij = w (1 + level * u)`, `u ~ U(-1, 1)`. Requires `0 <= level <= 1`.
    pub fn with_asymmetry(&self, level: f64, rng: &mut Rng) -> Result<Self> {
        if !(0.0..=1.0).contains(&level) {
            return Err(Error::InvalidParameter(format!("asymmetry level must lie in [0, 1], got {level}")));
        }
        let overrides = self
            .edges
            .iter()
            .map(|e| {
                let a: f64 = rng.random_range(-1.0..1.0);
                let b: f64 = rng.random_range(-1.0..1.0);
                DirectedWeights { to_i: e.weight * (1.0 + level * a), to_j: e.weight * (1.0 + level * b) }
            })
            .collect();
        Ok(Self { directed_overrides: Some(overrides), ..self.clone() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn input_nodes(&self) -> &[usize] {
        &self.input_nodes
    }

    pub fn hidden_nodes(&self) -> &[usize] {
        &self.hidden_nodes
    }

    pub fn output_nodes(&self) -> &[usize] {
        &self.output_nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn directed_overrides(&self) -> Option<&[DirectedWeights]> {
        self.directed_overrides.as_deref()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    pub fn role(&self, node: usize) -> NodeRole {
        if self.input_nodes.contains(&node) {
            NodeRole::Input
        } else if self.output_nodes.contains(&node) {
            NodeRole::Output
        } else {
            NodeRole::Hidden
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.directed_overrides.is_none()
    }

    /// Dense K with `K[(i, j)]` the pull on `i` from `j`.
    pub fn coupling_matrix(&self) -> Matrix {
        let mut k = Matrix::zeros(self.n, self.n);
        for (idx, e) in self.edges.iter().enumerate() {
            let (to_i, to_j) = match &self.directed_overrides {
                Some(d) => (d[idx].to_i, d[idx].to_j),
                None => (e.weight, e.weight),
            };
            k[(e.i, e.j)] = to_i;
            k[(e.j, e.i)] = to_j;
        }
        k
    }

    fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut uf = UnionFind::new(self.n);
        for e in self.edges.iter().filter(|e| e.weight > 0.0) {
            uf.union(e.i, e.j);
        }
        let root = uf.find(0);
        (1..self.n).all(|v| uf.find(v) == root)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Weighted graph Laplacian with `edge_weights` aligned to `g.edges()`.
pub fn laplacian(g: &CouplingGraph, edge_weights: &[f64]) -> Result<Matrix> {
    if edge_weights.len() != g.edges().len() {
        return Err(Error::DimensionMismatch { expected: g.edges().len(), got: edge_weights.len() });
    }
    let mut l = Matrix::zeros(g.n(), g.n());
    for (e, &w) in g.edges().iter().zip(edge_weights) {
        l[(e.i, e.j)] -= w;
        l[(e.j, e.i)] -= w;
        l[(e.i, e.i)] += w;
        l[(e.j, e.j)] += w;
    }
    Ok(l)
}

/// Deletes row and column `pin`.
pub fn reduce(m: &Matrix, pin: usize) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.rows(), got: m.cols() });
    }
    let n = m.rows();
    if pin >= n {
        return Err(Error::InvalidParameter(format!("pin {pin} out of range for {n}x{n} matrix")));
    }
    let skip = |k: usize| if k < pin { k } else { k + 1 };
    Ok(Matrix::from_fn(n - 1, n - 1, |i, j| m[(skip(i), skip(j))]))
}
