//! Undirected graphs, edge matrices and weighted Laplacians.
//!
//! Nodes and edges are indexed from zero in the API. The text format and
//! every file the CLI writes use 1-based node ids and 1-based edge labels,
//! with edges labeled in file order.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::spectral::SymmetricMatrix;

/// Eigenvalues below this count as zero when checking connectivity.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    order: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    incident: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a connected simple graph on `order` nodes. Each edge is stored
    /// as `(min, max)`; its index in `edges` is its label.
    pub fn new(order: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidParameter(format!(
                "graph needs at least 2 nodes, got {order}"
            )));
        }
        let mut seen = HashSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for (k, &(i, j)) in edges.iter().enumerate() {
            if i >= order || j >= order {
                return Err(Error::InvalidParameter(format!(
                    "edge {} = ({i}, {j}) references a node outside 0..{order}",
                    k + 1
                )));
            }
            if i == j {
                return Err(Error::InvalidParameter(format!(
                    "edge {} is a self-loop",
                    k + 1
                )));
            }
            let e = (i.min(j), i.max(j));
            if !seen.insert(e) {
                return Err(Error::InvalidParameter(format!(
                    "edge {} duplicates ({}, {})",
                    k + 1,
                    e.0,
                    e.1
                )));
            }
            normalized.push(e);
        }
        let graph = Self::assemble(order, normalized);
        let zeros = graph
            .laplacian()
            .eigen()?
            .eigenvalues
            .iter()
            .filter(|&&l| l < ZERO_EIGENVALUE_TOL)
            .count();
        if zeros != 1 {
            return Err(Error::Disconnected { components: zeros });
        }
        Ok(graph)
    }

    fn assemble(order: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut neighbors = vec![Vec::new(); order];
        let mut incident = vec![Vec::new(); order];
        for (k, &(i, j)) in edges.iter().enumerate() {
            neighbors[i].push(j);
            neighbors[j].push(i);
            incident[i].push(k);
            incident[j].push(k);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Graph {
            order,
            edges,
            neighbors,
            incident,
        }
    }

    /// Number of nodes `N`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> Result<(usize, usize)> {
        self.edges.get(k).copied().ok_or(Error::EdgeOutOfRange {
            label: k,
            count: self.edges.len(),
        })
    }

    /// Neighbor set `N(i)`, ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Incident edge labels `E(i)`, ascending.
    pub fn incident_edges(&self, i: usize) -> &[usize] {
        &self.incident[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// `E_k = (e_i - e_j)(e_i - e_j)ᵀ` for edge `k = (i, j)`.
    pub fn edge_matrix(&self, k: usize) -> Result<SymmetricMatrix> {
        let (i, j) = self.edge(k)?;
        Ok(SymmetricMatrix::from_upper_fn(self.order, |p, q| {
            match (p == i || p == j, q == i || q == j) {
                (true, true) if p == q => 1.0,
                (true, true) => -1.0,
                _ => 0.0,
            }
        }))
    }

    /// `⟨X, E_k⟩ = X_ii + X_jj - 2 X_ij`, without materializing `E_k`.
    pub fn edge_inner(&self, k: usize, x: &SymmetricMatrix) -> f64 {
        let (i, j) = self.edges[k];
        x.get(i, i) + x.get(j, j) - 2.0 * x.get(i, j)
    }

    /// Unweighted Laplacian `L = Σ_k E_k`.
    pub fn laplacian(&self) -> SymmetricMatrix {
        let ones = EdgeWeights(vec![1.0; self.edges.len()]);
        self.laplacian_unchecked(&ones.0)
    }

    /// `L_w = Σ_k w_k E_k`.
    pub fn weighted_laplacian(&self, weights: &EdgeWeights) -> Result<SymmetricMatrix> {
        if weights.len() != self.edges.len() {
            return Err(Error::DimensionMismatch {
                context: "weighted_laplacian",
                expected: self.edges.len(),
                found: weights.len(),
            });
        }
        weights.validate()?;
        Ok(self.laplacian_unchecked(weights.as_slice()))
    }

    fn laplacian_unchecked(&self, w: &[f64]) -> SymmetricMatrix {
        let mut m = nalgebra::DMatrix::zeros(self.order, self.order);
        for (&(i, j), &wk) in self.edges.iter().zip(w) {
            m[(i, i)] += wk;
            m[(j, j)] += wk;
            m[(i, j)] -= wk;
            m[(j, i)] -= wk;
        }
        SymmetricMatrix::new(m)
    }
}

/// Nonnegative weight per edge label.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights(Vec<f64>);

impl EdgeWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let w = EdgeWeights(weights);
        w.validate()?;
        Ok(w)
    }

    fn validate(&self) -> Result<()> {
        for (k, &w) in self.0.iter().enumerate() {
            if w < 0.0 || !w.is_finite() {
                return Err(Error::NegativeWeight { label: k, value: w });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }
}

/// Second-smallest eigenvalue of a Laplacian.
pub fn algebraic_connectivity(l: &SymmetricMatrix) -> Result<f64> {
    let n = l.order();
    if n < 2 {
        return Err(Error::NotLaplacian(format!(
            "order {n} has no second eigenvalue"
        )));
    }
    let slack = ZERO_EIGENVALUE_TOL * (1.0 + l.norm());
    for (p, row) in l.as_matrix().row_iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if sum.abs() > slack {
            return Err(Error::NotLaplacian(format!("row {p} sums to {sum:e}")));
        }
    }
    let d = l.eigen()?;
    if d.min_eigenvalue() < -slack {
        return Err(Error::NotLaplacian(format!(
            "negative eigenvalue {:e}",
            d.min_eigenvalue()
        )));
    }
    Ok(d.eigenvalues[1])
}

/// Parses the edge-list text format:
///
/// ```text
/// # comment
/// 3        <- node count
/// 1 2      <- edge 1
/// 2 3      <- edge 2
/// ```
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut order: Option<usize> = None;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(n) = order else {
            let [token] = tokens.as_slice() else {
                return Err(parse_err(line, "expected the node count"));
            };
            let n: usize = token
                .parse()
                .map_err(|_| parse_err(line, &format!("invalid node count '{token}'")))?;
            if n < 2 {
                return Err(parse_err(line, "graph needs at least 2 nodes"));
            }
            order = Some(n);
            continue;
        };
        let [a, b] = tokens.as_slice() else {
            return Err(parse_err(line, "expected an edge 'i j'"));
        };
        let endpoint = |token: &str| -> Result<usize> {
            let id: usize = token
                .parse()
                .map_err(|_| parse_err(line, &format!("invalid node id '{token}'")))?;
            if id == 0 || id > n {
                return Err(parse_err(line, &format!("node id {id} outside 1..={n}")));
            }
            Ok(id - 1)
        };
        let (i, j) = (endpoint(a)?, endpoint(b)?);
        if i == j {
            return Err(Error::SelfLoop { line, node: i + 1 });
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(Error::DuplicateEdge {
                line,
                i: i + 1,
                j: j + 1,
            });
        }
        edges.push((i, j));
    }
    let order = order.ok_or_else(|| parse_err(0, "missing node count"))?;
    Graph::new(order, edges)
}

fn parse_err(line: usize, detail: &str) -> Error {
    Error::Parse {
        line,
        detail: detail.to_string(),
    }
}
