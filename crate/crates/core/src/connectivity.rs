//! Distributed maximization of algebraic connectivity.
//!
//! Every node `i` owns a shift `μ⁽ⁱ⁾`, one weight contribution `w_k⁽ⁱ⁾` per
//! incident edge (with budget `Σ_k w_k⁽ⁱ⁾ = 1`), a symmetric matrix `Z⁽ⁱ⁾`
//! stored as its upper triangle `z⁽ⁱ⁾`, and the budget multiplier `v⁽ⁱ⁾`.
//! Node `i` minimizes the smoothed largest eigenvalue of
//!
//! ```text
//! X⁽ⁱ⁾ = -μ⁽ⁱ⁾𝟙 - Σ_{k∈E(i)} w_k⁽ⁱ⁾ E_k + Σ_{j∈N(i)} (Z⁽ⁱ⁾ - Z⁽ʲ⁾)
//! ```
//!
//! and the network runs the projected primal-dual flow of the summed
//! augmented Lagrangian as synchronous rounds. In each round, every node
//! publishes `Z⁽ʲ⁾` and `∇f_ε(X⁽ʲ⁾)`; then every node takes one Euler step
//! using only its own state and its neighbors' messages.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{FlowState, Objective, ProblemSpec, SolverConfig};
use crate::graph::{algebraic_connectivity, EdgeWeights, Graph};
use crate::sets::{SimpleSet, ACTIVITY_TOL};
use crate::spectral::{smoothed_max_eig_from, smoothed_max_eig_grad_from, SymmetricMatrix};

/// Default smoothing parameter.
pub const DEFAULT_EPS: f64 = 1e-3;

/// Default round length.
pub const DEFAULT_DT: f64 = 1e-2;

/// Default stopping threshold on the aggregate residual.
pub const DEFAULT_TOL: f64 = 1e-4;

/// Number of upper-triangle entries of an `n×n` symmetric matrix.
pub fn basis_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position `(p, q)`, `p ≤ q`, of basis index `l` in row-major upper-triangle
/// order `(0,0), (0,1), …, (0,n-1), (1,1), …`.
pub fn basis_position(l: usize, n: usize) -> Option<(usize, usize)> {
    let mut rest = l;
    for p in 0..n {
        let row = n - p;
        if rest < row {
            return Some((p, p + rest));
        }
        rest -= row;
    }
    None
}

/// Basis matrix `B_l`: ones at `(p, q)` and `(q, p)`, zeros elsewhere.
pub fn symmetric_basis(l: usize, n: usize) -> Result<SymmetricMatrix> {
    let (p, q) = basis_position(l, n).ok_or_else(|| {
        Error::InvalidParameter(format!("basis index {l} out of range for order {n}"))
    })?;
    let mut m = DMatrix::zeros(n, n);
    m[(p, q)] = 1.0;
    m[(q, p)] = 1.0;
    Ok(SymmetricMatrix::new(m))
}

/// `Σ_l z_l B_l`
pub fn matrix_from_basis(z: &[f64], n: usize) -> SymmetricMatrix {
    let mut it = z.iter();
    SymmetricMatrix::from_upper_fn(n, |_, _| {
        *it.next().expect("coefficient count matches order")
    })
}

/// `(⟨X, B_l⟩)_l`: diagonal entries once, off-diagonal entries twice.
pub fn basis_coordinates(x: &SymmetricMatrix) -> Vec<f64> {
    let n = x.order();
    let mut out = Vec::with_capacity(basis_len(n));
    for p in 0..n {
        for q in p..n {
            out.push(if p == q {
                x.get(p, p)
            } else {
                2.0 * x.get(p, q)
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: usize,
    pub mu: f64,
    /// Contribution per incident edge label.
    pub w: BTreeMap<usize, f64>,
    /// Upper triangle of `Z⁽ⁱ⁾` in basis order.
    pub z: Vec<f64>,
    pub v: f64,
}

impl NodeState {
    pub fn z_matrix(&self, n: usize) -> SymmetricMatrix {
        matrix_from_basis(&self.z, n)
    }

    /// `Σ_k w_k⁽ⁱ⁾ - 1`
    pub fn budget_violation(&self) -> f64 {
        self.w.values().sum::<f64>() - 1.0
    }

    fn is_finite(&self) -> bool {
        self.mu.is_finite()
            && self.v.is_finite()
            && self.w.values().all(|w| w.is_finite())
            && self.z.iter().all(|z| z.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    graph: Arc<Graph>,
    pub nodes: Vec<NodeState>,
    eps: f64,
}

/// What node `j` sends to its neighbors each round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMessage {
    pub sender: usize,
    pub z: SymmetricMatrix,
    /// `∇f_ε(X⁽ʲ⁾)`
    pub grad: SymmetricMatrix,
}

/// Right-hand side of the node dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFields {
    pub dmu: f64,
    /// `-∂L_A/∂w_k` per incident edge, before the orthant projection.
    pub dw_raw: Vec<f64>,
    /// Tangent-cone projection of `dw_raw` at the current weights.
    pub dw: Vec<f64>,
    pub dz: Vec<f64>,
    pub dv: f64,
}

impl NodeFields {
    fn primal_norm_squared(&self) -> f64 {
        self.dmu * self.dmu
            + self.dw.iter().map(|d| d * d).sum::<f64>()
            + self.dz.iter().map(|d| d * d).sum::<f64>()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )))
    }
}

impl NetworkState {
    /// `μ = 0`, `z = 0`, `v = 0`, and each node splits its budget evenly over
    /// its incident edges.
    pub fn new(graph: Arc<Graph>, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        let len = basis_len(graph.order());
        let nodes = (0..graph.order())
            .map(|i| {
                let edges = graph.incident_edges(i);
                let share = 1.0 / edges.len() as f64;
                NodeState {
                    id: i,
                    mu: 0.0,
                    w: edges.iter().map(|&k| (k, share)).collect(),
                    z: vec![0.0; len],
                    v: 0.0,
                }
            })
            .collect();
        Ok(NetworkState { graph, nodes, eps })
    }

    pub fn from_nodes(graph: Arc<Graph>, eps: f64, nodes: Vec<NodeState>) -> Result<Self> {
        check_eps(eps)?;
        let state = NetworkState { graph, nodes, eps };
        state.validate()?;
        Ok(state)
    }

    fn validate(&self) -> Result<()> {
        let n = self.graph.order();
        if self.nodes.len() != n {
            return Err(Error::DimensionMismatch {
                context: "network nodes",
                expected: n,
                found: self.nodes.len(),
            });
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::InvalidParameter(format!(
                    "node at index {i} has id {}",
                    node.id
                )));
            }
            if !node
                .w
                .keys()
                .copied()
                .eq(self.graph.incident_edges(i).iter().copied())
            {
                return Err(Error::InvalidParameter(format!(
                    "node {i} weights must cover exactly its incident edges"
                )));
            }
            if node.w.values().any(|&w| w.is_nan() || w < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "node {i} has a negative weight"
                )));
            }
            if node.z.len() != basis_len(n) {
                return Err(Error::DimensionMismatch {
                    context: "node z coefficients",
                    expected: basis_len(n),
                    found: node.z.len(),
                });
            }
            if !node.is_finite() {
                return Err(Error::NonFinite("node state"));
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn shared_graph(&self) -> Arc<Graph> {
        Arc::clone(&self.graph)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `X⁽ⁱ⁾` assembled from the node's state and its neighbors' `Z`.
    pub fn node_matrix(&self, i: usize) -> Result<SymmetricMatrix> {
        self.check_node(i)?;
        let n = self.graph.order();
        let zs: Vec<SymmetricMatrix> = self
            .graph
            .neighbors(i)
            .iter()
            .map(|&j| self.nodes[j].z_matrix(n))
            .collect();
        Ok(local_matrix(&self.graph, &self.nodes[i], zs.iter()))
    }

    fn check_node(&self, i: usize) -> Result<()> {
        if i < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "node {i} out of range for {} nodes",
                self.nodes.len()
            )))
        }
    }

    /// `Σ_i f_ε(X⁽ⁱ⁾)`
    pub fn objective_value(&self) -> Result<f64> {
        (0..self.nodes.len())
            .map(|i| smoothed_max_eig_from(&self.node_matrix(i)?.eigen()?, self.eps))
            .sum()
    }

    /// `Σ_i [f_ε(X⁽ⁱ⁾) + v⁽ⁱ⁾ r_i + ½ r_i²]` with `r_i = Σ_k w_k⁽ⁱ⁾ - 1`.
    pub fn augmented_lagrangian(&self) -> Result<f64> {
        let penalty: f64 = self
            .nodes
            .iter()
            .map(|node| {
                let r = node.budget_violation();
                node.v * r + 0.5 * r * r
            })
            .sum();
        Ok(self.objective_value()? + penalty)
    }

    /// Edge weight = sum of the two endpoint contributions.
    pub fn assemble_weights(&self) -> EdgeWeights {
        let mut total = vec![0.0; self.graph.edge_count()];
        for node in &self.nodes {
            for (&k, &w) in &node.w {
                total[k] += w;
            }
        }
        EdgeWeights::new(total).expect("contributions are nonnegative")
    }

    /// `λ₂` of the Laplacian built from [`assemble_weights`](Self::assemble_weights).
    pub fn assembled_connectivity(&self) -> Result<f64> {
        algebraic_connectivity(&self.graph.weighted_laplacian(&self.assemble_weights())?)
    }

    /// `Σ_i |Σ_k w_k⁽ⁱ⁾ - 1|`
    pub fn budget_violation(&self) -> f64 {
        self.nodes.iter().map(|n| n.budget_violation().abs()).sum()
    }

    /// Phase one of a round: every node's outgoing message.
    pub fn broadcast(&self) -> Result<Vec<RoundMessage>> {
        Ok(self.evaluate(&Executor::Sequential)?.messages)
    }

    /// Right-hand side for node `i`, computed from its own state and the
    /// messages of its neighbors only.
    pub fn node_fields(&self, i: usize, inbox: &[RoundMessage]) -> Result<NodeFields> {
        self.check_node(i)?;
        let inbox = order_inbox(&self.graph, i, inbox)?;
        let node = &self.nodes[i];
        let x = local_matrix(&self.graph, node, inbox.iter().map(|m| &m.z));
        let grad = smoothed_max_eig_grad_from(&x.eigen()?, self.eps)?;
        Ok(fields_from(
            &self.graph,
            node,
            &grad,
            inbox.iter().map(|m| &m.grad),
        ))
    }

    /// Computes all messages and fields from the current snapshot.
    fn evaluate(&self, exec: &Executor) -> Result<Evaluation> {
        let n = self.graph.order();
        let zs: Vec<SymmetricMatrix> = self.nodes.iter().map(|node| node.z_matrix(n)).collect();

        let outgoing = exec.map(n, |j| -> Result<(RoundMessage, f64)> {
            let neighbor_z = self.graph.neighbors(j).iter().map(|&k| &zs[k]);
            let x = local_matrix(&self.graph, &self.nodes[j], neighbor_z);
            let decomp = x.eigen()?;
            let grad = smoothed_max_eig_grad_from(&decomp, self.eps)?;
            let value = smoothed_max_eig_from(&decomp, self.eps)?;
            Ok((
                RoundMessage {
                    sender: j,
                    z: zs[j].clone(),
                    grad,
                },
                value,
            ))
        });
        let mut messages = Vec::with_capacity(n);
        let mut objective = 0.0;
        for item in outgoing {
            let (message, value) = item?;
            objective += value;
            messages.push(message);
        }

        let fields = exec.map(n, |i| {
            let neighbor_grads = self.graph.neighbors(i).iter().map(|&j| &messages[j].grad);
            fields_from(
                &self.graph,
                &self.nodes[i],
                &messages[i].grad,
                neighbor_grads,
            )
        });
        Ok(Evaluation {
            messages,
            fields,
            objective,
        })
    }

    fn apply(&self, fields: &[NodeFields], dt: f64, round: usize) -> Result<NetworkState> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (node, f) in self.nodes.iter().zip(fields) {
            let next = NodeState {
                id: node.id,
                mu: node.mu + dt * f.dmu,
                w: node
                    .w
                    .iter()
                    .zip(&f.dw_raw)
                    .map(|((&k, &w), &d)| (k, (w + dt * d).max(0.0)))
                    .collect(),
                z: node.z.iter().zip(&f.dz).map(|(z, d)| z + dt * d).collect(),
                v: node.v + dt * f.dv,
            };
            if !next.is_finite() {
                return Err(Error::NodeDivergence {
                    node: node.id,
                    round,
                });
            }
            nodes.push(next);
        }
        Ok(NetworkState {
            graph: Arc::clone(&self.graph),
            nodes,
            eps: self.eps,
        })
    }

    /// One synchronous forward-Euler round.
    pub fn round(&self, dt: f64) -> Result<NetworkState> {
        self.round_with(dt, &Executor::Sequential)
    }

    pub fn round_with(&self, dt: f64, exec: &Executor) -> Result<NetworkState> {
        check_dt(dt)?;
        let eval = self.evaluate(exec)?;
        self.apply(&eval.fields, dt, 0)
    }

    /// Aggregate residual: budget violation plus the norm of all projected
    /// primal fields.
    pub fn residual(&self) -> Result<f64> {
        let eval = self.evaluate(&Executor::Sequential)?;
        Ok(self.residual_from(&eval.fields))
    }

    fn residual_from(&self, fields: &[NodeFields]) -> f64 {
        let primal: f64 = fields.iter().map(NodeFields::primal_norm_squared).sum();
        self.budget_violation() + primal.sqrt()
    }

    /// Per-node contributions in (node, edge label) order.
    pub fn contributions(&self) -> Vec<(usize, usize, f64)> {
        self.nodes
            .iter()
            .flat_map(|node| node.w.iter().map(move |(&k, &w)| (node.id, k, w)))
            .collect()
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )))
    }
}

struct Evaluation {
    messages: Vec<RoundMessage>,
    fields: Vec<NodeFields>,
    objective: f64,
}

/// How node computations inside a round are scheduled. Every schedule reads
/// the same pre-round snapshot, so results do not depend on the choice.
#[derive(Debug)]
pub enum Executor {
    Sequential,
    /// Evaluate nodes in the given order (a permutation of `0..N`).
    Ordered(Vec<usize>),
    Parallel(rayon::ThreadPool),
}

impl Executor {
    /// Sequential for `threads <= 1`, otherwise a dedicated thread pool.
    pub fn with_threads(threads: usize) -> Result<Self> {
        if threads <= 1 {
            return Ok(Executor::Sequential);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map(Executor::Parallel)
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
    }

    fn map<T: Send>(&self, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        match self {
            Executor::Sequential => (0..n).map(f).collect(),
            Executor::Ordered(order) => {
                let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
                for &i in order {
                    slots[i] = Some(f(i));
                }
                slots
                    .into_iter()
                    .map(|s| s.expect("order must be a permutation of the nodes"))
                    .collect()
            }
            Executor::Parallel(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }
}

/// Sorts the inbox by sender and checks that it holds exactly one message per
/// neighbor of `i`.
fn order_inbox<'a>(
    graph: &Graph,
    i: usize,
    inbox: &'a [RoundMessage],
) -> Result<Vec<&'a RoundMessage>> {
    let mut sorted: Vec<&RoundMessage> = inbox.iter().collect();
    sorted.sort_by_key(|m| m.sender);
    let senders: Vec<usize> = sorted.iter().map(|m| m.sender).collect();
    if senders != graph.neighbors(i) {
        return Err(Error::Protocol {
            node: i,
            detail: format!(
                "expected messages from {:?}, got {:?}",
                graph.neighbors(i),
                senders
            ),
        });
    }
    let n = graph.order();
    if sorted
        .iter()
        .any(|m| m.z.order() != n || m.grad.order() != n)
    {
        return Err(Error::Protocol {
            node: i,
            detail: format!("message matrices must have order {n}"),
        });
    }
    Ok(sorted)
}

/// `X⁽ⁱ⁾ = -μ𝟙 - Σ_k w_k E_k + deg(i)·Z⁽ⁱ⁾ - Σ_j Z⁽ʲ⁾`
fn local_matrix<'a>(
    graph: &Graph,
    node: &NodeState,
    neighbor_z: impl Iterator<Item = &'a SymmetricMatrix>,
) -> SymmetricMatrix {
    let n = graph.order();
    let mut x = DMatrix::from_element(n, n, -node.mu);
    for (&k, &w) in &node.w {
        let (a, b) = graph.edges()[k];
        x[(a, a)] -= w;
        x[(b, b)] -= w;
        x[(a, b)] += w;
        x[(b, a)] += w;
    }
    let mut degree = 0.0;
    for z in neighbor_z {
        x -= z.as_matrix();
        degree += 1.0;
    }
    x += node.z_matrix(n).as_matrix() * degree;
    SymmetricMatrix::new(x)
}

fn fields_from<'a>(
    graph: &Graph,
    node: &NodeState,
    grad: &SymmetricMatrix,
    neighbor_grads: impl Iterator<Item = &'a SymmetricMatrix>,
) -> NodeFields {
    let n = graph.order();
    // ⟨G, 𝟙⟩ = 1ᵀ G 1
    let dmu = grad.as_matrix().sum();
    let violation = node.budget_violation();
    let dw_raw: Vec<f64> = node
        .w
        .keys()
        .map(|&k| graph.edge_inner(k, grad) - node.v - violation)
        .collect();
    let dw = node
        .w
        .values()
        .zip(&dw_raw)
        .map(|(&w, &d)| if w <= ACTIVITY_TOL { d.max(0.0) } else { d })
        .collect();

    // Σ_j (G_i - G_j) = deg·G_i - Σ_j G_j
    let mut diff = DMatrix::zeros(n, n);
    let mut degree = 0.0;
    for g in neighbor_grads {
        diff -= g.as_matrix();
        degree += 1.0;
    }
    diff += grad.as_matrix() * degree;
    let dz = basis_coordinates(&SymmetricMatrix::new(diff))
        .into_iter()
        .map(|c| -c)
        .collect();

    NodeFields {
        dmu,
        dw_raw,
        dw,
        dz,
        dv: violation,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub round: usize,
    pub objective: f64,
    pub lambda2: f64,
    pub residual: f64,
    /// `(node, edge label, w_k⁽ⁱ⁾)` in (node, edge label) order.
    pub contributions: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub final_state: NetworkState,
    pub converged: bool,
    pub rounds: usize,
    pub residual: f64,
    pub objective: f64,
    pub history: Vec<HistoryRow>,
}

/// Runs rounds until the aggregate residual reaches `config.tol` or
/// `config.max_steps` rounds have been taken. Only `dt`, `max_steps`, `tol`
/// and `record_stride` of the config are used; rounds are always Euler.
pub fn simulate(init: NetworkState, config: &SolverConfig, exec: &Executor) -> Result<Simulation> {
    config.validate()?;
    init.validate()?;
    let mut state = init;
    let mut history = Vec::new();
    let mut round = 0;
    loop {
        let eval = state.evaluate(exec)?;
        let residual = state.residual_from(&eval.fields);
        if !residual.is_finite() || !eval.objective.is_finite() {
            return Err(Error::NodeDivergence {
                node: first_bad_node(&eval.fields),
                round,
            });
        }
        let done = residual <= config.tol || round >= config.max_steps;
        if round % config.record_stride == 0 || done {
            history.push(HistoryRow {
                round,
                objective: eval.objective,
                lambda2: state.assembled_connectivity()?,
                residual,
                contributions: state.contributions(),
            });
        }
        if done {
            return Ok(Simulation {
                converged: residual <= config.tol,
                rounds: round,
                residual,
                objective: eval.objective,
                history,
                final_state: state,
            });
        }
        round += 1;
        state = state.apply(&eval.fields, config.dt, round)?;
    }
}

fn first_bad_node(fields: &[NodeFields]) -> usize {
    fields
        .iter()
        .position(|f| {
            !(f.dmu.is_finite()
                && f.dv.is_finite()
                && f.dw_raw.iter().all(|d| d.is_finite())
                && f.dz.iter().all(|d| d.is_finite()))
        })
        .unwrap_or(0)
}

/// Layout of the stacked variable `x = [x⁽¹⁾; …; x⁽ᴺ⁾]`,
/// `x⁽ⁱ⁾ = [μ⁽ⁱ⁾, w⁽ⁱ⁾, z⁽ⁱ⁾]`.
fn node_offsets(graph: &Graph) -> Vec<usize> {
    let len = basis_len(graph.order());
    let mut offsets = Vec::with_capacity(graph.order() + 1);
    let mut offset = 0;
    for i in 0..graph.order() {
        offsets.push(offset);
        offset += 1 + graph.incident_edges(i).len() + len;
    }
    offsets.push(offset);
    offsets
}

/// Stacks a network state into the primal/dual vectors of
/// [`centralized_problem`].
pub fn pack(state: &NetworkState) -> FlowState {
    let mut x = Vec::new();
    for node in &state.nodes {
        x.push(node.mu);
        x.extend(node.w.values());
        x.extend(&node.z);
    }
    let v = state.nodes.iter().map(|n| n.v).collect::<Vec<_>>();
    FlowState::new(DVector::from_vec(x), DVector::from_vec(v))
}

/// Inverse of [`pack`].
pub fn unpack(graph: Arc<Graph>, eps: f64, flow: &FlowState) -> Result<NetworkState> {
    let offsets = node_offsets(&graph);
    crate::error::check_dim("packed network state", offsets[graph.order()], flow.x.len())?;
    crate::error::check_dim("packed network duals", graph.order(), flow.v.len())?;
    let len = basis_len(graph.order());
    let nodes = (0..graph.order())
        .map(|i| {
            let x = &flow.x.as_slice()[offsets[i]..offsets[i + 1]];
            let edges = graph.incident_edges(i);
            NodeState {
                id: i,
                mu: x[0],
                w: edges.iter().zip(&x[1..]).map(|(&k, &w)| (k, w)).collect(),
                z: x[1 + edges.len()..1 + edges.len() + len].to_vec(),
                v: flow.v[i],
            }
        })
        .collect();
    NetworkState::from_nodes(graph, eps, nodes)
}

/// The whole-network problem as a single [`ProblemSpec`]: objective
/// `Σ_i f_ε(X⁽ⁱ⁾)`, one budget row per node, and
/// `K = Π_i (R × R₊^{|E(i)|} × R^{N(N+1)/2})`.
pub fn centralized_problem(graph: Arc<Graph>, eps: f64) -> Result<ProblemSpec> {
    check_eps(eps)?;
    let offsets = node_offsets(&graph);
    let dim = offsets[graph.order()];
    let len = basis_len(graph.order());

    let mut components = Vec::new();
    let mut a = DMatrix::zeros(graph.order(), dim);
    for i in 0..graph.order() {
        let degree = graph.incident_edges(i).len();
        components.push(SimpleSet::free(1));
        components.push(SimpleSet::nonnegative(degree));
        components.push(SimpleSet::free(len));
        for c in 0..degree {
            a[(i, offsets[i] + 1 + c)] = 1.0;
        }
    }
    let set = SimpleSet::product(components)?;

    let value_graph = Arc::clone(&graph);
    let grad_graph = Arc::clone(&graph);
    let objective = Objective::custom(
        dim,
        move |x| {
            let flow = FlowState::new(x.clone(), DVector::zeros(value_graph.order()));
            unpack(Arc::clone(&value_graph), eps, &flow)
                .and_then(|s| s.objective_value())
                .unwrap_or(f64::NAN)
        },
        move |x| {
            let flow = FlowState::new(x.clone(), DVector::zeros(grad_graph.order()));
            let gradient = || -> Result<DVector<f64>> {
                let mut state = unpack(Arc::clone(&grad_graph), eps, &flow)?;
                // The smooth part's gradient does not involve the budget terms.
                for node in &mut state.nodes {
                    let r = node.budget_violation();
                    node.v = -r;
                }
                let eval = state.evaluate(&Executor::Sequential)?;
                let mut g = Vec::with_capacity(flow.x.len());
                for f in &eval.fields {
                    g.push(-f.dmu);
                    g.extend(f.dw_raw.iter().map(|d| -d));
                    g.extend(f.dz.iter().map(|d| -d));
                }
                Ok(DVector::from_vec(g))
            };
            gradient().unwrap_or_else(|_| DVector::from_element(flow.x.len(), f64::NAN))
        },
    );
    ProblemSpec::new(objective, a, DVector::from_element(graph.order(), 1.0), set)
}
