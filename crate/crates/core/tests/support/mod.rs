//! Oracles and criterion checks shared by the integration tests and the
//! acceptance runner. Every oracle here is computed independently of the code
//! under test (own matrix assembly, nalgebra eigenvalues, finite differences,
//! matrix exponentials).

#![allow(dead_code)]

use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use pdflow::connectivity::{self, Executor, NetworkState, NodeState, RoundMessage};
use pdflow::flow::{FlowState, Integrator, Objective, ProblemSpec, SolverConfig};
use pdflow::graph::{algebraic_connectivity, Graph};
use pdflow::presets;
use pdflow::sets::SimpleSet;
use pdflow::spectral::{smoothed_max_eig, smoothed_max_eig_grad, SymmetricMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `Ok(summary)` or `Err(first violation)`.
pub type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($fmt)+)),
        }
    };
}

fn lib<T>(r: pdflow::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-scale..scale))
}

/// Relative error with an absolute floor of one.
pub fn rel_err(approx: f64, exact: f64) -> f64 {
    (approx - exact).abs() / exact.abs().max(1.0)
}

// ---------------------------------------------------------------- sets

fn random_simple_set(rng: &mut ChaCha8Rng) -> SimpleSet {
    let dim = rng.gen_range(1..=4);
    match rng.gen_range(0..4) {
        0 => SimpleSet::free(dim),
        1 => SimpleSet::nonnegative(dim),
        2 => {
            let mut lower = Vec::with_capacity(dim);
            let mut upper = Vec::with_capacity(dim);
            for _ in 0..dim {
                let lo = rng.gen_range(-2.0..1.0);
                let (l, u) = match rng.gen_range(0..5) {
                    0 => (lo, lo + rng.gen_range(0.5..3.0)),
                    1 => (lo, lo),
                    2 => (f64::NEG_INFINITY, lo),
                    3 => (lo, f64::INFINITY),
                    _ => (f64::NEG_INFINITY, f64::INFINITY),
                };
                lower.push(l);
                upper.push(u);
            }
            SimpleSet::new_box(lower, upper).expect("valid random box")
        }
        _ => {
            let center = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
            SimpleSet::ball(center, rng.gen_range(0.5..2.0)).expect("valid random ball")
        }
    }
}

/// Any variant, including products of two or three components.
pub fn random_set(rng: &mut ChaCha8Rng) -> SimpleSet {
    if rng.gen_bool(0.3) {
        let parts = (0..rng.gen_range(2..=3))
            .map(|_| random_simple_set(rng))
            .collect();
        SimpleSet::product(parts).expect("valid random product")
    } else {
        random_simple_set(rng)
    }
}

/// A point strictly inside the set, or `None` if the set has empty interior.
pub fn interior_point(set: &SimpleSet, rng: &mut ChaCha8Rng) -> Option<DVector<f64>> {
    let coords: Vec<f64> = match set {
        SimpleSet::FreeSpace(n) => (0..*n).map(|_| rng.gen_range(-3.0..3.0)).collect(),
        SimpleSet::NonnegativeOrthant(n) => (0..*n).map(|_| rng.gen_range(0.1..3.0)).collect(),
        SimpleSet::Box { lower, upper } => {
            let mut out = Vec::with_capacity(lower.len());
            for (&l, &u) in lower.iter().zip(upper) {
                out.push(match (l.is_finite(), u.is_finite()) {
                    _ if l == u => return None,
                    (true, true) => l + (u - l) * rng.gen_range(0.1..0.9),
                    (true, false) => l + rng.gen_range(0.1..3.0),
                    (false, true) => u - rng.gen_range(0.1..3.0),
                    (false, false) => rng.gen_range(-3.0..3.0),
                });
            }
            out
        }
        SimpleSet::Ball { center, radius } => {
            let dir = random_vector(rng, center.len(), 1.0);
            let dir = dir.clone() / dir.norm().max(1e-12);
            let r = radius * rng.gen_range(0.0..0.9);
            center
                .iter()
                .zip(dir.iter())
                .map(|(c, d)| c + r * d)
                .collect()
        }
        SimpleSet::Product(parts) => {
            let mut out = Vec::new();
            for part in parts {
                out.extend(interior_point(part, rng)?.iter());
            }
            out
        }
    };
    Some(DVector::from_vec(coords))
}

/// Idempotence, nonexpansiveness, the interior identity `Π_K(x, v) = v`, and
/// agreement of `Π_K(x, v)` with the difference quotient
/// `(P_K(x + δv) - x)/δ`.
pub fn projection_laws(triples: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let delta = 1e-8;
    let mut interior_checked = 0;
    for t in 0..triples {
        let set = random_set(&mut rng);
        let n = set.dim();
        let raw = random_vector(&mut rng, n, 4.0);
        let v = random_vector(&mut rng, n, 3.0);
        let x = lib(set.project_point(&raw))?;

        let again = lib(set.project_point(&x))?;
        ensure!(
            (&again - &x).amax() <= 1e-12 * (1.0 + x.amax()),
            "triple {t}: projection not idempotent on {set:?} at {x}"
        );

        let other = random_vector(&mut rng, n, 4.0);
        let px = lib(set.project_point(&raw))?;
        let py = lib(set.project_point(&other))?;
        ensure!(
            (&px - &py).norm() <= (&raw - &other).norm() * (1.0 + 1e-12) + 1e-14,
            "triple {t}: projection expands distances on {set:?}"
        );

        let tangent = lib(set.project_tangent_cone(&x, &v))?;
        let quotient = lib(set.limit_quotient_check(&x, &v, delta))?;
        ensure!(
            (&tangent - &quotient).norm() <= 1e-6 * (1.0 + v.norm()),
            "triple {t}: tangent projection {tangent} vs quotient {quotient} on {set:?} at {x}"
        );

        if let Some(inside) = interior_point(&set, &mut rng) {
            let tangent = lib(set.project_tangent_cone(&inside, &v))?;
            ensure!(
                (&tangent - &v).amax() <= 1e-12 * (1.0 + v.amax()),
                "triple {t}: interior tangent projection changed v on {set:?}"
            );
            interior_checked += 1;
        }
    }
    Ok(format!(
        "{triples} triples ({interior_checked} with interior points)"
    ))
}

// ---------------------------------------------------------------- spectral

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> SymmetricMatrix {
    SymmetricMatrix::from_upper_fn(n, |_, _| rng.gen_range(-scale..scale))
}

/// `ε ln Σ exp(λ_i/ε)` from nalgebra's eigenvalues.
pub fn oracle_smoothed_max(x: &DMatrix<f64>, eps: f64) -> f64 {
    let lam = x.clone().symmetric_eigenvalues();
    let top = lam.max();
    top + eps
        * lam
            .iter()
            .map(|l| ((l - top) / eps).exp())
            .sum::<f64>()
            .ln()
}

/// Sandwich bound, gradient structure, directional finite differences and
/// the `I`/`2I` equality witness.
pub fn smoothing_suite(count: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let h = 1e-5;
    let mut worst_fd: f64 = 0.0;
    for t in 0..count {
        let n = rng.gen_range(1..=10);
        let x = random_symmetric(&mut rng, n, 5.0);
        let lam_max = x.as_matrix().clone().symmetric_eigenvalues().max();
        for eps in [1.0, 1e-1, 1e-2] {
            let f = lib(smoothed_max_eig(&x, eps))?;
            ensure!(
                lam_max - 1e-10 <= f && f <= lam_max + eps * (n as f64).ln() + 1e-10,
                "matrix {t} (n={n}, eps={eps}): {f} outside [{lam_max}, {lam_max} + eps ln n]"
            );
            ensure!(
                (f - oracle_smoothed_max(x.as_matrix(), eps)).abs() <= 1e-10 * (1.0 + f.abs()),
                "matrix {t}: value disagrees with the eigenvalue oracle"
            );

            let g = lib(smoothed_max_eig_grad(&x, eps))?;
            ensure!(
                (g.trace() - 1.0).abs() <= 1e-10,
                "matrix {t}: gradient trace {}",
                g.trace()
            );
            let g_min = g.as_matrix().clone().symmetric_eigenvalues().min();
            ensure!(g_min >= -1e-10, "matrix {t}: gradient eigenvalue {g_min}");
            ensure!(
                g.as_matrix() == &g.as_matrix().transpose(),
                "matrix {t}: gradient not symmetric"
            );

            let d = random_symmetric(&mut rng, n, 1.0);
            let d = &d * (1.0 / d.norm());
            let plus = lib(smoothed_max_eig(&(&x + &(&d * h)), eps))?;
            let minus = lib(smoothed_max_eig(&(&x - &(&d * h)), eps))?;
            let fd = (plus - minus) / (2.0 * h);
            let err = rel_err(fd, g.inner(&d));
            worst_fd = worst_fd.max(err);
            ensure!(
                err <= 1e-5,
                "matrix {t} (n={n}, eps={eps}): directional derivative error {err:e}"
            );
        }
    }
    for n in [1, 3, 7] {
        for eps in [1.0, 1e-1, 1e-2] {
            let one = SymmetricMatrix::identity(n);
            let two = &one * 2.0;
            let mid = &one * 1.5;
            let lhs = lib(smoothed_max_eig(&mid, eps))?;
            let rhs =
                0.5 * lib(smoothed_max_eig(&one, eps))? + 0.5 * lib(smoothed_max_eig(&two, eps))?;
            ensure!(
                (lhs - rhs).abs() <= 1e-10,
                "I/2I witness n={n} eps={eps}: {lhs} vs {rhs}"
            );
        }
    }
    Ok(format!(
        "{count} matrices x 3 eps; worst directional error {worst_fd:.1e}"
    ))
}

// ---------------------------------------------------------------- flow

/// `minimize ½qx² + cx  s.t.  ax = b` on the real line: the augmented flow is
/// the affine system `ż = Mz + k` whose exact solution comes from `exp(Mt)`.
pub struct LinearSaddle {
    pub problem: ProblemSpec,
    m: DMatrix<f64>,
    k: DVector<f64>,
}

impl LinearSaddle {
    pub fn new() -> Self {
        let (q, c, a, b, rho) = (2.0, -1.0, 1.0, 0.5, 1.0);
        let problem = ProblemSpec::new(
            Objective::quadratic(DMatrix::from_element(1, 1, q), DVector::from_element(1, c))
                .unwrap(),
            DMatrix::from_element(1, 1, a),
            DVector::from_element(1, b),
            SimpleSet::free(1),
        )
        .unwrap()
        .with_rho(rho)
        .unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[-(q + rho * a * a), -a, a, 0.0]);
        let k = DVector::from_vec(vec![-c + rho * a * b, -b]);
        LinearSaddle { problem, m, k }
    }

    pub fn exact(&self, z0: &DVector<f64>, t: f64) -> DVector<f64> {
        let fixed = -self.m.clone().lu().solve(&self.k).expect("nonsingular");
        &fixed + (&self.m * t).exp() * (z0 - &fixed)
    }
}

/// Least-squares slope of `log err` against `log dt`.
pub fn fitted_slope(dts: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

pub fn integrator_orders() -> Check {
    let saddle = LinearSaddle::new();
    let z0 = DVector::from_vec(vec![1.0, -0.5]);
    let horizon = 1.0;
    let exact = saddle.exact(&z0, horizon);
    let dts = [0.1, 0.05, 0.025, 0.0125];
    let mut report = Vec::new();
    for (integrator, order) in [
        (Integrator::Euler, 1.0),
        (Integrator::Heun, 2.0),
        (Integrator::Rk4, 4.0),
    ] {
        let mut errs = Vec::new();
        for &dt in &dts {
            let mut state = FlowState::new(
                DVector::from_element(1, z0[0]),
                DVector::from_element(1, z0[1]),
            );
            for _ in 0..(horizon / dt).round() as usize {
                state = lib(saddle.problem.step(integrator, &state, dt))?;
            }
            let err = ((state.x[0] - exact[0]).powi(2) + (state.v[0] - exact[1]).powi(2)).sqrt();
            ensure!(
                err > 1e-13,
                "{integrator} error {err:e} at dt={dt} is at roundoff level"
            );
            errs.push(err);
        }
        let slope = fitted_slope(&dts, &errs);
        ensure!(
            (slope - order).abs() <= 0.4,
            "{integrator}: slope {slope:.3}, expected {order} (errors {errs:?})"
        );
        report.push(format!("{integrator} {slope:.2}"));
    }
    Ok(report.join(", "))
}

pub fn example2_lp() -> Check {
    let problem = presets::example2();
    let c = match problem.objective() {
        Objective::Linear { c } => c.clone(),
        _ => unreachable!(),
    };
    let config = SolverConfig {
        dt: 1e-3,
        tol: 1e-6,
        max_steps: 5_000_000,
        ..SolverConfig::default()
    };
    let start = Instant::now();
    let result = lib(problem.solve(&config, &problem.default_init()))?;
    let elapsed = start.elapsed();
    let value = c.dot(&result.final_state.x);
    ensure!(
        result.converged,
        "not converged after {} steps",
        result.steps_taken
    );
    ensure!(
        (value - presets::EXAMPLE2_OPTIMUM).abs() <= 1e-1,
        "objective {value}"
    );
    ensure!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");

    let tight = SolverConfig {
        tol: 1e-8,
        ..config
    };
    let precise = lib(problem.solve(&tight, &problem.default_init()))?;
    let precise_value = c.dot(&precise.final_state.x);
    ensure!(precise.converged, "tol 1e-8 run not converged");
    ensure!(
        (precise_value - presets::EXAMPLE2_OPTIMUM).abs() <= 1e-2,
        "objective {precise_value} at residual 1e-8"
    );
    Ok(format!(
        "c'x = {value:.6} after {} steps in {elapsed:.2?}; {precise_value:.8} at residual 1e-8",
        result.steps_taken
    ))
}

pub fn example1_random_inits(seed: u64) -> Check {
    let problem = presets::example1();
    let config = SolverConfig {
        dt: 1e-3,
        tol: 1e-7,
        max_steps: 1_000_000,
        ..SolverConfig::default()
    };
    let mut rng = rng(seed);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for trial in 0..5 {
        let x = DVector::from_vec(vec![
            2.0 + rng.gen_range(0.0..5.0),
            rng.gen_range(-5.0..5.0),
        ]);
        let v = DVector::from_element(1, rng.gen_range(-5.0..5.0));
        let result = lib(problem.solve(&config, &FlowState::new(x, v)))?;
        let s = &result.final_state;
        let err = (s.x[0] - 2.0)
            .abs()
            .max((s.x[1] - 2.0).abs())
            .max((s.v[0] - 3.0).abs());
        ensure!(
            result.converged && err <= 1e-3,
            "trial {trial}: ended at x={}, v={}",
            s.x,
            s.v
        );
        worst = worst.max(err);
    }
    let elapsed = start.elapsed();
    ensure!(elapsed.as_secs_f64() < 2.0, "took {elapsed:?}");
    Ok(format!("5 inits, worst error {worst:.1e}, {elapsed:.2?}"))
}

/// Distance to the saddle never grows by more than `1e-6(1 + d)` per step and
/// every iterate stays in `K`.
pub fn lyapunov_monotone(dt: f64) -> Check {
    let mut report = Vec::new();
    for (name, problem, saddle) in [
        ("example 1", presets::example1(), presets::example1_saddle()),
        ("example 2", presets::example2(), presets::example2_saddle()),
    ] {
        let mut state = problem.default_init();
        let mut d = lib(state.lyapunov_distance(&saddle))?;
        let d0 = d;
        let mut steps = 0;
        let mut worst_rise = f64::NEG_INFINITY;
        while lib(problem.kkt_residual(&state))? > 1e-6 && steps < 5_000_000 {
            state = lib(problem.euler_step(&state, dt))?;
            steps += 1;
            ensure!(
                lib(problem.set().contains(&state.x, 0.0))?,
                "{name}: infeasible iterate at step {steps}"
            );
            let next = lib(state.lyapunov_distance(&saddle))?;
            let rise = (next - d) / (1.0 + d);
            worst_rise = worst_rise.max(rise);
            ensure!(
                rise <= 1e-6,
                "{name}: distance rose from {d} to {next} at step {steps}"
            );
            d = next;
        }
        report.push(format!(
            "{name}: d {d0:.3} -> {d:.1e} in {steps} steps (max rise {worst_rise:.1e})"
        ));
    }
    Ok(report.join("; "))
}

// ---------------------------------------------------------------- connectivity

/// Random spanning tree plus random extra edges.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.gen_range(0..i), i));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !edges.contains(&(i, j)) && rng.gen_bool(0.4) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges).expect("spanning tree is connected")
}

pub fn random_nodes(rng: &mut ChaCha8Rng, graph: &Graph) -> Vec<NodeState> {
    let len = connectivity::basis_len(graph.order());
    (0..graph.order())
        .map(|i| NodeState {
            id: i,
            mu: rng.gen_range(-1.0..1.0),
            w: graph
                .incident_edges(i)
                .iter()
                .map(|&k| (k, rng.gen_range(0.0..1.0)))
                .collect(),
            z: (0..len).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            v: rng.gen_range(-1.0..1.0),
        })
        .collect()
}

pub fn random_network(rng: &mut ChaCha8Rng, graph: Graph, eps: f64) -> NetworkState {
    let nodes = random_nodes(rng, &graph);
    NetworkState::from_nodes(Arc::new(graph), eps, nodes).expect("valid random network")
}

fn oracle_z(node: &NodeState, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut l = 0;
    for p in 0..n {
        for q in p..n {
            m[(p, q)] = node.z[l];
            m[(q, p)] = node.z[l];
            l += 1;
        }
    }
    m
}

/// `X⁽ⁱ⁾` built from incidence vectors, independent of the library's assembly.
pub fn oracle_node_matrix(graph: &Graph, nodes: &[NodeState], i: usize) -> DMatrix<f64> {
    let n = graph.order();
    let mut x = DMatrix::from_element(n, n, -nodes[i].mu);
    for (&k, &w) in &nodes[i].w {
        let (a, b) = graph.edges()[k];
        let mut e = DVector::zeros(n);
        e[a] = 1.0;
        e[b] = -1.0;
        x -= &e * e.transpose() * w;
    }
    let own = oracle_z(&nodes[i], n);
    for &j in graph.neighbors(i) {
        x += &own - oracle_z(&nodes[j], n);
    }
    x
}

/// `Σ_i f_ε(X⁽ⁱ⁾) + v⁽ⁱ⁾ r_i + ½ r_i²`
pub fn oracle_augmented_lagrangian(graph: &Graph, eps: f64, nodes: &[NodeState]) -> f64 {
    (0..graph.order())
        .map(|i| {
            let r = nodes[i].w.values().sum::<f64>() - 1.0;
            oracle_smoothed_max(&oracle_node_matrix(graph, nodes, i), eps)
                + nodes[i].v * r
                + 0.5 * r * r
        })
        .sum()
}

pub fn inbox(net: &NetworkState, messages: &[RoundMessage], i: usize) -> Vec<RoundMessage> {
    net.graph()
        .neighbors(i)
        .iter()
        .map(|&j| messages[j].clone())
        .collect()
}

/// Node fields against central differences of the aggregate augmented
/// Lagrangian: `dmu = -∂/∂μ`, `dw_raw = -∂/∂w`, `dz = -∂/∂z`, `dv = ∂/∂v`.
pub fn distributed_gradient_oracle(states: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for s in 0..states {
        let n = rng.gen_range(2..=4);
        let eps = rng.gen_range(0.1..1.0);
        let graph = random_connected_graph(&mut rng, n);
        let net = random_network(&mut rng, graph, eps);
        let graph = net.graph().clone();
        let messages = lib(net.broadcast())?;

        let la = |nodes: &[NodeState]| oracle_augmented_lagrangian(&graph, eps, nodes);
        let fd = |edit: &dyn Fn(&mut NodeState, f64), i: usize, at: f64| {
            let h = 1e-6 * (1.0 + at.abs());
            let mut plus = net.nodes.clone();
            let mut minus = net.nodes.clone();
            edit(&mut plus[i], h);
            edit(&mut minus[i], -h);
            (la(&plus) - la(&minus)) / (2.0 * h)
        };

        for i in 0..n {
            let f = lib(net.node_fields(i, &inbox(&net, &messages, i)))?;
            let node = &net.nodes[i];
            let mut pairs = vec![
                ("mu", fd(&|m, h| m.mu += h, i, node.mu), -f.dmu),
                ("v", fd(&|m, h| m.v += h, i, node.v), f.dv),
            ];
            for (c, (&k, &w)) in node.w.iter().enumerate() {
                pairs.push((
                    "w",
                    fd(&move |m, h| *m.w.get_mut(&k).unwrap() += h, i, w),
                    -f.dw_raw[c],
                ));
            }
            for l in 0..node.z.len() {
                pairs.push(("z", fd(&move |m, h| m.z[l] += h, i, node.z[l]), -f.dz[l]));
            }
            for (what, numeric, analytic) in pairs {
                let err = rel_err(numeric, analytic);
                worst = worst.max(err);
                compared += 1;
                ensure!(
                    err <= 1e-5,
                    "state {s}, node {i}, {what}: finite difference {numeric} vs field {analytic}"
                );
            }
        }
    }
    Ok(format!(
        "{states} states, {compared} partials, worst relative error {worst:.1e}"
    ))
}

pub fn example3_path() -> Check {
    let net = lib(NetworkState::new(
        Arc::new(presets::path3()),
        connectivity::DEFAULT_EPS,
    ))?;
    let config = SolverConfig {
        dt: connectivity::DEFAULT_DT,
        tol: connectivity::DEFAULT_TOL,
        max_steps: 200_000,
        record_stride: 1000,
        ..SolverConfig::default()
    };
    let start = Instant::now();
    let sim = lib(connectivity::simulate(net, &config, &Executor::Sequential))?;
    let elapsed = start.elapsed();
    let nodes = &sim.final_state.nodes;
    let contributions = [
        nodes[0].w[&0],
        nodes[1].w[&0],
        nodes[1].w[&1],
        nodes[2].w[&1],
    ];
    let targets = [1.0, 0.5, 0.5, 1.0];
    let lambda2 = lib(sim.final_state.assembled_connectivity())?;
    ensure!(
        sim.converged,
        "residual {} after {} rounds",
        sim.residual,
        sim.rounds
    );
    for (got, want) in contributions.iter().zip(targets) {
        ensure!(
            (got - want).abs() <= 0.05,
            "contributions {contributions:?}"
        );
    }
    ensure!((lambda2 - 1.5).abs() <= 0.05, "lambda2 {lambda2}");
    ensure!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    Ok(format!(
        "contributions {:.4?}, lambda2 {lambda2:.5} after {} rounds in {elapsed:.2?}",
        contributions, sim.rounds
    ))
}

pub fn example4_ten_node(exec: &Executor) -> Check {
    let graph = Arc::new(presets::ten_node());
    let uniform = lib(NetworkState::new(Arc::clone(&graph), presets::TEN_NODE_EPS))?;
    let uniform_lambda2 = lib(uniform.assembled_connectivity())?;
    let config = SolverConfig {
        dt: presets::TEN_NODE_DT,
        tol: presets::TEN_NODE_TOL,
        max_steps: presets::TEN_NODE_ROUNDS,
        record_stride: 100,
        ..SolverConfig::default()
    };
    let start = Instant::now();
    let sim = lib(connectivity::simulate(uniform, &config, exec))?;
    let elapsed = start.elapsed();
    ensure!(
        sim.converged && sim.residual < presets::TEN_NODE_TOL,
        "residual {:e} after {} rounds",
        sim.residual,
        sim.rounds
    );
    let transient = sim.rounds / 20;
    let trace: Vec<_> = sim
        .history
        .iter()
        .filter(|h| h.round >= transient)
        .collect();
    for pair in trace.windows(2) {
        ensure!(
            pair[1].objective <= pair[0].objective,
            "objective rose from {} to {} between rounds {} and {}",
            pair[0].objective,
            pair[1].objective,
            pair[0].round,
            pair[1].round
        );
    }
    let lambda2 = lib(sim.final_state.assembled_connectivity())?;
    ensure!(
        lambda2 >= uniform_lambda2 - 1e-6,
        "lambda2 {lambda2} below uniform {uniform_lambda2}"
    );
    Ok(format!(
        "residual {:.2e} after {} rounds, lambda2 {lambda2:.4} (uniform {uniform_lambda2:.4}), {} monotone records, {elapsed:.1?}",
        sim.residual,
        sim.rounds,
        trace.len()
    ))
}

/// A random permutation of `0..n`.
pub fn permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

/// Laplacian spectrum oracle for weighted graphs.
pub fn oracle_lambda2(graph: &Graph, weights: &[f64]) -> f64 {
    let n = graph.order();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for (k, &(a, b)) in graph.edges().iter().enumerate() {
        l[(a, a)] += weights[k];
        l[(b, b)] += weights[k];
        l[(a, b)] -= weights[k];
        l[(b, a)] -= weights[k];
    }
    let mut lam: Vec<f64> = l.symmetric_eigenvalues().iter().copied().collect();
    lam.sort_by(f64::total_cmp);
    lam[1]
}

pub fn lambda2_of(l: &SymmetricMatrix) -> Result<f64, String> {
    lib(algebraic_connectivity(l))
}
