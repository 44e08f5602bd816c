use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;
use pdflow::connectivity::{self, simulate, Executor, NetworkState};
use pdflow::flow::{FlowState, Integrator, ProblemSpec, SolverConfig};
use pdflow::graph::{parse_graph, Graph};
use pdflow::presets;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};
use crate::output::{
    history_csv, trajectory_csv, weights_csv, write_file, write_summary, RunSummary,
};
use crate::problem::load_problem;

pub const EXAMPLES: [&str; 4] = ["example1", "example2", "example3", "example4"];

/// Command-line overrides; `None` means "use the command's default".
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub tol: Option<f64>,
    pub epsilon: Option<f64>,
    pub integrator: Option<Integrator>,
    pub record_stride: Option<usize>,
    /// Random initial point; deterministic zeros/uniform weights without it.
    pub seed: Option<u64>,
    pub output: PathBuf,
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            dt: None,
            steps: None,
            tol: None,
            epsilon: None,
            integrator: None,
            record_stride: None,
            seed: None,
            output: PathBuf::from("pdflow-out"),
            threads: 1,
        }
    }
}

struct NetworkDefaults {
    eps: f64,
    dt: f64,
    tol: f64,
    steps: usize,
    record_stride: usize,
}

const STANDARD_NETWORK: NetworkDefaults = NetworkDefaults {
    eps: connectivity::DEFAULT_EPS,
    dt: connectivity::DEFAULT_DT,
    tol: connectivity::DEFAULT_TOL,
    steps: 200_000,
    record_stride: 100,
};

const TEN_NODE_NETWORK: NetworkDefaults = NetworkDefaults {
    eps: presets::TEN_NODE_EPS,
    dt: presets::TEN_NODE_DT,
    tol: presets::TEN_NODE_TOL,
    steps: presets::TEN_NODE_ROUNDS,
    record_stride: 1000,
};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn cmd_solve(problem_path: &Path, opts: &RunOptions) -> Result<RunSummary> {
    let problem = load_problem(problem_path)?;
    run_flow("solve", &problem, opts)
}

pub fn cmd_connectivity(graph_path: &Path, opts: &RunOptions) -> Result<RunSummary> {
    let graph = parse_graph(&read(graph_path)?).map_err(|e| CliError::invalid(graph_path, e))?;
    run_network("connectivity", graph, &STANDARD_NETWORK, opts)
}

pub fn cmd_example(name: &str, opts: &RunOptions) -> Result<RunSummary> {
    match name {
        "example1" => run_flow(name, &presets::example1(), opts),
        "example2" => run_flow(name, &presets::example2(), opts),
        "example3" => run_network(name, presets::path3(), &STANDARD_NETWORK, opts),
        "example4" => run_network(name, presets::ten_node(), &TEN_NODE_NETWORK, opts),
        other => Err(CliError::UnknownExample(other.to_string())),
    }
}

fn random_flow_init(problem: &ProblemSpec, seed: u64) -> Result<FlowState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DVector::from_fn(problem.n(), |_, _| rng.gen_range(-3.0..3.0));
    let v = DVector::from_fn(problem.m(), |_, _| rng.gen_range(-1.0..1.0));
    let x = problem.set().project_point(&x).map_err(CliError::Option)?;
    Ok(FlowState::new(x, v))
}

fn random_network_init(graph: Arc<Graph>, eps: f64, seed: u64) -> pdflow::Result<NetworkState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = NetworkState::new(graph, eps)?;
    for node in &mut state.nodes {
        node.mu = rng.gen_range(-0.5..0.5);
        node.w
            .values_mut()
            .for_each(|w| *w = rng.gen_range(0.0..1.0));
        node.z
            .iter_mut()
            .for_each(|z| *z = rng.gen_range(-0.1..0.1));
        node.v = rng.gen_range(-0.5..0.5);
    }
    Ok(state)
}

fn run_flow(command: &str, problem: &ProblemSpec, opts: &RunOptions) -> Result<RunSummary> {
    let config = SolverConfig {
        dt: opts.dt.unwrap_or(1e-3),
        max_steps: opts.steps.unwrap_or(1_000_000),
        tol: opts.tol.unwrap_or(1e-6),
        integrator: opts.integrator.unwrap_or(Integrator::Euler),
        record_stride: opts.record_stride.unwrap_or(100),
    };
    config.validate().map_err(CliError::Option)?;
    let init = match opts.seed {
        Some(seed) => random_flow_init(problem, seed)?,
        None => problem.default_init(),
    };

    let start = Instant::now();
    let result = problem
        .solve(&config, &init)
        .map_err(|e| CliError::from_run(e, config.dt))?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let trajectory = write_file(
        &opts.output,
        "trajectory.csv",
        &trajectory_csv(&result.trajectory),
    )?;
    let mut summary = RunSummary {
        command: command.to_string(),
        converged: result.converged,
        steps: result.steps_taken,
        residual: result.residual,
        objective: problem.objective().evaluate(&result.final_state.x),
        lambda2: None,
        wall_time_s,
        outputs: vec![trajectory],
    };
    write_summary(&opts.output, &mut summary)?;
    Ok(summary)
}

fn run_network(
    command: &str,
    graph: Graph,
    defaults: &NetworkDefaults,
    opts: &RunOptions,
) -> Result<RunSummary> {
    let eps = opts.epsilon.unwrap_or(defaults.eps);
    let config = SolverConfig {
        dt: opts.dt.unwrap_or(defaults.dt),
        max_steps: opts.steps.unwrap_or(defaults.steps),
        tol: opts.tol.unwrap_or(defaults.tol),
        integrator: Integrator::Euler,
        record_stride: opts.record_stride.unwrap_or(defaults.record_stride),
    };
    config.validate().map_err(CliError::Option)?;
    let graph = Arc::new(graph);
    let init = match opts.seed {
        Some(seed) => random_network_init(graph, eps, seed),
        None => NetworkState::new(graph, eps),
    }
    .map_err(CliError::Option)?;
    let exec = Executor::with_threads(opts.threads).map_err(CliError::Option)?;

    let start = Instant::now();
    let sim = simulate(init, &config, &exec).map_err(|e| CliError::from_run(e, config.dt))?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let lambda2 = sim
        .final_state
        .assembled_connectivity()
        .map_err(CliError::Option)?;

    let history = write_file(&opts.output, "history.csv", &history_csv(&sim.history))?;
    let weights = write_file(&opts.output, "weights.csv", &weights_csv(&sim.final_state))?;
    let mut summary = RunSummary {
        command: command.to_string(),
        converged: sim.converged,
        steps: sim.rounds,
        residual: sim.residual,
        objective: sim.objective,
        lambda2: Some(lambda2),
        wall_time_s,
        outputs: vec![history, weights],
    };
    write_summary(&opts.output, &mut summary)?;
    Ok(summary)
}
