//! Projected primal-dual gradient flow of the augmented Lagrangian.
//!
//! For `minimize f(x) s.t. Ax = b, x ∈ K` the flow is
//!
//! ```text
//! ẋ = Π_K(x, -∇f(x) - Aᵀv - ρ Aᵀ(Ax - b))
//! v̇ = Ax - b
//! ```
//!
//! where `Π_K(x, ·)` projects onto the tangent cone of `K` at `x`. The
//! forward-Euler scheme uses the proximal form `x⁺ = P_K(x - Δt·y)`, which
//! keeps every iterate exactly inside `K`. Heun and RK4 evaluate the
//! tangent-cone field at projected stage points and re-project the result.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::sets::SimpleSet;

pub type ValueFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

/// A convex objective with its gradient.
#[derive(Clone)]
pub enum Objective {
    /// `cᵀx`
    Linear { c: DVector<f64> },
    /// `½ xᵀQx + cᵀx`, `Q` symmetric positive semidefinite.
    Quadratic { q: DMatrix<f64>, c: DVector<f64> },
    /// Caller-supplied value and gradient.
    Custom {
        dim: usize,
        value: ValueFn,
        gradient: GradientFn,
    },
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Linear { c } => f.debug_struct("Linear").field("c", c).finish(),
            Objective::Quadratic { q, c } => f
                .debug_struct("Quadratic")
                .field("q", q)
                .field("c", c)
                .finish(),
            Objective::Custom { dim, .. } => f.debug_struct("Custom").field("dim", dim).finish(),
        }
    }
}

impl Objective {
    pub fn linear(c: DVector<f64>) -> Self {
        Objective::Linear { c }
    }

    /// Rejects non-square or asymmetric `Q` (asymmetry beyond `1e-12·(1+|Q|)`).
    pub fn quadratic(q: DMatrix<f64>, c: DVector<f64>) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::InvalidParameter(format!(
                "Q must be square, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        check_dim("quadratic objective", q.nrows(), c.len())?;
        let asym = (&q - q.transpose()).amax();
        if asym > 1e-12 * (1.0 + q.amax()) {
            return Err(Error::InvalidParameter(format!(
                "Q must be symmetric (max asymmetry {asym:e})"
            )));
        }
        Ok(Objective::Quadratic { q, c })
    }

    pub fn custom(
        dim: usize,
        value: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Objective::Custom {
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Objective::Linear { c } | Objective::Quadratic { c, .. } => c.len(),
            Objective::Custom { dim, .. } => *dim,
        }
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> f64 {
        match self {
            Objective::Linear { c } => c.dot(x),
            Objective::Quadratic { q, c } => 0.5 * x.dot(&(q * x)) + c.dot(x),
            Objective::Custom { value, .. } => value(x),
        }
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Objective::Linear { c } => c.clone(),
            Objective::Quadratic { q, c } => q * x + c,
            Objective::Custom { gradient, .. } => gradient(x),
        }
    }
}

/// `minimize f(x) s.t. Ax = b, x ∈ K` together with the damping `ρ` of the
/// augmented Lagrangian.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    objective: Objective,
    a: DMatrix<f64>,
    b: DVector<f64>,
    set: SimpleSet,
    rho: f64,
}

/// Primal-dual point on a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub x: DVector<f64>,
    pub v: DVector<f64>,
    pub t: f64,
}

impl FlowState {
    pub fn new(x: DVector<f64>, v: DVector<f64>) -> Self {
        FlowState { x, v, t: 0.0 }
    }

    /// `½(||x - x*||² + ||v - v*||²)` against a reference saddle point.
    pub fn lyapunov_distance(&self, saddle: &FlowState) -> Result<f64> {
        check_dim("lyapunov_distance", saddle.x.len(), self.x.len())?;
        check_dim("lyapunov_distance", saddle.v.len(), self.v.len())?;
        Ok(0.5 * ((&self.x - &saddle.x).norm_squared() + (&self.v - &saddle.v).norm_squared()))
    }

    fn is_finite(&self) -> bool {
        self.x.iter().chain(self.v.iter()).all(|c| c.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Euler,
    Heun,
    Rk4,
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Integrator::Euler),
            "heun" => Ok(Integrator::Heun),
            "rk4" => Ok(Integrator::Rk4),
            other => Err(Error::InvalidParameter(format!(
                "unknown integrator '{other}' (expected euler, heun or rk4)"
            ))),
        }
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Integrator::Euler => "euler",
            Integrator::Heun => "heun",
            Integrator::Rk4 => "rk4",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub max_steps: usize,
    /// Stop once the KKT residual drops to this value.
    pub tol: f64,
    pub integrator: Integrator,
    /// Record every `record_stride`-th step (plus the first and last).
    pub record_stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1e-3,
            max_steps: 1_000_000,
            tol: 1e-6,
            integrator: Integrator::Euler,
            record_stride: 100,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be positive".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter(
                "record_stride must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub t: f64,
    pub x: DVector<f64>,
    pub v: DVector<f64>,
    pub objective: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub final_state: FlowState,
    pub converged: bool,
    pub residual: f64,
    pub steps_taken: usize,
    pub trajectory: Vec<TrajectoryPoint>,
}

impl ProblemSpec {
    /// Problem with the default damping `ρ = 1`.
    pub fn new(
        objective: Objective,
        a: DMatrix<f64>,
        b: DVector<f64>,
        set: SimpleSet,
    ) -> Result<Self> {
        let n = set.dim();
        set.validate()?;
        check_dim("objective dimension", n, objective.dim())?;
        check_dim("columns of A", n, a.ncols())?;
        check_dim("length of b", a.nrows(), b.len())?;
        if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("constraint data"));
        }
        Ok(ProblemSpec {
            objective,
            a,
            b,
            set,
            rho: 1.0,
        })
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rho must be positive, got {rho}"
            )));
        }
        self.rho = rho;
        Ok(self)
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn set(&self) -> &SimpleSet {
        &self.set
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Number of primal variables.
    pub fn n(&self) -> usize {
        self.set.dim()
    }

    /// Number of equality constraints.
    pub fn m(&self) -> usize {
        self.b.len()
    }

    fn check_primal(&self, x: &DVector<f64>) -> Result<()> {
        check_dim("primal vector", self.n(), x.len())
    }

    fn check_dual(&self, v: &DVector<f64>) -> Result<()> {
        check_dim("dual vector", self.m(), v.len())
    }

    /// Default starting point: `x = P_K(0)`, `v = 0`.
    pub fn default_init(&self) -> FlowState {
        let mut x = DVector::zeros(self.n());
        self.set.project_in_place(x.as_mut_slice());
        FlowState::new(x, DVector::zeros(self.m()))
    }

    /// `f(x) + vᵀ(Ax - b)`
    pub fn lagrangian(&self, x: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        self.check_primal(x)?;
        self.check_dual(v)?;
        let r = self.constraint_residual(x);
        Ok(self.objective.evaluate(x) + v.dot(&r))
    }

    /// `f(x) + vᵀ(Ax - b) + (ρ/2)||Ax - b||²`
    pub fn augmented_lagrangian(&self, x: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        self.check_primal(x)?;
        self.check_dual(v)?;
        let r = self.constraint_residual(x);
        Ok(self.objective.evaluate(x) + v.dot(&r) + 0.5 * self.rho * r.norm_squared())
    }

    fn constraint_residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x - &self.b
    }

    /// `∂L_A/∂x = ∇f(x) + Aᵀv + ρAᵀ(Ax - b)`
    fn augmented_gradient(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let r = self.constraint_residual(x);
        let mut y = self.objective.gradient(x);
        y.gemv_tr(1.0, &self.a, &(v + r * self.rho), 1.0);
        y
    }

    /// `Π_K(x, -∂L_A/∂x)`; requires `x ∈ K`.
    pub fn primal_field(&self, x: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_primal(x)?;
        self.check_dual(v)?;
        let y = self.augmented_gradient(x, v);
        self.set.project_tangent_cone(x, &(-y))
    }

    /// `∂L_A/∂v = Ax - b`
    pub fn dual_field(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_primal(x)?;
        Ok(self.constraint_residual(x))
    }

    /// `||Π_K(x, -∇f(x) - Aᵀv)|| + ||Ax - b||`; zero exactly at saddle points.
    pub fn kkt_residual(&self, state: &FlowState) -> Result<f64> {
        self.check_primal(&state.x)?;
        self.check_dual(&state.v)?;
        let mut g = self.objective.gradient(&state.x);
        g.gemv_tr(1.0, &self.a, &state.v, 1.0);
        let stationarity = self.set.project_tangent_cone(&state.x, &(-g))?;
        Ok(stationarity.norm() + self.constraint_residual(&state.x).norm())
    }

    fn check_step(&self, state: &FlowState, dt: f64) -> Result<()> {
        self.check_primal(&state.x)?;
        self.check_dual(&state.v)?;
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be nonnegative, got {dt}"
            )));
        }
        self.set.ensure_member(&state.x)
    }

    /// `x⁺ = P_K(x - Δt·∂L_A/∂x)`, `v⁺ = v + Δt(Ax - b)`.
    pub fn euler_step(&self, state: &FlowState, dt: f64) -> Result<FlowState> {
        self.check_step(state, dt)?;
        let y = self.augmented_gradient(&state.x, &state.v);
        let mut x = &state.x - y * dt;
        self.set.project_in_place(x.as_mut_slice());
        let v = &state.v + self.constraint_residual(&state.x) * dt;
        Ok(FlowState {
            x,
            v,
            t: state.t + dt,
        })
    }

    /// Field value at a point already inside `K`.
    fn field(&self, x: &DVector<f64>, v: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let mut dx = -self.augmented_gradient(x, v);
        self.set.tangent_in_place(x.as_slice(), dx.as_mut_slice());
        (dx, self.constraint_residual(x))
    }

    /// `(P_K(x + h·dx), v + h·dv)`
    fn stage(
        &self,
        state: &FlowState,
        h: f64,
        k: &(DVector<f64>, DVector<f64>),
    ) -> (DVector<f64>, DVector<f64>) {
        let mut x = &state.x + &k.0 * h;
        self.set.project_in_place(x.as_mut_slice());
        (x, &state.v + &k.1 * h)
    }

    fn combine(
        &self,
        state: &FlowState,
        dt: f64,
        weights: &[f64],
        ks: &[(DVector<f64>, DVector<f64>)],
    ) -> FlowState {
        let mut dx = DVector::zeros(self.n());
        let mut dv = DVector::zeros(self.m());
        for (w, k) in weights.iter().zip(ks) {
            dx.axpy(*w, &k.0, 1.0);
            dv.axpy(*w, &k.1, 1.0);
        }
        let stage = self.stage(state, dt, &(dx, dv));
        FlowState {
            x: stage.0,
            v: stage.1,
            t: state.t + dt,
        }
    }

    /// Two-stage Heun step on the tangent-cone field.
    pub fn heun_step(&self, state: &FlowState, dt: f64) -> Result<FlowState> {
        self.check_step(state, dt)?;
        let k1 = self.field(&state.x, &state.v);
        let (x1, v1) = self.stage(state, dt, &k1);
        let k2 = self.field(&x1, &v1);
        Ok(self.combine(state, dt, &[0.5, 0.5], &[k1, k2]))
    }

    /// Classical four-stage Runge-Kutta step on the tangent-cone field.
    pub fn rk4_step(&self, state: &FlowState, dt: f64) -> Result<FlowState> {
        self.check_step(state, dt)?;
        let k1 = self.field(&state.x, &state.v);
        let (x2, v2) = self.stage(state, 0.5 * dt, &k1);
        let k2 = self.field(&x2, &v2);
        let (x3, v3) = self.stage(state, 0.5 * dt, &k2);
        let k3 = self.field(&x3, &v3);
        let (x4, v4) = self.stage(state, dt, &k3);
        let k4 = self.field(&x4, &v4);
        let sixth = 1.0 / 6.0;
        Ok(self.combine(
            state,
            dt,
            &[sixth, 2.0 * sixth, 2.0 * sixth, sixth],
            &[k1, k2, k3, k4],
        ))
    }

    pub fn step(&self, integrator: Integrator, state: &FlowState, dt: f64) -> Result<FlowState> {
        match integrator {
            Integrator::Euler => self.euler_step(state, dt),
            Integrator::Heun => self.heun_step(state, dt),
            Integrator::Rk4 => self.rk4_step(state, dt),
        }
    }

    /// Integrates from `init` (projected onto `K` first) until the KKT
    /// residual reaches `config.tol` or `config.max_steps` steps are taken.
    pub fn solve(&self, config: &SolverConfig, init: &FlowState) -> Result<SolveResult> {
        config.validate()?;
        self.check_primal(&init.x)?;
        self.check_dual(&init.v)?;
        let mut state = init.clone();
        self.set.project_in_place(state.x.as_mut_slice());
        if !state.is_finite() {
            return Err(Error::NonFinite("initial state"));
        }

        let mut residual = self.kkt_residual(&state)?;
        let mut trajectory = vec![self.record(0, &state, residual)];
        let mut steps = 0;
        while residual > config.tol && steps < config.max_steps {
            state = self.step(config.integrator, &state, config.dt)?;
            steps += 1;
            if !state.is_finite() {
                return Err(Error::Divergence { step: steps });
            }
            residual = self.kkt_residual(&state)?;
            if !residual.is_finite() {
                return Err(Error::Divergence { step: steps });
            }
            if steps % config.record_stride == 0 {
                trajectory.push(self.record(steps, &state, residual));
            }
        }
        if trajectory.last().map(|p| p.step) != Some(steps) {
            trajectory.push(self.record(steps, &state, residual));
        }
        Ok(SolveResult {
            final_state: state,
            converged: residual <= config.tol,
            residual,
            steps_taken: steps,
            trajectory,
        })
    }

    fn record(&self, step: usize, state: &FlowState, residual: f64) -> TrajectoryPoint {
        TrajectoryPoint {
            step,
            t: state.t,
            x: state.x.clone(),
            v: state.v.clone(),
            objective: self.objective.evaluate(&state.x),
            residual,
        }
    }
}
