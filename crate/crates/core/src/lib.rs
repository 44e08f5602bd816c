//! Projected primal-dual gradient flows of the augmented Lagrangian.
//!
//! The crate solves problems of the form
//!
//! ```text
//! minimize f(x)  subject to  A x = b,  x ∈ K
//! ```
//!
//! where `K` is a [`SimpleSet`] with a cheap closed-form projection. Only the
//! primal variable is projected, and only onto the tangent cone of `K`; the
//! equality constraints are handled by the dual variable and a quadratic
//! damping penalty.
//!
//! The [`connectivity`] module applies the same dynamics to distributed
//! maximization of a graph's algebraic connectivity, using a smoothed
//! largest-eigenvalue surrogate from [`spectral`].

pub mod connectivity;
pub mod error;
pub mod flow;
pub mod graph;
pub mod presets;
pub mod sets;
pub mod spectral;

pub use error::{Error, Result};
pub use flow::{
    FlowState, Integrator, Objective, ProblemSpec, SolveResult, SolverConfig, TrajectoryPoint,
};
pub use graph::{EdgeWeights, Graph};
pub use sets::SimpleSet;
pub use spectral::{EigenDecomposition, SymmetricMatrix};
