//! Built-in problems and graphs used by the examples, the CLI and the tests.

use nalgebra::{dvector, DMatrix};

use crate::flow::{FlowState, Objective, ProblemSpec};
use crate::graph::{parse_graph, Graph};
use crate::sets::SimpleSet;

/// `minimize x + 3y  s.t.  x = y,  x ≥ 2`. Optimum `(2, 2)`, value 8, dual 3.
pub fn example1() -> ProblemSpec {
    let set = SimpleSet::product(vec![
        SimpleSet::new_box(vec![2.0], vec![f64::INFINITY]).expect("valid half-line"),
        SimpleSet::free(1),
    ])
    .expect("valid product");
    ProblemSpec::new(
        Objective::linear(dvector![1.0, 3.0]),
        DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
        dvector![0.0],
        set,
    )
    .expect("consistent dimensions")
}

/// Saddle point of [`example1`].
pub fn example1_saddle() -> FlowState {
    FlowState::new(dvector![2.0, 2.0], dvector![3.0])
}

/// Five-variable standard-form LP `minimize cᵀx s.t. Ax = b, x ≥ 0` with
/// optimal value -76.
pub fn example2() -> ProblemSpec {
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(3, 5, &[
        -3.0, 1.0,  1.0, -1.0,  2.0,
         2.0, 0.0, -1.0,  1.0, -1.0,
         0.0, 1.0,  2.0, -1.0,  1.0,
    ]);
    ProblemSpec::new(
        Objective::linear(dvector![2.0, 1.0, -1.0, -3.0, 1.0]),
        a,
        dvector![5.0, 6.0, 3.0],
        SimpleSet::nonnegative(5),
    )
    .expect("consistent dimensions")
}

pub const EXAMPLE2_OPTIMUM: f64 = -76.0;

/// Saddle point of [`example2`]: the unique optimal vertex and its dual.
pub fn example2_saddle() -> FlowState {
    FlowState::new(dvector![0.0, 0.0, 9.0, 26.0, 11.0], dvector![2.0, 9.0, 4.0])
}

/// Path graph on three nodes; edge 1 = (1,2), edge 2 = (2,3).
pub const PATH3: &str = "# path on three nodes\n3\n1 2\n2 3\n";

/// Single edge.
pub const K2: &str = "2\n1 2\n";

/// Ten-node test topology used for the larger connectivity run.
pub const TEN_NODE: &str = "\
# ten-node ladder-like test topology
10
1 2
1 3
2 3
2 4
3 5
4 5
4 6
5 7
6 7
6 8
7 9
8 9
8 10
9 10
";

pub fn path3() -> Graph {
    parse_graph(PATH3).expect("valid preset")
}

pub fn k2() -> Graph {
    parse_graph(K2).expect("valid preset")
}

pub fn ten_node() -> Graph {
    parse_graph(TEN_NODE).expect("valid preset")
}

/// Smoothing parameter for the ten-node run. Forward Euler on the node
/// objectives needs `dt` well below `ε`; the default `ε = 1e-3` would force
/// steps too small to converge in a reasonable number of rounds.
pub const TEN_NODE_EPS: f64 = 3e-2;

pub const TEN_NODE_DT: f64 = 1.5e-3;

pub const TEN_NODE_TOL: f64 = 1e-3;

pub const TEN_NODE_ROUNDS: usize = 600_000;
