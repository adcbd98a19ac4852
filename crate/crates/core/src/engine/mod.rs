//! Regret engines: stochastic regret of joint distributions, minimax values
//! by backward induction, dual search over joints, and the hierarchy of
//! adversary classes.

pub mod dual;
pub mod enumerate;
pub mod hierarchy;
pub mod joint;
pub mod minimax;
pub mod pregret;
pub mod solver;

pub use dual::{
    dual_search, CoordinateAscent, DualOptimizer, DualSearchResult, GridSearch, NodeObjective,
    OptimizerSettings,
};
pub use enumerate::{visit_paths, DEFAULT_SEQUENCE_CAP};
pub use hierarchy::{hierarchy_eval, HierarchyConfig, HierarchyResult};
pub use joint::JointDistTree;
pub use minimax::{
    minimax_value, minimax_value_deterministic, MinimaxResult, ValueNode, DEFAULT_STATE_CAP,
};
pub use pregret::{p_regret_exact, p_regret_mc, EvalMode, RegretReport, ReportMeta};
pub use solver::{
    ExhaustiveSolver, LpSolver, MatrixGameSolution, MatrixGameSolver, MultiplicativeWeights,
};
