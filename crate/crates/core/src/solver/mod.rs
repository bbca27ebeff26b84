pub mod continuous;
pub mod lenstra;
pub mod optimize;

pub use continuous::{continuous_iteration_bound, ellipsoid_continuous};
pub use lenstra::{
    feasibility, feasibility_with_stats, node_query_bound, FeasibilityResult, SolveStats,
    UpdateRecord,
};
pub use optimize::{
    optimize, optimize_single_pass, pure_integer_feasibility, pure_integer_optimize,
    LevelSetOracle, OptimizeOutcome, OptimizeResult,
};
