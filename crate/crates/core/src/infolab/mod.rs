pub mod adversary;
pub mod centerpoint;
pub mod strategy;
pub mod volume;

pub use adversary::{
    adversary_answer, adversary_certificate, AdversaryHandle, AdversaryState, AnswerKind,
    Certificate, FiberState, MatchLogRow,
};
pub use centerpoint::{
    approx_centerpoint, centerpoint_bound, region_centerpoint, CenterpointEstimate,
};
pub use strategy::{
    adversary_region, centerpoint_query_bound, centerpoint_strategy_run, contraction_base,
    match_log_csv, run_adversary_match, CenterpointRun, ContractionStep, CutSource, QueryStrategy,
    StrategyKind,
};
pub use volume::{convex_polygon, mixed_integer_volume, Fiber, FiberShape, MixedRegion};
