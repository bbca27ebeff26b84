pub mod cuts;
pub mod disjunction;
pub mod engine;
pub mod instances;

pub use cuts::{cg_candidates, cg_cut, cg_round_closure, select_cut};
pub use disjunction::{disjunctive_cut, Disjunction};
pub use engine::{
    run_branch_and_cut, BncConfig, BncNode, NodeSelection, PruneRecord, RunStats, Strategy,
};
pub use instances::{hidden_triangle_instance, jeroslow_instance, solve_lp, MilpInstance};
