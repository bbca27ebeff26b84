pub mod ellipsoid;
pub mod pd;
pub mod sublevel;

pub use ellipsoid::{
    log_unit_ball_volume, min_norm_over_fiber, project_to_integer_coordinates, shallow_cut_update,
    volume_decrease_bound, CutOutcome, Ellipsoid,
};
pub use pd::PdMatrix;
pub use sublevel::sublevel_ball;
