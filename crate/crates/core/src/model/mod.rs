pub mod body;
pub mod halfspace;
pub mod objective;
pub mod oracle;
pub mod params;
pub mod polyhedron;
pub mod transcript;

pub use body::ConvexBody;
pub use halfspace::Halfspace;
pub use objective::Objective;
pub use oracle::{
    query_first_order, query_separation, FirstOrderAnswer, FirstOrderOracle, OracleAnswer,
    SeparationOracle,
};
pub use params::{NormTag, ProblemParameters, TAU_FEAS, TAU_INT, TAU_LIN};
pub use polyhedron::Polyhedron;
pub use transcript::{Answer, QueryKind, Transcript, TranscriptEntry};

/// A point of `R^n x R^d`; the first `n` coordinates are integer-constrained.
pub type Point = nalgebra::DVector<f64>;
