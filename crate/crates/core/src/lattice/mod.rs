pub mod enumerate;
pub mod slice;

pub use enumerate::{cvp, flatness_direction, lattice_norm, svp, IntVec, K_MAX};
pub use slice::{kernel_slice_basis, SliceBasis};
