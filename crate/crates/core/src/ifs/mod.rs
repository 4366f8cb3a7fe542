pub mod address;
pub mod affine;
pub mod linalg;
pub mod system;

pub use address::{
    default_selector, eval_prefix, period_length_bound_check, periodic_fixed_point, pigeonhole_witness, rational_to_address, Address,
    AddressPoint, BoxSelector, BranchSelector, DigitSelector, PeriodBound, PeriodicAddress,
};
pub use affine::{AffineContraction, IntAffine, RVec};
pub use linalg::IntMat;
pub use system::{DerivedConstants, RationalIFS};
