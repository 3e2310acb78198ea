//! Exact solvers for high-multiplicity scheduling.
//!
//! Scheduling problems (`Q||Cmax`, `R||Cmax`, `R||ΣwjCj`) are compiled into
//! n-fold integer programs and solved by augmentation along kernel moves found
//! with a brick-wise dynamic program. A small-dimension convex integer
//! minimizer, brute-force oracles, and the bin packing reduction for
//! `P||ΣwjCj` live alongside.
//!
//! All counts, objective values, and ratios are arbitrary precision; nothing in
//! a decision path touches floating point.

pub mod error;
pub mod fixed_dim;
pub mod graver;
pub mod ilp;
pub mod nfold;
pub mod oracles;
pub mod scheduling;

pub use error::{Error, Result};
pub use ilp::{IntMatrix, NFoldInstance, SeparableQuadObjective};

/// Arbitrary-precision integer used for counts, bounds, and right-hand sides.
pub type Int = num_bigint::BigInt;
/// Exact rational used for objective values and ratios.
pub type Rational = num_rational::BigRational;
