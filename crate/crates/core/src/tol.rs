//! Tolerances shared across the pipeline.
//!
//! Each check in the crate compares against one of these constants; the
//! certificates copy the ones they used into their provenance.

/// Weights of a quadrature rule or sample grid must sum to one within this.
pub const WEIGHT_SUM: f64 = 1e-12;

/// Lower bound a kernel or bump may dip to on the measurement lattice.
pub const KERNEL_NEGATIVITY: f64 = 1e-9;

/// Allowed deviation of a kernel's integral from one.
pub const KERNEL_MASS: f64 = 1e-9;

/// Smallest weighted singular value accepted for an injective evaluation map.
pub const RANK: f64 = 1e-8;

/// Smallest singular value accepted for the basis change before polar.
pub const SINGULAR_V: f64 = 1e-10;

/// Residual allowed in `V = A U`.
pub const POLAR_RESIDUAL: f64 = 1e-10;

/// Change in the averaged Gram matrix tolerated when the averaging
/// quadrature is doubled.
pub const QUADRATURE_CHANGE: f64 = 1e-8;

/// Absolute slack added to every certificate bound. Exact pipelines produce
/// defects at rounding level against bounds of zero.
pub const NUMERIC_FLOOR: f64 = 1e-10;

/// Default lattice oversampling for sup norms.
pub const DEFAULT_OVERSAMPLE: usize = 16;

/// Smallest oversampling accepted by [`crate::band::BandFunction::sup_norm_with`].
pub const MIN_OVERSAMPLE: usize = 4;

/// Seeded random group elements added to the quadrature nodes when the
/// equivariance defect is sampled.
pub const EQUIV_RANDOM_SAMPLES: usize = 64;

/// Default cap on generated permutation groups.
pub const CLOSURE_ORDER_CAP: usize = 720;

/// Most basepoints the orbit cover search may select.
pub const ORBIT_BASEPOINT_CAP: usize = 64;

