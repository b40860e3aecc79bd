use core::fmt;

use crate::group::GroupAxiom;

pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong while building or certifying an approximation.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    NotAGroup(GroupAxiom),
    InvalidArgument(&'static str),
    DimensionMismatch { expected: usize, found: usize },
    /// The operation needs a different kind of group (finite vs torus).
    WrongGroup(&'static str),
    RadiusTooSmall { radius: f64, min_radius: f64 },
    BandTooSmall { measured: f64, target: f64 },
    NegativityViolation { min_value: f64 },
    GridTooCoarse { points: usize, dimension: usize, min_singular: f64 },
    QuadratureTooCoarse { change: f64 },
    NotPositiveDefinite,
    SingularV { min_singular: f64 },
    Numerical(&'static str),
    Unachievable { points: usize, max_dim: usize, distortion: f64, tol_grid: f64 },
    ClosureTooLarge { cap: usize },
    ClosureUndetermined,
    CoverNotFound { cap: usize, achieved: f64 },
}

impl Error {
    /// Stable machine-readable code, used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotAGroup(_) => "not_a_group",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::WrongGroup(_) => "wrong_group",
            Error::RadiusTooSmall { .. } => "radius_too_small",
            Error::BandTooSmall { .. } => "band_too_small",
            Error::NegativityViolation { .. } => "negativity_violation",
            Error::GridTooCoarse { .. } => "grid_too_coarse",
            Error::QuadratureTooCoarse { .. } => "quadrature_too_coarse",
            Error::NotPositiveDefinite => "not_positive_definite",
            Error::SingularV { .. } => "singular_v",
            Error::Numerical(_) => "numerical",
            Error::Unachievable { .. } => "unachievable",
            Error::ClosureTooLarge { .. } => "closure_too_large",
            Error::ClosureUndetermined => "closure_undetermined",
            Error::CoverNotFound { .. } => "cover_not_found",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotAGroup(axiom) => write!(f, "table is not a group: {axiom}"),
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::WrongGroup(what) => write!(f, "wrong group kind: {what}"),
            Error::RadiusTooSmall { radius, min_radius } => write!(
                f,
                "bump radius {radius} is below the resolvable minimum {min_radius}"
            ),
            Error::BandTooSmall { measured, target } => write!(
                f,
                "band error {measured:e} exceeds target {target:e}; increase the band degree"
            ),
            Error::NegativityViolation { min_value } => {
                write!(f, "kernel takes negative value {min_value:e}")
            }
            Error::GridTooCoarse { points, dimension, min_singular } => write!(
                f,
                "grid with {points} points cannot resolve a {dimension}-dimensional band \
                 (smallest weighted singular value {min_singular:e})"
            ),
            Error::QuadratureTooCoarse { change } => write!(
                f,
                "averaging quadrature not converged: doubling changed the Gram matrix by {change:e}"
            ),
            Error::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            Error::SingularV { min_singular } => {
                write!(f, "basis change is singular (smallest singular value {min_singular:e})")
            }
            Error::Numerical(what) => write!(f, "numerical failure: {what}"),
            Error::Unachievable { points, max_dim, distortion, tol_grid } => write!(
                f,
                "no grid within {max_dim} points meets the target (last tried {points} points: \
                 distortion {distortion:e}, sup loss {tol_grid:e})"
            ),
            Error::ClosureTooLarge { cap } => {
                write!(f, "generated group exceeds the order cap {cap}")
            }
            Error::ClosureUndetermined => write!(
                f,
                "closure of the acting group is undetermined; give rational turns or declare the rotation irrational"
            ),
            Error::CoverNotFound { cap, achieved } => write!(
                f,
                "no orbit cover within {cap} basepoints (achieved density {achieved})"
            ),
        }
    }
}

impl core::error::Error for Error {}
