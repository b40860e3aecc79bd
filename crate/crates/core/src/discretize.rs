//! Sampling a band on a finite grid `E ⊂ G`.
//!
//! A grid carries the cell measures `μ(P_e)` of a partition of `G` with one
//! grid point per cell. The evaluation map sends a band function to its
//! samples; the induced representation transports left translation on the
//! band to `ℂ^E` and extends it by the identity on the complement.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::band::{Band, BandFunction};
use crate::group::{reduce_angle, CompactGroupModel, GroupElement};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::rng::Uniform;
use crate::{tol, Error, Result};

/// How torus grid points are placed.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GridProfile {
    Uniform,
    /// Each lattice point is moved by `amplitude · spacing · u`, `u` uniform in
    /// `[-1, 1)`; the cells are the arcs (boxes in 2D) between midpoints.
    Perturbed { seed: u64, amplitude: f64 },
}

impl GridProfile {
    pub fn describe(&self) -> String {
        match *self {
            GridProfile::Uniform => "uniform".into(),
            GridProfile::Perturbed { seed, amplitude } => alloc::format!("perturbed(seed={seed}, amp={amplitude})"),
        }
    }
}

/// Sample points `E` with cell measures.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    pub points: Vec<GroupElement>,
    pub weights: Vec<f64>,
    /// Points per torus dimension (the group order for finite groups).
    pub size: usize,
    pub profile: GridProfile,
}

impl SampleGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Values of `f` at the grid points.
    pub fn sample(&self, f: &BandFunction) -> Vec<Complex64> {
        self.points.iter().map(|g| f.evaluate(g)).collect()
    }
}

/// Build the grid of `size` points per torus dimension, or the whole group
/// when the group is finite (`size` and `profile` are then ignored).
pub fn build_grid(group: &CompactGroupModel, size: usize, profile: GridProfile) -> Result<SampleGrid> {
    if size == 0 {
        return Err(Error::InvalidArgument("grid size must be at least 1"));
    }
    match group {
        CompactGroupModel::Finite(g) => {
            let n = g.order();
            Ok(SampleGrid {
                points: (0..n).map(GroupElement::Finite).collect(),
                weights: alloc::vec![1.0 / n as f64; n],
                size: n,
                profile: GridProfile::Uniform,
            })
        }
        CompactGroupModel::Torus { dim } => {
            let mut rng = match profile {
                GridProfile::Uniform => None,
                GridProfile::Perturbed { seed, amplitude } => {
                    if !(0.0..=0.25).contains(&amplitude) {
                        return Err(Error::InvalidArgument("perturbation amplitude must lie in [0, 0.25]"));
                    }
                    Some((Uniform::new(seed), amplitude))
                }
            };
            let lines: Vec<(Vec<f64>, Vec<f64>)> = (0..*dim).map(|_| circle_line(size, rng.as_mut())).collect();
            let (points, weights) = if *dim == 1 {
                let (a, w) = &lines[0];
                (a.iter().map(|&t| GroupElement::Torus([t, 0.0])).collect(), w.clone())
            } else {
                let ((a0, w0), (a1, w1)) = (&lines[0], &lines[1]);
                let points = a0.iter().flat_map(|&x| a1.iter().map(move |&y| GroupElement::Torus([x, y]))).collect();
                let weights = w0.iter().flat_map(|&x| w1.iter().map(move |&y| x * y)).collect();
                (points, weights)
            };
            Ok(SampleGrid { points, weights, size, profile })
        }
    }
}

/// Angles and arc measures of one circle coordinate.
fn circle_line(size: usize, jitter: Option<&mut (Uniform, f64)>) -> (Vec<f64>, Vec<f64>) {
    let h = TAU / size as f64;
    let raw: Vec<f64> = match jitter {
        None => (0..size).map(|e| h * e as f64).collect(),
        Some((rng, amp)) => (0..size).map(|e| h * (e as f64 + *amp * rng.symmetric())).collect(),
    };
    let weights = (0..size)
        .map(|e| {
            let next = if e + 1 == size { raw[0] + TAU } else { raw[e + 1] };
            let prev = if e == 0 { raw[size - 1] - TAU } else { raw[e - 1] };
            (next - prev) / (2.0 * TAU)
        })
        .collect();
    (raw.into_iter().map(reduce_angle).collect(), weights)
}

/// `⟨v, w⟩_E = Σ_e v(e) conj(w(e)) μ(P_e)`.
pub fn grid_inner(grid: &SampleGrid, v: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    if v.len() != grid.len() || w.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: if v.len() != grid.len() { v.len() } else { w.len() } });
    }
    Ok(v.iter().zip(w).zip(&grid.weights).map(|((a, b), &m)| a * b.conj() * m).sum())
}

/// The evaluation map `ψ: W → ℂ^E` in an L²-orthonormal basis of `W`.
#[derive(Clone, Debug)]
pub struct EvaluationMap {
    pub band: Band,
    pub grid: SampleGrid,
    /// `|E| × dim W`; column `j` holds basis function `j` at every grid point.
    pub matrix: CMatrix,
    /// `H = Ψ† M Ψ`, the grid Gram matrix of the basis.
    pub gram: CMatrix,
    /// `L = H⁻¹ Ψ† M`, the left inverse of `Ψ` vanishing on the complement.
    pub left_inverse: CMatrix,
    /// Smallest singular value of `M^{1/2} Ψ`.
    pub min_singular: f64,
}

impl EvaluationMap {
    pub fn dimension(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn points(&self) -> usize {
        self.matrix.nrows()
    }

    /// The `⟨·,·⟩_E`-orthogonal projector `Ψ L` onto `ψ(W)`.
    pub fn projector(&self) -> CMatrix {
        &self.matrix * &self.left_inverse
    }

    /// Coordinates of `f ∈ W` in the orthonormal basis.
    pub fn coordinates(&self, f: &BandFunction) -> Result<CVector> {
        if !self.band.contains(&f.band()) {
            return Err(Error::InvalidArgument("function does not lie in the sampled band"));
        }
        Ok(match self.band {
            Band::Torus { .. } => {
                CVector::from_iterator(self.dimension(), self.band.frequencies().into_iter().map(|j| f.coefficient(j)))
            }
            Band::Full { order } => {
                let s = 1.0 / libm::sqrt(order as f64);
                CVector::from_iterator(order, f.data().iter().map(|v| v * s))
            }
        })
    }
}

/// Build `ψ` for the band `band` on `grid`; fails with
/// [`Error::GridTooCoarse`] unless it is injective.
pub fn evaluation_map(band: Band, grid: &SampleGrid) -> Result<EvaluationMap> {
    let dim = band.dimension();
    let points = grid.len();
    if points < dim {
        return Err(Error::GridTooCoarse { points, dimension: dim, min_singular: 0.0 });
    }
    let matrix = match band {
        Band::Torus { .. } => {
            let freqs = band.frequencies();
            CMatrix::from_fn(points, dim, |e, j| {
                let t = grid.points[e].as_angles().expect("torus grid");
                Complex64::from_polar(1.0, freqs[j][0] as f64 * t[0] + freqs[j][1] as f64 * t[1])
            })
        }
        Band::Full { order } => {
            let s = libm::sqrt(order as f64);
            CMatrix::from_fn(points, dim, |e, g| {
                if grid.points[e].as_index() == Some(g) {
                    c(s)
                } else {
                    c(0.0)
                }
            })
        }
    };
    let sqrt_w: Vec<f64> = grid.weights.iter().map(|&w| libm::sqrt(w)).collect();
    let mut weighted = matrix.clone();
    for (e, mut row) in weighted.row_iter_mut().enumerate() {
        row *= c(sqrt_w[e]);
    }
    let min_singular = linalg::min_singular_value(&weighted)?;
    if min_singular <= tol::RANK {
        return Err(Error::GridTooCoarse { points, dimension: dim, min_singular });
    }
    let gram = linalg::hermitian_part(&(weighted.adjoint() * &weighted));
    let mut weighted_adjoint = matrix.adjoint();
    for (e, mut col) in weighted_adjoint.column_iter_mut().enumerate() {
        col *= c(grid.weights[e]);
    }
    let left_inverse = linalg::inverse(&gram)? * weighted_adjoint;
    Ok(EvaluationMap { band, grid: grid.clone(), matrix, gram, left_inverse, min_singular })
}

/// `4 · dim W · max_{j,k} |⟨ψb_j, ψb_k⟩_E − δ_jk|`, an upper bound for the
/// distortion of `ψ` on the radius-2 ball of `W`.
pub fn isometry_distortion(em: &EvaluationMap) -> f64 {
    let d = em.dimension();
    let worst = linalg::max_abs_diff(&em.gram, &linalg::identity(d));
    4.0 * d as f64 * worst
}

/// Left translation `λ_γ` on `W` in the orthonormal basis, in a compact form.
pub(crate) enum Translation {
    /// Diagonal entries.
    Phases(Vec<Complex64>),
    /// `λ_γ b_k = b_{perm[k]}`.
    Permutation(Vec<usize>),
}

pub(crate) fn translation_action(group: &CompactGroupModel, band: Band, gamma: &GroupElement) -> Translation {
    match (group, band, gamma) {
        (CompactGroupModel::Torus { .. }, Band::Torus { .. }, GroupElement::Torus(a)) => Translation::Phases(
            band.frequencies()
                .iter()
                .map(|j| Complex64::from_polar(1.0, -(j[0] as f64 * a[0] + j[1] as f64 * a[1])))
                .collect(),
        ),
        // λ_γ δ_h = δ_{γh}
        (CompactGroupModel::Finite(g), Band::Full { order }, GroupElement::Finite(x)) => {
            Translation::Permutation((0..order).map(|h| g.multiply(*x, h)).collect())
        }
        _ => panic!("band and element do not belong to this group"),
    }
}

/// Matrix of left translation `λ_γ` on `W` in the orthonormal basis.
pub fn translation_matrix(group: &CompactGroupModel, band: Band, gamma: &GroupElement) -> CMatrix {
    match translation_action(group, band, gamma) {
        Translation::Phases(p) => linalg::diagonal(&p),
        Translation::Permutation(perm) => {
            let n = perm.len();
            CMatrix::from_fn(n, n, |r, col| if perm[col] == r { c(1.0) } else { c(0.0) })
        }
    }
}

/// `π(γ)` on `ℂ^E` in canonical coordinates.
#[derive(Clone, Debug)]
pub struct InducedRep {
    pub gamma: GroupElement,
    pub matrix: CMatrix,
}

/// `π(γ) = Ψ Λ(γ) L + (I − Ψ L)`: translation on `ψ(W)`, identity on its
/// `⟨·,·⟩_E`-orthogonal complement.
pub fn induced_representation(group: &CompactGroupModel, em: &EvaluationMap, gamma: &GroupElement) -> InducedRep {
    let lambda = translation_matrix(group, em.band, gamma);
    let moved = &em.matrix * lambda * &em.left_inverse;
    let matrix = moved + linalg::identity(em.points()) - em.projector();
    InducedRep { gamma: *gamma, matrix }
}
