//! Averaging the grid inner product over the group, and the polar step that
//! replaces the resulting basis change by a nearby unitary.
//!
//! Three coordinate systems appear on `ℂ^E`:
//! * canonical coordinates `x` (values at grid points), where `⟨·,·⟩_E` has
//!   matrix `M = diag μ(P_e)`;
//! * the `⟨·,·⟩_E`-orthonormal frame `y = M^{1/2} x`;
//! * the averaged frame `z = V y`, orthonormal for the averaged product
//!   `⟨·,·⟩*`, which has matrix `S = V†V` in `y` coordinates.

use alloc::vec::Vec;

use crate::discretize::{translation_action, EvaluationMap, Translation};
use crate::group::{haar_quadrature, CompactGroupModel, QuadratureScheme};
use crate::linalg::{self, c, CMatrix};
use crate::{tol, Error, Result};

/// Matrix of the averaged inner product in the `⟨·,·⟩_E`-orthonormal frame.
#[derive(Clone, Debug)]
pub struct GramData {
    /// `⟨v, w⟩* = ⟨v, S w⟩_E`.
    pub s: CMatrix,
    /// `‖S − I‖`.
    pub deviation: f64,
    pub quadrature_nodes: usize,
    pub quadrature_resolution: Option<usize>,
    /// `√μ(P_e)`, the scaling between canonical and orthonormal coordinates.
    pub sqrt_weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Strategy {
    /// `V = S^{1/2}`; positive, so its unitary part is the identity.
    Sqrt,
    /// `V = R` with `S = R†R`, `R` upper triangular.
    Cholesky,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Sqrt => "sqrt",
            Strategy::Cholesky => "cholesky",
        }
    }
}

/// Average `⟨π(γ)·, π(γ)·⟩_E` over `avg_quad`.
///
/// On `ψ(W)` this averages the band Gram matrix `H` under translation; on the
/// complement `π` is the identity and the product is unchanged, and the two
/// pieces stay orthogonal. Torus rules coarser than `4·degree + 1` points per
/// dimension are checked against a doubled rule.
pub fn averaged_gram(group: &CompactGroupModel, em: &EvaluationMap, avg_quad: &QuadratureScheme) -> Result<GramData> {
    let s = averaged_s(group, em, avg_quad);
    if let (Some(resolution), false) = (avg_quad.resolution, group.is_finite()) {
        let exact_from = 4 * em.band.degree() + 1;
        if resolution < exact_from {
            let finer = haar_quadrature(group, 2 * resolution)?;
            let change = linalg::max_abs_diff(&s, &averaged_s(group, em, &finer));
            if change > tol::QUADRATURE_CHANGE {
                return Err(Error::QuadratureTooCoarse { change });
            }
        }
    }
    if linalg::min_eigenvalue(&s) <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let n = s.nrows();
    let deviation = linalg::op_norm(&(&s - linalg::identity(n)));
    Ok(GramData {
        s,
        deviation,
        quadrature_nodes: avg_quad.len(),
        quadrature_resolution: avg_quad.resolution,
        sqrt_weights: em.grid.weights.iter().map(|&w| libm::sqrt(w)).collect(),
    })
}

fn averaged_s(group: &CompactGroupModel, em: &EvaluationMap, quad: &QuadratureScheme) -> CMatrix {
    let d = em.dimension();
    let h = &em.gram;
    let mut hbar = CMatrix::zeros(d, d);
    for (gamma, &w) in quad.nodes.iter().zip(&quad.weights) {
        match translation_action(group, em.band, gamma) {
            Translation::Phases(p) => {
                for k in 0..d {
                    for j in 0..d {
                        hbar[(j, k)] += h[(j, k)] * p[j].conj() * p[k] * w;
                    }
                }
            }
            Translation::Permutation(perm) => {
                for k in 0..d {
                    for j in 0..d {
                        hbar[(j, k)] += h[(perm[j], perm[k])] * w;
                    }
                }
            }
        }
    }
    let m = em.points();
    let l = &em.left_inverse;
    let q = linalg::identity(m) - em.projector();
    let mut mq = q.clone();
    for (e, mut row) in mq.row_iter_mut().enumerate() {
        row *= c(em.grid.weights[e]);
    }
    let g_star = l.adjoint() * hbar * l + q.adjoint() * mq;
    let inv_sqrt: Vec<f64> = em.grid.weights.iter().map(|&w| 1.0 / libm::sqrt(w)).collect();
    let s = CMatrix::from_fn(m, m, |r, k| g_star[(r, k)] * inv_sqrt[r] * inv_sqrt[k]);
    linalg::hermitian_part(&s)
}

/// A basis change `V` with `V†V = S`.
pub fn basis_change(gram: &GramData, strategy: Strategy) -> Result<CMatrix> {
    match strategy {
        Strategy::Sqrt => linalg::sqrt_positive(&gram.s),
        Strategy::Cholesky => linalg::cholesky_upper(&gram.s),
    }
}

/// Left polar decomposition `V = A U`.
#[derive(Clone, Debug)]
pub struct Polar {
    pub a: CMatrix,
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    /// `‖V − U‖ = ‖A − I‖ = max_j |σ_j − 1|`.
    pub vu_gap: f64,
}

/// Polar decomposition through the SVD `V = P Σ Q†`: `U = P Q†`,
/// `A = P Σ P†`.
pub fn polar_unitary(v: &CMatrix) -> Result<Polar> {
    let svd = linalg::svd(v)?;
    let min_singular = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if min_singular <= tol::SINGULAR_V {
        return Err(Error::SingularV { min_singular });
    }
    let u = &svd.left * &svd.right_adjoint;
    let sigma: Vec<_> = svd.singular_values.iter().map(|&s| c(s)).collect();
    let a = linalg::hermitian_part(&(&svd.left * linalg::diagonal(&sigma) * svd.left.adjoint()));
    let residual = linalg::max_abs_diff(&(&a * &u), v);
    let scale = svd.singular_values.iter().copied().fold(1.0, f64::max);
    if residual > tol::POLAR_RESIDUAL * scale {
        return Err(Error::Numerical("polar factors do not reproduce V"));
    }
    let vu_gap = svd.singular_values.iter().fold(0.0, |m, s| f64::max(m, (s - 1.0).abs()));
    Ok(Polar { a, u, singular_values: svd.singular_values, vu_gap })
}

/// The basis change, its polar factors, and what is needed to move
/// operators between frames.
#[derive(Clone, Debug)]
pub struct UnitarizationData {
    pub strategy: Strategy,
    pub v: CMatrix,
    pub v_inv: CMatrix,
    pub a: CMatrix,
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub vu_gap: f64,
    pub sqrt_weights: Vec<f64>,
}

impl UnitarizationData {
    pub fn new(gram: &GramData, strategy: Strategy) -> Result<Self> {
        let v = basis_change(gram, strategy)?;
        let polar = polar_unitary(&v)?;
        let v_inv = linalg::inverse(&v)?;
        Ok(Self {
            strategy,
            v,
            v_inv,
            a: polar.a,
            u: polar.u,
            singular_values: polar.singular_values,
            vu_gap: polar.vu_gap,
            sqrt_weights: gram.sqrt_weights.clone(),
        })
    }

    /// Canonical-coordinate operator expressed in the `⟨·,·⟩_E`-orthonormal
    /// frame: `M^{1/2} X M^{-1/2}`.
    pub fn to_orthonormal_frame(&self, x: &CMatrix) -> CMatrix {
        let w = &self.sqrt_weights;
        CMatrix::from_fn(x.nrows(), x.ncols(), |r, k| x[(r, k)] * (w[r] / w[k]))
    }
}

/// `π̃(γ) = V M^{1/2} π(γ) M^{-1/2} V⁻¹`, the representation in the averaged
/// frame, where it is unitary for the standard inner product.
pub fn unitarized_representation(ud: &UnitarizationData, pi: &CMatrix) -> CMatrix {
    &ud.v * ud.to_orthonormal_frame(pi) * &ud.v_inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::Band;
    use crate::discretize::{build_grid, evaluation_map, induced_representation, isometry_distortion, GridProfile};
    use crate::group::GroupElement;

    fn gram_for(m: usize, degree: usize, profile: GridProfile) -> (CompactGroupModel, EvaluationMap, GramData) {
        let t = CompactGroupModel::torus(1).unwrap();
        let grid = build_grid(&t, m, profile).unwrap();
        let em = evaluation_map(Band::torus(1, degree), &grid).unwrap();
        let quad = haar_quadrature(&t, 4 * degree + 1).unwrap();
        let gram = averaged_gram(&t, &em, &quad).unwrap();
        (t, em, gram)
    }

    #[test]
    fn uniform_grid_gram_is_identity() {
        let (_, _, gram) = gram_for(16, 3, GridProfile::Uniform);
        assert!(linalg::max_abs_diff(&gram.s, &linalg::identity(16)) < 1e-10);
        let z6 = CompactGroupModel::cyclic(6).unwrap();
        let grid = build_grid(&z6, 1, GridProfile::Uniform).unwrap();
        let em = evaluation_map(Band::Full { order: 6 }, &grid).unwrap();
        let gram = averaged_gram(&z6, &em, &haar_quadrature(&z6, 1).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(&gram.s, &linalg::identity(6)) < 1e-12);
    }

    #[test]
    fn perturbed_grid_gram_deviation_bound() {
        let (_, em, gram) = gram_for(24, 2, GridProfile::Perturbed { seed: 7, amplitude: 0.2 });
        assert!(gram.deviation > 1e-6);
        assert!(gram.deviation <= 2.0 * isometry_distortion(&em) + 1e-8);
    }

    #[test]
    fn coarse_average_is_detected() {
        let t = CompactGroupModel::torus(1).unwrap();
        let grid = build_grid(&t, 24, GridProfile::Perturbed { seed: 7, amplitude: 0.2 }).unwrap();
        let em = evaluation_map(Band::torus(1, 3), &grid).unwrap();
        let quad = haar_quadrature(&t, 2).unwrap();
        assert!(matches!(averaged_gram(&t, &em, &quad), Err(Error::QuadratureTooCoarse { .. })));
    }

    #[test]
    fn basis_changes_factor_s() {
        let (_, _, gram) = gram_for(20, 2, GridProfile::Perturbed { seed: 2, amplitude: 0.25 });
        for strategy in [Strategy::Sqrt, Strategy::Cholesky] {
            let v = basis_change(&gram, strategy).unwrap();
            assert!(linalg::max_abs_diff(&(v.adjoint() * &v), &gram.s) < 1e-10);
        }
        let sqrt = UnitarizationData::new(&gram, Strategy::Sqrt).unwrap();
        assert!(linalg::max_abs_diff(&sqrt.u, &linalg::identity(20)) < 1e-10);
        let chol = UnitarizationData::new(&gram, Strategy::Cholesky).unwrap();
        assert!((sqrt.vu_gap - chol.vu_gap).abs() < 1e-10);
    }

    #[test]
    fn polar_examples() {
        let v = linalg::diagonal(&[c(2.0), c(1.0)]);
        let p = polar_unitary(&v).unwrap();
        assert!(linalg::max_abs_diff(&p.u, &linalg::identity(2)) < 1e-14);
        assert!((p.vu_gap - 1.0).abs() < 1e-14);

        let rot = CMatrix::from_row_slice(2, 2, &[c(0.0), c(-1.0), c(1.0), c(0.0)]);
        let p = polar_unitary(&rot).unwrap();
        assert!(linalg::max_abs_diff(&p.u, &rot) < 1e-14);
        assert!(linalg::max_abs_diff(&p.a, &linalg::identity(2)) < 1e-14);
        assert!(p.vu_gap < 1e-14);

        let singular = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(1.0)]);
        assert!(matches!(polar_unitary(&singular), Err(Error::SingularV { .. })));
    }

    #[test]
    fn unitarized_representation_is_unitary() {
        let (t, em, gram) = gram_for(20, 2, GridProfile::Perturbed { seed: 4, amplitude: 0.2 });
        let ud = UnitarizationData::new(&gram, Strategy::Cholesky).unwrap();
        let pi = induced_representation(&t, &em, &GroupElement::angle(1.3));
        let pt = unitarized_representation(&ud, &pi.matrix);
        let defect = linalg::op_norm(&(pt.adjoint() * &pt - linalg::identity(20)));
        assert!(defect <= 2.0 * gram.deviation + 1e-8);
        assert!(defect < 1e-9);
    }
}
