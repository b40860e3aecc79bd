//! The finite-dimensional u.c.p. map `Ψ(f) = U ψ(f*k) U†` and its measured
//! multiplicativity, equivariance and norm defects.
//!
//! All operators are matrices in the averaged frame, where the averaged inner
//! product is the standard one; operator norms are largest singular values.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::action::ActionSummary;
use crate::band::{Band, BandFunction};
use crate::discretize::{
    build_grid, evaluation_map, isometry_distortion, translation_action, EvaluationMap, GridProfile, SampleGrid,
    Translation,
};
use crate::group::{haar_quadrature, CompactGroupModel, GroupElement};
use crate::kernel::{build_kernel, delta_kernel, fejer_kernel, kernel_defect, Kernel, KernelOrigin};
use crate::linalg::{self, c, CMatrix};
use crate::rng::Uniform;
use crate::unitarize::{averaged_gram, GramData, Strategy, UnitarizationData};
use crate::{tol, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase", tag = "kind"))]
pub enum KernelChoice {
    Delta,
    Fejer { degree: usize },
    Built { radius: f64, band_degree: usize, target: f64 },
}

impl KernelChoice {
    /// The kernel on `group`. Finite groups always get the delta kernel:
    /// every band is the whole algebra there, so any construction collapses
    /// to it.
    pub fn resolve(&self, group: &CompactGroupModel) -> Result<Kernel> {
        if group.is_finite() {
            return delta_kernel(group);
        }
        match *self {
            KernelChoice::Delta => Err(Error::WrongGroup("the delta kernel needs a finite group")),
            KernelChoice::Fejer { degree } => fejer_kernel(group, degree),
            KernelChoice::Built { radius, band_degree, target } => build_kernel(group, radius, band_degree, target),
        }
    }
}

/// Grid, strategy and limits for the construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineOptions {
    /// Points per torus dimension of the first grid tried.
    pub grid_size: usize,
    pub profile: GridProfile,
    pub strategy: Strategy,
    /// Largest `|E|` the doubling loop may reach.
    pub max_dim: usize,
    /// Seed for the random part of the equivariance samples.
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { grid_size: 16, profile: GridProfile::Uniform, strategy: Strategy::Sqrt, max_dim: 512, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifyConfig {
    pub id: String,
    pub epsilon: f64,
    pub kernel: KernelChoice,
    pub options: PipelineOptions,
}

/// Everything needed to evaluate `Ψ`.
#[derive(Clone, Debug)]
pub struct UcpMap {
    pub group: CompactGroupModel,
    pub kernel: Kernel,
    pub em: EvaluationMap,
    pub gram: GramData,
    pub ud: UnitarizationData,
}

/// `π̃` conjugated into the frame where `Ψ(f)` is diagonal, split as
/// `left · Λ(γ) · right + fixed`.
struct EquivFrame {
    left: CMatrix,
    right: CMatrix,
    fixed: CMatrix,
}

impl UcpMap {
    /// Build `Ψ` on a fixed grid. The band sampled is the band of the kernel
    /// (the whole algebra for a finite group).
    pub fn new(group: &CompactGroupModel, kernel: Kernel, grid: &SampleGrid, strategy: Strategy) -> Result<Self> {
        let band = kernel.band();
        let em = evaluation_map(band, grid)?;
        let quad = haar_quadrature(group, 4 * band.degree() + 1)?;
        let gram = averaged_gram(group, &em, &quad)?;
        let ud = UnitarizationData::new(&gram, strategy)?;
        Ok(Self { group: group.clone(), kernel, em, gram, ud })
    }

    /// `|E|`.
    pub fn dimension(&self) -> usize {
        self.em.points()
    }

    /// Samples of `f * k` on the grid.
    pub fn sampled(&self, f: &BandFunction) -> Vec<Complex64> {
        self.em.grid.sample(&self.group.convolve(f, &self.kernel.k))
    }

    fn conjugate_diagonal(&self, values: &[Complex64]) -> CMatrix {
        let mut ud = self.ud.u.clone();
        for (k, mut col) in ud.column_iter_mut().enumerate() {
            col *= values[k];
        }
        ud * self.ud.u.adjoint()
    }

    /// `Ψ(f) = U diag(ψ(f*k)) U†`.
    pub fn assemble(&self, f: &BandFunction) -> CMatrix {
        self.conjugate_diagonal(&self.sampled(f))
    }

    /// `‖Ψ(fg) − Ψ(f)Ψ(g)‖`.
    pub fn defect_mult(&self, f: &BandFunction, g: &BandFunction) -> f64 {
        linalg::op_norm(&(self.assemble(&f.mul(g)) - self.assemble(f) * self.assemble(g)))
    }

    /// `| ‖Ψ(f)‖ − ‖f‖_sup |`.
    pub fn defect_norm(&self, f: &BandFunction) -> f64 {
        (linalg::op_norm(&self.assemble(f)) - f.sup_norm()).abs()
    }

    /// Smallest eigenvalue of `Ψ(f̄f)` over the probes.
    pub fn positivity_probe(&self, probes: &[BandFunction]) -> f64 {
        probes
            .iter()
            .map(|f| linalg::min_eigenvalue(&self.assemble(&f.conj().mul(f))))
            .fold(f64::INFINITY, f64::min)
    }

    /// `‖Ψ(1) − I‖`.
    pub fn unital_defect(&self) -> f64 {
        let one = BandFunction::constant(self.kernel.band(), c(1.0));
        linalg::op_norm(&(self.assemble(&one) - linalg::identity(self.dimension())))
    }

    /// `‖Ψ(f̄) − Ψ(f)†‖`.
    pub fn adjoint_defect(&self, f: &BandFunction) -> f64 {
        linalg::op_norm(&(self.assemble(&f.conj()) - self.assemble(f).adjoint()))
    }

    /// `max_γ ‖Ψ(λ_γ f) − π̃(γ) Ψ(f) π̃(γ)⁻¹‖`.
    pub fn defect_equiv(&self, f: &BandFunction, gammas: &[GroupElement]) -> f64 {
        self.defect_equiv_family(core::slice::from_ref(f), gammas)[0]
    }

    /// [`UcpMap::defect_equiv`] for each member of `family`.
    ///
    /// Conjugating by `U` leaves norms unchanged, so the comparison is made
    /// between diagonals: `‖D(λ_γ f) − ρ(γ) D(f) ρ(γ⁻¹)‖` with
    /// `ρ = U† π̃ U`. `π(γ⁻¹)` is the exact inverse of `π(γ)`.
    pub fn defect_equiv_family(&self, family: &[BandFunction], gammas: &[GroupElement]) -> Vec<f64> {
        let frame = self.equiv_frame();
        let diagonals: Vec<Vec<Complex64>> = family.iter().map(|f| self.sampled(f)).collect();
        let mut worst = alloc::vec![0.0f64; family.len()];
        for gamma in gammas {
            let rho = self.rho(&frame, gamma);
            let rho_inv = self.rho(&frame, &self.group.inverse(gamma));
            for (i, f) in family.iter().enumerate() {
                let moved = self.sampled(&self.group.translate(gamma, f));
                let mut scaled = rho.clone();
                for (k, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= diagonals[i][k];
                }
                let mut diff = -(scaled * &rho_inv);
                for (e, v) in moved.iter().enumerate() {
                    diff[(e, e)] += v;
                }
                worst[i] = f64::max(worst[i], linalg::op_norm(&diff));
            }
        }
        worst
    }

    fn equiv_frame(&self) -> EquivFrame {
        let w = &self.ud.sqrt_weights;
        let m = self.dimension();
        // B = U† V M^{1/2}, C = M^{-1/2} V⁻¹ U
        let mut b = self.ud.u.adjoint() * &self.ud.v;
        for (k, mut col) in b.column_iter_mut().enumerate() {
            col *= c(w[k]);
        }
        let mut cm = &self.ud.v_inv * &self.ud.u;
        for (r, mut row) in cm.row_iter_mut().enumerate() {
            row *= c(1.0 / w[r]);
        }
        let complement = linalg::identity(m) - self.em.projector();
        EquivFrame { left: &b * &self.em.matrix, right: &self.em.left_inverse * &cm, fixed: b * complement * cm }
    }

    fn rho(&self, frame: &EquivFrame, gamma: &GroupElement) -> CMatrix {
        let moved_left = match translation_action(&self.group, self.em.band, gamma) {
            Translation::Phases(p) => {
                let mut l = frame.left.clone();
                for (k, mut col) in l.column_iter_mut().enumerate() {
                    col *= p[k];
                }
                l
            }
            Translation::Permutation(perm) => {
                let mut l = CMatrix::zeros(frame.left.nrows(), frame.left.ncols());
                for (k, &r) in perm.iter().enumerate() {
                    l.set_column(k, &frame.left.column(r));
                }
                l
            }
        };
        moved_left * &frame.right + &frame.fixed
    }

    /// Averaging-quadrature nodes followed by seeded pseudo-random elements.
    pub fn equivariance_samples(&self, seed: u64) -> Result<Vec<GroupElement>> {
        let quad = haar_quadrature(&self.group, 4 * self.em.band.degree() + 1)?;
        let mut samples = quad.nodes;
        let mut rng = Uniform::new(seed);
        for _ in 0..tol::EQUIV_RANDOM_SAMPLES {
            samples.push(match &self.group {
                CompactGroupModel::Finite(g) => GroupElement::Finite(rng.below(g.order())),
                CompactGroupModel::Torus { dim } => {
                    let a = TAU * rng.unit();
                    let b = if *dim == 2 { TAU * rng.unit() } else { 0.0 };
                    GroupElement::Torus([a, b])
                }
            });
        }
        Ok(samples)
    }

    /// Largest relative shortfall `1 − max_e |h(e)| / ‖h‖_sup` over the
    /// given functions and their squared moduli.
    pub fn sup_shortfall(&self, functions: &[BandFunction]) -> f64 {
        let mut worst = 0.0f64;
        for h in functions {
            for g in [h.clone(), h.conj().mul(h)] {
                let sup = g.sup_norm();
                if sup <= tol::NUMERIC_FLOOR {
                    continue;
                }
                let sampled = self.em.grid.sample(&g).iter().fold(0.0, |m, v| f64::max(m, v.norm()));
                worst = worst.max(1.0 - sampled / sup);
            }
        }
        worst
    }
}

/// Parameters that determine a certificate.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub group: String,
    pub kernel: KernelSummary,
    pub band_dimension: usize,
    pub grid_size: usize,
    pub grid_points: usize,
    pub grid_profile: String,
    pub grid_doublings: usize,
    pub strategy: Strategy,
    pub averaging_nodes: usize,
    pub equivariance_samples: usize,
    pub seed: u64,
    pub rank_tolerance: f64,
    pub numeric_floor: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelSummary {
    pub kind: String,
    pub degree: Option<usize>,
    pub radius: Option<f64>,
    pub band_error: f64,
    pub product_gap: Option<f64>,
}

impl KernelSummary {
    pub fn of(kernel: &Kernel) -> Self {
        let (kind, degree, radius, product_gap) = match &kernel.origin {
            KernelOrigin::Delta => ("delta", None, None, None),
            KernelOrigin::Fejer { degree } => ("fejer", Some(*degree), None, None),
            KernelOrigin::Built { radius, band_degree, trace } => {
                ("built", Some(*band_degree), Some(*radius), Some(trace.product_gap))
            }
        };
        Self { kind: kind.into(), degree, radius, band_error: kernel.band_error, product_gap }
    }
}

/// Measured defects against their bounds.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UcpCertificate {
    pub id: String,
    pub epsilon: f64,
    /// `max ‖f*k − f‖_sup` over the normalized family and its products.
    pub eps_conv: f64,
    pub eps_dist: f64,
    pub vu_gap: f64,
    /// `max(eps_conv, eps_dist, vu_gap)`.
    pub eps_total: f64,
    pub tol_grid: f64,
    pub gram_deviation: f64,
    pub defect_mult: f64,
    pub defect_equiv: f64,
    pub defect_norm: f64,
    pub bound_mult: f64,
    pub bound_equiv: f64,
    pub bound_norm: f64,
    pub bound_vu: f64,
    pub unital_defect: f64,
    pub adjoint_defect: f64,
    pub positivity_min: f64,
    /// Factor applied to each member of the family to bring its sup-norm to
    /// at most one.
    pub normalization: Vec<f64>,
    /// Equivariance is measured on `provenance.equivariance_samples` group
    /// elements, not on the whole group.
    pub equiv_sampled: bool,
    pub pass: bool,
    pub provenance: Provenance,
    pub action: Option<ActionSummary>,
}

/// Scale each function to sup-norm at most one; returns the factors used.
pub fn normalize_family(family: &[BandFunction]) -> (Vec<BandFunction>, Vec<f64>) {
    family
        .iter()
        .map(|f| {
            let s = f.sup_norm();
            let factor = if s > 1.0 { 1.0 / s } else { 1.0 };
            (f.scale_real(factor), factor)
        })
        .unzip()
}

/// `F` together with all pairwise products.
pub fn with_products(family: &[BandFunction]) -> Vec<BandFunction> {
    let mut out = family.to_vec();
    for f in family {
        for g in family {
            out.push(f.mul(g));
        }
    }
    out
}

/// Run the doubling loop for `config` and certify `family`.
pub fn certify(group: &CompactGroupModel, family: &[BandFunction], config: &CertifyConfig) -> Result<UcpCertificate> {
    certify_detailed(group, family, config).map(|(_, cert)| cert)
}

/// [`certify`], also returning the map it certified.
pub fn certify_detailed(
    group: &CompactGroupModel,
    family: &[BandFunction],
    config: &CertifyConfig,
) -> Result<(UcpMap, UcpCertificate)> {
    if !(config.epsilon > 0.0 && config.epsilon < 1.0) {
        return Err(Error::InvalidArgument("epsilon must lie in (0, 1)"));
    }
    if family.is_empty() {
        return Err(Error::InvalidArgument("test family must be nonempty"));
    }
    let kernel = config.kernel.resolve(group)?;
    let expected = Band::for_group(group, 0);
    for f in family {
        let fits = match (f.band(), expected) {
            (Band::Torus { dim: a, .. }, Band::Torus { dim: b, .. }) => a == b,
            (x, y) => x == y,
        };
        if !fits {
            return Err(Error::InvalidArgument("test function does not live on the group"));
        }
    }
    let (normalized, factors) = normalize_family(family);
    let closure = with_products(&normalized);
    let smoothed: Vec<BandFunction> = closure.iter().map(|f| group.convolve(f, &kernel.k)).collect();

    let opts = &config.options;
    let dim = group.torus_dim().unwrap_or(1) as u32;
    let mut size = opts.grid_size.max(1);
    let mut doublings = 0;
    let mut last = (0.0, 0.0);
    let map = loop {
        let points = if group.is_finite() { group.order().unwrap_or(0) } else { size.pow(dim) };
        if points > opts.max_dim {
            return Err(Error::Unachievable { points, max_dim: opts.max_dim, distortion: last.0, tol_grid: last.1 });
        }
        let grid = build_grid(group, size, opts.profile)?;
        match UcpMap::new(group, kernel.clone(), &grid, opts.strategy) {
            Ok(map) => {
                let distortion = isometry_distortion(&map.em);
                let shortfall = map.sup_shortfall(&smoothed);
                if group.is_finite() || (distortion <= config.epsilon / 4.0 && shortfall <= config.epsilon / 4.0) {
                    break map;
                }
                last = (distortion, shortfall);
            }
            Err(Error::GridTooCoarse { .. }) => {}
            Err(e) => return Err(e),
        }
        size *= 2;
        doublings += 1;
    };

    let eps_conv = kernel_defect(group, &map.kernel, &closure)?;
    let samples = map.equivariance_samples(opts.seed)?;
    let cert = measure(&map, &normalized, &samples, Measured {
        id: config.id.clone(),
        epsilon: config.epsilon,
        eps_conv,
        tol_grid: map.sup_shortfall(&smoothed),
        normalization: factors,
        grid_doublings: doublings,
        seed: opts.seed,
    });
    Ok((map, cert))
}

struct Measured {
    id: String,
    epsilon: f64,
    eps_conv: f64,
    tol_grid: f64,
    normalization: Vec<f64>,
    grid_doublings: usize,
    seed: u64,
}

fn measure(map: &UcpMap, family: &[BandFunction], samples: &[GroupElement], m: Measured) -> UcpCertificate {
    let eps_dist = isometry_distortion(&map.em);
    let vu_gap = map.ud.vu_gap;
    let eps_total = m.eps_conv.max(eps_dist).max(vu_gap);

    let mut defect_mult = 0.0f64;
    for f in family {
        for g in family {
            defect_mult = defect_mult.max(map.defect_mult(f, g));
        }
    }
    let defect_norm = family.iter().map(|f| map.defect_norm(f)).fold(0.0, f64::max);
    let defect_equiv = map.defect_equiv_family(family, samples).into_iter().fold(0.0, f64::max);
    let adjoint_defect = family.iter().map(|f| map.adjoint_defect(f)).fold(0.0, f64::max);

    let bound_mult = 4.0 * eps_total;
    let bound_norm = 3.0 * eps_total + m.tol_grid;
    let bound_equiv = eps_total + 2.0 * eps_dist;
    let bound_vu = 4.0 * eps_dist;
    let floor = tol::NUMERIC_FLOOR;
    let pass = defect_mult <= bound_mult + floor
        && defect_norm <= bound_norm + floor
        && defect_equiv <= bound_equiv + floor
        && vu_gap <= bound_vu + floor;

    let grid = &map.em.grid;
    UcpCertificate {
        id: m.id,
        epsilon: m.epsilon,
        eps_conv: m.eps_conv,
        eps_dist,
        vu_gap,
        eps_total,
        tol_grid: m.tol_grid,
        gram_deviation: map.gram.deviation,
        defect_mult,
        defect_equiv,
        defect_norm,
        bound_mult,
        bound_equiv,
        bound_norm,
        bound_vu,
        unital_defect: map.unital_defect(),
        adjoint_defect,
        positivity_min: map.positivity_probe(family),
        normalization: m.normalization,
        equiv_sampled: !map.group.is_finite(),
        pass,
        provenance: Provenance {
            group: map.group.describe(),
            kernel: KernelSummary::of(&map.kernel),
            band_dimension: map.em.dimension(),
            grid_size: grid.size,
            grid_points: grid.len(),
            grid_profile: grid.profile.describe(),
            grid_doublings: m.grid_doublings,
            strategy: map.ud.strategy,
            averaging_nodes: map.gram.quadrature_nodes,
            equivariance_samples: samples.len(),
            seed: m.seed,
            rank_tolerance: tol::RANK,
            numeric_floor: tol::NUMERIC_FLOOR,
        },
        action: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;

    fn exp(j: i64) -> BandFunction {
        BandFunction::exponential(1, [j, 0])
    }

    fn uniform_map(degree: usize, m: usize) -> UcpMap {
        let t = CompactGroupModel::torus(1).unwrap();
        let k = fejer_kernel(&t, degree).unwrap();
        let grid = build_grid(&t, m, GridProfile::Uniform).unwrap();
        UcpMap::new(&t, k, &grid, Strategy::Sqrt).unwrap()
    }

    #[test]
    fn fejer_three_damps_by_three_quarters() {
        let map = uniform_map(3, 16);
        let psi = map.assemble(&exp(1));
        for e in 0..16 {
            let theta = TAU * e as f64 / 16.0;
            let want = Complex64::from_polar(0.75, theta);
            assert!((psi[(e, e)] - want).norm() < 1e-12);
        }
        assert!((map.defect_mult(&exp(1), &exp(1)) - 1.0 / 16.0).abs() < 1e-10);
        assert!((map.defect_norm(&exp(1)) - 0.25).abs() < 1e-10);
        assert!(map.defect_mult(&BandFunction::constant(Band::torus(1, 0), c(1.0)), &exp(1)) < 1e-12);
        assert!(map.unital_defect() < 1e-10);
        assert!(map.positivity_probe(&[exp(1)]) >= -1e-12);
    }

    #[test]
    fn grid_shift_commutes_with_full_band() {
        // With m = 2n + 1 the band spans every lattice function and the shift
        // by one spacing permutes the grid.
        let map = uniform_map(7, 15);
        let gamma = [GroupElement::angle(TAU / 15.0), GroupElement::angle(0.0)];
        assert!(map.defect_equiv(&exp(1), &gamma) < 1e-10);
    }

    #[test]
    fn finite_group_pipeline_is_exact() {
        let z6 = CompactGroupModel::Finite(FiniteGroup::cyclic(6).unwrap());
        let f = BandFunction::from_values((0..6).map(|g| Complex64::new(g as f64 / 6.0, 0.3)).collect());
        let g = BandFunction::from_values((0..6).map(|g| Complex64::new(0.1, (g % 2) as f64 * 0.5)).collect());
        let config = CertifyConfig {
            id: "z6".into(),
            epsilon: 0.1,
            kernel: KernelChoice::Fejer { degree: 3 },
            options: PipelineOptions::default(),
        };
        let cert = certify(&z6, &[f, g], &config).unwrap();
        assert!(cert.pass);
        for d in [cert.defect_mult, cert.defect_equiv, cert.defect_norm, cert.unital_defect, cert.adjoint_defect] {
            assert!(d < 1e-10, "{d}");
        }
        assert_eq!(cert.provenance.kernel.kind, "delta");
        assert_eq!(cert.provenance.equivariance_samples, 6 + tol::EQUIV_RANDOM_SAMPLES);
    }

    #[test]
    fn doubling_loop_hits_the_dimension_cap() {
        let t = CompactGroupModel::torus(1).unwrap();
        // Maximum at θ = 0.3, never on a dyadic uniform grid.
        let f = BandFunction::constant(Band::torus(1, 1), c(1.0))
            .add(&exp(1).scale(Complex64::from_polar(0.5, -0.3)))
            .add(&exp(-1).scale(Complex64::from_polar(0.5, 0.3)));
        let config = CertifyConfig {
            id: "tight".into(),
            epsilon: 1e-9,
            kernel: KernelChoice::Fejer { degree: 2 },
            options: PipelineOptions { max_dim: 128, ..PipelineOptions::default() },
        };
        let r = certify(&t, &[f], &config);
        assert!(matches!(r, Err(Error::Unachievable { max_dim: 128, .. })), "{r:?}");
    }

    #[test]
    fn normalization_is_recorded() {
        let f = exp(1).scale_real(3.0);
        let (out, factors) = normalize_family(&[f, exp(2)]);
        assert!((factors[0] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(factors[1], 1.0);
        assert!((out[0].sup_norm() - 1.0).abs() < 1e-12);
    }
}
