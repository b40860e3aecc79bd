//! Approximate-identity kernels.
//!
//! A kernel is non-negative, has integral one, lies in a finite translation
//! invariant band, and convolving with it approximates the identity. Three
//! sources are provided: the exact point mass on a finite group, the Fejér
//! kernel on a torus, and the general route that starts from a bump `h`
//! supported near the identity, band-approximates `√h` by `l`, and
//! normalizes `l·l*`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::band::{roots_of_unity, Band, BandFunction};
use crate::group::{circle_distance, CompactGroupModel, GroupElement};
use crate::{tol, Error, Result};

/// A non-negative, L¹-normalized function supported near the identity.
#[derive(Clone, Debug, PartialEq)]
pub enum Bump {
    /// `order · δ_e` on a finite group.
    PointMass { order: usize },
    /// Product over torus coordinates of the triangle
    /// `(2π/r) · max(0, 1 − |θ|/r)`.
    Triangle { dim: usize, radius: f64 },
}

impl Bump {
    pub fn evaluate(&self, g: &GroupElement) -> f64 {
        match (self, g) {
            (Bump::PointMass { order }, GroupElement::Finite(i)) => {
                if *i == 0 {
                    *order as f64
                } else {
                    0.0
                }
            }
            (Bump::Triangle { dim, radius }, GroupElement::Torus(theta)) => {
                theta[..*dim].iter().map(|&t| triangle(t, *radius)).product()
            }
            _ => panic!("group element does not match the bump"),
        }
    }

    /// Exact value of `∫ h dμ` (one by construction).
    pub fn integral(&self) -> f64 {
        match *self {
            Bump::PointMass { .. } => 1.0,
            // (1/2π) ∫_{-r}^{r} (2π/r)(1 − |θ|/r) dθ = 1 per coordinate
            Bump::Triangle { .. } => 1.0,
        }
    }

    /// `‖√h‖_sup`, attained at the identity.
    pub fn sqrt_sup(&self) -> f64 {
        match *self {
            Bump::PointMass { order } => libm::sqrt(order as f64),
            Bump::Triangle { dim, radius } => libm::sqrt(libm::pow(TAU / radius, dim as f64)),
        }
    }

    /// Values on the uniform torus lattice with `points` nodes per dimension
    /// (row-major), or on every element of a finite group.
    pub fn lattice_values(&self, points: usize) -> Vec<f64> {
        match *self {
            Bump::PointMass { order } => {
                let mut v = vec![0.0; order];
                v[0] = order as f64;
                v
            }
            Bump::Triangle { dim, radius } => {
                let line: Vec<f64> = (0..points).map(|t| triangle(TAU * t as f64 / points as f64, radius)).collect();
                if dim == 1 {
                    line
                } else {
                    line.iter().flat_map(|a| line.iter().map(move |b| a * b)).collect()
                }
            }
        }
    }
}

fn triangle(theta: f64, radius: f64) -> f64 {
    let d = circle_distance(theta, 0.0);
    (TAU / radius) * f64::max(0.0, 1.0 - d / radius)
}

/// Build the bump supported in the ball of `radius` around the identity.
///
/// `lattice_points` is the resolution per torus dimension of the lattice the
/// bump will be measured on; a radius below four lattice spacings cannot be
/// resolved. Finite groups ignore both arguments and use the point mass.
pub fn build_bump(group: &CompactGroupModel, radius: f64, lattice_points: usize) -> Result<Bump> {
    match group {
        CompactGroupModel::Finite(g) => Ok(Bump::PointMass { order: g.order() }),
        CompactGroupModel::Torus { dim } => {
            if !(radius > 0.0 && radius <= PI) {
                return Err(Error::InvalidArgument("bump radius must lie in (0, π]"));
            }
            if lattice_points == 0 {
                return Err(Error::InvalidArgument("lattice must have at least one point"));
            }
            let min_radius = 4.0 * TAU / lattice_points as f64;
            if radius < min_radius {
                return Err(Error::RadiusTooSmall { radius, min_radius });
            }
            Ok(Bump::Triangle { dim: *dim, radius })
        }
    }
}

/// Intermediate quantities of the square-root construction.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelBuildTrace {
    /// Samples of `√h` on the analysis lattice (row-major).
    pub sqrt_h_samples: Vec<f64>,
    pub analysis_points: usize,
    pub measurement_points: usize,
    /// Band projection of `√h`.
    pub l: BandFunction,
    /// `‖l − √h‖_sup` on the measurement lattice.
    pub approx_error: f64,
    /// `‖l·l* − h‖_sup` on the measurement lattice.
    pub product_gap: f64,
    pub sqrt_h_sup: f64,
    /// Factor `1/∫ l·l*` applied to obtain the kernel.
    pub normalization_scale: f64,
}

impl KernelBuildTrace {
    /// `2·approx_error·‖√h‖ + approx_error²`, which bounds `product_gap`.
    pub fn product_gap_bound(&self) -> f64 {
        2.0 * self.approx_error * self.sqrt_h_sup + self.approx_error * self.approx_error
    }

    /// `[1/(1+3ε), 1/(1−3ε)]` with `ε = product_gap`; the upper end is
    /// infinite once `3ε ≥ 1`.
    pub fn scale_interval(&self) -> (f64, f64) {
        let e = 3.0 * self.product_gap;
        (1.0 / (1.0 + e), if e < 1.0 { 1.0 / (1.0 - e) } else { f64::INFINITY })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelOrigin {
    Delta,
    Fejer { degree: usize },
    Built { radius: f64, band_degree: usize, trace: KernelBuildTrace },
}

/// An approximate-identity kernel with its measured band error.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub k: BandFunction,
    /// Measured `ε_i`: zero for the closed forms, `product_gap` for built kernels.
    pub band_error: f64,
    pub origin: KernelOrigin,
}

/// Measured versions of the kernel properties: non-negativity, unit mass,
/// finite band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelChecks {
    pub lattice_min: f64,
    pub integral_error: f64,
    pub band: Band,
}

impl Kernel {
    pub fn band(&self) -> Band {
        self.k.band()
    }

    /// Check the kernel on a lattice oversampled `oversample` times its degree.
    pub fn checks(&self, oversample: usize) -> KernelChecks {
        let values = self.k.lattice_values(self.k.sup_lattice_points(oversample));
        let lattice_min = values.iter().fold(f64::INFINITY, |m, v| f64::min(m, v.re));
        KernelChecks { lattice_min, integral_error: (self.k.mean() - 1.0).norm(), band: self.band() }
    }

    pub fn describe(&self) -> alloc::string::String {
        match &self.origin {
            KernelOrigin::Delta => "delta".into(),
            KernelOrigin::Fejer { degree } => alloc::format!("fejer({degree})"),
            KernelOrigin::Built { radius, band_degree, .. } => alloc::format!("built(radius={radius}, band={band_degree})"),
        }
    }
}

/// The exact identity for convolution on a finite group, `order · δ_e`.
pub fn delta_kernel(group: &CompactGroupModel) -> Result<Kernel> {
    let order = group.order().ok_or(Error::WrongGroup("the delta kernel needs a finite group"))?;
    let mut values = vec![Complex64::new(0.0, 0.0); order];
    values[0] = Complex64::new(order as f64, 0.0);
    Ok(Kernel { k: BandFunction::from_values(values), band_error: 0.0, origin: KernelOrigin::Delta })
}

/// Fejér kernel of degree `n` on `T^d`: coefficients `Π (1 − |j_i|/(n+1))`.
pub fn fejer_kernel(group: &CompactGroupModel, degree: usize) -> Result<Kernel> {
    let dim = group.torus_dim().ok_or(Error::WrongGroup("the Fejér kernel needs a torus"))?;
    let weight = |j: i64| 1.0 - j.unsigned_abs() as f64 / (degree + 1) as f64;
    let k = BandFunction::from_fn(Band::Torus { dim, degree }, |j| {
        let w = if dim == 1 { weight(j[0]) } else { weight(j[0]) * weight(j[1]) };
        Complex64::new(w, 0.0)
    });
    Ok(Kernel { k, band_error: 0.0, origin: KernelOrigin::Fejer { degree } })
}

/// Build a kernel from a bump of `radius` by square root, band projection to
/// `band_degree`, squaring and L¹ normalization.
///
/// On a finite group every band is the full algebra and the result is the
/// exact delta kernel. Fails with [`Error::BandTooSmall`] when the measured
/// `‖l·l* − h‖_sup` exceeds `target_eps`.
pub fn build_kernel(group: &CompactGroupModel, radius: f64, band_degree: usize, target_eps: f64) -> Result<Kernel> {
    if !(target_eps > 0.0 && target_eps < 1.0) {
        return Err(Error::InvalidArgument("target epsilon must lie in (0, 1)"));
    }
    let dim = match group {
        CompactGroupModel::Finite(_) => return delta_kernel(group),
        CompactGroupModel::Torus { dim } => *dim,
    };
    let analysis_points = tol::DEFAULT_OVERSAMPLE * (2 * band_degree + 1);
    let measurement_points = 2 * analysis_points;
    let bump = build_bump(group, radius, measurement_points)?;

    let sqrt_h_samples: Vec<f64> = bump.lattice_values(analysis_points).into_iter().map(libm::sqrt).collect();
    let band = Band::Torus { dim, degree: band_degree };
    let l = discrete_analysis(&sqrt_h_samples, analysis_points, band);

    let h_fine = bump.lattice_values(measurement_points);
    let l_fine = l.lattice_values(measurement_points);
    let approx_error = l_fine
        .iter()
        .zip(&h_fine)
        .fold(0.0, |m, (lv, hv)| f64::max(m, (lv - libm::sqrt(*hv)).norm()));

    let product = l.mul(&l.conj());
    let product_fine = product.lattice_values(measurement_points);
    let product_gap = product_fine.iter().zip(&h_fine).fold(0.0, |m, (pv, hv)| f64::max(m, (pv - hv).norm()));

    let mass = product.mean().re;
    if mass <= 0.0 {
        return Err(Error::BandTooSmall { measured: f64::INFINITY, target: target_eps });
    }
    let normalization_scale = 1.0 / mass;
    let k = product.scale_real(normalization_scale);
    let lattice_min = product_fine.iter().fold(f64::INFINITY, |m, v| f64::min(m, v.re * normalization_scale));
    if lattice_min < -tol::KERNEL_NEGATIVITY {
        return Err(Error::NegativityViolation { min_value: lattice_min });
    }
    if product_gap > target_eps {
        return Err(Error::BandTooSmall { measured: product_gap, target: target_eps });
    }
    let trace = KernelBuildTrace {
        sqrt_h_samples,
        analysis_points,
        measurement_points,
        l,
        approx_error,
        product_gap,
        sqrt_h_sup: bump.sqrt_sup(),
        normalization_scale,
    };
    Ok(Kernel { k, band_error: product_gap, origin: KernelOrigin::Built { radius, band_degree, trace } })
}

/// Discrete Fourier analysis of lattice samples, truncated to `band`:
/// `ĉ_j = L^{-d} Σ_t s_t e^{-i j·θ_t}`.
fn discrete_analysis(samples: &[f64], points: usize, band: Band) -> BandFunction {
    let (dim, degree) = match band {
        Band::Torus { dim, degree } => (dim, degree),
        Band::Full { .. } => unreachable!("analysis is only defined on a torus"),
    };
    let roots = roots_of_unity(points);
    let n = degree as i64;
    let w = 2 * degree + 1;
    let root = |j: i64, t: usize| roots[(-j * t as i64).rem_euclid(points as i64) as usize];
    let scale = 1.0 / libm::pow(points as f64, dim as f64);
    if dim == 1 {
        BandFunction::from_fn(band, |j| samples.iter().enumerate().map(|(t, s)| root(j[0], t) * *s).sum::<Complex64>() * scale)
    } else {
        // partial[t0][b] = Σ_{t1} s[t0][t1] e^{-i b θ_{t1}}
        let mut partial = vec![Complex64::new(0.0, 0.0); points * w];
        for t0 in 0..points {
            for b in 0..w {
                partial[t0 * w + b] =
                    (0..points).map(|t1| root(b as i64 - n, t1) * samples[t0 * points + t1]).sum();
            }
        }
        BandFunction::from_fn(band, |j| {
            let b = (j[1] + n) as usize;
            (0..points).map(|t0| root(j[0], t0) * partial[t0 * w + b]).sum::<Complex64>() * scale
        })
    }
}

/// `max_{f ∈ F} ‖f * k − f‖_sup`.
pub fn kernel_defect(group: &CompactGroupModel, kernel: &Kernel, family: &[BandFunction]) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("test family must be nonempty"));
    }
    Ok(family
        .iter()
        .map(|f| group.convolve(f, &kernel.k).sub(f).sup_norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus() -> CompactGroupModel {
        CompactGroupModel::torus(1).unwrap()
    }

    #[test]
    fn point_mass_bump() {
        let z4 = CompactGroupModel::cyclic(4).unwrap();
        let b = build_bump(&z4, 0.1, 1).unwrap();
        assert_eq!(b.lattice_values(0), vec![4.0, 0.0, 0.0, 0.0]);
        assert_eq!(b.integral(), 1.0);
    }

    #[test]
    fn coarse_lattice_rejects_small_radius() {
        assert!(matches!(build_bump(&torus(), 0.1, 16), Err(Error::RadiusTooSmall { .. })));
        assert!(build_bump(&torus(), PI, 16).is_ok());
        assert!(build_bump(&torus(), 4.0, 1024).is_err());
    }

    #[test]
    fn fejer_degree_one_is_one_plus_cosine() {
        let k = fejer_kernel(&torus(), 1).unwrap();
        for theta in [0.0, 0.4, 2.0, PI] {
            let v = k.k.evaluate(&GroupElement::angle(theta));
            assert!((v.re - (1.0 + libm::cos(theta))).abs() < 1e-15 && v.im.abs() < 1e-15);
        }
        assert_eq!(k.k.mean(), Complex64::new(1.0, 0.0));
        assert!(fejer_kernel(&CompactGroupModel::cyclic(3).unwrap(), 2).is_err());
    }

    #[test]
    fn kernel_defect_values() {
        let t = torus();
        let one = BandFunction::constant(Band::torus(1, 0), Complex64::new(1.0, 0.0));
        let e1 = BandFunction::exponential(1, [1, 0]);
        for n in [1usize, 5, 12] {
            let k = fejer_kernel(&t, n).unwrap();
            let d = kernel_defect(&t, &k, &[e1.clone()]).unwrap();
            assert!((d - 1.0 / (n + 1) as f64).abs() < 1e-14);
            assert!(kernel_defect(&t, &k, &[one.clone()]).unwrap() < 1e-15);
        }
        let z6 = CompactGroupModel::cyclic(6).unwrap();
        let delta = delta_kernel(&z6).unwrap();
        let f = BandFunction::from_values((0..6).map(|i| Complex64::new(i as f64, 0.5)).collect());
        assert_eq!(kernel_defect(&z6, &delta, &[f]).unwrap(), 0.0);
        assert!(kernel_defect(&z6, &delta, &[]).is_err());
    }

    #[test]
    fn built_kernel_on_finite_group_is_delta() {
        let z5 = CompactGroupModel::cyclic(5).unwrap();
        let k = build_kernel(&z5, 1.0, 3, 0.5).unwrap();
        assert_eq!(k.band_error, 0.0);
        assert_eq!(k.k.data()[0], Complex64::new(5.0, 0.0));
    }

    #[test]
    fn built_kernel_properties() {
        let k = build_kernel(&torus(), PI, 8, 0.5).unwrap();
        let KernelOrigin::Built { trace, .. } = &k.origin else { panic!("expected a built kernel") };
        assert!(trace.product_gap <= trace.product_gap_bound());
        assert!(trace.product_gap < 3.0 * trace.approx_error);
        let checks = k.checks(tol::DEFAULT_OVERSAMPLE);
        assert!(checks.lattice_min >= -tol::KERNEL_NEGATIVITY);
        assert!(checks.integral_error <= tol::KERNEL_MASS);
        assert!(k.k.reality_defect() < 1e-12);
        assert_eq!(k.band_error, trace.product_gap);
    }

    #[test]
    fn band_zero_cannot_reach_small_targets() {
        assert!(matches!(build_kernel(&torus(), PI, 0, 1e-6), Err(Error::BandTooSmall { .. })));
        assert!(build_kernel(&torus(), PI, 4, 1.5).is_err());
    }

    #[test]
    fn built_kernel_on_two_torus() {
        let t2 = CompactGroupModel::torus(2).unwrap();
        let k = build_kernel(&t2, PI, 4, 0.9).unwrap();
        let checks = k.checks(tol::DEFAULT_OVERSAMPLE);
        assert!(checks.lattice_min >= -tol::KERNEL_NEGATIVITY);
        assert!(checks.integral_error <= tol::KERNEL_MASS);
        assert_eq!(checks.band, Band::torus(2, 8));
    }
}
