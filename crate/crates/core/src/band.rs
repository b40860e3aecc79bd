//! Band-limited functions: the finite-orbit subalgebra of `C(G)`.
//!
//! On a torus a function is a trigonometric polynomial stored by its Fourier
//! coefficients over the box `{-n..n}^d`. On a finite group every function is
//! band-limited; it is stored by its values, i.e. its coefficients against the
//! point-mass basis.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::group::{CompactGroupModel, GroupElement};
use crate::{tol, Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A finite, translation-invariant frequency set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Band {
    /// Frequencies `{-degree..degree}^dim` on `T^dim`.
    Torus { dim: usize, degree: usize },
    /// All functions on a finite group of the given order.
    Full { order: usize },
}

impl Band {
    pub fn torus(dim: usize, degree: usize) -> Self {
        Band::Torus { dim, degree }
    }

    /// Dimension of the spanned function space.
    pub fn dimension(&self) -> usize {
        match *self {
            Band::Torus { dim, degree } => (2 * degree + 1).pow(dim as u32),
            Band::Full { order } => order,
        }
    }

    pub fn degree(&self) -> usize {
        match *self {
            Band::Torus { degree, .. } => degree,
            Band::Full { .. } => 0,
        }
    }

    pub fn contains(&self, other: &Band) -> bool {
        match (*self, *other) {
            (Band::Torus { dim: a, degree: n }, Band::Torus { dim: b, degree: m }) => a == b && m <= n,
            (Band::Full { order: a }, Band::Full { order: b }) => a == b,
            _ => false,
        }
    }

    /// Frequencies in storage order (row-major over the box). Empty for
    /// finite bands.
    pub fn frequencies(&self) -> Vec<[i64; 2]> {
        match *self {
            Band::Torus { dim, degree } => {
                let n = degree as i64;
                if dim == 1 {
                    (-n..=n).map(|j| [j, 0]).collect()
                } else {
                    (-n..=n).flat_map(|a| (-n..=n).map(move |b| [a, b])).collect()
                }
            }
            Band::Full { .. } => Vec::new(),
        }
    }

    /// The band of the group's full function algebra (finite) or of degree
    /// `degree` (torus).
    pub fn for_group(group: &CompactGroupModel, degree: usize) -> Band {
        match group {
            CompactGroupModel::Finite(g) => Band::Full { order: g.order() },
            CompactGroupModel::Torus { dim } => Band::Torus { dim: *dim, degree },
        }
    }

    fn index(&self, freq: [i64; 2]) -> Option<usize> {
        match *self {
            Band::Torus { dim, degree } => {
                let n = degree as i64;
                let w = 2 * n + 1;
                if freq[0].abs() > n || (dim == 1 && freq[1] != 0) || (dim == 2 && freq[1].abs() > n) {
                    return None;
                }
                Some(if dim == 1 {
                    (freq[0] + n) as usize
                } else {
                    ((freq[0] + n) * w + freq[1] + n) as usize
                })
            }
            Band::Full { .. } => None,
        }
    }
}

/// A function in the band-limited algebra.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandFunction {
    band: Band,
    /// Fourier coefficients in band storage order (torus) or values by
    /// element index (finite).
    data: Vec<Complex64>,
}

impl BandFunction {
    pub fn zero(band: Band) -> Self {
        Self { band, data: vec![ZERO; band.dimension()] }
    }

    pub fn constant(band: Band, c: Complex64) -> Self {
        let mut f = Self::zero(band);
        match band {
            Band::Torus { .. } => {
                let i = band.index([0, 0]).expect("zero frequency is in every band");
                f.data[i] = c;
            }
            Band::Full { .. } => f.data.iter_mut().for_each(|x| *x = c),
        }
        f
    }

    /// The character `θ ↦ e^{i j·θ}` on `T^dim`, in the smallest band holding it.
    pub fn exponential(dim: usize, freq: [i64; 2]) -> Self {
        let degree = if dim == 1 { freq[0].unsigned_abs() } else { freq[0].unsigned_abs().max(freq[1].unsigned_abs()) };
        let band = Band::Torus { dim, degree: degree as usize };
        let mut f = Self::zero(band);
        let i = band.index(if dim == 1 { [freq[0], 0] } else { freq }).expect("frequency fits its band");
        f.data[i] = Complex64::new(1.0, 0.0);
        f
    }

    /// Coefficients (torus) or values (finite) in band storage order.
    pub fn from_data(band: Band, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != band.dimension() {
            return Err(Error::DimensionMismatch { expected: band.dimension(), found: data.len() });
        }
        if let Band::Torus { dim, .. } = band {
            if dim != 1 && dim != 2 {
                return Err(Error::InvalidArgument("torus dimension must be 1 or 2"));
            }
        }
        Ok(Self { band, data })
    }

    pub fn from_values(values: Vec<Complex64>) -> Self {
        Self { band: Band::Full { order: values.len() }, data: values }
    }

    pub fn from_fn(band: Band, mut f: impl FnMut([i64; 2]) -> Complex64) -> Self {
        let data = band.frequencies().into_iter().map(&mut f).collect();
        Self { band, data }
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn degree(&self) -> usize {
        self.band.degree()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Fourier coefficient at `freq`; zero outside the band. Torus only.
    pub fn coefficient(&self, freq: [i64; 2]) -> Complex64 {
        self.band.index(freq).map_or(ZERO, |i| self.data[i])
    }

    pub fn evaluate(&self, g: &GroupElement) -> Complex64 {
        match (self.band, g) {
            (Band::Full { .. }, GroupElement::Finite(i)) => self.data[*i],
            (Band::Torus { dim, degree }, GroupElement::Torus(theta)) => {
                let w = 2 * degree + 1;
                let e0 = phases(theta[0], degree);
                if dim == 1 {
                    self.data.iter().zip(&e0).map(|(c, e)| c * e).sum()
                } else {
                    let e1 = phases(theta[1], degree);
                    (0..w)
                        .map(|a| {
                            let row: Complex64 = self.data[a * w..(a + 1) * w].iter().zip(&e1).map(|(c, e)| c * e).sum();
                            e0[a] * row
                        })
                        .sum()
                }
            }
            _ => panic!("group element does not match the function's band"),
        }
    }

    /// `∫ f dμ` under normalized Haar measure.
    pub fn mean(&self) -> Complex64 {
        match self.band {
            Band::Torus { .. } => self.coefficient([0, 0]),
            Band::Full { order } => self.data.iter().sum::<Complex64>() / order as f64,
        }
    }

    /// Pointwise complex conjugate `f*`.
    pub fn conj(&self) -> Self {
        match self.band {
            Band::Full { .. } => Self { band: self.band, data: self.data.iter().map(|c| c.conj()).collect() },
            Band::Torus { .. } => {
                // c*_j = conj(c_{-j}); storage order is reversed by negation.
                Self { band: self.band, data: self.data.iter().rev().map(|c| c.conj()).collect() }
            }
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { band: self.band, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Re-express in a larger torus band (exact) or project to a smaller one.
    fn with_degree(&self, degree: usize) -> Self {
        match self.band {
            Band::Torus { dim, degree: d } if d == degree => {
                let _ = dim;
                self.clone()
            }
            Band::Torus { dim, .. } => {
                let band = Band::Torus { dim, degree };
                Self::from_fn(band, |j| self.coefficient(j))
            }
            Band::Full { .. } => self.clone(),
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        match (self.band, other.band) {
            (Band::Torus { dim: a, degree: n }, Band::Torus { dim: b, degree: m }) => {
                assert_eq!(a, b, "torus dimensions differ");
                let d = n.max(m);
                let (x, y) = (self.with_degree(d), other.with_degree(d));
                Self { band: x.band, data: x.data.iter().zip(&y.data).map(|(p, q)| op(*p, *q)).collect() }
            }
            (Band::Full { order: a }, Band::Full { order: b }) => {
                assert_eq!(a, b, "group orders differ");
                Self { band: self.band, data: self.data.iter().zip(&other.data).map(|(p, q)| op(*p, *q)).collect() }
            }
            _ => panic!("cannot combine torus and finite-group functions"),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product. On a torus the band of the product is the Minkowski
    /// sum of the bands and the coefficients are the discrete convolution of
    /// the coefficient arrays.
    pub fn mul(&self, other: &Self) -> Self {
        match (self.band, other.band) {
            (Band::Torus { dim: a, degree: n }, Band::Torus { dim: b, degree: m }) => {
                assert_eq!(a, b, "torus dimensions differ");
                let band = Band::Torus { dim: a, degree: n + m };
                let mut out = Self::zero(band);
                let fa = self.band.frequencies();
                let fb = other.band.frequencies();
                for (j, cj) in fa.iter().zip(&self.data) {
                    if *cj == ZERO {
                        continue;
                    }
                    for (k, ck) in fb.iter().zip(&other.data) {
                        let i = band.index([j[0] + k[0], j[1] + k[1]]).expect("sum frequency is in the sum band");
                        out.data[i] += cj * ck;
                    }
                }
                out
            }
            _ => self.zip_with(other, |a, b| a * b),
        }
    }

    /// Orthogonal projection onto `band`: drops coefficients outside it.
    pub fn project(&self, band: Band) -> Result<Self> {
        match (self.band, band) {
            (Band::Torus { dim: a, .. }, Band::Torus { dim: b, degree }) if a == b => Ok(self.with_degree(degree)),
            (Band::Full { order: a }, Band::Full { order: b }) if a == b => Ok(self.clone()),
            _ => Err(Error::InvalidArgument("projection band does not match the function's group")),
        }
    }

    /// Values on the uniform lattice with `points` nodes per torus dimension,
    /// row-major; the node for index `(a, b)` is `(2πa/points, 2πb/points)`.
    /// Finite groups return their values.
    pub fn lattice_values(&self, points: usize) -> Vec<Complex64> {
        match self.band {
            Band::Full { .. } => self.data.clone(),
            Band::Torus { dim, degree } => {
                let roots = roots_of_unity(points);
                let n = degree as i64;
                let w = 2 * degree + 1;
                let root = |j: i64, t: usize| roots[(j * t as i64).rem_euclid(points as i64) as usize];
                if dim == 1 {
                    (0..points)
                        .map(|t| (0..w).map(|a| self.data[a] * root(a as i64 - n, t)).sum())
                        .collect()
                } else {
                    // partial[a][t1] = Σ_b c[a][b] e^{i b θ_{t1}}
                    let mut partial = vec![ZERO; w * points];
                    for a in 0..w {
                        for t1 in 0..points {
                            partial[a * points + t1] =
                                (0..w).map(|b| self.data[a * w + b] * root(b as i64 - n, t1)).sum();
                        }
                    }
                    let mut out = vec![ZERO; points * points];
                    for t0 in 0..points {
                        for a in 0..w {
                            let e = root(a as i64 - n, t0);
                            let row = &partial[a * points..(a + 1) * points];
                            for (o, p) in out[t0 * points..(t0 + 1) * points].iter_mut().zip(row) {
                                *o += e * p;
                            }
                        }
                    }
                    out
                }
            }
        }
    }

    /// Lattice size per dimension used by [`BandFunction::sup_norm_with`].
    pub fn sup_lattice_points(&self, oversample: usize) -> usize {
        oversample * (self.degree() + 1)
    }

    /// `max |f|`: exact on finite groups; on a torus the maximum over a
    /// lattice with `oversample · (degree + 1)` points per dimension, refined
    /// by golden-section search around every lattice peak that could hold the
    /// true maximum.
    pub fn sup_norm_with(&self, oversample: usize) -> Result<f64> {
        if oversample < tol::MIN_OVERSAMPLE {
            return Err(Error::InvalidArgument("sup-norm oversampling must be at least 4"));
        }
        let points = self.sup_lattice_points(oversample);
        let values: Vec<f64> = self.lattice_values(points).iter().map(|v| v.norm_sqr()).collect();
        let top = values.iter().copied().fold(0.0, f64::max);
        let Band::Torus { dim, .. } = self.band else {
            return Ok(libm::sqrt(top));
        };
        // |f|² has degree 2n, so within h/2 of a lattice point it drops by at
        // most (2n)²·(h/2)²/2 ≤ 2π²/oversample² of its maximum.
        let h = TAU / points as f64;
        let slack = 1.0 - 2.0 * core::f64::consts::PI * core::f64::consts::PI / (oversample * oversample) as f64;
        let mut best = top;
        let sq = |t: [f64; 2]| self.evaluate(&GroupElement::Torus(t)).norm_sqr();
        if dim == 1 {
            for i in 0..points {
                let (l, r) = (values[(i + points - 1) % points], values[(i + 1) % points]);
                if values[i] >= l && values[i] >= r && values[i] >= slack * top {
                    let t = h * i as f64;
                    best = best.max(golden_max(|x| sq([x, 0.0]), t - h, t + h).1);
                }
            }
        } else {
            let at = |a: usize, b: usize| values[(a % points) * points + b % points];
            for a in 0..points {
                for b in 0..points {
                    let v = at(a, b);
                    let peak = (0..3).all(|da| (0..3).all(|db| at(a + points - 1 + da, b + points - 1 + db) <= v));
                    if peak && v >= slack * top {
                        let mut t = [h * a as f64, h * b as f64];
                        for _ in 0..3 {
                            t[0] = golden_max(|x| sq([x, t[1]]), t[0] - h, t[0] + h).0;
                            let (y, v) = golden_max(|y| sq([t[0], y]), t[1] - h, t[1] + h);
                            t[1] = y;
                            best = best.max(v);
                        }
                    }
                }
            }
        }
        Ok(libm::sqrt(best))
    }

    /// [`BandFunction::sup_norm_with`] at the default oversampling.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_with(tol::DEFAULT_OVERSAMPLE).expect("default oversampling is valid")
    }

    /// `⟨f, g⟩ = ∫ f ḡ dμ`, exact (Parseval on a torus).
    pub fn l2_inner(&self, other: &Self) -> Complex64 {
        match (self.band, other.band) {
            (Band::Torus { dim: a, degree: n }, Band::Torus { dim: b, degree: m }) => {
                assert_eq!(a, b, "torus dimensions differ");
                let shared = Band::Torus { dim: a, degree: n.min(m) };
                shared.frequencies().into_iter().map(|j| self.coefficient(j) * other.coefficient(j).conj()).sum()
            }
            (Band::Full { order: a }, Band::Full { order: b }) => {
                assert_eq!(a, b, "group orders differ");
                self.data.iter().zip(&other.data).map(|(x, y)| x * y.conj()).sum::<Complex64>() / a as f64
            }
            _ => panic!("cannot pair torus and finite-group functions"),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.l2_inner(self).re.max(0.0))
    }

    /// Σ |c_j| |j|₂: a Lipschitz constant for the flat metric on the torus.
    pub fn lipschitz_bound(&self) -> f64 {
        self.band
            .frequencies()
            .iter()
            .zip(&self.data)
            .map(|(j, c)| c.norm() * libm::sqrt((j[0] * j[0] + j[1] * j[1]) as f64))
            .sum()
    }

    /// Largest deviation from the symmetry `c_{-j} = conj(c_j)` (torus) or
    /// largest imaginary part (finite); zero for real-valued functions.
    pub fn reality_defect(&self) -> f64 {
        self.sub(&self.conj()).data.iter().fold(0.0, |m, c| f64::max(m, c.norm()))
    }
}

impl CompactGroupModel {
    /// `(f * k)(g) = ∫ f(h) k(h⁻¹g) dh`.
    ///
    /// Exact in both models: the torus uses coefficient-wise products, the
    /// finite group the normalized Haar sum. The result lies in the band of
    /// `k` (and of `f`).
    pub fn convolve(&self, f: &BandFunction, k: &BandFunction) -> BandFunction {
        match (self, f.band, k.band) {
            (CompactGroupModel::Torus { dim }, Band::Torus { dim: a, degree: n }, Band::Torus { dim: b, degree: m }) => {
                assert!(*dim == a && a == b, "torus dimensions differ");
                let band = Band::Torus { dim: a, degree: n.min(m) };
                BandFunction::from_fn(band, |j| f.coefficient(j) * k.coefficient(j))
            }
            (CompactGroupModel::Finite(g), Band::Full { order: a }, Band::Full { order: b }) => {
                let n = g.order();
                assert!(a == n && b == n, "function does not live on this group");
                let values = (0..n)
                    .map(|x| {
                        (0..n).map(|h| f.data[h] * k.data[g.multiply(g.inverse(h), x)]).sum::<Complex64>() / n as f64
                    })
                    .collect();
                BandFunction::from_values(values)
            }
            _ => panic!("functions do not live on this group"),
        }
    }

    /// Left translation `(λ_γ f)(g) = f(γ⁻¹ g)`; preserves the band.
    pub fn translate(&self, gamma: &GroupElement, f: &BandFunction) -> BandFunction {
        match (self, gamma, f.band) {
            (CompactGroupModel::Torus { .. }, GroupElement::Torus(alpha), Band::Torus { .. }) => {
                BandFunction::from_fn(f.band, |j| {
                    f.coefficient(j) * Complex64::from_polar(1.0, -(j[0] as f64 * alpha[0] + j[1] as f64 * alpha[1]))
                })
            }
            (CompactGroupModel::Finite(g), GroupElement::Finite(c), Band::Full { .. }) => {
                let ci = g.inverse(*c);
                BandFunction::from_values((0..g.order()).map(|x| f.data[g.multiply(ci, x)]).collect())
            }
            _ => panic!("element or function does not belong to this group"),
        }
    }
}

/// `e^{ijθ}` for `j = -n..=n`.
pub(crate) fn phases(theta: f64, n: usize) -> Vec<Complex64> {
    let n = n as i64;
    (-n..=n).map(|j| Complex64::from_polar(1.0, j as f64 * theta)).collect()
}

pub(crate) fn roots_of_unity(points: usize) -> Vec<Complex64> {
    (0..points).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / points as f64)).collect()
}

/// Golden-section search for a maximum of `f` on `[a, b]`; returns the
/// maximizer and the value there.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
