//! Isometric actions of finitely generated groups on tori (by rotation) and on
//! finite metric spaces (by permutation), reduced to translation actions on
//! orbit closures.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::band::{Band, BandFunction};
use crate::group::{circle_distance, haar_quadrature, reduce_angle, CompactGroupModel, FiniteGroup, GroupElement};
use crate::linalg::{self, CMatrix};
use crate::ucp::{certify_detailed, CertifyConfig, UcpCertificate, UcpMap};
use crate::{tol, Error, Result};

/// A rotation angle, exact when given as a fraction of a full turn.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RotationAngle {
    Turns { num: i64, den: u64 },
    Radians(f64),
}

impl RotationAngle {
    pub fn radians(&self) -> f64 {
        match *self {
            RotationAngle::Turns { num, den } => TAU * num as f64 / den as f64,
            RotationAngle::Radians(r) => r,
        }
    }

    /// Reduced `(num mod den, den)` of a fractional angle.
    fn reduced(&self) -> Option<(u64, u64)> {
        match *self {
            RotationAngle::Turns { num, den } if den > 0 => {
                let n = num.rem_euclid(den as i64) as u64;
                let g = gcd(n, den);
                Some((n / g, den / g))
            }
            _ => None,
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A point of `X`: angles on `T^d`, or an index into a finite space.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum Point {
    Torus([f64; 2]),
    Index(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum IsometricAction {
    /// Each generator rotates `T^dim` by a vector of angles. `irrational`
    /// declares that the generated subgroup is dense in the torus.
    TorusRotation { dim: usize, generators: Vec<Vec<RotationAngle>>, irrational: bool },
    /// Each generator permutes the points of a finite metric space.
    FiniteSpace { metric: Vec<Vec<f64>>, generators: Vec<Vec<usize>> },
}

impl IsometricAction {
    pub fn rotation(dim: usize, generators: Vec<Vec<RotationAngle>>, irrational: bool) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidArgument("rotations act on T^1 or T^2"));
        }
        if generators.is_empty() || generators.iter().any(|g| g.len() != dim) {
            return Err(Error::InvalidArgument("each generator needs one angle per torus dimension"));
        }
        if generators.iter().flatten().any(|a| matches!(a, RotationAngle::Turns { den: 0, .. })) {
            return Err(Error::InvalidArgument("angle denominator must be positive"));
        }
        Ok(IsometricAction::TorusRotation { dim, generators, irrational })
    }

    /// Checks that `metric` is a metric and that every generator is an
    /// isometry of it.
    pub fn finite_space(metric: Vec<Vec<f64>>, generators: Vec<Vec<usize>>) -> Result<Self> {
        let n = metric.len();
        if n == 0 || metric.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument("metric table must be square and nonempty"));
        }
        for x in 0..n {
            if metric[x][x] != 0.0 {
                return Err(Error::InvalidArgument("metric must vanish on the diagonal"));
            }
            for y in 0..n {
                let d = metric[x][y];
                if !d.is_finite() || d < 0.0 || (x != y && d == 0.0) || d != metric[y][x] {
                    return Err(Error::InvalidArgument("metric must be symmetric and positive off the diagonal"));
                }
                for z in 0..n {
                    if d > metric[x][z] + metric[z][y] {
                        return Err(Error::InvalidArgument("metric violates the triangle inequality"));
                    }
                }
            }
        }
        if generators.is_empty() {
            return Err(Error::InvalidArgument("at least one generator is required"));
        }
        for p in &generators {
            let mut seen = alloc::vec![false; n];
            if p.len() != n || p.iter().any(|&i| i >= n || core::mem::replace(&mut seen[i], true)) {
                return Err(Error::InvalidArgument("generator is not a permutation of the points"));
            }
            for x in 0..n {
                for y in 0..n {
                    if metric[p[x]][p[y]] != metric[x][y] {
                        return Err(Error::InvalidArgument("generator is not an isometry"));
                    }
                }
            }
        }
        Ok(IsometricAction::FiniteSpace { metric, generators })
    }

    pub fn generator_count(&self) -> usize {
        match self {
            IsometricAction::TorusRotation { generators, .. } => generators.len(),
            IsometricAction::FiniteSpace { generators, .. } => generators.len(),
        }
    }

    /// Generator `i` applied to `x`.
    pub fn apply(&self, i: usize, x: &Point) -> Point {
        match (self, x) {
            (IsometricAction::TorusRotation { generators, .. }, Point::Torus(a)) => {
                let g = &generators[i];
                let b = if g.len() == 2 { reduce_angle(a[1] + g[1].radians()) } else { 0.0 };
                Point::Torus([reduce_angle(a[0] + g[0].radians()), b])
            }
            (IsometricAction::FiniteSpace { generators, .. }, Point::Index(j)) => Point::Index(generators[i][*j]),
            _ => panic!("point does not belong to the space"),
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (IsometricAction::TorusRotation { .. }, Point::Torus(a), Point::Torus(b)) => {
                let d0 = circle_distance(a[0], b[0]);
                let d1 = circle_distance(a[1], b[1]);
                libm::sqrt(d0 * d0 + d1 * d1)
            }
            (IsometricAction::FiniteSpace { metric, .. }, Point::Index(i), Point::Index(j)) => metric[*i][*j],
            _ => panic!("points do not belong to the space"),
        }
    }

    fn contains(&self, x: &Point) -> bool {
        match (self, x) {
            (IsometricAction::TorusRotation { dim, .. }, Point::Torus(a)) => {
                a.iter().all(|t| t.is_finite()) && (*dim == 2 || a[1] == 0.0)
            }
            (IsometricAction::FiniteSpace { metric, .. }, Point::Index(i)) => *i < metric.len(),
            _ => false,
        }
    }

    /// A starting basepoint: the origin or the first point.
    pub fn origin(&self) -> Point {
        match self {
            IsometricAction::TorusRotation { .. } => Point::Torus([0.0, 0.0]),
            IsometricAction::FiniteSpace { .. } => Point::Index(0),
        }
    }

    fn probes(&self, resolution: usize) -> Vec<Point> {
        match self {
            IsometricAction::TorusRotation { dim, .. } => {
                let step = TAU / resolution as f64;
                if *dim == 1 {
                    (0..resolution).map(|i| Point::Torus([step * i as f64, 0.0])).collect()
                } else {
                    (0..resolution)
                        .flat_map(|i| (0..resolution).map(move |j| Point::Torus([step * i as f64, step * j as f64])))
                        .collect()
                }
            }
            IsometricAction::FiniteSpace { metric, .. } => (0..metric.len()).map(Point::Index).collect(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            IsometricAction::TorusRotation { dim, generators, irrational } => {
                format!("rotation of T^{dim} by {} generator(s){}", generators.len(), if *irrational { ", dense" } else { "" })
            }
            IsometricAction::FiniteSpace { metric, generators } => {
                format!("{} permutation(s) of a {}-point space", generators.len(), metric.len())
            }
        }
    }
}

/// How the closure group `G` maps onto the orbit closure of a basepoint.
#[derive(Clone, Debug, PartialEq)]
pub enum OrbitMap {
    /// `h(g) = x + g` on the torus.
    Translation,
    /// `h(k) = x + k·step` for `k ∈ Z/q`.
    Cyclic { step: [f64; 2] },
    /// `h(g) = g(x)` for permutations `g`; `perms[g]` is element `g`.
    Permutations { perms: Vec<Vec<usize>> },
}

/// Orbit closure of a basepoint as the image of a compact group.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitClosureModel {
    pub basepoint: Point,
    pub group: CompactGroupModel,
    pub orbit_map: OrbitMap,
    /// The element of `group` that each generator acts by.
    pub generators: Vec<GroupElement>,
}

impl OrbitClosureModel {
    /// The orbit map `h`.
    pub fn h(&self, g: &GroupElement) -> Point {
        match (&self.orbit_map, self.basepoint, g) {
            (OrbitMap::Translation, Point::Torus(x), GroupElement::Torus(a)) => {
                Point::Torus([reduce_angle(x[0] + a[0]), reduce_angle(x[1] + a[1])])
            }
            (OrbitMap::Cyclic { step }, Point::Torus(x), GroupElement::Finite(k)) => {
                let k = *k as f64;
                Point::Torus([reduce_angle(x[0] + k * step[0]), reduce_angle(x[1] + k * step[1])])
            }
            (OrbitMap::Permutations { perms }, Point::Index(x), GroupElement::Finite(g)) => Point::Index(perms[*g][x]),
            _ => panic!("element does not belong to the closure group"),
        }
    }

    /// `max |h(γ·g) − γ·h(g)|` over generators `γ` and the quadrature nodes
    /// `g` of the closure group.
    pub fn equivariance_defect(&self, action: &IsometricAction) -> Result<f64> {
        let quad = haar_quadrature(&self.group, 16)?;
        let mut worst = 0.0f64;
        for (i, gamma) in self.generators.iter().enumerate() {
            for g in &quad.nodes {
                let lhs = self.h(&self.group.multiply(gamma, g));
                let rhs = action.apply(i, &self.h(g));
                worst = worst.max(action.distance(&lhs, &rhs));
            }
        }
        Ok(worst)
    }

    /// Points of the orbit closure, or `None` when it is the whole torus.
    fn orbit_points(&self) -> Option<Vec<Point>> {
        match self.group {
            CompactGroupModel::Torus { .. } => None,
            CompactGroupModel::Finite(ref g) => Some((0..g.order()).map(|k| self.h(&GroupElement::Finite(k))).collect()),
        }
    }
}

/// The closure of the acting group in the isometries of `X`, realized on the
/// orbit of `basepoint`.
pub fn orbit_closure(action: &IsometricAction, basepoint: Point) -> Result<OrbitClosureModel> {
    if !action.contains(&basepoint) {
        return Err(Error::InvalidArgument("basepoint does not lie in the space"));
    }
    match action {
        IsometricAction::TorusRotation { dim, generators, irrational: true } => Ok(OrbitClosureModel {
            basepoint,
            group: CompactGroupModel::torus(*dim)?,
            orbit_map: OrbitMap::Translation,
            generators: generators
                .iter()
                .map(|g| {
                    let b = if *dim == 2 { reduce_angle(g[1].radians()) } else { 0.0 };
                    GroupElement::Torus([reduce_angle(g[0].radians()), b])
                })
                .collect(),
        }),
        IsometricAction::TorusRotation { dim, generators, irrational: false } => {
            let reduced: Option<Vec<Vec<(u64, u64)>>> =
                generators.iter().map(|g| g.iter().map(|a| a.reduced()).collect()).collect();
            let reduced = reduced.ok_or(Error::ClosureUndetermined)?;
            let q = reduced.iter().flatten().fold(1u64, |l, &(_, d)| l / gcd(l, d) * d);
            if q as usize > tol::CLOSURE_ORDER_CAP {
                return Err(Error::ClosureTooLarge { cap: tol::CLOSURE_ORDER_CAP });
            }
            let (step, elements) = if *dim == 1 {
                // The fractions generate the subgroup of order lcm(denominators)
                // of the rotations, which is cyclic with generator 1/q.
                let els = reduced.iter().map(|g| GroupElement::Finite((g[0].0 * (q / g[0].1)) as usize)).collect();
                ([TAU / q as f64, 0.0], els)
            } else if generators.len() == 1 {
                let g = &generators[0];
                ([g[0].radians(), g[1].radians()], alloc::vec![GroupElement::Finite(1 % q as usize)])
            } else {
                return Err(Error::ClosureUndetermined);
            };
            Ok(OrbitClosureModel {
                basepoint,
                group: CompactGroupModel::cyclic(q as usize)?,
                orbit_map: OrbitMap::Cyclic { step },
                generators: elements,
            })
        }
        IsometricAction::FiniteSpace { generators, .. } => {
            let (group, perms) = permutation_group(generators)?;
            let elements = generators
                .iter()
                .map(|p| GroupElement::Finite(perms.iter().position(|q| q == p).expect("generators lie in the closure")))
                .collect();
            Ok(OrbitClosureModel { basepoint, group, orbit_map: OrbitMap::Permutations { perms }, generators: elements })
        }
    }
}

/// The permutation group generated by `generators`, with the identity first
/// and multiplication `(σ∘τ)(x) = σ(τ(x))`. Returns the group and the
/// permutation behind each element index.
pub fn permutation_group(generators: &[Vec<usize>]) -> Result<(CompactGroupModel, Vec<Vec<usize>>)> {
    let n = generators.first().map_or(0, |g| g.len());
    if n == 0 {
        return Err(Error::InvalidArgument("at least one nonempty permutation is required"));
    }
    for p in generators {
        let mut seen = alloc::vec![false; n];
        if p.len() != n || p.iter().any(|&i| i >= n || core::mem::replace(&mut seen[i], true)) {
            return Err(Error::InvalidArgument("generator is not a permutation"));
        }
    }
    let mut perms: Vec<Vec<usize>> = alloc::vec![(0..n).collect()];
    let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    index.insert(perms[0].clone(), 0);
    let mut next = 0;
    while next < perms.len() {
        for g in generators {
            let composed: Vec<usize> = (0..n).map(|x| g[perms[next][x]]).collect();
            if !index.contains_key(&composed) {
                if perms.len() == tol::CLOSURE_ORDER_CAP {
                    return Err(Error::ClosureTooLarge { cap: tol::CLOSURE_ORDER_CAP });
                }
                index.insert(composed.clone(), perms.len());
                perms.push(composed);
            }
        }
        next += 1;
    }
    let order = perms.len();
    let table: Vec<usize> = (0..order)
        .flat_map(|a| {
            let (perms, index) = (&perms, &index);
            (0..order).map(move |b| {
                let composed: Vec<usize> = (0..n).map(|x| perms[a][perms[b][x]]).collect();
                index[&composed]
            })
        })
        .collect();
    Ok((CompactGroupModel::Finite(FiniteGroup::from_flat_unchecked(order, table)), perms))
}

/// A function on `X`: a band function when `X` is a torus, a value table
/// when it is finite.
#[derive(Clone, Debug, PartialEq)]
pub enum SpaceFunction {
    Torus(BandFunction),
    Finite(Vec<Complex64>),
}

impl SpaceFunction {
    pub fn evaluate(&self, x: &Point) -> Complex64 {
        match (self, x) {
            (SpaceFunction::Torus(f), Point::Torus(a)) => f.evaluate(&GroupElement::Torus(*a)),
            (SpaceFunction::Finite(v), Point::Index(i)) => v[*i],
            _ => panic!("point does not belong to the function's space"),
        }
    }

    /// `sup_X |f|`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            SpaceFunction::Torus(f) => f.sup_norm(),
            SpaceFunction::Finite(v) => v.iter().fold(0.0, |m, z| f64::max(m, z.norm())),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        match self {
            SpaceFunction::Torus(f) => SpaceFunction::Torus(f.scale_real(s)),
            SpaceFunction::Finite(v) => SpaceFunction::Finite(v.iter().map(|z| z * s).collect()),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (SpaceFunction::Torus(f), SpaceFunction::Torus(g)) => SpaceFunction::Torus(f.mul(g)),
            (SpaceFunction::Finite(a), SpaceFunction::Finite(b)) => {
                SpaceFunction::Finite(a.iter().zip(b).map(|(x, y)| x * y).collect())
            }
            _ => panic!("functions live on different spaces"),
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            SpaceFunction::Torus(f) => SpaceFunction::Torus(f.conj()),
            SpaceFunction::Finite(v) => SpaceFunction::Finite(v.iter().map(|z| z.conj()).collect()),
        }
    }
}

/// `f ∘ h`.
pub fn pullback(ocm: &OrbitClosureModel, f: &SpaceFunction) -> Result<BandFunction> {
    match (&ocm.orbit_map, f) {
        (OrbitMap::Translation, SpaceFunction::Torus(f)) => {
            let dim = ocm.group.torus_dim().expect("translation orbit maps come from tori");
            let (Band::Torus { dim: fd, .. }, Point::Torus(x)) = (f.band(), ocm.basepoint) else {
                return Err(Error::InvalidArgument("function does not live on the torus"));
            };
            if fd != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: fd });
            }
            // f(x + g) = Σ c_j e^{ij·x} e^{ij·g}
            Ok(BandFunction::from_fn(f.band(), |j| {
                f.coefficient(j) * Complex64::from_polar(1.0, j[0] as f64 * x[0] + j[1] as f64 * x[1])
            }))
        }
        (OrbitMap::Cyclic { .. }, SpaceFunction::Torus(_)) | (OrbitMap::Permutations { .. }, SpaceFunction::Finite(_)) => {
            let order = ocm.group.order().expect("finite closure");
            if let SpaceFunction::Finite(v) = f {
                if let Point::Index(_) = ocm.basepoint {
                    let n = match &ocm.orbit_map {
                        OrbitMap::Permutations { perms } => perms[0].len(),
                        _ => unreachable!(),
                    };
                    if v.len() != n {
                        return Err(Error::DimensionMismatch { expected: n, found: v.len() });
                    }
                }
            }
            Ok(BandFunction::from_values((0..order).map(|g| f.evaluate(&ocm.h(&GroupElement::Finite(g)))).collect()))
        }
        _ => Err(Error::InvalidArgument("function does not live on the acted-on space")),
    }
}

/// Basepoints whose orbit closures are `δ`-dense, with the measured density.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitCover {
    pub basepoints: Vec<Point>,
    pub delta: f64,
    /// Largest distance from a probe point to the union of orbit closures.
    pub achieved_density: f64,
    pub closures: Vec<OrbitClosureModel>,
}

/// Greedy farthest-point selection on a probe set: start from the origin
/// and add the worst-covered probe (the first one on ties) until every probe
/// is within `delta` of an orbit closure.
pub fn select_dense_orbits(action: &IsometricAction, delta: f64, probe_resolution: usize) -> Result<OrbitCover> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("density delta must be positive"));
    }
    if probe_resolution == 0 {
        return Err(Error::InvalidArgument("probe resolution must be at least 1"));
    }
    let probes = action.probes(probe_resolution);
    let mut gaps = alloc::vec![f64::INFINITY; probes.len()];
    let mut basepoints = Vec::new();
    let mut closures = Vec::new();
    let mut next = action.origin();
    loop {
        if basepoints.len() == tol::ORBIT_BASEPOINT_CAP {
            let achieved = gaps.iter().copied().fold(0.0, f64::max);
            return Err(Error::CoverNotFound { cap: tol::ORBIT_BASEPOINT_CAP, achieved });
        }
        let ocm = orbit_closure(action, next)?;
        match ocm.orbit_points() {
            None => gaps.iter_mut().for_each(|g| *g = 0.0),
            Some(points) => {
                for (p, gap) in probes.iter().zip(gaps.iter_mut()) {
                    for y in &points {
                        *gap = gap.min(action.distance(p, y));
                    }
                }
            }
        }
        basepoints.push(next);
        closures.push(ocm);
        let (worst, achieved) = gaps.iter().enumerate().fold((0, 0.0), |(i, m), (j, &g)| if g > m { (j, g) } else { (i, m) });
        if achieved <= delta {
            return Ok(OrbitCover { basepoints, delta, achieved_density: achieved, closures });
        }
        next = probes[worst];
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionConfig {
    pub certify: CertifyConfig,
    pub delta: f64,
    pub probe_resolution: usize,
}

/// Per-orbit facts carried by an action certificate.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockSummary {
    pub basepoint: Point,
    pub group: String,
    pub dimension: usize,
    pub defect_mult: f64,
    pub defect_equiv: f64,
    pub defect_norm: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ActionSummary {
    pub action: String,
    pub delta: f64,
    pub achieved_density: f64,
    /// `max_f (sup_X |f| − sup_Y |f|)` for the union `Y` of orbit closures.
    pub restriction_loss: f64,
    /// Continuity bound for `restriction_loss` at the achieved density.
    pub restriction_bound: f64,
    pub orbit_equivariance: f64,
    pub blocks: Vec<BlockSummary>,
}

/// The combined certificate and the per-orbit ones.
#[derive(Clone, Debug)]
pub struct ActionCertificate {
    pub certificate: UcpCertificate,
    pub blocks: Vec<UcpCertificate>,
    pub cover: OrbitCover,
}

/// Certify the action: pull `family` back to every orbit closure of a
/// `δ`-dense cover, certify each translation action, and combine the maps by
/// direct sum.
pub fn certify_action(action: &IsometricAction, family: &[SpaceFunction], config: &ActionConfig) -> Result<ActionCertificate> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("test family must be nonempty"));
    }
    let cover = select_dense_orbits(action, config.delta, config.probe_resolution)?;
    let factors: Vec<f64> = family.iter().map(|f| f.sup_norm()).map(|s| if s > 1.0 { 1.0 / s } else { 1.0 }).collect();
    let normalized: Vec<SpaceFunction> = family.iter().zip(&factors).map(|(f, &s)| f.scale_real(s)).collect();

    let mut maps: Vec<UcpMap> = Vec::new();
    let mut blocks: Vec<UcpCertificate> = Vec::new();
    let mut pulled: Vec<Vec<BandFunction>> = Vec::new();
    let mut orbit_equivariance = 0.0f64;
    for (i, ocm) in cover.closures.iter().enumerate() {
        orbit_equivariance = orbit_equivariance.max(ocm.equivariance_defect(action)?);
        let fs: Vec<BandFunction> = normalized.iter().map(|f| pullback(ocm, f)).collect::<Result<_>>()?;
        let mut cfg = config.certify.clone();
        if cover.closures.len() > 1 {
            cfg.id = format!("{}/orbit{}", cfg.id, i);
        }
        let (map, cert) = certify_detailed(&ocm.group, &fs, &cfg)?;
        maps.push(map);
        blocks.push(cert);
        pulled.push(fs);
    }

    let direct_sum = |build: &dyn Fn(usize, &UcpMap) -> CMatrix| -> CMatrix {
        linalg::block_diagonal(&maps.iter().enumerate().map(|(i, m)| build(i, m)).collect::<Vec<_>>())
    };
    let mut defect_mult = 0.0f64;
    for a in 0..family.len() {
        for b in 0..family.len() {
            let diff = direct_sum(&|i, m| {
                let (f, g) = (&pulled[i][a], &pulled[i][b]);
                m.assemble(&f.mul(g)) - m.assemble(f) * m.assemble(g)
            });
            defect_mult = defect_mult.max(linalg::op_norm(&diff));
        }
    }
    let mut defect_norm = 0.0f64;
    let mut restriction_loss = 0.0f64;
    let mut restriction_bound = 0.0f64;
    for (a, f) in normalized.iter().enumerate() {
        let psi = direct_sum(&|i, m| m.assemble(&pulled[i][a]));
        let sup_x = f.sup_norm();
        defect_norm = defect_norm.max((linalg::op_norm(&psi) - sup_x).abs());
        let sup_y = cover
            .closures
            .iter()
            .zip(&pulled)
            .map(|(ocm, fs)| match ocm.orbit_points() {
                None => fs[a].sup_norm(),
                Some(points) => points.iter().fold(0.0, |m, p| f64::max(m, f.evaluate(p).norm())),
            })
            .fold(0.0, f64::max);
        restriction_loss = restriction_loss.max(sup_x - sup_y);
        restriction_bound = restriction_bound.max(continuity_bound(action, f, cover.achieved_density));
    }
    let defect_equiv = blocks.iter().map(|c| c.defect_equiv).fold(0.0, f64::max);
    let unital_defect = linalg::op_norm(&direct_sum(&|_, m| {
        m.assemble(&BandFunction::constant(m.kernel.band(), linalg::c(1.0))) - linalg::identity(m.dimension())
    }));

    let max_of = |get: fn(&UcpCertificate) -> f64| blocks.iter().map(get).fold(0.0, f64::max);
    let eps_conv = max_of(|c| c.eps_conv);
    let eps_dist = max_of(|c| c.eps_dist);
    let vu_gap = max_of(|c| c.vu_gap);
    let tol_grid = max_of(|c| c.tol_grid);
    let eps_total = eps_conv.max(eps_dist).max(vu_gap);
    let bound_mult = 4.0 * eps_total;
    let bound_norm = 3.0 * eps_total + tol_grid + restriction_bound;
    let bound_equiv = eps_total + 2.0 * eps_dist;
    let bound_vu = 4.0 * eps_dist;
    let floor = tol::NUMERIC_FLOOR;
    let pass = defect_mult <= bound_mult + floor
        && defect_norm <= bound_norm + floor
        && defect_equiv <= bound_equiv + floor
        && vu_gap <= bound_vu + floor
        && restriction_loss <= restriction_bound + floor;

    let mut provenance = blocks[0].provenance.clone();
    provenance.group = blocks.iter().map(|c| c.provenance.group.as_str()).collect::<Vec<_>>().join(" ⊕ ");
    provenance.grid_points = blocks.iter().map(|c| c.provenance.grid_points).sum();
    provenance.equivariance_samples = blocks.iter().map(|c| c.provenance.equivariance_samples).sum();

    let summary = ActionSummary {
        action: action.describe(),
        delta: cover.delta,
        achieved_density: cover.achieved_density,
        restriction_loss,
        restriction_bound,
        orbit_equivariance,
        blocks: cover
            .basepoints
            .iter()
            .zip(&blocks)
            .zip(&maps)
            .map(|((p, c), m)| BlockSummary {
                basepoint: *p,
                group: c.provenance.group.clone(),
                dimension: m.dimension(),
                defect_mult: c.defect_mult,
                defect_equiv: c.defect_equiv,
                defect_norm: c.defect_norm,
                pass: c.pass,
            })
            .collect(),
    };
    let certificate = UcpCertificate {
        id: config.certify.id.clone(),
        epsilon: config.certify.epsilon,
        eps_conv,
        eps_dist,
        vu_gap,
        eps_total,
        tol_grid,
        gram_deviation: max_of(|c| c.gram_deviation),
        defect_mult,
        defect_equiv,
        defect_norm,
        bound_mult,
        bound_equiv,
        bound_norm,
        bound_vu,
        unital_defect,
        adjoint_defect: max_of(|c| c.adjoint_defect),
        positivity_min: blocks.iter().map(|c| c.positivity_min).fold(f64::INFINITY, f64::min),
        normalization: factors,
        equiv_sampled: blocks.iter().any(|c| c.equiv_sampled),
        pass,
        provenance,
        action: Some(summary),
    };
    Ok(ActionCertificate { certificate, blocks, cover })
}

/// How much `|f|` can change over distance `radius`: the Lipschitz bound
/// from the coefficients on a torus, the exact modulus on a finite space.
fn continuity_bound(action: &IsometricAction, f: &SpaceFunction, radius: f64) -> f64 {
    match (action, f) {
        (_, SpaceFunction::Torus(f)) => f.lipschitz_bound() * radius,
        (IsometricAction::FiniteSpace { metric, .. }, SpaceFunction::Finite(v)) => {
            let mut worst = 0.0f64;
            for (x, row) in metric.iter().enumerate() {
                for (y, &d) in row.iter().enumerate() {
                    if d <= radius {
                        worst = worst.max((v[x] - v[y]).norm());
                    }
                }
            }
            worst
        }
        _ => panic!("function does not live on the acted-on space"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ucp::{KernelChoice, PipelineOptions};
    use core::f64::consts::{FRAC_1_SQRT_2, PI};

    fn quarter_turn() -> IsometricAction {
        IsometricAction::rotation(1, alloc::vec![alloc::vec![RotationAngle::Turns { num: 1, den: 4 }]], false).unwrap()
    }

    fn s3_on_triangle() -> IsometricAction {
        let metric = alloc::vec![alloc::vec![0.0, 1.0, 1.0], alloc::vec![1.0, 0.0, 1.0], alloc::vec![1.0, 1.0, 0.0]];
        IsometricAction::finite_space(metric, alloc::vec![alloc::vec![1, 2, 0], alloc::vec![1, 0, 2]]).unwrap()
    }

    #[test]
    fn closures() {
        let dense = IsometricAction::rotation(1, alloc::vec![alloc::vec![RotationAngle::Radians(TAU * FRAC_1_SQRT_2)]], true).unwrap();
        let ocm = orbit_closure(&dense, Point::Torus([0.0, 0.0])).unwrap();
        assert_eq!(ocm.group, CompactGroupModel::torus(1).unwrap());
        assert!(ocm.equivariance_defect(&dense).unwrap() < 1e-12);

        let fifth = IsometricAction::rotation(1, alloc::vec![alloc::vec![RotationAngle::Turns { num: 1, den: 5 }]], false).unwrap();
        let ocm = orbit_closure(&fifth, Point::Torus([0.0, 0.0])).unwrap();
        assert_eq!(ocm.group.order(), Some(5));
        assert!(ocm.equivariance_defect(&fifth).unwrap() < 1e-12);
        assert_eq!(ocm.h(&GroupElement::Finite(2)), Point::Torus([2.0 * TAU / 5.0, 0.0]));

        let s3 = s3_on_triangle();
        let ocm = orbit_closure(&s3, Point::Index(0)).unwrap();
        assert_eq!(ocm.group.order(), Some(6));
        assert!(ocm.equivariance_defect(&s3).unwrap() == 0.0);

        let mixed = IsometricAction::rotation(
            1,
            alloc::vec![alloc::vec![RotationAngle::Turns { num: 1, den: 2 }], alloc::vec![RotationAngle::Turns { num: 2, den: 3 }]],
            false,
        )
        .unwrap();
        assert_eq!(orbit_closure(&mixed, Point::Torus([0.0, 0.0])).unwrap().group.order(), Some(6));
        let unknown = IsometricAction::rotation(1, alloc::vec![alloc::vec![RotationAngle::Radians(1.0)]], false).unwrap();
        assert!(matches!(orbit_closure(&unknown, Point::Torus([0.0, 0.0])), Err(Error::ClosureUndetermined)));
    }

    #[test]
    fn pullbacks() {
        let fifth = IsometricAction::rotation(1, alloc::vec![alloc::vec![RotationAngle::Turns { num: 1, den: 5 }]], false).unwrap();
        let ocm = orbit_closure(&fifth, Point::Torus([0.0, 0.0])).unwrap();
        let f = pullback(&ocm, &SpaceFunction::Torus(BandFunction::exponential(1, [1, 0]))).unwrap();
        for k in 0..5 {
            assert!((f.data()[k] - Complex64::from_polar(1.0, TAU * k as f64 / 5.0)).norm() < 1e-12);
        }
        let s3 = s3_on_triangle();
        let ocm = orbit_closure(&s3, Point::Index(1)).unwrap();
        let one = pullback(&ocm, &SpaceFunction::Finite(alloc::vec![linalg::c(1.0); 3])).unwrap();
        assert!(one.data().iter().all(|v| *v == linalg::c(1.0)));
        let shifted = orbit_closure(
            &IsometricAction::rotation(1, alloc::vec![alloc::vec![RotationAngle::Radians(1.0)]], true).unwrap(),
            Point::Torus([0.5, 0.0]),
        )
        .unwrap();
        let g = pullback(&shifted, &SpaceFunction::Torus(BandFunction::exponential(1, [2, 0]))).unwrap();
        let v = g.evaluate(&GroupElement::angle(0.25));
        assert!((v - Complex64::from_polar(1.0, 1.5)).norm() < 1e-12);
    }

    #[test]
    fn quarter_turn_needs_two_orbits() {
        let cover = select_dense_orbits(&quarter_turn(), 0.5, 64).unwrap();
        assert_eq!(cover.basepoints.len(), 2);
        assert_eq!(cover.basepoints[1], Point::Torus([PI / 4.0, 0.0]));
        assert!((cover.achieved_density - PI / 8.0).abs() < 1e-12);
        let one = select_dense_orbits(&quarter_turn(), 4.0, 64).unwrap();
        assert_eq!(one.basepoints.len(), 1);
    }

    #[test]
    fn finite_space_certificate_is_exact() {
        let config = ActionConfig {
            certify: CertifyConfig {
                id: "s3".into(),
                epsilon: 0.1,
                kernel: KernelChoice::Delta,
                options: PipelineOptions::default(),
            },
            delta: 0.5,
            probe_resolution: 8,
        };
        let f = SpaceFunction::Finite(alloc::vec![linalg::c(1.0), Complex64::new(0.0, 0.5), linalg::c(-0.25)]);
        let cert = certify_action(&s3_on_triangle(), &[f], &config).unwrap();
        let c = &cert.certificate;
        assert!(c.pass);
        assert!(c.defect_mult < 1e-10 && c.defect_equiv < 1e-10 && c.defect_norm < 1e-10);
        assert_eq!(c.action.as_ref().unwrap().blocks[0].dimension, 6);
    }
}
