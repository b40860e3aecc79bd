//! Compact group models: finite groups given by a multiplication table and
//! the tori `T^1`, `T^2`, each with an exact normalized Haar quadrature.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use num_complex::Complex64;

use crate::{Error, Result};

/// Reduce an angle into `[0, 2π)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = libm::fmod(theta, TAU);
    let r = if r < 0.0 { r + TAU } else { r };
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Geodesic distance between two angles on the circle.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = reduce_angle(a - b);
    if d > TAU - d {
        TAU - d
    } else {
        d
    }
}

/// An element of a [`CompactGroupModel`].
///
/// Torus elements always carry two angles; the second is zero on `T^1`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GroupElement {
    Finite(usize),
    Torus([f64; 2]),
}

impl GroupElement {
    pub fn index(i: usize) -> Self {
        GroupElement::Finite(i)
    }

    pub fn angle(theta: f64) -> Self {
        GroupElement::Torus([reduce_angle(theta), 0.0])
    }

    pub fn angles(a: f64, b: f64) -> Self {
        GroupElement::Torus([reduce_angle(a), reduce_angle(b)])
    }

    pub fn as_index(&self) -> Option<usize> {
        match *self {
            GroupElement::Finite(i) => Some(i),
            GroupElement::Torus(_) => None,
        }
    }

    pub fn as_angles(&self) -> Option<[f64; 2]> {
        match *self {
            GroupElement::Torus(a) => Some(a),
            GroupElement::Finite(_) => None,
        }
    }
}

/// The group axiom a candidate multiplication table violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupAxiom {
    Empty,
    NotSquare { row: usize },
    EntryOutOfRange { row: usize, col: usize },
    /// Element 0 is not a two-sided identity.
    IdentityNotFirst { element: usize },
    RowNotPermutation { row: usize },
    ColumnNotPermutation { col: usize },
    NotAssociative { a: usize, b: usize, c: usize },
}

impl fmt::Display for GroupAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GroupAxiom::Empty => write!(f, "empty table"),
            GroupAxiom::NotSquare { row } => write!(f, "row {row} has the wrong length"),
            GroupAxiom::EntryOutOfRange { row, col } => {
                write!(f, "entry ({row}, {col}) is not an element index")
            }
            GroupAxiom::IdentityNotFirst { element } => {
                write!(f, "element 0 is not an identity for element {element}")
            }
            GroupAxiom::RowNotPermutation { row } => write!(f, "row {row} is not a permutation"),
            GroupAxiom::ColumnNotPermutation { col } => {
                write!(f, "column {col} is not a permutation")
            }
            GroupAxiom::NotAssociative { a, b, c } => {
                write!(f, "({a}·{b})·{c} differs from {a}·({b}·{c})")
            }
        }
    }
}

/// A finite group with identity at index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Validate a multiplication table: `table[a][b]` is the index of `a·b`.
    pub fn from_table(table: &[Vec<usize>]) -> Result<Self> {
        let order = table.len();
        if order == 0 {
            return Err(Error::NotAGroup(GroupAxiom::Empty));
        }
        for (row, entries) in table.iter().enumerate() {
            if entries.len() != order {
                return Err(Error::NotAGroup(GroupAxiom::NotSquare { row }));
            }
            if let Some(col) = entries.iter().position(|&x| x >= order) {
                return Err(Error::NotAGroup(GroupAxiom::EntryOutOfRange { row, col }));
            }
        }
        for g in 0..order {
            if table[0][g] != g || table[g][0] != g {
                return Err(Error::NotAGroup(GroupAxiom::IdentityNotFirst { element: g }));
            }
        }
        let mut seen = vec![false; order];
        for row in 0..order {
            seen.iter_mut().for_each(|s| *s = false);
            for &x in &table[row] {
                if core::mem::replace(&mut seen[x], true) {
                    return Err(Error::NotAGroup(GroupAxiom::RowNotPermutation { row }));
                }
            }
        }
        for col in 0..order {
            seen.iter_mut().for_each(|s| *s = false);
            for row in table {
                if core::mem::replace(&mut seen[row[col]], true) {
                    return Err(Error::NotAGroup(GroupAxiom::ColumnNotPermutation { col }));
                }
            }
        }
        for a in 0..order {
            for b in 0..order {
                let ab = table[a][b];
                for c in 0..order {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(Error::NotAGroup(GroupAxiom::NotAssociative { a, b, c }));
                    }
                }
            }
        }
        let flat: Vec<usize> = table.iter().flatten().copied().collect();
        Ok(Self::from_flat_unchecked(order, flat))
    }

    /// Caller guarantees the table is a group with identity 0 (e.g. it was
    /// produced by composing permutations).
    pub(crate) fn from_flat_unchecked(order: usize, table: Vec<usize>) -> Self {
        let inverses = (0..order)
            .map(|a| {
                (0..order)
                    .find(|&b| table[a * order + b] == 0)
                    .expect("every group element has an inverse")
            })
            .collect();
        Self { order, table, inverses }
    }

    /// `Z/n` with `a·b = (a + b) mod n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NotAGroup(GroupAxiom::Empty));
        }
        let table = (0..n * n).map(|i| (i / n + i % n) % n).collect();
        Ok(Self::from_flat_unchecked(n, table))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn multiply(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// The table as rows, in the same layout [`FiniteGroup::from_table`] reads.
    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(|r| r.to_vec()).collect()
    }
}

/// A concrete compact group.
#[derive(Clone, Debug, PartialEq)]
pub enum CompactGroupModel {
    Finite(FiniteGroup),
    /// `T^dim` with `dim ∈ {1, 2}`.
    Torus { dim: usize },
}

impl CompactGroupModel {
    /// Build a finite group from its multiplication table.
    pub fn finite(table: &[Vec<usize>]) -> Result<Self> {
        FiniteGroup::from_table(table).map(CompactGroupModel::Finite)
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        FiniteGroup::cyclic(n).map(CompactGroupModel::Finite)
    }

    pub fn torus(dim: usize) -> Result<Self> {
        match dim {
            1 | 2 => Ok(CompactGroupModel::Torus { dim }),
            _ => Err(Error::InvalidArgument("torus dimension must be 1 or 2")),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, CompactGroupModel::Finite(_))
    }

    pub fn order(&self) -> Option<usize> {
        match self {
            CompactGroupModel::Finite(g) => Some(g.order()),
            CompactGroupModel::Torus { .. } => None,
        }
    }

    pub fn torus_dim(&self) -> Option<usize> {
        match *self {
            CompactGroupModel::Torus { dim } => Some(dim),
            CompactGroupModel::Finite(_) => None,
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            CompactGroupModel::Finite(_) => GroupElement::Finite(0),
            CompactGroupModel::Torus { .. } => GroupElement::Torus([0.0, 0.0]),
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (CompactGroupModel::Finite(fg), GroupElement::Finite(i)) => *i < fg.order(),
            (CompactGroupModel::Torus { dim }, GroupElement::Torus(a)) => {
                a.iter().all(|x| (0.0..TAU).contains(x)) && (*dim == 2 || a[1] == 0.0)
            }
            _ => false,
        }
    }

    /// # Panics
    /// If either element belongs to a different kind of group.
    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match (self, a, b) {
            (CompactGroupModel::Finite(g), GroupElement::Finite(x), GroupElement::Finite(y)) => {
                GroupElement::Finite(g.multiply(*x, *y))
            }
            (CompactGroupModel::Torus { .. }, GroupElement::Torus(x), GroupElement::Torus(y)) => {
                GroupElement::Torus([reduce_angle(x[0] + y[0]), reduce_angle(x[1] + y[1])])
            }
            _ => panic!("group element does not belong to this group"),
        }
    }

    /// # Panics
    /// If the element belongs to a different kind of group.
    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        match (self, a) {
            (CompactGroupModel::Finite(g), GroupElement::Finite(x)) => {
                GroupElement::Finite(g.inverse(*x))
            }
            (CompactGroupModel::Torus { .. }, GroupElement::Torus(x)) => {
                GroupElement::Torus([reduce_angle(-x[0]), reduce_angle(-x[1])])
            }
            _ => panic!("group element does not belong to this group"),
        }
    }

    /// Short human-readable description, used in certificate provenance.
    pub fn describe(&self) -> alloc::string::String {
        match self {
            CompactGroupModel::Finite(g) => alloc::format!("finite(order={})", g.order()),
            CompactGroupModel::Torus { dim } => alloc::format!("torus(dim={dim})"),
        }
    }
}

/// Nodes and non-negative weights approximating normalized Haar measure.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureScheme {
    pub nodes: Vec<GroupElement>,
    pub weights: Vec<f64>,
    /// Points per torus dimension; `None` for the exact finite rule.
    pub resolution: Option<usize>,
}

impl QuadratureScheme {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(&GroupElement) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(Complex64::new(0.0, 0.0), |acc, (g, &w)| acc + f(g) * w)
    }
}

/// Normalized Haar quadrature: every element with weight `1/order` on a
/// finite group (exact; `resolution` is ignored), or the uniform product
/// lattice with `resolution^dim` nodes on a torus.
pub fn haar_quadrature(group: &CompactGroupModel, resolution: usize) -> Result<QuadratureScheme> {
    if resolution == 0 {
        return Err(Error::InvalidArgument("quadrature resolution must be at least 1"));
    }
    Ok(match group {
        CompactGroupModel::Finite(g) => {
            let n = g.order();
            QuadratureScheme {
                nodes: (0..n).map(GroupElement::Finite).collect(),
                weights: vec![1.0 / n as f64; n],
                resolution: None,
            }
        }
        CompactGroupModel::Torus { dim } => {
            let step = TAU / resolution as f64;
            let count = resolution.pow(*dim as u32);
            let nodes = (0..count)
                .map(|i| {
                    if *dim == 1 {
                        GroupElement::Torus([step * i as f64, 0.0])
                    } else {
                        GroupElement::Torus([
                            step * (i / resolution) as f64,
                            step * (i % resolution) as f64,
                        ])
                    }
                })
                .collect();
            QuadratureScheme {
                nodes,
                weights: vec![1.0 / count as f64; count],
                resolution: Some(resolution),
            }
        }
    })
}
