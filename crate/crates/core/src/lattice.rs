//! Geometry of Z², its dual lattice, boxes and cones.
//!
//! Dual points live at half-integer coordinates. They are stored doubled
//! (`2x`, `2y`) so that every dual-lattice computation is integer exact.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Site {
    pub x: i64,
    pub y: i64,
}

impl Site {
    pub const fn new(x: i64, y: i64) -> Self {
        Site { x, y }
    }

    pub fn l1(self) -> i64 {
        self.x.abs() + self.y.abs()
    }

    /// The four nearest neighbours in E, N, W, S order.
    pub fn neighbors(self) -> [Site; 4] {
        Dir::ALL.map(|d| self + d.delta())
    }
}

impl Add for Site {
    type Output = Site;
    fn add(self, o: Site) -> Site {
        Site::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Site {
    type Output = Site;
    fn sub(self, o: Site) -> Site {
        Site::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Site {
    type Output = Site;
    fn neg(self) -> Site {
        Site::new(-self.x, -self.y)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Unit lattice directions. `R`=east, `U`=north, `L`=west, `D`=south.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    R,
    U,
    L,
    D,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::R, Dir::U, Dir::L, Dir::D];

    pub fn delta(self) -> Site {
        match self {
            Dir::R => Site::new(1, 0),
            Dir::U => Site::new(0, 1),
            Dir::L => Site::new(-1, 0),
            Dir::D => Site::new(0, -1),
        }
    }

    pub fn opposite(self) -> Dir {
        match self {
            Dir::R => Dir::L,
            Dir::U => Dir::D,
            Dir::L => Dir::R,
            Dir::D => Dir::U,
        }
    }

    pub fn from_delta(dx: i64, dy: i64) -> Option<Dir> {
        match (dx, dy) {
            (1, 0) => Some(Dir::R),
            (0, 1) => Some(Dir::U),
            (-1, 0) => Some(Dir::L),
            (0, -1) => Some(Dir::D),
            _ => None,
        }
    }

    pub fn is_vertical(self) -> bool {
        matches!(self, Dir::U | Dir::D)
    }

    /// Group of the northeast splitting rule: {N, W} pair together, as do {E, S}.
    pub fn ne_group(self) -> u8 {
        match self {
            Dir::U | Dir::L => 0,
            Dir::R | Dir::D => 1,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Dir::R => 'R',
            Dir::U => 'U',
            Dir::L => 'L',
            Dir::D => 'D',
        }
    }

    pub fn from_letter(c: char) -> Option<Dir> {
        match c.to_ascii_uppercase() {
            'R' | 'E' => Some(Dir::R),
            'U' | 'N' => Some(Dir::U),
            'L' | 'W' => Some(Dir::L),
            'D' | 'S' => Some(Dir::D),
            _ => None,
        }
    }
}

/// A point of (Z²)* = Z² + (½,½), stored as doubled coordinates (both odd).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualPoint {
    pub x2: i64,
    pub y2: i64,
}

impl DualPoint {
    pub fn from_doubled(x2: i64, y2: i64) -> Result<Self> {
        if x2.rem_euclid(2) != 1 || y2.rem_euclid(2) != 1 {
            return Err(Error::Invalid(format!(
                "doubled dual coordinates must be odd, got ({x2}, {y2})"
            )));
        }
        Ok(DualPoint { x2, y2 })
    }

    /// Dual point with real coordinates `(x, y)`; both must be half-integers.
    pub fn from_f64(x: f64, y: f64) -> Result<Self> {
        let (x2, y2) = (2.0 * x, 2.0 * y);
        if x2.fract() != 0.0 || y2.fract() != 0.0 || !x2.is_finite() || !y2.is_finite() {
            return Err(Error::Invalid(format!("({x}, {y}) is not a dual point")));
        }
        Self::from_doubled(x2 as i64, y2 as i64)
    }

    /// The dual point `s + (½,½)`.
    pub fn above_right_of(s: Site) -> Self {
        DualPoint {
            x2: 2 * s.x + 1,
            y2: 2 * s.y + 1,
        }
    }

    pub fn x(self) -> f64 {
        self.x2 as f64 / 2.0
    }

    pub fn y(self) -> f64 {
        self.y2 as f64 / 2.0
    }

    pub fn step(self, d: Dir) -> Self {
        let v = d.delta();
        DualPoint {
            x2: self.x2 + 2 * v.x,
            y2: self.y2 + 2 * v.y,
        }
    }

    /// Direction from `self` to the adjacent dual point `other`.
    pub fn dir_to(self, other: DualPoint) -> Option<Dir> {
        let dx = other.x2 - self.x2;
        let dy = other.y2 - self.y2;
        if dx % 2 != 0 || dy % 2 != 0 {
            return None;
        }
        Dir::from_delta(dx / 2, dy / 2)
    }
}

/// ι: the translation sending 𝗈* = (½,½) to the origin.
pub fn dual_origin_map(p: DualPoint) -> Site {
    Site::new((p.x2 - 1) / 2, (p.y2 - 1) / 2)
}

/// Inverse of [`dual_origin_map`].
pub fn dual_origin_unmap(s: Site) -> DualPoint {
    DualPoint::above_right_of(s)
}

/// A bond of the dual lattice between two dual points at unit distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualBond {
    pub a: DualPoint,
    pub b: DualPoint,
}

impl DualBond {
    pub fn new(a: DualPoint, b: DualPoint) -> Result<Self> {
        if a.dir_to(b).is_none() {
            return Err(Error::Invalid(format!(
                "dual bond endpoints not adjacent: ({}, {}) -> ({}, {})",
                a.x(),
                a.y(),
                b.x(),
                b.y()
            )));
        }
        Ok(DualBond { a, b })
    }

    /// Orientation-free key (endpoints sorted).
    pub fn unoriented(self) -> (DualPoint, DualPoint) {
        if self.a <= self.b {
            (self.a, self.b)
        } else {
            (self.b, self.a)
        }
    }

    /// Midpoint in doubled coordinates, which is also the midpoint of the
    /// primal edge this bond crosses.
    pub fn midpoint2(self) -> (i64, i64) {
        ((self.a.x2 + self.b.x2) / 2, (self.a.y2 + self.b.y2) / 2)
    }
}

/// Axis-aligned box of sites `origin.x .. origin.x+width-1` × `origin.y .. origin.y+height-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeBox {
    pub origin: Site,
    pub width: i64,
    pub height: i64,
}

impl LatticeBox {
    pub fn new(origin: Site, width: i64, height: i64) -> Result<Self> {
        if width < 1 || height < 1 {
            return Err(Error::Invalid(format!(
                "box dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(LatticeBox {
            origin,
            width,
            height,
        })
    }

    /// The box ⟦1,w⟧ × ⟦1,h⟧.
    pub fn unit_origin(width: i64, height: i64) -> Result<Self> {
        Self::new(Site::new(1, 1), width, height)
    }

    pub fn len(&self) -> usize {
        (self.width * self.height) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, s: Site) -> bool {
        s.x >= self.origin.x
            && s.y >= self.origin.y
            && s.x < self.origin.x + self.width
            && s.y < self.origin.y + self.height
    }

    /// Raster index (row-major, bottom row first).
    pub fn index(&self, s: Site) -> Option<usize> {
        if !self.contains(s) {
            return None;
        }
        Some(((s.y - self.origin.y) * self.width + (s.x - self.origin.x)) as usize)
    }

    pub fn site(&self, idx: usize) -> Site {
        let i = idx as i64;
        Site::new(self.origin.x + i % self.width, self.origin.y + i / self.width)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.len()).map(move |i| self.site(i))
    }

    /// Sites outside the box adjacent to it (the outer ring without corners).
    pub fn exterior_boundary(&self) -> Vec<Site> {
        let (x0, y0) = (self.origin.x, self.origin.y);
        let (x1, y1) = (x0 + self.width - 1, y0 + self.height - 1);
        let mut v = Vec::with_capacity(2 * (self.width + self.height) as usize);
        for x in x0..=x1 {
            v.push(Site::new(x, y0 - 1));
        }
        for x in x0..=x1 {
            v.push(Site::new(x, y1 + 1));
        }
        for y in y0..=y1 {
            v.push(Site::new(x0 - 1, y));
        }
        for y in y0..=y1 {
            v.push(Site::new(x1 + 1, y));
        }
        v
    }
}

/// Exact non-negative rational number `num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den <= 0 || num < 0 {
            return Err(Error::Invalid(format!("bad rational {num}/{den}")));
        }
        Ok(Rational { num, den })
    }

    pub const ONE: Rational = Rational { num: 1, den: 1 };

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConeKind {
    Forward,
    Backward,
}

/// The cone {(x,y): |y| ≤ δx} (forward) or its negation image (backward).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cone {
    pub kind: ConeKind,
    pub delta: Rational,
}

impl Cone {
    pub fn new(kind: ConeKind, delta: Rational) -> Result<Self> {
        if delta.num == 0 || delta.num > delta.den {
            return Err(Error::Invalid(format!(
                "aperture must lie in (0,1], got {}/{}",
                delta.num, delta.den
            )));
        }
        Ok(Cone { kind, delta })
    }

    pub const FORWARD: Cone = Cone {
        kind: ConeKind::Forward,
        delta: Rational::ONE,
    };

    pub const BACKWARD: Cone = Cone {
        kind: ConeKind::Backward,
        delta: Rational::ONE,
    };

    /// Membership of the displacement `(dx, dy)`; works for any integer scale.
    #[inline]
    pub fn contains_delta(&self, dx: i64, dy: i64) -> bool {
        let dx = match self.kind {
            ConeKind::Forward => dx,
            ConeKind::Backward => -dx,
        };
        (dy.abs() as i128) * (self.delta.den as i128) <= (dx as i128) * (self.delta.num as i128)
    }
}

pub fn in_cone(apex: Site, p: Site, cone: &Cone) -> bool {
    cone.contains_delta(p.x - apex.x, p.y - apex.y)
}

/// Translation by a lattice vector.
pub trait Translate {
    fn translate(&self, v: Site) -> Self;
}

impl Translate for Site {
    fn translate(&self, v: Site) -> Self {
        *self + v
    }
}

impl Translate for DualPoint {
    fn translate(&self, v: Site) -> Self {
        DualPoint {
            x2: self.x2 + 2 * v.x,
            y2: self.y2 + 2 * v.y,
        }
    }
}

impl Translate for DualBond {
    fn translate(&self, v: Site) -> Self {
        DualBond {
            a: self.a.translate(v),
            b: self.b.translate(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_examples() {
        let o = Site::new(0, 0);
        assert!(in_cone(o, Site::new(1, 0), &Cone::FORWARD));
        assert!(!in_cone(o, Site::new(1, 2), &Cone::FORWARD));
        let half = Cone::new(ConeKind::Forward, Rational::new(1, 2).unwrap()).unwrap();
        assert!(in_cone(o, Site::new(2, 1), &half));
        assert!(!in_cone(o, Site::new(1, 1), &half));
        assert!(in_cone(o, Site::new(-3, 2), &Cone::BACKWARD));
        assert!(in_cone(o, o, &Cone::FORWARD) && in_cone(o, o, &Cone::BACKWARD));
    }

    #[test]
    fn bad_apertures() {
        assert!(Cone::new(ConeKind::Forward, Rational::new(0, 1).unwrap()).is_err());
        assert!(Cone::new(ConeKind::Forward, Rational::new(3, 2).unwrap()).is_err());
        assert!(Rational::new(1, 0).is_err());
    }

    #[test]
    fn translations() {
        assert_eq!(Site::new(1, 2).translate(Site::new(3, -1)), Site::new(4, 1));
        let b = DualBond::new(
            DualPoint::from_f64(0.5, 0.5).unwrap(),
            DualPoint::from_f64(1.5, 0.5).unwrap(),
        )
        .unwrap();
        let v = Site::new(-4, 7);
        assert_eq!(b.translate(v).translate(-v), b);
    }

    #[test]
    fn iota() {
        let p = DualPoint::from_f64(0.5, 0.5).unwrap();
        assert_eq!(dual_origin_map(p), Site::new(0, 0));
        let q = DualPoint::from_f64(1.5, 0.5).unwrap();
        assert_eq!(dual_origin_map(q), Site::new(1, 0));
        let r = DualPoint::from_f64(-2.5, 7.5).unwrap();
        assert_eq!(dual_origin_unmap(dual_origin_map(r)), r);
        assert!(DualPoint::from_f64(1.0, 0.5).is_err());
        assert!(DualPoint::from_doubled(2, 1).is_err());
    }

    #[test]
    fn bonds_require_adjacency() {
        let a = DualPoint::from_doubled(1, 1).unwrap();
        assert!(DualBond::new(a, DualPoint::from_doubled(5, 1).unwrap()).is_err());
        assert!(DualBond::new(a, DualPoint::from_doubled(1, 3).unwrap()).is_ok());
    }

    #[test]
    fn box_indexing() {
        let b = LatticeBox::unit_origin(3, 2).unwrap();
        for i in 0..b.len() {
            assert_eq!(b.index(b.site(i)), Some(i));
        }
        assert_eq!(b.exterior_boundary().len(), 10);
        assert!(LatticeBox::unit_origin(0, 2).is_err());
    }
}
