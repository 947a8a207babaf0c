//! Level lines of height functions on the dual lattice.
//!
//! A dual bond is placed across every primal edge `x∼y` with `φx < h ≤ φy`
//! (at least one endpoint interior) and oriented so that the side `≥ h` lies
//! on its left. Where two contours meet at a dual vertex they are split by
//! the northeast rule: the edge pointing north pairs with the one pointing
//! west, east with south.

use crate::error::{Error, Result};
use crate::lattice::{Dir, DualBond, DualPoint, LatticeBox, Site, Translate};
use crate::sos::HeightField;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

/// An oriented dual-lattice path. For closed contours the last vertex equals the first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Contour {
    vertices: Vec<DualPoint>,
    closed: bool,
}

impl Contour {
    pub fn from_vertices(vertices: Vec<DualPoint>, closed: bool) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Invalid("contour needs at least one bond".into()));
        }
        for w in vertices.windows(2) {
            if w[0].dir_to(w[1]).is_none() {
                return Err(Error::Invalid("consecutive contour vertices not adjacent".into()));
            }
        }
        if closed && vertices.first() != vertices.last() {
            return Err(Error::Invalid("closed contour must return to its start".into()));
        }
        let mut seen = HashSet::new();
        for w in vertices.windows(2) {
            if !seen.insert(DualBond { a: w[0], b: w[1] }.unoriented()) {
                return Err(Error::Invalid("contour repeats a bond".into()));
            }
        }
        Ok(Contour { vertices, closed })
    }

    /// Path from `start` following a word of unit steps.
    pub fn from_steps(start: DualPoint, steps: &[Dir]) -> Result<Self> {
        let mut v = vec![start];
        for &d in steps {
            v.push(v.last().unwrap().step(d));
        }
        let closed = v.len() > 1 && v.first() == v.last();
        Self::from_vertices(v, closed)
    }

    pub fn vertices(&self) -> &[DualPoint] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Number of bonds |γ|.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> DualPoint {
        self.vertices[0]
    }

    pub fn end(&self) -> DualPoint {
        *self.vertices.last().unwrap()
    }

    pub fn bonds(&self) -> Vec<DualBond> {
        self.vertices.windows(2).map(|w| DualBond { a: w[0], b: w[1] }).collect()
    }

    pub fn steps(&self) -> Vec<Dir> {
        self.vertices.windows(2).map(|w| w[0].dir_to(w[1]).unwrap()).collect()
    }

    /// Primal edges crossed, keyed by doubled midpoint.
    pub fn crossed_edges(&self) -> HashSet<(i64, i64)> {
        self.bonds().into_iter().map(|b| b.midpoint2()).collect()
    }

    /// Whether a site lies inside a closed contour (even–odd rule with a ray to +x).
    pub fn encloses(&self, s: Site) -> bool {
        if !self.closed {
            return false;
        }
        let (sx2, sy2) = (2 * s.x, 2 * s.y);
        let mut crossings = 0;
        for w in self.vertices.windows(2) {
            if w[0].x2 == w[1].x2 && w[0].x2 > sx2 {
                let (lo, hi) = (w[0].y2.min(w[1].y2), w[0].y2.max(w[1].y2));
                if lo < sy2 && sy2 < hi {
                    crossings += 1;
                }
            }
        }
        crossings % 2 == 1
    }

    /// Length at least (log L)².
    pub fn is_macroscopic(&self, l: f64) -> bool {
        self.len() as f64 >= l.ln().powi(2)
    }

    /// One line per bond: `x1 y1 x2 y2` in doubled coordinates.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for b in self.bonds() {
            let _ = writeln!(s, "{} {} {} {}", b.a.x2, b.a.y2, b.b.x2, b.b.y2);
        }
        s
    }

    pub fn deserialize(text: &str) -> Result<Self> {
        let mut verts: Vec<DualPoint> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let nums: Vec<i64> = line
                .split_whitespace()
                .map(|t| t.parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Invalid(format!("line {}: {e}", ln + 1)))?;
            if nums.len() != 4 {
                return Err(Error::Invalid(format!("line {}: expected 4 integers", ln + 1)));
            }
            let a = DualPoint::from_doubled(nums[0], nums[1])?;
            let b = DualPoint::from_doubled(nums[2], nums[3])?;
            DualBond::new(a, b)?;
            match verts.last() {
                None => verts.extend([a, b]),
                Some(&last) if last == a => verts.push(b),
                Some(_) => return Err(Error::Invalid(format!("line {}: bond does not continue path", ln + 1))),
            }
        }
        let closed = verts.len() > 1 && verts.first() == verts.last();
        Self::from_vertices(verts, closed)
    }
}

impl Translate for Contour {
    fn translate(&self, v: Site) -> Self {
        Contour {
            vertices: self.vertices.iter().map(|p| p.translate(v)).collect(),
            closed: self.closed,
        }
    }
}

/// Oriented separating bonds of level `h`, in raster order of their low site.
pub fn separating_bonds(field: &HeightField, h: i64) -> Vec<DualBond> {
    let bx = field.bx();
    let mut out = Vec::new();
    let x0 = bx.origin.x - 1;
    let y0 = bx.origin.y - 1;
    // Every primal edge with at least one interior endpoint, once.
    for y in y0..=bx.origin.y + bx.height {
        for x in x0..=bx.origin.x + bx.width {
            let s = Site::new(x, y);
            for e in [Site::new(1, 0), Site::new(0, 1)] {
                let t = s + e;
                if !bx.contains(s) && !bx.contains(t) {
                    continue;
                }
                let (hs, ht) = (field.height(s), field.height(t));
                let (low, dir) = if hs < h && ht >= h {
                    (s, e)
                } else if ht < h && hs >= h {
                    (t, -e)
                } else {
                    continue;
                };
                // Travel direction d with the high site on the left.
                let d = Site::new(dir.y, -dir.x);
                let m = Site::new(2 * low.x + dir.x, 2 * low.y + dir.y);
                out.push(DualBond {
                    a: DualPoint {
                        x2: m.x - d.x,
                        y2: m.y - d.y,
                    },
                    b: DualPoint {
                        x2: m.x + d.x,
                        y2: m.y + d.y,
                    },
                });
            }
        }
    }
    out
}

/// Decompose a set of oriented bonds into contours using the northeast rule.
pub fn link_bonds(bonds: &[DualBond]) -> Vec<Contour> {
    // Per vertex: incoming and outgoing bond indices.
    let mut ins: HashMap<DualPoint, Vec<usize>> = HashMap::new();
    let mut outs: HashMap<DualPoint, Vec<usize>> = HashMap::new();
    for (i, b) in bonds.iter().enumerate() {
        outs.entry(b.a).or_default().push(i);
        ins.entry(b.b).or_default().push(i);
    }
    let side_out = |i: usize| bonds[i].a.dir_to(bonds[i].b).unwrap();
    let side_in = |i: usize| bonds[i].a.dir_to(bonds[i].b).unwrap().opposite();
    // next[i] = bond following i.
    let mut next: Vec<Option<usize>> = vec![None; bonds.len()];
    let mut has_prev = vec![false; bonds.len()];
    let mut verts: Vec<&DualPoint> = ins.keys().collect();
    verts.sort();
    for v in verts {
        let vin = &ins[v];
        let vout = outs.get(v).map(|x| x.as_slice()).unwrap_or(&[]);
        if vin.len() == 1 && vout.len() == 1 {
            next[vin[0]] = Some(vout[0]);
            has_prev[vout[0]] = true;
            continue;
        }
        for &i in vin {
            let g = side_in(i).ne_group();
            if let Some(&o) = vout.iter().find(|&&o| side_out(o).ne_group() == g && !has_prev[o]) {
                next[i] = Some(o);
                has_prev[o] = true;
            }
        }
    }
    let mut used = vec![false; bonds.len()];
    let mut out = Vec::new();
    let trace = |start: usize, used: &mut Vec<bool>| -> Vec<DualPoint> {
        let mut vs = vec![bonds[start].a];
        let mut cur = Some(start);
        while let Some(i) = cur {
            if used[i] {
                break;
            }
            used[i] = true;
            vs.push(bonds[i].b);
            cur = next[i];
        }
        vs
    };
    // Open contours start at bonds without predecessor.
    let mut starts: Vec<usize> = (0..bonds.len()).filter(|&i| !has_prev[i]).collect();
    starts.sort_by_key(|&i| bonds[i]);
    for i in starts {
        let vs = trace(i, &mut used);
        out.push(Contour {
            vertices: vs,
            closed: false,
        });
    }
    let mut rest: Vec<usize> = (0..bonds.len()).filter(|&i| !used[i]).collect();
    rest.sort_by_key(|&i| bonds[i]);
    for i in rest {
        if used[i] {
            continue;
        }
        let vs = trace(i, &mut used);
        let closed = vs.first() == vs.last();
        out.push(Contour { vertices: vs, closed });
    }
    out
}

/// All level-`h` contours of a field (open and closed).
pub fn extract_level_lines(field: &HeightField, h: i64) -> Result<Vec<Contour>> {
    if field.floor() && h < 1 {
        return Err(Error::Invalid("level must be ≥ 1 with a floor".into()));
    }
    Ok(link_bonds(&separating_bonds(field, h)))
}

/// The unique open contour at level `h`.
pub fn open_one_contour(field: &HeightField, h: i64) -> Result<Contour> {
    let lines = extract_level_lines(field, h)?;
    let open: Vec<Contour> = lines.into_iter().filter(|c| !c.closed).collect();
    if open.len() != 1 {
        return Err(Error::Ambiguity(open.len()));
    }
    Ok(open.into_iter().next().unwrap())
}

/// Per-column vertical extent of a contour.
///
/// A vertex with doubled coordinates `(X, Y)` belongs to column `⌊X/2⌋`
/// (the column `x` with `X/2 ∈ [x, x+1)`) and has displacement `⌊Y/2⌋`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementProfile {
    pub x_range: (i64, i64),
    pub rho_min: BTreeMap<i64, i64>,
    pub rho_max: BTreeMap<i64, i64>,
}

impl DisplacementProfile {
    /// min ρ̲ over columns in `[a, b]` that the contour visits.
    pub fn min_over(&self, a: i64, b: i64) -> Option<i64> {
        self.rho_min.range(a..=b).map(|(_, &v)| v).min()
    }

    pub fn max_over(&self, a: i64, b: i64) -> Option<i64> {
        self.rho_max.range(a..=b).map(|(_, &v)| v).max()
    }
}

pub fn displacement_profile(c: &Contour) -> DisplacementProfile {
    let mut rho_min = BTreeMap::new();
    let mut rho_max = BTreeMap::new();
    for p in c.vertices() {
        let x = p.x2.div_euclid(2);
        let y = p.y2.div_euclid(2);
        rho_min.entry(x).and_modify(|v: &mut i64| *v = (*v).min(y)).or_insert(y);
        rho_max.entry(x).and_modify(|v: &mut i64| *v = (*v).max(y)).or_insert(y);
    }
    let x_range = (*rho_min.keys().next().unwrap(), *rho_min.keys().last().unwrap());
    DisplacementProfile {
        x_range,
        rho_min,
        rho_max,
    }
}

/// Number of interior sites reachable from the bottom boundary row without
/// crossing a bond of `c`: the area under an open contour.
pub fn area_below(c: &Contour, bx: &LatticeBox) -> u64 {
    let blocked = c.crossed_edges();
    let by = bx.origin.y - 1;
    let allowed = |s: Site| bx.contains(s) || (s.y == by && s.x >= bx.origin.x && s.x < bx.origin.x + bx.width);
    let mut seen: HashSet<Site> = HashSet::new();
    let mut q: VecDeque<Site> = (0..bx.width).map(|i| Site::new(bx.origin.x + i, by)).collect();
    seen.extend(q.iter().cloned());
    let mut area = 0u64;
    while let Some(s) = q.pop_front() {
        if bx.contains(s) {
            area += 1;
        }
        for t in s.neighbors() {
            if !allowed(t) || seen.contains(&t) {
                continue;
            }
            if blocked.contains(&(s.x + t.x, s.y + t.y)) {
                continue;
            }
            seen.insert(t);
            q.push_back(t);
        }
    }
    area
}
