//! Ising polymers: contours from the origin weighted by `e^{−β|γ|}` and
//! cluster decorations.
//!
//! Geometry in this module is in the translated frame where 𝗈* is the
//! origin: contour vertices are sites of Z², and a cluster is a set of unit
//! plaquettes, each named by its lower-left corner. The plaquette with
//! corner `c` corresponds to the SOS site `c + (1,1)` of the untranslated
//! lattice.

pub mod decoration;
pub mod path;
pub mod tension;
pub mod weights;

pub use decoration::{Decoration, DecorationKind};
pub use path::{enumerate_paths, Path, Tracker};
pub use tension::{line_sums, in_oracle_wedge, TENSION_SLACK, 
    dual_tilt, surface_tension, ColumnOracle, SurfaceTensionRow, SurfaceTensionTable, WulffShape,
};
pub use weights::{
    animal_weight, c_beta, free_weight, modified_weight, partition_function, positive_transform, Animal,
    PartitionResult, PositiveDecoration, WeightReport, Weighting,
};

use crate::lattice::{Dir, Site};
use crate::sos::Cluster;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Region used for contour constraints and decoration modifications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Plane,
    /// Closed upper half-plane `y ≥ 0`.
    HalfPlane,
    /// The square `[0,n]²`.
    Square(i64),
}

impl Domain {
    pub fn contains_vertex(&self, s: Site) -> bool {
        match *self {
            Domain::Plane => true,
            Domain::HalfPlane => s.y >= 0,
            Domain::Square(n) => s.x >= 0 && s.y >= 0 && s.x <= n && s.y <= n,
        }
    }

    pub fn contains_plaquette(&self, c: Site) -> bool {
        match *self {
            Domain::Plane => true,
            Domain::HalfPlane => c.y >= 0,
            Domain::Square(n) => c.x >= 0 && c.y >= 0 && c.x < n && c.y < n,
        }
    }

    pub fn contains_cluster(&self, c: &Cluster) -> bool {
        c.sites().iter().all(|&p| self.contains_plaquette(p))
    }

    pub fn contains_path(&self, p: &Path) -> bool {
        p.vertices().into_iter().all(|v| self.contains_vertex(v))
    }
}

/// Plaquettes to the left and right of the oriented bond `p → p+d`.
#[inline]
pub fn bond_sides(p: Site, d: Dir) -> (Site, Site) {
    let v = d.delta();
    let n = Site::new(-v.y, v.x);
    let l2 = Site::new(2 * p.x + v.x + n.x - 1, 2 * p.y + v.y + n.y - 1);
    let r2 = Site::new(2 * p.x + v.x - n.x - 1, 2 * p.y + v.y - n.y - 1);
    (Site::new(l2.x / 2, l2.y / 2), Site::new(r2.x / 2, r2.y / 2))
}

/// The two plaquettes sharing the unoriented bond `p — p+d`.
#[inline]
pub fn bond_plaquettes(p: Site, d: Dir) -> [Site; 2] {
    let (l, r) = bond_sides(p, d);
    [l, r]
}

/// Δ⁺_γ and Δ⁻_γ: plaquettes immediately left (above) and right (below) of γ.
pub fn delta_sets(path: &Path) -> (HashSet<Site>, HashSet<Site>) {
    let mut plus = HashSet::new();
    let mut minus = HashSet::new();
    for (p, d) in path.bonds() {
        let (l, r) = bond_sides(p, d);
        plus.insert(l);
        minus.insert(r);
    }
    (plus, minus)
}

/// ∇_γ as a multiset of unoriented bonds `(tail, dir)` with `dir ∈ {R, U}`:
/// every bond of γ together with its two translates along its own axis.
pub fn nabla_bonds(path: &Path) -> Vec<(Site, Dir)> {
    let mut out = Vec::with_capacity(3 * path.len());
    for (p, d) in path.bonds() {
        let (tail, axis) = match d {
            Dir::R | Dir::U => (p, d),
            Dir::L | Dir::D => (p + d.delta(), d.opposite()),
        };
        let e = axis.delta();
        out.push((tail, axis));
        out.push((tail + e, axis));
        out.push((tail - e, axis));
    }
    out
}

/// Plaquettes touching at least one bond of ∇_γ.
pub fn nabla_plaquettes(path: &Path) -> HashSet<Site> {
    nabla_bonds(path)
        .into_iter()
        .flat_map(|(p, d)| bond_plaquettes(p, d))
        .collect()
}

/// |𝒞 ∩ ∇_γ| counted with multiplicity.
pub fn nabla_multiplicity(c: &Cluster, nabla: &[(Site, Dir)]) -> usize {
    nabla
        .iter()
        .filter(|&&(p, d)| bond_plaquettes(p, d).iter().any(|&q| c.contains(q)))
        .count()
}

/// Every translate of a shape in `shapes` that contains a plaquette of `targets`.
pub fn clusters_touching<'a, I>(targets: I, shapes: &[(Cluster, u32)]) -> Vec<(Cluster, u32)>
where
    I: IntoIterator<Item = &'a Site>,
{
    let mut seen: HashSet<Cluster> = HashSet::new();
    let mut out = Vec::new();
    let mut tv: Vec<Site> = targets.into_iter().cloned().collect();
    tv.sort();
    for p in tv {
        for (shape, d) in shapes {
            for &cell in shape.sites() {
                let c = Cluster::new(shape.sites().iter().map(|&s| s + p - cell).collect());
                if seen.insert(c.clone()) {
                    out.push((c, *d));
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}
