//! Connected site clusters, the bond-connectivity size d(𝒞), and the
//! cluster-expansion weights f_U obtained by Möbius inversion of exact
//! log-partition functions.

use super::default_hmax;
use super::exact::{log_partition, TransferSpec};
use crate::error::{Error, Result};
use crate::lattice::{Site, Translate};
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

/// A finite set of sites, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cluster(Vec<Site>);

impl Cluster {
    pub fn new(mut sites: Vec<Site>) -> Self {
        sites.sort();
        sites.dedup();
        Cluster(sites)
    }

    pub fn sites(&self) -> &[Site] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, s: Site) -> bool {
        self.0.binary_search(&s).is_ok()
    }

    /// Lexicographically least site.
    pub fn anchor(&self) -> Site {
        self.0[0]
    }

    pub fn is_connected(&self) -> bool {
        if self.0.is_empty() {
            return true;
        }
        let mut seen = HashSet::new();
        let mut q = VecDeque::from([self.0[0]]);
        seen.insert(self.0[0]);
        while let Some(s) = q.pop_front() {
            for t in s.neighbors() {
                if self.contains(t) && seen.insert(t) {
                    q.push_back(t);
                }
            }
        }
        seen.len() == self.0.len()
    }

    /// Connected components, each sorted.
    pub fn components(&self) -> Vec<Cluster> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for &s0 in &self.0 {
            if seen.contains(&s0) {
                continue;
            }
            let mut comp = vec![s0];
            seen.insert(s0);
            let mut q = VecDeque::from([s0]);
            while let Some(s) = q.pop_front() {
                for t in s.neighbors() {
                    if self.contains(t) && seen.insert(t) {
                        comp.push(t);
                        q.push_back(t);
                    }
                }
            }
            out.push(Cluster::new(comp));
        }
        out
    }

    /// Translate so that the anchor sits at the origin; returns the shift applied.
    pub fn normalized(&self) -> (Cluster, Site) {
        let mx = self.0.iter().map(|s| s.x).min().unwrap_or(0);
        let my = self.0.iter().map(|s| s.y).min().unwrap_or(0);
        let v = Site::new(-mx, -my);
        (self.translate(v), v)
    }

    /// Bonds between the cluster and its complement, as (inside, outside).
    pub fn boundary_bonds(&self) -> Vec<(Site, Site)> {
        let mut v = Vec::new();
        for &s in &self.0 {
            for t in s.neighbors() {
                if !self.contains(t) {
                    v.push((s, t));
                }
            }
        }
        v
    }
}

impl Translate for Cluster {
    fn translate(&self, v: Site) -> Self {
        Cluster(self.0.iter().map(|s| *s + v).collect())
    }
}

/// d(𝒞): size of the smallest connected set of bonds containing every
/// boundary bond of 𝒞 (bonds are adjacent when they share an endpoint).
///
/// Boundary bonds sharing endpoints form groups; the answer is the number of
/// boundary bonds plus a minimum Steiner tree joining the groups, computed
/// by Dreyfus–Wagner on a window around the cluster.
pub fn d_value(c: &Cluster) -> u32 {
    if c.is_empty() {
        return 0;
    }
    let bonds = c.boundary_bonds();
    let nb = bonds.len();
    // Union-find over bonds via shared endpoints.
    let mut parent: Vec<usize> = (0..nb).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let nx = p[j];
            p[j] = r;
            j = nx;
        }
        r
    }
    let mut by_end: HashMap<Site, Vec<usize>> = HashMap::new();
    for (i, &(a, b)) in bonds.iter().enumerate() {
        by_end.entry(a).or_default().push(i);
        by_end.entry(b).or_default().push(i);
    }
    for ids in by_end.values() {
        for w in ids.windows(2) {
            let (ra, rb) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[ra] = rb;
        }
    }
    let mut group_of_root: HashMap<usize, usize> = HashMap::new();
    let mut groups: Vec<HashSet<Site>> = Vec::new();
    for (i, &(a, b)) in bonds.iter().enumerate() {
        let r = find(&mut parent, i);
        let g = *group_of_root.entry(r).or_insert_with(|| {
            groups.push(HashSet::new());
            groups.len() - 1
        });
        groups[g].insert(a);
        groups[g].insert(b);
    }
    let k = groups.len();
    if k == 1 {
        return nb as u32;
    }
    assert!(k <= 20, "too many boundary groups for Steiner computation");

    // Window graph: nodes are sites in the bounding box expanded by 2, plus
    // one super node per group joined at zero cost to its endpoints.
    let xs = c.sites().iter().map(|s| s.x);
    let ys = c.sites().iter().map(|s| s.y);
    let (x0, x1) = (xs.clone().min().unwrap() - 2, xs.max().unwrap() + 2);
    let (y0, y1) = (ys.clone().min().unwrap() - 2, ys.max().unwrap() + 2);
    let ww = (x1 - x0 + 1) as usize;
    let nsite = ww * (y1 - y0 + 1) as usize;
    let node = |s: Site| -> Option<usize> {
        if s.x < x0 || s.x > x1 || s.y < y0 || s.y > y1 {
            None
        } else {
            Some((s.y - y0) as usize * ww + (s.x - x0) as usize)
        }
    };
    let nn = nsite + k;
    let mut adj: Vec<Vec<(usize, u32)>> = vec![Vec::new(); nn];
    for i in 0..nsite {
        let s = Site::new(x0 + (i % ww) as i64, y0 + (i / ww) as i64);
        for t in s.neighbors() {
            if let Some(j) = node(t) {
                adj[i].push((j, 1));
            }
        }
    }
    for (g, set) in groups.iter().enumerate() {
        for &s in set {
            let i = node(s).expect("group endpoint inside window");
            adj[nsite + g].push((i, 0));
            adj[i].push((nsite + g, 0));
        }
    }
    let full = (1usize << k) - 1;
    let inf = u32::MAX / 4;
    let mut dp = vec![vec![inf; nn]; full + 1];
    for g in 0..k {
        dp[1 << g][nsite + g] = 0;
        dijkstra(&adj, &mut dp[1 << g]);
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut cur = vec![inf; nn];
        let mut sub = (mask - 1) & mask;
        while sub > 0 {
            if sub < (mask ^ sub) {
                // each unordered split once
            } else {
                let other = mask ^ sub;
                for v in 0..nn {
                    let c2 = dp[sub][v] + dp[other][v];
                    if c2 < cur[v] {
                        cur[v] = c2;
                    }
                }
            }
            sub = (sub - 1) & mask;
        }
        dijkstra(&adj, &mut cur);
        dp[mask] = cur;
    }
    nb as u32 + dp[full][nsite]
}

fn dijkstra(adj: &[Vec<(usize, u32)>], dist: &mut [u32]) {
    let mut heap: BinaryHeap<Reverse<(u32, usize)>> =
        dist.iter().enumerate().filter(|(_, &d)| d < u32::MAX / 4).map(|(i, &d)| Reverse((d, i))).collect();
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(u, w) in &adj[v] {
            let nd = d + w;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Reverse((nd, u)));
            }
        }
    }
}

/// All fixed polyominoes with at most `max_size` cells, normalised so their
/// lexicographically least cell is the origin.
pub fn fixed_polyominoes(max_size: usize) -> Vec<Cluster> {
    let mut all: Vec<Cluster> = Vec::new();
    let mut layer: HashSet<Vec<Site>> = HashSet::new();
    if max_size == 0 {
        return all;
    }
    layer.insert(vec![Site::new(0, 0)]);
    for _ in 1..=max_size {
        let mut cur: Vec<Vec<Site>> = layer.drain().collect();
        cur.sort();
        for cells in &cur {
            all.push(Cluster(cells.clone()));
        }
        if all.last().map(|c| c.len()).unwrap_or(0) == max_size {
            break;
        }
        for cells in &cur {
            let set: HashSet<Site> = cells.iter().cloned().collect();
            for &s in cells {
                for t in s.neighbors() {
                    if set.contains(&t) {
                        continue;
                    }
                    let mut v = cells.clone();
                    v.push(t);
                    v.sort();
                    let a = v[0];
                    let v: Vec<Site> = v.into_iter().map(|s| s - a).collect();
                    layer.insert(v);
                }
            }
        }
    }
    all
}

/// Connected subsets of `region` (given as a list of sites).
pub fn connected_subsets(region: &[Site]) -> Vec<Cluster> {
    assert!(region.len() <= 20, "region too large");
    let n = region.len();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let c = Cluster::new((0..n).filter(|i| mask >> i & 1 == 1).map(|i| region[i]).collect());
        if c.is_connected() {
            out.push(c);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterWeight {
    pub cluster: Cluster,
    /// The conditioning set U restricted to the cluster.
    pub context: Vec<Site>,
    pub value: f64,
    pub d_value: u32,
}

/// Cache of log Ẑ_{W,U} for connected W, keyed by translation class.
#[derive(Debug, Default)]
pub struct FuCache {
    beta: f64,
    hmax: i64,
    map: HashMap<(Vec<Site>, Vec<Site>), f64>,
}

impl FuCache {
    pub fn new(beta: f64, hmax: Option<i64>) -> Self {
        FuCache {
            beta,
            hmax: hmax.unwrap_or_else(|| default_hmax(beta)),
            map: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// log Ẑ of the no-floor SOS on the connected set `w`, all other sites
    /// pinned at 0, conditioned on φ ≥ 0 on `u ∩ w`.
    fn log_z_connected(&mut self, w: &Cluster, u: &HashSet<Site>) -> Result<f64> {
        let (wn, shift) = w.normalized();
        let mut un: Vec<Site> = w.sites().iter().filter(|s| u.contains(s)).map(|s| *s + shift).collect();
        un.sort();
        let key = (wn.sites().to_vec(), un);
        if let Some(&v) = self.map.get(&key) {
            return Ok(v);
        }
        let width = wn.sites().iter().map(|s| s.x).max().unwrap() as usize + 1;
        let height = wn.sites().iter().map(|s| s.y).max().unwrap() as usize + 1;
        let uset: HashSet<Site> = key.1.iter().cloned().collect();
        let mut domains = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let s = Site::new(x as i64, y as i64);
                domains.push(if !wn.contains(s) {
                    (0, 0)
                } else if uset.contains(&s) {
                    (0, self.hmax)
                } else {
                    (-self.hmax, self.hmax)
                });
            }
        }
        let spec = TransferSpec {
            width,
            height,
            domains,
            bottom: vec![0; width],
            top: vec![0; width],
            left: vec![0; height],
            right: vec![0; height],
            beta: self.beta,
        };
        let v = log_partition(&spec)?;
        self.map.insert(key, v);
        Ok(v)
    }

    /// log Ẑ_{W,U} for an arbitrary (possibly disconnected) W.
    pub fn log_z(&mut self, w: &Cluster, u: &HashSet<Site>) -> Result<f64> {
        let mut acc = 0.0;
        for c in w.components() {
            acc += self.log_z_connected(&c, u)?;
        }
        Ok(acc)
    }

    /// f_U(V) = Σ_{W⊂V} (−1)^{|V|−|W|} log Ẑ_{W,U}.
    pub fn fu(&mut self, v: &Cluster, u: &[Site]) -> Result<f64> {
        let n = v.len();
        if n > 14 {
            return Err(Error::guard("cluster_weight_fU", 1u64 << n, 1 << 14));
        }
        let uset: HashSet<Site> = u.iter().cloned().filter(|s| v.contains(*s)).collect();
        // Sum positive and negative parts separately to limit cancellation error.
        let (mut pos, mut neg) = (0.0f64, 0.0f64);
        for mask in 1u32..(1u32 << n) {
            let w = Cluster::new((0..n).filter(|i| mask >> i & 1 == 1).map(|i| v.sites()[i]).collect());
            let lz = self.log_z(&w, &uset)?;
            if (n - mask.count_ones() as usize) % 2 == 0 {
                pos += lz;
            } else {
                neg += lz;
            }
        }
        Ok(pos - neg)
    }
}

/// Convenience wrapper computing one f_U(V) with a fresh cache.
pub fn cluster_weight_fu(v: &Cluster, u: &[Site], beta: f64, hmax: Option<i64>) -> Result<ClusterWeight> {
    let mut cache = FuCache::new(beta, hmax);
    let value = cache.fu(v, u)?;
    let mut context: Vec<Site> = u.iter().cloned().filter(|s| v.contains(*s)).collect();
    context.sort();
    Ok(ClusterWeight {
        cluster: v.clone(),
        context,
        value,
        d_value: d_value(v),
    })
}
