//! Cone points, irreducible decompositions, tilted measures ℙ^h and the
//! effective-walk step distribution.
//!
//! Cone points are ordered: `u = γ(i)` is a cone point when every earlier
//! vertex lies in `u + 𝒴▶`, every later vertex in `u + 𝒴◁`, `u` is visited
//! once, and (for animals) every cluster lies, as a union of closed unit
//! squares, in one of the two cones.

use crate::error::{Error, Result};
use crate::lattice::{Cone, Dir, Site};
use crate::polymer::{
    animal_weight, enumerate_paths, Animal, ColumnOracle, Path, PositiveDecoration, Tracker,
};
use crate::sos::Cluster;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

/// Enumeration budget for [`enumerate_irreducible`].
pub const IRREDUCIBLE_GUARD: u64 = 50_000_000;
/// Largest contour length accepted by [`enumerate_irreducible`].
pub const IRREDUCIBLE_MAX_LEN: usize = 20;

#[inline]
fn fwd(apex: Site, p: Site) -> bool {
    Cone::FORWARD.contains_delta(p.x - apex.x, p.y - apex.y)
}

#[inline]
fn bwd(apex: Site, p: Site) -> bool {
    Cone::BACKWARD.contains_delta(p.x - apex.x, p.y - apex.y)
}

fn corners(c: Site) -> [Site; 4] {
    [c, c + Site::new(1, 0), c + Site::new(0, 1), c + Site::new(1, 1)]
}

/// Every plaquette of the cluster, as a closed square, lies in `u + 𝒴◁`.
pub fn cluster_in_forward(u: Site, c: &Cluster) -> bool {
    c.sites().iter().all(|&p| corners(p).iter().all(|&q| fwd(u, q)))
}

/// Every plaquette of the cluster, as a closed square, lies in `u + 𝒴▶`.
pub fn cluster_in_backward(u: Site, c: &Cluster) -> bool {
    c.sites().iter().all(|&p| corners(p).iter().all(|&q| bwd(u, q)))
}

fn visit_counts(vs: &[Site]) -> std::collections::HashMap<Site, u8> {
    let mut m = std::collections::HashMap::new();
    for &v in vs {
        *m.entry(v).or_insert(0u8) += 1;
    }
    m
}

/// Vertex indices of the contour cone points.
pub fn contour_cone_indices(path: &Path) -> Vec<usize> {
    let vs = path.vertices();
    let visits = visit_counts(&vs);
    let n = vs.len();
    // Prefix/suffix sweeps: i is a cone point iff max_{j<i}(x_j + |y_j − y_i|)
    // ≤ x_i ≤ min_{j>i}(x_j − |y_j − y_i|); done directly, contours are short.
    (0..n)
        .filter(|&i| {
            let u = vs[i];
            visits[&u] == 1 && vs[..i].iter().all(|&p| bwd(u, p)) && vs[i + 1..].iter().all(|&p| fwd(u, p))
        })
        .collect()
}

pub fn contour_cone_points(path: &Path) -> Vec<Site> {
    let vs = path.vertices();
    contour_cone_indices(path).into_iter().map(|i| vs[i]).collect()
}

/// Vertex indices of the animal cone points (a subset of the contour ones).
pub fn cone_indices(a: &Animal) -> Vec<usize> {
    let vs = a.path.vertices();
    contour_cone_indices(&a.path)
        .into_iter()
        .filter(|&i| {
            let u = vs[i];
            a.clusters
                .iter()
                .all(|c| cluster_in_forward(u, c) || cluster_in_backward(u, c))
        })
        .collect()
}

pub fn cone_points(a: &Animal) -> Vec<Site> {
    let vs = a.path.vertices();
    cone_indices(a).into_iter().map(|i| vs[i]).collect()
}

/// Γ = Γ^{(L)} ∘ Γ^{(1)} ∘ … ∘ Γ^{(n)} ∘ Γ^{(R)}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeDecomposition {
    pub left: Animal,
    pub middle: Vec<Animal>,
    pub right: Animal,
    pub cone_points: Vec<Site>,
    /// Fewer than two cone points: `middle` holds the whole animal.
    pub unsplittable: bool,
}

impl ConeDecomposition {
    /// Concatenate the pieces back into one animal.
    pub fn reconstruct(&self) -> Result<Animal> {
        let mut path = self.left.path.clone();
        let mut clusters = self.left.clusters.clone();
        for piece in self.middle.iter().chain(std::iter::once(&self.right)) {
            if piece.path.is_empty() && piece.clusters.is_empty() {
                continue;
            }
            path = path.concat(&piece.path)?;
            clusters.extend(piece.clusters.iter().cloned());
        }
        Ok(Animal::new(path, clusters))
    }

    pub fn pieces(&self) -> impl Iterator<Item = &Animal> {
        std::iter::once(&self.left)
            .chain(self.middle.iter())
            .chain(std::iter::once(&self.right))
    }
}

fn empty_at(p: Site) -> Animal {
    Animal::bare(Path::new(p, Vec::new()))
}

/// Cut an animal at its cone points.
pub fn decompose(a: &Animal) -> ConeDecomposition {
    let idx = cone_indices(a);
    let vs = a.path.vertices();
    let cps: Vec<Site> = idx.iter().map(|&i| vs[i]).collect();
    if idx.len() < 2 {
        return ConeDecomposition {
            left: empty_at(a.path.start),
            middle: vec![a.clone()],
            right: empty_at(a.path.end()),
            cone_points: cps,
            unsplittable: true,
        };
    }
    let m = idx.len();
    // Piece k (0 = left, m = right) for every cluster.
    let mut buckets: Vec<Vec<Cluster>> = vec![Vec::new(); m + 1];
    for c in &a.clusters {
        let k = cps.iter().filter(|&&u| cluster_in_forward(u, c)).count();
        buckets[k].push(c.clone());
    }
    let piece = |i: usize, j: usize, cl: &mut Vec<Cluster>| Animal::new(a.path.slice(i, j), std::mem::take(cl));
    let left = piece(0, idx[0], &mut buckets[0]);
    let mut middle = Vec::with_capacity(m - 1);
    for k in 1..m {
        middle.push(piece(idx[k - 1], idx[k], &mut buckets[k]));
    }
    let right = piece(idx[m - 1], a.path.len(), &mut buckets[m]);
    ConeDecomposition {
        left,
        middle,
        right,
        cone_points: cps,
        unsplittable: false,
    }
}

/// Σ over pieces of the animal log-weight; equals the log-weight of the
/// whole animal when the decomposition factorizes.
pub fn pieces_log_weight(d: &ConeDecomposition, pd: &PositiveDecoration) -> Result<f64> {
    let mut s = 0.0;
    for p in d.pieces() {
        s += animal_weight(p, pd, None)?;
    }
    Ok(s)
}

/// Whether `a` (starting anywhere) is irreducible: everything in the forward
/// cone of its start and the backward cone of its end, the last step is R,
/// and no interior cone points.
pub fn is_irreducible(a: &Animal) -> bool {
    let p = &a.path;
    if p.is_empty() || p.steps[0] != Dir::R || *p.steps.last().unwrap() != Dir::R {
        return false;
    }
    let (s, e) = (p.start, p.end());
    let vs = p.vertices();
    if !vs.iter().all(|&v| fwd(s, v) && bwd(e, v)) {
        return false;
    }
    if !a.clusters.iter().all(|c| cluster_in_forward(s, c) && cluster_in_backward(e, c)) {
        return false;
    }
    let idx = cone_indices(a);
    idx.iter().all(|&i| i == 0 || i == p.len())
}

fn interior_cone_free(vs: &[Site]) -> bool {
    let n = vs.len();
    (1..n - 1).all(|i| {
        let u = vs[i];
        !(vs[..i].iter().all(|&p| bwd(u, p)) && vs[i + 1..].iter().all(|&p| fwd(u, p)))
            || vs.iter().filter(|&&p| p == u).count() > 1
    })
}

/// All irreducible animals from the origin with contour length ≤ `max_len`
/// and at most `max_clusters` clusters, with their log-weights.
///
/// With a non-transformed zero decoration every cluster has weight zero, so
/// only bare contours are returned.
pub fn enumerate_irreducible(pd: &PositiveDecoration, max_len: usize, max_clusters: usize) -> Result<Vec<(Animal, f64)>> {
    if max_len > IRREDUCIBLE_MAX_LEN {
        return Err(Error::guard("enumerate_irreducible (max_len)", max_len as u64, IRREDUCIBLE_MAX_LEN as u64));
    }
    let bare_only = max_clusters == 0 || (!pd.transformed && pd.base.is_zero());
    let origin = Site::new(0, 0);
    let mut out: Vec<(Animal, f64)> = Vec::new();
    let mut visited = 0u64;
    let mut over = false;
    let mut err: Option<Error> = None;
    let mut vs: Vec<Site> = Vec::with_capacity(max_len + 1);
    enumerate_paths(
        origin,
        max_len,
        &[Dir::R],
        |t: &Tracker, steps: &[Dir]| {
            visited += 1;
            if visited > IRREDUCIBLE_GUARD {
                over = true;
                return true;
            }
            let c = t.position();
            if !fwd(origin, c) {
                return true;
            }
            // The end must see every vertex in its backward cone.
            vs.clear();
            let mut p = origin;
            vs.push(p);
            let mut need = 0i64;
            for d in steps {
                p = p + d.delta();
                vs.push(p);
            }
            for v in &vs {
                need = need.max(v.x + (v.y - c.y).abs() - c.x);
            }
            steps.len() as i64 + need > max_len as i64
        },
        |t, steps| {
            if err.is_some() || *steps.last().unwrap() != Dir::R {
                return;
            }
            let e = t.position();
            let path = Path::new(origin, steps.to_vec());
            let pv = path.vertices();
            if !pv.iter().all(|&v| bwd(e, v)) {
                return;
            }
            if bare_only {
                if interior_cone_free(&pv) {
                    let a = Animal::bare(path);
                    match animal_weight(&a, pd, None) {
                        Ok(w) => out.push((a, w)),
                        Err(x) => err = Some(x),
                    }
                }
                return;
            }
            let cand: Vec<Cluster> = pd
                .cluster_values(&path, None)
                .into_iter()
                .filter(|(c, v)| *v > 0.0 && cluster_in_forward(origin, c) && cluster_in_backward(e, c))
                .map(|(c, _)| c)
                .collect();
            let mut chosen: Vec<usize> = Vec::new();
            fn rec(
                k0: usize,
                cand: &[Cluster],
                chosen: &mut Vec<usize>,
                max_c: usize,
                path: &Path,
                pd: &PositiveDecoration,
                out: &mut Vec<(Animal, f64)>,
                err: &mut Option<Error>,
            ) {
                let a = Animal::new(path.clone(), chosen.iter().map(|&i| cand[i].clone()).collect());
                let idx = cone_indices(&a);
                if idx.iter().all(|&i| i == 0 || i == path.len()) {
                    match animal_weight(&a, pd, None) {
                        Ok(w) => out.push((a, w)),
                        Err(x) => *err = Some(x),
                    }
                }
                if chosen.len() == max_c {
                    return;
                }
                for k in k0..cand.len() {
                    chosen.push(k);
                    rec(k + 1, cand, chosen, max_c, path, pd, out, err);
                    chosen.pop();
                }
            }
            rec(0, &cand, &mut chosen, max_clusters, &path, pd, &mut out, &mut err);
        },
    );
    if over {
        return Err(Error::guard("enumerate_irreducible", visited, IRREDUCIBLE_GUARD));
    }
    if let Some(e) = err {
        return Err(e);
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.dedup_by(|a, b| a.0 == b.0);
    Ok(out)
}

/// ℙ^h(Γ) = e^{h·X(Γ)} q(Γ) on a finite family of irreducible animals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TiltedMeasure {
    pub h: [f64; 2],
    pub animals: Vec<(Animal, f64)>,
    /// log ℙ^h(Γ) per animal.
    pub log_probs: Vec<f64>,
    pub total_mass: f64,
    pub max_len: usize,
}

impl TiltedMeasure {
    pub fn new(animals: Vec<(Animal, f64)>, h: [f64; 2], max_len: usize) -> Self {
        let log_probs: Vec<f64> = animals
            .iter()
            .map(|(a, w)| {
                let x = a.displacement();
                h[0] * x.x as f64 + h[1] * x.y as f64 + w
            })
            .collect();
        let total_mass = log_probs.iter().map(|l| l.exp()).sum();
        TiltedMeasure {
            h,
            animals,
            log_probs,
            total_mass,
            max_len,
        }
    }

    /// Σ ℙ^h(Γ) 1{|γ| ≥ k}.
    pub fn mass_from_length(&self, k: usize) -> f64 {
        self.animals
            .iter()
            .zip(&self.log_probs)
            .filter(|((a, _), _)| a.path.len() >= k)
            .map(|(_, l)| l.exp())
            .sum()
    }

    pub fn step_distribution(&self, beta: f64) -> StepDistribution {
        let mut m: BTreeMap<(i64, i64), f64> = BTreeMap::new();
        for ((a, _), l) in self.animals.iter().zip(&self.log_probs) {
            let x = a.displacement();
            *m.entry((x.x, x.y)).or_default() += l.exp();
        }
        StepDistribution::from_masses(m.into_iter().map(|((x, y), p)| (Site::new(x, y), p)).collect(), beta, self.max_len)
    }
}

/// Law of the effective-walk increment X (possibly sub-stochastic).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDistribution {
    pub masses: Vec<(Site, f64)>,
    pub beta: f64,
    pub cutoff: usize,
    pub total_mass: f64,
    /// Mean of the normalised law.
    pub mean: [f64; 2],
}

impl StepDistribution {
    pub fn from_masses(mut masses: Vec<(Site, f64)>, beta: f64, cutoff: usize) -> Self {
        masses.retain(|(_, p)| *p > 0.0);
        masses.sort_by_key(|(v, _)| (v.x, v.y));
        let total_mass: f64 = masses.iter().map(|(_, p)| p).sum();
        let mut mean = [0.0; 2];
        for (v, p) in &masses {
            mean[0] += v.x as f64 * p / total_mass;
            mean[1] += v.y as f64 * p / total_mass;
        }
        StepDistribution {
            masses,
            beta,
            cutoff,
            total_mass,
            mean,
        }
    }

    /// A user-supplied step law (normalised if it sums to more than zero).
    pub fn custom(masses: Vec<(Site, f64)>) -> Result<Self> {
        if masses.iter().any(|(v, p)| *p < 0.0 || v.x < 1) {
            return Err(Error::Config("steps need nonnegative mass and first coordinate >= 1".into()));
        }
        let s = Self::from_masses(masses, f64::INFINITY, 0);
        if s.masses.is_empty() {
            return Err(Error::Config("empty step distribution".into()));
        }
        Ok(s)
    }

    /// Second moments of the normalised law: (σ₁², σ₂²) = (Var X₁, Var X₂).
    pub fn variances(&self) -> [f64; 2] {
        let mut v = [0.0; 2];
        for (x, p) in &self.masses {
            let q = p / self.total_mass;
            v[0] += q * (x.x as f64 - self.mean[0]).powi(2);
            v[1] += q * (x.y as f64 - self.mean[1]).powi(2);
        }
        v
    }

    /// Masses renormalised to a probability law.
    pub fn normalized(&self) -> Vec<(Site, f64)> {
        self.masses.iter().map(|&(v, p)| (v, p / self.total_mass)).collect()
    }

    /// Σ P(X = v) 1{‖v‖₁ ≥ k}.
    pub fn tail_mass(&self, k: i64) -> f64 {
        self.masses.iter().filter(|(v, _)| v.l1() >= k).map(|(_, p)| p).sum()
    }

    pub fn mass(&self, v: Site) -> f64 {
        self.masses.iter().find(|(w, _)| *w == v).map(|(_, p)| *p).unwrap_or(0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# beta={},cutoff={},total_mass={:.15}\nvx,vy,mass\n",
            self.beta, self.cutoff, self.total_mass
        );
        for (v, p) in &self.masses {
            let _ = writeln!(s, "{},{},{:.17e}", v.x, v.y, p);
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut beta = f64::INFINITY;
        let mut cutoff = 0usize;
        let mut masses = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(h) = line.strip_prefix('#') {
                for kv in h.split(',') {
                    let mut it = kv.trim().splitn(2, '=');
                    match (it.next(), it.next()) {
                        (Some("beta"), Some(v)) => beta = v.parse().map_err(|_| Error::Config("bad beta".into()))?,
                        (Some("cutoff"), Some(v)) => cutoff = v.parse().map_err(|_| Error::Config("bad cutoff".into()))?,
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() || line.starts_with("vx") {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(Error::Config(format!("line {}: expected vx,vy,mass", i + 1)));
            }
            let bad = |_| Error::Config(format!("line {}: bad number", i + 1));
            masses.push((
                Site::new(f[0].trim().parse().map_err(bad)?, f[1].trim().parse().map_err(bad)?),
                f[2].trim().parse::<f64>().map_err(|_| Error::Config(format!("line {}: bad mass", i + 1)))?,
            ));
        }
        Ok(Self::from_masses(masses, beta, cutoff))
    }

    /// Draw one step from the normalised law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Site {
        let u: f64 = rng.random::<f64>() * self.total_mass;
        let mut acc = 0.0;
        for &(v, p) in &self.masses {
            acc += p;
            if u < acc {
                return v;
            }
        }
        self.masses.last().unwrap().0
    }
}

/// Default overhang excess for the tilt oracle.
pub const DEFAULT_ORACLE_EXCESS: usize = 14;

/// The Φ ≡ 0 step distribution in direction `dir` at cutoff `max_len`,
/// with h_x from the column oracle.
pub fn step_distribution_zero(beta: f64, dir: [f64; 2], max_len: usize) -> Result<(StepDistribution, TiltedMeasure)> {
    let oracle = ColumnOracle::new(beta, DEFAULT_ORACLE_EXCESS)?;
    let h = oracle.h_x(dir)?;
    let pd = PositiveDecoration::direct(crate::polymer::Decoration::zero(beta))?;
    let irr = enumerate_irreducible(&pd, max_len, 0)?;
    let tm = TiltedMeasure::new(irr, h, max_len);
    if tm.total_mass > 1.0 + 1e-9 {
        return Err(Error::Invalid(format!(
            "total mass {} exceeds 1: tilt is outside the Wulff shape",
            tm.total_mass
        )));
    }
    Ok((tm.step_distribution(beta), tm))
}

/// Walk side: Σ_k P_u(S_k = v, S_j ∈ ℍ for j ≤ k) by a column DP.
pub fn walk_hitting_probability(step: &StepDistribution, u: Site, v: Site) -> f64 {
    if v.x <= u.x || u.y < 0 || v.y < 0 {
        return 0.0;
    }
    let n = (v.x - u.x) as usize;
    // prob[x][y] over columns 0..=n, heights ≥ 0 (sparse).
    let mut cols: Vec<BTreeMap<i64, f64>> = vec![BTreeMap::new(); n + 1];
    cols[0].insert(u.y, 1.0);
    for x in 0..n {
        let cur = std::mem::take(&mut cols[x]);
        for (&y, &p) in &cur {
            for &(d, m) in &step.masses {
                let (nx, ny) = (x as i64 + d.x, y + d.y);
                if nx as usize > n || ny < 0 {
                    continue;
                }
                *cols[nx as usize].entry(ny).or_default() += p * m;
            }
        }
        cols[x] = cur;
    }
    cols[n].get(&v.y).cloned().unwrap_or(0.0)
}

/// Animal side: Σ over tuples of irreducible animals, concatenated from u
/// to v, whose cone points all lie in ℍ = {y ≥ 0}, of Π ℙ^h(Γ_i).
pub fn animal_tuple_sum(tm: &TiltedMeasure, u: Site, v: Site) -> f64 {
    fn rec(tm: &TiltedMeasure, p: Site, v: Site) -> f64 {
        if p == v {
            return 1.0;
        }
        let mut s = 0.0;
        for ((a, _), l) in tm.animals.iter().zip(&tm.log_probs) {
            let q = p + a.displacement();
            if q.x > v.x || q.y < 0 {
                continue;
            }
            s += l.exp() * rec(tm, q, v);
        }
        s
    }
    if v.x <= u.x || u.y < 0 {
        return 0.0;
    }
    rec(tm, u, v)
}

/// (walk DP, animal-tuple sum) for the hitting identity. The degenerate
/// case u = v returns (0, 0): hitting times count at least one step.
pub fn hitting_identity_check(tm: &TiltedMeasure, beta: f64, u: Site, v: Site) -> (f64, f64) {
    if u == v {
        return (0.0, 0.0);
    }
    let step = tm.step_distribution(beta);
    (walk_hitting_probability(&step, u, v), animal_tuple_sum(tm, u, v))
}

/// A random admissible contour from the origin of length ≤ `max_len`,
/// grown step by step and cut back to the last legal endpoint.
pub fn random_path<R: Rng + ?Sized>(rng: &mut R, max_len: usize) -> Path {
    loop {
        let target = rng.random_range(1..=max_len.max(1));
        let mut t = Tracker::new(Site::new(0, 0), max_len as i64 + 1);
        let mut steps = Vec::new();
        let mut last_ok = 0;
        while steps.len() < target {
            let opts: Vec<Dir> = Dir::ALL.iter().cloned().filter(|&d| t.can_step(d)).collect();
            if opts.is_empty() {
                break;
            }
            // Bias toward R so that cone points occur.
            let d = if rng.random::<f64>() < 0.5 && opts.contains(&Dir::R) {
                Dir::R
            } else {
                opts[rng.random_range(0..opts.len())]
            };
            t.push(d);
            steps.push(d);
            if t.can_end() {
                last_ok = steps.len();
            }
        }
        if last_ok > 0 {
            steps.truncate(last_ok);
            return Path::new(Site::new(0, 0), steps);
        }
    }
}

/// A random animal: a random contour plus each admissible cluster with
/// probability `p_cluster`.
pub fn random_animal<R: Rng + ?Sized>(rng: &mut R, pd: &PositiveDecoration, max_len: usize, p_cluster: f64) -> Animal {
    let path = random_path(rng, max_len);
    let clusters: Vec<Cluster> = pd
        .cluster_values(&path, None)
        .into_iter()
        .filter(|(_, v)| *v > 0.0)
        .filter(|_| rng.random::<f64>() < p_cluster)
        .map(|(c, _)| c)
        .collect();
    Animal::new(path, clusters)
}

/// Distinct displacements of a family (for diagnostics).
pub fn displacements(animals: &[(Animal, f64)]) -> HashSet<Site> {
    animals.iter().map(|(a, _)| a.displacement()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymer::{positive_transform, Decoration};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(w: &str) -> Path {
        Path::from_word(Site::new(0, 0), w).unwrap()
    }

    #[test]
    fn straight_path_all_cone_points() {
        assert_eq!(contour_cone_points(&p("RRR")).len(), 4);
        let cps = contour_cone_points(&p("RUR"));
        assert_eq!(cps, vec![Site::new(0, 0), Site::new(2, 1)]);
    }

    #[test]
    fn cluster_removes_cone_points() {
        let a = Animal::new(p("RRRRRR"), vec![Cluster::new(vec![Site::new(3, 1)])]);
        let cps = cone_points(&a);
        assert!(cps.contains(&Site::new(0, 0)) && cps.contains(&Site::new(6, 0)));
        assert!(!cps.contains(&Site::new(3, 0)));
        // Sandwich: animal cone points ⊂ contour cone points.
        let cc = contour_cone_points(&a.path);
        assert!(cps.iter().all(|c| cc.contains(c)));
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&Animal::bare(p("RRR")));
        assert_eq!(d.middle.len(), 3);
        assert!(d.left.path.is_empty() && d.right.path.is_empty());
        let d = decompose(&Animal::bare(p("RUR")));
        assert_eq!(d.middle.len(), 1);
        assert!(!d.unsplittable);
        let d = decompose(&Animal::bare(p("U")));
        assert!(d.unsplittable);
        // Idempotence on a middle piece.
        let d = decompose(&Animal::bare(p("RRURURRDR")));
        for m in &d.middle {
            let dd = decompose(m);
            assert_eq!(dd.middle.len(), 1);
            assert_eq!(&dd.middle[0], m);
        }
    }

    #[test]
    fn decomposition_factorizes_decorated_animals() {
        let deco = Decoration::synthetic(1.0, 1.0, 10, 1.0, 9).unwrap();
        let pd = positive_transform(&deco);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..60 {
            let a = random_animal(&mut rng, &pd, 24, 0.3);
            let d = decompose(&a);
            assert_eq!(d.reconstruct().unwrap(), a);
            let whole = animal_weight(&a, &pd, None).unwrap();
            let parts = pieces_log_weight(&d, &pd).unwrap();
            assert!((whole - parts).abs() < 1e-9, "{whole} vs {parts}");
            for m in &d.middle {
                if !d.unsplittable {
                    assert!(is_irreducible(m));
                }
            }
        }
    }

    #[test]
    fn irreducible_small_cases() {
        let pd = PositiveDecoration::direct(Decoration::zero(2.0)).unwrap();
        let one = enumerate_irreducible(&pd, 1, 0).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one[0].1 + 2.0).abs() < 1e-15);
        let three = enumerate_irreducible(&pd, 3, 0).unwrap();
        let words: Vec<String> = three.iter().map(|(a, _)| a.path.word()).collect();
        assert!(words.contains(&"RUR".to_string()));
        assert!(!words.iter().any(|w| w == "RU"));
        // Independent oracle: brute force over words.
        let mut brute = 0;
        for len in 1..=7usize {
            for code in 0..4u64.pow(len as u32) {
                let steps: Vec<Dir> = (0..len).map(|i| Dir::ALL[((code >> (2 * i)) & 3) as usize]).collect();
                let path = Path::new(Site::new(0, 0), steps);
                if path.is_admissible() && is_irreducible(&Animal::bare(path)) {
                    brute += 1;
                }
            }
        }
        let seven = enumerate_irreducible(&pd, 7, 0).unwrap();
        assert_eq!(seven.len(), brute);
        assert!(seven.iter().all(|(a, _)| {
            let x = a.displacement();
            x.x >= 1 && x.y.abs() <= x.x
        }));
    }

    #[test]
    fn hitting_identity_small() {
        let pd = PositiveDecoration::direct(Decoration::zero(2.0)).unwrap();
        let irr = enumerate_irreducible(&pd, 8, 0).unwrap();
        let tm = TiltedMeasure::new(irr, [1.7, 0.0], 8);
        let (a, b) = hitting_identity_check(&tm, 2.0, Site::new(0, 1), Site::new(2, 1));
        assert!(a > 0.0 && (a - b).abs() < 1e-12);
        assert_eq!(hitting_identity_check(&tm, 2.0, Site::new(0, 1), Site::new(0, 1)), (0.0, 0.0));
        let (hi, _) = hitting_identity_check(&tm, 2.0, Site::new(0, 2), Site::new(3, 1));
        let (lo, _) = hitting_identity_check(&tm, 2.0, Site::new(0, 0), Site::new(3, 1));
        assert!(hi >= lo);
    }

    #[test]
    fn step_csv_round_trip() {
        let s = StepDistribution::from_masses(vec![(Site::new(1, 0), 0.5), (Site::new(2, -1), 0.25)], 2.0, 10);
        let t = StepDistribution::from_csv(&s.to_csv()).unwrap();
        assert_eq!(s, t);
    }
}
