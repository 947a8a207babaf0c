//! Free, modified and animal weights, the non-negative decoration
//! transform, and exhaustive partition functions 𝒢.

use super::decoration::Decoration;
use super::path::{enumerate_paths, Path};
use super::{clusters_touching, delta_sets, nabla_bonds, nabla_multiplicity, nabla_plaquettes, Domain};
use crate::error::{Error, Result};
use crate::lattice::{Dir, Site, Translate};
use crate::sos::{d_value, log_sum_exp, Cluster};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Upper bound on the number of connected bond sets of size m through a
/// fixed bond grows like (e·6)^m (line graph of Z² has degree 6).
const CLUSTER_GROWTH: f64 = 6.0 * std::f64::consts::E;

/// Enumeration budget for [`partition_function`].
pub const PATH_GUARD: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub log_weight: f64,
    pub n_clusters: usize,
    /// Bound on |Σ Φ| over clusters beyond `d_max`.
    pub tail_bound: f64,
    /// Tail bound above `1e-6`.
    pub flagged: bool,
}

/// Σ_{m > d_max} (6e)^m e^{−χβ(m+1)} per marked plaquette or bond.
fn cluster_tail(deco: &Decoration) -> f64 {
    if deco.is_zero() {
        return 0.0;
    }
    let r = CLUSTER_GROWTH * (-deco.chi * deco.beta).exp();
    if r >= 1.0 {
        return f64::INFINITY;
    }
    let m0 = deco.d_max as f64 + 1.0;
    r.powf(m0) * (-deco.chi * deco.beta).exp() / (1.0 - r)
}

fn intersect(c: &Cluster, set: &HashSet<Site>) -> Vec<Site> {
    c.sites().iter().filter(|s| set.contains(s)).cloned().collect()
}

/// Σ_{𝒞∩Δ_γ≠∅} Φ_D(𝒞;γ) with `Φ_D = Φ·1{𝒞⊂D}` (no modification for `None`).
fn decoration_sum(path: &Path, deco: &Decoration, modification: Option<Domain>) -> (f64, usize) {
    if deco.is_zero() {
        return (0.0, 0);
    }
    let (plus, minus) = delta_sets(path);
    let mut sum = 0.0;
    let mut n = 0;
    for (c, d) in clusters_touching(plus.iter().chain(minus.iter()), deco.shapes()) {
        if let Some(dom) = modification {
            if !dom.contains_cluster(&c) {
                continue;
            }
        }
        let v = deco.value(&c, d, &intersect(&c, &plus), &intersect(&c, &minus));
        sum += v;
        n += 1;
    }
    (sum, n)
}

fn report(path: &Path, deco: &Decoration, modification: Option<Domain>) -> WeightReport {
    let (sum, n) = decoration_sum(path, deco, modification);
    let tail = 2.0 * path.len() as f64 * cluster_tail(deco);
    WeightReport {
        log_weight: -deco.beta * path.len() as f64 + sum,
        n_clusters: n,
        tail_bound: tail,
        flagged: tail > 1e-6,
    }
}

/// log q(γ) = −β|γ| + Σ_{𝒞∩Δ_γ≠∅} Φ(𝒞;γ).
pub fn free_weight(path: &Path, deco: &Decoration) -> WeightReport {
    report(path, deco, None)
}

/// log q_D(γ) with the indicator modification `Φ_D = Φ·1{𝒞⊂D}`.
pub fn modified_weight(path: &Path, deco: &Decoration, domain: Domain) -> WeightReport {
    report(path, deco, Some(domain))
}

/// c(β) = Σ_{𝒞 ∩ b ≠ ∅, d ≤ d_max} e^{−χβ(d(𝒞)+1)} for a fixed bond b,
/// returned with its cluster-counting tail bound.
pub fn c_beta(deco: &Decoration) -> (f64, f64) {
    let b = [Site::new(0, 0), Site::new(0, -1)];
    let c: f64 = clusters_touching(b.iter(), deco.shapes())
        .iter()
        .map(|(_, d)| deco.decay_bound(*d))
        .sum();
    let r = CLUSTER_GROWTH * (-deco.chi * deco.beta).exp();
    let tail = if r >= 1.0 {
        f64::INFINITY
    } else {
        2.0 * r.powf(deco.d_max as f64 + 1.0) * (-deco.chi * deco.beta).exp() / (1.0 - r)
    };
    (c, tail)
}

/// A non-negative decoration Φ′ together with the inverse temperature it
/// pairs with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositiveDecoration {
    pub base: Decoration,
    /// Φ′ = |𝒞∩∇_γ|e^{−χβ(d+1)} + Φ; otherwise Φ′ = Φ (which must be ≥ 0).
    pub transformed: bool,
    pub c_beta: f64,
    pub c_tail: f64,
    /// β + 3c(β) when transformed, β otherwise.
    pub beta_prime: f64,
}

impl PositiveDecoration {
    /// Use a non-negative Φ as Φ′ directly.
    pub fn direct(base: Decoration) -> Result<Self> {
        let ok = match base.kind {
            super::DecorationKind::Zero => true,
            super::DecorationKind::SingleSite { value } => value >= 0.0,
            _ => false,
        };
        if !ok {
            return Err(Error::Invalid("direct use needs a non-negative decoration".into()));
        }
        let beta = base.beta;
        Ok(PositiveDecoration {
            base,
            transformed: false,
            c_beta: 0.0,
            c_tail: 0.0,
            beta_prime: beta,
        })
    }

    /// Φ′_D(𝒞;γ).
    pub fn phi_prime(&self, c: &Cluster, d: u32, mult: usize, plus: &[Site], minus: &[Site], modification: Option<Domain>) -> f64 {
        let phi = match modification {
            Some(dom) if !dom.contains_cluster(c) => 0.0,
            _ => self.base.value(c, d, plus, minus),
        };
        if self.transformed {
            mult as f64 * self.base.decay_bound(d) + phi
        } else {
            phi
        }
    }

    /// Clusters (with `d ≤ d_max`) touching ∇_γ and their Φ′ values.
    pub fn cluster_values(&self, path: &Path, modification: Option<Domain>) -> Vec<(Cluster, f64)> {
        let nabla = nabla_bonds(path);
        let (plus, minus) = delta_sets(path);
        let targets = nabla_plaquettes(path);
        clusters_touching(targets.iter(), self.base.shapes())
            .into_iter()
            .map(|(c, d)| {
                let mult = nabla_multiplicity(&c, &nabla);
                let v = self.phi_prime(&c, d, mult, &intersect(&c, &plus), &intersect(&c, &minus), modification);
                (c, v)
            })
            .collect()
    }

    /// log q(γ) = −β′|γ| + Σ_{𝒞∩∇_γ≠∅} Φ′(𝒞;γ).
    pub fn log_q(&self, path: &Path, modification: Option<Domain>) -> f64 {
        let s: f64 = if self.transformed || !self.base.is_zero() {
            self.cluster_values(path, modification).iter().map(|(_, v)| v).sum()
        } else {
            0.0
        };
        -self.beta_prime * path.len() as f64 + s
    }
}

/// Φ ↦ (Φ′, β + 3c(β)).
pub fn positive_transform(base: &Decoration) -> PositiveDecoration {
    let (c, tail) = c_beta(base);
    PositiveDecoration {
        base: base.clone(),
        transformed: true,
        c_beta: c,
        c_tail: tail,
        beta_prime: base.beta + 3.0 * c,
    }
}

/// Γ = [γ, 𝒞]: a contour with a set of clusters touching ∇_γ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Animal {
    pub path: Path,
    pub clusters: Vec<Cluster>,
}

impl Animal {
    pub fn new(path: Path, mut clusters: Vec<Cluster>) -> Self {
        clusters.sort_by_key(|c| (c.anchor(), c.clone()));
        clusters.dedup();
        Animal { path, clusters }
    }

    pub fn bare(path: Path) -> Self {
        Animal {
            path,
            clusters: Vec::new(),
        }
    }

    pub fn displacement(&self) -> Site {
        self.path.displacement()
    }
}

impl Translate for Animal {
    fn translate(&self, v: Site) -> Self {
        Animal {
            path: self.path.translate(v),
            clusters: self.clusters.iter().map(|c| c.translate(v)).collect(),
        }
    }
}

/// log q_D(Γ) = −β′|γ| + Σ_{𝒞∈Γ} log(e^{Φ′_D(𝒞;γ)} − 1).
pub fn animal_weight(a: &Animal, pd: &PositiveDecoration, modification: Option<Domain>) -> Result<f64> {
    let mut w = -pd.beta_prime * a.path.len() as f64;
    if a.clusters.is_empty() {
        return Ok(w);
    }
    let nabla = nabla_bonds(&a.path);
    let (plus, minus) = delta_sets(&a.path);
    for c in &a.clusters {
        let mult = nabla_multiplicity(c, &nabla);
        if mult == 0 {
            return Err(Error::Invalid(format!("cluster at {} misses the thickened contour", c.anchor())));
        }
        let d = d_value(c);
        if d > pd.base.d_max {
            return Err(Error::Invalid(format!("cluster with d={d} beyond d_max={}", pd.base.d_max)));
        }
        let v = pd.phi_prime(c, d, mult, &intersect(c, &plus), &intersect(c, &minus), modification);
        w += v.exp_m1().ln();
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub log_g: f64,
    pub n_paths: u64,
    pub max_len: usize,
    /// log of a bound on the contribution of contours longer than `max_len`.
    pub log_tail_bound: f64,
}

/// Which weight a partition function sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    /// Free weights q(γ).
    Free,
    /// Modified weights q_D(γ) with Φ_D = Φ·1{𝒞⊂D}.
    Modified(Domain),
}

/// log 𝒢(x | γ ⊂ constraint, extra) summed over admissible contours
/// 0 → x of length ≤ `max_len`.
pub fn partition_function(
    x: Site,
    deco: &Decoration,
    weighting: Weighting,
    constraint: Domain,
    extra: Option<&dyn Fn(&Path) -> bool>,
    max_len: usize,
) -> Result<PartitionResult> {
    if x == Site::new(0, 0) {
        return Err(Error::Invalid("endpoint must differ from the origin".into()));
    }
    if max_len > 30 {
        return Err(Error::guard("partition_function (max_len)", max_len as u64, 30));
    }
    let modification = match weighting {
        Weighting::Free => None,
        Weighting::Modified(d) => Some(d),
    };
    let mut logs: Vec<f64> = Vec::new();
    let mut by_len = vec![0u64; max_len + 1];
    let mut n_paths = 0u64;
    let mut visited = 0u64;
    let mut over = false;
    enumerate_paths(
        Site::new(0, 0),
        max_len,
        &[],
        |t, steps| {
            visited += 1;
            if visited > PATH_GUARD {
                over = true;
            }
            over || !constraint.contains_vertex(t.position())
                || steps.len() as i64 + (x - t.position()).l1() > max_len as i64
        },
        |t, steps| {
            if t.position() != x {
                return;
            }
            let path = Path::new(Site::new(0, 0), steps.to_vec());
            if let Some(f) = extra {
                if !f(&path) {
                    return;
                }
            }
            n_paths += 1;
            if deco.is_zero() {
                by_len[steps.len()] += 1;
            } else {
                logs.push(report(&path, deco, modification).log_weight);
            }
        },
    );
    if over {
        return Err(Error::guard("partition_function", visited, PATH_GUARD));
    }
    for (l, &n) in by_len.iter().enumerate() {
        if n > 0 {
            logs.push((n as f64).ln() - deco.beta * l as f64);
        }
    }
    let log_g = if logs.is_empty() { f64::NEG_INFINITY } else { log_sum_exp(&logs) };
    Ok(PartitionResult {
        log_g,
        n_paths,
        max_len,
        log_tail_bound: length_tail(deco, x.l1() as usize, max_len),
    })
}

/// log Σ_{L > max_len, L ≡ ‖x‖₁ mod 2} 4·3^{L−1} e^{−(β−s)L}, where s bounds
/// the decoration sum per bond.
fn length_tail(deco: &Decoration, l1: usize, max_len: usize) -> f64 {
    let per_plaquette: f64 = deco
        .shapes()
        .iter()
        .map(|(c, d)| c.len() as f64 * deco.decay_bound(*d))
        .sum::<f64>()
        + cluster_tail(deco);
    let s = if deco.is_zero() { 0.0 } else { 2.0 * per_plaquette };
    let r = 3.0 * (-(deco.beta - s)).exp();
    if r >= 1.0 {
        return f64::INFINITY;
    }
    let mut l0 = max_len + 1;
    if (l0 + l1) % 2 == 1 {
        l0 += 1;
    }
    (4.0f64 / 3.0).ln() + l0 as f64 * r.ln() - (1.0 - r * r).ln()
}

/// Whether the first step of a path is in `dirs` (helper for constraints).
pub fn starts_with(path: &Path, dirs: &[Dir]) -> bool {
    path.steps.first().map(|d| dirs.contains(d)).unwrap_or(false)
}
