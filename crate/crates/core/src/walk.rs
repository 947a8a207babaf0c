//! The effective random walk in the upper half-plane: simulation, exact
//! column dynamic programs, Doney's harmonic function, conditioned bridges,
//! diffusive rescaling and the limit-theorem checks.
//!
//! Heights are walk y-coordinates; the walk is killed on entering
//! ℍ₋ = {y < 0}. Doney's V₁ is indexed by `a = y + 1 ≥ 1`.

use crate::cone::StepDistribution;
use crate::error::{Error, Result};
use crate::lattice::Site;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Budget on (columns × heights) for the column dynamic programs.
pub const DP_GUARD: u64 = 60_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkPath {
    pub start: Site,
    pub steps: Vec<Site>,
    pub positions: Vec<Site>,
    /// First index at which each registered target set was hit.
    pub hit_records: BTreeMap<String, Option<usize>>,
}

impl WalkPath {
    pub fn from_steps(start: Site, steps: Vec<Site>) -> Self {
        let mut positions = Vec::with_capacity(steps.len() + 1);
        let mut p = start;
        positions.push(p);
        for &s in &steps {
            p = p + s;
            positions.push(p);
        }
        WalkPath {
            start,
            steps,
            positions,
            hit_records: BTreeMap::new(),
        }
    }

    pub fn end(&self) -> Site {
        *self.positions.last().unwrap()
    }

    /// Record the first index whose position satisfies `pred`.
    pub fn register<F: Fn(Site) -> bool>(&mut self, name: &str, pred: F) -> Option<usize> {
        let h = self.positions.iter().position(|&p| pred(p));
        self.hit_records.insert(name.to_string(), h);
        h
    }

    /// Linearly interpolated height at horizontal coordinate `x`.
    pub fn height_at(&self, x: f64) -> f64 {
        let ps = &self.positions;
        if x <= ps[0].x as f64 {
            return ps[0].y as f64;
        }
        for w in ps.windows(2) {
            let (a, b) = (w[0], w[1]);
            if x <= b.x as f64 {
                let t = (x - a.x as f64) / (b.x - a.x) as f64;
                return a.y as f64 + t * (b.y - a.y) as f64;
            }
        }
        ps.last().unwrap().y as f64
    }
}

/// `n` i.i.d. steps from the normalised step law.
pub fn simulate<R: Rng + ?Sized>(step: &StepDistribution, start: Site, n: usize, rng: &mut R) -> WalkPath {
    let steps = (0..n).map(|_| step.sample(rng)).collect();
    WalkPath::from_steps(start, steps)
}

/// One-dimensional law on ℤ as (value, probability), sorted.
pub type Law1D = Vec<(i64, f64)>;

/// The normalised law of X₂.
pub fn vertical_marginal(step: &StepDistribution) -> Law1D {
    let mut m: BTreeMap<i64, f64> = BTreeMap::new();
    for (v, p) in step.normalized() {
        *m.entry(v.y).or_default() += p;
    }
    m.into_iter().collect()
}

pub fn ssrw_1d() -> Law1D {
    vec![(-1, 0.5), (1, 0.5)]
}

/// Centered two-sided geometric law P(k) ∝ r^{|k|}, truncated at |k| ≤ kmax.
pub fn geometric_1d(r: f64, kmax: i64) -> Law1D {
    let mut v: Law1D = (-kmax..=kmax).map(|k| (k, r.powi(k.abs() as i32))).collect();
    let z: f64 = v.iter().map(|e| e.1).sum();
    v.iter_mut().for_each(|e| e.1 /= z);
    v
}

/// Planar step law with X₁ ≡ 1 and X₂ distributed as `law`.
pub fn unit_column_step(law: &Law1D) -> StepDistribution {
    StepDistribution::from_masses(law.iter().map(|&(k, p)| (Site::new(1, k), p)).collect(), f64::INFINITY, 0)
}

fn moments_1d(law: &Law1D) -> (f64, f64) {
    let m: f64 = law.iter().map(|&(k, p)| k as f64 * p).sum();
    let v: f64 = law.iter().map(|&(k, p)| (k as f64 - m).powi(2) * p).sum();
    (m, v)
}

/// Height cap for the DPs: far enough above the endpoints that paths
/// reaching it contribute below ~1e−12 (sub-Gaussian bound on the maximum
/// of the vertical walk over `n` steps, plus a tail margin).
pub fn height_cap(step: &StepDistribution, top: i64, n: usize) -> i64 {
    let law = vertical_marginal(step);
    let (_, var) = moments_1d(&law);
    let jump = law.iter().map(|&(k, _)| k.abs()).max().unwrap_or(1);
    top + (8.0 * (n as f64 * var.max(0.25)).sqrt()).ceil() as i64 + 4 * jump + 8
}

/// Exact P_{(0,u)}(H_{(N,v)} < H_{ℍ₋}) by a forward column DP with cap.
pub fn hitting_probability_dp(step: &StepDistribution, u: i64, v: i64, n: usize) -> Result<f64> {
    if u < 0 || v < 0 {
        return Ok(0.0);
    }
    if n == 0 {
        return Ok(if u == v { 1.0 } else { 0.0 });
    }
    let cap = height_cap(step, u.max(v), n);
    let w = (cap + 1) as usize;
    let states = (n as u64 + 1) * w as u64;
    if states > DP_GUARD {
        return Err(Error::guard("hitting_probability_dp", states, DP_GUARD));
    }
    let norm = step.normalized();
    let mut grid = vec![0.0f64; (n + 1) * w];
    grid[u as usize] = 1.0;
    for x in 0..n {
        for y in 0..w {
            let p = grid[x * w + y];
            if p == 0.0 {
                continue;
            }
            for &(d, m) in &norm {
                let (nx, ny) = (x + d.x as usize, y as i64 + d.y);
                if nx > n || ny < 0 || ny > cap {
                    continue;
                }
                grid[nx * w + ny as usize] += p * m;
            }
        }
    }
    Ok(grid[n * w + v as usize])
}

/// P_u(H_{ℍ₋} > k) for the vertical walk (k steps surviving).
pub fn survival_probabilities(law: &Law1D, u: i64, k_max: usize) -> Result<Vec<f64>> {
    let (_, var) = moments_1d(law);
    let jump = law.iter().map(|&(k, _)| k.abs()).max().unwrap_or(1);
    let cap = u + (8.0 * (k_max as f64 * var).sqrt()).ceil() as i64 + 4 * jump + 8;
    if (cap as u64) * (k_max as u64) > DP_GUARD * 10 {
        return Err(Error::guard("survival_probabilities", cap as u64 * k_max as u64, DP_GUARD * 10));
    }
    let w = (cap + 1) as usize;
    let mut cur = vec![0.0f64; w];
    cur[u as usize] = 1.0;
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(1.0);
    for _ in 0..k_max {
        let mut nxt = vec![0.0f64; w];
        for y in 0..w {
            let p = cur[y];
            if p == 0.0 {
                continue;
            }
            for &(d, m) in law {
                let ny = y as i64 + d;
                if ny >= 0 && ny <= cap {
                    nxt[ny as usize] += p * m;
                }
            }
        }
        cur = nxt;
        out.push(cur.iter().sum());
    }
    Ok(out)
}

/// P(S(k) = (N, v), H_{ℍ₋} > k) for every N, starting from (0,u).
pub fn local_probabilities(step: &StepDistribution, u: i64, v: i64, k: usize) -> Result<BTreeMap<i64, f64>> {
    let norm = step.normalized();
    let xmax_step = norm.iter().map(|(d, _)| d.x).max().unwrap_or(1) as usize;
    let xw = k * xmax_step + 1;
    let cap = height_cap(step, u.max(v), k);
    let w = (cap + 1) as usize;
    let states = xw as u64 * w as u64;
    if states > DP_GUARD {
        return Err(Error::guard("local_probabilities", states, DP_GUARD));
    }
    let mut cur = vec![0.0f64; xw * w];
    cur[u as usize] = 1.0;
    let mut xhi = 0usize;
    for _ in 0..k {
        let mut nxt = vec![0.0f64; xw * w];
        for x in 0..=xhi {
            for y in 0..w {
                let p = cur[x * w + y];
                if p == 0.0 {
                    continue;
                }
                for &(d, m) in &norm {
                    let (nx, ny) = (x + d.x as usize, y as i64 + d.y);
                    if ny < 0 || ny > cap {
                        continue;
                    }
                    nxt[nx * w + ny as usize] += p * m;
                }
            }
        }
        xhi += xmax_step;
        cur = nxt;
    }
    let mut out = BTreeMap::new();
    for x in 0..xw {
        let p = cur[x * w + v as usize];
        if p > 0.0 {
            out.insert(x as i64, p);
        }
    }
    Ok(out)
}

/// V₁ (or V₁′ for the reversed walk) on heights `1..=range_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicProfile {
    /// values[a-1] = V(a).
    pub values: Vec<f64>,
    /// `false` for V₁ (law as given), `true` for V₁′ (law negated).
    pub reversed: bool,
    /// E[V(a+X); a+X > 0] − V(a) for a in 1..=range_max.
    pub residuals: Vec<f64>,
}

impl HarmonicProfile {
    pub fn at(&self, a: i64) -> f64 {
        if a < 1 {
            0.0
        } else {
            self.values[(a - 1) as usize]
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        if a[piv][c].abs() < 1e-300 {
            return Err(Error::NonConvergence("singular harmonic system".into()));
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f == 0.0 {
                continue;
            }
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// Doney's harmonic function for the walk killed on leaving {a ≥ 1}:
/// V(a) = E[V(a+X); a+X ≥ 1], V(a) ~ a.
///
/// Solved as a linear system on `1..=M` (M well beyond `range_max`) with
/// the far-field closure V(b) = b + c for b > M; `c` is updated from the
/// solution until it stabilises. The law must be centred.
pub fn doney_v1(law: &Law1D, range_max: usize, reversed: bool) -> Result<HarmonicProfile> {
    let law: Law1D = if reversed {
        let mut l: Law1D = law.iter().map(|&(k, p)| (-k, p)).collect();
        l.sort_by_key(|e| e.0);
        l
    } else {
        law.clone()
    };
    let (mean, var) = moments_1d(&law);
    if mean.abs() > 1e-9 {
        return Err(Error::Invalid(format!("Doney V needs a centred step (mean {mean})")));
    }
    if !(var > 0.0) {
        return Err(Error::Invalid("degenerate step".into()));
    }
    let jump = law.iter().map(|&(k, _)| k.abs()).max().unwrap();
    let m = range_max + 200 + 20 * jump as usize;
    if m > 4000 {
        return Err(Error::guard("doney_v1 (system size)", m as u64, 4000));
    }
    // Unknowns V(1..=M) and c; far field V(b) = b + c for b > M, closed by
    // V(M) = M + c.
    let mut a = vec![vec![0.0; m + 1]; m + 1];
    let mut b = vec![0.0; m + 1];
    for i in 0..m {
        let h = i as i64 + 1;
        a[i][i] += 1.0;
        for &(k, p) in &law {
            let t = h + k;
            if t < 1 {
                continue;
            }
            if t as usize <= m {
                a[i][t as usize - 1] -= p;
            } else {
                b[i] += p * t as f64;
                a[i][m] -= p;
            }
        }
    }
    a[m][m - 1] = 1.0;
    a[m][m] = -1.0;
    b[m] = m as f64;
    let mut values = solve_dense(a, b)?;
    let c = values.pop().unwrap();
    values.truncate(range_max);
    // Residuals on the reported range (values beyond it from the solve).
    let full = |t: i64, vals: &Vec<f64>| -> f64 {
        if t < 1 {
            0.0
        } else if (t as usize) <= vals.len() {
            vals[t as usize - 1]
        } else {
            t as f64 + c
        }
    };
    let residuals = (1..=range_max as i64)
        .map(|h| law.iter().map(|&(k, p)| p * full(h + k, &values)).sum::<f64>() - full(h, &values))
        .collect();
    Ok(HarmonicProfile {
        values,
        reversed,
        residuals,
    })
}

/// Doney V by plain iteration V_{j+1}(a) = E[V_j(a+X); a+X ≥ 1] from
/// V₀(a) = a, stopping when successive iterates differ by < `tol`.
pub fn doney_v1_iterative(law: &Law1D, range_max: usize, tol: f64, max_iter: usize) -> Result<HarmonicProfile> {
    let jump = law.iter().map(|&(k, _)| k.abs()).max().unwrap();
    let m = range_max + (max_iter as i64 * jump).min(20_000) as usize + 1;
    let mut v: Vec<f64> = (1..=m).map(|a| a as f64).collect();
    for _ in 0..max_iter {
        let mut nv = v.clone();
        let mut diff: f64 = 0.0;
        for i in 0..m {
            let h = i as i64 + 1;
            let s: f64 = law
                .iter()
                .map(|&(k, p)| {
                    let t = h + k;
                    if t < 1 {
                        0.0
                    } else if t as usize <= m {
                        p * v[t as usize - 1]
                    } else {
                        p * t as f64
                    }
                })
                .sum();
            nv[i] = s;
            if i < range_max {
                diff = diff.max((s - v[i]).abs());
            }
        }
        v = nv;
        if diff < tol {
            v.truncate(range_max + jump as usize);
            let residuals = (1..=range_max as i64)
                .map(|h| {
                    law.iter()
                        .map(|&(k, p)| if h + k < 1 { 0.0 } else { p * v[(h + k) as usize - 1] })
                        .sum::<f64>()
                        - v[h as usize - 1]
                })
                .collect();
            v.truncate(range_max);
            return Ok(HarmonicProfile {
                values: v,
                reversed: false,
                residuals,
            });
        }
    }
    Err(Error::NonConvergence(format!("doney iteration did not reach {tol}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BridgeMethod {
    Rejection,
    DpBackward,
}

/// h(x, y) = P_{(x,y)}(H_{(N,v)} < H_{ℍ₋}) on [0,N] × [0,cap].
#[derive(Debug, Clone)]
pub struct BridgeTable {
    pub n: usize,
    pub v: i64,
    pub cap: i64,
    norm: Vec<(Site, f64)>,
    h: Vec<f64>,
}

impl BridgeTable {
    pub fn new(step: &StepDistribution, u: i64, v: i64, n: usize) -> Result<Self> {
        let cap = height_cap(step, u.max(v), n);
        let w = (cap + 1) as usize;
        let states = (n as u64 + 1) * w as u64;
        if states > DP_GUARD {
            return Err(Error::guard("BridgeTable", states, DP_GUARD));
        }
        let norm = step.normalized();
        let mut h = vec![0.0f64; (n + 1) * w];
        if v >= 0 && v <= cap {
            h[n * w + v as usize] = 1.0;
        }
        for x in (0..n).rev() {
            for y in 0..w {
                let mut s = 0.0;
                for &(d, m) in &norm {
                    let (nx, ny) = (x + d.x as usize, y as i64 + d.y);
                    if nx > n || ny < 0 || ny > cap {
                        continue;
                    }
                    s += m * h[nx * w + ny as usize];
                }
                h[x * w + y] = s;
            }
        }
        Ok(BridgeTable { n, v, cap, norm, h })
    }

    pub fn prob(&self, x: i64, y: i64) -> f64 {
        if x < 0 || x as usize > self.n || y < 0 || y > self.cap {
            return 0.0;
        }
        self.h[x as usize * (self.cap + 1) as usize + y as usize]
    }

    /// Exact h-transform sample from (0,u).
    pub fn sample<R: Rng + ?Sized>(&self, u: i64, rng: &mut R) -> Result<WalkPath> {
        let h0 = self.prob(0, u);
        if !(h0 > 0.0) {
            return Err(Error::ZeroProbability(format!("(0,{u}) -> ({},{})", self.n, self.v)));
        }
        let mut p = Site::new(0, u);
        let mut steps = Vec::new();
        let mut w = vec![0.0; self.norm.len()];
        while !(p.x as usize == self.n && p.y == self.v) {
            let hp = self.prob(p.x, p.y);
            let mut tot = 0.0;
            for (i, &(d, m)) in self.norm.iter().enumerate() {
                w[i] = m * self.prob(p.x + d.x, p.y + d.y);
                tot += w[i];
            }
            let mut r = rng.random::<f64>() * tot;
            let mut pick = None;
            for (i, &wi) in w.iter().enumerate() {
                if wi > 0.0 {
                    pick = Some(i);
                    if r < wi {
                        break;
                    }
                    r -= wi;
                }
            }
            let i = pick.ok_or_else(|| Error::ZeroProbability("dead end in bridge table".into()))?;
            debug_assert!((tot / hp - 1.0).abs() < 1e-6 || hp < 1e-250);
            let d = self.norm[i].0;
            steps.push(d);
            p = p + d;
        }
        Ok(WalkPath::from_steps(Site::new(0, u), steps))
    }

    /// log of the h-transformed probability of a path (for exactness checks).
    pub fn log_likelihood(&self, path: &WalkPath) -> f64 {
        let mut l = 0.0;
        for (i, &d) in path.steps.iter().enumerate() {
            let a = path.positions[i];
            let b = path.positions[i + 1];
            let m = self.norm.iter().find(|e| e.0 == d).map(|e| e.1).unwrap_or(0.0);
            l += (m * self.prob(b.x, b.y) / self.prob(a.x, a.y)).ln();
        }
        l
    }
}

/// A sample from the walk from (0,u) conditioned on H_{(N,v)} < H_{ℍ₋}.
pub fn conditioned_bridge<R: Rng + ?Sized>(
    step: &StepDistribution,
    u: i64,
    v: i64,
    n: usize,
    rng: &mut R,
    method: BridgeMethod,
) -> Result<WalkPath> {
    match method {
        BridgeMethod::DpBackward => BridgeTable::new(step, u, v, n)?.sample(u, rng),
        BridgeMethod::Rejection => {
            if hitting_probability_dp(step, u, v, n)? <= 0.0 {
                return Err(Error::ZeroProbability(format!("(0,{u}) -> ({n},{v})")));
            }
            loop {
                let mut p = Site::new(0, u);
                let mut steps = Vec::new();
                while (p.x as usize) < n && p.y >= 0 {
                    let d = step.sample(rng);
                    steps.push(d);
                    p = p + d;
                }
                if p.x as usize == n && p.y == v {
                    return Ok(WalkPath::from_steps(Site::new(0, u), steps));
                }
            }
        }
    }
}

/// Piecewise-linear 𝔍_n: x/n against y/(σ√n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub sigma: f64,
    pub n: usize,
    /// Lattice span of the heights (2 for SSRW at fixed column parity).
    pub span: i64,
}

/// Span of the lattice generated by the differences of the X₂ support.
pub fn lattice_span(law: &Law1D) -> i64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let k0 = law.first().map(|e| e.0).unwrap_or(0);
    law.iter().fold(0, |g, &(k, _)| gcd(g, k - k0)).max(1)
}

pub fn rescale(path: &WalkPath, n: usize, sigma: f64) -> Result<RescaledPath> {
    if path.positions.is_empty() || n == 0 || !(sigma > 0.0) {
        return Err(Error::Invalid("rescale needs a nonempty path, n > 0 and sigma > 0".into()));
    }
    let s = sigma * (n as f64).sqrt();
    let x0 = path.start.x;
    Ok(RescaledPath {
        times: path.positions.iter().map(|p| (p.x - x0) as f64 / n as f64).collect(),
        values: path.positions.iter().map(|p| p.y as f64 / s).collect(),
        sigma,
        n,
        span: 1,
    })
}

impl RescaledPath {
    pub fn with_span(mut self, span: i64) -> Self {
        self.span = span.max(1);
        self
    }

    pub fn at(&self, t: f64) -> f64 {
        let (ts, vs) = (&self.times, &self.values);
        if t <= ts[0] {
            return vs[0];
        }
        for i in 1..ts.len() {
            if t <= ts[i] {
                let f = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
                return vs[i - 1] + f * (vs[i] - vs[i - 1]);
            }
        }
        *vs.last().unwrap()
    }
}

/// Diffusive constant σ² = σ₂²/μ of a step law (μ = E X₁).
pub fn diffusion_sigma(step: &StepDistribution) -> f64 {
    (step.variances()[1] / step.mean[0]).sqrt()
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut f = vec![0.0; n + 1];
    for i in 1..=n {
        f[i] = f[i - 1] + (i as f64).ln();
    }
    f
}

/// Exact marginal of a uniform SSRW excursion of length `2m` at step `k`,
/// as a CDF in the rescaled distance to the killing barrier, (h+1)/√(2m).
/// Continuity correction spreads each atom uniformly over its parity cell
/// [h, h+2].
#[derive(Debug, Clone)]
pub struct ExcursionReference {
    pub len: usize,
    pub t: f64,
    /// (rescaled cell upper edge, cumulative probability).
    cdf: Vec<(f64, f64)>,
    scale: f64,
}

impl ExcursionReference {
    pub fn new(len: usize, t: f64) -> Result<Self> {
        if len % 2 != 0 || len < 4 || !(0.0..=1.0).contains(&t) {
            return Err(Error::Invalid("excursion reference needs even length and t in [0,1]".into()));
        }
        let lf = ln_factorials(len);
        let binom = |n: usize, k: i64| -> f64 {
            if k < 0 || k as usize > n {
                f64::NEG_INFINITY
            } else {
                lf[n] - lf[k as usize] - lf[n - k as usize]
            }
        };
        // Nonnegative paths 0 → h in n steps: C(n,(n+h)/2) − C(n,(n+h)/2+1).
        let count = |n: usize, h: i64| -> f64 {
            let up = (n as i64 + h) / 2;
            let a = binom(n, up);
            let b = binom(n, up + 1);
            if a == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            a + (-(b - a).exp()).ln_1p()
        };
        let mut k = (t * len as f64).round() as usize;
        k = k.min(len);
        let scale = (len as f64).sqrt();
        if k == 0 || k == len {
            return Ok(ExcursionReference {
                len,
                t,
                cdf: vec![(0.0, 1.0)],
                scale,
            });
        }
        let mut logs = Vec::new();
        let hmax = k.min(len - k) as i64;
        let mut h = (k % 2) as i64;
        while h <= hmax {
            logs.push((h, count(k, h) + count(len - k, h)));
            h += 2;
        }
        let mx = logs.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logs.iter().map(|e| (e.1 - mx).exp()).sum();
        let mut acc = 0.0;
        let mut cdf = Vec::with_capacity(logs.len());
        for (h, l) in logs {
            acc += (l - mx).exp() / z;
            cdf.push(((h + 2) as f64 / scale, acc));
        }
        Ok(ExcursionReference { len, t, cdf, scale })
    }

    pub fn cdf(&self, z: f64) -> f64 {
        if self.cdf.len() == 1 {
            return if z >= 0.0 { 1.0 } else { 0.0 };
        }
        let w = 2.0 / self.scale;
        let mut prev = 0.0;
        for &(hi, c) in &self.cdf {
            let lo = hi - w;
            if z < lo {
                return prev;
            }
            if z < hi {
                return prev + (c - prev) * (z - lo) / (hi - lo);
            }
            prev = c;
        }
        1.0
    }
}

/// Uniform SSRW excursion of length `2m` via the cycle lemma.
pub fn sample_ssrw_excursion<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<i64> {
    use rand::seq::SliceRandom;
    // m up-steps and m+1 down-steps; the rotation starting after the first
    // minimum is a Dyck path followed by a final down-step.
    let mut s: Vec<i8> = vec![1; m];
    s.extend(std::iter::repeat(-1).take(m + 1));
    s.shuffle(rng);
    let mut h = 0i64;
    let (mut best, mut arg) = (0i64, 0usize);
    for (i, &d) in s.iter().enumerate() {
        h += d as i64;
        if h < best {
            best = h;
            arg = i + 1;
        }
    }
    let mut path = Vec::with_capacity(2 * m + 1);
    let mut y = 0i64;
    path.push(0);
    for j in 0..2 * m {
        y += s[(arg + j) % s.len()] as i64;
        path.push(y);
    }
    path
}

/// KS distance between the sample and a reference CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| p.total_cmp(q));
    y.sort_by(|p, q| p.total_cmp(q));
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

/// Asymptotic two-sample KS p-value (Kolmogorov distribution).
pub fn ks_p_value(d: f64, n: usize, m: usize) -> f64 {
    let ne = (n * m) as f64 / (n + m) as f64;
    let l = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let mut s = 0.0;
    for k in 1..200 {
        let t = 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k as f64 * l).powi(2)).exp();
        s += t;
        if t.abs() < 1e-12 {
            break;
        }
    }
    s.clamp(0.0, 1.0)
}

/// Per-t KS distances of rescaled samples against the excursion reference.
/// KS distance between a lattice sample smoothed over cells of width `w`
/// (each value spread uniformly on [v − w/2, v + w/2]) and a continuous CDF.
pub fn ks_smoothed<F: Fn(f64) -> f64>(samples: &[f64], w: f64, cdf: F) -> f64 {
    if !(w > 0.0) {
        return ks_one_sample(samples, cdf);
    }
    let mut lo: Vec<f64> = samples.iter().map(|v| v - w / 2.0).collect();
    lo.sort_by(|a, b| a.total_cmp(b));
    let n = lo.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + lo[i];
    }
    let smoothed = |z: f64| -> f64 {
        let full = lo.partition_point(|&l| l <= z - w);
        let part = lo.partition_point(|&l| l <= z);
        let ramp = (part - full) as f64 * z - (prefix[part] - prefix[full]);
        (full as f64 * w + ramp) / (n as f64 * w)
    };
    lo.iter()
        .flat_map(|&l| [l, l + w])
        .fold(0.0f64, |d, z| d.max((smoothed(z) - cdf(z)).abs()))
}

/// Per-t KS distances of rescaled samples against the excursion reference.
///
/// Heights are measured from the killing barrier (y + 1) and, being
/// lattice-valued, are smoothed over one lattice cell span/(σ√n) before the
/// comparison. At t ∈ {0, 1} the raw values are compared with the point
/// mass at 0.
pub fn excursion_test(samples: &[RescaledPath], t_list: &[f64], reference_len: usize) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for &t in t_list {
        let r = ExcursionReference::new(reference_len, t)?;
        if t <= 0.0 || t >= 1.0 {
            let vals: Vec<f64> = samples.iter().map(|s| s.at(t)).collect();
            out.push((t, ks_one_sample(&vals, |z| r.cdf(z))));
            continue;
        }
        let cell = samples.first().map(|s| s.span as f64 / (s.sigma * (s.n as f64).sqrt())).unwrap_or(0.0);
        let vals: Vec<f64> = samples.iter().map(|s| s.at(t) + 1.0 / (s.sigma * (s.n as f64).sqrt())).collect();
        out.push((t, ks_smoothed(&vals, cell, |z| r.cdf(z))));
    }
    Ok(out)
}

/// An estimate with its standard error and the window it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub quantity: String,
    pub estimate: f64,
    pub stderr: f64,
    pub window: String,
}

impl FitResult {
    pub fn csv_header() -> &'static str {
        "quantity,estimate,stderr,window"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{:.10},{:.10},{}", self.quantity, self.estimate, self.stderr, self.window)
    }

    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.estimate - z * self.stderr, self.estimate + z * self.stderr)
    }
}

pub fn fits_to_csv(fits: &[FitResult]) -> String {
    let mut s = String::from(FitResult::csv_header());
    s.push('\n');
    for f in fits {
        let _ = writeln!(s, "{}", f.csv_row());
    }
    s
}

/// Least squares y = a + b x; returns (a, b, stderr of b).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = x.iter().zip(y).map(|(p, q)| (q - a - b * p).powi(2)).sum();
    let se = if x.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (a, b, se)
}

fn window(v: &[usize]) -> String {
    format!("{}..{}", v.first().unwrap_or(&0), v.last().unwrap_or(&0))
}

/// Settings for [`ballot_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallotSettings {
    pub u: i64,
    pub v: i64,
    pub k_grid: Vec<usize>,
    pub n_grid: Vec<usize>,
    /// Number of steps for the Gaussian-profile fit.
    pub profile_k: usize,
    /// Heights for the V₁-factorisation grid and its N.
    pub factor_heights: Vec<i64>,
    pub factor_n: usize,
}

impl Default for BallotSettings {
    fn default() -> Self {
        BallotSettings {
            u: 1,
            v: 1,
            k_grid: (6..=11).map(|e| 1usize << e).collect(),
            n_grid: (6..=11).map(|e| 1usize << e).collect(),
            profile_k: 256,
            factor_heights: (1..=8).collect(),
            factor_n: 512,
        }
    }
}

/// Survival exponent, hitting exponent, Gaussian-profile variance ratio
/// and V₁-factorisation spread.
pub fn ballot_check(step: &StepDistribution, s: &BallotSettings) -> Result<Vec<FitResult>> {
    let law = vertical_marginal(step);
    let mut fits = Vec::new();
    // (a) survival ~ k^{−1/2}
    let kmax = *s.k_grid.iter().max().unwrap_or(&1);
    let surv = survival_probabilities(&law, s.u, kmax)?;
    let lx: Vec<f64> = s.k_grid.iter().map(|&k| (k as f64).ln()).collect();
    let ly: Vec<f64> = s.k_grid.iter().map(|&k| surv[k].ln()).collect();
    let (_, b, se) = linear_fit(&lx, &ly);
    fits.push(FitResult {
        quantity: "survival_exponent".into(),
        estimate: b,
        stderr: se,
        window: window(&s.k_grid),
    });
    // (c) hitting ~ N^{−3/2}
    let mut hy = Vec::new();
    for &n in &s.n_grid {
        hy.push(hitting_probability_dp(step, s.u, s.v, n)?.ln());
    }
    let hx: Vec<f64> = s.n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let (_, b, se) = linear_fit(&hx, &hy);
    fits.push(FitResult {
        quantity: "hitting_exponent".into(),
        estimate: b,
        stderr: se,
        window: window(&s.n_grid),
    });
    // (b) Gaussian profile in N − kμ: fitted variance / (kσ₁²)
    if step.variances()[0] > 0.0 {
        let lp = local_probabilities(step, s.u, s.v, s.profile_k)?;
        let z: f64 = lp.values().sum();
        let m: f64 = lp.iter().map(|(x, p)| *x as f64 * p).sum::<f64>() / z;
        let var: f64 = lp.iter().map(|(x, p)| (*x as f64 - m).powi(2) * p).sum::<f64>() / z;
        let expect = s.profile_k as f64 * step.variances()[0];
        fits.push(FitResult {
            quantity: "profile_variance_ratio".into(),
            estimate: var / expect,
            stderr: 0.0,
            window: format!("k={}", s.profile_k),
        });
        fits.push(FitResult {
            quantity: "profile_peak_over_k_mu".into(),
            estimate: m / (s.profile_k as f64 * step.mean[0]),
            stderr: 0.0,
            window: format!("k={}", s.profile_k),
        });
    }
    // (d) P(u,v)/(V₁(u)V₁′(v)) over a grid
    if !s.factor_heights.is_empty() {
        let centred: Law1D = {
            let (mu, _) = moments_1d(&law);
            if mu.abs() < 1e-6 {
                law.clone()
            } else {
                Vec::new()
            }
        };
        if !centred.is_empty() {
            let top = *s.factor_heights.iter().max().unwrap() as usize + 2;
            let v1 = doney_v1(&centred, top, false)?;
            let v1r = doney_v1(&centred, top, true)?;
            let mut ratios = Vec::new();
            for &u in &s.factor_heights {
                for &v in &s.factor_heights {
                    let p = hitting_probability_dp(step, u, v, s.factor_n)?;
                    ratios.push(p / (v1.at(u + 1) * v1r.at(v + 1)));
                }
            }
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let spread = ratios.iter().fold(0.0f64, |m, r| m.max((r / mean - 1.0).abs()));
            fits.push(FitResult {
                quantity: "v1_factorisation_spread".into(),
                estimate: spread,
                stderr: 0.0,
                window: format!("N={}", s.factor_n),
            });
            fits.push(FitResult {
                quantity: "v1_factorisation_constant".into(),
                estimate: mean * (s.factor_n as f64).powf(1.5),
                stderr: 0.0,
                window: format!("N={}", s.factor_n),
            });
        }
    }
    Ok(fits)
}

/// Fraction of bridges with a position in [N^{4δ}, N − N^{4δ}] × [0, N^δ].
pub fn repulsion_check(bridges: &[WalkPath], n: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::Config("delta must lie in (0, 1/4)".into()));
    }
    if bridges.is_empty() {
        return Ok(0.0);
    }
    let nf = n as f64;
    let (x0, x1, y1) = (nf.powf(4.0 * delta), nf - nf.powf(4.0 * delta), nf.powf(delta));
    if x0 > x1 {
        return Ok(0.0);
    }
    let hits = bridges
        .iter()
        .filter(|b| {
            b.positions.iter().any(|p| {
                let (x, y) = ((p.x - b.start.x) as f64, p.y as f64);
                x >= x0 && x <= x1 && y >= 0.0 && y <= y1
            })
        })
        .count();
    Ok(hits as f64 / bridges.len() as f64)
}

/// Bridge dump CSV: sample_id, i, x, y.
pub fn bridges_to_csv(bridges: &[WalkPath]) -> String {
    let mut s = String::from("sample_id,i,x,y\n");
    for (k, b) in bridges.iter().enumerate() {
        for (i, p) in b.positions.iter().enumerate() {
            let _ = writeln!(s, "{k},{i},{},{}", p.x, p.y);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lazy() -> StepDistribution {
        unit_column_step(&vec![(-1, 1.0 / 3.0), (0, 1.0 / 3.0), (1, 1.0 / 3.0)])
    }

    #[test]
    fn simulate_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = lazy();
        let p = simulate(&s, Site::new(0, 0), 0, &mut rng);
        assert_eq!(p.positions, vec![Site::new(0, 0)]);
        let pm = StepDistribution::from_masses(vec![(Site::new(1, 0), 1.0)], 1.0, 1);
        let p = simulate(&pm, Site::new(0, 0), 5, &mut rng);
        assert_eq!(p.positions.iter().map(|q| q.x).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 5]);
        let w = simulate(&s, Site::new(0, 0), 100_000, &mut rng);
        let m = w.end().y as f64 / 1e5;
        assert!(m.abs() < 3.0 * (2.0f64 / 3.0 / 1e5).sqrt());
    }

    #[test]
    fn hitting_examples() {
        let s = lazy();
        assert!((hitting_probability_dp(&s, 1, 1, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((hitting_probability_dp(&s, 1, 1, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn doney_exact_cases() {
        let v = doney_v1(&ssrw_1d(), 50, false).unwrap();
        for a in 1..=50 {
            assert!((v.at(a) - a as f64).abs() < 1e-9);
        }
        assert!(v.max_residual() < 1e-9, "{}", v.max_residual());
        let it = doney_v1_iterative(&ssrw_1d(), 20, 1e-12, 10).unwrap();
        assert_eq!(it.max_residual(), 0.0);
        let lz = doney_v1(&vec![(-1, 1.0 / 3.0), (0, 1.0 / 3.0), (1, 1.0 / 3.0)], 30, false).unwrap();
        assert!(lz.values.iter().enumerate().all(|(i, x)| (x - (i + 1) as f64).abs() < 1e-9));
        let g = doney_v1(&geometric_1d(0.5, 40), 200, false).unwrap();
        assert!(g.max_residual() < 1e-6);
        assert!(g.values.windows(2).all(|w| w[1] >= w[0]));
        let r = g.at(200) / 200.0;
        assert!(r > 0.9 && r < 1.1);
    }

    #[test]
    fn bridge_examples() {
        let s = lazy();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = conditioned_bridge(&s, 1, 2, 1, &mut rng, BridgeMethod::DpBackward).unwrap();
        assert_eq!(b.steps, vec![Site::new(1, 1)]);
        for _ in 0..50 {
            let b = conditioned_bridge(&s, 1, 1, 20, &mut rng, BridgeMethod::DpBackward).unwrap();
            assert!(b.positions.iter().all(|p| p.y >= 0));
            assert_eq!(b.end(), Site::new(20, 1));
        }
        assert!(conditioned_bridge(&s, 1, 30, 5, &mut rng, BridgeMethod::DpBackward).is_err());
    }

    #[test]
    fn h_transform_is_exact() {
        // Full enumeration of 3^6 paths.
        let s = lazy();
        let n = 6;
        let t = BridgeTable::new(&s, 1, 1, n).unwrap();
        let z = hitting_probability_dp(&s, 1, 1, n).unwrap();
        let mut total = 0.0;
        for code in 0..3usize.pow(n as u32) {
            let steps: Vec<Site> = (0..n).map(|i| Site::new(1, (code / 3usize.pow(i as u32)) as i64 % 3 - 1)).collect();
            let w = WalkPath::from_steps(Site::new(0, 1), steps);
            if w.end() != Site::new(n as i64, 1) || w.positions.iter().any(|p| p.y < 0) {
                continue;
            }
            let direct = (n as f64) * (1.0f64 / 3.0).ln() - z.ln();
            assert!((t.log_likelihood(&w) - direct).abs() < 1e-12);
            total += direct.exp();
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejection_matches_dp() {
        let s = lazy();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 16;
        let a: Vec<f64> = (0..2000)
            .map(|_| conditioned_bridge(&s, 1, 1, n, &mut rng, BridgeMethod::DpBackward).unwrap().height_at(8.0))
            .collect();
        let b: Vec<f64> = (0..2000)
            .map(|_| conditioned_bridge(&s, 1, 1, n, &mut rng, BridgeMethod::Rejection).unwrap().height_at(8.0))
            .collect();
        let d = ks_two_sample(&a, &b);
        assert!(ks_p_value(d, a.len(), b.len()) > 0.01, "D = {d}");
    }

    #[test]
    fn rescale_properties() {
        let w = WalkPath::from_steps(Site::new(0, 0), vec![Site::new(1, 0); 4]);
        let r = rescale(&w, 4, 1.0).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.0));
        let w = WalkPath::from_steps(Site::new(0, 0), vec![Site::new(1, 1); 16]);
        let a = rescale(&w, 4, 1.0).unwrap().at(0.5);
        let b = rescale(&w, 16, 1.0).unwrap().at(0.125);
        assert!((a / b - 2.0).abs() < 1e-12);
        let c = rescale(&w, 4, 2.0).unwrap().at(0.5);
        assert!((a / c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn excursion_reference_self_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = 256;
        let r = ExcursionReference::new(2 * m, 0.5).unwrap();
        let xs: Vec<f64> = (0..4000)
            .map(|_| {
                let p = sample_ssrw_excursion(m, &mut rng);
                assert!(p.iter().all(|&y| y >= 0) && *p.last().unwrap() == 0);
                (p[m] as f64 + 1.0 + rng.random::<f64>() * 2.0 - 1.0) / (2.0 * m as f64).sqrt()
            })
            .collect();
        let d = ks_one_sample(&xs, |z| r.cdf(z));
        assert!(d < 1.63 / (xs.len() as f64).sqrt(), "{d}");
        let r0 = ExcursionReference::new(64, 0.0).unwrap();
        assert_eq!(r0.cdf(0.0), 1.0);
        assert_eq!(r0.cdf(-1e-9), 0.0);
    }

    #[test]
    fn repulsion_trivial_cases() {
        let w = WalkPath::from_steps(Site::new(0, 1), vec![Site::new(1, 0); 4]);
        assert_eq!(repulsion_check(&[w], 4, 0.24).unwrap(), 0.0);
    }

    #[test]
    fn lattice_spans() {
        assert_eq!(lattice_span(&ssrw_1d()), 2);
        assert_eq!(lattice_span(&vec![(-1, 0.5), (0, 0.1), (1, 0.4)]), 1);
        assert_eq!(lattice_span(&vec![(-3, 0.5), (3, 0.5)]), 6);
    }

    #[test]
    fn smoothed_ks_of_uniform_lattice() {
        // Atoms at cell centres of [0,1] spread back to the uniform law.
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_smoothed(&xs, 0.01, |z| z.clamp(0.0, 1.0));
        assert!(d < 1e-12, "{d}");
        assert!(ks_one_sample(&xs, |z| z.clamp(0.0, 1.0)) > 0.004);
    }

    #[test]
    fn ballot_exponents_lazy() {
        let s = BallotSettings {
            factor_heights: vec![],
            ..Default::default()
        };
        let f = ballot_check(&lazy(), &s).unwrap();
        let get = |q: &str| f.iter().find(|r| r.quantity == q).unwrap().estimate;
        assert!((get("survival_exponent") + 0.5).abs() < 0.05);
        assert!((get("hitting_exponent") + 1.5).abs() < 0.05);
    }

    #[test]
    fn factorisation_spread_shrinks() {
        let spread = |n| {
            let s = BallotSettings {
                k_grid: vec![8, 16],
                n_grid: vec![8, 16],
                factor_n: n,
                ..Default::default()
            };
            let f = ballot_check(&lazy(), &s).unwrap();
            f.iter().find(|r| r.quantity == "v1_factorisation_spread").unwrap().estimate
        };
        let (a, b) = (spread(512), spread(2048));
        assert!(a < 0.15 && b < 0.05 && b < a, "{a} {b}");
    }

    #[test]
    fn bridge_excursion_lazy() {
        let s = lazy();
        let n = 256;
        let t = BridgeTable::new(&s, 1, 1, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sig = diffusion_sigma(&s);
        let rs: Vec<_> = (0..3000).map(|_| rescale(&t.sample(1, &mut rng).unwrap(), n, sig).unwrap()).collect();
        let ks = excursion_test(&rs, &[0.5], 1 << 12).unwrap();
        assert!(ks[0].1 < 0.05, "{:?}", ks);
    }

    #[test]
    fn midpoint_height_grows_like_sqrt_n() {
        let s = lazy();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ns = [64usize, 256, 1024];
        let means: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let t = BridgeTable::new(&s, 1, 1, n).unwrap();
                (0..1000).map(|_| t.sample(1, &mut rng).unwrap().height_at(n as f64 / 2.0)).sum::<f64>() / 1000.0
            })
            .collect();
        let lx: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let ly: Vec<f64> = means.iter().map(|m| m.ln()).collect();
        let (_, b, _) = linear_fit(&lx, &ly);
        assert!((b - 0.5).abs() < 0.08, "{b}");
    }

    #[test]
    fn reversed_harmonic_profile() {
        let law = vec![(-2, 0.2), (-1, 0.1), (0, 0.2), (1, 0.5)];
        let mu: f64 = law.iter().map(|&(k, p)| k as f64 * p).sum();
        assert!(mu.abs() < 1e-12);
        let v = doney_v1(&law, 60, false).unwrap();
        let vr = doney_v1(&law, 60, true).unwrap();
        assert!(v.max_residual() < 1e-8 && vr.max_residual() < 1e-8);
        assert!(v.values != vr.values);
    }

    #[test]
    fn hitting_dp_matches_monte_carlo() {
        let s = lazy();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for &(u, v, n) in &[(1i64, 1i64, 6usize), (0, 2, 5), (2, 0, 8)] {
            let p = hitting_probability_dp(&s, u, v, n).unwrap();
            let m = 40_000;
            let hits = (0..m)
                .filter(|_| {
                    let w = simulate(&s, Site::new(0, u), n, &mut rng);
                    w.positions.iter().all(|q| q.y >= 0) && w.end().y == v
                })
                .count();
            let se = (p * (1.0 - p) / m as f64).sqrt();
            assert!((hits as f64 / m as f64 - p).abs() < 3.0 * se + 1e-12);
        }
    }
}
