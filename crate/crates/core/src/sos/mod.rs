//! SOS Gibbs measures with and without floor.
//!
//! The energy of a height function is `Σ_{x∼y} |φx − φy|` over nearest
//! neighbour pairs with at least one interior site; the Gibbs weight is
//! `exp(−β·energy)`.

pub mod cluster;
pub mod exact;

pub use cluster::{cluster_weight_fu, d_value, Cluster, ClusterWeight, FuCache};
pub use exact::{exact_enumerate, ExactResult, TransferSpec};

use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, Site};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    Constant(i64),
    /// 0 on the bottom side, 1 on the other three ("0,1,1,1").
    Dobrushin0111,
    /// `h_low` on the bottom-side sites with `x ∈ [xl, xr]`, `h_high` elsewhere.
    Legs {
        h_high: i64,
        h_low: i64,
        xl: i64,
        xr: i64,
    },
    Explicit(HashMap<Site, i64>),
}

impl BoundaryCondition {
    pub fn validate(&self, bx: &LatticeBox) -> Result<()> {
        match self {
            BoundaryCondition::Legs {
                h_high,
                h_low,
                xl,
                xr,
            } => {
                if *h_low != h_high - 1 {
                    return Err(Error::Invalid(format!(
                        "legs boundary needs h_low = h_high - 1 (got {h_low}, {h_high})"
                    )));
                }
                let (x0, x1) = (bx.origin.x, bx.origin.x + bx.width - 1);
                if xl > xr || *xl < x0 || *xr > x1 {
                    return Err(Error::Invalid(format!(
                        "legs segment [{xl},{xr}] not inside bottom row [{x0},{x1}]"
                    )));
                }
                Ok(())
            }
            BoundaryCondition::Explicit(m) => {
                for s in bx.exterior_boundary() {
                    if !m.contains_key(&s) {
                        return Err(Error::Invalid(format!("explicit boundary misses site {s}")));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Height at an exterior boundary site of `bx`.
    pub fn height_at(&self, bx: &LatticeBox, s: Site) -> i64 {
        let bottom = s.y == bx.origin.y - 1;
        match self {
            BoundaryCondition::Constant(j) => *j,
            BoundaryCondition::Dobrushin0111 => {
                if bottom {
                    0
                } else {
                    1
                }
            }
            BoundaryCondition::Legs {
                h_high,
                h_low,
                xl,
                xr,
            } => {
                if bottom && s.x >= *xl && s.x <= *xr {
                    *h_low
                } else {
                    *h_high
                }
            }
            BoundaryCondition::Explicit(m) => m.get(&s).copied().unwrap_or(0),
        }
    }
}

/// Heights on a box plus its exterior boundary ring.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    bx: LatticeBox,
    floor: bool,
    beta: f64,
    /// (width+2)×(height+2) grid, row-major from the bottom boundary row.
    grid: Vec<i64>,
    pw: usize,
}

impl HeightField {
    /// A field with every interior site at `init`.
    pub fn new(
        bx: LatticeBox,
        bc: &BoundaryCondition,
        floor: bool,
        beta: f64,
        init: i64,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Invalid(format!("beta must be positive, got {beta}")));
        }
        bc.validate(&bx)?;
        let pw = bx.width as usize + 2;
        let ph = bx.height as usize + 2;
        let mut f = HeightField {
            bx,
            floor,
            beta,
            grid: vec![0; pw * ph],
            pw,
        };
        for s in bx.exterior_boundary() {
            let i = f.gidx(s);
            f.grid[i] = bc.height_at(&bx, s);
        }
        for s in bx.sites() {
            let i = f.gidx(s);
            f.grid[i] = init;
        }
        f.check_floor()?;
        Ok(f)
    }

    fn check_floor(&self) -> Result<()> {
        if self.floor {
            let bad = self
                .bx
                .exterior_boundary()
                .into_iter()
                .chain(self.bx.sites())
                .find(|&s| self.height(s) < 0);
            if let Some(s) = bad {
                return Err(Error::Invalid(format!("negative height at {s} with floor")));
            }
        }
        Ok(())
    }

    #[inline]
    fn gidx(&self, s: Site) -> usize {
        let x = (s.x - self.bx.origin.x + 1) as usize;
        let y = (s.y - self.bx.origin.y + 1) as usize;
        y * self.pw + x
    }

    pub fn bx(&self) -> &LatticeBox {
        &self.bx
    }

    pub fn floor(&self) -> bool {
        self.floor
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn set_beta(&mut self, beta: f64) {
        self.beta = beta;
    }

    /// Height of an interior or exterior-boundary site (0 elsewhere).
    #[inline]
    pub fn height(&self, s: Site) -> i64 {
        let x = s.x - self.bx.origin.x + 1;
        let y = s.y - self.bx.origin.y + 1;
        if x < 0 || y < 0 || x >= self.pw as i64 || y * self.pw as i64 >= self.grid.len() as i64 {
            return 0;
        }
        self.grid[y as usize * self.pw + x as usize]
    }

    pub fn set(&mut self, s: Site, h: i64) -> Result<()> {
        if !self.bx.contains(s) {
            return Err(Error::Invalid(format!("{s} is not interior")));
        }
        if self.floor && h < 0 {
            return Err(Error::Invalid("negative height with floor".into()));
        }
        let i = self.gidx(s);
        self.grid[i] = h;
        Ok(())
    }

    /// Interior heights in raster order.
    pub fn heights(&self) -> Vec<i64> {
        self.bx.sites().map(|s| self.height(s)).collect()
    }

    pub fn set_heights(&mut self, h: &[i64]) -> Result<()> {
        if h.len() != self.bx.len() {
            return Err(Error::Invalid("height vector length mismatch".into()));
        }
        for (i, &v) in h.iter().enumerate() {
            self.set(self.bx.site(i), v)?;
        }
        Ok(())
    }

    pub fn boundary(&self) -> Vec<(Site, i64)> {
        self.bx
            .exterior_boundary()
            .into_iter()
            .map(|s| (s, self.height(s)))
            .collect()
    }

    /// Σ|φx − φy| over adjacent pairs with at least one interior site.
    pub fn hamiltonian(&self) -> f64 {
        let mut e = 0i64;
        for s in self.bx.sites() {
            let h = self.height(s);
            // East and north edges of every interior site, plus west/south
            // edges that lead to the boundary.
            e += (h - self.height(Site::new(s.x + 1, s.y))).abs();
            e += (h - self.height(Site::new(s.x, s.y + 1))).abs();
            if s.x == self.bx.origin.x {
                e += (h - self.height(Site::new(s.x - 1, s.y))).abs();
            }
            if s.y == self.bx.origin.y {
                e += (h - self.height(Site::new(s.x, s.y - 1))).abs();
            }
        }
        e as f64
    }

    #[inline]
    fn neighbor_heights(&self, gi: usize) -> [i64; 4] {
        [
            self.grid[gi + 1],
            self.grid[gi - 1],
            self.grid[gi + self.pw],
            self.grid[gi - self.pw],
        ]
    }

    /// Exact conditional law of the height at an interior site, as
    /// `(first_value, probabilities)` over the window between the lowest and
    /// highest neighbour; the geometric tails are returned separately as
    /// `(lower_tail_mass, upper_tail_mass)`.
    pub fn conditional(&self, s: Site) -> Result<SiteConditional> {
        if !self.bx.contains(s) {
            return Err(Error::Invalid(format!("{s} is not interior")));
        }
        let mut n = self.neighbor_heights(self.gidx(s));
        n.sort_unstable();
        Ok(SiteConditional::new(n, self.beta, self.floor))
    }

    /// Resample one interior site from its exact conditional law.
    pub fn heat_bath_update<R: Rng + ?Sized>(&mut self, s: Site, rng: &mut R) -> i64 {
        let gi = self.gidx(s);
        let mut n = self.neighbor_heights(gi);
        n.sort_unstable();
        let h = SiteConditional::new(n, self.beta, self.floor).sample(rng);
        self.grid[gi] = h;
        h
    }

    /// One raster-order sweep over the interior.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let w = self.bx.width as usize;
        let hgt = self.bx.height as usize;
        let r = (-4.0 * self.beta).exp();
        let table = ExpTable::new(self.beta);
        for y in 1..=hgt {
            for x in 1..=w {
                let gi = y * self.pw + x;
                let mut n = self.neighbor_heights(gi);
                n.sort_unstable();
                self.grid[gi] = sample_conditional(n, r, self.floor, &table, rng);
            }
        }
    }
}

/// Single-site conditional law given sorted neighbour heights.
#[derive(Debug, Clone)]
pub struct SiteConditional {
    pub neighbors: [i64; 4],
    pub beta: f64,
    pub floor: bool,
}

impl SiteConditional {
    pub fn new(neighbors: [i64; 4], beta: f64, floor: bool) -> Self {
        SiteConditional {
            neighbors,
            beta,
            floor,
        }
    }

    /// Unnormalised log-weight of height `h` (−∞ below the floor).
    pub fn log_weight(&self, h: i64) -> f64 {
        if self.floor && h < 0 {
            return f64::NEG_INFINITY;
        }
        -self.beta * self.neighbors.iter().map(|&n| (h - n).abs()).sum::<i64>() as f64
    }

    /// Log normaliser, with the geometric tails summed in closed form.
    pub fn log_norm(&self) -> f64 {
        let n = self.neighbors;
        let r = (-4.0 * self.beta).exp();
        let lo = if self.floor { n[0].max(0) } else { n[0] };
        let top = self.log_weight(n[3]);
        let mut terms: Vec<f64> = (lo..=n[3]).map(|h| self.log_weight(h)).collect();
        terms.push(top + (r / (1.0 - r)).ln());
        let k = if self.floor { n[0].max(0) } else { i64::MAX };
        if k > 0 {
            let bottom = self.log_weight(lo);
            let tail = if k == i64::MAX {
                r / (1.0 - r)
            } else {
                r * (1.0 - r.powi(k.min(i32::MAX as i64) as i32)) / (1.0 - r)
            };
            terms.push(bottom + tail.ln());
        }
        log_sum_exp(&terms)
    }

    pub fn prob(&self, h: i64) -> f64 {
        (self.log_weight(h) - self.log_norm()).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let r = (-4.0 * self.beta).exp();
        sample_conditional(self.neighbors, r, self.floor, &ExpTable::new(self.beta), rng)
    }
}

/// Cache of e^{−βk} for small k.
struct ExpTable {
    beta: f64,
    t: [f64; 64],
}

impl ExpTable {
    fn new(beta: f64) -> Self {
        let mut t = [0.0; 64];
        for (k, v) in t.iter_mut().enumerate() {
            *v = (-beta * k as f64).exp();
        }
        ExpTable { beta, t }
    }

    #[inline]
    fn get(&self, k: i64) -> f64 {
        if (k as usize) < 64 {
            self.t[k as usize]
        } else {
            (-self.beta * k as f64).exp()
        }
    }
}

#[inline]
fn sample_conditional<R: Rng + ?Sized>(
    n: [i64; 4],
    r: f64,
    floor: bool,
    table: &ExpTable,
    rng: &mut R,
) -> i64 {
    // Energy relative to its minimum (attained between n[1] and n[2]).
    let emin = (n[2] + n[3]) - (n[0] + n[1]);
    let energy = |h: i64| (h - n[0]).abs() + (h - n[1]).abs() + (h - n[2]).abs() + (h - n[3]).abs();
    let lo = if floor { n[0].max(0) } else { n[0] };
    // Lower tail: heights lo-1, lo-2, ... (at most `k_low` of them).
    let k_low = if floor { lo } else { i64::MAX };
    let w_lo = table.get(energy(lo) - emin);
    let lower = if k_low == 0 {
        0.0
    } else if k_low == i64::MAX {
        w_lo * r / (1.0 - r)
    } else {
        w_lo * r * (1.0 - r.powf(k_low as f64)) / (1.0 - r)
    };
    let w_hi = table.get(energy(n[3]) - emin);
    let upper = w_hi * r / (1.0 - r);
    let mut middle = 0.0;
    for h in lo..=n[3] {
        middle += table.get(energy(h) - emin);
    }
    let total = lower + middle + upper;
    let mut u = rng.random::<f64>() * total;
    if u < middle {
        for h in lo..=n[3] {
            let w = table.get(energy(h) - emin);
            if u < w {
                return h;
            }
            u -= w;
        }
        return n[3];
    }
    u -= middle;
    if u < upper {
        n[3] + geometric(rng.random::<f64>(), r, i64::MAX)
    } else {
        lo - geometric(rng.random::<f64>(), r, k_low)
    }
}

/// Sample k ∈ {1..kmax} with P(k) ∝ r^k, by inversion.
#[inline]
fn geometric(u: f64, r: f64, kmax: i64) -> i64 {
    let rk = if kmax == i64::MAX { 0.0 } else { r.powf(kmax as f64) };
    let k = ((1.0 - u * (1.0 - rk)).ln() / r.ln()).ceil() as i64;
    k.clamp(1, kmax)
}

pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Run `sweeps` raster sweeps, recording each observable once per sweep.
/// Returns one series per observable.
pub fn run_chain<R: Rng + ?Sized>(
    field: &mut HeightField,
    sweeps: usize,
    rng: &mut R,
    observables: &[&dyn Fn(&HeightField) -> f64],
) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(sweeps); observables.len()];
    for _ in 0..sweeps {
        field.sweep(rng);
        for (o, series) in observables.iter().zip(out.iter_mut()) {
            series.push(o(field));
        }
    }
    out
}

/// Default height truncation: discarded single-site tail below e^{-40}.
pub fn default_hmax(beta: f64) -> i64 {
    (40.0 / (4.0 * beta)).ceil() as i64 + 3
}

/// λ^{(n)} = c∞ e^{4βα(L)} (1 − e^{−4β}) e^{4βn}, α(L) the fractional part of ln L/(4β).
pub fn area_tilt_lambda(l: f64, beta: f64, n: i64, c_inf: f64) -> f64 {
    let a = l.ln() / (4.0 * beta);
    let alpha = a - a.floor();
    c_inf * (4.0 * beta * alpha).exp() * (1.0 - (-4.0 * beta).exp()) * (4.0 * beta * n as f64).exp()
}

/// log of exp(−λ^{(n)} A / L).
pub fn area_tilt_log_weight(area: u64, l: f64, beta: f64, n: i64, c_inf: f64) -> f64 {
    -area_tilt_lambda(l, beta, n, c_inf) * area as f64 / l
}

pub fn area_tilt_weight(area: u64, l: f64, beta: f64, n: i64, c_inf: f64) -> f64 {
    area_tilt_log_weight(area, l, beta, n, c_inf).exp()
}

/// The `n` for which the tilt at side length `l` corresponds to a level-`h`
/// contour: h = ⌊ln L/(4β)⌋ − n.
pub fn area_tilt_n_for_level(l: f64, beta: f64, h: i64) -> i64 {
    (l.ln() / (4.0 * beta)).floor() as i64 - h
}
