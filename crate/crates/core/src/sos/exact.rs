//! Exact partition functions and single-site marginals by a site-by-site
//! transfer matrix.
//!
//! Sites are added in raster order; the state is the vector of heights of
//! the last `width` sites (a broken line). Each site carries its own finite
//! set of allowed heights, which covers floors, truncation, conditioning
//! (`φ ≥ 0` on a subset) and sites pinned to a fixed value.

use super::{default_hmax, BoundaryCondition};
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, Site};

/// Largest admissible `frontier states × sites × values` work estimate.
pub const STATE_GUARD: u64 = 100_000_000;
/// Largest number of stored forward-vector entries (for marginals).
pub const MEMORY_GUARD: u64 = 30_000_000;

#[derive(Debug, Clone)]
pub struct TransferSpec {
    pub width: usize,
    pub height: usize,
    /// Inclusive allowed height range per site, raster order.
    pub domains: Vec<(i64, i64)>,
    pub bottom: Vec<i64>,
    pub top: Vec<i64>,
    pub left: Vec<i64>,
    pub right: Vec<i64>,
    pub beta: f64,
}

impl TransferSpec {
    /// Spec for a box with boundary condition `bc` and uniform domain.
    pub fn for_box(bx: &LatticeBox, bc: &BoundaryCondition, beta: f64, lo: i64, hi: i64) -> Result<Self> {
        bc.validate(bx)?;
        let (w, h) = (bx.width as usize, bx.height as usize);
        let o = bx.origin;
        let at = |s: Site| bc.height_at(bx, s);
        Ok(TransferSpec {
            width: w,
            height: h,
            domains: vec![(lo, hi); w * h],
            bottom: (0..w).map(|i| at(Site::new(o.x + i as i64, o.y - 1))).collect(),
            top: (0..w).map(|i| at(Site::new(o.x + i as i64, o.y + h as i64))).collect(),
            left: (0..h).map(|j| at(Site::new(o.x - 1, o.y + j as i64))).collect(),
            right: (0..h).map(|j| at(Site::new(o.x + w as i64, o.y + j as i64))).collect(),
            beta,
        })
    }

    fn check(&self) -> Result<()> {
        let n = self.width * self.height;
        if n == 0
            || self.domains.len() != n
            || self.bottom.len() != self.width
            || self.top.len() != self.width
            || self.left.len() != self.height
            || self.right.len() != self.height
        {
            return Err(Error::Invalid("inconsistent transfer spec".into()));
        }
        if self.domains.iter().any(|&(lo, hi)| hi < lo) {
            return Err(Error::Invalid("empty site domain".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub log_z: f64,
    /// Per site, probabilities of heights `domains[i].0 ..= domains[i].1`.
    pub marginals: Vec<Vec<f64>>,
    pub domains: Vec<(i64, i64)>,
    /// Estimated mass of the discarded heights (Peierls-type bound).
    pub tail_bound: f64,
}

impl ExactResult {
    pub fn marginal(&self, site_idx: usize, h: i64) -> f64 {
        let (lo, hi) = self.domains[site_idx];
        if h < lo || h > hi {
            return 0.0;
        }
        self.marginals[site_idx][(h - lo) as usize]
    }

    pub fn mean(&self, site_idx: usize) -> f64 {
        let lo = self.domains[site_idx].0;
        self.marginals[site_idx]
            .iter()
            .enumerate()
            .map(|(k, p)| p * (lo + k as i64) as f64)
            .sum()
    }
}

/// Exact Z and marginals of the SOS measure on `bx`, heights truncated to
/// `[0, bmax+hmax]` (floor) or `[bmin−hmax, bmax+hmax]` (no floor), where
/// `bmin`, `bmax` are the extreme boundary heights.
pub fn exact_enumerate(
    bx: &LatticeBox,
    bc: &BoundaryCondition,
    floor: bool,
    beta: f64,
    hmax: Option<i64>,
) -> Result<ExactResult> {
    if !(beta > 0.0) {
        return Err(Error::Invalid("beta must be positive".into()));
    }
    let hmax = hmax.unwrap_or_else(|| default_hmax(beta));
    if hmax < 0 {
        return Err(Error::Invalid("hmax must be nonnegative".into()));
    }
    let b: Vec<i64> = bx.exterior_boundary().iter().map(|&s| bc.height_at(bx, s)).collect();
    let bmin = *b.iter().min().unwrap();
    let bmax = *b.iter().max().unwrap();
    if floor && bmin < 0 {
        return Err(Error::Invalid("negative boundary with floor".into()));
    }
    let lo = if floor { (bmin - hmax).max(0) } else { bmin - hmax };
    let hi = bmax + hmax;
    let spec = TransferSpec::for_box(bx, bc, beta, lo, hi)?;
    let mut res = transfer(&spec, true)?;
    // A configuration leaving the window has some site at distance > hmax
    // from every boundary height; Peierls: each such excursion costs at
    // least 4β per unit height.
    let r = (-4.0 * beta).exp();
    res.tail_bound = bx.len() as f64 * 2.0 * r.powi((hmax + 1) as i32) / (1.0 - r);
    Ok(res)
}

/// log Z only.
pub fn log_partition(spec: &TransferSpec) -> Result<f64> {
    Ok(transfer(spec, false)?.log_z)
}

/// Core forward(/backward) pass.
pub fn transfer(spec: &TransferSpec, marginals: bool) -> Result<ExactResult> {
    spec.check()?;
    let w = spec.width;
    let n = w * spec.height;
    let radix = |j: isize| -> usize {
        if j < 0 {
            1
        } else {
            let (lo, hi) = spec.domains[j as usize];
            (hi - lo + 1) as usize
        }
    };
    // State size after processing site k: product of radices of sites k-w+1..=k.
    let state_size = |k: isize| -> u64 { (k - w as isize + 1..=k).fold(1u64, |a, j| a.saturating_mul(radix(j) as u64)) };
    let mut work = 0u64;
    let mut mem = 0u64;
    for k in 0..n as isize {
        let s = state_size(k - 1).saturating_mul(radix(k) as u64);
        work = work.saturating_add(s);
        mem = mem.saturating_add(state_size(k));
    }
    if work > STATE_GUARD {
        return Err(Error::guard("exact_enumerate", work, STATE_GUARD));
    }
    if marginals && mem > MEMORY_GUARD {
        return Err(Error::guard("exact_enumerate (memory)", mem, MEMORY_GUARD));
    }

    let max_diff = spec
        .domains
        .iter()
        .map(|d| d.1)
        .chain(spec.bottom.iter().cloned())
        .chain(spec.top.iter().cloned())
        .chain(spec.left.iter().cloned())
        .chain(spec.right.iter().cloned())
        .max()
        .unwrap()
        - spec
            .domains
            .iter()
            .map(|d| d.0)
            .chain(spec.bottom.iter().cloned())
            .chain(spec.top.iter().cloned())
            .chain(spec.left.iter().cloned())
            .chain(spec.right.iter().cloned())
            .min()
            .unwrap();
    let etab: Vec<f64> = (0..=(4 * max_diff + 4))
        .map(|e| (-spec.beta * e as f64).exp())
        .collect();

    // Transition data for site k.
    struct Step {
        r_old: usize,  // radix of the oldest frontier slot (site k-w)
        rest: usize,   // product of radices of sites k-w+1..k-1
        r_last: usize, // radix of site k-1
        lo_old: i64,
        lo_last: i64,
        lo: i64,
        r: usize,
        has_below: bool,
        has_left: bool,
        fixed: i64, // boundary contributions are added per value
        bnd: Vec<i64>,
    }
    let mut steps = Vec::with_capacity(n);
    for k in 0..n {
        let (col, row) = (k % w, k / w);
        let ki = k as isize;
        let rest: usize = (ki - w as isize + 1..ki).map(radix).product();
        let mut bnd = Vec::new();
        if row == 0 {
            bnd.push(spec.bottom[col]);
        }
        if col == 0 {
            bnd.push(spec.left[row]);
        }
        if col == w - 1 {
            bnd.push(spec.right[row]);
        }
        if row == spec.height - 1 {
            bnd.push(spec.top[col]);
        }
        steps.push(Step {
            r_old: radix(ki - w as isize),
            rest,
            r_last: radix(ki - 1),
            lo_old: if row > 0 { spec.domains[k - w].0 } else { 0 },
            lo_last: if col > 0 { spec.domains[k - 1].0 } else { 0 },
            lo: spec.domains[k].0,
            r: radix(ki),
            has_below: row > 0,
            has_left: col > 0,
            fixed: 0,
            bnd,
        });
    }

    let energy = |st: &Step, s: usize, v: i64| -> i64 {
        let mut e = st.fixed;
        if st.has_below {
            let d_old = s / st.rest;
            e += (v - (st.lo_old + d_old as i64)).abs();
        }
        if st.has_left {
            let d_last = s % st.r_last;
            e += (v - (st.lo_last + d_last as i64)).abs();
        }
        for &b in &st.bnd {
            e += (v - b).abs();
        }
        e
    };

    // Forward pass.
    let mut alpha = vec![1.0f64];
    let mut log_scale = 0.0;
    let mut stored: Vec<Vec<f64>> = Vec::new();
    for st in &steps {
        let new_len = (st.rest * st.r).max(1);
        let mut next = vec![0.0; new_len];
        debug_assert_eq!(alpha.len(), st.r_old * st.rest);
        for (s, &a) in alpha.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let base = (s % st.rest) * st.r;
            for vi in 0..st.r {
                let v = st.lo + vi as i64;
                next[base + vi] += a * etab[energy(st, s, v) as usize];
            }
        }
        let m = next.iter().cloned().fold(0.0, f64::max);
        if m == 0.0 {
            return Err(Error::Invalid("partition function vanished".into()));
        }
        for x in next.iter_mut() {
            *x /= m;
        }
        log_scale += m.ln();
        alpha = next;
        if marginals {
            stored.push(alpha.clone());
        }
    }
    let log_z = log_scale + alpha.iter().sum::<f64>().ln();

    let mut margs = Vec::new();
    if marginals {
        margs = vec![Vec::new(); n];
        let mut beta_v = vec![1.0f64; alpha.len()];
        for k in (0..n).rev() {
            let st = &steps[k];
            let a = &stored[k];
            let mut m = vec![0.0; st.r];
            for (s, (&x, &y)) in a.iter().zip(beta_v.iter()).enumerate() {
                m[s % st.r] += x * y;
            }
            let tot: f64 = m.iter().sum();
            margs[k] = m.into_iter().map(|x| x / tot).collect();
            if k == 0 {
                break;
            }
            // β_{k-1}(s) = Σ_v w(v|s) β_k(s'(s,v)).
            let prev_len = st.r_old * st.rest;
            let mut prev = vec![0.0; prev_len];
            for (s, p) in prev.iter_mut().enumerate() {
                let base = (s % st.rest) * st.r;
                let mut acc = 0.0;
                for vi in 0..st.r {
                    let v = st.lo + vi as i64;
                    acc += etab[energy(st, s, v) as usize] * beta_v[base + vi];
                }
                *p = acc;
            }
            let mx = prev.iter().cloned().fold(0.0, f64::max);
            for x in prev.iter_mut() {
                *x /= mx;
            }
            beta_v = prev;
        }
    }

    Ok(ExactResult {
        log_z,
        marginals: margs,
        domains: spec.domains.clone(),
        tail_bound: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric_z(beta: f64, floor: bool) -> f64 {
        let r = (-4.0 * beta).exp();
        if floor {
            1.0 / (1.0 - r)
        } else {
            (1.0 + r) / (1.0 - r)
        }
    }

    #[test]
    fn single_site() {
        let bx = LatticeBox::unit_origin(1, 1).unwrap();
        for &floor in &[true, false] {
            let r = exact_enumerate(&bx, &BoundaryCondition::Constant(0), floor, 0.9, None).unwrap();
            assert!((r.log_z - geometric_z(0.9, floor).ln()).abs() < 1e-13);
        }
        // Finite hmax: exact truncated geometric sum.
        let r = exact_enumerate(&bx, &BoundaryCondition::Constant(0), true, 0.5, Some(3)).unwrap();
        let e: f64 = (0..=3).map(|h| (-2.0 * h as f64).exp()).sum();
        assert!((r.log_z - e.ln()).abs() < 1e-14);
    }

    #[test]
    fn monotone_in_hmax() {
        let bx = LatticeBox::unit_origin(2, 2).unwrap();
        let mut last = f64::NEG_INFINITY;
        for h in 0..8 {
            let r = exact_enumerate(&bx, &BoundaryCondition::Constant(0), false, 0.6, Some(h)).unwrap();
            assert!(r.log_z >= last);
            last = r.log_z;
        }
    }

    /// Brute force over all configurations of a 2×3 box.
    #[test]
    fn matches_brute_force() {
        let bx = LatticeBox::unit_origin(3, 2).unwrap();
        let bc = BoundaryCondition::Dobrushin0111;
        let beta = 0.45;
        let (lo, hi) = (-1i64, 3i64);
        let spec = TransferSpec::for_box(&bx, &bc, beta, lo, hi).unwrap();
        let tm = transfer(&spec, true).unwrap();
        let nv = (hi - lo + 1) as usize;
        let mut z = 0.0;
        let mut m0 = vec![0.0; nv];
        let mut f = crate::sos::HeightField::new(bx, &bc, false, beta, 0).unwrap();
        for code in 0..nv.pow(6) {
            let mut c = code;
            let hs: Vec<i64> = (0..6)
                .map(|_| {
                    let v = lo + (c % nv) as i64;
                    c /= nv;
                    v
                })
                .collect();
            f.set_heights(&hs).unwrap();
            let w = (-beta * f.hamiltonian()).exp();
            z += w;
            m0[(hs[4] - lo) as usize] += w;
        }
        assert!((tm.log_z - z.ln()).abs() < 1e-12);
        for v in 0..nv {
            assert!((tm.marginals[4][v] - m0[v] / z).abs() < 1e-12);
        }
    }

    #[test]
    fn guard_trips() {
        let bx = LatticeBox::unit_origin(12, 12).unwrap();
        let e = exact_enumerate(&bx, &BoundaryCondition::Constant(0), false, 0.1, None);
        assert!(matches!(e, Err(Error::Guard { .. })));
    }

    #[test]
    fn cold_limit_concentrates() {
        let bx = LatticeBox::unit_origin(2, 2).unwrap();
        let r = exact_enumerate(&bx, &BoundaryCondition::Constant(2), true, 12.0, Some(3)).unwrap();
        for i in 0..4 {
            assert!(r.marginal(i, 2) > 1.0 - 1e-15);
        }
    }
}
