use super::{cell, svg_plot, BoundaryKind, ExperimentConfig, ExperimentOutput, SigmaSource, Table};
use crate::cone::{hitting_identity_check, step_distribution_zero};
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, Site};
use crate::level_lines::{area_below, displacement_profile, extract_level_lines, open_one_contour, Contour};
use crate::polymer::{partition_function, Decoration, Domain, Weighting};
use crate::sos::{area_tilt_lambda, area_tilt_log_weight, area_tilt_n_for_level, BoundaryCondition, HeightField};
use crate::walk::{
    bridges_to_csv, diffusion_sigma, excursion_test, linear_fit, rescale, RescaledPath, WalkPath,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Independent stream per (seed, task).
fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(task);
    r
}

/// Samples handled by seed `i` of `k` when `total` are split round-robin.
fn share(total: usize, i: usize, k: usize) -> usize {
    total / k + usize::from(i < total % k)
}

fn burn(cfg: &ExperimentConfig, n: i64) -> usize {
    cfg.sampling.burn_in + (cfg.sampling.burn_factor * (n * n) as f64) as usize
}

fn thin(cfg: &ExperimentConfig, n: i64) -> usize {
    cfg.sampling.thin.max((cfg.sampling.thin_factor * (n * n) as f64) as usize).max(1)
}

/// Type-7 (linear interpolation) quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// I₀ = ⟦L/2 − L^{2/3}, L/2 + L^{2/3}⟧ (integer points).
pub fn i0_interval(l: i64) -> (i64, i64) {
    let lf = l as f64;
    let w = lf.powf(2.0 / 3.0);
    ((lf / 2.0 - w).ceil() as i64, (lf / 2.0 + w).floor() as i64)
}

/// The largest closed level line (over all levels ≥ 1) whose length is at
/// least (ln L)²; ties go to the higher level.
pub fn top_macroscopic_loop(field: &HeightField, l: f64) -> Result<Option<(i64, Contour)>> {
    let hmax = field.heights().into_iter().max().unwrap_or(0);
    let mut best: Option<(i64, Contour)> = None;
    for h in 1..=hmax {
        for c in extract_level_lines(field, h)? {
            if c.is_closed() && c.is_macroscopic(l) && best.as_ref().is_none_or(|b| c.len() >= b.1.len()) {
                best = Some((h, c));
            }
        }
    }
    Ok(best)
}

pub fn exp_min_rho(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let beta = cfg.model.beta;
    let mut samples = Table::new(&["L", "sample", "seed", "level", "loop_len", "min_rho", "rescaled", "status"]);
    let mut quant = Table::new(&["L", "n_ok", "n_none", "n_misses", "q10", "q25", "q50", "q75", "iqr"]);
    let mut series = Vec::new();
    for &l in &cfg.model.sizes {
        let lf = l as f64;
        let bx = LatticeBox::unit_origin(l, l)?;
        let bc = match cfg.model.boundary {
            BoundaryKind::Zero => BoundaryCondition::Constant(0),
            BoundaryKind::Dobrushin0111 => BoundaryCondition::Dobrushin0111,
        };
        let init = ((lf.ln() / (4.0 * beta)).floor() as i64).max(0);
        let (a, b) = i0_interval(l);
        let scale = lf.powf(1.0 / 3.0);
        let mut vals = Vec::new();
        let (mut none, mut misses, mut idx) = (0, 0, 0usize);
        let k = cfg.run.seeds.len();
        for (si, &seed) in cfg.run.seeds.iter().enumerate() {
            let mut rng = task_rng(seed, l as u64);
            let mut f = HeightField::new(bx, &bc, cfg.model.floor, beta, init)?;
            for _ in 0..burn(cfg, l) {
                f.sweep(&mut rng);
            }
            for _ in 0..share(cfg.sampling.samples, si, k) {
                for _ in 0..thin(cfg, l) {
                    f.sweep(&mut rng);
                }
                let row = match top_macroscopic_loop(&f, lf)? {
                    None => {
                        none += 1;
                        vec!["".into(), "".into(), "".into(), "".into(), "none".into()]
                    }
                    Some((h, c)) => match displacement_profile(&c).min_over(a, b) {
                        None => {
                            misses += 1;
                            vec![h.to_string(), c.len().to_string(), "".into(), "".into(), "misses".into()]
                        }
                        Some(m) => {
                            let r = m as f64 / scale;
                            vals.push(r);
                            vec![h.to_string(), c.len().to_string(), m.to_string(), cell(r), "ok".into()]
                        }
                    },
                };
                let mut full = vec![l.to_string(), idx.to_string(), seed.to_string()];
                full.extend(row);
                samples.push(full);
                idx += 1;
            }
        }
        vals.sort_by(f64::total_cmp);
        let q: Vec<f64> = [0.1, 0.25, 0.5, 0.75].iter().map(|&p| quantile(&vals, p)).collect();
        quant.push(vec![
            l.to_string(),
            vals.len().to_string(),
            none.to_string(),
            misses.to_string(),
            cell(q[0]),
            cell(q[1]),
            cell(q[2]),
            cell(q[3]),
            cell(q[3] - q[1]),
        ]);
        series.push((lf, q[0]));
    }
    let mut out = ExperimentOutput::default();
    out.files.push((
        "min_rho_q10.svg".into(),
        svg_plot("q10 of rescaled min displacement", "L", "q10", &[("q10".into(), series)]),
    ));
    out.tables.push(("min_rho_samples.csv".into(), samples));
    out.tables.push(("min_rho_quantiles.csv".into(), quant));
    out.notes.insert("loop_rule".into(), "largest closed loop of length >= (ln L)^2 over all levels".into());
    Ok(out)
}

/// Per-column upper displacement of an open contour as a walk started at
/// column 0.
pub fn contour_walk(c: &Contour) -> (WalkPath, usize) {
    let p = displacement_profile(c);
    let x0 = p.x_range.0;
    let pos: Vec<Site> = p.rho_max.iter().map(|(&x, &y)| Site::new(x - x0, y)).collect();
    let steps = pos.windows(2).map(|w| w[1] - w[0]).collect();
    (WalkPath::from_steps(pos[0], steps), (p.x_range.1 - x0) as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaEstimate {
    pub sigma: f64,
    pub stderr: f64,
    /// Intercept of the variance fit (lattice-scale noise).
    pub intercept: f64,
    pub samples: usize,
    pub width: i64,
}

/// Diffusivity of a free level-1 interface pinned at mid-height on both
/// sides of a `width × width/2` box: fits Var ρ(x) = a + σ² x(W−x)/W.
pub fn calibrate_sigma(beta: f64, width: i64, samples: usize, seeds: &[u64]) -> Result<SigmaEstimate> {
    if width < 8 || samples < 4 || seeds.is_empty() {
        return Err(Error::Config("calibration needs width ≥ 8, ≥ 4 samples and a seed".into()));
    }
    let height = (width / 2).max(4);
    let mid = height / 2;
    let bx = LatticeBox::unit_origin(width, height)?;
    let bc = BoundaryCondition::Explicit(
        bx.exterior_boundary()
            .into_iter()
            .map(|s| (s, i64::from(s.y > mid)))
            .collect::<HashMap<_, _>>(),
    );
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut span = 0usize;
    for (si, &seed) in seeds.iter().enumerate() {
        let mut rng = task_rng(seed, 0xca1 << 20 | width as u64);
        let mut f = HeightField::new(bx, &bc, false, beta, 0)?;
        for s in bx.sites() {
            f.set(s, i64::from(s.y > mid))?;
        }
        for _ in 0..4 * width * width {
            f.sweep(&mut rng);
        }
        for _ in 0..share(samples, si, seeds.len()) {
            for _ in 0..(width * width / 4).max(1) {
                f.sweep(&mut rng);
            }
            let (w, n) = contour_walk(&open_one_contour(&f, 1)?);
            span = n;
            if cols.len() < w.positions.len() {
                cols.resize(w.positions.len(), Vec::new());
            }
            for p in &w.positions {
                cols[p.x as usize].push(p.y as f64);
            }
        }
    }
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    for (x, c) in cols.iter().enumerate() {
        if c.len() < 2 {
            continue;
        }
        let m = c.iter().sum::<f64>() / c.len() as f64;
        let v = c.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (c.len() - 1) as f64;
        let xf = x as f64;
        xs.push(xf * (span as f64 - xf) / span as f64);
        vs.push(v);
    }
    let (a, s2, se) = linear_fit(&xs, &vs);
    let sigma = s2.max(0.0).sqrt();
    Ok(SigmaEstimate {
        sigma,
        stderr: if sigma > 0.0 { se / (2.0 * sigma) } else { f64::NAN },
        intercept: a,
        samples,
        width,
    })
}

pub fn exp_excursion_sos(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let beta = cfg.model.beta;
    let mut out = ExperimentOutput::default();
    let mut fits = Table::new(&["quantity", "estimate", "stderr", "window"]);
    let step_sigma = || -> Result<f64> {
        let (st, _) = step_distribution_zero(beta, [1.0, 0.0], cfg.oz.cutoff)?;
        Ok(diffusion_sigma(&st))
    };
    let primary = match cfg.walk.sigma_source {
        SigmaSource::Calibration => {
            let e = calibrate_sigma(beta, cfg.walk.calibration_width, cfg.walk.calibration_samples, &cfg.run.seeds)?;
            fits.push(vec![
                "sigma_calibration".into(),
                cell(e.sigma),
                cell(e.stderr),
                format!("W={};samples={}", e.width, e.samples),
            ]);
            fits.push(vec!["variance_intercept".into(), cell(e.intercept), "nan".into(), format!("W={}", e.width)]);
            ("calibration", e.sigma)
        }
        SigmaSource::StepDistribution => ("step_distribution", step_sigma()?),
        SigmaSource::Value => ("value", cfg.walk.sigma),
    };
    // The step-distribution σ is always reported alongside, when computable.
    let mut sigmas = vec![primary];
    if primary.0 != "step_distribution" {
        match step_sigma() {
            Ok(s) => sigmas.push(("step_distribution", s)),
            Err(e) => {
                out.notes.insert("step_distribution_sigma".into(), e.to_string());
            }
        }
    }
    for &(name, s) in &sigmas {
        if name != "calibration" {
            fits.push(vec![format!("sigma_{name}"), cell(s), "nan".into(), format!("cutoff={}", cfg.oz.cutoff)]);
        }
    }

    let mut ks = Table::new(&["N", "t", "sigma_source", "sigma", "ks", "samples"]);
    let mut series: HashMap<String, Vec<(f64, f64)>> = HashMap::new();
    for &n in &cfg.model.sizes {
        let h = ((cfg.model.height_factor * n as f64).round() as i64).max(2);
        let bx = LatticeBox::unit_origin(n, h)?;
        let bc = match cfg.model.boundary {
            BoundaryKind::Dobrushin0111 => BoundaryCondition::Dobrushin0111,
            BoundaryKind::Zero => return Err(Error::Config("exp-excursion-sos needs the dobrushin0111 boundary".into())),
        };
        let mut walks = Vec::new();
        let k = cfg.run.seeds.len();
        for (si, &seed) in cfg.run.seeds.iter().enumerate() {
            let mut rng = task_rng(seed, n as u64);
            let mut f = HeightField::new(bx, &bc, cfg.model.floor, beta, 1)?;
            for _ in 0..burn(cfg, n) {
                f.sweep(&mut rng);
            }
            for _ in 0..share(cfg.sampling.samples, si, k) {
                for _ in 0..thin(cfg, n) {
                    f.sweep(&mut rng);
                }
                walks.push(contour_walk(&open_one_contour(&f, 1)?));
            }
        }
        if cfg.sampling.dump > 0 {
            let paths: Vec<WalkPath> = walks.iter().take(cfg.sampling.dump).map(|w| w.0.clone()).collect();
            out.files.push((format!("contours_N{n}.csv"), bridges_to_csv(&paths)));
        }
        for &(name, sigma) in &sigmas {
            if !(sigma > 1e-9) {
                // Rigid limit: compare raw heights with the point mass at 0.
                for &t in &cfg.walk.t_list {
                    let raw: Vec<f64> = walks.iter().map(|(w, m)| w.height_at(t * *m as f64)).collect();
                    let d = point_mass_distance(&raw);
                    ks.push(vec![n.to_string(), cell(t), "point_mass".into(), cell(0.0), cell(d), walks.len().to_string()]);
                }
                continue;
            }
            let rs: Vec<RescaledPath> = walks.iter().map(|(w, m)| rescale(w, *m, sigma)).collect::<Result<_>>()?;
            for (t, d) in excursion_test(&rs, &cfg.walk.t_list, cfg.walk.reference_len)? {
                ks.push(vec![n.to_string(), cell(t), name.into(), cell(sigma), cell(d), rs.len().to_string()]);
                series.entry(format!("{name} t={t}")).or_default().push((n as f64, d));
            }
        }
    }
    let mut s: Vec<(String, Vec<(f64, f64)>)> = series.into_iter().collect();
    s.sort_by(|a, b| a.0.cmp(&b.0));
    out.files.push(("excursion_ks.svg".into(), svg_plot("KS distance to the excursion marginal", "N", "KS", &s)));
    out.tables.push(("excursion_ks.csv".into(), ks));
    out.tables.push(("fits.csv".into(), fits));
    out.notes.insert("sigma_source".into(), primary.0.into());
    Ok(out)
}

/// sup |F_n − 1{· ≥ 0}| for an empirical sample.
fn point_mass_distance(x: &[f64]) -> f64 {
    let frac = |p: &dyn Fn(f64) -> bool| x.iter().filter(|&&v| p(v)).count() as f64 / x.len().max(1) as f64;
    frac(&|v| v < 0.0).max(frac(&|v| v > 0.0))
}

/// Batch-means standard error of a series mean (√n batches).
fn batch_stderr(x: &[f64]) -> f64 {
    let b = (x.len() as f64).sqrt().floor().max(1.0) as usize;
    let per = x.len() / b;
    if b < 2 || per == 0 {
        return f64::NAN;
    }
    let means: Vec<f64> = x.chunks_exact(per).take(b).map(|c| c.iter().sum::<f64>() / per as f64).collect();
    let m = means.iter().sum::<f64>() / b as f64;
    (means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / ((b - 1) * b) as f64).sqrt()
}

pub fn exp_area_tilt(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let beta = cfg.model.beta;
    let mut t = Table::new(&["L", "method", "n", "lambda", "estimate", "stderr", "ess", "ess_flag", "rel_diff"]);
    for &l in &cfg.model.sizes {
        let lf = l as f64;
        let bx = LatticeBox::unit_origin(l, l)?;
        let chain = |floor: bool, role: u64| -> Result<Vec<u64>> {
            let mut areas = Vec::new();
            let k = cfg.run.seeds.len();
            for (si, &seed) in cfg.run.seeds.iter().enumerate() {
                let mut rng = task_rng(seed, (l as u64) << 1 | role);
                let mut f = HeightField::new(bx, &BoundaryCondition::Dobrushin0111, floor, beta, 1)?;
                for _ in 0..burn(cfg, l) {
                    f.sweep(&mut rng);
                }
                for _ in 0..share(cfg.sampling.samples, si, k) {
                    for _ in 0..thin(cfg, l) {
                        f.sweep(&mut rng);
                    }
                    areas.push(area_below(&open_one_contour(&f, 1)?, &bx));
                }
            }
            Ok(areas)
        };
        let floored = chain(true, 0)?;
        let free = chain(false, 1)?;
        let fv: Vec<f64> = floored.iter().map(|&a| a as f64).collect();
        let direct = fv.iter().sum::<f64>() / fv.len() as f64;
        let n = cfg.tilt.n.unwrap_or_else(|| area_tilt_n_for_level(lf, beta, cfg.tilt.level));
        let lambda = area_tilt_lambda(lf, beta, n, cfg.tilt.c_inf);
        let lw: Vec<f64> = free.iter().map(|&a| area_tilt_log_weight(a, lf, beta, n, cfg.tilt.c_inf)).collect();
        let mx = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = lw.iter().map(|x| (x - mx).exp()).collect();
        let sw: f64 = w.iter().sum();
        let est = free.iter().zip(&w).map(|(&a, &wi)| a as f64 * wi).sum::<f64>() / sw;
        let ess = sw * sw / w.iter().map(|x| x * x).sum::<f64>();
        let var_w = free.iter().zip(&w).map(|(&a, &wi)| wi * (a as f64 - est).powi(2)).sum::<f64>() / sw;
        let free_mean = free.iter().sum::<u64>() as f64 / free.len() as f64;
        let flag = |e: f64| if e < cfg.tilt.ess_min { "low" } else { "ok" };
        let fl_ess = fv.len() as f64;
        t.push(vec![
            l.to_string(),
            "floored".into(),
            "".into(),
            "".into(),
            cell(direct),
            cell(batch_stderr(&fv)),
            cell(fl_ess),
            flag(fl_ess).into(),
            cell(0.0),
        ]);
        t.push(vec![
            l.to_string(),
            "reweighted".into(),
            n.to_string(),
            cell(lambda),
            cell(est),
            cell((var_w / ess).sqrt()),
            cell(ess),
            flag(ess).into(),
            cell((est / direct - 1.0).abs()),
        ]);
        let uv: Vec<f64> = free.iter().map(|&a| a as f64).collect();
        t.push(vec![
            l.to_string(),
            "unfloored".into(),
            "".into(),
            cell(0.0),
            cell(free_mean),
            cell(batch_stderr(&uv)),
            cell(uv.len() as f64),
            flag(uv.len() as f64).into(),
            cell((free_mean / direct - 1.0).abs()),
        ]);
    }
    let mut out = ExperimentOutput::default();
    out.tables.push(("area_tilt.csv".into(), t));
    Ok(out)
}

pub fn exp_oz_battery(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let beta = cfg.model.beta;
    let oz = &cfg.oz;
    let mut t = Table::new(&["direction_x", "direction_y", "check", "value", "tolerance", "verdict", "detail"]);
    let verdict = |ok: bool| if ok { "pass" } else { "fail" }.to_string();
    for d in &oz.directions {
        let (dx, dy) = (cell(d[0]), cell(d[1]));
        let mut row = |check: &str, value: f64, tol: &str, v: String, detail: String| {
            t.push(vec![dx.clone(), dy.clone(), check.into(), cell(value), tol.into(), v, detail]);
        };
        let (st, tm) = match step_distribution_zero(beta, *d, oz.cutoff) {
            Ok(x) => x,
            Err(e) => {
                row("enumeration", f64::NAN, "", "error".into(), e.to_string().replace(',', ";"));
                continue;
            }
        };
        let m = st.total_mass;
        row(
            "normalization",
            m,
            &oz.normalization_tol.to_string(),
            verdict(m >= 1.0 - oz.normalization_tol && m <= 1.0 + 1e-9),
            format!("cutoff={}", oz.cutoff),
        );
        let norm = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let (ux, uy) = (d[0] / norm, d[1] / norm);
        let along = st.mean[0] * ux + st.mean[1] * uy;
        let perp = (-st.mean[0] * uy + st.mean[1] * ux).abs();
        let ratio = perp / along;
        row(
            "colinearity",
            ratio,
            &oz.colinear_tol.to_string(),
            verdict(along > 0.0 && ratio <= oz.colinear_tol),
            format!("mean=({:.6};{:.6})", st.mean[0], st.mean[1]),
        );
        let (ks, ls): (Vec<f64>, Vec<f64>) = (2..=oz.cutoff)
            .filter_map(|k| {
                let tail = tm.mass_from_length(k);
                (tail > 0.0).then(|| (k as f64, tail.ln()))
            })
            .unzip();
        if ks.len() >= 3 {
            let (_, slope, se) = linear_fit(&ks, &ls);
            row("mass_gap", -slope, ">0", verdict(-slope > 0.0), format!("stderr={se:.3e};k=2..{}", oz.cutoff));
        } else {
            row("mass_gap", f64::NAN, ">0", "fail".into(), "too few lengths".into());
        }
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        for uy in 0..=2i64 {
            for vx in 1..=4i64 {
                for vy in 0..=4i64 {
                    if vx + (vy - uy).abs() > 4 {
                        continue;
                    }
                    let (a, b) = hitting_identity_check(&tm, beta, Site::new(0, uy), Site::new(vx, vy));
                    worst = worst.max((a - b).abs());
                    cases += 1;
                }
            }
        }
        row("hitting_identity", worst, "1e-10", verdict(worst <= 1e-10), format!("cases={cases}"));
    }
    if !oz.directions.is_empty() && !oz.comparability_n.is_empty() {
        match comparability(beta, oz.chi, &oz.comparability_n, oz.comparability_slack) {
            Ok(ratios) => {
                for (name, k) in [("comparability_halfplane", 0usize), ("comparability_square", 1)] {
                    let v: Vec<f64> = ratios.iter().map(|r| r.1[k]).collect();
                    let band = v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                        / v.iter().copied().fold(f64::INFINITY, f64::min);
                    let detail = ratios.iter().map(|r| format!("{}:{:.4}", r.0, r.1[k])).collect::<Vec<_>>().join(";");
                    t.push(vec![
                        cell(1.0),
                        cell(0.0),
                        name.into(),
                        cell(band),
                        oz.comparability_band.to_string(),
                        verdict(band.is_finite() && band <= oz.comparability_band),
                        detail,
                    ]);
                }
            }
            Err(e) => t.push(vec![
                cell(1.0),
                cell(0.0),
                "comparability".into(),
                "nan".into(),
                oz.comparability_band.to_string(),
                "error".into(),
                e.to_string().replace(',', ";"),
            ]),
        }
    }
    let mut out = ExperimentOutput::default();
    out.tables.push(("oz_battery.csv".into(), t));
    Ok(out)
}

/// For each N: [𝒢_ℍ / 𝒢(·|γ⊂ℍ), 𝒢(·|γ⊂Q_N) / 𝒢(·|γ⊂ℍ)] at endpoint (N, 0).
fn comparability(beta: f64, chi: f64, ns: &[i64], slack: usize) -> Result<Vec<(i64, [f64; 2])>> {
    let deco = Decoration::sos(beta, chi, 10, None)?;
    ns.iter()
        .map(|&n| {
            let x = Site::new(n, 0);
            let ml = (n as usize + slack).min(30);
            let gh = partition_function(x, &deco, Weighting::Modified(Domain::HalfPlane), Domain::HalfPlane, None, ml)?;
            let g = partition_function(x, &deco, Weighting::Free, Domain::HalfPlane, None, ml)?;
            let q = partition_function(x, &deco, Weighting::Free, Domain::Square(n), None, ml)?;
            Ok((n, [(gh.log_g - g.log_g).exp(), (q.log_g - g.log_g).exp()]))
        })
        .collect()
}
