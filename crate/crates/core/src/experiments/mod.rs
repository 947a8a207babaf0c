//! Named end-to-end experiments, their configuration and persisted outputs.
//!
//! Configs are TOML (`key = value` under `[section]` headers). Every table
//! written carries an `asymptotic` column set to `false`: all sizes here are
//! far below the asymptotic regime.

mod runs;

pub use runs::{
    calibrate_sigma, contour_walk, exp_area_tilt, exp_excursion_sos, exp_min_rho, exp_oz_battery, i0_interval,
    top_macroscopic_loop, SigmaEstimate,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Environment variable overriding `run.output_dir`.
pub const OUTPUT_DIR_ENV: &str = "SOSLAB_OUTPUT_DIR";

pub const EXPERIMENTS: [&str; 4] = ["exp-min-rho", "exp-excursion-sos", "exp-area-tilt", "exp-oz-battery"];

/// Per-module versions recorded in every manifest.
pub const MODULE_VERSIONS: [(&str, &str); 7] = [
    ("lattice_core", "1"),
    ("sos_gibbs", "1"),
    ("level_lines", "1"),
    ("polymer_weights", "1"),
    ("cone_decomposition", "1"),
    ("halfspace_walk", "1"),
    ("experiments_cli", "1"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub experiment: String,
    pub seeds: Vec<u64>,
    pub output_dir: String,
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Zero,
    Dobrushin0111,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub beta: f64,
    /// L (box side) or N (contour length) values.
    pub sizes: Vec<i64>,
    pub boundary: BoundaryKind,
    pub floor: bool,
    /// Box height as a fraction of N for the open-contour experiment.
    pub height_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingSection {
    /// Samples per size, split evenly across seeds.
    pub samples: usize,
    /// Burn-in sweeps: `burn_in + burn_factor·N²`.
    pub burn_in: usize,
    pub burn_factor: f64,
    /// Sweeps between samples: `max(thin, thin_factor·N²)`.
    pub thin: usize,
    pub thin_factor: f64,
    /// Number of sample paths dumped to CSV (0 = none).
    pub dump: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSource {
    /// Diffusivity of a free interface, fitted from its variance profile.
    Calibration,
    /// σ² = σ₂²/μ of the Φ ≡ 0 step distribution.
    StepDistribution,
    /// `walk.sigma` as given.
    Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkSection {
    pub delta: f64,
    pub t_list: Vec<f64>,
    pub reference_len: usize,
    pub sigma_source: SigmaSource,
    pub sigma: f64,
    pub calibration_width: i64,
    pub calibration_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OzSection {
    pub directions: Vec<[f64; 2]>,
    /// Irreducible-animal length cutoff.
    pub cutoff: usize,
    pub normalization_tol: f64,
    pub colinear_tol: f64,
    /// Endpoints (N, 0) for the comparability ratios; empty skips them.
    pub comparability_n: Vec<i64>,
    pub comparability_slack: usize,
    pub comparability_band: f64,
    pub chi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TiltSection {
    pub c_inf: f64,
    /// Contour level h; the tilt index is n = ⌊ln L/(4β)⌋ − h unless `n` is set.
    pub level: i64,
    pub n: Option<i64>,
    pub ess_min: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub model: ModelSection,
    pub sampling: SamplingSection,
    pub walk: WalkSection,
    pub oz: OzSection,
    pub tilt: TiltSection,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            experiment: String::new(),
            seeds: vec![1],
            output_dir: "soslab-out".into(),
            svg: false,
        }
    }
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            beta: 1.0,
            sizes: vec![32],
            boundary: BoundaryKind::Zero,
            floor: true,
            height_factor: 0.5,
        }
    }
}

impl Default for SamplingSection {
    fn default() -> Self {
        SamplingSection {
            samples: 100,
            burn_in: 1000,
            burn_factor: 0.0,
            thin: 20,
            thin_factor: 0.0,
            dump: 0,
        }
    }
}

impl Default for WalkSection {
    fn default() -> Self {
        WalkSection {
            delta: 0.2,
            t_list: vec![0.25, 0.5, 0.75],
            reference_len: 1 << 14,
            sigma_source: SigmaSource::Calibration,
            sigma: 1.0,
            calibration_width: 64,
            calibration_samples: 400,
        }
    }
}

impl Default for OzSection {
    fn default() -> Self {
        OzSection {
            directions: vec![[1.0, 0.0]],
            cutoff: 12,
            normalization_tol: 0.01,
            colinear_tol: 0.01,
            comparability_n: (2..=8).collect(),
            comparability_slack: 6,
            comparability_band: 4.0,
            chi: 0.6,
        }
    }
}

impl Default for TiltSection {
    fn default() -> Self {
        TiltSection {
            c_inf: 1.0,
            level: 1,
            n: None,
            ess_min: 100.0,
        }
    }
}

impl ExperimentConfig {
    /// Defaults for a named experiment (the sizes and β of the reference runs).
    pub fn defaults_for(experiment: &str) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        c.run.experiment = experiment.to_string();
        match experiment {
            "exp-min-rho" => {
                c.model = ModelSection {
                    beta: 1.0,
                    sizes: vec![32, 64, 128],
                    boundary: BoundaryKind::Zero,
                    floor: true,
                    ..ModelSection::default()
                };
                c.sampling = SamplingSection {
                    samples: 200,
                    burn_in: 2000,
                    burn_factor: 0.0,
                    thin: 20,
                    thin_factor: 0.0,
                    dump: 0,
                };
            }
            "exp-excursion-sos" => {
                c.model = ModelSection {
                    beta: 1.5,
                    sizes: vec![32, 64, 128],
                    boundary: BoundaryKind::Dobrushin0111,
                    floor: false,
                    height_factor: 0.5,
                };
                c.sampling = SamplingSection {
                    samples: 1000,
                    burn_in: 500,
                    burn_factor: 1.0,
                    thin: 50,
                    thin_factor: 0.0625,
                    dump: 0,
                };
            }
            "exp-area-tilt" => {
                c.model = ModelSection {
                    beta: 1.0,
                    sizes: vec![16],
                    boundary: BoundaryKind::Dobrushin0111,
                    floor: true,
                    ..ModelSection::default()
                };
                c.sampling = SamplingSection {
                    samples: 100_000,
                    burn_in: 2000,
                    burn_factor: 0.0,
                    thin: 1,
                    thin_factor: 0.0,
                    dump: 0,
                };
            }
            "exp-oz-battery" => {
                c.model.beta = 2.0;
                c.model.sizes = vec![];
            }
            other => return Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
        Ok(c)
    }

    /// Parse a config; keys not given fall back to the experiment defaults.
    /// `experiment` (if given) overrides/provides `run.experiment`.
    pub fn from_toml(text: &str, experiment: Option<&str>) -> Result<Self> {
        let user: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let named = user
            .get("run")
            .and_then(|r| r.get("experiment"))
            .and_then(|e| e.as_str())
            .map(str::to_string);
        let name = match (experiment, named.as_deref()) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!("config is for '{b}', not '{a}'")));
            }
            (Some(a), _) => a.to_string(),
            (None, Some(b)) => b.to_string(),
            (None, None) => return Err(Error::Config("run.experiment is missing".into())),
        };
        let base = Self::defaults_for(&name)?;
        let mut merged = toml::Table::try_from(&base).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut merged, user);
        let cfg: ExperimentConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// sha256 of the canonical TOML serialisation.
    pub fn hash(&self) -> String {
        sha256_hex(self.to_toml().as_bytes())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !EXPERIMENTS.contains(&self.run.experiment.as_str()) {
            return bad(format!("unknown experiment '{}'", self.run.experiment));
        }
        if self.run.seeds.is_empty() {
            return bad("run.seeds must be nonempty".into());
        }
        if !(self.model.beta > 0.0 && self.model.beta.is_finite()) {
            return bad(format!("model.beta must be positive, got {}", self.model.beta));
        }
        if self.model.sizes.iter().any(|&s| s < 2) {
            return bad("model.sizes must be ≥ 2".into());
        }
        if self.run.experiment != "exp-oz-battery" && self.model.sizes.is_empty() {
            return bad("model.sizes must be nonempty".into());
        }
        if !(self.walk.delta > 0.0 && self.walk.delta < 0.25) {
            return bad("walk.delta must lie in (0, 1/4)".into());
        }
        if self.walk.t_list.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return bad("walk.t_list entries must lie in [0, 1]".into());
        }
        if self.walk.reference_len % 2 != 0 || self.walk.reference_len < 4 {
            return bad("walk.reference_len must be even and ≥ 4".into());
        }
        if self.sampling.samples == 0 {
            return bad("sampling.samples must be ≥ 1".into());
        }
        if !(self.model.height_factor > 0.0) {
            return bad("model.height_factor must be positive".into());
        }
        if self.oz.cutoff < 2 {
            return bad("oz.cutoff must be ≥ 2".into());
        }
        Ok(())
    }

    /// Output directory, honouring `SOSLAB_OUTPUT_DIR`.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var(OUTPUT_DIR_ENV) {
            Ok(d) if !d.is_empty() => PathBuf::from(d),
            _ => PathBuf::from(&self.run.output_dir),
        }
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A CSV table. `to_csv` appends the `asymptotic=false` caveat column.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell by row index and column name.
    pub fn get(&self, row: usize, name: &str) -> Option<&str> {
        self.column(name).and_then(|c| self.rows.get(row).map(|r| r[c].as_str()))
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push_str(",asymptotic\n");
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push_str(",false\n");
        }
        s
    }
}

/// Fixed-precision float cell (`nan` for non-finite).
pub fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8}")
    } else {
        "nan".into()
    }
}

/// Minimal flat SVG: one polyline per series, bounding-box axes, labels.
pub fn svg_plot(title: &str, xlabel: &str, ylabel: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let (w, h, m) = (480.0, 320.0, 48.0);
    let pts = series.iter().flat_map(|s| s.1.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - 2.0 * m, h - 2.0 * m);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, w / 2.0, xml_escape(title));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 10.0, xml_escape(xlabel));
    let _ = writeln!(s, r#"<text x="12" y="{}" transform="rotate(-90 12 {})" text-anchor="middle">{}</text>"#, h / 2.0, h / 2.0, xml_escape(ylabel));
    let _ = writeln!(s, r#"<text x="{m}" y="{}">{x0:.3}</text><text x="{}" y="{}" text-anchor="end">{x1:.3}</text>"#, h - m + 14.0, w - m, h - m + 14.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y0:.3}</text><text x="{}" y="{}" text-anchor="end">{y1:.3}</text>"#, m - 4.0, h - m, m - 4.0, m + 4.0);
    for (i, (name, p)) in series.iter().enumerate() {
        let c = colours[i % colours.len()];
        let coords: Vec<String> = p
            .iter()
            .filter(|q| q.0.is_finite() && q.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{c}" points="{}"/>"#, coords.join(" "));
        let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{c}">{}</text>"#, w - m + 4.0 - 40.0, m + 14.0 * (i as f64 + 1.0), xml_escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Everything an experiment produces before it is written to disk.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    /// (file name, table).
    pub tables: Vec<(String, Table)>,
    /// Additional raw files (dumps, SVG).
    pub files: Vec<(String, String)>,
    /// Free-form run metadata (e.g. truncation deficits, σ sources).
    pub notes: BTreeMap<String, String>,
}

impl ExperimentOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.0 == name).map(|t| &t.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub module_versions: BTreeMap<String, String>,
    /// Output file name → sha256.
    pub outputs: BTreeMap<String, String>,
    pub notes: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        let mut module_versions: BTreeMap<String, String> =
            MODULE_VERSIONS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        module_versions.insert("soslab".into(), env!("CARGO_PKG_VERSION").into());
        RunManifest {
            experiment: cfg.run.experiment.clone(),
            config_hash: cfg.hash(),
            seeds: cfg.run.seeds.clone(),
            started_unix: unix_now(),
            finished_unix: 0,
            module_versions,
            outputs: BTreeMap::new(),
            notes: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("manifest: {e}")))
    }

    /// Recompute every output checksum under `dir`; returns mismatching names.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for (name, sum) in &self.outputs {
            let bytes = std::fs::read(dir.join(name))?;
            if &sha256_hex(&bytes) != sum {
                bad.push(name.clone());
            }
        }
        Ok(bad)
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Writes files into one directory and records their checksums.
#[derive(Debug)]
pub struct OutputSink {
    pub dir: PathBuf,
    pub written: BTreeMap<String, String>,
}

impl OutputSink {
    pub fn new(dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(OutputSink {
            dir,
            written: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<PathBuf> {
        let p = self.dir.join(name);
        std::fs::write(&p, content)?;
        self.written.insert(name.to_string(), sha256_hex(content.as_bytes()));
        Ok(p)
    }
}

/// Run a configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut out = match cfg.run.experiment.as_str() {
        "exp-min-rho" => exp_min_rho(cfg)?,
        "exp-excursion-sos" => exp_excursion_sos(cfg)?,
        "exp-area-tilt" => exp_area_tilt(cfg)?,
        "exp-oz-battery" => exp_oz_battery(cfg)?,
        other => return Err(Error::Config(format!("unknown experiment '{other}'"))),
    };
    if !cfg.run.svg {
        out.files.retain(|f| !f.0.ends_with(".svg"));
    }
    Ok(out)
}

/// Run, write every table/file plus `manifest.json`; returns the manifest.
pub fn run_and_persist(cfg: &ExperimentConfig) -> Result<(RunManifest, ExperimentOutput)> {
    let mut manifest = RunManifest::new(cfg);
    let out = run_experiment(cfg)?;
    let mut sink = OutputSink::new(cfg.output_dir())?;
    sink.write("config.toml", &cfg.to_toml())?;
    for (name, t) in &out.tables {
        sink.write(name, &t.to_csv())?;
    }
    for (name, body) in &out.files {
        sink.write(name, body)?;
    }
    manifest.outputs = sink.written.clone();
    manifest.notes = out.notes.clone();
    manifest.finished_unix = unix_now();
    sink.write("manifest.json", &manifest.to_json())?;
    Ok((manifest, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_merges_over_defaults() {
        let c = ExperimentConfig::from_toml("[run]\nexperiment = \"exp-min-rho\"\nseeds = [3]\n[model]\nsizes = [16]\n", None).unwrap();
        assert_eq!(c.model.sizes, vec![16]);
        assert_eq!(c.model.beta, 1.0);
        assert_eq!(c.run.seeds, vec![3]);
        assert!(c.model.floor);
    }

    #[test]
    fn config_errors() {
        for bad in [
            "[run]\nexperiment = \"nope\"\n",
            "[run]\nexperiment = \"exp-min-rho\"\nseeds = []\n",
            "[run]\nexperiment = \"exp-min-rho\"\nbogus = 1\n",
            "[model]\nbeta = 1.0\n",
            "[run]\nexperiment = \"exp-min-rho\"\n[walk]\ndelta = 0.3\n",
            "not toml ===",
        ] {
            let e = ExperimentConfig::from_toml(bad, None).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{bad}: {e}");
        }
        assert!(ExperimentConfig::from_toml("[run]\nexperiment = \"exp-min-rho\"\n", Some("exp-area-tilt")).is_err());
    }

    #[test]
    fn hash_is_canonical() {
        let a = ExperimentConfig::from_toml("[run]\nexperiment = \"exp-area-tilt\"\n[model]\nbeta = 1.0\n", None).unwrap();
        let b = ExperimentConfig::from_toml("[model]\nbeta = 1.0\n[run]\nexperiment = \"exp-area-tilt\"\n", None).unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.run.seeds = vec![9];
        assert_ne!(a.hash(), c.hash());
        let round = ExperimentConfig::from_toml(&a.to_toml(), None).unwrap();
        assert_eq!(round, a);
    }

    #[test]
    fn table_has_caveat_column() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), cell(0.5)]);
        assert_eq!(t.to_csv(), "a,b,asymptotic\n1,0.50000000,false\n");
        assert_eq!(t.get(0, "b"), Some("0.50000000"));
        assert_eq!(cell(f64::NAN), "nan");
    }

    #[test]
    fn svg_is_well_formed() {
        let s = svg_plot("t<1>", "x", "y", &[("a".into(), vec![(0.0, 1.0), (1.0, 2.0)])]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("t&lt;1&gt;") && s.contains("<polyline"));
    }

    #[test]
    fn manifest_round_trip_and_verify() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::defaults_for("exp-oz-battery").unwrap();
        let mut sink = OutputSink::new(dir.path().to_path_buf()).unwrap();
        sink.write("x.csv", "a\n1\n").unwrap();
        let mut m = RunManifest::new(&cfg);
        m.outputs = sink.written.clone();
        let back = RunManifest::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert!(m.verify(dir.path()).unwrap().is_empty());
        std::fs::write(dir.path().join("x.csv"), "tampered").unwrap();
        assert_eq!(m.verify(dir.path()).unwrap(), vec!["x.csv".to_string()]);
    }
}
