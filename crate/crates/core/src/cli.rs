//! Command-line front end. Exit codes: 0 ok, 2 config/usage error,
//! 3 guard violation, 1 anything else.

use crate::cone::{step_distribution_zero, StepDistribution};
use crate::error::{Error, Result};
use crate::experiments::{run_and_persist, ExperimentConfig, OutputSink, RunManifest, OUTPUT_DIR_ENV};
use crate::lattice::{LatticeBox, Site};
use crate::level_lines::extract_level_lines;
use crate::polymer::{surface_tension, ColumnOracle, Decoration, SurfaceTensionRow, SurfaceTensionTable, TENSION_SLACK};
use crate::sos::{exact_enumerate, BoundaryCondition, HeightField};
use crate::walk::{
    ballot_check, bridges_to_csv, conditioned_bridge, fits_to_csv, ssrw_1d, unit_column_step, BallotSettings,
    BridgeMethod,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "soslab", version, about = "SOS surfaces, contours and the effective random walk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Output directory (overridden by SOSLAB_OUTPUT_DIR).
    #[arg(long, default_value = "soslab-out")]
    pub out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Boundary {
    Zero,
    Dobrushin,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BuiltinWalk {
    /// Steps (1,−1), (1,0), (1,1) with probability ⅓ each.
    Lazy,
    /// Steps (1,±1) with probability ½.
    Ssrw,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum DecorationArg {
    Zero,
    Sos,
}

#[derive(Args, Debug, Clone)]
pub struct StepSource {
    /// StepDistribution CSV (as written by `steps`); overrides --walk.
    #[arg(long)]
    pub steps: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "lazy")]
    pub walk: BuiltinWalk,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Heat-bath sample of an SOS field; writes heights and level lines.
    Sample {
        #[arg(long, default_value_t = 16)]
        width: i64,
        #[arg(long, default_value_t = 16)]
        height: i64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, value_enum, default_value = "zero")]
        boundary: Boundary,
        #[arg(long)]
        no_floor: bool,
        #[arg(long, default_value_t = 1000)]
        sweeps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Level whose contours are written.
        #[arg(long, default_value_t = 1)]
        level: i64,
        #[arg(long, default_value_t = 0)]
        init: i64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact single-site marginals by transfer matrix.
    Enumerate {
        #[arg(long, default_value_t = 3)]
        width: i64,
        #[arg(long, default_value_t = 3)]
        height: i64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, value_enum, default_value = "zero")]
        boundary: Boundary,
        #[arg(long)]
        no_floor: bool,
        #[arg(long)]
        hmax: Option<i64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Surface tension −log 𝒢(Nn)/(N|n|) for N = 1..nmax plus extrapolation.
    Tension {
        #[arg(long)]
        beta: f64,
        /// Integer direction "x,y".
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        dir: (i64, i64),
        #[arg(long, default_value_t = 8)]
        nmax: usize,
        #[arg(long, default_value_t = TENSION_SLACK)]
        slack: usize,
        #[arg(long, value_enum, default_value = "zero")]
        decoration: DecorationArg,
        #[arg(long, default_value_t = 0.6)]
        chi: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Φ ≡ 0 effective-walk step distribution.
    Steps {
        #[arg(long)]
        beta: f64,
        #[arg(long, value_parser = parse_fpair, allow_hyphen_values = true, default_value = "1,0")]
        dir: (f64, f64),
        #[arg(long, default_value_t = 12)]
        cutoff: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Bridges of the walk conditioned to stay ≥ 0, from (0,u) to (n,v).
    Bridge {
        #[command(flatten)]
        source: StepSource,
        #[arg(long, default_value_t = 1)]
        u: i64,
        #[arg(long, default_value_t = 1)]
        v: i64,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        rejection: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Ballot-type scaling fits (survival, hitting, profile, V₁ factorisation).
    Ballot {
        #[command(flatten)]
        source: StepSource,
        /// Largest power of two in the k and N grids (smallest is 2⁶).
        #[arg(long, default_value_t = 11)]
        max_pow: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    #[command(name = "exp-min-rho")]
    ExpMinRho(ExpArgs),
    #[command(name = "exp-excursion-sos")]
    ExpExcursionSos(ExpArgs),
    #[command(name = "exp-area-tilt")]
    ExpAreaTilt(ExpArgs),
    #[command(name = "exp-oz-battery")]
    ExpOzBattery(ExpArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ExpArgs {
    /// TOML config; missing keys take the experiment defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides run.output_dir; SOSLAB_OUTPUT_DIR wins).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or("expected x,y")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

fn parse_fpair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected x,y")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

fn out_dir(o: &OutArgs) -> PathBuf {
    match std::env::var(OUTPUT_DIR_ENV) {
        Ok(d) if !d.is_empty() => PathBuf::from(d),
        _ => o.out.clone(),
    }
}

fn boundary(b: Boundary) -> BoundaryCondition {
    match b {
        Boundary::Zero => BoundaryCondition::Constant(0),
        Boundary::Dobrushin => BoundaryCondition::Dobrushin0111,
    }
}

fn load_steps(s: &StepSource) -> Result<StepDistribution> {
    match &s.steps {
        Some(p) => StepDistribution::from_csv(&std::fs::read_to_string(p)?),
        None => Ok(match s.walk {
            BuiltinWalk::Lazy => unit_column_step(&vec![(-1, 1.0 / 3.0), (0, 1.0 / 3.0), (1, 1.0 / 3.0)]),
            BuiltinWalk::Ssrw => unit_column_step(&ssrw_1d()),
        }),
    }
}

/// Writes outputs plus a manifest keyed by the command line.
fn finish(sink: OutputSink, name: &str, argv: &str, seeds: Vec<u64>) -> Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.run.experiment = name.to_string();
    let mut m = RunManifest::new(&cfg);
    m.config_hash = crate::experiments::sha256_hex(argv.as_bytes());
    m.seeds = seeds;
    m.outputs = sink.written.clone();
    m.notes.insert("command".into(), argv.to_string());
    m.finished_unix = crate::experiments::unix_now();
    let mut sink = sink;
    sink.write("manifest.json", &m.to_json())?;
    for f in sink.written.keys() {
        eprintln!("wrote {}", sink.dir.join(f).display());
    }
    Ok(())
}

pub fn execute(cmd: Command, argv: &str) -> Result<()> {
    match cmd {
        Command::Sample {
            width,
            height,
            beta,
            boundary: b,
            no_floor,
            sweeps,
            seed,
            level,
            init,
            out,
        } => {
            let bx = LatticeBox::unit_origin(width, height)?;
            let mut f = HeightField::new(bx, &boundary(b), !no_floor, beta, init)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..sweeps {
                f.sweep(&mut rng);
            }
            let mut hs = String::from("x,y,h\n");
            for (s, h) in bx.sites().zip(f.heights()) {
                let _ = writeln!(hs, "{},{},{}", s.x, s.y, h);
            }
            let mut cs = String::new();
            for (i, c) in extract_level_lines(&f, level)?.iter().enumerate() {
                let _ = writeln!(cs, "# contour {i} closed={} len={}", c.is_closed(), c.len());
                cs.push_str(&c.serialize());
            }
            let mut sink = OutputSink::new(out_dir(&out))?;
            sink.write("heights.csv", &hs)?;
            sink.write(&format!("contours_h{level}.txt"), &cs)?;
            finish(sink, "sample", argv, vec![seed])
        }
        Command::Enumerate {
            width,
            height,
            beta,
            boundary: b,
            no_floor,
            hmax,
            out,
        } => {
            let bx = LatticeBox::unit_origin(width, height)?;
            let r = exact_enumerate(&bx, &boundary(b), !no_floor, beta, hmax)?;
            let mut s = format!("# log_z={:.15},tail_bound={:.3e}\nx,y,h,prob\n", r.log_z, r.tail_bound);
            for (i, site) in bx.sites().enumerate() {
                let (lo, hi) = r.domains[i];
                for h in lo..=hi {
                    let _ = writeln!(s, "{},{},{},{:.15e}", site.x, site.y, h, r.marginal(i, h));
                }
            }
            let mut sink = OutputSink::new(out_dir(&out))?;
            sink.write("marginals.csv", &s)?;
            finish(sink, "enumerate", argv, vec![])
        }
        Command::Tension {
            beta,
            dir,
            nmax,
            slack,
            decoration,
            chi,
            out,
        } => {
            if nmax == 0 {
                return Err(Error::Config("--nmax must be ≥ 1".into()));
            }
            let deco = match decoration {
                DecorationArg::Zero => Decoration::zero(beta),
                DecorationArg::Sos => Decoration::sos(beta, chi, 10, None)?,
            };
            let d = Site::new(dir.0, dir.1);
            let ns: Vec<usize> = (1..=nmax).collect();
            let mut table = SurfaceTensionTable::new(beta, format!("max_len = N|n|_1 + {slack}"));
            for r in surface_tension(d, &deco, &ns, slack)? {
                table.push(r);
            }
            if decoration == DecorationArg::Zero {
                let o = ColumnOracle::new(beta, crate::cone::DEFAULT_ORACLE_EXCESS)?;
                let v = [dir.0 as f64, dir.1 as f64];
                let norm = v[0].hypot(v[1]);
                table.push(SurfaceTensionRow {
                    direction: [v[0] / norm, v[1] / norm],
                    n: 0,
                    value: o.tau(v)?,
                    extrapolated: false,
                });
            }
            let csv = table.to_csv();
            print!("{csv}");
            let mut sink = OutputSink::new(out_dir(&out))?;
            sink.write("tension.csv", &csv)?;
            finish(sink, "tension", argv, vec![])
        }
        Command::Steps { beta, dir, cutoff, out } => {
            let (st, _) = step_distribution_zero(beta, [dir.0, dir.1], cutoff)?;
            let csv = st.to_csv();
            let mut sink = OutputSink::new(out_dir(&out))?;
            sink.write("steps.csv", &csv)?;
            eprintln!("total_mass={:.6} mean=({:.6},{:.6})", st.total_mass, st.mean[0], st.mean[1]);
            finish(sink, "steps", argv, vec![])
        }
        Command::Bridge {
            source,
            u,
            v,
            n,
            samples,
            seed,
            rejection,
            out,
        } => {
            let st = load_steps(&source)?;
            let method = if rejection {
                BridgeMethod::Rejection
            } else {
                BridgeMethod::DpBackward
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let paths = (0..samples)
                .map(|_| conditioned_bridge(&st, u, v, n, &mut rng, method))
                .collect::<Result<Vec<_>>>()?;
            let mut sink = OutputSink::new(out_dir(&out))?;
            sink.write("bridges.csv", &bridges_to_csv(&paths))?;
            finish(sink, "bridge", argv, vec![seed])
        }
        Command::Ballot { source, max_pow, out } => {
            if !(6..=14).contains(&max_pow) {
                return Err(Error::Config("--max-pow must lie in 6..=14".into()));
            }
            let st = load_steps(&source)?;
            let grid: Vec<usize> = (6..=max_pow).map(|p| 1usize << p).collect();
            let settings = BallotSettings {
                k_grid: grid.clone(),
                n_grid: grid,
                ..BallotSettings::default()
            };
            let csv = fits_to_csv(&ballot_check(&st, &settings)?);
            print!("{csv}");
            let mut sink = OutputSink::new(out_dir(&out))?;
            sink.write("fits.csv", &csv)?;
            finish(sink, "ballot", argv, vec![])
        }
        Command::ExpMinRho(a) => experiment("exp-min-rho", a),
        Command::ExpExcursionSos(a) => experiment("exp-excursion-sos", a),
        Command::ExpAreaTilt(a) => experiment("exp-area-tilt", a),
        Command::ExpOzBattery(a) => experiment("exp-oz-battery", a),
    }
}

fn experiment(name: &str, a: ExpArgs) -> Result<()> {
    let text = match &a.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = ExperimentConfig::from_toml(&text, Some(name))?;
    if let Some(o) = a.out {
        cfg.run.output_dir = o.display().to_string();
    }
    let (m, out) = run_and_persist(&cfg)?;
    for (file, t) in &out.tables {
        eprintln!("{file}: {} rows", t.rows.len());
    }
    eprintln!("wrote {} (config {})", cfg.output_dir().join("manifest.json").display(), &m.config_hash[..12]);
    Ok(())
}

/// Parse and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect::<Vec<_>>().join(" ");
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
