//! Python bindings for soslab.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soslab::cone::{step_distribution_zero, StepDistribution};
use soslab::experiments::{run_experiment, ExperimentConfig};
use soslab::lattice::{LatticeBox, Site};
use soslab::polymer::{surface_tension as tension, Decoration, TENSION_SLACK};
use soslab::sos::{exact_enumerate, BoundaryCondition, HeightField};
use soslab::walk::{self, BridgeMethod};

create_exception!(pysoslab, GuardError, PyException);

fn py_err(e: soslab::Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        3 => GuardError::new_err(e.to_string()),
        _ => match e {
            soslab::Error::Invalid(m) => PyValueError::new_err(m),
            other => PyRuntimeError::new_err(other.to_string()),
        },
    }
}

fn boundary(name: &str) -> PyResult<BoundaryCondition> {
    match name {
        "zero" => Ok(BoundaryCondition::Constant(0)),
        "dobrushin" => Ok(BoundaryCondition::Dobrushin0111),
        other => Err(PyValueError::new_err(format!("unknown boundary '{other}'"))),
    }
}

fn builtin_walk(name: &str) -> PyResult<StepDistribution> {
    match name {
        "lazy" => Ok(walk::unit_column_step(&vec![(-1, 1.0 / 3.0), (0, 1.0 / 3.0), (1, 1.0 / 3.0)])),
        "ssrw" => Ok(walk::unit_column_step(&walk::ssrw_1d())),
        other => Err(PyValueError::new_err(format!("unknown walk '{other}'"))),
    }
}

/// Heat-bath sample; returns rows of heights (bottom row first).
#[pyfunction]
#[pyo3(signature = (width, height, beta, sweeps, seed, floor=true, boundary_kind="zero", init=0))]
#[allow(clippy::too_many_arguments)]
fn sample_heights(
    width: i64,
    height: i64,
    beta: f64,
    sweeps: usize,
    seed: u64,
    floor: bool,
    boundary_kind: &str,
    init: i64,
) -> PyResult<Vec<Vec<i64>>> {
    let bx = LatticeBox::unit_origin(width, height).map_err(py_err)?;
    let mut f = HeightField::new(bx, &boundary(boundary_kind)?, floor, beta, init).map_err(py_err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..sweeps {
        f.sweep(&mut rng);
    }
    Ok(f.heights().chunks(width as usize).map(|r| r.to_vec()).collect())
}

/// Exact single-site marginals: list of (x, y, {height: prob}).
#[pyfunction]
#[pyo3(signature = (width, height, beta, floor=true, boundary_kind="zero", hmax=None))]
fn exact_marginals<'py>(
    py: Python<'py>,
    width: i64,
    height: i64,
    beta: f64,
    floor: bool,
    boundary_kind: &str,
    hmax: Option<i64>,
) -> PyResult<Vec<(i64, i64, Bound<'py, PyDict>)>> {
    let bx = LatticeBox::unit_origin(width, height).map_err(py_err)?;
    let r = exact_enumerate(&bx, &boundary(boundary_kind)?, floor, beta, hmax).map_err(py_err)?;
    let mut out = Vec::new();
    for (i, s) in bx.sites().enumerate() {
        let d = PyDict::new(py);
        let (lo, hi) = r.domains[i];
        for h in lo..=hi {
            d.set_item(h, r.marginal(i, h))?;
        }
        out.push((s.x, s.y, d));
    }
    Ok(out)
}

/// Surface-tension rows (dx, dy, N, value, extrapolated) for N = 1..nmax.
#[pyfunction]
#[pyo3(signature = (beta, direction=(1, 0), nmax=6))]
fn surface_tension(beta: f64, direction: (i64, i64), nmax: usize) -> PyResult<Vec<(f64, f64, usize, f64, bool)>> {
    let ns: Vec<usize> = (1..=nmax).collect();
    let rows = tension(Site::new(direction.0, direction.1), &Decoration::zero(beta), &ns, TENSION_SLACK).map_err(py_err)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.direction[0], r.direction[1], r.n, r.value, r.extrapolated))
        .collect())
}

/// Φ ≡ 0 step distribution: dict with masses [(vx, vy, p)], total_mass, mean.
#[pyfunction]
#[pyo3(signature = (beta, direction=(1.0, 0.0), cutoff=10))]
fn step_distribution<'py>(py: Python<'py>, beta: f64, direction: (f64, f64), cutoff: usize) -> PyResult<Bound<'py, PyDict>> {
    let (st, _) = step_distribution_zero(beta, [direction.0, direction.1], cutoff).map_err(py_err)?;
    let d = PyDict::new(py);
    let masses: Vec<(i64, i64, f64)> = st.masses.iter().map(|(v, p)| (v.x, v.y, *p)).collect();
    d.set_item("masses", masses)?;
    d.set_item("total_mass", st.total_mass)?;
    d.set_item("mean", (st.mean[0], st.mean[1]))?;
    d.set_item("csv", st.to_csv())?;
    Ok(d)
}

/// P(first hit of (n, v) from (0, u) with heights ≥ 0) for a builtin walk.
#[pyfunction]
#[pyo3(signature = (u, v, n, walk_kind="lazy"))]
fn hitting_probability(u: i64, v: i64, n: usize, walk_kind: &str) -> PyResult<f64> {
    walk::hitting_probability_dp(&builtin_walk(walk_kind)?, u, v, n).map_err(py_err)
}

/// Positive bridges from (0, u) to (n, v); each a list of (x, y).
#[pyfunction]
#[pyo3(signature = (u, v, n, samples, seed, walk_kind="lazy"))]
fn bridges(u: i64, v: i64, n: usize, samples: usize, seed: u64, walk_kind: &str) -> PyResult<Vec<Vec<(i64, i64)>>> {
    let st = builtin_walk(walk_kind)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            walk::conditioned_bridge(&st, u, v, n, &mut rng, BridgeMethod::DpBackward)
                .map(|p| p.positions.iter().map(|s| (s.x, s.y)).collect())
                .map_err(py_err)
        })
        .collect()
}

/// Doney V₁ on 1..=range_max for a centred integer law [(jump, prob)].
#[pyfunction]
fn doney_v1(law: Vec<(i64, f64)>, range_max: usize) -> PyResult<Vec<f64>> {
    let v = walk::doney_v1(&law, range_max, false).map_err(py_err)?;
    Ok((1..=range_max as i64).map(|a| v.at(a)).collect())
}

/// Run a named experiment from TOML text; returns {file name: CSV text}.
#[pyfunction]
#[pyo3(signature = (name, config_toml=""))]
fn experiment<'py>(py: Python<'py>, name: &str, config_toml: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ExperimentConfig::from_toml(config_toml, Some(name)).map_err(py_err)?;
    let out = py.detach(|| run_experiment(&cfg)).map_err(py_err)?;
    let d = PyDict::new(py);
    for (file, t) in &out.tables {
        d.set_item(file, t.to_csv())?;
    }
    Ok(d)
}

#[pymodule]
pub fn pysoslab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GuardError", m.py().get_type::<GuardError>())?;
    m.add_function(wrap_pyfunction!(sample_heights, m)?)?;
    m.add_function(wrap_pyfunction!(exact_marginals, m)?)?;
    m.add_function(wrap_pyfunction!(surface_tension, m)?)?;
    m.add_function(wrap_pyfunction!(step_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_probability, m)?)?;
    m.add_function(wrap_pyfunction!(bridges, m)?)?;
    m.add_function(wrap_pyfunction!(doney_v1, m)?)?;
    m.add_function(wrap_pyfunction!(experiment, m)?)?;
    Ok(())
}
