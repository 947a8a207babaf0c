use pyo3::prelude::*;
use pyo3::types::IntoPyDict;
use pyo3::types::PyDict;
use pysoslab::pysoslab;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyModule>)>(f: F) {
    pyo3::append_to_inittab!(pysoslab);
    Python::initialize();
    Python::attach(|py| {
        let m = py.import("pysoslab").unwrap();
        f(py, &m);
    });
}

#[test]
fn bindings_round_trip() {
    with_module(|py, m| {
        let rows: Vec<(f64, f64, usize, f64, bool)> = m
            .getattr("surface_tension")
            .unwrap()
            .call1((2.0, (1, 0), 3))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().any(|r| r.4));

        let h: Vec<Vec<i64>> = m.getattr("sample_heights").unwrap().call1((4, 3, 1.0, 10, 7)).unwrap().extract().unwrap();
        assert_eq!((h.len(), h[0].len()), (3, 4));
        assert!(h.iter().flatten().all(|&x| x >= 0));

        let p: f64 = m.getattr("hitting_probability").unwrap().call1((0, 0, 2)).unwrap().extract().unwrap();
        // Lazy walk: paths 0→0→0, 0→1→0 each with prob 1/9.
        assert!((p - 2.0 / 9.0).abs() < 1e-12);

        let v: Vec<f64> = m.getattr("doney_v1").unwrap().call1((vec![(-1i64, 0.5), (1i64, 0.5)], 5)).unwrap().extract().unwrap();
        assert!(v.iter().enumerate().all(|(i, x)| (x - (i + 1) as f64).abs() < 1e-8));

        let err = m.getattr("exact_marginals").unwrap().call1((6, 6, 1.0)).unwrap_err();
        assert!(err.is_instance(py, &m.getattr("GuardError").unwrap().cast_into::<pyo3::types::PyType>().unwrap()));
        let err = m.getattr("sample_heights").unwrap().call((4, 3, 1.0, 1, 1), Some(&[("boundary_kind", "nope")].into_py_dict(py).unwrap())).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));

        let d = m.getattr("experiment").unwrap().call1(("exp-oz-battery", "[oz]\ndirections = []\n")).unwrap();
        let d = d.cast::<PyDict>().unwrap();
        let csv: String = d.get_item("oz_battery.csv").unwrap().unwrap().extract().unwrap();
        assert_eq!(csv.lines().count(), 1);
    });
}
