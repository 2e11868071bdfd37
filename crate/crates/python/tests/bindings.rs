use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn run_python(code: &str) {
    Python::attach(|py| {
        let module = PyModule::new(py, "heatsg").unwrap();
        heatsg::heatsg(&module).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("heatsg", module).unwrap();
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.display(py);
            panic!("python snippet failed");
        }
    });
}

#[test]
fn grid_and_field_round_trip() {
    run_python(
        r#"
g = heatsg.Grid(1, 4.0, 9)
assert (g.dim, g.half_extent, g.points, len(g)) == (1, 4.0, 9, 9)
assert g.axis()[0] == -4.0 and g.spacing == 1.0
f = heatsg.Field(g, [complex(i, -i) for i in range(18)], components=2)
assert f.components == 2 and f.values()[3] == complex(3, -3)
assert f.grid == g
try:
    heatsg.Field(g, [0j] * 5)
    raise AssertionError("length mismatch accepted")
except ValueError:
    pass
"#,
    );
}

#[test]
fn evolution_matches_closed_form() {
    run_python(
        r#"
import math
g = heatsg.Grid(1, 12.0, 1025)
f = heatsg.Field.from_rule("gaussian", g)
u = heatsg.apply(1.0, f)
x = g.axis()
want = [math.exp(-v * v / 5.0) / math.sqrt(5.0) for v in x]
assert max(abs(a - b) for a, b in zip(u.values(), want)) < 1e-6
q = heatsg.apply(complex(0.5, 0.5), f)
s = heatsg.apply(complex(0.5, 0.5), f, method="spectral")
assert (q - s).norm(margin=0.25) < 1e-10
assert heatsg.apply(0j, f) == f
states = heatsg.trajectory(f, [0.0, 0.5, 1.0])
assert len(states) == 3 and states[0] == f
"#,
    );
}

#[test]
fn kernel_and_weights() {
    run_python(
        r#"
import math
z = complex(1, 1)
v = heatsg.kernel_eval(z, [2.0])
assert abs(v - complex(0.14304918699097784, 0.015408489715356326)) < 1e-14
assert abs(heatsg.kernel_mass(1.0, heatsg.Grid(1, 20.0, 2001)) - 1) < 1e-12
assert heatsg.weight_eval(2.0, [3.0, 4.0]) == 36.0
assert heatsg.kernel_tail_bound(1.0, 1.0, 20.0, 1) < 1e-20
assert abs(heatsg.operator_bound(1.0, 0.0, heatsg.Grid(1, 12.0, 1025)) - 1) < 1e-12
for bad in (lambda: heatsg.weight_eval(-1.0, [0.0]), lambda: heatsg.kernel_eval(complex(-1, 0), [0.0])):
    try:
        bad()
        raise AssertionError("accepted invalid input")
    except ValueError:
        pass
"#,
    );
}

#[test]
fn laws_and_suite() {
    run_python(
        r#"
g = heatsg.Grid(1, 8.0, 257)
f = heatsg.Field.from_rule("bumps:3", g)
assert heatsg.semigroup_law_residual(0.3, 0.7, f, k=1.0) < 1e-10
assert heatsg.semigroup_law_residual(0.3, 0.7, f, symbol_time_scale=2.0) > 1e-3
lap = heatsg.discrete_laplacian(heatsg.Field.from_rule("gaussian", g), "spectral")
assert lap.values()[128].real < -1.99
report = heatsg.run_suite('checks = ["weights", "semigroup_law"]\n[grid]\nL = 8.0\nN = 257\n')
assert report.passed and len(report) == len(report.rows())
assert report.to_csv().startswith("check,anchor,residual,tolerance,pass")
"#,
    );
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    run_python(&format!(
        r#"
f = heatsg.Field.from_rule("wide_bumps:2", heatsg.Grid(2, 3.0, 17), components=2)
f.save({path:?})
assert heatsg.Field.load({path:?}) == f
"#
    ));
}
