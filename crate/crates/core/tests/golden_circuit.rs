//! Compiled coefficients against the arbitrary-precision reference values in
//! `tests/golden` (regenerate with `python3 tests/oracle/circuit_golden.py`).

use memsim::circuit::{CircuitParams, Compiler};
use serde_json::Value;

const REL: f64 = 1e-10;

fn golden(name: &str) -> Value {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn close(label: &str, got: f64, want: f64) {
    let scale = want.abs().max(f64::MIN_POSITIVE);
    assert!((got - want).abs() <= REL * scale, "{label}: got {got:e}, want {want:e}");
}

fn close_vec(label: &str, got: &[f64], want: &Value) {
    let want: Vec<f64> = serde_json::from_value(want.clone()).unwrap();
    assert_eq!(got.len(), want.len(), "{label}");
    for (i, (g, w)) in got.iter().zip(&want).enumerate() {
        close(&format!("{label}[{i}]"), *g, *w);
    }
}

fn close_grid<const N: usize>(label: &str, got: &[[f64; N]; N], want: &Value) {
    for i in 0..N {
        close_vec(&format!("{label}[{i}]"), &got[i], &want[i]);
    }
}

#[test]
fn single_device_dressed_record() {
    let g = golden("table1_flux0.json");
    let d = Compiler::default()
        .dressed_single(&CircuitParams::table1(), 0.0)
        .unwrap();
    let want = &g["dressed"];
    for (key, got) in [
        ("c1_t", d.c1_t),
        ("c2_t", d.c2_t),
        ("c12_t", d.c12_t),
        ("c1g_t", d.c1g_t),
        ("c2g_t", d.c2g_t),
        ("l1_t", d.l1_t),
        ("l2_t", d.l2_t),
        ("l12_t", d.l12_t),
        ("alpha_1", d.alpha_1),
        ("alpha_2", d.alpha_2),
    ] {
        close(key, got, want[key].as_f64().unwrap());
    }
}

#[test]
fn single_device_coefficient_record() {
    let g = golden("table1_flux0.json");
    let h = Compiler::default()
        .coeffs_single(&CircuitParams::table1(), 0.0, 0.0)
        .unwrap();
    close_vec("omega", &h.omega, &g["omega"]);
    close_vec("drive", &h.drive_per_gate_charge, &g["drive_per_gate_charge"]);
    close_vec("charge_zpf", &h.charge_zpf, &g["charge_zpf"]);
    let c = h.coupling(0, 1).unwrap();
    close("G12", c.capacitive, g["g12"].as_f64().unwrap());
    close("I12", c.inductive, g["i12"].as_f64().unwrap());
    let (lp, lm) = h.lambda();
    close("lambda+ = I12 + G12", lp, c.inductive + c.capacitive);
    close("lambda- = I12 - G12", lm, c.inductive - c.capacitive);
}

#[test]
fn coupled_dressed_record() {
    let g = golden("table2_flux0.json");
    let d = Compiler::default()
        .dressed_coupled(&CircuitParams::table2(), 0.0)
        .unwrap();
    close_grid("B", &d.b.entries, &g["b"]);
    close_grid("B^-1", &d.b.inverse, &g["b_inverse"]);
    close_grid("1/C_mn", &d.inv_c_mn, &g["inv_c_mn"]);
    close_grid("1/L_mn", &d.inv_l_mn, &g["inv_l_mn"]);
}

#[test]
fn coupled_coefficient_record() {
    let g = golden("table2_flux0.json");
    let h = Compiler::default()
        .coeffs_coupled(&CircuitParams::table2(), 0.0, 0.0)
        .unwrap();
    close_vec("omega", &h.omega, &g["omega"]);
    close_vec("drive", &h.drive_per_gate_charge, &g["drive_per_gate_charge"]);
    let (lp, lm) = h.lambda();
    let (bp, bm) = h.big_lambda().unwrap();
    close("lambda+", lp, g["lambda_plus"].as_f64().unwrap());
    close("lambda-", lm, g["lambda_minus"].as_f64().unwrap());
    close("Lambda+", bp, g["big_lambda_plus"].as_f64().unwrap());
    close("Lambda-", bm, g["big_lambda_minus"].as_f64().unwrap());
    for j in 1..=2 {
        for k in 1..=2 {
            let (p, m) = h.gamma(j, k).unwrap();
            close(
                &format!("gamma+{j}{k}"),
                p,
                g["gamma_plus"][j - 1][k - 1].as_f64().unwrap(),
            );
            close(
                &format!("gamma-{j}{k}"),
                m,
                g["gamma_minus"][j - 1][k - 1].as_f64().unwrap(),
            );
        }
    }
}
