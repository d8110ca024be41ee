//! End-to-end checks of the command-line surface: output shapes, exit
//! codes, and byte-stable sweep artifacts.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nodal-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn nodal-lab")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nodal-lab-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn exponents_prints_exact_rationals() {
    let out = run(&["exponents", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("exponent table, n = 2"));
    assert!(text.contains("growth_volume"));
    assert!(text.contains("1/4"));
    assert!(text.contains("1/8"));

    // all dimensions when omitted
    let out = run(&["exponents"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for n in 2..=6 {
        assert!(text.contains(&format!("n = {n}")));
    }
}

#[test]
fn exponents_out_of_range_is_input_error() {
    let out = run(&["exponents", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn modes_lists_multiplicities() {
    let out = run(&["modes", "--n", "2", "--lambda-max", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda,multiplicity");
    assert_eq!(&lines[1..], &["0,1", "1,4", "2,4", "4,4", "5,8"]);
}

#[test]
fn nodal_measures_the_product_mode() {
    let out = run(&["nodal", "--freq", "2,3", "--resolution", "256"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let measure: f64 = text
        .split("total_measure ")
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    let expect = 20.0 * std::f64::consts::PI;
    assert!((measure - expect).abs() / expect < 0.01, "measure {measure}");
}

#[test]
fn dong_strict_exit_codes() {
    let ok = run(&["dong", "--freq", "3,0", "--strict", "--tol", "0.01"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let too_tight = run(&["dong", "--freq", "3,0", "--strict", "--tol", "1e-9"]);
    assert_eq!(too_tight.status.code(), Some(2));
}

#[test]
fn field_export_has_grid_shape() {
    let dir = temp_dir("field");
    let path = dir.join("field.csv");
    let out = run(&[
        "field",
        "--freq",
        "1,0",
        "--resolution",
        "16",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 16 * 16 + 1);
    assert!(text.starts_with("x0,x1,value"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn growth_reports_packed_balls() {
    let out = run(&["growth", "--lambda", "25", "--seed", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("max_beta"));
    assert!(text.contains("balls"));
}

#[test]
fn harmonic_plane_power() {
    let out = run(&["harmonic", "--re-degree", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("Re z^3"));
    let beta: f64 = text
        .split("beta ")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let expect = 3.0 * std::f64::consts::LN_2;
    assert!((beta - expect).abs() < 0.01 * expect, "beta {beta}");
}

#[test]
fn sweep_emits_deterministic_files_and_fit_reads_them() {
    let dir = temp_dir("sweep");
    let config = serde_json::json!({
        "domain": {"kind": "torus", "n": 2},
        "lambda_list": [25, 100],
        "seeds": [1, 2, 3],
        "samples_per_wavelength": 16,
        "quantities": ["nodal_measure", "max_beta"],
    });
    let config_path = dir.join("config.json");
    std::fs::write(&config_path, serde_json::to_vec_pretty(&config).unwrap()).unwrap();

    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out_dir in [&out_a, &out_b] {
        let out = run(&[
            "sweep",
            config_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let csv_a = std::fs::read(out_a.join("sweep.csv")).unwrap();
    let csv_b = std::fs::read(out_b.join("sweep.csv")).unwrap();
    assert!(!csv_a.is_empty());
    assert_eq!(csv_a, csv_b, "sweep.csv bytes differ between runs");
    for file in ["sweep.json", "sweep.dat", "fits.csv"] {
        assert!(out_a.join(file).exists(), "{file} missing");
    }

    // the fit subcommand consumes the emitted CSV
    let out = run(&[
        "fit",
        out_a.join("sweep.csv").to_str().unwrap(),
        "--x",
        "lambda",
        "--y",
        "nodal_measure",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let slope: f64 = text
        .split("slope ")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((slope - 0.5).abs() < 0.15, "slope {slope}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_mode_flags_are_an_input_error() {
    let out = run(&["nodal"]);
    assert_eq!(out.status.code(), Some(1));
    let both = run(&["nodal", "--freq", "1,0", "--lambda", "25"]);
    assert_eq!(both.status.code(), Some(1));
}
