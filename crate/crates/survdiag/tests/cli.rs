//! End-to-end checks of the command-line binary: exit codes, output
//! artifacts, and determinism under an explicit seed.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use survdiag::residuals::ResidualSet;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_survdiag"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_toy_csv(path: &Path) {
    // Deterministic toy dataset: 60 subjects, one covariate, ~25% censored.
    let mut f = fs::File::create(path).unwrap();
    writeln!(f, "time,status,x").unwrap();
    let mut state = 0x2545_F491_4F6C_DD1D_u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for i in 0..60 {
        let x = f64::from(i % 3) - 1.0;
        let t = (1.5 + 0.5 * x) * (-next().ln()).powf(0.8);
        let status = u8::from(next() > 0.25);
        writeln!(f, "{t:.6},{status},{x:.1}").unwrap();
    }
}

#[test]
fn fit_residuals_gof_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    write_toy_csv(&csv);
    let csv = csv.to_str().unwrap();

    let fit_dir = dir.path().join("fit");
    let out = run(&[
        "fit",
        "--data",
        csv,
        "--covariates",
        "x",
        "--model",
        "weibull",
        "--out",
        fit_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let fit_json = fit_dir.join("fit.json");
    assert!(fit_json.exists());
    assert!(fit_dir.join("manifest.json").exists());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&fit_json).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["model"]["model_type"], "aft");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fit_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert!(manifest["input_digests"].as_object().unwrap().len() >= 1);

    // Residuals under a fixed seed are byte-identical across runs.
    let mut outputs = Vec::new();
    for name in ["r1", "r2"] {
        let rdir = dir.path().join(name);
        let out = run(&[
            "residuals",
            "--fit",
            fit_json.to_str().unwrap(),
            "--data",
            csv,
            "--covariates",
            "x",
            "--kind",
            "nrsp",
            "--seed",
            "7",
            "--out",
            rdir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(fs::read(rdir.join("residuals.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    // The emitted CSV round-trips through the library parser.
    let set = ResidualSet::read_csv(&outputs[0][..]).unwrap();
    assert_eq!(set.values.len(), 60);
    assert_eq!(set.seed, Some(7));

    let gof_dir = dir.path().join("gof");
    let out = run(&[
        "gof",
        "--residuals",
        dir.path().join("r1/residuals.csv").to_str().unwrap(),
        "--test",
        "sw",
        "--out",
        gof_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let gof: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(gof_dir.join("gof.json")).unwrap()).unwrap();
    let p = gof["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
}

#[test]
fn missing_column_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    write_toy_csv(&csv);
    let out = run(&[
        "fit",
        "--data",
        csv.to_str().unwrap(),
        "--time",
        "nosuch",
        "--covariates",
        "x",
        "--model",
        "weibull",
        "--out",
        dir.path().join("fit").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nosuch"));
}

#[test]
fn km_requires_exactly_one_input_mode() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    write_toy_csv(&csv);
    let out = run(&["km", "--out", dir.path().join("km").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&[
        "km",
        "--data",
        csv.to_str().unwrap(),
        "--out",
        dir.path().join("km").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("km/km.csv").exists());
}
