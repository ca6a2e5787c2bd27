use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use definetti_cli::profile::ProfileFile;
use definetti_core::weight_basis::CoherentPowerState;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_definetti"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const EVEN_CAT: &str = r#"{"components":[{"gamma":[1.0,0.0],"weight":[1.0,0.0]},
  {"gamma":[-1.0,0.0],"weight":[1.0,0.0]}],"n":16,"k":1}"#;

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn identity_check_default_settings_pass() {
    let out = run(&[
        "identity-check",
        "--n",
        "3",
        "--k",
        "1",
        "--d",
        "12",
        "--random-alphas",
        "2",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["coherent"].as_array().unwrap().len(), 3);
    for r in v["commutator"].as_array().unwrap() {
        assert!(r["residual"].as_f64().unwrap() <= r["coarse_residual"].as_f64().unwrap() + 1e-12);
    }
}

#[test]
fn identity_check_trivial_case() {
    let out = run(&[
        "identity-check",
        "--n",
        "2",
        "--k",
        "0",
        "--d",
        "6",
        "--alpha",
        "0,0",
        "--random-alphas",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["commutator"][0]["residual"].as_f64().unwrap(), 0.0);
    assert!(v["vacuum_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn identity_check_budget() {
    let out = run(&["identity-check", "--n", "8", "--d", "16"]);
    assert_eq!(out.status.code(), Some(2));
    let small = bin()
        .args(["identity-check", "--n", "3", "--d", "12"])
        .env("DEFINETTI_BUDGET", "1000")
        .output()
        .unwrap();
    assert_eq!(small.status.code(), Some(2));
}

#[test]
fn identity_check_fails_on_tight_tolerance() {
    let out = run(&[
        "identity-check",
        "--d",
        "8",
        "--grid-step",
        "1.0",
        "--grid-radius",
        "3",
        "--tolerance",
        "1e-15",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn approx_even_cat() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "cat.json", EVEN_CAT);
    let out = run(&["approx", "--profile", p.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert!(v["delta_full"].as_f64().unwrap() <= 3.0 / 16.0);
    assert_eq!(v["n"], 16);
}

#[test]
fn approx_product_mass() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "prod.json",
        r#"{"components":[{"gamma":[0.5,0.0],"weight":[1.0,0.0]}],"n":8,"k":1}"#,
    );
    let out = run(&["approx", "--profile", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mass = json(&out)["total_mass"].as_f64().unwrap();
    assert!((mass - 7.0 / 8.0).abs() < 1e-6);
}

#[test]
fn approx_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad_k = write(
        dir.path(),
        "k.json",
        r#"{"components":[{"gamma":[0.5,0.0],"weight":[1.0,0.0]}],"n":4,"k":4}"#,
    );
    let out = run(&["approx", "--profile", bad_k.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k < n"));

    let garbage = write(dir.path(), "g.json", "{not json");
    assert_eq!(
        run(&["approx", "--profile", garbage.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        run(&["approx", "--profile", "/nonexistent/profile.json"])
            .status
            .code(),
        Some(3)
    );
    // cutoff too small for the declared tail
    let cat = write(dir.path(), "cat.json", EVEN_CAT);
    assert_eq!(
        run(&["approx", "--profile", cat.to_str().unwrap(), "--w-max", "3"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(run(&["approx", "--bogus-flag"]).status.code(), Some(3));
}

#[test]
fn approx_json_is_deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "cat.json", EVEN_CAT);
    let a = run(&[
        "approx",
        "--profile",
        p.to_str().unwrap(),
        "--n",
        "8",
        "--workers",
        "1",
    ]);
    let b = run(&[
        "approx",
        "--profile",
        p.to_str().unwrap(),
        "--n",
        "8",
        "--workers",
        "3",
    ]);
    let c = run(&[
        "approx",
        "--profile",
        p.to_str().unwrap(),
        "--n",
        "8",
        "--workers",
        "1",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn sweep_csv_layout_and_slope() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "cat.json", EVEN_CAT);
    let csv_path = dir.path().join("out.csv");
    let out = run(&[
        "sweep",
        "--profile",
        p.to_str().unwrap(),
        "--n-list",
        "4,8,16",
        "--k-list",
        "1,2",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,k,w_max,nodes,delta_full,delta_half,zeta,eta,theta,bound_paper,bound_conservative,mass_error,quad_error"
    );
    let data: Vec<&str> = text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .collect();
    assert_eq!(data.len(), 6);
    assert!(data[0].starts_with("4,1,"));
    assert!(data[5].starts_with("16,2,"));
    assert!(text.contains("# slope k=1 points=3"));
    assert!(text.contains("# monotone_in_k n=16"));
}

#[test]
fn sweep_rejects_empty_lists() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "cat.json", EVEN_CAT);
    assert_eq!(
        run(&["sweep", "--profile", p.to_str().unwrap(), "--n-list", ""])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        run(&["sweep", "--profile", p.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        run(&[
            "sweep",
            "--profile",
            p.to_str().unwrap(),
            "--n-list",
            "4,2",
            "--k-list",
            "2"
        ])
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn sweep_json_matches_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "cat.json", EVEN_CAT);
    let args = |w: &'static str| {
        run(&[
            "sweep",
            "--profile",
            p.to_str().unwrap(),
            "--n-list",
            "4,8",
            "--format",
            "json",
            "--workers",
            w,
        ])
    };
    let (a, b) = (args("1"), args("2"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn gaussian_profile_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let out = run(&[
        "gaussian-profile",
        "--center1",
        "1,0",
        "--center2",
        "-1,0",
        "--sigma",
        "0.1",
        "--samples",
        "9",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let file = ProfileFile::load(&path).unwrap();
    assert_eq!(file.components.len(), 18);
    assert_eq!((file.n, file.k), (16, 1));
    let psi = CoherentPowerState::from_profile_auto(&file.profile().unwrap(), 16).unwrap();
    assert!((psi.norm_sqr() - 1.0).abs() <= 1e-9);

    let rep = run(&["approx", "--profile", path.to_str().unwrap()]);
    assert_eq!(
        rep.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&rep.stderr)
    );
    assert!(json(&rep)["conservative_bound_holds"].as_bool().unwrap());
}

#[test]
fn gaussian_profile_single_sample_is_cat() {
    let out = run(&[
        "gaussian-profile",
        "--center1",
        "1,0",
        "--center2",
        "-1,0",
        "--sigma",
        "1e-6",
        "--samples",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let file = ProfileFile::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(file.components.len(), 2);
    assert_eq!(file.components[0].gamma, [1.0, 0.0]);
    assert_eq!(file.components[1].gamma, [-1.0, 0.0]);
}

#[test]
fn gaussian_profile_input_errors() {
    for args in [
        ["--sigma", "0", "--samples", "3"],
        ["--sigma", "0.1", "--samples", "0"],
        ["--sigma", "-1", "--samples", "3"],
    ] {
        let mut full = vec!["gaussian-profile", "--center1", "1,0", "--center2", "-1,0"];
        full.extend(args);
        assert_eq!(run(&full).status.code(), Some(3));
    }
    assert_eq!(
        run(&[
            "gaussian-profile",
            "--center1",
            "x",
            "--center2",
            "0",
            "--sigma",
            "1",
            "--samples",
            "1"
        ])
        .status
        .code(),
        Some(3)
    );
}
