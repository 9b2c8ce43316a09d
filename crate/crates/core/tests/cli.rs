use std::path::{Path, PathBuf};
use std::process::Command;

use approx::assert_relative_eq;
use magnls::cli::*;
use magnls::Error;
use serde_json::Value;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn coarse(out: &Path) -> RunConfig {
    let mut cfg = load_config(&config_path("example.json")).unwrap();
    cfg.grid.n_rho = 65;
    cfg.grid.n_x3 = 65;
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn run_bin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_magnls")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn shipped_configs_load() {
    let cfg = load_config(&config_path("example.json")).unwrap();
    assert_eq!(cfg.p, 4.0);
    assert_eq!(cfg.scalar.alpha_inf, Some(2.0));
    assert_eq!(cfg.eps, vec![0.4, 0.2, 0.1]);
    let ex = example_config();
    assert_eq!(cfg.magnetic, ex.magnetic);
    assert_eq!(cfg.scalar, ex.scalar);
    assert_eq!(cfg.domain, ex.domain);
    assert_eq!(cfg.grid, ex.grid);
    let crit = load_config(&config_path("critical_frequency.json")).unwrap();
    assert!(crit.vortex.critical_frequency);
}

fn example_json() -> Value {
    serde_json::from_str(&std::fs::read_to_string(config_path("example.json")).unwrap()).unwrap()
}

#[test]
fn compact_bump_at_p3_without_decay_tag_is_rejected() {
    let mut v = example_json();
    v["p"] = 3.0.into();
    v["scalar"] = serde_json::json!({ "family": "compact-bump", "amplitude": 1.0, "rho0": 1.0, "x30": 0.0, "radius": 0.5 });
    let err = RunConfig::from_json(&v.to_string(), Path::new(".")).unwrap_err();
    match &err {
        Error::Hypotheses(list) => assert!(list.iter().any(|m| m.contains("(V∞)")), "{list:?}"),
        e => panic!("unexpected {e}"),
    }
    assert_eq!(exit_code(&err), 2);
}

#[test]
fn mu_out_of_range_is_rejected() {
    let mut v = example_json();
    v["penalization"]["mu"] = 1.2.into();
    let err = RunConfig::from_json(&v.to_string(), Path::new(".")).unwrap_err();
    assert!(matches!(&err, Error::Hypotheses(l) if l.iter().any(|m| m.contains("mu"))));
}

#[test]
fn several_violations_are_listed_together() {
    let mut v = example_json();
    v["penalization"]["kappa"] = 0.3.into();
    v["domain"]["rho_lo"] = 0.0.into();
    v["eps"] = serde_json::json!([]);
    match RunConfig::from_json(&v.to_string(), Path::new(".")).unwrap_err() {
        Error::Hypotheses(list) => assert!(list.len() >= 3, "{list:?}"),
        e => panic!("unexpected {e}"),
    }
    assert!(RunConfig::from_json("{ not json", Path::new(".")).is_err());
    let mut extra = example_json();
    extra["unknown_field"] = 1.into();
    assert!(RunConfig::from_json(&extra.to_string(), Path::new(".")).is_err());
}

#[test]
fn map_reports_the_concentration_radius() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = coarse(dir.path());
    let out = dispatch(Subcommand::Map, &cfg).unwrap();
    assert_eq!(out.exit_code, 0);
    let rep = read_json(&dir.path().join("minimizer.json"));
    let rho = rep["result"]["rho_star"].as_f64().unwrap();
    assert!((rho - 2f64.sqrt() / 3f64.powf(0.25)).abs() < 1e-6);
    assert_eq!(rep["tool"], "magnls");
    assert_eq!(rep["config_sha256"], cfg.hash());
    assert_eq!(rep["subcommand"], "map");
    assert_eq!(rep["result"]["near_degenerate"], false);
    let csv = std::fs::read_to_string(dir.path().join("m_landscape.csv")).unwrap();
    assert_eq!(csv.lines().count(), 65 * 65 + 1);
}

#[test]
fn limit_reports_unit_energy() {
    let dir = tempfile::tempdir().unwrap();
    dispatch(Subcommand::Limit, &coarse(dir.path())).unwrap();
    let rep = read_json(&dir.path().join("limit.json"));
    assert_relative_eq!(rep["result"]["energy"].as_f64().unwrap(), 5.850448262, max_relative = 1e-8);
}

#[test]
fn sweep_emits_three_records_reproducibly() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut ca = coarse(a.path());
    ca.eps = parse_eps_list("0.4,0.2,0.1").unwrap();
    let mut cb = ca.clone();
    cb.output_dir = b.path().to_path_buf();
    dispatch(Subcommand::Sweep, &ca).unwrap();
    dispatch(Subcommand::Sweep, &cb).unwrap();
    let ja = std::fs::read(a.path().join("sweep_report.json")).unwrap();
    let jb = std::fs::read(b.path().join("sweep_report.json")).unwrap();
    assert_eq!(ja, jb);
    let rep: Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(rep["result"]["records"].as_array().unwrap().len(), 3);
    assert_eq!(rep["config_sha256"], ca.hash());
    for e in ["0.4", "0.2", "0.1"] {
        assert!(a.path().join(format!("slice_eps{e}.csv")).exists());
        let svg = std::fs::read_to_string(a.path().join(format!("heatmap_eps{e}.svg"))).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn solve_and_vortex_write_fields() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = coarse(dir.path());
    cfg.eps = vec![0.3];
    cfg.vortex.theta_samples = 16;
    let out = dispatch(Subcommand::Solve, &cfg).unwrap();
    assert_eq!(out.exit_code, 0);
    let (hdr, u) = magnls::reduced::io::read_field::<f64>(&dir.path().join("field_eps0.3.bin")).unwrap();
    assert_eq!(hdr.eps, 0.3);
    assert_eq!(u.data.len(), 65 * 65);
    let out = dispatch(Subcommand::Vortex, &cfg).unwrap();
    assert_eq!(out.exit_code, 0);
    let rep = read_json(&dir.path().join("vortex_k1_eps0.3.json"));
    assert_eq!(rep["result"]["k"], 1);
    let csv = std::fs::read_to_string(dir.path().join("theta_residual_k1_eps0.3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn parse_eps_list_rejects_garbage() {
    assert_eq!(parse_eps_list(" 0.4, 0.2 ").unwrap(), vec![0.4, 0.2]);
    assert!(parse_eps_list("0.4,abc").is_err());
    assert!(parse_eps_list("0.4,-1").is_err());
    assert!(parse_eps_list("").is_err());
}

#[test]
fn subcommand_names_round_trip() {
    for s in ["limit", "map", "solve", "sweep", "vortex", "verify"] {
        assert_eq!(s.parse::<Subcommand>().unwrap().to_string(), s);
    }
    assert!("plot".parse::<Subcommand>().is_err());
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = config_path("example.json");
    let cfg = cfg.to_str().unwrap();

    let (code, stdout, _) = run_bin(&["verify", "--config", cfg, "--out", out]);
    assert_eq!(code, 0);
    assert!(stdout.contains("verify.json"));
    let rep = read_json(&dir.path().join("verify.json"));
    assert_eq!(rep["result"]["passed"], true);
    assert_eq!(rep["seed"], 24301);

    let mut bad = example_json();
    bad["penalization"]["mu"] = 1.2.into();
    let bad_path = dir.path().join("bad.json");
    std::fs::write(&bad_path, bad.to_string()).unwrap();
    let (code, _, stderr) = run_bin(&["map", "--config", bad_path.to_str().unwrap(), "--out", out]);
    assert_eq!(code, 2);
    assert!(stderr.contains("mu"));

    let (code, _, _) = run_bin(&["solve", "--config", cfg, "--out", out, "--eps", "0,1"]);
    assert_eq!(code, 2);
    let (code, _, _) = run_bin(&["explode"]);
    assert_ne!(code, 0);
}
