use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_qswitch");

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(BIN)
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn last_row(csv: &Path) -> (Vec<String>, Vec<f64>) {
    let text = fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let last = lines.last().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    (header, last)
}

const FIG2: &str = "experiment = spectrum\ng_s = 5\ng_q = 20\ndelta_q = 2\nkappa_wq = 5\nspectrum_grid = linspace(-10, 60, 701)\n";

#[test]
fn parse_error_names_the_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.conf", "g_q = 20\ng_s = five\n");
    let o = run("spectrum", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unit_conflict_and_unknown_keys_are_validation_errors() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(&dir, "units.conf", &format!("{FIG2}kappa_sq = 2\n"));
    let o = run("spectrum", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unit conflict"), "{}", stderr(&o));

    let cfg = write_config(&dir, "typo.conf", &format!("{FIG2}gq = 20\n"));
    let o = run("spectrum", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown key `gq`"), "{}", stderr(&o));
}

#[test]
fn subcommand_must_agree_with_experiment_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "fig2.conf", FIG2);
    let o = run("evolve", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("conflicts"), "{}", stderr(&o));
}

#[test]
fn spectrum_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "fig2.conf", FIG2);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run("run", &cfg, &a, &[]).status.success());
    assert!(run("spectrum", &cfg, &b, &[]).status.success());
    for f in ["spectrum.csv", "spectrum.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(a.join("spectrum.csv")).unwrap();
    assert!(!csv.contains('\r'));
    assert!(csv.starts_with("detuning_q,lambda_1,lambda_2,lambda_3,lambda_4,w1_photon_s"));
    assert_eq!(csv.lines().count(), 702);
    let meta = read_json(&a.join("run_meta.json"));
    assert_eq!(meta["experiment"], "spectrum");
    assert!(meta["started_unix"].as_u64().is_some());

    let summary = read_json(&a.join("spectrum.json"));
    let res = summary["res_detuning"].as_f64().unwrap();
    assert!((res - 52.142857142857146).abs() < 1e-9);
    // The first branch pair anticrosses next to the closed-form resonance.
    let gap_at = summary["min_gaps"][0]["position"].as_f64().unwrap();
    assert!((gap_at - res).abs() < 0.5, "{gap_at}");
}

#[test]
fn scan_output_does_not_depend_on_worker_count() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "map.conf",
        "experiment = scan\ng_s = 5\ng_q = 20\nkappa_wq = 5\nscan_kind = leakage\n\
         scan_detuning_q = linspace(-20, 60, 9)\nscan_delta_q = 0, 2\nscan_t_max = 100\n",
    );
    let (a, b) = (dir.path().join("one"), dir.path().join("four"));
    assert!(run("scan", &cfg, &a, &["--workers", "1"]).status.success());
    assert!(run("scan", &cfg, &b, &["--workers", "4"]).status.success());
    assert_eq!(fs::read(a.join("scan.csv")).unwrap(), fs::read(b.join("scan.csv")).unwrap());
    assert_eq!(fs::read(a.join("scan.json")).unwrap(), fs::read(b.join("scan.json")).unwrap());
    let text = fs::read_to_string(a.join("scan.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 18);
}

#[test]
fn lossless_evolve_satisfies_the_ledger() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "evolve.conf",
        "experiment = evolve\ng_s = 5\ng_q = 20\ndelta_q = 2\nkappa_wq = 5\n\
         sweep_knob = detuning_q\nsweep_from = -5\nsweep_to = 52.142857142857146\nsweep_T = 10\n\
         t_end = 60\nsample_interval = 0.5\n",
    );
    let out = dir.path().join("out");
    let o = run("evolve", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, last) = last_row(&out.join("evolve.csv"));
    let col = |name: &str| last[header.iter().position(|h| h == name).unwrap()];
    let total = col("norm_sqr") + col("emitted") + col("dissipated") - col("injected");
    assert!((total - 1.0).abs() < 1e-6, "{total}");
    assert!(col("emitted") > 0.9);
    let summary = read_json(&out.join("evolve.json"));
    assert!(summary["ledger_error"].as_f64().unwrap() < 1e-6);
}

#[test]
fn driven_evolve_from_vacuum_balances_injection() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "drive.conf",
        "experiment = evolve\ng_s = 5\ng_q = 20\ndelta_q = 2\nkappa_wq = 5\ngamma_q = 0.1\n\
         initial = vacuum\ndrive = gaussian\ndrive_center = 10\ndrive_width = 2\nt_end = 30\n\
         integrator = adaptive\n",
    );
    let out = dir.path().join("out");
    let o = run("evolve", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, last) = last_row(&out.join("evolve.csv"));
    let col = |name: &str| last[header.iter().position(|h| h == name).unwrap()];
    assert!((col("injected") - 1.0).abs() < 1e-3);
    let total = col("norm_sqr") + col("emitted") + col("dissipated") - col("injected");
    assert!(total.abs() < 1e-6, "{total}");
}

#[test]
fn shape_reports_metrics() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "shape.conf",
        "experiment = shape\ng_s = 5\ng_q = 20\ndelta_q = 2\nkappa_wq = 5\nsweep_T = 40\nsweep_endpoint = midpoint\n",
    );
    let out = dir.path().join("out");
    let o = run("shape", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&out.join("shape.json"));
    assert!(v["p_out"].as_f64().unwrap() > 0.99);
    assert!((v["xi"].as_f64().unwrap() - 0.033).abs() < 0.015);
    assert!((v["gaussian"]["area"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["A"].as_f64().unwrap() < 0.05);
    assert!(out.join("sweep.csv").exists() && out.join("output.csv").exists());
}

#[test]
fn numerical_failure_exits_three() {
    let dir = TempDir::new().unwrap();
    // Cut off long before anything is emitted: there is no pulse to fit.
    let cfg = write_config(
        &dir,
        "short.conf",
        "experiment = shape\ng_s = 5\ng_q = 20\ndelta_q = 2\nkappa_wq = 5\nsweep_T = 40\nt_end = 0.1\n",
    );
    let o = run("shape", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn physical_units_match_dimensionless_run() {
    let dir = TempDir::new().unwrap();
    let plain = write_config(&dir, "plain.conf", FIG2);
    let hz = write_config(
        &dir,
        "hz.conf",
        "experiment = spectrum\nphysical_units.kappa_sq_hz = 1e9\nkappa_sq = 1e9\ng_s = 5e9\ng_q = 2e10\n\
         delta_q = 2e9\nkappa_wq = 5e9\nspectrum_grid = linspace(-1e10, 6e10, 701)\n",
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run("spectrum", &plain, &a, &[]).status.success());
    let o = run("spectrum", &hz, &b, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (x, y) = (read_json(&a.join("spectrum.json")), read_json(&b.join("spectrum.json")));
    let (ra, rb) = (x["res_detuning"].as_f64().unwrap(), y["res_detuning"].as_f64().unwrap());
    assert!((ra - rb).abs() < 1e-9);
}

#[test]
fn every_preset_runs_within_a_minute() {
    let dir = TempDir::new().unwrap();
    let mut presets: Vec<PathBuf> = fs::read_dir(repo_root().join("configs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "conf"))
        .collect();
    presets.sort();
    assert!(presets.len() >= 10);
    for p in presets {
        let name = p.file_stem().unwrap().to_string_lossy().into_owned();
        let clock = Instant::now();
        let o = run("run", &p, &dir.path().join(&name), &["--workers", "2"]);
        let secs = clock.elapsed().as_secs_f64();
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        assert!(secs < 60.0, "{name} took {secs:.1} s");
    }
}
