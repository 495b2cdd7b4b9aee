use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn singreg(args: &[&str], config: &str, dir: &Path, env: &[(&str, &str)]) -> (Output, PathBuf) {
    let cfg = dir.join("run.ini");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_singreg"));
    cmd.args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env_remove("SINGREG_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    (cmd.output().unwrap(), out)
}

fn verdict(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("verdict.json")).unwrap()).unwrap()
}

fn check(v: &Value, name: &str) -> Value {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .cloned()
        .unwrap_or_else(|| panic!("no check '{name}' in {v}"))
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn frac_bounds_positive_order_is_bounded() {
    let dir = TempDir::new().unwrap();
    let (o, out) = singreg(&["frac-bounds"], "", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("frac_bounds.csv"));
    assert_eq!(rows[0], ["eps", "alpha", "l1_norm", "fitted_model", "exponent"]);
    assert_eq!(rows.len(), 12);
    assert!(rows[1..].iter().all(|r| r[3] == "bounded"));
    assert_eq!(check(&verdict(&out), "alpha=0.5 bounded")["pass"], true);
}

#[test]
fn frac_bounds_order_minus_one_grows_like_log() {
    let dir = TempDir::new().unwrap();
    let (o, out) = singreg(&["frac-bounds"], "[frac]\nalphas = -1\n", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&out.join("frac_bounds.csv"));
    assert_eq!(rows[1][3], "log-power");
    let k: f64 = rows[1][4].parse().unwrap();
    assert!((k - 1.0).abs() <= 0.15, "{k}");
}

#[test]
fn empty_schedule_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let (o, _) = singreg(&["frac-bounds"], "[schedule]\neps =\n", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schedule"));
}

#[test]
fn under_resolved_grid_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let (o, _) = singreg(&["evolution"], "[evolution]\npoints = 256\n", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("under-resolved"));
}

#[test]
fn unknown_key_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let (o, _) = singreg(&["volterra"], "[volterra]\nalfa = 1\n", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key 'alfa'"));
}

#[test]
fn missing_config_flag_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_singreg")).arg("volterra").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn volterra_zero_kernel_returns_free_term() {
    let dir = TempDir::new().unwrap();
    let (o, out) = singreg(&["volterra"], "[volterra]\nkernel = zero\nfree_term = 2.5\n", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let rows = csv_rows(&out.join("volterra_solution.csv"));
    assert_eq!(rows[0], ["x", "f"]);
    assert_eq!(rows.len(), 1002);
    assert!(rows[1..].iter().all(|r| r[1].parse::<f64>().unwrap() == 2.5));
}

#[test]
fn volterra_exponential_case_meets_oracle() {
    let dir = TempDir::new().unwrap();
    let cfg = "[volterra]\nalpha = 1\neps = 0\noracle = mittag-leffler\n";
    let (o, out) = singreg(&["volterra"], cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&out.join("volterra_solution.csv"));
    assert_eq!(rows[0], ["x", "f", "oracle", "error"]);
    let worst = rows[1..].iter().map(|r| r[3].parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!(worst <= 1e-4, "{worst}");
    // oracle column is e^x
    let last = rows.last().unwrap();
    assert!((last[2].parse::<f64>().unwrap() - 1f64.exp()).abs() < 1e-12);
}

const VIOLATED: &str = "\
[volterra]
alpha = 1
kernel = nonlinear
coefficient = 2
nonlinearity = signed-square
cutoff = 1.2
eps = 1e-4
";

#[test]
fn volterra_guard_violation_exits_two() {
    let dir = TempDir::new().unwrap();
    let (o, out) = singreg(&["volterra"], VIOLATED, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let c = check(&verdict(&out), "guard");
    assert_eq!(c["pass"], false);
    assert!(c["detail"].as_str().unwrap().contains("requires b < 1"));
}

#[test]
fn volterra_override_records_envelope_failure() {
    let dir = TempDir::new().unwrap();
    let (o, out) = singreg(&["volterra", "--override-guards"], VIOLATED, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let v = verdict(&out);
    assert_eq!(check(&v, "solve")["pass"], true);
    let env = check(&v, "moderateness envelope");
    assert_eq!(env["pass"], false);
    assert!(env["measured"].as_f64().unwrap() > 1.0);
}

#[test]
fn seed_variable_reaches_the_lipschitz_probe() {
    let dir = TempDir::new().unwrap();
    let cfg = "[volterra]\nkernel = nonlinear\nstep = 1e-2\n";
    let (o, out) = singreg(&["volterra"], cfg, dir.path(), &[("SINGREG_SEED", "7")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let c = check(&verdict(&out), "lipschitz bound");
    assert!(c["detail"].as_str().unwrap().ends_with("seed 7"));
    assert_eq!(c["pass"], true);
}

#[test]
fn free_schrodinger_run_is_unitary() {
    let dir = TempDir::new().unwrap();
    let (o, out) = singreg(&["schrodinger"], "", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let c = check(&verdict(&out), "unitarity");
    assert!(c["measured"].as_f64().unwrap() <= 1e-8);
    let rows = csv_rows(&out.join("schrodinger.csv"));
    assert_eq!(rows[0], ["eps", "t", "norm_kind", "value"]);
}

#[test]
fn heat_run_conserves_mass_and_recovers_delta_exponent() {
    let dir = TempDir::new().unwrap();
    let cfg = "[evolution]\npoints = 1024\nhorizon = 0.05\n[schedule]\neps = 1e-2, 1e-3, 1e-4, 1e-5, 1e-6\n";
    let (o, out) = singreg(&["evolution"], cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let v = verdict(&out);
    assert!(check(&v, "mass conservation")["measured"].as_f64().unwrap() <= 1e-8);
    let k = check(&v, "scale exponent")["measured"].as_f64().unwrap();
    assert!((k - 1.0).abs() <= 0.15, "{k}");
}

#[test]
fn identical_config_gives_identical_csv() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = "[volterra]\nstep = 1e-2\nprobe = identical\n";
    let (_, oa) = singreg(&["volterra"], cfg, a.path(), &[]);
    let (_, ob) = singreg(&["volterra", "--threads", "2"], cfg, b.path(), &[]);
    for f in ["volterra_solution.csv", "volterra_sweep.csv", "volterra_probe.csv"] {
        assert_eq!(fs::read(oa.join(f)).unwrap(), fs::read(ob.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn recorded_config_reproduces_the_run() {
    let a = TempDir::new().unwrap();
    let (_, oa) = singreg(&["frac-bounds"], "[frac]\nalphas = 0.25, -0.5\n", a.path(), &[]);
    let recorded = fs::read_to_string(oa.join("config.ini")).unwrap();
    let b = TempDir::new().unwrap();
    let (o, ob) = singreg(&["frac-bounds"], &recorded, b.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(ob.join("config.ini")).unwrap(), recorded);
    assert_eq!(
        fs::read(oa.join("frac_bounds.csv")).unwrap(),
        fs::read(ob.join("frac_bounds.csv")).unwrap()
    );
}

#[test]
fn all_runs_every_experiment() {
    let dir = TempDir::new().unwrap();
    let cfg = "\
[schedule]
eps = 1e-2, 1e-3, 1e-4, 1e-5, 1e-6
[volterra]
step = 1e-2
[evolution]
points = 1024
horizon = 0.02
[schrodinger]
points = 256
horizon = 0.1
";
    let (o, out) = singreg(&["all"], cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    for sub in ["frac-bounds", "volterra", "evolution", "schrodinger", "sweep"] {
        assert!(out.join(sub).join("verdict.json").exists(), "{sub}");
    }
    let names: Vec<String> = verdict(&out)["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    let unique: std::collections::BTreeSet<_> = names.iter().collect();
    assert_eq!(unique.len(), names.len());
    assert!(names.contains(&"schrodinger/unitarity".to_string()));
}
