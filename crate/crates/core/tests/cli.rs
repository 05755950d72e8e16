use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cone_data::config::RunConfig;

const BIN: &str = env!("CARGO_BIN_EXE_cone-data");
const SMALL: &str = "[grid]\nn = 20\n";

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("cone-data-cli-{}-{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(dir: &Path, toml: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, toml).unwrap();
    Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(["--threads", "1"])
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn config_errors_exit_with_two() {
    let d = scratch("config");
    assert_eq!(run(&d, "[seed]\ns = 3.5\n", &["seed"]).status.code(), Some(2));
    assert_eq!(run(&d, "[grid]\nspacing = 0.1\n", &["seed"]).status.code(), Some(2));
    assert_eq!(run(&d, "[seed]\neps0 = 0.5\n", &["seed"]).status.code(), Some(2));
    assert_eq!(run(&d, "[quad]\ntail_tol = 2.0\n", &["kernels", "verify"]).status.code(), Some(2));
}

#[test]
fn kernel_fault_exits_with_three() {
    let d = scratch("kernels");
    let ok = run(&d, SMALL, &["kernels", "verify"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).lines().all(|l| l.starts_with("PASS")), "{}", stdout(&ok));
    let bad = run(&d, "[quad]\nkernel_mass = 2.0\n", &["kernels", "verify"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(stdout(&bad).contains("FAIL"));
}

#[test]
fn solver_failures() {
    let d = scratch("solve");
    let o = run(&d, "[grid]\nn = 20\n[solver]\nball_radius = 1e-30\n", &["solve"]);
    assert_eq!(o.status.code(), Some(4));
    // an unfinished iteration still succeeds, and says so
    let o = run(&d, "[grid]\nn = 20\n[solver]\nmax_iter = 1\n", &["solve"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("not converged after 1 iterations"));
    let iters = fs::read_to_string(d.join("out/iterations.csv")).unwrap();
    assert_eq!(iters.lines().count(), 2);
}

#[test]
fn zero_amplitude_dumps_are_zero() {
    let d = scratch("zero");
    let o = run(&d, "[seed]\neps0 = 0.0\n[grid]\nn = 12\n", &["seed"]);
    assert_eq!(o.status.code(), Some(0));
    for name in ["h0.cidf", "pi0.cidf"] {
        let bytes = fs::read(d.join("out").join(name)).unwrap();
        let body = bytes.iter().position(|&b| b == b'\n').unwrap() + 1;
        assert_eq!(bytes.len() - body, 12 * 12 * 12 * 6 * 8);
        assert!(bytes[body..].iter().all(|&b| b == 0), "{name}");
    }
}

#[test]
fn solve_outputs_are_deterministic_and_reloadable() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    for d in [&a, &b] {
        let o = run(d, SMALL, &["solve"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("converged after"));
    }
    for name in ["h.cidf", "pi.cidf", "g.cidf", "k.cidf", "h1.cidf", "pi1.cidf", "iterations.csv", "residual.csv", "residual_seed.csv"] {
        let (x, y) = (fs::read(a.join("out").join(name)).unwrap(), fs::read(b.join("out").join(name)).unwrap());
        assert!(x == y, "{name} differs between runs");
    }
    let head = fs::read(a.join("out/g.cidf")).unwrap();
    let line = String::from_utf8_lossy(&head[..head.iter().position(|&c| c == b'\n').unwrap()]).into_owned();
    assert!(line.starts_with("CIDF1 symtensor 20 "), "{line}");
    assert_eq!(fs::read_to_string(a.join("out/residual.csv")).unwrap().lines().next(), Some("norm_H,norm_M,grid_n"));

    // the dumps feed the constraints subcommand
    let o = run(&a, SMALL, &["constraints"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("norm_H "));

    // the effective config reproduces the run
    let eff = fs::read_to_string(a.join("out/effective-config.toml")).unwrap();
    let cfg = RunConfig::from_toml(&eff).unwrap();
    assert_eq!(cfg, RunConfig::from_toml(SMALL).unwrap());
    let c = scratch("det-c");
    assert_eq!(run(&c, &eff, &["solve"]).status.code(), Some(0));
    assert_eq!(fs::read(c.join("out/h1.cidf")).unwrap(), fs::read(a.join("out/h1.cidf")).unwrap());
}

#[test]
fn seed_and_diagnostics_write_their_tables() {
    let d = scratch("tables");
    assert_eq!(run(&d, SMALL, &["seed"]).status.code(), Some(0));
    let csv = fs::read_to_string(d.join("out/decay_seed.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("r,|h0|,|dh0|,|pi0|,L(r)"));
    assert!(csv.lines().count() > 10);
    let o = run(&d, SMALL, &["diagnose", "sharpness"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("strictly decreasing"));
}

#[test]
fn missing_dumps_are_not_config_errors() {
    let d = scratch("missing");
    let o = run(&d, SMALL, &["constraints", "--g", "/nonexistent/g.cidf"]);
    assert_eq!(o.status.code(), Some(1));
}
