use std::path::{Path, PathBuf};
use std::process::Command;

use bekkshrink::io;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bekkshrink"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bekkshrink-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn small<'a>(cmd: &'a mut Command, out: &Path) -> &'a mut Command {
    cmd.args(["--p", "12", "--n", "60", "--out"]).arg(out)
}

#[test]
fn simulate_then_adjust_then_estimate() {
    let dir = scratch("chain");
    run_ok(small(&mut bin(), &dir).args(["simulate", "--csv", "--rep", "2"]));
    let bin_panel = io::read_panel_bin(&dir.join("panel.bin")).unwrap();
    assert_eq!((bin_panel.p(), bin_panel.n(), bin_panel.replication), (12, 60, 2));
    assert_eq!(
        io::read_panel_csv(&dir.join("panel.csv")).unwrap().returns,
        bin_panel.returns
    );

    let garch = run_ok(
        small(&mut bin(), &dir)
            .args(["fit-garch", "--panel"])
            .arg(dir.join("panel.bin"))
            .args(["--pool-k", "4"]),
    );
    assert!(garch.starts_with("a_hat,b_hat,"));

    run_ok(
        small(&mut bin(), &dir)
            .args(["tv-adjust", "--mp", "3", "--ab", "0.05", "0.9", "--panel"])
            .arg(dir.join("panel.csv")),
    );
    let s = io::read_sym_csv(&dir.join("s_tilde.csv")).unwrap();
    assert_eq!(s.dim(), 12);
    let meta = std::fs::read_to_string(dir.join("tv_adjust.csv")).unwrap();
    assert!(meta.lines().nth(1).unwrap().ends_with(",3,57"), "{meta}");

    run_ok(
        small(&mut bin(), &dir)
            .args(["estimate", "--obs", "57", "--cov"])
            .arg(dir.join("s_tilde.csv")),
    );
    let est = io::read_sym_csv(&dir.join("sigma_tilde.csv")).unwrap();
    assert_eq!(est.dim(), 12);
    let h = io::read_spectrum_csv(&dir.join("spectrum.csv")).unwrap();
    assert!((h.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn scenario_output_is_independent_of_workers() {
    let (a, b) = (scratch("w1"), scratch("w3"));
    let cfg = a.join("run.kv");
    std::fs::write(&cfg, "# small run\np=12\nn=60\nreplications=3\npool_k=3\n").unwrap();
    run_ok(
        bin()
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&a)
            .arg("scenario")
            .env("BEKKSHRINK_WORKERS", "1"),
    );
    run_ok(
        bin()
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&b)
            .args(["scenario", "--workers", "3"]),
    );
    for f in ["records.csv", "summary.csv"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let records = std::fs::read_to_string(a.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 4);
    assert!(records.starts_with("scenario,replication,seed,m_p,a_hat,b_hat,raw_eig_dist"));
    assert!(a.join("timings.csv").exists());
}

#[test]
fn flags_override_the_config_file() {
    let dir = scratch("override");
    let cfg = dir.join("run.kv");
    std::fs::write(&cfg, "p=12\nn=60\nreplications=2\npool_k=3\na=0.1\nb=0.5\n").unwrap();
    run_ok(bin().arg("--config").arg(&cfg).arg("--out").arg(&dir).args([
        "scenario",
        "--b",
        "0.6",
        "--use-true-ab",
        "--mp",
        "2",
    ]));
    let records = std::fs::read_to_string(dir.join("records.csv")).unwrap();
    let row: Vec<&str> = records.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "p12_n60_a0.1_b0.6");
    assert_eq!(row[3], "2");
    assert_eq!(row[5].parse::<f64>().unwrap(), 0.6);
}

#[test]
fn grid_and_esd_dump() {
    let dir = scratch("grid");
    run_ok(small(&mut bin(), &dir).args([
        "--replications",
        "2",
        "--pool-k",
        "3",
        "grid",
        "--points",
        "0.15:0.25,0.05:0.9",
    ]));
    let grid = std::fs::read_to_string(dir.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 3);
    run_ok(small(&mut bin(), &dir).args(["--pool-k", "3", "esd-dump", "--grid-size", "128"]));
    let esd = std::fs::read_to_string(dir.join("esd.csv")).unwrap();
    assert_eq!(esd.lines().count(), 13);
    assert!(io::read_spectrum_csv(&dir.join("mp_reference.csv")).is_ok());
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = scratch("bad");
    let out = bin()
        .arg("--out")
        .arg(&dir)
        .args(["scenario", "--a", "0.6", "--b", "0.5"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    std::fs::write(dir.join("junk.bin"), b"not a panel at all").unwrap();
    let out = bin()
        .arg("--out")
        .arg(&dir)
        .args(["fit-garch", "--panel"])
        .arg(dir.join("junk.bin"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = bin().args(["--set", "nonsense=1", "scenario"]).output().unwrap();
    assert!(!out.status.success());
}
