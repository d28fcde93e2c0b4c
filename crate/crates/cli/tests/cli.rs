//! End-to-end runs of the binary.

use std::path::Path;
use std::process::{Command, Output};

use onebit_sense::analytic::onebit_variances;
use onebit_sense_cli::csvio::{read_curves, ANALYTIC_HEADER, SIMULATED_HEADER};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onebit-sense")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analytic_exact_default_grid() {
    let out = bin(&["analytic", "--model", "exact", "--snr-db", "0", "--avg", "8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), ANALYTIC_HEADER.join(","));
    assert_eq!(lines.count(), 50);
    assert!(!text.contains('\r'));
}

#[test]
fn analytic_onebit_appends_variances() {
    let out = bin(&["analytic", "--model", "onebit", "--alpha", "0.3678794"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "model,N,M,L,snr_db,lambda,pfa,pd,var_h0,var_h1");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let v = onebit_variances(1.0, 100, 1024, 0.3678794).unwrap();
    let h0: f64 = row[8].parse().unwrap();
    let h1: f64 = row[9].parse().unwrap();
    assert!((h0 - v.var_h0()).abs() < 1e-11);
    assert!((h1 - v.var_h1()).abs() < 1e-11);
}

#[test]
fn several_models_and_snrs() {
    let out = bin(&["analytic", "--model", "exact,normal", "--snr-db", "-3,0,3", "--pfa-grid", "0.01:0.5:7"]);
    assert!(out.status.success());
    let curves = read_curves(out.stdout.as_slice()).unwrap();
    assert_eq!(curves.curves.len(), 6);
    assert!(curves.curves.iter().all(|(_, pts)| pts.len() == 7));
    assert_eq!(curves.curves[0].0.snr_db, "-3");
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["analytic", "--model", "bogus"][..],
        &["simulate", "--trials", "0"],
        &["analytic", "--m", "2048"],
        &["analytic", "--pfa-grid", "0.5:0.1:3"],
        &["simulate", "--quantizer", "two-bit"],
        &["preset", "fig7"],
    ] {
        let out = bin(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.txt");
    std::fs::write(&cfg, "# small scenario\nn_subbands = 64\nm_occupied = 5\navg_captures = 2\nsnr_db = 6\n").unwrap();
    let out = bin(&["analytic", "--config", path(&cfg), "--m", "7", "--pfa-grid", "0.1:0.1:1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.lines().nth(1).unwrap().starts_with("exact,64,7,2,6,"), "{text}");

    std::fs::write(&cfg, "n_subbands = lots\n").unwrap();
    assert_eq!(bin(&["analytic", "--config", path(&cfg)]).status.code(), Some(2));
}

const SMALL: [&str; 8] = ["--n", "64", "--m", "8", "--avg", "4", "--trials", "400"];

#[test]
fn simulate_is_reproducible_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (file, workers) in [(&a, "1"), (&b, "1"), (&c, "4")] {
        let mut args = vec!["simulate", "--quantizer", "one-bit", "--seed", "7", "--workers", workers, "--out", path(file)];
        args.extend(SMALL);
        let out = bin(&args);
        assert!(out.status.success());
        assert!(String::from_utf8_lossy(&out.stderr).contains("seed = 7"));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(bytes, std::fs::read(&c).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert_eq!(text.lines().next().unwrap(), SIMULATED_HEADER.join(","));
    assert!(text.lines().nth(1).unwrap().starts_with("sim-onebit,64,8,4,0,400,7,"));
}

#[test]
fn default_seed_is_announced() {
    let mut args = vec!["simulate"];
    args.extend(SMALL);
    let out = bin(&args);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    let seed = onebit_sense_cli::args::DEFAULT_SEED.to_string();
    assert!(err.contains(&format!("seed = {seed}")), "{err}");
    assert!(stdout(&out).lines().nth(1).unwrap().contains(&format!(",{seed},")));
}

#[test]
fn window_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("w.bin");
    let mut args = vec!["simulate", "--seed", "3", "--dump-window", path(&dump)];
    args.extend(SMALL);
    assert!(bin(&args).status.success());
    let w = onebit_sense::dump::read_window(&mut std::fs::File::open(&dump).unwrap()).unwrap();
    assert_eq!((w.n, w.l, w.m, w.seed), (64, 4, 8, 3));
    assert_eq!(w.samples.len(), 256);
}

#[test]
fn compare_gaps_and_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim.csv");
    let ana = dir.path().join("ana.csv");
    let mut args = vec!["simulate", "--seed", "5", "--dense", "--out", path(&sim)];
    args.extend(SMALL);
    assert!(bin(&args).status.success());
    let out = bin(&["analytic", "--n", "64", "--m", "8", "--avg", "4", "--dense", "--out", path(&ana)]);
    assert!(out.status.success());

    let same = bin(&["compare", path(&sim), path(&sim)]);
    assert!(same.status.success());
    assert!(stdout(&same).contains("max |dPD| over 1 pair(s) = 0.000000"));

    let svg = dir.path().join("c.svg");
    let loose = bin(&["compare", path(&ana), path(&sim), "--tolerance", "0.2", "--plot", path(&svg)]);
    assert!(loose.status.success());
    assert!(stdout(&loose).contains("exact N=64 M=8 L=4 snr=0dB vs sim-unquantized"));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let strict = bin(&["compare", path(&ana), path(&sim), "--tolerance", "0"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn malformed_csv_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    let out = bin(&["analytic", "--out", path(&good)]);
    assert!(out.status.success());
    let bad = dir.path().join("bad.csv");
    for content in ["", "model,N,M\nexact,1,2\n", "model,N,M,L,snr_db,lambda,pfa,pd\nexact,1024,100,8,0,abc,0.5,0.5\n"] {
        std::fs::write(&bad, content).unwrap();
        assert_eq!(bin(&["compare", path(&bad), path(&good)]).status.code(), Some(2), "{content:?}");
    }
    let missing = dir.path().join("missing.csv");
    assert_eq!(bin(&["compare", path(&missing), path(&good)]).status.code(), Some(2));
}
