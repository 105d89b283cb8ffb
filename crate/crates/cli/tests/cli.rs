use std::process::Command;

use pitman_cli::args::{Command as Cmd, SampleCmd, VerifyCmd};
use pitman_cli::output::read_table;
use pitman_cli::{parse_args, run};

const BIN: &str = env!("CARGO_BIN_EXE_periodic-pitman");

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(BIN)
        .args(args)
        .env_remove("PERIODIC_PITMAN_SEED")
        .output()
        .unwrap()
}

#[test]
fn horizon_flags_parse() {
    let c = parse_args(
        "periodic-pitman sample horizon --n-grid 1024 --beta 1 --slopes -1,0,1 --samples 100 --seed 7 --out h.csv"
            .split(' '),
    )
    .unwrap();
    assert_eq!(c.seed, 7);
    let Cmd::Sample(SampleCmd::Horizon(h)) = c.command else {
        panic!("wrong subcommand");
    };
    assert_eq!((h.n_grid, h.beta, h.samples), (1024, 1.0, 100));
    assert_eq!(h.slopes.0, vec![-1.0, 0.0, 1.0]);
    assert_eq!(h.out.out.unwrap().to_str(), Some("h.csv"));
}

#[test]
fn negative_beta_is_usage_error_naming_flag() {
    let e = parse_args(["periodic-pitman", "sample", "nu", "--beta", "-1"]).unwrap_err();
    assert!(e.to_string().contains("--beta"), "{e}");
    assert_eq!(run(["periodic-pitman", "sample", "nu", "--beta", "-1"]), 2);
    assert_eq!(run(["periodic-pitman", "sample", "nu", "--bogus", "1"]), 2);
    assert_eq!(run(["periodic-pitman", "estimate", "r-covariance", "--theta-grid", "0:1"]), 2);
}

#[test]
fn flag_beats_config_beats_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "seed=3\nn_grid = 64\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let c = parse_args(["periodic-pitman", "sample", "bridge", "--config", cfg, "--seed", "7"]).unwrap();
    assert_eq!(c.seed, 7);
    let Cmd::Sample(SampleCmd::Bridge(b)) = c.command else {
        panic!("wrong subcommand");
    };
    assert_eq!(b.n_grid, 64);
    let c = parse_args(["periodic-pitman", "sample", "bridge", "--config", cfg]).unwrap();
    assert_eq!(c.seed, 3);
}

#[test]
fn environment_seed_is_a_default() {
    let a = Command::new(BIN).args(["sample", "bridge", "--n-grid", "8"]).env("PERIODIC_PITMAN_SEED", "7").output().unwrap();
    let b = cli(&["sample", "bridge", "--n-grid", "8", "--seed", "7"]);
    let c = cli(&["sample", "bridge", "--n-grid", "8"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn config_with_unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "n_grid=8\n").unwrap();
    let out = cli(&["sample", "nu", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n-grid"));
}

#[test]
fn sample_nu_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let p = dir.path().join(name);
        let out = cli(&["sample", "nu", "--n", "2", "--theta", "0", "--beta", "1", "--samples", "3", "--seed", "5", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
        files.push(std::fs::read(p).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let t = read_table(&files[0]).unwrap();
    assert_eq!(t.header, ["sample", "component", "slope", "i", "value"]);
    assert_eq!(t.rows.len(), 6);
    for s in 0..3 {
        let sum: f64 = t.rows[2 * s..2 * s + 2].iter().map(|r| r[4].parse::<f64>().unwrap()).sum();
        assert!(sum.abs() < 1e-12);
    }
}

#[test]
fn r_covariance_grid_has_five_rows() {
    let out = cli(&["estimate", "r-covariance", "--theta-grid", "0:2:0.5", "--beta", "1", "--samples", "200", "--n-grid", "64"]);
    assert!(out.status.success());
    let t = read_table(&out.stdout).unwrap();
    assert_eq!(t.header, ["theta", "R_hat", "stderr"]);
    let thetas: Vec<f64> = t.rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(thetas, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
}

#[test]
fn csv_values_round_trip_exactly() {
    let out = cli(&["sample", "horizon", "--n-grid", "16", "--slopes", "-1,1", "--samples", "2"]);
    let t = read_table(&out.stdout).unwrap();
    assert_eq!(t.header, ["sample", "component", "slope", "x", "value", "scaled", "gap"]);
    assert_eq!(t.rows.len(), 2 * 2 * 17);
    for r in &t.rows {
        for cell in &r[2..] {
            let v: f64 = cell.parse().unwrap();
            assert_eq!(&pitman_cli::output::fmt_f64(v), cell);
        }
    }
    let second = &t.rows[17..34];
    for r in second {
        let gap: f64 = r[6].parse().unwrap();
        assert!((-2.0 / 16.0..=2.0 + 2.0 / 16.0).contains(&gap));
    }
}

#[test]
fn verify_writes_report_and_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("k.csv");
    let out = cli(&["verify", "kernels", "--out", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let t = read_table(&std::fs::read(&p).unwrap()).unwrap();
    assert_eq!(t.header, ["suite", "check", "statistic", "threshold", "samples", "pass"]);
    assert!(t.rows.iter().all(|r| r[5] == "true"));

    // Starting the chain from independent components breaks invariance.
    let out = cli(&["verify", "chain-invariance", "--samples", "2000", "--initial", "nu"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("overall: FAIL"));
}

#[test]
fn core_parameter_errors_are_usage_errors() {
    assert_eq!(cli(&["verify", "burke", "--samples", "10"]).status.code(), Some(2));
}

#[test]
fn evolve_outputs_conserve_slopes() {
    let out = cli(&["evolve", "sde", "--n", "3", "--dt", "1e-2", "--horizon", "0.5", "--stride", "10", "--replicas", "2"]);
    assert!(out.status.success());
    let t = read_table(&out.stdout).unwrap();
    assert_eq!(t.header, ["replica", "t", "component", "slope", "i", "value"]);
    // 2 replicas × 6 snapshots × 2 components × 3 sites
    assert_eq!(t.rows.len(), 72);
    for chunk in t.rows.chunks(3) {
        let want: f64 = chunk[0][3].parse().unwrap();
        let sum: f64 = chunk.iter().map(|r| r[5].parse::<f64>().unwrap()).sum();
        assert!((sum - want).abs() < 1e-9);
    }
    let runs: [&[&str]; 3] = [
        &["evolve", "dual", "--n", "3", "--dt", "1e-2", "--horizon", "0.1"],
        &["evolve", "chain", "--n", "3", "--steps", "3"],
        &["evolve", "multiline", "--n", "3", "--steps", "3", "--mode", "iid", "--gamma", "2"],
    ];
    for args in runs {
        let out = cli(args);
        assert!(out.status.success(), "{}", args[1]);
        let t = read_table(&out.stdout).unwrap();
        assert!(!t.rows.is_empty());
    }
}

#[test]
fn kernel_table_shape() {
    let out = cli(&["kernels", "table", "--sizes", "10,20"]);
    let t = read_table(&out.stdout).unwrap();
    assert_eq!(t.rows.len(), 50);
}

#[test]
fn verify_all_lists_every_suite() {
    let c = parse_args(["periodic-pitman", "verify", "all", "--seed", "2"]).unwrap();
    assert!(matches!(c.command, Cmd::Verify(VerifyCmd::All(_))));
}

#[test]
fn help_documents_schemas() {
    let out = cli(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("theta,R_hat,stderr"));
    assert!(text.contains("PERIODIC_PITMAN_SEED"));
}
