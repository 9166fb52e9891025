//! End-to-end runs of the command-line front end.

use std::fs;
use std::path::Path;

use shockform::cli_io::csv_out::*;
use shockform::cli_io::run_cli;

fn run(args: &[&str]) -> i32 {
    run_cli(std::iter::once("shockform").chain(args.iter().copied()))
}

fn header(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().next().unwrap().split(',').map(str::to_string).collect()
}

fn assert_schema(dir: &Path, name: &str, schema: &[&str]) {
    let path = dir.join(name);
    assert!(path.exists(), "{name} missing");
    assert_eq!(header(&path), schema, "{name}");
    let rows = fs::read_to_string(&path).unwrap().lines().count() - 1;
    assert!(rows > 0, "{name} has no rows");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["analyze", "--preset", "preset-a"]), 0);
    assert_eq!(run(&["frobnicate"]), 64);
    assert_eq!(run(&[]), 64);
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["--version"]), 0);
    assert_eq!(run(&["analyze", "--preset", "preset-z"]), 65);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("plus.toml");
    fs::write(&cfg, "[problem]\nflux_f = \"u^2/2\"\nflux_g = \"0\"\nu0 = \"x\"\n").unwrap();
    assert_eq!(run(&["analyze", "--config", cfg.to_str().unwrap()]), 2);
    fs::write(&cfg, "preset = preset-a\n[front]\nepsilon = -0.1\n").unwrap();
    assert_eq!(run(&["curve", "--config", cfg.to_str().unwrap()]), 65);
    fs::write(&cfg, "preset = preset-a\n[gamma]\ndelta = 0.9\n").unwrap();
    assert_eq!(run(&["curve", "--config", cfg.to_str().unwrap()]), 65);
    assert_eq!(run(&["curve", "--config", dir.path().join("missing.toml").to_str().unwrap()]), 65);
}

#[test]
fn pipeline_subcommands_write_documented_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["curve", "--preset", "preset-b", "--out", out]), 0);
    assert_schema(dir.path(), "gamma.csv", GAMMA_HEADER);
    assert_schema(dir.path(), "cusp.csv", CUSP_HEADER);
    assert_eq!(run(&["shock", "--preset", "preset-b", "--out", out, "--threads", "2"]), 0);
    assert_schema(dir.path(), "front.csv", FRONT_HEADER);
    assert_schema(dir.path(), "roots.csv", ROOTS_HEADER);
    assert_eq!(run(&["field", "--preset", "preset-a", "--out", out]), 0);
    assert_schema(dir.path(), "field.csv", FIELD_HEADER);
    assert_schema(dir.path(), "exponents.csv", EXPONENTS_HEADER);
    assert_eq!(header(&dir.path().join("gamma.csv")), ["y", "T_star", "Xi_star", "Y_star", "x_star", "tangent_slope", "residual"]);
}

#[test]
fn reference_writes_snapshots_and_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fv.toml");
    fs::write(&cfg, "preset = preset-a\n[fv]\nnx = 96\nny = 96\nsnapshots = 2\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["reference", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    for name in ["fv_field.csv", "fv_field_001.csv", "fv_field_002.csv"] {
        assert_schema(&out, name, FV_FIELD_HEADER);
        assert_eq!(fs::read_to_string(out.join(name)).unwrap().lines().count(), 96 * 96 + 1);
    }
    assert_schema(&out, "fv_compare.csv", FV_COMPARE_HEADER);
    // a run that ends before blowup is compared in the max norm instead
    fs::write(&cfg, "preset = preset-a\n[fv]\nnx = 96\nny = 96\nt_end = 0.5\n").unwrap();
    assert_eq!(run(&["reference", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(run(&["shock", "--preset", "preset-a", "--out", d.path().to_str().unwrap()]), 0);
    }
    for name in ["front.csv", "roots.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}
