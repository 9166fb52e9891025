//! Acceptance suite: criteria 1 to 10 through `verify`, criterion 11 by running `verify`
//! twice and comparing every CSV byte for byte. Prints one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use shockform::cli_io::run_cli;

/// Criteria that cannot be met as stated. Criterion 3 asks for the leading-order forms to
/// hold within 10% on |y| ≤ 0.15, but on PRESET-A `b*(y) = 2(1 − 3y²)²/(3√3)` sits 13% below
/// its leading form at |y| = 0.15. It must keep failing for that reason alone.
const KNOWN_UNATTAINABLE: &[u32] = &[3];

struct Outcome {
    name: String,
    passed: bool,
    failing: Vec<String>,
}

fn read_verify(dir: &Path) -> BTreeMap<u32, Outcome> {
    let mut rdr = csv::Reader::from_path(dir.join("verify.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), ["criterion", "name", "metric", "value", "relation", "limit", "passed"]);
    let mut out: BTreeMap<u32, Outcome> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let id: u32 = rec[0].parse().unwrap();
        let ok = &rec[6] == "true";
        let entry = out.entry(id).or_insert(Outcome { name: rec[1].to_string(), passed: true, failing: Vec::new() });
        if !ok {
            entry.passed = false;
            entry.failing.push(format!("{} = {} ({} {})", &rec[2], &rec[3], &rec[4], &rec[5]));
        }
    }
    out
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn verify_into(dir: &Path) -> i32 {
    run_cli(["shockform", "verify", "--preset", "preset-a", "--out", dir.to_str().unwrap()])
}

#[test]
fn acceptance_suite() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let code = verify_into(first.path());
    let outcomes = read_verify(first.path());
    assert_eq!(outcomes.keys().copied().collect::<Vec<_>>(), (1..=10).collect::<Vec<_>>());

    let code2 = verify_into(second.path());
    let (a, b) = (csv_files(first.path()), csv_files(second.path()));
    let differing: Vec<&String> = a.keys().filter(|k| b.get(*k) != a.get(*k)).collect();
    let deterministic = a.len() >= 8 && a.keys().eq(b.keys()) && differing.is_empty() && code == code2;

    let mut lines = Vec::new();
    for (id, o) in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        let note = if KNOWN_UNATTAINABLE.contains(id) { " [known unattainable]" } else { "" };
        let detail = if o.failing.is_empty() { String::new() } else { format!(": {}", o.failing.join("; ")) };
        lines.push(format!("{status} criterion {id:>2} ({}){note}{detail}", o.name));
    }
    lines.push(format!(
        "{} criterion 11 (determinism): {} CSV files compared{}",
        if deterministic { "PASS" } else { "FAIL" },
        a.len(),
        if differing.is_empty() { String::new() } else { format!(", differing: {differing:?}") }
    ));
    for l in &lines {
        println!("{l}");
    }

    for (id, o) in &outcomes {
        if KNOWN_UNATTAINABLE.contains(id) {
            assert!(!o.passed, "criterion {id} unexpectedly passes");
            assert!(
                o.failing.iter().all(|f| f.starts_with("b_star_leading_rel_dev")),
                "criterion {id} fails for an unexpected reason: {:?}",
                o.failing
            );
        } else {
            assert!(o.passed, "criterion {id} ({}) failed: {:?}", o.name, o.failing);
        }
    }
    assert!(deterministic, "verify output differs between runs: {differing:?}");
    // the suite reports the known failure through the exit code
    assert_eq!(code, 2);
}
