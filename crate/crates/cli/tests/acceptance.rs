//! End-to-end acceptance gate: one line per criterion, all criteria checked
//! even if an earlier one fails, assertion at the end.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use movplane_cli::config::ExperimentConfig;
use movplane_cli::pipeline::run_experiment;
use movplane_cli::report::RunReport;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join(format!("mpl-acceptance-{}", std::process::id()))
        .join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run_preset(name: &str, out: &Path) -> RunReport {
    let mut cfg = ExperimentConfig::preset_default(name).expect("known preset");
    cfg.out = out.display().to_string();
    run_experiment(&cfg).expect("pipeline runs")
}

fn check_passed(report: &RunReport, id: &str) -> bool {
    report
        .checks
        .iter()
        .any(|c| c.id == id && c.status == "PASS")
}

fn hash_dir(dir: &Path) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("output dir exists") {
        let entry = entry.unwrap();
        let bytes = std::fs::read(entry.path()).unwrap();
        // FNV-1a, enough to witness byte-identity
        let mut h: u64 = 0xcbf29ce484222325;
        for b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        out.insert(entry.file_name().to_string_lossy().into_owned(), h);
    }
    out
}

#[test]
fn acceptance() {
    let mut results: Vec<(usize, &str, bool)> = Vec::new();

    // criteria 1 + 2 share the oracle run
    let oracle = run_preset("oracle-suite", &scratch("oracle"));
    results.push((
        1,
        "operator oracles",
        ["oracle-bump-constancy", "oracle-step-law", "oracle-sign-check"]
            .iter()
            .all(|id| check_passed(&oracle, id)),
    ));
    results.push((
        2,
        "exact kernel evolution",
        check_passed(&oracle, "oracle-kernel-evolution"),
    ));

    // criteria 3 + 4 share the principle run
    let principles = run_preset("principle-suite", &scratch("principles"));
    results.push((
        3,
        "comparison principles",
        check_passed(&principles, "principles-randomized")
            && check_passed(&principles, "principles-violated"),
    ));
    results.push((4, "scalar decay bound", check_passed(&principles, "xi-decay")));

    // criterion 5: unit-ball symmetry in 1D and 2D; criterion 7 folds in the
    // boundary-derivative margins of every symmetric verdict
    let mut ball_ok = true;
    let mut hopf_ok = true;
    for dim in [1usize, 2] {
        let mut cfg = ExperimentConfig::preset_default("ball-symmetry").unwrap();
        cfg.dim = dim;
        cfg.out = scratch(&format!("ball-{dim}d")).display().to_string();
        let rep = run_experiment(&cfg).expect("ball pipeline runs");
        ball_ok &= ["ball-horizon-stability", "ball-omega-converged", "ball-symmetric"]
            .iter()
            .all(|id| check_passed(&rep, id));
        hopf_ok &= check_passed(&rep, "hopf-margin");
    }
    results.push((5, "ball asymptotic symmetry (1D, 2D)", ball_ok));

    // criterion 6: whole-space dichotomy (zero and symmetric branches both
    // accepted; a hopf-margin record exists only on the symmetric branch)
    let ws = run_preset("whole-space-symmetry", &scratch("whole-space"));
    let ws_ok =
        check_passed(&ws, "whole-space-converged") && check_passed(&ws, "whole-space-verdict");
    results.push((6, "whole-space symmetry dichotomy", ws_ok));
    if ws.checks.iter().any(|c| c.id == "hopf-margin") {
        hopf_ok &= check_passed(&ws, "hopf-margin");
    }
    results.push((7, "boundary derivative margins", hopf_ok));

    // criterion 8
    let barrier = run_preset("barrier-suite", &scratch("barrier"));
    results.push((
        8,
        "barrier constructions",
        [
            "barrier-residual",
            "barrier-psi",
            "barrier-global-bound",
            "barrier-strongmax",
            "barrier-boundary",
            "barrier-monotonicity",
        ]
        .iter()
        .all(|id| check_passed(&barrier, id)),
    ));

    // criterion 9: repeating a run with identical config + seed reproduces
    // every artifact byte for byte
    let mut det_ok = true;
    for preset in ["whole-space-symmetry", "barrier-suite"] {
        let out = scratch(&format!("determinism-{preset}"));
        run_preset(preset, &out);
        let first = hash_dir(&out);
        run_preset(preset, &out);
        let second = hash_dir(&out);
        det_ok &= first == second && !first.is_empty();
    }
    results.push((9, "byte-identical reruns", det_ok));

    let mut all_ok = true;
    for (n, name, ok) in &results {
        println!("criterion {n} ({name}): {}", if *ok { "PASS" } else { "FAIL" });
        all_ok &= ok;
    }
    assert!(all_ok, "acceptance criteria failed");
}
