//! Golden-file and exit-code tests for the command line.
//!
//! Golden files live in `tests/golden`; run with `UPDATE_GOLDEN=1` to
//! rewrite them after an intended output change.

use std::path::PathBuf;
use std::process::Command;

use sullivan_core::cli::{run, CommandOutcome, EXIT_KILL, EXIT_OK, EXIT_USAGE};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn model(name: &str) -> String {
    format!("tests/golden/models/{name}.model")
}

/// Compares `actual` with the golden file, or rewrites it when
/// `UPDATE_GOLDEN` is set.
fn assert_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

fn sullivan(args: &[&str]) -> CommandOutcome {
    let mut full = vec!["sullivan"];
    full.extend_from_slice(args);
    run(full)
}

fn golden_case(name: &str, args: &[&str], code: i32) {
    let out = sullivan(args);
    assert_eq!(out.code, code, "{name}: stderr was {}", out.stderr);
    let mut transcript = format!("$ sullivan {}\nexit {}\n", args.join(" "), out.code);
    transcript.push_str("--- stdout\n");
    transcript.push_str(&out.stdout);
    transcript.push_str("--- stderr\n");
    transcript.push_str(&out.stderr);
    assert_golden(&format!("{name}.txt"), &transcript);
}

#[test]
fn cp2_cohomology_line() {
    let cp2 = model("cp2");
    let out = sullivan(&["model", "cohomology", &cp2, "--max-degree", "9"]);
    assert_eq!(out.code, EXIT_OK);
    assert_eq!(out.stdout, "1 0 1 0 1 0 0 0 0 0\n");
    golden_case("model_cohomology_tree", &["model", "cohomology", &model("eschenburg"), "--max-degree", "8", "--format", "tree"], EXIT_OK);
}

#[test]
fn model_checks() {
    golden_case("model_check_cp2", &["model", "check", &model("cp2"), "--require-minimal", "--require-simply-connected"], EXIT_OK);
    golden_case("model_check_nonminimal", &["model", "check", &model("nonminimal"), "--require-minimal"], EXIT_KILL);
    golden_case("model_check_bad_square", &["model", "check", &model("bad_square")], EXIT_KILL);
    golden_case("model_check_odd_square", &["model", "check", &model("odd_square")], EXIT_OK);
    // non-minimal models pass when minimality is not requested
    assert_eq!(sullivan(&["model", "check", &model("nonminimal")]).code, EXIT_OK);
}

#[test]
fn parse_errors_name_the_generator_and_location() {
    let out = sullivan(&["model", "check", &model("undeclared")]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("y2"), "{}", out.stderr);
    assert!(out.stderr.contains(":4:12:"), "{}", out.stderr);
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["frobnicate"],
        vec!["model", "cohomology"],
        vec!["elliptic", "enumerate", "--dim", "4", "--bogus"],
        vec!["reproduce", "prop99"],
        vec!["fibration", "fiber-ranks", "--total", "nowhere", "--base", "S2"],
        vec!["model", "check", "tests/golden/models/missing.model"],
        vec!["check", "submersion", "--total", "eschenburg", "--max-base-dim", "9"],
        vec!["elliptic", "enumerate", "--dim", "3", "--coeffs", "{1,2}"],
    ] {
        let out = sullivan(&args);
        assert_eq!(out.code, EXIT_USAGE, "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    let help = sullivan(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.stdout.contains("reproduce"));
}

#[test]
fn enumeration_and_sequences() {
    let out = sullivan(&["elliptic", "enumerate", "--dim", "4"]);
    assert_eq!(out.stdout.lines().count(), 3);
    golden_case("elliptic_enumerate_dim4", &["elliptic", "enumerate", "--dim", "4"], EXIT_OK);
    golden_case("elliptic_enumerate_dim5_unpruned", &["elliptic", "enumerate", "--dim", "5", "--no-prune"], EXIT_OK);
    golden_case("fiber_ranks_eschenburg_s3", &["fibration", "fiber-ranks", "--total", "eschenburg", "--base", "S3"], EXIT_OK);
    golden_case("fiber_ranks_inline", &["fibration", "fiber-ranks", "--total", "2:1,5:1,9:1", "--base", "2:1,5:1"], EXIT_OK);
    golden_case("wang_s2_known_b1", &["fibration", "wang", "--sphere", "2", "--total", "S2xS5", "--fiber-dim", "5", "--known", "1=1"], EXIT_OK);
    golden_case("wang_s2_inline_total", &["fibration", "wang", "--sphere", "2", "--total", "2:1,3:1,5:1", "--fiber-dim", "5", "--known", "1=0"], EXIT_OK);
}

#[test]
fn submersion_checks() {
    golden_case("check_submersion_eschenburg_3", &["check", "submersion", "--total", "eschenburg", "--max-base-dim", "3"], EXIT_OK);
    golden_case("check_submersion_cp3_3", &["check", "submersion", "--total", "CP3", "--max-base-dim", "3"], EXIT_KILL);
    let from_file = sullivan(&["check", "submersion", "--total", &model("eschenburg"), "--max-base-dim", "3"]);
    let from_name = sullivan(&["check", "submersion", "--total", "eschenburg", "--max-base-dim", "3"]);
    assert_eq!(from_file.code, EXIT_OK);
    assert_eq!(
        from_file.stdout.lines().skip(1).collect::<Vec<_>>(),
        from_name.stdout.lines().skip(1).collect::<Vec<_>>()
    );
    let live = sullivan(&["check", "submersion", "--total", "bazaikin", "--max-base-dim", "7", "--live-table"]);
    let fixed = sullivan(&["check", "submersion", "--total", "bazaikin", "--max-base-dim", "7"]);
    assert_eq!(live, fixed);
}

#[test]
fn reproductions_match_golden_files() {
    for target in ["table1", "prop31", "prop32", "prop41", "prop42", "theorem-a", "theorem-b"] {
        let text = sullivan(&["reproduce", target]);
        assert_eq!(text.code, EXIT_OK, "{target}");
        assert_golden(&format!("reproduce_{target}.txt"), &text.stdout);
        let tree = sullivan(&["reproduce", target, "--format", "tree"]);
        assert_eq!(tree.code, EXIT_OK, "{target}");
        assert_golden(&format!("reproduce_{target}.json"), &tree.stdout);
        let again = sullivan(&["reproduce", target, "--format", "tree"]);
        assert_eq!(tree, again, "{target} is not deterministic");
    }
}

#[test]
fn theorem_a_lists_only_the_flagged_s2_case() {
    let out = sullivan(&["reproduce", "theorem-a"]);
    let survivors: Vec<&str> = out
        .stdout
        .lines()
        .skip_while(|l| *l != "survivors:")
        .skip(1)
        .collect();
    assert_eq!(survivors.len(), 1);
    assert!(survivors[0].starts_with("  S2 (2:1,3:1) with fiber 5:1 [integral-obstruction-required"));
}

#[test]
fn tree_output_round_trips() {
    for target in ["prop32", "table1"] {
        let out = sullivan(&["reproduce", target, "--format", "tree"]);
        let value: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        let mut printed = serde_json::to_string_pretty(&value).unwrap();
        printed.push('\n');
        assert_eq!(printed, out.stdout);
    }
    let out = sullivan(&["reproduce", "prop32", "--format", "tree"]);
    let value: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let keys: Vec<&String> = value.as_object().unwrap().keys().collect();
    for k in ["total", "bases", "survivors"] {
        assert!(keys.iter().any(|x| x.as_str() == k), "missing {k}");
    }
    let fiber = &value["bases"][0]["fibers"][0];
    for k in ["ranks", "verdict", "certificate", "flags"] {
        assert!(fiber.get(k).is_some(), "fiber entry lacks {k}");
    }
}

/// Environment defaults are read by the binary; each case runs in its own
/// process so the test harness environment stays untouched.
#[test]
fn environment_defaults() {
    let bin = env!("CARGO_BIN_EXE_sullivan");
    let dir = env!("CARGO_MANIFEST_DIR");
    let out = Command::new(bin)
        .current_dir(dir)
        .args(["model", "cohomology", "tests/golden/models/cp2.model"])
        .env("SULLIVAN_MAX_DEGREE", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1 0 1 0 1 0\n");

    let out = Command::new(bin)
        .current_dir(dir)
        .args(["model", "cohomology", "tests/golden/models/cp2.model"])
        .env_remove("SULLIVAN_MAX_DEGREE")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(!out.stderr.is_empty());
    assert!(out.stdout.is_empty());

    let out = Command::new(bin)
        .args(["elliptic", "enumerate", "--dim", "4"])
        .env("SULLIVAN_COEFFS", "{0,1}")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 3);

    let out = Command::new(bin)
        .args(["elliptic", "enumerate", "--dim", "4"])
        .env("SULLIVAN_COEFFS", "not a set")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}
