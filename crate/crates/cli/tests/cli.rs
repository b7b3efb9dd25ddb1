//! Integration tests for the command-line contract: exit codes, the JSON
//! error envelope on stderr, output formats, the config-hash stamp, graph
//! file round-trips, and the enumeration cache.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hirank")
}

fn run_in(cache: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env("HIRANK_CACHE_DIR", cache)
        .output()
        .expect("binary should spawn")
}

fn run(args: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), args)
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Asserts exit code 1 and a stderr envelope `{"error":{"kind":…}}`.
fn error_kind_of(out: &Output) -> String {
    assert_eq!(out.status.code(), Some(1), "expected exit code 1");
    let env: Value = serde_json::from_slice(&out.stderr).unwrap_or_else(|e| {
        panic!(
            "stderr is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stderr)
        )
    });
    assert!(
        env["error"]["message"]
            .as_str()
            .is_some_and(|m| !m.is_empty()),
        "error envelope must carry a message"
    );
    env["error"]["kind"]
        .as_str()
        .expect("error envelope must carry a kind")
        .to_owned()
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["phi", "--help"], &["--version"]] {
        let out = run(args);
        assert!(out.status.success(), "{args:?} should exit 0");
        assert!(!out.stdout.is_empty(), "{args:?} should print to stdout");
    }
}

#[test]
fn missing_and_unknown_subcommands_produce_argument_envelopes() {
    assert_eq!(error_kind_of(&run(&[])), "argument");
    assert_eq!(error_kind_of(&run(&["frobnicate"])), "argument");
    assert_eq!(error_kind_of(&run(&["phi", "--n", "three"])), "argument");
}

#[test]
fn domain_failures_map_to_stable_error_kinds() {
    // The power sum at the critical exponent is refused, not truncated.
    assert_eq!(
        error_kind_of(&run(&["schatten", "--n", "3", "--delta", "0", "--p", "4"])),
        "divergence"
    );
    // Ambient dimension below 3 has no spherical-function theory here.
    assert_eq!(
        error_kind_of(&run(&["phi", "--n", "2", "--kmax", "4", "--grid", "5"])),
        "domain"
    );
    // A group far beyond the enumeration cap is rejected up front.
    assert_eq!(
        error_kind_of(&run(&["spectrum", "--n", "9", "--q", "4", "--k", "2"])),
        "resource"
    );
}

#[test]
fn graph_source_must_be_exactly_one_of_file_or_family() {
    let kind = error_kind_of(&run(&["spectrum", "--k", "2"]));
    assert_eq!(kind, "argument");
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.graph");
    std::fs::write(&file, "").unwrap();
    let kind = error_kind_of(&run(&[
        "spectrum",
        "--graph",
        file.to_str().unwrap(),
        "--n",
        "2",
        "--q",
        "3",
        "--k",
        "2",
    ]));
    assert_eq!(kind, "argument");
}

#[test]
fn fixed_format_commands_reject_format_overrides() {
    // JSON-only artifacts refuse CSV…
    assert_eq!(
        error_kind_of(&run(&[
            "kak", "--s", "2", "--t", "1", "--theta", "0.7", "--format", "csv"
        ])),
        "argument"
    );
    // …and graph files carry their own format, so any override is refused.
    assert_eq!(
        error_kind_of(&run(&[
            "cayley", "--n", "2", "--q", "3", "--format", "json"
        ])),
        "argument"
    );
}

#[test]
fn phi_table_has_stamped_header_and_full_row_count() {
    let out = run(&["phi", "--n", "3", "--kmax", "8", "--grid", "5"]);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(
        lines[0].len() == "# config ".len() + 16
            && lines[0].starts_with("# config ")
            && lines[0]["# config ".len()..]
                .chars()
                .all(|c| c.is_ascii_hexdigit()),
        "first line must be a 16-hex-digit config stamp, got: {}",
        lines[0]
    );
    assert_eq!(lines[1], "n,k,x,value,abs_error");
    assert_eq!(lines.len(), 2 + 9 * 5, "one row per (k, x) pair");
}

#[test]
fn config_hash_ignores_packaging_but_tracks_parameters() {
    let csv = stdout_of(&run(&["phi", "--n", "3", "--kmax", "2", "--grid", "3"]));
    let csv_hash = csv
        .lines()
        .next()
        .unwrap()
        .trim_start_matches("# config ")
        .to_owned();

    let json = stdout_of(&run(&[
        "phi", "--n", "3", "--kmax", "2", "--grid", "3", "--format", "json",
    ]));
    let parsed: Value = serde_json::from_str(&json).unwrap();
    assert_eq!(
        parsed["config_hash"].as_str().unwrap(),
        csv_hash,
        "format must not change the hash"
    );

    let threaded = stdout_of(&run(&[
        "phi",
        "--n",
        "3",
        "--kmax",
        "2",
        "--grid",
        "3",
        "--threads",
        "2",
    ]));
    assert_eq!(
        threaded, csv,
        "thread count must change neither hash nor bytes"
    );

    let other = stdout_of(&run(&["phi", "--n", "3", "--kmax", "3", "--grid", "3"]));
    let other_hash = other
        .lines()
        .next()
        .unwrap()
        .trim_start_matches("# config ");
    assert_ne!(
        other_hash, csv_hash,
        "different parameters must hash differently"
    );
}

#[test]
fn graph_files_round_trip_into_spectrum_and_cheeger() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sl2-q3-cayley.graph");
    let out = run_in(
        dir.path(),
        &[
            "cayley",
            "--n",
            "2",
            "--q",
            "3",
            "--out",
            file.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    let body = std::fs::read_to_string(&file).unwrap();
    assert!(body.starts_with("# config "), "graph files are stamped too");

    let spec = stdout_of(&run(&[
        "spectrum",
        "--graph",
        file.to_str().unwrap(),
        "--k",
        "3",
    ]));
    assert_eq!(
        spec.lines().count(),
        3 + 3,
        "two comment lines, header, three eigenvalue rows"
    );

    let cheeg = stdout_of(&run(&["cheeger", "--graph", file.to_str().unwrap()]));
    let parsed: Value = serde_json::from_str(&cheeg).unwrap();
    let h = parsed["result"]["h_exact"]
        .as_f64()
        .expect("24 vertices is within the exact cap");
    let lo = parsed["result"]["cheeger_lower"].as_f64().unwrap();
    let hi = parsed["result"]["cheeger_upper"].as_f64().unwrap();
    assert!(
        lo <= h && h <= hi,
        "exact constant {h} must sit inside [{lo}, {hi}]"
    );
}

#[test]
fn schreier_action_files_feed_the_spectrum_command() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("proj.graph");
    let out = run_in(
        dir.path(),
        &[
            "schreier",
            "--n",
            "2",
            "--q",
            "5",
            "--action",
            "projective",
            "--out",
            file.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    let spec = stdout_of(&run(&[
        "spectrum",
        "--graph",
        file.to_str().unwrap(),
        "--k",
        "2",
        "--dense",
    ]));
    assert_eq!(spec.lines().count(), 3 + 2);
}

#[test]
fn corrupt_cache_entries_are_rebuilt_silently() {
    let dir = tempfile::tempdir().unwrap();
    let fresh = stdout_of(&run_in(
        dir.path(),
        &["spectrum", "--n", "2", "--q", "5", "--k", "3"],
    ));

    let cached: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert!(
        !cached.is_empty(),
        "an enumeration cache entry should exist"
    );
    for path in &cached {
        std::fs::write(path, "not a group table").unwrap();
    }

    let rebuilt = stdout_of(&run_in(
        dir.path(),
        &["spectrum", "--n", "2", "--q", "5", "--k", "3"],
    ));
    assert_eq!(rebuilt, fresh, "a corrupt cache must not change results");
    let body = std::fs::read_to_string(&cached[0]).unwrap();
    assert_ne!(
        body, "not a group table",
        "the corrupt entry should be rewritten"
    );
}

#[test]
fn embed_reports_are_deterministic_and_validated() {
    let args = [
        "embed", "--n", "2", "--q", "3", "--dim", "2", "--iters", "30", "--seed", "7",
    ];
    let a = stdout_of(&run(&args));
    let b = stdout_of(&run(&args));
    assert_eq!(a, b, "same seed must give byte-identical reports");
    let parsed: Value = serde_json::from_str(&a).unwrap();
    assert!(parsed["result"]["distortion"].as_f64().unwrap() >= 1.0);

    assert_eq!(
        error_kind_of(&run(&["embed", "--n", "2", "--q", "3", "--p", "0.5"])),
        "argument",
        "target exponents below 1 are not norms"
    );
}

#[test]
fn banach_distance_matches_the_john_certificate() {
    let out = stdout_of(&run(&["banach", "--d", "2"]));
    let parsed: Value = serde_json::from_str(&out).unwrap();
    let distance = parsed["result"]["distance"].as_f64().unwrap();
    let ratio = parsed["result"]["john_check"]["ratio"].as_f64().unwrap();
    assert!((distance - std::f64::consts::SQRT_2).abs() <= 1e-9);
    assert!((ratio - distance).abs() <= 1e-9);

    assert_eq!(error_kind_of(&run(&["banach", "--d", "5"])), "unsupported");
}
