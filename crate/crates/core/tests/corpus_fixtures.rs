//! Regression gate: freshly computed reports for every bundled protocol
//! must match the stored JSON fixtures byte-for-byte, and a fixed-seed
//! simulation run must reproduce its recorded transcript exactly.
//!
//! Regenerate the fixtures with `CBCHECK_BLESS=1 cargo test -p
//! cbcheck-core --test corpus_fixtures` after an intentional change, and
//! review the diff like any other code change.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cbcheck_core::corpus::load_corpus;
use cbcheck_core::engine::Program;
use cbcheck_core::report::report_to_json_string;
use cbcheck_core::simulator::run_once;
use cbcheck_core::verifier::full_report;

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus/fixtures")
        .join(name)
}

fn check_fixture(name: &str, computed: &str) {
    let path = fixture_path(name);
    if std::env::var_os("CBCHECK_BLESS").is_some() {
        std::fs::write(&path, computed).unwrap();
        return;
    }
    let stored = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing fixture {}: {e}", path.display()));
    assert_eq!(
        computed,
        stored,
        "fixture {name} is stale; regenerate with CBCHECK_BLESS=1 if the change is intended"
    );
}

#[test]
fn reports_match_stored_fixtures() {
    for entry in load_corpus() {
        let report = full_report(&entry.ast);
        let json = report_to_json_string(&report);
        let name = format!("{}.report.json", entry.ast.name);
        check_fixture(&name, &json);
    }
}

#[test]
fn fixed_seed_transcript_is_reproducible() {
    let entry = load_corpus()
        .into_iter()
        .find(|e| e.ast.name == "four_card_and")
        .unwrap();
    let program = Program::flatten(&entry.ast);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let transcript = run_once(&entry.ast, &program, 0, 0, &mut rng).unwrap();
    let mut lines = vec![format!(
        "output={} turns={} shuffles={} passes={}",
        transcript.output, transcript.turns, transcript.shuffles, transcript.passes
    )];
    for (pc, visible) in &transcript.observations {
        lines.push(format!("turn@{pc} {visible}"));
    }
    let mut text = lines.join("\n");
    text.push('\n');
    check_fixture("four_card_and.seed42.transcript.txt", &text);
}
