//! Bundled protocol corpus: the two committed-format AND protocols, the
//! classic open-output five-card trick, and two deliberately broken
//! negative controls that exercise the verifier's FAIL paths.

use crate::dsl::ast::Protocol;
use crate::dsl::parse::parse_protocol;

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    /// File name under the `corpus/` directory.
    pub file: &'static str,
    pub source: &'static str,
    pub ast: Protocol,
}

pub const FOUR_CARD_AND: &str = include_str!("../corpus/four_card_and.cbp");
pub const FIVE_CARD_AND: &str = include_str!("../corpus/five_card_and.cbp");
pub const FIVE_CARD_TRICK: &str = include_str!("../corpus/five_card_trick.cbp");
pub const LEAKY_TOY: &str = include_str!("../corpus/leaky_toy.cbp");
pub const NONUNIFORM_TOY: &str = include_str!("../corpus/nonuniform_toy.cbp");

const SOURCES: [(&str, &str); 5] = [
    ("four_card_and.cbp", FOUR_CARD_AND),
    ("five_card_and.cbp", FIVE_CARD_AND),
    ("five_card_trick.cbp", FIVE_CARD_TRICK),
    ("leaky_toy.cbp", LEAKY_TOY),
    ("nonuniform_toy.cbp", NONUNIFORM_TOY),
];

/// Parse and return every bundled protocol. The sources are compiled in,
/// so a corrupted bundle is a build- or panic-level failure, not a
/// runtime condition.
pub fn load_corpus() -> Vec<CorpusEntry> {
    SOURCES
        .iter()
        .map(|&(file, source)| CorpusEntry {
            file,
            source,
            ast: parse_protocol(source)
                .unwrap_or_else(|e| panic!("bundled protocol {file} is corrupted: {e}")),
        })
        .collect()
}

pub fn corpus_entry(file: &str) -> Option<CorpusEntry> {
    load_corpus().into_iter().find(|e| e.file == file)
}
