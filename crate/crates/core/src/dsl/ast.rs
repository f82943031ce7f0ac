//! Abstract syntax for `.cbp` protocol descriptions.

use std::collections::BTreeSet;
use std::fmt;

use crate::cards::Face;
use crate::perm::Permutation;
use crate::shuffle::ShuffleSpec;

/// Whether the protocol outputs a commitment or an openly revealed bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Committed,
    OpenOutput,
}

/// One player's input: two card positions holding the commitment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Commitment {
    pub owner: String,
    pub positions: (usize, usize),
}

/// Per-position view: '?' for face-down, a face symbol for face-up.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VisiblePattern {
    chars: Vec<Option<Face>>,
}

impl VisiblePattern {
    pub fn parse(s: &str) -> Option<VisiblePattern> {
        let chars = s
            .chars()
            .map(|c| match c {
                '?' => Some(None),
                _ => Face::from_symbol(c).map(Some),
            })
            .collect::<Option<Vec<_>>>()?;
        Some(VisiblePattern { chars })
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    /// Does a visible string like "?H??" match this pattern exactly?
    pub fn matches_visible(&self, visible: &str) -> bool {
        self.to_string() == visible
    }

    /// Each pattern char pins the visible char exactly ('?' requires
    /// face-down), so two patterns overlap iff they are identical.
    pub fn overlaps(&self, other: &VisiblePattern) -> bool {
        self == other
    }
}

impl fmt::Display for VisiblePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.chars {
            match c {
                None => f.write_str("?")?,
                Some(face) => write!(f, "{}", face.symbol())?,
            }
        }
        Ok(())
    }
}

/// One protocol action, a direct transcription of the pseudocode
/// vocabulary plus the goto/branch encoding of its control flow.
#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    Shuffle(ShuffleSpec),
    /// Toggle the orientation of the listed positions.
    Turn(BTreeSet<usize>),
    Perm(Permutation),
    /// Output the commitment (card x, card y), in this order.
    Result { x: usize, y: usize },
    /// Route on the visible sequence.
    Branch(Vec<(VisiblePattern, String)>),
    Goto(String),
    /// Terminal action of open-output protocols: turn all cards face-up
    /// and classify the revealed sequence to a bit.
    Output {
        arms: Vec<(VisiblePattern, u8)>,
        default: u8,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledBlock {
    pub label: String,
    /// Source line of the label, for diagnostics.
    pub line: usize,
    pub actions: Vec<(Action, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Protocol {
    pub name: String,
    /// Reference layout: the face of every position when both inputs
    /// are 0. Commitment positions must read club-then-heart here.
    pub deck: Vec<Face>,
    pub inputs: [Commitment; 2],
    pub mode: Mode,
    pub blocks: Vec<LabeledBlock>,
}

impl Protocol {
    pub fn deck_size(&self) -> usize {
        self.deck.len()
    }

    pub fn shuffles(&self) -> Vec<&ShuffleSpec> {
        self.blocks
            .iter()
            .flat_map(|b| b.actions.iter())
            .filter_map(|(a, _)| match a {
                Action::Shuffle(s) => Some(s),
                _ => None,
            })
            .collect()
    }
}
