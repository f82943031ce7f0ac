//! Cards, orientations, and deck sequences.

use std::fmt;

use thiserror::Error;

/// Card face. Exactly two faces exist; the ordering Club < Heart is fixed
/// and used for canonicalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Face {
    Club,
    Heart,
}

impl Face {
    pub fn symbol(self) -> char {
        match self {
            Face::Club => 'C',
            Face::Heart => 'H',
        }
    }

    pub fn from_symbol(c: char) -> Option<Face> {
        match c {
            'C' => Some(Face::Club),
            'H' => Some(Face::Heart),
            _ => None,
        }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    FaceDown,
    FaceUp,
}

impl Orientation {
    pub fn flipped(self) -> Orientation {
        match self {
            Orientation::FaceDown => Orientation::FaceUp,
            Orientation::FaceUp => Orientation::FaceDown,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SequenceError {
    #[error("position {0} out of range 1..={1}")]
    PositionOutOfRange(usize, usize),
    #[error("sequence length {0} does not match expected {1}")]
    LengthMismatch(usize, usize),
}

/// An ordered deck state: each position holds a face and an orientation.
/// Positions are 1-based in the public API, matching protocol notation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sequence {
    slots: Vec<(Face, Orientation)>,
}

impl Sequence {
    pub(crate) fn from_slots(slots: Vec<(Face, Orientation)>) -> Sequence {
        Sequence { slots }
    }

    pub fn face_down(faces: Vec<Face>) -> Sequence {
        Sequence {
            slots: faces
                .into_iter()
                .map(|f| (f, Orientation::FaceDown))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn face(&self, pos: usize) -> Face {
        self.slots[pos - 1].0
    }

    pub fn orientation(&self, pos: usize) -> Orientation {
        self.slots[pos - 1].1
    }

    pub fn slots(&self) -> &[(Face, Orientation)] {
        &self.slots
    }

    pub fn all_face_down(&self) -> bool {
        self.slots.iter().all(|&(_, o)| o == Orientation::FaceDown)
    }

    /// Sorted face multiset, for conservation checks.
    pub fn face_multiset(&self) -> Vec<Face> {
        let mut faces: Vec<Face> = self.slots.iter().map(|&(f, _)| f).collect();
        faces.sort();
        faces
    }

    /// The orientation vector, shared by all rows of a KWH box.
    pub fn orientations(&self) -> Vec<Orientation> {
        self.slots.iter().map(|&(_, o)| o).collect()
    }

    /// Flip the orientation of every listed position.
    pub fn flip(&self, positions: &[usize]) -> Sequence {
        let mut slots = self.slots.clone();
        for &p in positions {
            slots[p - 1].1 = slots[p - 1].1.flipped();
        }
        Sequence { slots }
    }

    /// Replace the faces at two positions, keeping orientations.
    pub fn with_faces(&self, assignments: &[(usize, Face)]) -> Sequence {
        let mut slots = self.slots.clone();
        for &(p, f) in assignments {
            slots[p - 1].0 = f;
        }
        Sequence { slots }
    }

    /// Faces as a string like "CHHC", ignoring orientation.
    pub fn faces_string(&self) -> String {
        self.slots.iter().map(|&(f, _)| f.symbol()).collect()
    }

    /// What the players can see: '?' for face-down positions, the face
    /// symbol for face-up ones.
    pub fn visible_string(&self) -> String {
        self.slots
            .iter()
            .map(|&(f, o)| match o {
                Orientation::FaceDown => '?',
                Orientation::FaceUp => f.symbol(),
            })
            .collect()
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.faces_string())
    }
}

/// Parse a faces string like "CHHC" into a face-down sequence.
pub fn parse_faces(s: &str) -> Option<Vec<Face>> {
    s.chars().map(Face::from_symbol).collect()
}
