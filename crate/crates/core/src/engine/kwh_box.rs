//! KWH boxes: maps from card sequences to conditional-probability
//! polynomials, and the per-action transformations on them.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::cards::{Face, Orientation, Sequence};
use crate::dsl::ast::Protocol;
use crate::perm::Permutation;
use crate::poly::{ProbPoly, Symbol};
use crate::rational::{one, Rat};
use crate::shuffle::ShuffleSpec;

#[derive(Debug, Error, PartialEq)]
pub enum BoxError {
    #[error("rows disagree on length, orientation, or face multiset")]
    InconsistentRows,
    #[error("box has no rows")]
    Empty,
    #[error("shuffle or perm with face-up cards would be observable")]
    FaceUpCards,
    #[error("turn set is empty")]
    EmptyTurnSet,
    #[error("turn set mixes face-up and face-down positions")]
    MixedTurnSet,
    #[error("{0}")]
    Perm(#[from] crate::perm::PermError),
    #[error("security leak: observing {pattern:?} has input-dependent probability {poly}")]
    Leak { pattern: String, poly: ProbPoly },
}

/// One node's worth of protocol state: every card sequence that is
/// possible at this point, annotated with the conditional probability
/// polynomial of being in it. Within a box all rows share length,
/// orientation vector, and face multiset, and the row polynomials sum to
/// X00 + X01 + X10 + X11 exactly.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KwhBox {
    rows: BTreeMap<Sequence, ProbPoly>,
}

impl KwhBox {
    pub fn new(rows: BTreeMap<Sequence, ProbPoly>) -> Result<KwhBox, BoxError> {
        let rows: BTreeMap<Sequence, ProbPoly> =
            rows.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        let first = match rows.keys().next() {
            Some(s) => s.clone(),
            None => return Err(BoxError::Empty),
        };
        let multiset = first.face_multiset();
        let orientations = first.orientations();
        for seq in rows.keys() {
            if seq.len() != first.len()
                || seq.face_multiset() != multiset
                || seq.orientations() != orientations
            {
                return Err(BoxError::InconsistentRows);
            }
        }
        Ok(KwhBox { rows })
    }

    /// The root box: four rows, one per input pair, all cards face-down,
    /// commitment positions encoding the pair and helper cards at their
    /// declared faces.
    pub fn initial(ast: &Protocol) -> KwhBox {
        let mut rows = BTreeMap::new();
        for sym in Symbol::ALL {
            let (a, b) = sym.bits();
            let base = Sequence::face_down(ast.deck.clone());
            let encode = |bit: u8, (p, q): (usize, usize)| {
                if bit == 0 {
                    vec![(p, Face::Club), (q, Face::Heart)]
                } else {
                    vec![(p, Face::Heart), (q, Face::Club)]
                }
            };
            let mut assignments = encode(a, ast.inputs[0].positions);
            assignments.extend(encode(b, ast.inputs[1].positions));
            let seq = base.with_faces(&assignments);
            let entry = rows.entry(seq).or_insert_with(ProbPoly::zero);
            *entry = entry.add(&ProbPoly::unit(sym));
        }
        KwhBox { rows }
    }

    pub fn rows(&self) -> &BTreeMap<Sequence, ProbPoly> {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn deck_size(&self) -> usize {
        self.rows.keys().next().map(|s| s.len()).unwrap_or(0)
    }

    pub fn all_face_down(&self) -> bool {
        self.rows.keys().all(|s| s.all_face_down())
    }

    /// Shared visible string of the box ('?' for face-down positions).
    pub fn visible_string(&self) -> String {
        self.rows
            .keys()
            .next()
            .map(|s| s.visible_string())
            .unwrap_or_default()
    }

    /// Sum of all row polynomials; must equal the total polynomial.
    pub fn poly_sum(&self) -> ProbPoly {
        self.rows
            .values()
            .fold(ProbPoly::zero(), |acc, p| acc.add(p))
    }

    pub fn conservation_holds(&self) -> bool {
        self.poly_sum() == ProbPoly::total()
    }

    /// Mix every row over the shuffle's permutations, weighting by the
    /// shuffle probabilities and merging rows that collide.
    pub fn apply_shuffle(&self, spec: &ShuffleSpec) -> Result<KwhBox, BoxError> {
        if !self.all_face_down() {
            return Err(BoxError::FaceUpCards);
        }
        let mut rows: BTreeMap<Sequence, ProbPoly> = BTreeMap::new();
        for (seq, poly) in &self.rows {
            for (perm, weight) in spec.entries() {
                let dest = perm.apply(seq)?;
                let contrib = poly.scale(weight).expect("weights are positive");
                let entry = rows.entry(dest).or_insert_with(ProbPoly::zero);
                *entry = entry.add(&contrib);
            }
        }
        KwhBox::new(rows)
    }

    /// Deterministic rearrangement; polynomials unchanged.
    pub fn apply_perm(&self, perm: &Permutation) -> Result<KwhBox, BoxError> {
        if !self.all_face_down() {
            return Err(BoxError::FaceUpCards);
        }
        let mut rows = BTreeMap::new();
        for (seq, poly) in &self.rows {
            rows.insert(perm.apply(seq)?, poly.clone());
        }
        KwhBox::new(rows)
    }

    /// Flip the listed positions. Revealing partitions the rows by the
    /// observed faces; each outcome's probability must be independent of
    /// the inputs, otherwise the turn leaks and the whole run is
    /// refuted. Re-hiding reveals nothing and yields one outcome with
    /// probability 1.
    pub fn apply_turn(
        &self,
        positions: &[usize],
    ) -> Result<Vec<(String, Rat, KwhBox)>, BoxError> {
        if positions.is_empty() {
            return Err(BoxError::EmptyTurnSet);
        }
        let orientations = self.rows.keys().next().ok_or(BoxError::Empty)?.orientations();
        let states: Vec<Orientation> =
            positions.iter().map(|&p| orientations[p - 1]).collect();
        let rehide = match (
            states.iter().all(|&o| o == Orientation::FaceUp),
            states.iter().all(|&o| o == Orientation::FaceDown),
        ) {
            (true, _) => true,
            (_, true) => false,
            _ => return Err(BoxError::MixedTurnSet),
        };

        if rehide {
            let rows = self
                .rows
                .iter()
                .map(|(s, p)| (s.flip(positions), p.clone()))
                .collect();
            let flipped = KwhBox::new(rows)?;
            let pattern = flipped.visible_string();
            return Ok(vec![(pattern, one(), flipped)]);
        }

        // reveal: partition by the faces at the turned positions
        let mut groups: BTreeMap<Vec<Face>, BTreeMap<Sequence, ProbPoly>> = BTreeMap::new();
        for (seq, poly) in &self.rows {
            let key: Vec<Face> = positions.iter().map(|&p| seq.face(p)).collect();
            groups
                .entry(key)
                .or_default()
                .insert(seq.flip(positions), poly.clone());
        }
        let mut outcomes = Vec::new();
        for rows in groups.into_values() {
            let sum = rows
                .values()
                .fold(ProbPoly::zero(), |acc, p| acc.add(p));
            let pattern = rows.keys().next().unwrap().visible_string();
            let prob = sum.constant_fraction_of_total().ok_or(BoxError::Leak {
                pattern: pattern.clone(),
                poly: sum,
            })?;
            let conditioned = rows
                .into_iter()
                .map(|(s, p)| (s, p.normalize(&prob).expect("prob > 0")))
                .collect();
            outcomes.push((pattern, prob, KwhBox::new(conditioned)?));
        }
        Ok(outcomes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_faces;
    use crate::dsl::parse_protocol;
    use crate::rational::rat;

    pub(crate) fn box_of(rows: &[(&str, ProbPoly)]) -> KwhBox {
        let map = rows
            .iter()
            .map(|(s, p)| {
                (
                    Sequence::face_down(parse_faces(s).unwrap()),
                    p.clone(),
                )
            })
            .collect();
        KwhBox::new(map).unwrap()
    }

    fn x0_form(c: Rat) -> ProbPoly {
        ProbPoly::from_coeffs([c.clone(), c.clone(), c, crate::rational::zero()])
    }

    fn four_card_ast() -> Protocol {
        parse_protocol(
            "protocol four\ndeck C H C H\ninputs a@(1,2) b@(3,4)\nmode committed\nmain:\nresult 1 2\n",
        )
        .unwrap()
    }

    #[test]
    fn initial_box_four_card() {
        // Figure 1 box a1
        let b = KwhBox::initial(&four_card_ast());
        let expected = box_of(&[
            ("CHCH", ProbPoly::unit(Symbol::X00)),
            ("CHHC", ProbPoly::unit(Symbol::X01)),
            ("HCCH", ProbPoly::unit(Symbol::X10)),
            ("HCHC", ProbPoly::unit(Symbol::X11)),
        ]);
        assert_eq!(b, expected);
        assert!(b.conservation_holds());
    }

    #[test]
    fn initial_box_five_card_trick() {
        // middle helper club at position 3
        let ast = parse_protocol(
            "protocol t\ndeck C H C C H\ninputs a@(1,2) b@(4,5)\nmode open-output\nmain:\noutput { else -> 0 }\n",
        )
        .unwrap();
        let b = KwhBox::initial(&ast);
        let expected = box_of(&[
            ("CHCCH", ProbPoly::unit(Symbol::X00)),
            ("CHCHC", ProbPoly::unit(Symbol::X01)),
            ("HCCCH", ProbPoly::unit(Symbol::X10)),
            ("HCCHC", ProbPoly::unit(Symbol::X11)),
        ]);
        assert_eq!(b, expected);
    }

    #[test]
    fn shuffle_reproduces_figure1_box_a2() {
        let a1 = KwhBox::initial(&four_card_ast());
        let spec = ShuffleSpec::uniform(vec![
            Permutation::parse_cycles("id", 4).unwrap(),
            Permutation::parse_cycles("(1 3)(2 4)", 4).unwrap(),
        ])
        .unwrap();
        let a2 = a1.apply_shuffle(&spec).unwrap();
        let half_mix = ProbPoly::from_coeffs([
            crate::rational::zero(),
            rat(1, 2),
            rat(1, 2),
            crate::rational::zero(),
        ]);
        let expected = box_of(&[
            ("CHCH", ProbPoly::unit(Symbol::X00)),
            ("CHHC", half_mix.clone()),
            ("HCCH", half_mix),
            ("HCHC", ProbPoly::unit(Symbol::X11)),
        ]);
        assert_eq!(a2, expected);
        assert!(a2.conservation_holds());
    }

    #[test]
    fn identity_shuffle_is_noop() {
        let a1 = KwhBox::initial(&four_card_ast());
        let spec =
            ShuffleSpec::uniform(vec![Permutation::parse_cycles("id", 4).unwrap()]).unwrap();
        assert_eq!(a1.apply_shuffle(&spec).unwrap(), a1);
    }

    #[test]
    fn perm_maps_figure1_b6_to_c2() {
        let b6 = box_of(&[
            ("CHHC", x0_form(rat(1, 2))),
            ("HCHC", x0_form(rat(1, 2))),
            ("HHCC", ProbPoly::unit(Symbol::X11)),
        ]);
        let c2 = box_of(&[
            ("CCHH", x0_form(rat(1, 2))),
            ("HCCH", x0_form(rat(1, 2))),
            ("HCHC", ProbPoly::unit(Symbol::X11)),
        ]);
        let p = Permutation::parse_cycles("(2 3 4)", 4).unwrap();
        assert_eq!(b6.apply_perm(&p).unwrap(), c2);
        // identity
        let id = Permutation::identity(4);
        assert_eq!(b6.apply_perm(&id).unwrap(), b6);
    }

    #[test]
    fn turn_splits_figure1_box_a3() {
        // box a3, turn {2} -> branches with Pr = 1/2 each
        let half = rat(1, 2);
        let half_mix = ProbPoly::from_coeffs([
            crate::rational::zero(),
            half.clone(),
            half.clone(),
            crate::rational::zero(),
        ]);
        let a3 = box_of(&[
            ("CCHH", ProbPoly::unit(Symbol::X00).scale(&half).unwrap()),
            ("CHCH", ProbPoly::unit(Symbol::X00).scale(&half).unwrap()),
            ("CHHC", half_mix.clone()),
            ("HCCH", half_mix),
            ("HCHC", ProbPoly::unit(Symbol::X11).scale(&half).unwrap()),
            ("HHCC", ProbPoly::unit(Symbol::X11).scale(&half).unwrap()),
        ]);
        assert!(a3.conservation_holds());
        let outcomes = a3.apply_turn(&[2]).unwrap();
        assert_eq!(outcomes.len(), 2);
        let (pat0, prob0, b_side) = &outcomes[0];
        assert_eq!(pat0, "?C??");
        assert_eq!(prob0, &rat(1, 2));
        let (pat1, prob1, h_side) = &outcomes[1];
        assert_eq!(pat1, "?H??");
        assert_eq!(prob1, &rat(1, 2));
        // Figure 1 box b1 (heart side): X00, X01+X10, X11 rows
        let mix = ProbPoly::from_coeffs([
            crate::rational::zero(),
            crate::rational::one(),
            crate::rational::one(),
            crate::rational::zero(),
        ]);
        for (seq, poly) in h_side.rows() {
            match seq.faces_string().as_str() {
                "CHCH" => assert_eq!(poly, &ProbPoly::unit(Symbol::X00)),
                "CHHC" => assert_eq!(poly, &mix),
                "HHCC" => assert_eq!(poly, &ProbPoly::unit(Symbol::X11)),
                other => panic!("unexpected row {other}"),
            }
        }
        assert!(b_side.conservation_holds() && h_side.conservation_holds());
    }

    #[test]
    fn leaking_turn_is_detected() {
        let leak_poly = ProbPoly::from_coeffs([
            crate::rational::one(),
            crate::rational::one(),
            crate::rational::one(),
            crate::rational::zero(),
        ]);
        let b = box_of(&[
            ("CHHC", leak_poly),
            ("HCCH", ProbPoly::unit(Symbol::X11)),
        ]);
        let err = b.apply_turn(&[1]).unwrap_err();
        match err {
            BoxError::Leak { pattern, .. } => assert_eq!(pattern, "C???"),
            other => panic!("expected leak, got {other:?}"),
        }
    }

    #[test]
    fn rehide_is_single_outcome() {
        let b = KwhBox::initial(&four_card_ast());
        let up = KwhBox::new(
            b.rows()
                .iter()
                .filter(|(s, _)| s.face(2) == Face::Heart)
                .map(|(s, p)| (s.flip(&[2]), p.clone()))
                .collect(),
        )
        .unwrap();
        let outcomes = up.apply_turn(&[2]).unwrap();
        assert_eq!(outcomes.len(), 1);
        assert_eq!(outcomes[0].1, one());
        assert!(outcomes[0].2.all_face_down());
    }

    #[test]
    fn shuffle_with_face_up_cards_is_an_error() {
        let b = KwhBox::initial(&four_card_ast());
        let up = KwhBox::new(
            b.rows()
                .iter()
                .map(|(s, p)| (s.flip(&[1]), p.clone()))
                .collect(),
        )
        .unwrap();
        let spec =
            ShuffleSpec::uniform(vec![Permutation::parse_cycles("(1 2)", 4).unwrap()]).unwrap();
        assert!(matches!(up.apply_shuffle(&spec), Err(BoxError::FaceUpCards)));
    }
}
