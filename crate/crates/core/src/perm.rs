//! Permutations on deck positions, cycle-notation I/O, and subgroup
//! closure.
//!
//! Permutations are stored as explicit mapping arrays; cycle notation is
//! I/O only. The action on a sequence uses the destination convention:
//! the card at position i moves TO position sigma(i).

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::cards::Sequence;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PermError {
    #[error("malformed cycle notation: {0}")]
    Malformed(String),
    #[error("position {0} repeated within cycle expression")]
    RepeatedPosition(usize),
    #[error("position {0} out of range 1..={1}")]
    PositionOutOfRange(usize, usize),
    #[error("permutation size {0} does not match {1}")]
    SizeMismatch(usize, usize),
}

/// A bijection on positions {1..n}.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    // map[i] = sigma(i+1) - 1, i.e. 0-based destination of 0-based slot i
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Permutation {
        Permutation {
            map: (0..n).collect(),
        }
    }

    /// 1-based mapping array: entry i-1 is sigma(i).
    pub fn mapping(&self) -> Vec<usize> {
        self.map.iter().map(|&d| d + 1).collect()
    }

    pub fn from_mapping(mapping: Vec<usize>) -> Result<Permutation, PermError> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &d in &mapping {
            if d < 1 || d > n {
                return Err(PermError::PositionOutOfRange(d, n));
            }
            if seen[d - 1] {
                return Err(PermError::RepeatedPosition(d));
            }
            seen[d - 1] = true;
        }
        Ok(Permutation {
            map: mapping.into_iter().map(|d| d - 1).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &d)| i == d)
    }

    /// Parse whitespace-tolerant cycle notation: "id", "(1 3)(2 4)", ...
    pub fn parse_cycles(text: &str, n: usize) -> Result<Permutation, PermError> {
        let text = text.trim();
        if text == "id" {
            return Ok(Permutation::identity(n));
        }
        if text.is_empty() {
            return Err(PermError::Malformed("empty permutation".into()));
        }
        let mut map: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        let mut rest = text;
        while !rest.is_empty() {
            rest = rest.trim_start();
            if rest.is_empty() {
                break;
            }
            if !rest.starts_with('(') {
                return Err(PermError::Malformed(format!(
                    "expected '(' at {rest:?}"
                )));
            }
            let close = rest
                .find(')')
                .ok_or_else(|| PermError::Malformed("missing ')'".into()))?;
            let body = &rest[1..close];
            rest = &rest[close + 1..];
            let mut cycle = Vec::new();
            for tok in body.split_whitespace() {
                let p: usize = tok
                    .parse()
                    .map_err(|_| PermError::Malformed(format!("bad position {tok:?}")))?;
                if p < 1 || p > n {
                    return Err(PermError::PositionOutOfRange(p, n));
                }
                if used[p - 1] {
                    return Err(PermError::RepeatedPosition(p));
                }
                used[p - 1] = true;
                cycle.push(p - 1);
            }
            if cycle.len() < 2 {
                return Err(PermError::Malformed(
                    "cycle must list at least two positions".into(),
                ));
            }
            for w in 0..cycle.len() {
                map[cycle[w]] = cycle[(w + 1) % cycle.len()];
            }
        }
        Ok(Permutation { map })
    }

    /// Canonical cycle-notation rendering.
    pub fn to_cycles(&self) -> String {
        if self.is_identity() {
            return "id".to_string();
        }
        let n = self.map.len();
        let mut seen = vec![false; n];
        let mut out = String::new();
        for start in 0..n {
            if seen[start] || self.map[start] == start {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut cur = self.map[start];
            while cur != start {
                seen[cur] = true;
                cycle.push(cur);
                cur = self.map[cur];
            }
            out.push('(');
            out.push_str(
                &cycle
                    .iter()
                    .map(|&p| (p + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            out.push(')');
        }
        out
    }

    /// Destination convention: result[sigma(i)] = seq[i]; orientations
    /// travel with the cards.
    pub fn apply(&self, seq: &Sequence) -> Result<Sequence, PermError> {
        if seq.len() != self.len() {
            return Err(PermError::SizeMismatch(self.len(), seq.len()));
        }
        let mut slots = seq.slots().to_vec();
        for (i, &d) in self.map.iter().enumerate() {
            slots[d] = seq.slots()[i];
        }
        Ok(Sequence::from_slots(slots))
    }

    /// r(i) = q(p(i)): apply `self` first, then `other`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, PermError> {
        if self.len() != other.len() {
            return Err(PermError::SizeMismatch(self.len(), other.len()));
        }
        let map = self.map.iter().map(|&d| other.map[d]).collect();
        Ok(Permutation { map })
    }

    pub fn inverse(&self) -> Permutation {
        let mut map = vec![0; self.map.len()];
        for (i, &d) in self.map.iter().enumerate() {
            map[d] = i;
        }
        Permutation { map }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycles())
    }
}

/// Smallest subgroup containing `perms`, by breadth-first closure.
/// Group orders in this domain are tiny (at most 5! = 120), so no
/// Schreier-Sims machinery is needed.
pub fn generated_group(perms: &BTreeSet<Permutation>) -> BTreeSet<Permutation> {
    let mut group: BTreeSet<Permutation> = BTreeSet::new();
    if perms.is_empty() {
        return group;
    }
    let n = perms.iter().next().unwrap().len();
    let mut queue: VecDeque<Permutation> = VecDeque::new();
    let id = Permutation::identity(n);
    group.insert(id.clone());
    queue.push_back(id);
    for p in perms {
        if group.insert(p.clone()) {
            queue.push_back(p.clone());
        }
    }
    while let Some(p) = queue.pop_front() {
        for g in perms {
            let q = p.compose(g).expect("generators share n");
            if group.insert(q.clone()) {
                queue.push_back(q);
            }
        }
        let inv = p.inverse();
        if group.insert(inv.clone()) {
            queue.push_back(inv);
        }
    }
    group
}

/// True iff the set contains the identity and is closed under
/// composition; for a finite set that makes it a subgroup.
pub fn is_closed(perms: &BTreeSet<Permutation>) -> bool {
    if perms.is_empty() {
        return false;
    }
    let n = perms.iter().next().unwrap().len();
    if !perms.contains(&Permutation::identity(n)) {
        return false;
    }
    for p in perms {
        for q in perms {
            match p.compose(q) {
                Ok(r) => {
                    if !perms.contains(&r) {
                        return false;
                    }
                }
                Err(_) => return false,
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_faces;

    fn perm(text: &str, n: usize) -> Permutation {
        Permutation::parse_cycles(text, n).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(perm("id", 4).mapping(), vec![1, 2, 3, 4]);
        // first shuffle of the four-card protocol
        assert_eq!(perm("(1 3)(2 4)", 4).mapping(), vec![3, 4, 1, 2]);
        // starred shuffle of the five-card protocol
        assert_eq!(perm("(1 2)(3 5 4)", 5).mapping(), vec![2, 1, 5, 3, 4]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Permutation::parse_cycles("(1 2", 4),
            Err(PermError::Malformed(_))
        ));
        assert_eq!(
            Permutation::parse_cycles("(1 2)(2 3)", 4),
            Err(PermError::RepeatedPosition(2))
        );
        assert_eq!(
            Permutation::parse_cycles("(1 5)", 4),
            Err(PermError::PositionOutOfRange(5, 4))
        );
        assert!(Permutation::parse_cycles("(1)", 4).is_err());
    }

    #[test]
    fn cycle_roundtrip() {
        for text in ["id", "(1 3)(2 4)", "(1 2 3 4)", "(1 2)(3 5 4)"] {
            let n = 5;
            let p = perm(text, n);
            assert_eq!(perm(&p.to_cycles(), n), p);
        }
    }

    #[test]
    fn apply_destination_convention() {
        // Figure 1 edge (perm,(2 3 4)): CHHC -> CCHH
        let seq = Sequence::face_down(parse_faces("CHHC").unwrap());
        let got = perm("(2 3 4)", 4).apply(&seq).unwrap();
        assert_eq!(got.faces_string(), "CCHH");
        // Figure 2 shuffle into box c3: HCCHH under (1 2)(3 5 4) -> CHHHC
        let seq = Sequence::face_down(parse_faces("HCCHH").unwrap());
        let got = perm("(1 2)(3 5 4)", 5).apply(&seq).unwrap();
        assert_eq!(got.faces_string(), "CHHHC");
        // identity
        let seq = Sequence::face_down(parse_faces("CHHC").unwrap());
        assert_eq!(perm("id", 4).apply(&seq).unwrap(), seq);
        // size mismatch
        assert!(perm("id", 5).apply(&seq).is_err());
    }

    #[test]
    fn compose_examples() {
        // (1 2 3 4) twice = (1 3)(2 4); the witness that {id,(1 3),(1 2 3 4)}
        // is not closed
        let c4 = perm("(1 2 3 4)", 4);
        assert_eq!(c4.compose(&c4).unwrap(), perm("(1 3)(2 4)", 4));
        // p composed with its inverse is the identity
        let p = perm("(1 2)(3 5 4)", 5);
        assert!(p.compose(&p.inverse()).unwrap().is_identity());
        // disjoint cycles commute; verify by brute-force application to
        // every face sequence of length 4
        let a = perm("(1 3)", 4);
        let b = perm("(2 4)", 4);
        let ab = a.compose(&b).unwrap();
        assert_eq!(ab, perm("(1 3)(2 4)", 4));
        assert_eq!(ab, b.compose(&a).unwrap());
        for seq in all_face_sequences(4) {
            let via_ab = ab.apply(&seq).unwrap();
            let via_steps = b.apply(&a.apply(&seq).unwrap()).unwrap();
            assert_eq!(via_ab, via_steps);
        }
    }

    fn all_face_sequences(n: usize) -> Vec<Sequence> {
        use crate::cards::Face;
        (0..1u32 << n)
            .map(|bits| {
                Sequence::face_down(
                    (0..n)
                        .map(|i| {
                            if bits >> i & 1 == 1 {
                                Face::Heart
                            } else {
                                Face::Club
                            }
                        })
                        .collect(),
                )
            })
            .collect()
    }

    #[test]
    fn closure_examples() {
        let set = |texts: &[&str], n: usize| -> BTreeSet<Permutation> {
            texts.iter().map(|t| perm(t, n)).collect()
        };
        // self-inverse involution plus identity
        assert!(is_closed(&set(&["id", "(1 3)(2 4)"], 4)));
        // (1 2 3 4)^2 = (1 3)(2 4) is not in the set
        assert!(!is_closed(&set(&["id", "(1 3)", "(1 2 3 4)"], 4)));
        // cyclic group of order 5
        assert!(is_closed(&set(
            &["id", "(1 2 3 4 5)", "(1 3 5 2 4)", "(1 4 2 5 3)", "(1 5 4 3 2)"],
            5
        )));
    }

    #[test]
    fn generated_group_examples() {
        let one: BTreeSet<_> = [perm("id", 3)].into_iter().collect();
        assert_eq!(generated_group(&one).len(), 1);
        let c4: BTreeSet<_> = [perm("(1 2 3 4)", 4)].into_iter().collect();
        let g = generated_group(&c4);
        assert_eq!(g.len(), 4);
        // {id, (1 3), (1 2 3 4)} generates the dihedral group of order 8
        let d4: BTreeSet<_> = [perm("id", 4), perm("(1 3)", 4), perm("(1 2 3 4)", 4)]
            .into_iter()
            .collect();
        assert_eq!(generated_group(&d4).len(), 8);
    }

    #[test]
    fn closure_matches_generated_group_cardinality() {
        let sets: Vec<BTreeSet<Permutation>> = vec![
            [perm("id", 4), perm("(1 3)(2 4)", 4)].into_iter().collect(),
            [perm("id", 4), perm("(1 3)", 4), perm("(1 2 3 4)", 4)]
                .into_iter()
                .collect(),
            [perm("id", 5), perm("(1 3)", 5), perm("(1 2)(3 5 4)", 5)]
                .into_iter()
                .collect(),
        ];
        for s in sets {
            assert_eq!(is_closed(&s), generated_group(&s).len() == s.len());
        }
    }
}
