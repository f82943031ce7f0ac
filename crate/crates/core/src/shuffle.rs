//! Shuffle specifications: a finite set of permutations with a rational
//! probability each, the pair (Pi, F) of the formal model.

use std::collections::BTreeSet;

use num_traits::Zero;
use thiserror::Error;

use crate::perm::{generated_group, is_closed, Permutation};
use crate::rational::{one, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShuffleError {
    #[error("shuffle has no permutations")]
    Empty,
    #[error("permutations act on different deck sizes")]
    MixedSizes,
    #[error("duplicate permutation {0}")]
    Duplicate(String),
    #[error("weight must be positive for {0}")]
    NonPositiveWeight(String),
    #[error("weights must sum to 1, got {0}")]
    BadWeightSum(String),
}

/// A randomized rearrangement of the deck, unobservable to the players.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShuffleSpec {
    entries: Vec<(Permutation, Rat)>,
}

impl ShuffleSpec {
    /// Build and validate: common deck size, no duplicates, positive
    /// weights summing exactly to 1.
    pub fn new(entries: Vec<(Permutation, Rat)>) -> Result<ShuffleSpec, ShuffleError> {
        let spec = ShuffleSpec { entries };
        spec.check()?;
        Ok(spec)
    }

    /// Build without validating; the DSL parser uses this so that weight
    /// errors surface as diagnostics rather than parse failures.
    pub fn new_unchecked(entries: Vec<(Permutation, Rat)>) -> ShuffleSpec {
        ShuffleSpec { entries }
    }

    /// Uniform shuffle over the given permutations.
    pub fn uniform(perms: Vec<Permutation>) -> Result<ShuffleSpec, ShuffleError> {
        if perms.is_empty() {
            return Err(ShuffleError::Empty);
        }
        let w = one() / Rat::from_integer((perms.len() as i64).into());
        ShuffleSpec::new(perms.into_iter().map(|p| (p, w.clone())).collect())
    }

    pub fn check(&self) -> Result<(), ShuffleError> {
        if self.entries.is_empty() {
            return Err(ShuffleError::Empty);
        }
        let n = self.entries[0].0.len();
        let mut seen = BTreeSet::new();
        let mut sum = Rat::zero();
        for (p, w) in &self.entries {
            if p.len() != n {
                return Err(ShuffleError::MixedSizes);
            }
            if !seen.insert(p.clone()) {
                return Err(ShuffleError::Duplicate(p.to_string()));
            }
            if w <= &Rat::zero() {
                return Err(ShuffleError::NonPositiveWeight(p.to_string()));
            }
            sum += w;
        }
        if sum != one() {
            return Err(ShuffleError::BadWeightSum(crate::rational::fmt_rat(&sum)));
        }
        Ok(())
    }

    pub fn entries(&self) -> &[(Permutation, Rat)] {
        &self.entries
    }

    pub fn deck_size(&self) -> usize {
        self.entries.first().map(|(p, _)| p.len()).unwrap_or(0)
    }

    pub fn perms(&self) -> BTreeSet<Permutation> {
        self.entries.iter().map(|(p, _)| p.clone()).collect()
    }

    /// True iff all weights are equal.
    pub fn is_uniform(&self) -> bool {
        let w = &self.entries[0].1;
        self.entries.iter().all(|(_, x)| x == w)
    }

    /// True iff the permutation set is a subgroup of the symmetric group.
    pub fn is_closed(&self) -> bool {
        is_closed(&self.perms())
    }

    /// Order of the subgroup generated by the permutation set.
    pub fn group_order(&self) -> usize {
        generated_group(&self.perms()).len()
    }
}

impl std::fmt::Display for ShuffleSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_uniform() {
            write!(f, "uniform {{ ")?;
            for (i, (p, _)) in self.entries.iter().enumerate() {
                if i > 0 {
                    write!(f, " ; ")?;
                }
                write!(f, "{p}")?;
            }
        } else {
            write!(f, "dist {{ ")?;
            for (i, (p, w)) in self.entries.iter().enumerate() {
                if i > 0 {
                    write!(f, " ; ")?;
                }
                write!(f, "{p}: {}", crate::rational::fmt_rat(w))?;
            }
        }
        write!(f, " }}")
    }
}
