//! Flattened program form shared by the symbolic engine and the
//! concrete simulator.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::dsl::ast::{Action, Protocol};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ControlError {
    #[error("no branch arm matches visible sequence {0:?}")]
    NoMatchingArm(String),
    #[error("control fell off the end of the program")]
    OffEnd,
}

/// The protocol's blocks flattened into one instruction list. Blocks fall
/// through into their successor; labels become instruction indices.
#[derive(Clone, Debug)]
pub struct Program {
    pub instrs: Vec<Action>,
    pub starts: BTreeMap<String, usize>,
    /// Instruction indices that are the entry points of goto targets.
    /// Entering one of these counts as a "branch pass".
    pub pass_points: BTreeSet<usize>,
}

impl Program {
    pub fn flatten(ast: &Protocol) -> Program {
        let mut instrs = Vec::new();
        let mut starts = BTreeMap::new();
        for block in &ast.blocks {
            starts.insert(block.label.clone(), instrs.len());
            for (action, _) in &block.actions {
                instrs.push(action.clone());
            }
        }
        let mut pass_points = BTreeSet::new();
        for action in &instrs {
            if let Action::Goto(label) = action {
                pass_points.insert(starts[label]);
            }
        }
        Program {
            instrs,
            starts,
            pass_points,
        }
    }

    /// Resolve control flow starting at `pc`: follow gotos, and route
    /// branches using the given visible sequence. Returns the index of
    /// the next box-transforming or terminal instruction, together with
    /// every pass point crossed on the way (including the destination).
    pub fn resolve(
        &self,
        mut pc: usize,
        visible: &str,
    ) -> Result<(usize, Vec<usize>), ControlError> {
        let mut crossed = Vec::new();
        for _ in 0..=self.instrs.len() {
            if pc >= self.instrs.len() {
                return Err(ControlError::OffEnd);
            }
            if self.pass_points.contains(&pc) {
                crossed.push(pc);
            }
            match &self.instrs[pc] {
                Action::Goto(label) => pc = self.starts[label],
                Action::Branch(arms) => {
                    let arm = arms
                        .iter()
                        .find(|(pat, _)| pat.matches_visible(visible))
                        .ok_or_else(|| ControlError::NoMatchingArm(visible.to_string()))?;
                    pc = self.starts[&arm.1];
                }
                _ => return Ok((pc, crossed)),
            }
        }
        // only reachable via a pure goto cycle
        Err(ControlError::OffEnd)
    }
}
