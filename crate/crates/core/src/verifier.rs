//! Turns a KWH-tree into verdicts: security, correctness, termination
//! class, exact expected runtime, restart-freeness, and per-shuffle
//! uniform/closed classification.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::cards::Face;
use crate::dsl::ast::{Mode, Protocol};
use crate::dsl::validate::{validate, Severity};
use crate::engine::{
    build_kwh_tree, BuildError, EdgeLabel, KwhTree, Node, NodeKind, DEFAULT_NODE_BUDGET,
};
use crate::markov::{expected_visits, MarkovError};
use crate::rational::{zero, Rat};
use crate::shuffle::ShuffleSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub witness: Option<String>,
}

impl Verdict {
    pub fn pass() -> Verdict {
        Verdict {
            pass: true,
            witness: None,
        }
    }

    pub fn fail(witness: impl Into<String>) -> Verdict {
        Verdict {
            pass: false,
            witness: Some(witness.into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Termination {
    /// The KWH-tree is acyclic: guaranteed to terminate in a bounded
    /// number of steps.
    Finite,
    /// Cycles exist but every one has a positive-probability exit;
    /// runtime is random with finite expectation.
    LasVegas { cycle_edges: usize },
    /// A cycle with no escape, or the state space never closed.
    NonConvergent,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Finite => f.write_str("finite"),
            Termination::LasVegas { .. } => f.write_str("las_vegas"),
            Termination::NonConvergent => f.write_str("non_convergent"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    /// Expected number of executed turn actions (reveals and re-hides).
    TurnActions,
    /// Expected number of executed shuffle actions.
    ShuffleActions,
    /// Expected number of visits to goto-target boxes, the protocol's
    /// "passes" through its looping branches.
    BranchPasses,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::TurnActions, Metric::ShuffleActions, Metric::BranchPasses];

    pub fn key(self) -> &'static str {
        match self {
            Metric::TurnActions => "turn_actions",
            Metric::ShuffleActions => "shuffle_actions",
            Metric::BranchPasses => "branch_passes",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShuffleReport {
    pub spec: ShuffleSpec,
    pub uniform: bool,
    pub closed: bool,
    pub group_order: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub protocol: String,
    pub cards: usize,
    pub secure: Verdict,
    pub correct: Verdict,
    pub termination: Option<Termination>,
    pub expected: Option<BTreeMap<Metric, Rat>>,
    pub restart_free: bool,
    pub shuffles: Vec<ShuffleReport>,
    /// Protocol-level summary: all shuffles uniform / all closed.
    pub uniform: bool,
    pub closed: bool,
}

impl VerificationReport {
    pub fn ok(&self) -> bool {
        self.secure.pass && self.correct.pass
    }

    pub fn witness(&self) -> Option<&str> {
        self.secure
            .witness
            .as_deref()
            .or(self.correct.witness.as_deref())
    }
}

/// PASS iff no turn leaked during the build and, in open-output mode,
/// every terminal pattern's polynomial is a constant multiple of the
/// X0-form or the X1-form (the transcript may depend on the output bit
/// a AND b, but on nothing else).
pub fn check_security(tree: &KwhTree, mode: Mode) -> Verdict {
    // committed mode: per-turn constancy was enforced during the build,
    // so reaching this point already certifies the transcript
    // distribution is input-independent
    if mode == Mode::OpenOutput {
        for node in tree.leaves() {
            if let NodeKind::Output { .. } = node.kind {
                for (seq, poly) in node.kwh_box.rows() {
                    if poly.x0_multiple().is_none() && poly.x1_multiple().is_none() {
                        return Verdict::fail(format!(
                            "revealed sequence {} has polynomial {} (neither an X0- nor an X1-multiple)",
                            seq.faces_string(),
                            poly
                        ));
                    }
                }
            }
        }
    }
    Verdict::pass()
}

/// Committed mode: at every result leaf the output cards encode the AND
/// of the inputs. Open-output mode: every pattern classified 1 is
/// supported on X11 only, every pattern classified 0 on X00/X01/X10.
pub fn check_correctness(tree: &KwhTree, mode: Mode) -> Verdict {
    for node in tree.leaves() {
        match (&node.kind, mode) {
            (NodeKind::Result { x, y }, Mode::Committed) => {
                for (seq, poly) in node.kwh_box.rows() {
                    let pair = (seq.face(*x), seq.face(*y));
                    let zero_support = !poly.coeff(crate::poly::Symbol::X00).is_zero()
                        || !poly.coeff(crate::poly::Symbol::X01).is_zero()
                        || !poly.coeff(crate::poly::Symbol::X10).is_zero();
                    let one_support = !poly.coeff(crate::poly::Symbol::X11).is_zero();
                    if zero_support && pair != (Face::Club, Face::Heart) {
                        return Verdict::fail(format!(
                            "row {} {} at (result, {x}, {y}) outputs {}{} for an input with a AND b = 0",
                            seq.faces_string(),
                            poly,
                            pair.0,
                            pair.1
                        ));
                    }
                    if one_support && pair != (Face::Heart, Face::Club) {
                        return Verdict::fail(format!(
                            "row {} {} at (result, {x}, {y}) outputs {}{} for an input with a AND b = 1",
                            seq.faces_string(),
                            poly,
                            pair.0,
                            pair.1
                        ));
                    }
                }
            }
            (NodeKind::Output { arms, default }, Mode::OpenOutput) => {
                for (seq, poly) in node.kwh_box.rows() {
                    let faces = seq.faces_string();
                    let bit = arms
                        .iter()
                        .find(|(pat, _)| pat.matches_visible(&faces))
                        .map(|(_, b)| *b)
                        .unwrap_or(*default);
                    let supported_on_one = poly.x1_multiple().is_some();
                    let supported_on_zero = poly.x0_multiple().is_some()
                        || (poly.coeff(crate::poly::Symbol::X11).is_zero() && !poly.is_zero());
                    let ok = if bit == 1 {
                        supported_on_one
                    } else {
                        supported_on_zero
                    };
                    if !ok {
                        return Verdict::fail(format!(
                            "revealed sequence {faces} classified {bit} has polynomial {poly}"
                        ));
                    }
                }
            }
            _ => {
                return Verdict::fail(format!(
                    "terminal action does not match protocol mode at node {}",
                    node.id.0
                ))
            }
        }
    }
    if tree.leaves().next().is_none() {
        return Verdict::fail("protocol has no terminal nodes");
    }
    Verdict::pass()
}

/// DFS cycle detection; Las Vegas additionally requires every node to
/// reach an absorbing leaf with positive probability.
pub fn check_termination(tree: &KwhTree) -> Termination {
    if tree.is_acyclic() {
        return Termination::Finite;
    }
    match expected_visits(tree) {
        Ok(_) => Termination::LasVegas {
            cycle_edges: tree.cycle_reentry_edges().len(),
        },
        Err(_) => Termination::NonConvergent,
    }
}

fn is_turn_node(tree: &KwhTree, node: &Node) -> bool {
    tree.out_edges(node.id)
        .any(|e| matches!(e.label, EdgeLabel::Turn { .. } | EdgeLabel::TurnBranch { .. }))
}

fn is_shuffle_node(tree: &KwhTree, node: &Node) -> bool {
    tree.out_edges(node.id)
        .any(|e| matches!(e.label, EdgeLabel::Shuffle(_)))
}

/// Exact expected value of the chosen runtime metric, via the absorbing
/// Markov chain over the tree's nodes.
pub fn expected_runtime(tree: &KwhTree, metric: Metric) -> Result<Rat, MarkovError> {
    let visits = expected_visits(tree)?;
    let mut total = zero();
    for node in &tree.nodes {
        let counts = match metric {
            Metric::TurnActions => is_turn_node(tree, node),
            Metric::ShuffleActions => is_shuffle_node(tree, node),
            Metric::BranchPasses => node.pass_point,
        };
        if counts {
            total += visits[node.id.0].clone();
        }
    }
    Ok(total)
}

/// The action vocabulary has no restart or recommit action, so every
/// protocol expressible in the language places its commitments exactly
/// once. Recorded explicitly in the report.
pub fn check_restart_free(_ast: &Protocol) -> bool {
    true
}

/// Per-shuffle uniform/closed classification, Table-1 style.
pub fn analyze_shuffles(ast: &Protocol) -> Vec<ShuffleReport> {
    ast.shuffles()
        .into_iter()
        .map(|spec| ShuffleReport {
            spec: spec.clone(),
            uniform: spec.is_uniform(),
            closed: spec.is_closed(),
            group_order: spec.group_order(),
        })
        .collect()
}

/// Full parse-validate-build-verify pipeline over an already-parsed AST.
pub fn full_report(ast: &Protocol) -> VerificationReport {
    full_report_with_budget(ast, DEFAULT_NODE_BUDGET)
}

pub fn full_report_with_budget(ast: &Protocol, budget: usize) -> VerificationReport {
    let shuffles = analyze_shuffles(ast);
    let uniform = shuffles.iter().all(|s| s.uniform);
    let closed = shuffles.iter().all(|s| s.closed);
    let restart_free = check_restart_free(ast);
    let base = |secure: Verdict, correct: Verdict, termination: Option<Termination>| {
        VerificationReport {
            protocol: ast.name.clone(),
            cards: ast.deck_size(),
            secure,
            correct,
            termination,
            expected: None,
            restart_free,
            shuffles: shuffles.clone(),
            uniform,
            closed,
        }
    };

    let errors: Vec<String> = validate(ast)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| d.to_string())
        .collect();
    if !errors.is_empty() {
        let witness = format!("validation failed: {}", errors.join("; "));
        return base(Verdict::fail(witness.clone()), Verdict::fail(witness), None);
    }

    let tree = match build_kwh_tree(ast, budget) {
        Ok(tree) => tree,
        Err(BuildError::Leak { witness, .. }) => {
            return base(
                Verdict::fail(witness.to_string()),
                Verdict::fail("not evaluated: tree construction stopped at a security leak"),
                None,
            );
        }
        Err(e @ BuildError::BudgetExhausted { .. }) => {
            return base(
                Verdict::fail(e.to_string()),
                Verdict::fail(e.to_string()),
                Some(Termination::NonConvergent),
            );
        }
        Err(e) => {
            return base(Verdict::fail(e.to_string()), Verdict::fail(e.to_string()), None);
        }
    };

    let secure = check_security(&tree, ast.mode);
    let correct = check_correctness(&tree, ast.mode);
    let termination = check_termination(&tree);
    let expected = match termination {
        Termination::NonConvergent => None,
        _ => {
            let mut map = BTreeMap::new();
            for metric in Metric::ALL {
                if let Ok(v) = expected_runtime(&tree, metric) {
                    map.insert(metric, v);
                }
            }
            Some(map)
        }
    };

    let mut report = base(secure, correct, Some(termination));
    report.expected = expected;
    report
}
