//! Symbolic executor: builds the KWH-tree of a protocol by propagating
//! sequence-to-polynomial boxes through the protocol's actions.

pub mod kwh_box;
pub mod program;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::dsl::ast::{Action, Protocol, VisiblePattern};
use crate::perm::Permutation;
use crate::poly::ProbPoly;
use crate::rational::{fmt_rat, one, Rat};
use crate::shuffle::ShuffleSpec;

pub use kwh_box::{BoxError, KwhBox};
pub use program::{ControlError, Program};

pub const DEFAULT_NODE_BUDGET: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    /// About to execute a shuffle, perm, or turn.
    Internal,
    /// Terminal commitment output (result, x, y).
    Result { x: usize, y: usize },
    /// Terminal open-output classification.
    Output {
        arms: Vec<(VisiblePattern, u8)>,
        default: u8,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub kwh_box: KwhBox,
    /// Program counter: index of the instruction this node is about to
    /// execute. Part of state identity, so the same box contents at a
    /// different program point are distinct nodes.
    pub pc: usize,
    pub kind: NodeKind,
    /// True if pc is the entry point of a goto target; visits to such
    /// nodes are the "branch passes" runtime metric.
    pub pass_point: bool,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        !matches!(self.kind, NodeKind::Internal)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EdgeLabel {
    Shuffle(ShuffleSpec),
    Perm(Permutation),
    /// Single-outcome turn (a re-hide, or a reveal with only one
    /// possible observation).
    Turn { positions: Vec<usize> },
    /// One probabilistic outcome of a revealing turn.
    TurnBranch {
        positions: Vec<usize>,
        pattern: String,
        prob: Rat,
    },
}

impl EdgeLabel {
    pub fn prob(&self) -> Rat {
        match self {
            EdgeLabel::TurnBranch { prob, .. } => prob.clone(),
            _ => one(),
        }
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Shuffle(spec) => {
                let perms: Vec<String> =
                    spec.entries().iter().map(|(p, _)| p.to_string()).collect();
                if spec.is_uniform() {
                    write!(f, "(shuffle, {{{}}})", perms.join(", "))
                } else {
                    let entries: Vec<String> = spec
                        .entries()
                        .iter()
                        .map(|(p, w)| format!("{p}: {}", fmt_rat(w)))
                        .collect();
                    write!(f, "(shuffle, {{{}}})", entries.join(", "))
                }
            }
            EdgeLabel::Perm(p) => write!(f, "(perm, {p})"),
            EdgeLabel::Turn { positions } => {
                let ps: Vec<String> = positions.iter().map(|p| p.to_string()).collect();
                write!(f, "(turn, {{{}}})", ps.join(", "))
            }
            EdgeLabel::TurnBranch {
                positions,
                pattern,
                prob,
            } => {
                let ps: Vec<String> = positions.iter().map(|p| p.to_string()).collect();
                write!(
                    f,
                    "(turn, {{{}}}) {pattern} Pr = {}",
                    ps.join(", "),
                    fmt_rat(prob)
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub label: EdgeLabel,
}

/// Security-leak witness: the turn outcome whose observation probability
/// depends on the inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct LeakWitness {
    pub node: NodeId,
    pub positions: Vec<usize>,
    pub pattern: String,
    pub poly: ProbPoly,
}

impl fmt::Display for LeakWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.positions.iter().map(|p| p.to_string()).collect();
        write!(
            f,
            "turning {{{}}} reveals {} with input-dependent probability {}",
            ps.join(", "),
            self.pattern,
            self.poly
        )
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    /// A turn outcome's probability depends on the inputs. Carries the
    /// partial tree built so far, truncated at the leaking node.
    #[error("security leak: {witness}")]
    Leak {
        witness: LeakWitness,
        partial: KwhTree,
    },
    /// The node budget was exhausted without the state space closing.
    #[error("node budget of {budget} exhausted without convergence ({frontier} states pending)")]
    BudgetExhausted {
        budget: usize,
        frontier: usize,
        partial: KwhTree,
    },
    #[error("at node {node}: {source}")]
    Box_ {
        node: usize,
        #[source]
        source: BoxError,
    },
    #[error("{0}")]
    Control(#[from] ControlError),
}

/// The verification object: boxes joined by action edges and
/// probabilistic turn branches, with cycle-closing edges where the
/// protocol loops.
#[derive(Clone, Debug, PartialEq)]
pub struct KwhTree {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl KwhTree {
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn out_edges(&self, id: NodeId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == id)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn result_leaves(&self) -> Vec<&Node> {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Result { .. }))
            .collect()
    }

    /// Edges that close a cycle: targets an ancestor on the DFS stack.
    pub fn back_edges(&self) -> Vec<&Edge> {
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }
        let mut color = vec![Color::White; self.nodes.len()];
        let mut back = Vec::new();
        // iterative DFS with explicit edge cursor
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        color[0] = Color::Gray;
        while !stack.is_empty() {
            let (node, cursor) = *stack.last().unwrap();
            let outs: Vec<usize> = self
                .edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.from.0 == node)
                .map(|(i, _)| i)
                .collect();
            if cursor < outs.len() {
                let edge_idx = outs[cursor];
                stack.last_mut().unwrap().1 += 1;
                let to = self.edges[edge_idx].to.0;
                match color[to] {
                    Color::White => {
                        color[to] = Color::Gray;
                        stack.push((to, 0));
                    }
                    Color::Gray => back.push(edge_idx),
                    Color::Black => {}
                }
            } else {
                color[node] = Color::Black;
                stack.pop();
            }
        }
        back.sort_unstable();
        back.into_iter().map(|i| &self.edges[i]).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        self.back_edges().is_empty()
    }

    /// Edges that re-enter a loop: the edge lies on a cycle and its
    /// target is a goto-target node. These are the "crossing" arrows of
    /// a drawn KWH-tree, one per goto that actually loops.
    pub fn cycle_reentry_edges(&self) -> Vec<&Edge> {
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            succ[e.from.0].push(e.to.0);
        }
        let reaches = |from: usize, target: usize| -> bool {
            let mut seen = vec![false; self.nodes.len()];
            let mut stack = vec![from];
            seen[from] = true;
            while let Some(n) = stack.pop() {
                if n == target {
                    return true;
                }
                for &m in &succ[n] {
                    if !seen[m] {
                        seen[m] = true;
                        stack.push(m);
                    }
                }
            }
            false
        };
        self.edges
            .iter()
            .filter(|e| self.nodes[e.to.0].pass_point && reaches(e.to.0, e.from.0))
            .collect()
    }

    /// Every node's row polynomials sum to X00+X01+X10+X11 exactly.
    pub fn conservation_holds(&self) -> bool {
        self.nodes.iter().all(|n| n.kwh_box.conservation_holds())
    }
}

struct Builder {
    program: Program,
    budget: usize,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    visited: HashMap<(KwhBox, usize), NodeId>,
    queue: VecDeque<NodeId>,
}

impl Builder {
    fn intern(&mut self, kwh_box: KwhBox, pc: usize) -> NodeId {
        if let Some(&id) = self.visited.get(&(kwh_box.clone(), pc)) {
            return id;
        }
        let id = NodeId(self.nodes.len());
        let kind = match &self.program.instrs[pc] {
            Action::Result { x, y } => NodeKind::Result { x: *x, y: *y },
            Action::Output { arms, default } => NodeKind::Output {
                arms: arms.clone(),
                default: *default,
            },
            _ => NodeKind::Internal,
        };
        self.nodes.push(Node {
            id,
            kwh_box: kwh_box.clone(),
            pc,
            kind,
            pass_point: self.program.pass_points.contains(&pc),
        });
        self.visited.insert((kwh_box, pc), id);
        self.queue.push_back(id);
        id
    }

    fn partial(self) -> KwhTree {
        KwhTree {
            nodes: self.nodes,
            edges: self.edges,
        }
    }
}

/// Worklist exploration from the initial box following the protocol's
/// control flow. When an action produces a (box, program point) pair that
/// was already visited, a cycle-closing edge is added instead of
/// re-expanding; this is what terminates the looping protocols.
pub fn build_kwh_tree(ast: &Protocol, budget: usize) -> Result<KwhTree, BuildError> {
    let program = Program::flatten(ast);
    let root_box = KwhBox::initial(ast);
    let (root_pc, _) = program.resolve(0, &root_box.visible_string())?;
    let mut b = Builder {
        program,
        budget,
        nodes: Vec::new(),
        edges: Vec::new(),
        visited: HashMap::new(),
        queue: VecDeque::new(),
    };
    b.intern(root_box, root_pc);

    while let Some(id) = b.queue.pop_front() {
        if b.nodes.len() > b.budget {
            let frontier = b.queue.len() + 1;
            let budget = b.budget;
            return Err(BuildError::BudgetExhausted {
                budget,
                frontier,
                partial: b.partial(),
            });
        }
        let node = b.nodes[id.0].clone();
        if node.is_leaf() {
            continue;
        }
        let action = b.program.instrs[node.pc].clone();
        match action {
            Action::Shuffle(spec) => {
                let next = node
                    .kwh_box
                    .apply_shuffle(&spec)
                    .map_err(|source| BuildError::Box_ {
                        node: id.0,
                        source,
                    })?;
                let (pc, _) = b.program.resolve(node.pc + 1, &next.visible_string())?;
                let to = b.intern(next, pc);
                b.edges.push(Edge {
                    from: id,
                    to,
                    label: EdgeLabel::Shuffle(spec),
                });
            }
            Action::Perm(perm) => {
                let next = node
                    .kwh_box
                    .apply_perm(&perm)
                    .map_err(|source| BuildError::Box_ {
                        node: id.0,
                        source,
                    })?;
                let (pc, _) = b.program.resolve(node.pc + 1, &next.visible_string())?;
                let to = b.intern(next, pc);
                b.edges.push(Edge {
                    from: id,
                    to,
                    label: EdgeLabel::Perm(perm),
                });
            }
            Action::Turn(position_set) => {
                let positions: Vec<usize> = position_set.iter().copied().collect();
                let outcomes = match node.kwh_box.apply_turn(&positions) {
                    Ok(o) => o,
                    Err(BoxError::Leak { pattern, poly }) => {
                        let witness = LeakWitness {
                            node: id,
                            positions,
                            pattern,
                            poly,
                        };
                        return Err(BuildError::Leak {
                            witness,
                            partial: b.partial(),
                        });
                    }
                    Err(source) => {
                        return Err(BuildError::Box_ {
                            node: id.0,
                            source,
                        })
                    }
                };
                let branching = outcomes.len() > 1;
                for (pattern, prob, next) in outcomes {
                    let (pc, _) = b.program.resolve(node.pc + 1, &next.visible_string())?;
                    let to = b.intern(next, pc);
                    let label = if branching {
                        EdgeLabel::TurnBranch {
                            positions: positions.clone(),
                            pattern,
                            prob,
                        }
                    } else {
                        EdgeLabel::Turn {
                            positions: positions.clone(),
                        }
                    };
                    b.edges.push(Edge {
                        from: id,
                        to,
                        label,
                    });
                }
            }
            Action::Result { .. } | Action::Output { .. } => unreachable!("leaf handled above"),
            Action::Goto(_) | Action::Branch(_) => {
                unreachable!("control actions are resolved away")
            }
        }
    }
    Ok(KwhTree {
        nodes: b.nodes,
        edges: b.edges,
    })
}
