//! Exact absorbing-Markov-chain analysis of a KWH-tree.
//!
//! The tree's nodes form a finite Markov chain: internal nodes move to
//! their successors with the edge probabilities, leaves absorb. Expected
//! visit counts come from solving the fundamental linear system with
//! exact rationals via Gaussian elimination (pivoting by first nonzero;
//! the field is exact, so there is no stability concern).

use std::collections::HashSet;

use num_traits::Zero;
use thiserror::Error;

use crate::engine::KwhTree;
use crate::rational::{one, zero, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MarkovError {
    #[error("node {0} cannot reach an absorbing leaf; the chain diverges")]
    Divergent(usize),
    #[error("tree has no leaves")]
    NoLeaves,
    #[error("singular transition system")]
    Singular,
}

/// Solve A x = b over the rationals. Returns None when A is singular.
pub fn solve_linear(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for c in col..n {
                let sub = &factor * &a[col][c];
                a[r][c] -= sub;
            }
            let sub = &factor * &b[col];
            b[r] -= sub;
        }
    }
    Some(
        (0..n)
            .map(|i| &b[i] / &a[i][i])
            .collect(),
    )
}

/// Expected number of visits to every node, starting from the root.
/// Leaves get their absorption probabilities (which sum to 1).
pub fn expected_visits(tree: &KwhTree) -> Result<Vec<Rat>, MarkovError> {
    let n = tree.nodes.len();
    if !tree.nodes.iter().any(|nd| nd.is_leaf()) {
        return Err(MarkovError::NoLeaves);
    }

    // every node must reach a leaf (all edge probabilities are positive,
    // so reachability is absorption with probability 1)
    let mut reaches: HashSet<usize> = tree
        .nodes
        .iter()
        .filter(|nd| nd.is_leaf())
        .map(|nd| nd.id.0)
        .collect();
    loop {
        let before = reaches.len();
        for e in &tree.edges {
            if reaches.contains(&e.to.0) {
                reaches.insert(e.from.0);
            }
        }
        if reaches.len() == before {
            break;
        }
    }
    if let Some(nd) = tree.nodes.iter().find(|nd| !reaches.contains(&nd.id.0)) {
        return Err(MarkovError::Divergent(nd.id.0));
    }

    // transient nodes: v_j = [j = root] + sum_i v_i * P(i -> j)
    let transient: Vec<usize> = tree
        .nodes
        .iter()
        .filter(|nd| !nd.is_leaf())
        .map(|nd| nd.id.0)
        .collect();
    let index_of: std::collections::HashMap<usize, usize> = transient
        .iter()
        .enumerate()
        .map(|(i, &n)| (n, i))
        .collect();
    let t = transient.len();
    let mut a = vec![vec![zero(); t]; t];
    let mut b = vec![zero(); t];
    for (i, &node) in transient.iter().enumerate() {
        a[i][i] = one();
        if node == tree.root().0 {
            b[i] = one();
        }
    }
    for e in &tree.edges {
        if let (Some(&from), Some(&to)) = (index_of.get(&e.from.0), index_of.get(&e.to.0)) {
            let p = e.label.prob();
            a[to][from] -= p;
        }
    }
    let v = solve_linear(a, b).ok_or(MarkovError::Singular)?;

    let mut visits = vec![zero(); n];
    for (i, &node) in transient.iter().enumerate() {
        visits[node] = v[i].clone();
    }
    // leaf visit count = inflow
    for e in &tree.edges {
        if tree.node(e.to).is_leaf() {
            let from_visits = visits[e.from.0].clone();
            visits[e.to.0] += from_visits * e.label.prob();
        }
    }
    if tree.node(tree.root()).is_leaf() {
        visits[tree.root().0] = one();
    }
    Ok(visits)
}

/// Expected visits summed over a node subset.
pub fn expected_visits_to(
    tree: &KwhTree,
    pred: impl Fn(&crate::engine::Node) -> bool,
) -> Result<Rat, MarkovError> {
    let visits = expected_visits(tree)?;
    Ok(tree
        .nodes
        .iter()
        .filter(|nd| pred(nd))
        .map(|nd| visits[nd.id.0].clone())
        .fold(zero(), |acc, v| acc + v))
}
