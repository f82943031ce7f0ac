//! Line-oriented parser for `.cbp` protocol files.
//!
//! The parse is total: it yields either a structurally sound AST with all
//! labels resolved and positions range-checked, or an error with a source
//! location. Never a partial AST. Semantic checks that are better reported
//! as diagnostics (weight sums, result positions, arm overlap) live in
//! [`super::validate`].

use thiserror::Error;

use crate::cards::Face;
use crate::perm::Permutation;
use crate::rational::parse_rat;
use crate::shuffle::ShuffleSpec;

use super::ast::{Action, Commitment, LabeledBlock, Mode, Protocol, VisiblePattern};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

pub fn parse_protocol(text: &str) -> Result<Protocol, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, raw)| {
            let body = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            (i + 1, body.trim())
        })
        .filter(|(_, l)| !l.is_empty());

    // header: protocol, deck, inputs, mode
    let (ln, l) = lines.next().ok_or(ParseError {
        line: 1,
        message: "empty protocol file".into(),
    })?;
    let name = match l.strip_prefix("protocol ") {
        Some(rest) => rest.trim().to_string(),
        None => return err(ln, "expected 'protocol <name>'"),
    };
    if name.is_empty() {
        return err(ln, "protocol name is empty");
    }

    let (ln, l) = lines.next().ok_or(ParseError {
        line: ln,
        message: "missing 'deck' line".into(),
    })?;
    let deck = match l.strip_prefix("deck ") {
        Some(rest) => rest
            .split_whitespace()
            .map(|tok| {
                if tok.len() == 1 {
                    Face::from_symbol(tok.chars().next().unwrap())
                } else {
                    None
                }
            })
            .collect::<Option<Vec<Face>>>()
            .ok_or(ParseError {
                line: ln,
                message: "deck entries must be C or H".into(),
            })?,
        None => return err(ln, "expected 'deck <C|H> ...'"),
    };
    if deck.is_empty() {
        return err(ln, "deck is empty");
    }
    let n = deck.len();

    let (ln, l) = lines.next().ok_or(ParseError {
        line: ln,
        message: "missing 'inputs' line".into(),
    })?;
    let inputs = match l.strip_prefix("inputs ") {
        Some(rest) => {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 2 {
                return err(ln, "expected exactly two input commitments");
            }
            let mut out = Vec::new();
            for part in parts {
                out.push(parse_commitment(part, n, ln)?);
            }
            [out[0].clone(), out[1].clone()]
        }
        None => return err(ln, "expected 'inputs <id>@(<p>,<q>) <id>@(<p>,<q>)'"),
    };
    {
        let mut used = vec![false; n];
        for c in &inputs {
            for p in [c.positions.0, c.positions.1] {
                if used[p - 1] {
                    return err(ln, format!("overlapping commitments at position {p}"));
                }
                used[p - 1] = true;
            }
        }
        // The deck line is the reference layout for inputs (0, 0); each
        // commitment must read club-then-heart there, otherwise the face
        // multiset would not be conserved across input pairs.
        for c in &inputs {
            if deck[c.positions.0 - 1] != Face::Club || deck[c.positions.1 - 1] != Face::Heart {
                return err(
                    ln,
                    format!(
                        "deck/commitment mismatch: positions ({},{}) must hold C,H in the deck line",
                        c.positions.0, c.positions.1
                    ),
                );
            }
        }
    }

    let (ln, l) = lines.next().ok_or(ParseError {
        line: ln,
        message: "missing 'mode' line".into(),
    })?;
    let mode = match l.strip_prefix("mode ") {
        Some("committed") => Mode::Committed,
        Some("open-output") => Mode::OpenOutput,
        Some(other) => return err(ln, format!("unknown mode {other:?}")),
        None => return err(ln, "expected 'mode committed' or 'mode open-output'"),
    };

    // labeled blocks
    let mut blocks: Vec<LabeledBlock> = Vec::new();
    for (ln, l) in lines {
        if let Some(label) = l.strip_suffix(':') {
            let label = label.trim();
            if label.is_empty() || label.contains(char::is_whitespace) {
                return err(ln, format!("invalid label {label:?}"));
            }
            if blocks.iter().any(|b| b.label == label) {
                return err(ln, format!("duplicate label {label:?}"));
            }
            blocks.push(LabeledBlock {
                label: label.to_string(),
                line: ln,
                actions: Vec::new(),
            });
        } else {
            let action = parse_action(l, n, ln)?;
            match blocks.last_mut() {
                Some(b) => b.actions.push((action, ln)),
                None => return err(ln, "action before the first label"),
            }
        }
    }
    if blocks.is_empty() {
        return err(ln, "protocol has no labeled blocks");
    }

    // resolve labels
    for b in &blocks {
        for (a, aln) in &b.actions {
            let targets: Vec<&String> = match a {
                Action::Goto(t) => vec![t],
                Action::Branch(arms) => arms.iter().map(|(_, t)| t).collect(),
                _ => vec![],
            };
            for t in targets {
                if !blocks.iter().any(|b| &b.label == t) {
                    return err(*aln, format!("unknown label {t:?}"));
                }
            }
        }
    }

    Ok(Protocol {
        name,
        deck,
        inputs,
        mode,
        blocks,
    })
}

fn parse_commitment(s: &str, n: usize, ln: usize) -> Result<Commitment, ParseError> {
    let (owner, rest) = s.split_once('@').ok_or(ParseError {
        line: ln,
        message: format!("expected <id>@(<p>,<q>), got {s:?}"),
    })?;
    let inner = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or(ParseError {
            line: ln,
            message: format!("expected positions in parentheses, got {rest:?}"),
        })?;
    let (p, q) = inner.split_once(',').ok_or(ParseError {
        line: ln,
        message: format!("expected two positions, got {inner:?}"),
    })?;
    let parse_pos = |tok: &str| -> Result<usize, ParseError> {
        let v: usize = tok.trim().parse().map_err(|_| ParseError {
            line: ln,
            message: format!("bad position {tok:?}"),
        })?;
        if v < 1 || v > n {
            return err(ln, format!("position {v} out of range 1..={n}"));
        }
        Ok(v)
    };
    let p = parse_pos(p)?;
    let q = parse_pos(q)?;
    if p == q {
        return err(ln, "commitment positions must be distinct");
    }
    Ok(Commitment {
        owner: owner.trim().to_string(),
        positions: (p, q),
    })
}

/// Extract "..." between the outermost braces of `s` after `keyword`.
fn braced<'a>(s: &'a str, ln: usize) -> Result<&'a str, ParseError> {
    let open = s.find('{').ok_or(ParseError {
        line: ln,
        message: "expected '{'".into(),
    })?;
    let close = s.rfind('}').ok_or(ParseError {
        line: ln,
        message: "expected '}'".into(),
    })?;
    if close < open {
        return err(ln, "mismatched braces");
    }
    Ok(&s[open + 1..close])
}

fn parse_action(l: &str, n: usize, ln: usize) -> Result<Action, ParseError> {
    if let Some(rest) = l.strip_prefix("shuffle uniform") {
        let body = braced(rest, ln)?;
        let mut perms = Vec::new();
        for part in body.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            perms.push(parse_perm(part, n, ln)?);
        }
        if perms.is_empty() {
            return err(ln, "shuffle has no permutations");
        }
        let w = crate::rational::one()
            / crate::rational::rat_int(perms.len() as i64);
        return Ok(Action::Shuffle(ShuffleSpec::new_unchecked(
            perms.into_iter().map(|p| (p, w.clone())).collect(),
        )));
    }
    if let Some(rest) = l.strip_prefix("shuffle dist") {
        let body = braced(rest, ln)?;
        let mut entries = Vec::new();
        for part in body.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            // split on the last ':' so cycle notation stays intact
            let colon = part.rfind(':').ok_or(ParseError {
                line: ln,
                message: format!("expected '<perm>: <rational>', got {part:?}"),
            })?;
            let perm = parse_perm(part[..colon].trim(), n, ln)?;
            let weight = parse_rat(&part[colon + 1..]).map_err(|e| ParseError {
                line: ln,
                message: e,
            })?;
            entries.push((perm, weight));
        }
        if entries.is_empty() {
            return err(ln, "shuffle has no permutations");
        }
        return Ok(Action::Shuffle(ShuffleSpec::new_unchecked(entries)));
    }
    if let Some(rest) = l.strip_prefix("turn") {
        let body = braced(rest, ln)?;
        let mut positions = std::collections::BTreeSet::new();
        for tok in body.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            let p: usize = tok.parse().map_err(|_| ParseError {
                line: ln,
                message: format!("bad position {tok:?}"),
            })?;
            if p < 1 || p > n {
                return err(ln, format!("position {p} out of range 1..={n}"));
            }
            positions.insert(p);
        }
        if positions.is_empty() {
            return err(ln, "turn set is empty");
        }
        return Ok(Action::Turn(positions));
    }
    if let Some(rest) = l.strip_prefix("perm ") {
        return Ok(Action::Perm(parse_perm(rest.trim(), n, ln)?));
    }
    if let Some(rest) = l.strip_prefix("branch") {
        let body = braced(rest, ln)?;
        let mut arms = Vec::new();
        for part in body.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (pat, target) = parse_arrow(part, ln)?;
            let pattern = parse_pattern(&pat, n, ln)?;
            arms.push((pattern, target));
        }
        if arms.is_empty() {
            return err(ln, "branch has no arms");
        }
        return Ok(Action::Branch(arms));
    }
    if let Some(rest) = l.strip_prefix("goto ") {
        return Ok(Action::Goto(rest.trim().to_string()));
    }
    if let Some(rest) = l.strip_prefix("result ") {
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 2 {
            return err(ln, "expected 'result <x> <y>'");
        }
        let parse_pos = |tok: &str| -> Result<usize, ParseError> {
            let v: usize = tok.parse().map_err(|_| ParseError {
                line: ln,
                message: format!("bad position {tok:?}"),
            })?;
            if v < 1 || v > n {
                return err(ln, format!("position {v} out of range 1..={n}"));
            }
            Ok(v)
        };
        return Ok(Action::Result {
            x: parse_pos(parts[0])?,
            y: parse_pos(parts[1])?,
        });
    }
    if let Some(rest) = l.strip_prefix("output") {
        let body = braced(rest, ln)?;
        let mut arms = Vec::new();
        let mut default = None;
        for part in body.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (lhs, rhs) = split_arrow(part, ln)?;
            let bit: u8 = match rhs.as_str() {
                "0" => 0,
                "1" => 1,
                other => return err(ln, format!("output bit must be 0 or 1, got {other:?}")),
            };
            if lhs == "else" {
                if default.is_some() {
                    return err(ln, "duplicate 'else' arm");
                }
                default = Some(bit);
            } else {
                let pat = unquote(&lhs, ln)?;
                arms.push((parse_pattern(&pat, n, ln)?, bit));
            }
        }
        let default = default.ok_or(ParseError {
            line: ln,
            message: "output requires an 'else' arm".into(),
        })?;
        return Ok(Action::Output { arms, default });
    }
    err(ln, format!("unknown action {l:?}"))
}

fn parse_perm(s: &str, n: usize, ln: usize) -> Result<Permutation, ParseError> {
    Permutation::parse_cycles(s, n).map_err(|e| ParseError {
        line: ln,
        message: e.to_string(),
    })
}

fn split_arrow(part: &str, ln: usize) -> Result<(String, String), ParseError> {
    let (lhs, rhs) = part.split_once("->").ok_or(ParseError {
        line: ln,
        message: format!("expected '->' in {part:?}"),
    })?;
    Ok((lhs.trim().to_string(), rhs.trim().to_string()))
}

fn parse_arrow(part: &str, ln: usize) -> Result<(String, String), ParseError> {
    let (lhs, rhs) = split_arrow(part, ln)?;
    Ok((unquote(&lhs, ln)?, rhs))
}

fn unquote(s: &str, ln: usize) -> Result<String, ParseError> {
    s.strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .map(|r| r.to_string())
        .ok_or(ParseError {
            line: ln,
            message: format!("expected quoted pattern, got {s:?}"),
        })
}

fn parse_pattern(s: &str, n: usize, ln: usize) -> Result<VisiblePattern, ParseError> {
    let pat = VisiblePattern::parse(s).ok_or(ParseError {
        line: ln,
        message: format!("pattern may only contain '?', 'C', 'H': {s:?}"),
    })?;
    if pat.len() != n {
        return err(
            ln,
            format!("pattern {s:?} has length {}, deck has {n}", pat.len()),
        );
    }
    Ok(pat)
}
