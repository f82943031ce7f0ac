//! Static validation of a parsed protocol.

use std::fmt;

use crate::dsl::ast::{Action, Mode, Protocol};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: line {}: {}", self.line, self.message)
    }
}

/// Returns an empty list iff the protocol is statically well-formed.
pub fn validate(ast: &Protocol) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut error = |line: usize, message: String| {
        out.push(Diagnostic {
            severity: Severity::Error,
            line,
            message,
        })
    };

    let n = ast.deck_size();
    for block in &ast.blocks {
        for (action, line) in &block.actions {
            match action {
                Action::Shuffle(spec) => {
                    if let Err(e) = spec.check() {
                        error(*line, e.to_string());
                    } else if spec.deck_size() != n {
                        error(
                            *line,
                            format!("shuffle acts on {} positions, deck has {n}", spec.deck_size()),
                        );
                    }
                }
                Action::Perm(p) => {
                    if p.len() != n {
                        error(
                            *line,
                            format!("perm acts on {} positions, deck has {n}", p.len()),
                        );
                    }
                }
                Action::Result { x, y } => {
                    if x == y {
                        error(*line, "result positions must be distinct".into());
                    }
                    if ast.mode != Mode::Committed {
                        error(*line, "result is only valid in committed mode".into());
                    }
                }
                Action::Branch(arms) => {
                    for (i, (a, _)) in arms.iter().enumerate() {
                        for (b, _) in &arms[i + 1..] {
                            if a.overlaps(b) {
                                error(*line, format!("overlapping branch patterns {a}"));
                            }
                        }
                    }
                }
                Action::Output { arms, .. } => {
                    if ast.mode != Mode::OpenOutput {
                        error(*line, "output is only valid in open-output mode".into());
                    }
                    for (i, (a, _)) in arms.iter().enumerate() {
                        for (b, _) in &arms[i + 1..] {
                            if a.overlaps(b) {
                                error(*line, format!("duplicate output pattern {a}"));
                            }
                        }
                    }
                }
                Action::Turn(_) | Action::Goto(_) => {}
            }
        }
    }

    // Control must not fall off the end of the program: the final block
    // has to end in a terminating or jumping action. Earlier blocks may
    // fall through into their successor.
    if let Some(last) = ast.blocks.last() {
        let terminated = matches!(
            last.actions.last().map(|(a, _)| a),
            Some(Action::Result { .. } | Action::Output { .. } | Action::Goto(_) | Action::Branch(_))
        );
        if !terminated {
            error(
                last.line,
                format!("control falls off the end of block {:?}", last.label),
            );
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse::parse_protocol;

    #[test]
    fn clean_protocol_has_no_diagnostics() {
        let src = "protocol t\ndeck C H C H\ninputs a@(1,2) b@(3,4)\nmode committed\nmain:\nshuffle uniform { id ; (1 3)(2 4) }\nresult 1 2\n";
        let ast = parse_protocol(src).unwrap();
        assert_eq!(validate(&ast), vec![]);
    }

    #[test]
    fn result_positions_must_differ() {
        let src = "protocol t\ndeck C H C H\ninputs a@(1,2) b@(3,4)\nmode committed\nmain:\nresult 2 2\n";
        let ast = parse_protocol(src).unwrap();
        let diags = validate(&ast);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("result positions must be distinct"));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let src = "protocol t\ndeck C H C H\ninputs a@(1,2) b@(3,4)\nmode committed\nmain:\nshuffle dist { id: 1/2 ; (1 2): 2/5 }\nresult 1 2\n";
        let ast = parse_protocol(src).unwrap();
        let diags = validate(&ast);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("weights must sum to 1"));
    }

    #[test]
    fn falling_off_the_end_is_an_error() {
        let src = "protocol t\ndeck C H C H\ninputs a@(1,2) b@(3,4)\nmode committed\nmain:\nturn {1}\n";
        let ast = parse_protocol(src).unwrap();
        let diags = validate(&ast);
        assert!(diags.iter().any(|d| d.message.contains("falls off")));
    }
}
