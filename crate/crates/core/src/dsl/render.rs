//! Canonical renderer: regenerates `.cbp` source from an AST.
//!
//! parse -> render -> parse is a fixpoint; the round trip is checked by
//! property tests on the bundled corpus.

use crate::dsl::ast::{Action, Mode, Protocol};
use crate::rational::fmt_rat;

pub fn render(ast: &Protocol) -> String {
    let mut out = String::new();
    out.push_str(&format!("protocol {}\n", ast.name));
    out.push_str("deck ");
    out.push_str(
        &ast.deck
            .iter()
            .map(|f| f.symbol().to_string())
            .collect::<Vec<_>>()
            .join(" "),
    );
    out.push('\n');
    out.push_str(&format!(
        "inputs {}@({},{}) {}@({},{})\n",
        ast.inputs[0].owner,
        ast.inputs[0].positions.0,
        ast.inputs[0].positions.1,
        ast.inputs[1].owner,
        ast.inputs[1].positions.0,
        ast.inputs[1].positions.1,
    ));
    out.push_str(match ast.mode {
        Mode::Committed => "mode committed\n",
        Mode::OpenOutput => "mode open-output\n",
    });
    for block in &ast.blocks {
        out.push('\n');
        out.push_str(&format!("{}:\n", block.label));
        for (action, _) in &block.actions {
            out.push_str("  ");
            out.push_str(&render_action(action));
            out.push('\n');
        }
    }
    out
}

fn render_action(action: &Action) -> String {
    match action {
        Action::Shuffle(spec) => {
            if spec.is_uniform() {
                let perms: Vec<String> = spec
                    .entries()
                    .iter()
                    .map(|(p, _)| p.to_string())
                    .collect();
                format!("shuffle uniform {{ {} }}", perms.join(" ; "))
            } else {
                let entries: Vec<String> = spec
                    .entries()
                    .iter()
                    .map(|(p, w)| format!("{}: {}", p, fmt_rat(w)))
                    .collect();
                format!("shuffle dist {{ {} }}", entries.join(" ; "))
            }
        }
        Action::Turn(positions) => {
            let ps: Vec<String> = positions.iter().map(|p| p.to_string()).collect();
            format!("turn {{{}}}", ps.join(", "))
        }
        Action::Perm(p) => format!("perm {p}"),
        Action::Result { x, y } => format!("result {x} {y}"),
        Action::Branch(arms) => {
            let parts: Vec<String> = arms
                .iter()
                .map(|(pat, target)| format!("\"{pat}\" -> {target}"))
                .collect();
            format!("branch {{ {} }}", parts.join(" ; "))
        }
        Action::Goto(label) => format!("goto {label}"),
        Action::Output { arms, default } => {
            let mut parts: Vec<String> = arms
                .iter()
                .map(|(pat, bit)| format!("\"{pat}\" -> {bit}"))
                .collect();
            parts.push(format!("else -> {default}"));
            format!("output {{ {} }}", parts.join(" ; "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse::parse_protocol;

    #[test]
    fn render_parse_fixpoint() {
        let src = "protocol t\ndeck C H C H\ninputs a@(1,2) b@(3,4)\nmode committed\nmain:\nshuffle dist { id: 1/2 ; (1 2): 1/2 }\nturn {2}\nbranch { \"?H??\" -> done ; \"?C??\" -> done }\ndone:\nresult 3 4\n";
        let ast = parse_protocol(src).unwrap();
        let rendered = render(&ast);
        let reparsed = parse_protocol(&rendered).unwrap();
        assert_eq!(render(&reparsed), rendered);
        assert_eq!(reparsed.name, ast.name);
        assert_eq!(reparsed.deck, ast.deck);
        assert_eq!(reparsed.mode, ast.mode);
        // actions match up to source line numbers
        for (a, b) in ast.blocks.iter().zip(&reparsed.blocks) {
            assert_eq!(a.label, b.label);
            let left: Vec<_> = a.actions.iter().map(|(x, _)| x).collect();
            let right: Vec<_> = b.actions.iter().map(|(x, _)| x).collect();
            assert_eq!(left, right);
        }
    }
}
