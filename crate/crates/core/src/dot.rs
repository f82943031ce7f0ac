//! Graphviz export of a KWH-tree. Output is deterministic: nodes in id
//! order, edges in insertion order.

use std::fmt::Write;

use crate::engine::{KwhTree, LeakWitness, NodeKind};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn node_label(tree: &KwhTree, id: usize) -> String {
    let node = &tree.nodes[id];
    let mut label = String::new();
    for (seq, poly) in node.kwh_box.rows() {
        // \l left-justifies and terminates each row
        let _ = write!(label, "{}\\l", escape(&format!("{} {}", seq, poly)));
    }
    match &node.kind {
        NodeKind::Internal => {}
        NodeKind::Result { x, y } => {
            let _ = write!(label, "(result, {x}, {y})\\l");
        }
        NodeKind::Output { .. } => {
            label.push_str("(output)\\l");
        }
    }
    label
}

/// Render the tree as a `digraph`. When a leak witness is given (for a
/// partial tree), the offending node is highlighted and annotated.
pub fn to_dot(tree: &KwhTree, leak: Option<&LeakWitness>) -> String {
    let mut out = String::new();
    out.push_str("digraph kwh {\n");
    out.push_str("  node [shape=box, fontname=\"monospace\"];\n");
    out.push_str("  edge [fontname=\"monospace\"];\n");
    for node in &tree.nodes {
        let mut attrs = format!("label=\"{}\"", node_label(tree, node.id.0));
        if node.is_leaf() {
            attrs.push_str(", peripheries=2");
        }
        if let Some(w) = leak {
            if w.node == node.id {
                attrs.push_str(&format!(
                    ", color=red, xlabel=\"{}\"",
                    escape(&w.to_string())
                ));
            }
        }
        let _ = writeln!(out, "  n{} [{attrs}];", node.id.0);
    }
    for edge in &tree.edges {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"{}\"];",
            edge.from.0,
            edge.to.0,
            escape(&edge.label.to_string())
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse::parse_protocol;
    use crate::engine::{build_kwh_tree, DEFAULT_NODE_BUDGET};

    #[test]
    fn dot_output_is_deterministic_and_well_formed() {
        let src = "\
protocol tiny
deck C H C H
inputs a@(1,2) b@(3,4)
mode committed
main:
  shuffle uniform { id ; (1 3)(2 4) }
  result 1 2
";
        let ast = parse_protocol(src).unwrap();
        let tree = build_kwh_tree(&ast, DEFAULT_NODE_BUDGET).unwrap();
        let a = to_dot(&tree, None);
        let b = to_dot(&tree, None);
        assert_eq!(a, b);
        assert!(a.starts_with("digraph kwh {"));
        assert!(a.trim_end().ends_with('}'));
        assert!(a.contains("->"));
    }
}
