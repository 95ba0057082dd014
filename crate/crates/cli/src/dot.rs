//! DOT export of diagrams; node and arc order follow ids, so output is
//! deterministic for a fixed seed.

use std::fmt::Write;

use diagcut::diagram::{Diagram, NodeState};

pub fn to_dot(diag: &Diagram) -> String {
    let mut out = String::from("digraph diagram {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    for node in diag.nodes() {
        let state = match &node.state {
            NodeState::Subset(s) => format!("{s:?}"),
            NodeState::Capacity(c) => format!("cap {c}"),
            NodeState::Avail(s) => format!("avail {s:?}"),
            NodeState::Uncovered(s) => format!("uncov {s:?}"),
            NodeState::Terminal => "q".to_string(),
        };
        let tag = if node.id == diag.p() { "p: " } else { "" };
        let _ = writeln!(
            out,
            "  n{} [label=\"{tag}{state}\"];",
            node.id
        );
    }
    for layer in 0..diag.num_layers() {
        let ids: Vec<String> = diag
            .nodes()
            .iter()
            .filter(|n| n.layer == layer)
            .map(|n| format!("n{}", n.id))
            .collect();
        if ids.len() > 1 {
            let _ = writeln!(out, "  {{ rank=same; {}; }}", ids.join("; "));
        }
    }
    for arc in diag.arcs() {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"{:?}\"];",
            arc.src, arc.dst, arc.items
        );
    }
    out.push_str("}\n");
    out
}
