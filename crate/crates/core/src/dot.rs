//! Graphviz export of a community sentiment network.

use std::fmt::Write;

use crate::model::Csn;

fn is_plain_id(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(
            s.to_ascii_lowercase().as_str(),
            "node" | "edge" | "graph" | "digraph" | "subgraph" | "strict"
        )
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

fn node_id(label: &str) -> String {
    if is_plain_id(label) {
        label.to_string()
    } else {
        format!("\"{}\"", escape(label))
    }
}

/// Renders `csn` as a DOT digraph. Nodes and edges appear in subgroup-index
/// order; hostile (negative) edges are red and dashed, the rest green.
pub fn export_dot(csn: &Csn) -> String {
    export_dot_with_header(csn, None)
}

/// As [`export_dot`], with an optional comment line (e.g. a config hash).
pub fn export_dot_with_header(csn: &Csn, header: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        writeln!(out, "// {}", h.replace('\n', " ")).unwrap();
    }
    writeln!(out, "digraph csn {{").unwrap();
    writeln!(out, "    graph [rankdir=LR];").unwrap();
    writeln!(out, "    node [shape=ellipse];").unwrap();
    for (i, g) in csn.subgroups.iter().enumerate() {
        writeln!(
            out,
            "    {} [label=\"{}\\nn={}\"];",
            node_id(&g.label),
            escape(&g.label),
            csn.comment_count.get(i).copied().unwrap_or(0)
        )
        .unwrap();
    }
    for (i, j, e) in csn.iter_edges() {
        let style = if e.score < 0.0 {
            "color=\"red\", fontcolor=\"red\", style=\"dashed\""
        } else {
            "color=\"darkgreen\", fontcolor=\"darkgreen\", style=\"solid\""
        };
        writeln!(
            out,
            "    {} -> {} [label=\"{:.2}\", {style}];",
            node_id(&csn.subgroups[i].label),
            node_id(&csn.subgroups[j].label),
            e.score
        )
        .unwrap();
    }
    writeln!(out, "}}").unwrap();
    out
}
