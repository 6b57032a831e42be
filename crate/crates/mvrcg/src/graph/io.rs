//! Edge-list text format.
//!
//! One edge per line: `a -> b`, `a <-> b`, `a -- b`. Lines starting with `#`
//! are comments; a header line `vertices: a,b,c` fixes the vertex order.
//! The writer emits a canonical form that round-trips bit-exactly.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{EdgeKind, GraphError, MixedGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("missing `vertices:` header line")]
    MissingHeader,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl MixedGraph {
    /// Canonical edge-list text: header, then one line per edge in
    /// unordered-pair index order, directed edges written tail first.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("vertices: {}\n", self.labels().join(","));
        for (src, dst, kind) in self.edges() {
            let op = match kind {
                EdgeKind::Undirected => "--",
                EdgeKind::Directed => "->",
                EdgeKind::Bidirected => "<->",
            };
            out.push_str(&format!("{} {} {}\n", self.label(src), op, self.label(dst)));
        }
        out
    }

    /// Parse the edge-list format. The `vertices:` header must come before
    /// any edge line.
    pub fn from_edge_list(text: &str) -> Result<MixedGraph, ParseError> {
        let mut graph: Option<MixedGraph> = None;
        let mut seen_pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("vertices:") {
                if graph.is_some() {
                    return Err(ParseError::Line {
                        line: lineno,
                        msg: "duplicate `vertices:` header".into(),
                    });
                }
                let labels: Vec<String> =
                    rest.split(',').map(|s| s.trim().to_string()).collect();
                graph = Some(MixedGraph::new(labels)?);
                continue;
            }
            let g = graph.as_mut().ok_or(ParseError::MissingHeader)?;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let [lhs, op, rhs] = tokens[..] else {
                return Err(ParseError::Line {
                    line: lineno,
                    msg: format!("expected `<label> <op> <label>`, got `{line}`"),
                });
            };
            let kind = match op {
                "--" => EdgeKind::Undirected,
                "->" => EdgeKind::Directed,
                "<->" => EdgeKind::Bidirected,
                other => {
                    return Err(ParseError::Line {
                        line: lineno,
                        msg: format!("unknown edge operator `{other}`"),
                    })
                }
            };
            let u = g.index_of(lhs)?;
            let v = g.index_of(rhs)?;
            if u == v {
                return Err(ParseError::Line { line: lineno, msg: format!("self-loop on `{lhs}`") });
            }
            if !seen_pairs.insert((u.min(v), u.max(v))) {
                return Err(ParseError::Line {
                    line: lineno,
                    msg: format!("duplicate edge between `{lhs}` and `{rhs}`"),
                });
            }
            g.set_edge(u, v, kind)?;
        }
        graph.ok_or(ParseError::MissingHeader)
    }
}
