//! Graph file formats.
//!
//! JSON: `{"n": <int>, "edges": [[u,v], ...]}` with `u < v` and edges sorted
//! lexicographically on save. Unknown fields are ignored on load so richer
//! instance files remain loadable as plain graphs.
//!
//! Edge list: first line `# n=<N>`, then one `u v` pair per line, LF endings.

use super::Graph;
use crate::error::{Error, Result};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Json,
    EdgeList,
}

#[derive(Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(u32, u32)>,
}

fn parse_error(path: &Path, location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        location: location.into(),
        message: message.into(),
    }
}

pub fn load_graph(path: impl AsRef<Path>, format: GraphFormat) -> Result<Graph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    match format {
        GraphFormat::Json => load_json(path, &text),
        GraphFormat::EdgeList => load_edge_list(path, &text),
    }
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>, format: GraphFormat) -> Result<()> {
    std::fs::write(path, render_graph(g, format))?;
    Ok(())
}

pub fn render_graph(g: &Graph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Json => {
            let edges: Vec<[u32; 2]> = g.edges().iter().map(|&(u, v)| [u, v]).collect();
            format!(
                "{}\n",
                serde_json::to_string(&serde_json::json!({"n": g.n(), "edges": edges})).unwrap()
            )
        }
        GraphFormat::EdgeList => {
            let mut out = format!("# n={}\n", g.n());
            for &(u, v) in g.edges() {
                out.push_str(&format!("{u} {v}\n"));
            }
            out
        }
    }
}

fn load_json(path: &Path, text: &str) -> Result<Graph> {
    let parsed: GraphJson = serde_json::from_str(text)
        .map_err(|e| parse_error(path, format!("line {}", e.line()), e.to_string()))?;
    for (i, &(u, v)) in parsed.edges.iter().enumerate() {
        validate_edge(path, &format!("edges[{i}]"), u, v, parsed.n)?;
    }
    Graph::new(parsed.n, parsed.edges).map_err(|e| parse_error(path, "edges", e.to_string()))
}

fn load_edge_list(path: &Path, text: &str) -> Result<Graph> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, "line 1", "empty file"))?;
    let n: usize = header
        .strip_prefix("# n=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| parse_error(path, "line 1", "expected header `# n=<N>`"))?;
    let mut edges = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse_field = |field: Option<&str>, name: &str| -> Result<u32> {
            field
                .ok_or_else(|| {
                    parse_error(path, format!("line {line_no}"), format!("missing {name}"))
                })?
                .parse()
                .map_err(|_| parse_error(path, format!("line {line_no}"), format!("bad {name}")))
        };
        let u = parse_field(it.next(), "first endpoint")?;
        let v = parse_field(it.next(), "second endpoint")?;
        if it.next().is_some() {
            return Err(parse_error(
                path,
                format!("line {line_no}"),
                "trailing fields after edge",
            ));
        }
        validate_edge(path, &format!("line {line_no}"), u, v, n)?;
        edges.push((u, v));
    }
    Graph::new(n, edges).map_err(|e| parse_error(path, "edges", e.to_string()))
}

fn validate_edge(path: &Path, location: &str, u: u32, v: u32, n: usize) -> Result<()> {
    if u == v {
        return Err(parse_error(path, location, format!("self-loop ({u},{v})")));
    }
    if u as usize >= n || v as usize >= n {
        return Err(parse_error(
            path,
            location,
            format!("endpoint out of range in ({u},{v}), n={n}"),
        ));
    }
    Ok(())
}
