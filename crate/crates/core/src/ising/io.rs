//! Plain-text edge lists.
//!
//! ```text
//! # comment
//! vertices 4
//! 0 1
//! 1 2
//! membership
//! 0 0 1 1
//! ```
//!
//! Vertices are 0-indexed. The `membership` line is optional; when present
//! the next non-comment line holds one cluster label per vertex.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub membership: Option<Vec<usize>>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("expected a non-negative integer, got {tok:?}")))
}

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<EdgeList> {
    let mut vertices = None;
    let mut edges = Vec::new();
    let mut membership = None;
    let mut expecting_labels = false;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if expecting_labels {
            let labels = toks
                .iter()
                .map(|t| parse_usize(t, lineno))
                .collect::<Result<Vec<_>>>()?;
            membership = Some(labels);
            expecting_labels = false;
            continue;
        }
        match toks.as_slice() {
            ["vertices", n] => {
                if vertices.is_some() {
                    return Err(parse_err(lineno, "vertex count given twice"));
                }
                vertices = Some(parse_usize(n, lineno)?);
            }
            ["membership"] => {
                if membership.is_some() {
                    return Err(parse_err(lineno, "membership given twice"));
                }
                expecting_labels = true;
            }
            [u, v] => {
                let n = vertices.ok_or_else(|| parse_err(lineno, "edge before vertex count"))?;
                let (u, v) = (parse_usize(u, lineno)?, parse_usize(v, lineno)?);
                if u >= n || v >= n {
                    return Err(parse_err(lineno, format!("edge ({u}, {v}) outside {n} vertices")));
                }
                edges.push((u, v));
            }
            _ => return Err(parse_err(lineno, format!("unrecognised line {content:?}"))),
        }
    }
    if expecting_labels {
        return Err(parse_err(0, "membership line without labels"));
    }
    let vertices = vertices.ok_or_else(|| parse_err(0, "missing vertex count"))?;
    if let Some(m) = &membership {
        if m.len() != vertices {
            return Err(parse_err(
                0,
                format!("{} membership labels for {vertices} vertices", m.len()),
            ));
        }
    }
    Ok(EdgeList {
        vertices,
        edges,
        membership,
    })
}

pub fn write_edge_list<W: Write>(mut writer: W, list: &EdgeList) -> Result<()> {
    let mut out = format!("vertices {}\n", list.vertices);
    for (u, v) in &list.edges {
        writeln!(out, "{u} {v}").expect("writing to a String");
    }
    if let Some(m) = &list.membership {
        out.push_str("membership\n");
        let labels: Vec<String> = m.iter().map(|c| c.to_string()).collect();
        out.push_str(&labels.join(" "));
        out.push('\n');
    }
    writer
        .write_all(out.as_bytes())
        .map_err(|e| Error::InvalidState(format!("writing edge list: {e}")))
}
