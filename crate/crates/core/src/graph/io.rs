//! Plain-text graph format: a header `n kappa`, then one `u v c` line per
//! edge, sorted by `(u, v)`. Uncoloured edges are written with colour `-`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use super::{ColouredDigraph, DigraphBuilder, GraphError, UNCOLOURED};

#[derive(Debug, Error)]
pub enum GraphIoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: GraphError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_graph(d: &ColouredDigraph) -> String {
    let mut out = String::with_capacity(16 + d.edge_count() * 12);
    let _ = writeln!(out, "{} {}", d.n(), d.kappa());
    for e in d.edges() {
        if e.colour == UNCOLOURED {
            let _ = writeln!(out, "{} {} -", e.tail, e.head);
        } else {
            let _ = writeln!(out, "{} {} {}", e.tail, e.head, e.colour);
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> GraphIoError {
    GraphIoError::Parse { line, message: message.into() }
}

pub fn read_graph(text: &str) -> Result<ColouredDigraph, GraphIoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(parse_err(hl, "header must be `n kappa`"));
    }
    let n: usize = fields[0].parse().map_err(|_| parse_err(hl, "bad vertex count"))?;
    let kappa: usize = fields[1].parse().map_err(|_| parse_err(hl, "bad colour count"))?;
    let mut builder =
        DigraphBuilder::new(n, kappa).map_err(|source| GraphIoError::Invalid { line: hl, source })?;
    let mut seen = std::collections::HashSet::new();
    for (line, l) in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(line, "edge line must be `u v c`"));
        }
        let u: u32 = f[0].parse().map_err(|_| parse_err(line, "bad tail"))?;
        let v: u32 = f[1].parse().map_err(|_| parse_err(line, "bad head"))?;
        let c = if f[2] == "-" {
            UNCOLOURED
        } else {
            f[2].parse().map_err(|_| parse_err(line, "bad colour"))?
        };
        builder
            .add_edge(u, v, c)
            .map_err(|source| GraphIoError::Invalid { line, source })?;
        if !seen.insert((u, v)) {
            return Err(GraphIoError::Invalid { line, source: GraphError::DuplicateEdge(u, v) });
        }
    }
    builder.build().map_err(|source| GraphIoError::Invalid { line: 0, source })
}

pub fn write_graph_file(d: &ColouredDigraph, path: impl AsRef<Path>) -> Result<(), GraphIoError> {
    fs::write(path, write_graph(d))?;
    Ok(())
}

pub fn read_graph_file(path: impl AsRef<Path>) -> Result<ColouredDigraph, GraphIoError> {
    read_graph(&fs::read_to_string(path)?)
}
