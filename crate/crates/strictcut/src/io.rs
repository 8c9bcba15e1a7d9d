//! Line-oriented graph text format.
//!
//! ```text
//! # comment
//! n m [d]
//! [x_1 .. x_d] w      (n vertex lines)
//! u v c               (m edge lines, 0-based)
//! ```

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use std::fmt::Write as _;
use std::path::Path;

/// A parsed graph file; `coords` is present when the header carries a dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFile {
    pub graph: WeightedGraph,
    pub dim: Option<usize>,
    /// Row-major coordinates, `dim` entries per vertex.
    pub coords: Vec<i32>,
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad {what} '{tok}'") })
}

pub fn parse_graph(text: &str) -> Result<GraphFile> {
    let mut recs = records(text);
    let (hline, header) = recs.next().ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
    if header.len() < 2 || header.len() > 3 {
        return Err(Error::Parse { line: hline, msg: "header must be 'n m [d]'".into() });
    }
    let n: usize = num(hline, header[0], "vertex count")?;
    let m: usize = num(hline, header[1], "edge count")?;
    let dim: Option<usize> = header.get(2).map(|t| num(hline, t, "dimension")).transpose()?;
    if dim == Some(0) {
        return Err(Error::Parse { line: hline, msg: "dimension must be positive".into() });
    }
    let d = dim.unwrap_or(0);

    let mut weights = Vec::with_capacity(n);
    let mut coords = Vec::with_capacity(n * d);
    for v in 0..n {
        let (line, toks) =
            recs.next().ok_or(Error::Parse { line: 0, msg: format!("expected {n} vertex lines, got {v}") })?;
        if toks.len() != d + 1 {
            return Err(Error::Parse { line, msg: format!("vertex line needs {} fields", d + 1) });
        }
        for t in &toks[..d] {
            coords.push(num::<i32>(line, t, "coordinate")?);
        }
        weights.push(num::<f64>(line, toks[d], "weight")?);
    }
    let mut edges = Vec::with_capacity(m);
    for e in 0..m {
        let (line, toks) =
            recs.next().ok_or(Error::Parse { line: 0, msg: format!("expected {m} edge lines, got {e}") })?;
        if toks.len() != 3 {
            return Err(Error::Parse { line, msg: "edge line needs 'u v c'".into() });
        }
        edges.push((num(line, toks[0], "endpoint")?, num(line, toks[1], "endpoint")?, num(line, toks[2], "cost")?));
    }
    if let Some((line, _)) = recs.next() {
        return Err(Error::Parse { line, msg: "trailing data after edge list".into() });
    }
    let graph = WeightedGraph::new(weights, &edges).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    Ok(GraphFile { graph, dim, coords })
}

/// Serializes a graph; floats use the shortest exact decimal form.
pub fn write_graph(graph: &WeightedGraph, dim: Option<usize>, coords: &[i32]) -> String {
    let mut out = String::new();
    let d = dim.unwrap_or(0);
    match dim {
        Some(d) => writeln!(out, "{} {} {}", graph.vertex_count(), graph.edge_count(), d),
        None => writeln!(out, "{} {}", graph.vertex_count(), graph.edge_count()),
    }
    .unwrap();
    for v in 0..graph.vertex_count() {
        for x in &coords[v * d..(v + 1) * d] {
            write!(out, "{x} ").unwrap();
        }
        writeln!(out, "{}", graph.weight(v)).unwrap();
    }
    for (u, v, c) in graph.edge_list() {
        writeln!(out, "{u} {v} {c}").unwrap();
    }
    out
}

pub fn read_graph_file(path: &Path) -> Result<GraphFile> {
    parse_graph(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_and_grid_headers() {
        let f = parse_graph("# tiny\n3 2\n1\n2\n3.5\n0 1 1\n1 2 4 # trailing\n").unwrap();
        assert_eq!(f.graph.vertex_count(), 3);
        assert_eq!(f.graph.weights(), &[1.0, 2.0, 3.5]);
        assert_eq!(f.dim, None);
        let g = parse_graph("2 1 2\n0 0 1\n0 1 1\n0 1 2\n").unwrap();
        assert_eq!(g.dim, Some(2));
        assert_eq!(g.coords, vec![0, 0, 0, 1]);
    }

    #[test]
    fn reports_line_numbers() {
        match parse_graph("2 1\n1\nx\n0 1 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_graph("").is_err());
        assert!(parse_graph("2 1\n1\n1\n").is_err());
        assert!(parse_graph("1 0\n1\n0 0 1\n").is_err());
    }

    #[test]
    fn integer_input_is_reproduced_verbatim() {
        let text = "3 2 1\n-1 2\n0 1\n1 7\n0 1 3\n1 2 1\n";
        let f = parse_graph(text).unwrap();
        assert_eq!(write_graph(&f.graph, f.dim, &f.coords), text);
    }
}
