//! Plain-text graph format: a header line `n m`, then `m` lines `u v` with
//! `0 <= u < v < n`. Blank lines are ignored.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use mif_core::Graph;

use crate::error::{Error, Result};

pub fn parse_graph(text: &str) -> std::result::Result<Graph, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or("empty input")?;
    let (n, m) = two_numbers(header).map_err(|e| format!("line 1: {e}"))?;
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(m);
    for (no, line) in lines {
        let (u, v) = two_numbers(line).map_err(|e| format!("line {no}: {e}"))?;
        if u == v {
            return Err(format!("line {no}: self-loop at {u}"));
        }
        if u > v {
            return Err(format!("line {no}: expected u < v, got {u} {v}"));
        }
        if v >= n {
            return Err(format!("line {no}: vertex {v} out of range for n = {n}"));
        }
        if !seen.insert((u, v)) {
            return Err(format!("line {no}: duplicate edge {u} {v}"));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(format!("header announces {m} edges, found {}", edges.len()));
    }
    Graph::from_edges(n, edges).map_err(|e| e.to_string())
}

fn two_numbers(line: &str) -> std::result::Result<(usize, usize), String> {
    let mut it = line.split_whitespace();
    let mut next = || -> std::result::Result<usize, String> {
        let tok = it.next().ok_or_else(|| format!("expected two integers in {line:?}"))?;
        tok.parse().map_err(|_| format!("not a nonnegative integer: {tok:?}"))
    };
    let pair = (next()?, next()?);
    if it.next().is_some() {
        return Err(format!("trailing tokens in {line:?}"));
    }
    Ok(pair)
}

pub fn format_graph(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").expect("write to string");
    }
    out
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph(&text).map_err(|e| Error::parse(path, e))
}
