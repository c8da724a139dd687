//! Undirected weighted edge sets, the main output type of both builders.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Canonical undirected weighted edge set over nodes `0..n_nodes`.
/// Edges are stored with `u < v`, no self-loops, no duplicates.
#[derive(Debug, Clone)]
pub struct EdgeList {
    n_nodes: usize,
    edges: Vec<(u32, u32, f64)>,
    seen: HashSet<(u32, u32)>,
}

impl EdgeList {
    pub fn new(n_nodes: usize) -> Self {
        EdgeList {
            n_nodes,
            edges: Vec::new(),
            seen: HashSet::new(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Adds an edge, canonicalizing endpoint order. Self-loops and
    /// duplicates are structure errors.
    pub fn add(&mut self, u: u32, v: u32, w: f64) -> Result<()> {
        if u == v {
            return Err(Error::Structure(format!("self-loop on node {u}")));
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        if b as usize >= self.n_nodes {
            return Err(Error::Bounds {
                index: b as usize,
                len: self.n_nodes,
            });
        }
        if !self.seen.insert((a, b)) {
            return Err(Error::Structure(format!("duplicate edge ({a}, {b})")));
        }
        self.edges.push((a, b, w));
        Ok(())
    }

    pub fn contains(&self, u: u32, v: u32) -> bool {
        let key = if u < v { (u, v) } else { (v, u) };
        self.seen.contains(&key)
    }

    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    /// Unweighted edge pairs as a set, for Jaccard comparisons.
    pub fn edge_set(&self) -> &HashSet<(u32, u32)> {
        &self.seen
    }

    /// Adjacency lists over `0..n_nodes` (both directions).
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for &(u, v, _) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        adj
    }

    /// Number of connected components, counting isolated nodes.
    pub fn component_count(&self) -> usize {
        let adj = self.adjacency();
        let mut visited = vec![false; self.n_nodes];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..self.n_nodes {
            if visited[start] {
                continue;
            }
            components += 1;
            visited[start] = true;
            stack.push(start as u32);
            while let Some(u) = stack.pop() {
                for &v in &adj[u as usize] {
                    if !visited[v as usize] {
                        visited[v as usize] = true;
                        stack.push(v);
                    }
                }
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.n_nodes <= 1 || self.component_count() == 1
    }

    /// Edges sorted lexicographically by `(u, v)`, the on-disk order.
    pub fn sorted_edges(&self) -> Vec<(u32, u32, f64)> {
        let mut edges = self.edges.clone();
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        edges
    }

    /// Writes the shared TSV edgelist format: `u<TAB>v<TAB>w` with `u < v`,
    /// sorted by `(u, v)`, weights with 6 decimal places.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        for (u, v, weight) in self.sorted_edges() {
            writeln!(w, "{u}\t{v}\t{weight:.6}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the TSV edgelist format. Node count is inferred as
    /// `max id + 1` unless `n_nodes` is given.
    pub fn read_tsv(path: &Path, n_nodes: Option<usize>) -> Result<EdgeList> {
        let file = File::open(path)?;
        let reader = BufReader::new(file);
        let mut raw: Vec<(u32, u32, f64)> = Vec::new();
        let mut max_id = 0u32;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            if fields.len() < 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 3 tab-separated fields, got {}", fields.len()),
                });
            }
            let u: u32 = fields[0].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: "u is not an unsigned integer".into(),
            })?;
            let v: u32 = fields[1].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: "v is not an unsigned integer".into(),
            })?;
            let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: "w is not a number".into(),
            })?;
            max_id = max_id.max(u).max(v);
            raw.push((u, v, w));
        }
        let inferred = if raw.is_empty() { 0 } else { max_id as usize + 1 };
        let n = n_nodes.unwrap_or(inferred);
        if n < inferred {
            return Err(Error::Inconsistent(format!(
                "edge list references node {}, but n_nodes = {n}",
                inferred - 1
            )));
        }
        let mut el = EdgeList::new(n);
        for (u, v, w) in raw {
            el.add(u, v, w)?;
        }
        Ok(el)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_and_rejects_duplicates() {
        let mut e = EdgeList::new(4);
        e.add(2, 1, 0.5).unwrap();
        assert!(e.contains(1, 2));
        assert!(e.contains(2, 1));
        assert!(matches!(e.add(1, 2, 0.9), Err(Error::Structure(_))));
        assert!(matches!(e.add(3, 3, 0.1), Err(Error::Structure(_))));
    }

    #[test]
    fn component_count_with_isolated_nodes() {
        let mut e = EdgeList::new(5);
        e.add(0, 1, 1.0).unwrap();
        assert_eq!(e.component_count(), 4);
        let empty = EdgeList::new(5);
        assert_eq!(empty.component_count(), 5);
    }

    #[test]
    fn tsv_roundtrip_sorted() {
        let mut e = EdgeList::new(4);
        e.add(3, 1, 0.25).unwrap();
        e.add(0, 2, -0.125).unwrap();
        e.add(0, 1, 1.0).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        e.write_tsv(f.path()).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert_eq!(text, "0\t1\t1.000000\n0\t2\t-0.125000\n1\t3\t0.250000\n");
        let back = EdgeList::read_tsv(f.path(), None).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.n_nodes(), 4);
        assert!(back.contains(1, 3));
    }
}
