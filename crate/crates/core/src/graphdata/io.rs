//! Snapshot edge-list text format.
//!
//! ```text
//! # comment
//! t 0 n 4
//! 0 1
//! 1 2
//! t 1 n 5
//! 0 1
//! 3 4
//! ```
//!
//! Each block starts with `t <index> n <node-count>`; the snapshot declares
//! nodes `0..node-count`. Edges are whitespace-separated global id pairs.
//! Optional attributes live next to the edge file in `<file>.attrs/<index>.csv`,
//! one comma-separated row per node.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{DynamicGraph, Edge, SnapshotGraph};
use crate::autodiff::Tensor;
use crate::error::{Error, Result};

struct Block {
    index: i64,
    line: usize,
    nodes: usize,
    edges: Vec<(Edge, usize)>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses the edge-list text (without attributes).
pub fn parse_edge_list(text: &str) -> Result<(Vec<i64>, DynamicGraph)> {
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok[0] == "t" {
            if tok.len() != 4 || tok[2] != "n" {
                return Err(parse_err(line_no, "expected header `t <index> n <node-count>`"));
            }
            let index = tok[1]
                .parse::<i64>()
                .map_err(|_| parse_err(line_no, format!("bad snapshot index `{}`", tok[1])))?;
            let nodes = tok[3]
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("bad node count `{}`", tok[3])))?;
            blocks.push(Block {
                index,
                line: line_no,
                nodes,
                edges: Vec::new(),
            });
            continue;
        }
        let block = blocks
            .last_mut()
            .ok_or_else(|| parse_err(line_no, "edge before any `t` header"))?;
        if tok.len() != 2 {
            return Err(parse_err(line_no, "expected `<u> <v>`"));
        }
        let parse_id = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("bad node id `{s}`")))
        };
        let (u, v) = (parse_id(tok[0])?, parse_id(tok[1])?);
        if u == v {
            return Err(parse_err(line_no, format!("self-loop ({u}, {v})")));
        }
        if u >= block.nodes || v >= block.nodes {
            return Err(parse_err(
                line_no,
                format!("edge ({u}, {v}) references undeclared node (n = {})", block.nodes),
            ));
        }
        block.edges.push(((u, v), line_no));
    }
    if blocks.is_empty() {
        return Err(parse_err(0, "no snapshots"));
    }
    blocks.sort_by_key(|b| b.index);
    for w in blocks.windows(2) {
        if w[1].index != w[0].index + 1 {
            return Err(parse_err(
                w[1].line,
                format!(
                    "snapshot indices not contiguous: {} follows {}",
                    w[1].index, w[0].index
                ),
            ));
        }
    }
    let indices = blocks.iter().map(|b| b.index).collect();
    let snapshots = blocks
        .into_iter()
        .map(|b| {
            SnapshotGraph::with_prefix_nodes(b.nodes, b.edges.iter().map(|&(e, _)| e))
                .map_err(|e| parse_err(b.line, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((indices, DynamicGraph::new(snapshots)?))
}

fn attr_dir(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".attrs");
    PathBuf::from(s)
}

fn parse_csv_matrix(text: &str, origin: &Path) -> Result<Tensor> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(i + 1, format!("{}: {e}", origin.display())))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(i + 1, format!("{}: ragged row", origin.display())));
            }
        }
        rows.push(row);
    }
    Ok(Tensor::from_rows(&rows))
}

/// Loads a dynamic graph from the snapshot edge-list format, attaching
/// attribute matrices when a `<path>.attrs/` directory exists.
pub fn load_dynamic_graph(path: impl AsRef<Path>) -> Result<DynamicGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let (indices, dg) = parse_edge_list(&text)?;
    let dir = attr_dir(path);
    if !dir.is_dir() {
        return Ok(dg);
    }
    let mut snapshots = dg.snapshots().to_vec();
    for (snap, idx) in snapshots.iter_mut().zip(&indices) {
        let file = dir.join(format!("{idx}.csv"));
        let x = parse_csv_matrix(&fs::read_to_string(&file)?, &file)?;
        snap.set_attributes(Some(x))?;
    }
    DynamicGraph::new(snapshots)
}

/// Renders the edge-list text for `dg`. Snapshots must declare prefix node
/// sets `0..n`.
pub fn format_edge_list(dg: &DynamicGraph) -> Result<String> {
    let mut out = String::new();
    for (t, s) in dg.snapshots().iter().enumerate() {
        if s.node_ids().iter().enumerate().any(|(i, &id)| i != id) {
            return Err(Error::InvalidGraph(format!(
                "snapshot {t} does not use prefix node ids; not representable in edge-list format"
            )));
        }
        writeln!(out, "t {t} n {}", s.num_nodes()).expect("string write");
        for (u, v) in s.edges() {
            writeln!(out, "{u} {v}").expect("string write");
        }
    }
    Ok(out)
}

pub fn save_dynamic_graph(dg: &DynamicGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_edge_list(dg)?)?;
    if dg.attribute_dim().is_some() {
        let dir = attr_dir(path);
        fs::create_dir_all(&dir)?;
        for (t, s) in dg.snapshots().iter().enumerate() {
            let x = s.attributes().expect("uniform attributes");
            let mut text = String::new();
            for r in 0..x.rows() {
                let row: Vec<String> = x.row(r).iter().map(|v| v.to_string()).collect();
                text.push_str(&row.join(","));
                text.push('\n');
            }
            fs::write(dir.join(format!("{t}.csv")), text)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_two_snapshot_file() {
        let (_, dg) = parse_edge_list("t 0 n 2\n0 1\nt 1 n 3\n0 1\n1 2\n").unwrap();
        assert_eq!(dg.len(), 2);
        assert_eq!(dg.snapshot(0).num_nodes(), 2);
        assert_eq!(dg.snapshot(1).num_nodes(), 3);
        assert_eq!(dg.snapshot(1).num_edges(), 2);
        assert_eq!(dg.num_nodes(), 3);
    }

    #[test]
    fn self_loop_rejected_with_line() {
        let err = parse_edge_list("t 0 n 6\n0 1\n5 5\nt 1 n 6\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn non_contiguous_indices_rejected() {
        let err = parse_edge_list("t 0 n 2\n0 1\nt 2 n 2\n0 1\n").unwrap_err();
        assert!(err.to_string().contains("contiguous"), "{err}");
    }

    #[test]
    fn undeclared_node_rejected() {
        let err = parse_edge_list("t 0 n 2\n0 3\nt 1 n 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn blocks_sorted_by_index_and_duplicates_collapsed() {
        let (idx, dg) = parse_edge_list("t 1 n 3\n1 2\nt 0 n 2\n0 1\n1 0\n").unwrap();
        assert_eq!(idx, vec![0, 1]);
        assert_eq!(dg.snapshot(0).num_edges(), 1);
        assert!(dg.snapshot(1).has_edge(2, 1));
    }

    #[test]
    fn attributes_roundtrip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        let x0 = Tensor::from_rows(&[[0.1, 2.0], [3.5, -4.25]]);
        let x1 = Tensor::from_rows(&[[1.0 / 3.0, 0.0], [1e-300, 7.0]]);
        let s0 = SnapshotGraph::new(vec![0, 1], [(0, 1)], Some(x0)).unwrap();
        let s1 = SnapshotGraph::new(vec![0, 1], [], Some(x1)).unwrap();
        let dg = DynamicGraph::new(vec![s0, s1]).unwrap();
        save_dynamic_graph(&dg, &path).unwrap();
        assert_eq!(load_dynamic_graph(&path).unwrap(), dg);
    }
}
