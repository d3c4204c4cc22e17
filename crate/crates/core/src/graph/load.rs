//! SNAP-style edge-list text files: `src dst [weight]` per line, `#` comments.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use super::{Graph, VertexId};
use crate::error::{Error, Result};

/// Loads an edge list from `path`. Vertex ids are remapped densely in order
/// of first appearance; the original ids stay available on the graph.
pub fn load_edge_list(path: impl AsRef<Path>, directed: bool) -> Result<Graph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    read_edge_list(BufReader::new(file), directed).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io { path: path.to_path_buf(), source },
        other => other,
    })
}

/// Parses an edge list from any buffered reader. When `directed` is false
/// each line contributes both directions.
pub fn read_edge_list<R: BufRead>(reader: R, directed: bool) -> Result<Graph> {
    let mut remap: HashMap<u64, VertexId> = HashMap::new();
    let mut original_ids: Vec<u64> = Vec::new();
    let mut edges: Vec<(VertexId, VertexId, f32)> = Vec::new();

    let mut dense = |id: u64, ids: &mut Vec<u64>| -> VertexId {
        *remap.entry(id).or_insert_with(|| {
            ids.push(id);
            (ids.len() - 1) as VertexId
        })
    };

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|source| Error::Io { path: "<input>".into(), source })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected `src dst [weight]`, found {} fields", fields.len()),
            });
        }
        let parse_id = |s: &str| {
            s.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("`{s}` is not a nonnegative integer vertex id"),
            })
        };
        let src = parse_id(fields[0])?;
        let dst = parse_id(fields[1])?;
        let weight = match fields.get(2) {
            None => 1.0,
            Some(s) => match s.parse::<f32>() {
                Ok(w) if w.is_finite() && w >= 0.0 => w,
                _ => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("`{s}` is not a finite nonnegative weight"),
                    })
                }
            },
        };
        let u = dense(src, &mut original_ids);
        let v = dense(dst, &mut original_ids);
        edges.push((u, v, weight));
        if !directed {
            edges.push((v, u, weight));
        }
    }

    if original_ids.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if original_ids.len() > VertexId::MAX as usize {
        return Err(Error::InvalidParameter("too many vertices for 32-bit ids".into()));
    }
    Graph::from_edges(original_ids.len(), &edges)?.with_original_ids(original_ids)
}

/// Writes `g` as a directed weighted edge list using the original vertex ids.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> io::Result<()> {
    writeln!(out, "# {} vertices, {} directed edges", g.num_vertices(), g.num_edges())?;
    for (u, v, w) in g.edges() {
        writeln!(out, "{} {} {}", g.original_id(u), g.original_id(v), w)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, directed: bool) -> Result<Graph> {
        read_edge_list(text.as_bytes(), directed)
    }

    #[test]
    fn identity_mapping() {
        let g = parse("0 1\n1 2\n", true).unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 2);
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(g.original_ids(), &[0, 1, 2]);
    }

    #[test]
    fn sparse_ids_are_remapped() {
        let g = parse("# c\n5 9 0.5\n", true).unwrap();
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 0.5)]);
        assert_eq!(g.original_ids(), &[5, 9]);
    }

    #[test]
    fn undirected_emits_both_directions() {
        let g = parse("10 20\n20 30 0.25\n", false).unwrap();
        assert_eq!(g.num_edges(), 4);
        assert_eq!(g.out_edges(1).0, &[0, 2]);
    }

    #[test]
    fn malformed_lines_report_their_number() {
        match parse("0 1\n# fine\n1 x\n", true) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("0 1 2 3\n", true), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("0 1 -0.5\n", true), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("0\n", true), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(parse("# nothing\n\n", true), Err(Error::EmptyGraph)));
    }

    #[test]
    fn write_then_read_preserves_the_graph() {
        let g = parse("7 3 0.125\n3 8 0.3\n8 7\n", true).unwrap().generate_ic_weights(4);
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap(), true).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn loading_twice_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        std::fs::write(&path, "1 2 0.5\n2 3\n3 1 0.75\n4 1\n").unwrap();
        let a = load_edge_list(&path, true).unwrap();
        let b = load_edge_list(&path, true).unwrap();
        assert_eq!(a, b);
        assert!(matches!(load_edge_list(dir.path().join("missing"), true), Err(Error::Io { .. })));
    }
}
