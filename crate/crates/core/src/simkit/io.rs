//! CSV readers and writers. Files use 1-based vertex indices; lines starting with `#`
//! are comments.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::spectrum::GraphSignal;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

/// Rows of a headed CSV as `(line, fields)`, after checking the header.
fn read_rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut rows = Vec::new();
    let mut saw_header = false;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if !saw_header {
            let got: Vec<&str> = rec.iter().collect();
            if got != header {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected header `{}`, found `{}`", header.join(","), got.join(",")),
                });
            }
            saw_header = true;
            continue;
        }
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            msg: format!("missing header `{}`", header.join(",")),
        });
    }
    Ok(rows)
}

fn parse_index(line: usize, s: &str) -> Result<usize> {
    let v: i64 = s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("`{s}` is not an integer node index"),
    })?;
    if v < 1 {
        return Err(Error::NodeIndexOutOfRange { line, index: v });
    }
    Ok(v as usize - 1)
}

fn parse_real(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("`{s}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("`{s}` is not finite"),
        });
    }
    Ok(v)
}

/// Reads `src,dst,weight`. The vertex count is the largest index that appears; endpoints
/// may be listed in either order.
pub fn read_graph_csv<R: Read>(input: R) -> Result<Graph> {
    let rows = read_rows(input, &["src", "dst", "weight"])?;
    let mut seen = BTreeSet::new();
    let mut edges = Vec::with_capacity(rows.len());
    let mut m = 0;
    for (line, f) in &rows {
        let line = *line;
        let (a, b) = (parse_index(line, &f[0])?, parse_index(line, &f[1])?);
        let w = parse_real(line, &f[2])?;
        if a == b {
            return Err(Error::SelfLoop { line, node: a + 1 });
        }
        if w < 0.0 {
            return Err(Error::NegativeWeight { line, weight: w });
        }
        let e = Edge::new(a, b, w);
        if w == 0.0 {
            return Err(Error::ZeroWeight {
                line,
                src: e.i + 1,
                dst: e.j + 1,
            });
        }
        if !seen.insert(e.key()) {
            return Err(Error::DuplicateEdge {
                line,
                src: e.i + 1,
                dst: e.j + 1,
            });
        }
        m = m.max(e.j + 1);
        edges.push(e);
    }
    if edges.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "graph file has no edges".into(),
        });
    }
    Graph::new(m, edges)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| io_err(path, e))
}

pub fn load_graph_csv(path: impl AsRef<Path>) -> Result<Graph> {
    read_graph_csv(open(path.as_ref())?)
}

/// Reads `node,<column>` rows covering nodes `1..=N` exactly once each, in any order.
/// `check` vets each value together with its line number.
fn read_node_values<R: Read>(input: R, column: &str, check: impl Fn(usize, f64) -> Result<()>) -> Result<DVector<f64>> {
    let rows = read_rows(input, &["node", column])?;
    let mut values = BTreeMap::new();
    let mut lines = Vec::new();
    for (line, f) in &rows {
        let node = parse_index(*line, &f[0])?;
        let v = parse_real(*line, &f[1])?;
        check(*line, v)?;
        if values.insert(node, v).is_some() {
            return Err(Error::Parse {
                line: *line,
                msg: format!("node {} listed twice", node + 1),
            });
        }
        lines.push((node, *line));
    }
    let n = values.len();
    if n == 0 {
        return Err(Error::Parse {
            line: 1,
            msg: "file has no rows".into(),
        });
    }
    if let Some(&(node, line)) = lines.iter().find(|(node, _)| *node >= n) {
        return Err(Error::NodeIndexOutOfRange {
            line,
            index: node as i64 + 1,
        });
    }
    Ok(DVector::from_iterator(n, values.into_values()))
}

pub fn read_signal_csv<R: Read>(input: R) -> Result<GraphSignal> {
    Ok(GraphSignal(read_node_values(input, "value", |_, _| Ok(()))?))
}

pub fn load_signal_csv(path: impl AsRef<Path>) -> Result<GraphSignal> {
    read_signal_csv(open(path.as_ref())?)
}

/// Per-node noise variances from `node,variance`; every variance must be positive.
pub fn read_node_noise_csv<R: Read>(input: R) -> Result<DVector<f64>> {
    read_node_values(input, "variance", |line, v| {
        if v > 0.0 {
            Ok(())
        } else {
            Err(Error::Parse {
                line,
                msg: format!("variance {v} must be positive"),
            })
        }
    })
}

pub fn load_node_noise_csv(path: impl AsRef<Path>) -> Result<DVector<f64>> {
    read_node_noise_csv(open(path.as_ref())?)
}

fn write_all<W: Write>(out: &mut W, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::Io {
        path: "<output>".into(),
        msg: e.to_string(),
    })
}

/// `src,dst,weight`, one line per edge in lexicographic order.
pub fn write_graph_csv<W: Write>(out: &mut W, g: &Graph) -> Result<()> {
    let mut s = String::from("src,dst,weight\n");
    for e in g.edges() {
        s.push_str(&format!("{},{},{}\n", e.i + 1, e.j + 1, e.weight));
    }
    write_all(out, &s)
}

/// `node,value`.
pub fn write_signal_csv<W: Write>(out: &mut W, s: &GraphSignal) -> Result<()> {
    let mut text = String::from("node,value\n");
    for (k, v) in s.0.iter().enumerate() {
        text.push_str(&format!("{},{}\n", k + 1, v));
    }
    write_all(out, &text)
}

/// Row-major `i,j,value`.
pub fn write_matrix_csv<W: Write>(out: &mut W, a: &DMatrix<f64>) -> Result<()> {
    let mut text = String::from("i,j,value\n");
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            text.push_str(&format!("{},{},{}\n", i + 1, j + 1, a[(i, j)]));
        }
    }
    write_all(out, &text)
}

/// `1;4;7` for vertex indices (printed 1-based).
pub fn format_node_selection(nodes: &[usize]) -> String {
    nodes.iter().map(|n| (n + 1).to_string()).collect::<Vec<_>>().join(";")
}

/// `1-2;1-3` for edges (printed 1-based).
pub fn format_edge_selection(edges: &[Edge]) -> String {
    edges
        .iter()
        .map(|e| format!("{}-{}", e.i + 1, e.j + 1))
        .collect::<Vec<_>>()
        .join(";")
}

/// Parses `1;4;7` (or comma separated) into sorted 0-based indices.
pub fn parse_node_list(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for tok in s.split([';', ',']).map(str::trim).filter(|t| !t.is_empty()) {
        out.push(parse_index(0, tok)?);
    }
    out.sort_unstable();
    let before = out.len();
    out.dedup();
    if out.len() != before {
        return Err(Error::Parse {
            line: 0,
            msg: "node list has repeated entries".into(),
        });
    }
    Ok(out)
}
