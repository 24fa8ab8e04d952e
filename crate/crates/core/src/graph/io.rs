//! Edge-list text format.
//!
//! One `src dst [weight]` triple per line, whitespace separated. Lines that
//! are blank or start with `#` are skipped.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::Graph;
use crate::{Error, Result};

/// A loaded graph and the original id of each compacted node.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `original_ids[k]` is the file id of node `k`; ascending.
    pub original_ids: Vec<u64>,
}

/// Parse an edge list. Ids are compacted to `0..N` in ascending order of the
/// original ids. Self-loops are dropped. Repeated edges sum their weights
/// when `weighted`, and collapse to a single unit edge otherwise.
pub fn parse_edge_list<R: Read>(reader: R, weighted: bool) -> Result<LoadedGraph> {
    let mut raw: Vec<(u64, u64, f64)> = Vec::new();
    let mut ids = std::collections::BTreeSet::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `src dst [weight]`, got {} fields", fields.len()),
            });
        }
        let parse_id = |s: &str| {
            s.parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("node id `{s}` is not a nonnegative integer"),
            })
        };
        let (a, b) = (parse_id(fields[0])?, parse_id(fields[1])?);
        let w = match (weighted, fields.get(2)) {
            (true, Some(s)) => {
                let w: f64 = s.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("weight `{s}` is not a number"),
                })?;
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("weight {w} must be positive and finite"),
                    });
                }
                w
            }
            _ => 1.0,
        };
        ids.insert(a);
        ids.insert(b);
        if a != b {
            raw.push((a, b, w));
        }
    }
    if ids.is_empty() {
        return Err(Error::EmptyInput);
    }
    let original_ids: Vec<u64> = ids.into_iter().collect();
    let index = |id: u64| original_ids.binary_search(&id).expect("id collected above");

    let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (a, b, w) in raw {
        let (i, j) = (index(a), index(b));
        let key = (i.min(j), i.max(j));
        if weighted {
            *merged.entry(key).or_insert(0.0) += w;
        } else {
            merged.insert(key, 1.0);
        }
    }
    let graph = Graph::from_edges(original_ids.len(), merged.into_iter().map(|((i, j), w)| (i, j, w)))?;
    Ok(LoadedGraph {
        graph,
        original_ids,
    })
}

pub fn load_edge_list(path: &Path, weighted: bool) -> Result<LoadedGraph> {
    parse_edge_list(File::open(path)?, weighted)
}

/// One undirected edge per line with `i < j`, lexicographic order, weights
/// printed with 17 significant digits.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    for (i, j, w) in g.edges() {
        writeln!(out, "{i} {j} {w:.16e}")?;
    }
    Ok(())
}

/// CSV `node,value`.
pub fn write_objective<W: Write>(values: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node", "value"])?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([i.to_string(), format!("{v:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}
