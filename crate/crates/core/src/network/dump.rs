//! Line-based text format for graph sequences.
//!
//! ```text
//! m 4
//! step 0
//! edge 0 1 1
//! edge 0 2 1
//! step 1
//! ...
//! ```
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use super::graph::WeightedGraph;
use super::sequence::GraphSequence;
use crate::error::{Error, Result};

/// Writes `steps` consecutive graphs starting at step 0.
pub fn write_sequence(seq: &GraphSequence, steps: usize) -> String {
    let mut out = String::new();
    writeln!(out, "m {}", seq.node_count()).unwrap();
    for k in 0..steps as u64 {
        writeln!(out, "step {k}").unwrap();
        for (i, j, w) in seq.graph(k).edges() {
            // {:?} on f64 round-trips exactly
            writeln!(out, "edge {i} {j} {w:?}").unwrap();
        }
    }
    out
}

/// Parses a dump back into a replay sequence.
pub fn parse_sequence(text: &str) -> Result<GraphSequence> {
    GraphSequence::from_graphs(parse_graphs(text)?)
}

/// Parses a dump into its list of graphs, in step order.
pub fn parse_graphs(text: &str) -> Result<Vec<WeightedGraph>> {
    let mut nodes: Option<usize> = None;
    let mut graphs: Vec<WeightedGraph> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "m" => {
                if nodes.is_some() {
                    return Err(err("duplicate `m` header".into()));
                }
                let m = parse_field::<usize>(&fields, 1, 2, line_no)?;
                nodes = Some(m);
            }
            "step" => {
                let m = nodes.ok_or_else(|| err("`step` before `m` header".into()))?;
                let k = parse_field::<usize>(&fields, 1, 2, line_no)?;
                if k != graphs.len() {
                    return Err(err(format!("expected step {}, found {k}", graphs.len())));
                }
                graphs.push(WeightedGraph::new(m).map_err(|e| err(e.to_string()))?);
            }
            "edge" => {
                let g = graphs
                    .last_mut()
                    .ok_or_else(|| err("`edge` before any `step`".into()))?;
                let i = parse_field::<usize>(&fields, 1, 4, line_no)?;
                let j = parse_field::<usize>(&fields, 2, 4, line_no)?;
                let w = parse_field::<f64>(&fields, 3, 4, line_no)?;
                g.add_edge(i, j, w).map_err(|e| err(e.to_string()))?;
            }
            other => return Err(err(format!("unknown record `{other}`"))),
        }
    }
    if nodes.is_none() {
        return Err(Error::Parse {
            line: 0,
            message: "missing `m` header".into(),
        });
    }
    if graphs.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no `step` records".into(),
        });
    }
    Ok(graphs)
}

fn parse_field<T: std::str::FromStr>(
    fields: &[&str],
    at: usize,
    expected: usize,
    line: usize,
) -> Result<T> {
    if fields.len() != expected {
        return Err(Error::Parse {
            line,
            message: format!("expected {expected} fields, found {}", fields.len()),
        });
    }
    fields[at].parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse `{}`", fields[at]),
    })
}
