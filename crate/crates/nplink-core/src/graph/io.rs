//! Edge-list ingestion and serialization.
//!
//! Format: UTF-8 lines `t src dst`, whitespace-separated, `#` starts a
//! comment. Timesteps need not arrive sorted; gaps materialize as empty
//! snapshots; node ids are compacted to a dense range.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use super::{GraphSequence, NodeId};
use crate::{Error, Result};

/// Options for [`load_edge_list`].
#[derive(Debug, Clone, Copy)]
pub struct EdgeListOptions {
    /// When false, every line inserts both `src → dst` and `dst → src`.
    pub directed: bool,
    /// Reject timesteps at or beyond this bound.
    pub max_timesteps: usize,
}

impl Default for EdgeListOptions {
    fn default() -> Self {
        EdgeListOptions { directed: true, max_timesteps: 1_000_000 }
    }
}

/// Parse a timestamped edge list into a [`GraphSequence`].
///
/// Node ids are compacted to `[0, n)` preserving their numeric order;
/// self-loops are dropped; missing intermediate timesteps become empty
/// snapshots.
pub fn load_edge_list<R: BufRead>(reader: R, opts: EdgeListOptions) -> Result<GraphSequence> {
    let mut raw: Vec<(usize, u64, u64)> = Vec::new();
    let mut ids: BTreeSet<u64> = BTreeSet::new();
    let mut max_t = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let (t, src, dst) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(t), Some(s), Some(d), None) => (t, s, d),
            _ => {
                return Err(Error::MalformedLine {
                    line: line_no,
                    reason: format!("expected `t src dst`, got `{}`", content.trim()),
                })
            }
        };
        let parse = |field: &str, what: &str| {
            field.parse::<u64>().map_err(|_| Error::MalformedLine {
                line: line_no,
                reason: format!("{what} `{field}` is not a non-negative integer"),
            })
        };
        let t = parse(t, "timestep")? as usize;
        let src = parse(src, "source id")?;
        let dst = parse(dst, "destination id")?;
        if t >= opts.max_timesteps {
            return Err(Error::TimestepOverflow { t, max: opts.max_timesteps });
        }
        max_t = max_t.max(t);
        ids.insert(src);
        ids.insert(dst);
        raw.push((t, src, dst));
    }

    if raw.is_empty() {
        return Err(Error::EmptyInput);
    }

    let rank: std::collections::HashMap<u64, NodeId> =
        ids.iter().enumerate().map(|(r, &id)| (id, r as NodeId)).collect();
    let n = ids.len();

    let mut per_t: Vec<Vec<(NodeId, NodeId)>> = vec![Vec::new(); max_t + 1];
    for (t, src, dst) in raw {
        let (u, v) = (rank[&src], rank[&dst]);
        per_t[t].push((u, v));
        if !opts.directed {
            per_t[t].push((v, u));
        }
    }

    Ok(GraphSequence::from_snapshot_edges(n, per_t))
}

/// Write a sequence back out as `t src dst` lines.
pub fn write_edge_list<W: Write>(seq: &GraphSequence, mut writer: W) -> Result<()> {
    for snap in seq.snapshots() {
        for (u, v) in snap.edges() {
            writeln!(writer, "{} {} {}", snap.t(), u, v)?;
        }
    }
    Ok(())
}
