// SPDX-License-Identifier: Apache-2.0 OR MIT
//! Line-oriented topology files.
//!
//! ```text
//! node <id> <x> <y>
//! link <id1> <id2> <delay_ms>
//! ```
//!
//! Blank lines and `#` comments are skipped.

use std::fmt::Write as _;

use gram_core::ids::NodeId;
use gram_core::topology::{Link, Node, Position, Topology, TopologyError};
use gram_core::SimDuration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopologyFileError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: &'static str },
    #[error(transparent)]
    Invalid(#[from] TopologyError),
}

pub fn write_topology(topo: &Topology) -> String {
    let mut out = String::new();
    for node in topo.nodes() {
        let _ = writeln!(
            out,
            "node {} {} {}",
            node.id, node.position.x, node.position.y
        );
    }
    for link in topo.links() {
        let _ = writeln!(out, "link {} {} {}", link.a, link.b, link.delay);
    }
    out
}

pub fn parse_topology(text: &str) -> Result<Topology, TopologyFileError> {
    let mut nodes = Vec::new();
    let mut links = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let syntax = |msg| TopologyFileError::Syntax { line, msg };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match fields.as_slice() {
            ["node", id, x, y] => {
                let id = id.parse().map_err(|_| syntax("bad node id"))?;
                let x = x.parse().map_err(|_| syntax("bad x coordinate"))?;
                let y = y.parse().map_err(|_| syntax("bad y coordinate"))?;
                nodes.push(Node {
                    id: NodeId(id),
                    position: Position::new(x, y),
                });
            }
            ["link", a, b, delay] => {
                let a = a.parse().map_err(|_| syntax("bad link endpoint"))?;
                let b = b.parse().map_err(|_| syntax("bad link endpoint"))?;
                let delay: f64 = delay.parse().map_err(|_| syntax("bad delay"))?;
                if !(delay.is_finite() && delay >= 0.0) {
                    return Err(syntax("bad delay"));
                }
                links.push(Link {
                    a: NodeId(a),
                    b: NodeId(b),
                    delay: SimDuration::from_millis_f64(delay),
                });
            }
            _ => return Err(syntax("expected `node <id> <x> <y>` or `link <a> <b> <delay_ms>`")),
        }
    }
    nodes.sort_by_key(|n| n.id);
    Ok(Topology::new(nodes, links)?)
}
