// SPDX-License-Identifier: Apache-2.0 OR MIT
//! Random geometric topologies and static multipath FIBs.
//!
//! FIBs are filled offline with breadth-first hop counts from every
//! prefix anchor, which stands in for a control-plane routing protocol.
//! Every neighbor of a router gets an entry for every reachable prefix:
//! `D(i, p, q) = 1 + hops(q, anchor(p))`.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ids::{GroupId, NodeId};
use crate::time::SimDuration;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    fn distance_squared(self, other: Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub position: Position,
}

/// Undirected point-to-point link, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
    pub delay: SimDuration,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("topology needs at least one node")]
    Empty,
    #[error("invalid geometry: side and radius must be positive")]
    InvalidGeometry,
    #[error("node ids must be dense: expected {expected}, found {found}")]
    SparseIds { expected: u32, found: u32 },
    #[error("link {0}-{0} is a self-link")]
    SelfLink(NodeId),
    #[error("duplicate link {0}-{1}")]
    DuplicateLink(NodeId, NodeId),
    #[error("link endpoint {0} does not exist")]
    UnknownNode(NodeId),
    #[error("topology is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("no connected topology after {attempts} seeds starting at {first_seed}")]
    RetriesExhausted { first_seed: u64, attempts: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    adjacency: Vec<Vec<(NodeId, SimDuration)>>,
}

impl Topology {
    /// Builds a topology from explicit nodes and links, checking id density,
    /// self-links and duplicates. Links are normalized to `a < b` and sorted.
    pub fn new(nodes: Vec<Node>, links: Vec<Link>) -> Result<Self, TopologyError> {
        if nodes.is_empty() {
            return Err(TopologyError::Empty);
        }
        for (idx, node) in nodes.iter().enumerate() {
            if node.id.index() != idx {
                return Err(TopologyError::SparseIds {
                    expected: idx as u32,
                    found: node.id.0,
                });
            }
        }
        let n = nodes.len();
        let mut normalized = Vec::with_capacity(links.len());
        for link in links {
            if link.a == link.b {
                return Err(TopologyError::SelfLink(link.a));
            }
            for end in [link.a, link.b] {
                if end.index() >= n {
                    return Err(TopologyError::UnknownNode(end));
                }
            }
            let (a, b) = if link.a < link.b { (link.a, link.b) } else { (link.b, link.a) };
            normalized.push(Link { a, b, delay: link.delay });
        }
        normalized.sort_by_key(|l| (l.a, l.b));
        for pair in normalized.windows(2) {
            if pair[0].a == pair[1].a && pair[0].b == pair[1].b {
                return Err(TopologyError::DuplicateLink(pair[0].a, pair[0].b));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for link in &normalized {
            adjacency[link.a.index()].push((link.b, link.delay));
            adjacency[link.b.index()].push((link.a, link.delay));
        }
        for list in &mut adjacency {
            list.sort_by_key(|(id, _)| *id);
        }
        Ok(Topology {
            nodes,
            links: normalized,
            adjacency,
        })
    }

    /// Connects every pair of positions no farther apart than `radius`.
    pub fn from_positions(
        positions: &[Position],
        radius: f64,
        link_delay: SimDuration,
    ) -> Result<Self, TopologyError> {
        if radius.is_nan() || radius <= 0.0 {
            return Err(TopologyError::InvalidGeometry);
        }
        let nodes: Vec<Node> = positions
            .iter()
            .enumerate()
            .map(|(i, &position)| Node {
                id: NodeId(i as u32),
                position,
            })
            .collect();
        let limit = radius * radius;
        let mut links = Vec::new();
        for i in 0..positions.len() {
            for j in (i + 1)..positions.len() {
                if positions[i].distance_squared(positions[j]) <= limit {
                    links.push(Link {
                        a: NodeId(i as u32),
                        b: NodeId(j as u32),
                        delay: link_delay,
                    });
                }
            }
        }
        Topology::new(nodes, links)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Neighbors sorted by id, with the delay of the connecting link.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, SimDuration)] {
        &self.adjacency[node.index()]
    }

    pub fn link_delay(&self, a: NodeId, b: NodeId) -> Option<SimDuration> {
        let list = self.adjacency.get(a.index())?;
        list.binary_search_by_key(&b, |(id, _)| *id)
            .ok()
            .map(|idx| list[idx].1)
    }

    /// Hop counts from `source`; `None` for unreachable nodes.
    pub fn hop_distances(&self, source: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.nodes.len()];
        let mut queue = VecDeque::new();
        dist[source.index()] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.index()].unwrap_or(0);
            for &(v, _) in &self.adjacency[u.index()] {
                if dist[v.index()].is_none() {
                    dist[v.index()] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..self.nodes.len() {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v.index()] {
                        seen[v.index()] = true;
                        stack.push(v.index());
                    }
                }
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }
}

/// Parameters of a random geometric graph in a `side x side` square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricParams {
    pub nodes: u32,
    pub side: f64,
    pub radius: f64,
    pub link_delay: SimDuration,
}

/// Draws `n` positions uniformly from the square and links every pair
/// within `radius`. A disconnected draw is reported as
/// [`TopologyError::Disconnected`]; retrying is up to the caller.
pub fn generate_random_geometric(
    params: &GeometricParams,
    seed: u64,
) -> Result<Topology, TopologyError> {
    if params.nodes == 0 {
        return Err(TopologyError::Empty);
    }
    if params.side.is_nan() || params.side <= 0.0 || params.radius.is_nan() || params.radius <= 0.0
    {
        return Err(TopologyError::InvalidGeometry);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions: Vec<Position> = (0..params.nodes)
        .map(|_| {
            let x = rng.gen_range(0.0..params.side);
            let y = rng.gen_range(0.0..params.side);
            Position::new(x, y)
        })
        .collect();
    let topo = Topology::from_positions(&positions, params.radius, params.link_delay)?;
    let components = topo.component_count();
    if components > 1 {
        return Err(TopologyError::Disconnected { components });
    }
    Ok(topo)
}

/// Retries with `seed + 1, seed + 2, ...` until the draw is connected.
/// Returns the topology together with the seed that produced it.
pub fn generate_connected(
    params: &GeometricParams,
    seed: u64,
    max_attempts: u32,
) -> Result<(Topology, u64), TopologyError> {
    for attempt in 0..max_attempts {
        let candidate = seed.wrapping_add(attempt as u64);
        match generate_random_geometric(params, candidate) {
            Ok(topo) => return Ok((topo, candidate)),
            Err(TopologyError::Disconnected { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(TopologyError::RetriesExhausted {
        first_seed: seed,
        attempts: max_attempts,
    })
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AnchorError {
    #[error("group {0} already has an anchor")]
    DuplicateAnchor(GroupId),
    #[error("anchor {1} for group {0} is not a node of the topology")]
    UnknownAnchor(GroupId, NodeId),
}

/// Which router originates each group prefix. One producer per group.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnchorSet {
    anchors: BTreeMap<GroupId, NodeId>,
}

impl AnchorSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, group: GroupId, anchor: NodeId) -> Result<(), AnchorError> {
        if self.anchors.contains_key(&group) {
            return Err(AnchorError::DuplicateAnchor(group));
        }
        self.anchors.insert(group, anchor);
        Ok(())
    }

    pub fn anchor(&self, group: GroupId) -> Option<NodeId> {
        self.anchors.get(&group).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GroupId, NodeId)> + '_ {
        self.anchors.iter().map(|(g, n)| (*g, *n))
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }
}

/// Distances reported by each neighbor for one prefix, kept in rank order:
/// ascending distance, ties broken by ascending neighbor id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixEntry {
    ranked: Vec<(NodeId, u32)>,
}

impl PrefixEntry {
    pub fn new(distances: impl IntoIterator<Item = (NodeId, u32)>) -> Self {
        let mut ranked: Vec<(NodeId, u32)> = distances.into_iter().collect();
        ranked.sort_by_key(|&(id, d)| (d, id));
        ranked.dedup_by_key(|(id, _)| *id);
        PrefixEntry { ranked }
    }

    /// Neighbors in rank order.
    pub fn ranked(&self) -> &[(NodeId, u32)] {
        &self.ranked
    }

    pub fn distance_via(&self, neighbor: NodeId) -> Option<u32> {
        self.ranked
            .iter()
            .find(|(id, _)| *id == neighbor)
            .map(|(_, d)| *d)
    }

    pub fn min_distance(&self) -> Option<u32> {
        self.ranked.first().map(|(_, d)| *d)
    }

    /// First-ranked neighbor at the minimum distance.
    pub fn successor(&self) -> Option<NodeId> {
        self.ranked.first().map(|(id, _)| *id)
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }
}

/// Per-router FIB. A prefix missing from the table means "no route".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FibTable {
    prefixes: BTreeMap<GroupId, PrefixEntry>,
}

impl FibTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, prefix: GroupId, entry: PrefixEntry) {
        self.prefixes.insert(prefix, entry);
    }

    pub fn entry(&self, prefix: GroupId) -> Option<&PrefixEntry> {
        self.prefixes.get(&prefix)
    }

    pub fn has_route(&self, prefix: GroupId) -> bool {
        self.prefixes.contains_key(&prefix)
    }

    pub fn prefixes(&self) -> impl Iterator<Item = (GroupId, &PrefixEntry)> + '_ {
        self.prefixes.iter().map(|(g, e)| (*g, e))
    }

    pub fn len(&self) -> usize {
        self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }
}

/// Minimum distance to `prefix` over all neighbors; `None` without a route.
pub fn min_prefix_distance(fib: &FibTable, prefix: GroupId) -> Option<u32> {
    fib.entry(prefix).and_then(PrefixEntry::min_distance)
}

/// FIB of every router, indexed by node id.
pub fn compute_fibs(topo: &Topology, anchors: &AnchorSet) -> Result<Vec<FibTable>, AnchorError> {
    let mut fibs = vec![FibTable::new(); topo.len()];
    for (group, anchor) in anchors.iter() {
        if anchor.index() >= topo.len() {
            return Err(AnchorError::UnknownAnchor(group, anchor));
        }
        let hops = topo.hop_distances(anchor);
        for node in topo.nodes() {
            let entry = PrefixEntry::new(
                topo.neighbors(node.id)
                    .iter()
                    .filter_map(|&(q, _)| hops[q.index()].map(|h| (q, h + 1))),
            );
            if !entry.is_empty() {
                fibs[node.id.index()].insert(group, entry);
            }
        }
    }
    Ok(fibs)
}
