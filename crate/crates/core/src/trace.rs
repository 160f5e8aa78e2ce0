// SPDX-License-Identifier: Apache-2.0 OR MIT
//! Trace records and checks that run over a whole trace.
//!
//! One record per transmission (`TX`) or reception (`RX`). The line form is
//! tab-separated:
//!
//! ```text
//! <time_ms> <node> <RX|TX> <kind> <group> <counter> <peer> [<code>]
//! ```
//!
//! Routers print as bare ids (`3`), consumers as `c<id>`, groups as
//! `g<id>`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::ids::{ConsumerId, GroupId, NodeId, Peer};
use crate::message::{Packet, PacketKind, ReplyCode};
use crate::time::{SimDuration, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Rx,
    Tx,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Rx => "RX",
            Direction::Tx => "TX",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TraceRecord {
    pub time: SimTime,
    pub node: Peer,
    pub dir: Direction,
    pub kind: PacketKind,
    pub group: GroupId,
    pub counter: u64,
    pub peer: Peer,
    pub code: Option<ReplyCode>,
}

impl TraceRecord {
    pub fn new(time: SimTime, node: Peer, dir: Direction, peer: Peer, packet: &Packet) -> Self {
        TraceRecord {
            time,
            node,
            dir,
            kind: packet.kind(),
            group: packet.group(),
            counter: packet.counter(),
            peer,
            code: match packet {
                Packet::Reply(mr) => Some(mr.code),
                _ => None,
            },
        }
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.time,
            self.node,
            self.dir.as_str(),
            self.kind,
            self.group,
            self.counter,
            self.peer
        )?;
        if let Some(code) = self.code {
            write!(f, "\t{code}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceParseError {
    #[error("expected 7 or 8 tab-separated fields, found {0}")]
    FieldCount(usize),
    #[error("bad time field")]
    Time,
    #[error("bad node or peer field")]
    Peer,
    #[error("bad direction field")]
    Direction,
    #[error("bad message kind")]
    Kind,
    #[error("bad group field")]
    Group,
    #[error("bad counter field")]
    Counter,
    #[error("bad reply code")]
    Code,
}

fn parse_peer(s: &str) -> Result<Peer, TraceParseError> {
    match s.strip_prefix('c') {
        Some(rest) => rest
            .parse()
            .map(|id| Peer::Consumer(ConsumerId(id)))
            .map_err(|_| TraceParseError::Peer),
        None => s
            .parse()
            .map(|id| Peer::Router(NodeId(id)))
            .map_err(|_| TraceParseError::Peer),
    }
}

fn parse_time(s: &str) -> Result<SimTime, TraceParseError> {
    let (ms, frac) = s.split_once('.').ok_or(TraceParseError::Time)?;
    if frac.len() != 3 {
        return Err(TraceParseError::Time);
    }
    let ms: u64 = ms.parse().map_err(|_| TraceParseError::Time)?;
    let us: u64 = frac.parse().map_err(|_| TraceParseError::Time)?;
    Ok(SimTime(ms * 1_000 + us))
}

impl FromStr for TraceRecord {
    type Err = TraceParseError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 && fields.len() != 8 {
            return Err(TraceParseError::FieldCount(fields.len()));
        }
        let dir = match fields[2] {
            "RX" => Direction::Rx,
            "TX" => Direction::Tx,
            _ => return Err(TraceParseError::Direction),
        };
        let group = fields[4]
            .strip_prefix('g')
            .and_then(|g| g.parse().ok())
            .map(GroupId)
            .ok_or(TraceParseError::Group)?;
        let code = match fields.get(7) {
            Some(c) => Some(ReplyCode::parse(c).ok_or(TraceParseError::Code)?),
            None => None,
        };
        Ok(TraceRecord {
            time: parse_time(fields[0])?,
            node: parse_peer(fields[1])?,
            dir,
            kind: PacketKind::parse(fields[3]).ok_or(TraceParseError::Kind)?,
            group,
            counter: fields[5].parse().map_err(|_| TraceParseError::Counter)?,
            peer: parse_peer(fields[6])?,
            code,
        })
    }
}

/// A router taking an Interest for round `mc + 1` and moving its counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Acceptance {
    pub time: SimTime,
    pub router: NodeId,
    pub group: GroupId,
    pub counter: u64,
}

/// `(router, group, counter)` triples sent upstream more than once.
pub fn pacing_violations(trace: &[TraceRecord]) -> Vec<(NodeId, GroupId, u64)> {
    let mut seen = BTreeSet::new();
    let mut dup = BTreeSet::new();
    for r in trace {
        if let (Direction::Tx, PacketKind::Mi, Peer::Router(node), Peer::Router(_)) =
            (r.dir, r.kind, r.node, r.peer)
        {
            let key = (node, r.group, r.counter);
            if !seen.insert(key) {
                dup.insert(key);
            }
        }
    }
    dup.into_iter().collect()
}

/// `(router, group, counter)` triples accepted more than once.
pub fn repeated_acceptances(acceptances: &[Acceptance]) -> Vec<(NodeId, GroupId, u64)> {
    let mut seen = BTreeSet::new();
    let mut dup = BTreeSet::new();
    for a in acceptances {
        let key = (a.router, a.group, a.counter);
        if !seen.insert(key) {
            dup.insert(key);
        }
    }
    dup.into_iter().collect()
}

type MatchKey = (SimTime, Peer, Peer, PacketKind, GroupId, u64, Option<ReplyCode>);

fn settle(
    balance: &mut BTreeMap<MatchKey, (i64, TraceRecord)>,
    key: MatchKey,
    record: &TraceRecord,
    step: i64,
) {
    let slot = balance.entry(key).or_insert((0, *record));
    slot.0 += step;
    if slot.0 == 0 {
        balance.remove(&key);
    }
}

/// Transmissions without exactly one matching reception after the hop
/// delay, and receptions nobody sent. `delay(from, to)` gives the hop
/// delay; `None` marks a hop that does not exist.
pub fn conservation_violations(
    trace: &[TraceRecord],
    mut delay: impl FnMut(Peer, Peer) -> Option<SimDuration>,
) -> Vec<TraceRecord> {
    let mut balance: BTreeMap<MatchKey, (i64, TraceRecord)> = BTreeMap::new();
    let mut bad = Vec::new();
    for r in trace {
        match r.dir {
            Direction::Tx => {
                let Some(d) = delay(r.node, r.peer) else {
                    bad.push(*r);
                    continue;
                };
                let key = (r.time + d, r.peer, r.node, r.kind, r.group, r.counter, r.code);
                settle(&mut balance, key, r, 1);
            }
            Direction::Rx => {
                let key = (r.time, r.node, r.peer, r.kind, r.group, r.counter, r.code);
                settle(&mut balance, key, r, -1);
            }
        }
    }
    bad.extend(balance.into_values().filter(|(n, _)| *n != 0).map(|(_, r)| r));
    bad
}

/// Data receptions on a hop the receiver never sent a matching Interest
/// over. Multicast data needs an earlier Interest for the same group on
/// the reverse hop; NDN data needs one for the exact name.
pub fn reverse_path_violations(trace: &[TraceRecord]) -> Vec<TraceRecord> {
    let mut group_requests: BTreeSet<(Peer, Peer, GroupId)> = BTreeSet::new();
    let mut name_requests: BTreeSet<(Peer, Peer, GroupId, u64)> = BTreeSet::new();
    let mut bad = Vec::new();
    for r in trace {
        match (r.dir, r.kind) {
            (Direction::Tx, PacketKind::Mi) => {
                group_requests.insert((r.node, r.peer, r.group));
            }
            (Direction::Tx, PacketKind::Ni) => {
                name_requests.insert((r.node, r.peer, r.group, r.counter));
            }
            (Direction::Rx, PacketKind::Mp) => {
                if !group_requests.contains(&(r.node, r.peer, r.group)) {
                    bad.push(*r);
                }
            }
            (Direction::Rx, PacketKind::Nd) => {
                if !name_requests.contains(&(r.node, r.peer, r.group, r.counter)) {
                    bad.push(*r);
                }
            }
            _ => {}
        }
    }
    bad
}
