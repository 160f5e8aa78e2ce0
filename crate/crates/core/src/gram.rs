// SPDX-License-Identifier: Apache-2.0 OR MIT
//! Router state machine for per-group multicast forwarding.
//!
//! A router keeps, per group, a multicast counter `mc` and a next-hop set
//! `NH` (the MART) plus the set of attached consumers (the GMT). An
//! Interest asking for round `mc + 1` is the only one a router passes
//! upstream; every other Interest is answered locally. Data packets are
//! fanned out to `NH` and the local consumers, never matched against
//! per-Interest state.
//!
//! Handlers append the packets they emit to an output vector and are pure
//! functions of `(state, event, now)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::cache::ContentStore;
use crate::ids::{ConsumerId, GroupId, NodeId, Peer};
use crate::message::{
    producer_content, verify_security_payload, MulticastDataPacket, MulticastInterest,
    MulticastReply, Name, Packet, ReplyCode,
};
use crate::time::{SimDuration, SimTime};
use crate::topology::{FibTable, PrefixEntry};

/// A packet leaving a router or consumer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emission {
    pub to: Peer,
    pub packet: Packet,
}

impl Emission {
    pub fn new(to: Peer, packet: Packet) -> Self {
        Emission { to, packet }
    }
}

/// Loop-free forwarding rule: accept an Interest only when the sender's
/// reported distance is strictly larger than ours. A missing distance is
/// infinity (a local consumer) and always passes.
pub fn lfr_check(sender_distance: Option<u32>, own_min_distance: u32) -> bool {
    match sender_distance {
        None => true,
        Some(d) => d > own_min_distance,
    }
}

/// First neighbor in rank order at the prefix minimum.
pub fn select_successor(fib: &FibTable, prefix: GroupId) -> Option<NodeId> {
    fib.entry(prefix).and_then(PrefixEntry::successor)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MartEntry {
    /// Multicast counter `mc`. Never decreases while the entry lives.
    pub counter: u64,
    /// Next hops toward receivers; contains the router itself when it has
    /// local receivers.
    pub next_hops: BTreeSet<NodeId>,
    /// Time of the last Interest for the group.
    pub last_activity: SimTime,
    /// Highest round whose outcome (data, or a reply closing it) reached
    /// this router. `counter > settled` means round `counter` is in flight.
    pub settled: u64,
    /// Highest round whose data this router has fanned out.
    pub forwarded: u64,
}

impl MartEntry {
    fn new(now: SimTime) -> Self {
        MartEntry {
            counter: 0,
            next_hops: BTreeSet::new(),
            last_activity: now,
            settled: 0,
            forwarded: 0,
        }
    }

    pub fn round_in_flight(&self) -> bool {
        self.counter > self.settled
    }
}

/// One entry per group, never per Interest.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MartTable {
    entries: BTreeMap<GroupId, MartEntry>,
}

impl MartTable {
    pub fn get(&self, group: GroupId) -> Option<&MartEntry> {
        self.entries.get(&group)
    }

    pub fn counter(&self, group: GroupId) -> Option<u64> {
        self.entries.get(&group).map(|e| e.counter)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GroupId, &MartEntry)> + '_ {
        self.entries.iter().map(|(g, e)| (*g, e))
    }

    fn entry_or_create(&mut self, group: GroupId, now: SimTime) -> &mut MartEntry {
        self.entries.entry(group).or_insert_with(|| MartEntry::new(now))
    }
}

/// Local receivers per group plus the router's content cache. The cache
/// is keyed by `(group, counter)`, so it doubles as the per-group content
/// index.
#[derive(Debug)]
pub struct GmtTable {
    members: BTreeMap<GroupId, BTreeSet<ConsumerId>>,
    store: ContentStore,
}

impl GmtTable {
    pub fn new(cache_capacity: usize) -> Self {
        GmtTable {
            members: BTreeMap::new(),
            store: ContentStore::new(cache_capacity),
        }
    }

    pub fn members(&self, group: GroupId) -> impl Iterator<Item = ConsumerId> + '_ {
        self.members.get(&group).into_iter().flatten().copied()
    }

    pub fn has_members(&self, group: GroupId) -> bool {
        self.members.get(&group).is_some_and(|m| !m.is_empty())
    }

    pub fn caching_enabled(&self) -> bool {
        self.store.is_enabled()
    }

    pub fn store(&self) -> &ContentStore {
        &self.store
    }

    /// Stores a content object under `(group, counter)`.
    pub fn cache(&mut self, mp: &MulticastDataPacket) {
        let name = Name {
            group: mp.group,
            counter: mp.counter,
        };
        self.store.insert(name, mp.payload.clone());
    }

    fn cached(&mut self, group: GroupId, counter: u64) -> Option<MulticastDataPacket> {
        let payload = self.store.get(&Name { group, counter })?;
        Some(MulticastDataPacket {
            group,
            security_payload: crate::message::placeholder_digest(group, counter),
            counter,
            payload,
        })
    }
}

#[derive(Debug)]
pub struct RouterState {
    pub id: NodeId,
    pub fib: FibTable,
    pub mart: MartTable,
    pub gmt: GmtTable,
    sources: BTreeSet<GroupId>,
    payload_size: usize,
}

impl RouterState {
    pub fn new(id: NodeId, fib: FibTable, cache_capacity: usize, payload_size: usize) -> Self {
        RouterState {
            id,
            fib,
            mart: MartTable::default(),
            gmt: GmtTable::new(cache_capacity),
            sources: BTreeSet::new(),
            payload_size,
        }
    }

    /// Marks this router as the source of `group`.
    pub fn add_source(&mut self, group: GroupId) {
        self.sources.insert(group);
    }

    pub fn is_source(&self, group: GroupId) -> bool {
        self.sources.contains(&group)
    }

    /// Interest from an attached consumer.
    pub fn handle_local_interest(
        &mut self,
        consumer: ConsumerId,
        mi: &MulticastInterest,
        now: SimTime,
        out: &mut Vec<Emission>,
    ) {
        debug_assert!(mi.distance.is_none(), "consumer Interests carry no distance");
        self.handle_interest(Peer::Consumer(consumer), mi, now, out);
    }

    /// Interest from neighbor router `prev_hop`.
    pub fn handle_neighbor_interest(
        &mut self,
        prev_hop: NodeId,
        mi: &MulticastInterest,
        now: SimTime,
        out: &mut Vec<Emission>,
    ) {
        self.handle_interest(Peer::Router(prev_hop), mi, now, out);
    }

    fn handle_interest(
        &mut self,
        from: Peer,
        mi: &MulticastInterest,
        now: SimTime,
        out: &mut Vec<Emission>,
    ) {
        let group = mi.group;
        let is_source = self.is_source(group);
        if !is_source && !self.fib.has_route(group) {
            let counter = self.mart.counter(group).unwrap_or(0);
            out.push(reply(from, group, ReplyCode::NoRoute, counter));
            return;
        }

        let own_id = self.id;
        let entry = self.mart.entry_or_create(group, now);
        entry.last_activity = now;
        match from {
            Peer::Consumer(c) => {
                entry.next_hops.insert(own_id);
                self.gmt.members.entry(group).or_default().insert(c);
            }
            Peer::Router(p) => {
                entry.next_hops.insert(p);
            }
        }

        if mi.counter != entry.counter + 1 {
            self.answer_out_of_round(from, group, out);
            return;
        }

        // Accepted: the counter moves before anything is sent, so a second
        // request for the same round is answered locally.
        entry.counter += 1;
        let counter = entry.counter;

        if is_source {
            let mp = self.produce(group, counter);
            self.fan_out(group, &mp, out);
            return;
        }

        let route = self.fib.entry(group);
        let own_distance = route.and_then(PrefixEntry::min_distance);
        let successor = route.and_then(PrefixEntry::successor);
        let entry = self.mart.entries.get_mut(&group).expect("entry created above");
        match (own_distance, successor) {
            (Some(own), Some(next)) if lfr_check(mi.distance, own) => {
                out.push(Emission::new(
                    Peer::Router(next),
                    Packet::Interest(MulticastInterest {
                        group,
                        distance: Some(own),
                        counter,
                    }),
                ));
            }
            (Some(_), Some(_)) => {
                entry.settled = entry.settled.max(counter);
                out.push(reply(from, group, ReplyCode::Loop, counter));
            }
            _ => {
                entry.settled = entry.settled.max(counter);
                out.push(reply(from, group, ReplyCode::NoRoute, counter));
            }
        }
    }

    /// Interest whose counter is not `mc + 1`: hand back the current round
    /// if we hold it, stay quiet while it is still in flight (the requester
    /// is already registered and will get it from the fan-out), otherwise
    /// tell the requester our counter.
    fn answer_out_of_round(&mut self, to: Peer, group: GroupId, out: &mut Vec<Emission>) {
        let entry = &self.mart.entries[&group];
        let counter = entry.counter;
        let in_flight = entry.round_in_flight();
        if counter >= 1 {
            if self.is_source(group) {
                let mp = self.produce(group, counter);
                out.push(Emission::new(to, Packet::Data(mp)));
                return;
            }
            if let Some(mp) = self.gmt.cached(group, counter) {
                out.push(Emission::new(to, Packet::Data(mp)));
                return;
            }
            if in_flight && self.gmt.caching_enabled() {
                return;
            }
        }
        out.push(reply(to, group, ReplyCode::InterestError, counter));
    }

    fn produce(&mut self, group: GroupId, counter: u64) -> MulticastDataPacket {
        if let Some(mp) = self.gmt.cached(group, counter) {
            return mp;
        }
        let mp = producer_content(group, counter, self.payload_size);
        self.gmt.cache(&mp);
        if let Some(entry) = self.mart.entries.get_mut(&group) {
            entry.settled = entry.settled.max(counter);
        }
        mp
    }

    /// Sends `mp` to every local receiver and every next hop except ourselves.
    fn fan_out(&self, group: GroupId, mp: &MulticastDataPacket, out: &mut Vec<Emission>) {
        for c in self.gmt.members(group) {
            out.push(Emission::new(Peer::Consumer(c), Packet::Data(mp.clone())));
        }
        if let Some(entry) = self.mart.entries.get(&group) {
            for &h in &entry.next_hops {
                if h != self.id {
                    out.push(Emission::new(Peer::Router(h), Packet::Data(mp.clone())));
                }
            }
        }
    }

    /// Data packet from upstream router `from`. Dropped when no forwarding
    /// state exists for the group or the round was already fanned out.
    pub fn handle_data_packet(
        &mut self,
        _from: NodeId,
        mp: &MulticastDataPacket,
        _now: SimTime,
        out: &mut Vec<Emission>,
    ) {
        if !verify_security_payload(mp) {
            return;
        }
        let Some(entry) = self.mart.entries.get_mut(&mp.group) else {
            return;
        };
        if entry.next_hops.is_empty() {
            return;
        }
        if mp.counter <= entry.forwarded {
            return;
        }
        entry.forwarded = mp.counter;
        if entry.counter < mp.counter {
            entry.counter = mp.counter;
        }
        entry.settled = entry.settled.max(mp.counter);
        self.fan_out(mp.group, mp, out);
        self.gmt.cache(mp);
    }

    /// Reply from upstream. A reply that closes an open round travels back
    /// down the tree like data: to local receivers and to next hops other
    /// than ourselves. Any other reply only updates the entry.
    pub fn handle_reply(
        &mut self,
        _from: NodeId,
        mr: &MulticastReply,
        _now: SimTime,
        out: &mut Vec<Emission>,
    ) {
        let Some(entry) = self.mart.entries.get_mut(&mr.group) else {
            return;
        };
        let before = entry.settled;
        match mr.code {
            ReplyCode::InterestError => {
                entry.counter = entry.counter.max(mr.counter);
                entry.settled = entry.settled.max(mr.counter);
            }
            ReplyCode::Loop | ReplyCode::NoRoute => {
                entry.settled = entry.settled.max(entry.counter);
            }
        }
        if entry.settled == before {
            return;
        }
        for c in self.gmt.members(mr.group) {
            out.push(Emission::new(Peer::Consumer(c), Packet::Reply(*mr)));
        }
        for &h in &entry.next_hops {
            if h != self.id {
                out.push(Emission::new(Peer::Router(h), Packet::Reply(*mr)));
            }
        }
    }

    /// Drops MART and GMT state for groups with no Interest since
    /// `now - timeout`.
    pub fn mart_gc(&mut self, now: SimTime, timeout: SimDuration) {
        debug_assert!(!timeout.is_zero());
        let cutoff = now.saturating_sub(timeout);
        let stale: Vec<GroupId> = self
            .mart
            .entries
            .iter()
            .filter(|(_, e)| e.last_activity < cutoff)
            .map(|(g, _)| *g)
            .collect();
        for g in stale {
            self.mart.entries.remove(&g);
            self.gmt.members.remove(&g);
        }
    }
}

fn reply(to: Peer, group: GroupId, code: ReplyCode, counter: u64) -> Emission {
    Emission::new(
        to,
        Packet::Reply(MulticastReply {
            group,
            code,
            counter,
        }),
    )
}
