// SPDX-License-Identifier: Apache-2.0 OR MIT
//! NDN-style multicast baseline: one PIT entry per pending name.
//!
//! Interests for a name already pending are aggregated onto the existing
//! entry; data follows the recorded incoming faces back and consumes the
//! entry. A content store answers repeated requests locally.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::cache::ContentStore;
use crate::gram::Emission;
use crate::ids::{GroupId, NodeId, Peer};
use crate::message::{content_bytes, Content, Name, Packet};
use crate::time::{SimDuration, SimTime};
use crate::topology::{FibTable, PrefixEntry};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitEntry {
    pub incoming: BTreeSet<Peer>,
    pub outgoing: BTreeSet<NodeId>,
    pub created: SimTime,
    pub expires: SimTime,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PitTable {
    entries: BTreeMap<Name, PitEntry>,
}

impl PitTable {
    pub fn get(&self, name: &Name) -> Option<&PitEntry> {
        self.entries.get(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &PitEntry)> + '_ {
        self.entries.iter()
    }
}

#[derive(Debug)]
pub struct NdnRouter {
    pub id: NodeId,
    pub fib: FibTable,
    pub pit: PitTable,
    pub store: ContentStore,
    producers: BTreeSet<GroupId>,
    interest_lifetime: SimDuration,
    payload_size: usize,
}

impl NdnRouter {
    pub fn new(
        id: NodeId,
        fib: FibTable,
        cache_capacity: usize,
        interest_lifetime: SimDuration,
        payload_size: usize,
    ) -> Self {
        NdnRouter {
            id,
            fib,
            pit: PitTable::default(),
            store: ContentStore::new(cache_capacity),
            producers: BTreeSet::new(),
            interest_lifetime,
            payload_size,
        }
    }

    /// Attaches the producer application for `group` to this router.
    pub fn add_producer(&mut self, group: GroupId) {
        self.producers.insert(group);
    }

    pub fn is_producer(&self, group: GroupId) -> bool {
        self.producers.contains(&group)
    }

    pub fn on_interest(&mut self, face: Peer, name: Name, now: SimTime, out: &mut Vec<Emission>) {
        if self.is_producer(name.group) {
            let content = self.produce(name);
            out.push(Emission::new(face, Packet::NdnData(name, content)));
            return;
        }
        if let Some(content) = self.store.get(&name) {
            out.push(Emission::new(face, Packet::NdnData(name, content)));
            return;
        }
        if let Some(entry) = self.pit.entries.get_mut(&name) {
            entry.incoming.insert(face);
            return;
        }
        let Some(next) = self.fib.entry(name.group).and_then(PrefixEntry::successor) else {
            out.push(Emission::new(face, Packet::NdnNack(name)));
            return;
        };
        let mut incoming = BTreeSet::new();
        incoming.insert(face);
        let mut outgoing = BTreeSet::new();
        outgoing.insert(next);
        self.pit.entries.insert(
            name,
            PitEntry {
                incoming,
                outgoing,
                created: now,
                expires: now + self.interest_lifetime,
            },
        );
        out.push(Emission::new(Peer::Router(next), Packet::NdnInterest(name)));
    }

    pub fn on_data(
        &mut self,
        _face: Peer,
        name: Name,
        content: &Content,
        _now: SimTime,
        out: &mut Vec<Emission>,
    ) {
        let Some(entry) = self.pit.entries.remove(&name) else {
            return;
        };
        for &face in &entry.incoming {
            out.push(Emission::new(face, Packet::NdnData(name, content.clone())));
        }
        self.store.insert(name, content.clone());
    }

    /// NACKs travel back like data and consume the entry.
    pub fn on_nack(&mut self, _face: Peer, name: Name, _now: SimTime, out: &mut Vec<Emission>) {
        let Some(entry) = self.pit.entries.remove(&name) else {
            return;
        };
        for &face in &entry.incoming {
            out.push(Emission::new(face, Packet::NdnNack(name)));
        }
    }

    /// Removes entries that outlived the Interest lifetime. No NACKs.
    pub fn pit_expire(&mut self, now: SimTime) {
        self.pit.entries.retain(|_, e| e.expires >= now);
    }

    fn produce(&mut self, name: Name) -> Content {
        if let Some(content) = self.store.get(&name) {
            return content;
        }
        let content = content_bytes(name.group, name.counter, self.payload_size);
        self.store.insert(name, content.clone());
        content
    }
}
