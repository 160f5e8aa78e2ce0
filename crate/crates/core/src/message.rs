// SPDX-License-Identifier: Apache-2.0 OR MIT
//! Wire messages for both forwarding planes.

use alloc::sync::Arc;
use alloc::vec;
use core::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ids::GroupId;

/// Content object size used throughout the scenarios.
pub const DEFAULT_PAYLOAD_SIZE: usize = 4096;

/// Content object bytes. Shared, since every copy of a round carries the
/// same object.
pub type Content = Arc<[u8]>;

/// Opaque security payload. Carried end to end, never validated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SecurityPayload(pub [u8; 8]);

/// `MI[g, D, mc]`. `distance == None` stands for infinity and marks an
/// Interest sent by a local consumer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MulticastInterest {
    pub group: GroupId,
    pub distance: Option<u32>,
    pub counter: u64,
}

/// `MP[g, sp, mc]` plus the content object for round `mc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastDataPacket {
    pub group: GroupId,
    pub security_payload: SecurityPayload,
    pub counter: u64,
    pub payload: Content,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReplyCode {
    Loop,
    NoRoute,
    InterestError,
}

impl ReplyCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ReplyCode::Loop => "loop",
            ReplyCode::NoRoute => "no-route",
            ReplyCode::InterestError => "interest-error",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "loop" => Some(ReplyCode::Loop),
            "no-route" => Some(ReplyCode::NoRoute),
            "interest-error" => Some(ReplyCode::InterestError),
            _ => None,
        }
    }
}

impl fmt::Display for ReplyCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `MR[g, CODE, mc]`; `counter` is the responder's current group counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MulticastReply {
    pub group: GroupId,
    pub code: ReplyCode,
    pub counter: u64,
}

/// Exact-match NDN name: one content object of one group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    pub group: GroupId,
    pub counter: u64,
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "/{}/{}", self.group, self.counter)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Packet {
    Interest(MulticastInterest),
    Data(MulticastDataPacket),
    Reply(MulticastReply),
    NdnInterest(Name),
    NdnData(Name, Content),
    NdnNack(Name),
}

/// Trace tag of a packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PacketKind {
    Mi,
    Mp,
    Mr,
    Ni,
    Nd,
    Nn,
}

impl PacketKind {
    pub const ALL: [PacketKind; 6] = [
        PacketKind::Mi,
        PacketKind::Mp,
        PacketKind::Mr,
        PacketKind::Ni,
        PacketKind::Nd,
        PacketKind::Nn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PacketKind::Mi => "MI",
            PacketKind::Mp => "MP",
            PacketKind::Mr => "MR",
            PacketKind::Ni => "NI",
            PacketKind::Nd => "ND",
            PacketKind::Nn => "NN",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        PacketKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PacketKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Packet {
    pub fn kind(&self) -> PacketKind {
        match self {
            Packet::Interest(_) => PacketKind::Mi,
            Packet::Data(_) => PacketKind::Mp,
            Packet::Reply(_) => PacketKind::Mr,
            Packet::NdnInterest(_) => PacketKind::Ni,
            Packet::NdnData(..) => PacketKind::Nd,
            Packet::NdnNack(_) => PacketKind::Nn,
        }
    }

    pub fn group(&self) -> GroupId {
        match self {
            Packet::Interest(mi) => mi.group,
            Packet::Data(mp) => mp.group,
            Packet::Reply(mr) => mr.group,
            Packet::NdnInterest(n) | Packet::NdnData(n, _) | Packet::NdnNack(n) => n.group,
        }
    }

    pub fn counter(&self) -> u64 {
        match self {
            Packet::Interest(mi) => mi.counter,
            Packet::Data(mp) => mp.counter,
            Packet::Reply(mr) => mr.counter,
            Packet::NdnInterest(n) | Packet::NdnData(n, _) | Packet::NdnNack(n) => n.counter,
        }
    }

    pub fn reply_code(&self) -> Option<ReplyCode> {
        match self {
            Packet::Reply(mr) => Some(mr.code),
            Packet::NdnNack(_) => Some(ReplyCode::NoRoute),
            _ => None,
        }
    }
}

/// Deterministic content object for round `counter` of `group`.
pub fn content_bytes(group: GroupId, counter: u64, size: usize) -> Content {
    let mut rng = ChaCha8Rng::seed_from_u64(((group.0 as u64) << 40) ^ counter);
    let mut bytes = vec![0u8; size];
    rng.fill_bytes(&mut bytes);
    Arc::from(bytes)
}

/// FNV-1a over the content name; stands in for a signature.
pub fn placeholder_digest(group: GroupId, counter: u64) -> SecurityPayload {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in group.0.to_be_bytes().into_iter().chain(counter.to_be_bytes()) {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    SecurityPayload(hash.to_be_bytes())
}

/// Security-payload check run before forwarding a data packet. Always
/// accepts; content validation is not modeled.
pub fn verify_security_payload(_mp: &MulticastDataPacket) -> bool {
    true
}

/// Data packet a source emits for round `counter`.
pub fn producer_content(group: GroupId, counter: u64, size: usize) -> MulticastDataPacket {
    debug_assert!(counter >= 1, "content rounds start at one");
    let payload = content_bytes(group, counter, size);
    MulticastDataPacket {
        group,
        security_payload: placeholder_digest(group, counter),
        counter,
        payload,
    }
}
