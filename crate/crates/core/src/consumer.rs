// SPDX-License-Identifier: Apache-2.0 OR MIT
//! Constant-rate consumers.
//!
//! A consumer asks for one content round every `1/rate` seconds, starting
//! with round 1 at join time. Both planes use the same request clock so
//! they see the same offered load; they differ only in how responses move
//! the next requested round:
//!
//! - multicast consumers skip ahead when data or an `interest-error`
//!   reply reveals a newer round, and stop on `no-route`;
//! - NDN consumers keep counting and stop on a NACK.

use alloc::collections::BTreeMap;

use crate::ids::{ConsumerId, GroupId, NodeId};
use crate::message::{MulticastInterest, Name, Packet, ReplyCode};
use crate::time::{SimDuration, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    Gram,
    Ndn,
}

/// One content round reaching a consumer for the first time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub group: GroupId,
    pub consumer: ConsumerId,
    pub counter: u64,
    /// When this consumer asked for the round, if it did.
    pub requested_at: Option<SimTime>,
    pub received_at: SimTime,
}

impl Delivery {
    pub fn delay(&self) -> Option<SimDuration> {
        self.requested_at.map(|t| self.received_at - t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsumerStatus {
    Idle,
    Active,
    /// Stopped by a `no-route` reply or NACK.
    Failed,
}

#[derive(Debug, Clone)]
pub struct Consumer {
    pub id: ConsumerId,
    pub router: NodeId,
    pub group: GroupId,
    plane: Plane,
    interval: SimDuration,
    status: ConsumerStatus,
    next_counter: u64,
    next_send: Option<SimTime>,
    highest_received: u64,
    outstanding: BTreeMap<u64, SimTime>,
}

impl Consumer {
    /// `rate` is in requests per second and must be positive.
    pub fn new(
        id: ConsumerId,
        router: NodeId,
        group: GroupId,
        plane: Plane,
        rate: f64,
    ) -> Self {
        debug_assert!(rate > 0.0);
        Consumer {
            id,
            router,
            group,
            plane,
            interval: SimDuration::from_secs_f64(1.0 / rate),
            status: ConsumerStatus::Idle,
            next_counter: 1,
            next_send: None,
            highest_received: 0,
            outstanding: BTreeMap::new(),
        }
    }

    pub fn status(&self) -> ConsumerStatus {
        self.status
    }

    pub fn interval(&self) -> SimDuration {
        self.interval
    }

    pub fn next_counter(&self) -> u64 {
        self.next_counter
    }

    /// Time of the next scheduled request.
    pub fn next_tick(&self) -> Option<SimTime> {
        match self.status {
            ConsumerStatus::Active => self.next_send,
            _ => None,
        }
    }

    /// The request the next tick will send, and when.
    pub fn pending_request(&self) -> Option<(SimTime, Packet)> {
        self.next_tick().map(|at| (at, self.request(self.next_counter)))
    }

    fn request(&self, counter: u64) -> Packet {
        match self.plane {
            Plane::Gram => Packet::Interest(MulticastInterest {
                group: self.group,
                distance: None,
                counter,
            }),
            Plane::Ndn => Packet::NdnInterest(Name {
                group: self.group,
                counter,
            }),
        }
    }

    /// Joins the group: asks for round 1 now.
    pub fn join(&mut self, now: SimTime) -> Packet {
        self.status = ConsumerStatus::Active;
        self.next_counter = 1;
        self.send(now)
    }

    /// Request-clock tick. `None` once the consumer has stopped.
    pub fn tick(&mut self, now: SimTime) -> Option<Packet> {
        if self.status != ConsumerStatus::Active {
            return None;
        }
        Some(self.send(now))
    }

    fn send(&mut self, now: SimTime) -> Packet {
        let counter = self.next_counter;
        self.outstanding.entry(counter).or_insert(now);
        self.next_counter += 1;
        self.next_send = Some(now + self.interval);
        self.request(counter)
    }

    /// Stops the request clock without marking a failure.
    pub fn stop(&mut self) {
        if self.status == ConsumerStatus::Active {
            self.status = ConsumerStatus::Idle;
        }
        self.next_send = None;
    }

    /// Handles a packet from the attached router. Returns a delivery the
    /// first time a round arrives.
    pub fn on_packet(&mut self, packet: &Packet, now: SimTime) -> Option<Delivery> {
        match packet {
            Packet::Data(mp) if mp.group == self.group => self.on_data(mp.counter, now),
            Packet::NdnData(name, _) if name.group == self.group => {
                self.on_data(name.counter, now)
            }
            Packet::Reply(mr) if mr.group == self.group => {
                self.on_reply(mr.code, mr.counter);
                None
            }
            Packet::NdnNack(name) if name.group == self.group => {
                self.on_reply(ReplyCode::NoRoute, name.counter);
                None
            }
            _ => None,
        }
    }

    fn on_data(&mut self, counter: u64, now: SimTime) -> Option<Delivery> {
        let requested_at = self.outstanding.get(&counter).copied();
        if requested_at.is_none() && counter <= self.highest_received {
            return None;
        }
        // Rounds at or below this one are either here or skipped.
        self.outstanding = self.outstanding.split_off(&(counter + 1));
        self.highest_received = self.highest_received.max(counter);
        if self.plane == Plane::Gram && counter >= self.next_counter {
            self.next_counter = counter + 1;
        }
        Some(Delivery {
            group: self.group,
            consumer: self.id,
            counter,
            requested_at,
            received_at: now,
        })
    }

    fn on_reply(&mut self, code: ReplyCode, counter: u64) {
        match code {
            ReplyCode::InterestError => {
                if self.plane == Plane::Gram {
                    self.next_counter = counter + 1;
                }
            }
            ReplyCode::Loop => {}
            ReplyCode::NoRoute => {
                self.status = ConsumerStatus::Failed;
                self.next_send = None;
            }
        }
    }
}
