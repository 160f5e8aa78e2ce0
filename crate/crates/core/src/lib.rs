// SPDX-License-Identifier: Apache-2.0 OR MIT
//! Multicast forwarding plane for content-centric networks, simulated.
//!
//! Routers keep one MART entry per multicast group (a counter plus a
//! next-hop set) instead of one PIT entry per Interest. Interests travel
//! toward the group source over FIB routes guarded by the loop-free
//! forwarding rule; data packets come back along the next-hop sets.
//!
//! The crate also carries an NDN-style PIT baseline and a deterministic
//! discrete-event engine that runs either protocol over the same
//! topology and consumer placement.
//!
//! ## Layout
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`topology`] | random geometric graphs, anchors, multipath FIBs |
//! | [`gram`] | MART/GMT tables, router handlers, loop-free rule |
//! | [`consumer`] | constant-rate consumers for both protocols |
//! | [`ndn`] | PIT, content store, NDN router |
//! | [`engine`] | event queue, scenario construction, run reports |
//! | [`metrics`] | run summaries |
//! | [`trace`] | trace records and trace-level invariant checks |
//!
//! Everything here is `no_std` + `alloc`; file formats and the CLI live
//! in the `gram-sim` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cache;
pub mod consumer;
pub mod engine;
pub mod gram;
pub mod ids;
pub mod message;
pub mod metrics;
pub mod ndn;
pub mod time;
pub mod topology;
pub mod trace;

pub use engine::{run, Protocol, RunError, RunReport, ScenarioConfig};
pub use ids::{ConsumerId, GroupId, NodeId, Peer};
pub use time::{SimDuration, SimTime};
