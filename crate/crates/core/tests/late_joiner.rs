// SPDX-License-Identifier: Apache-2.0 OR MIT
//! A consumer joining a running group catches up within one round trip.

use gram_core::engine::{run_scenario, ConsumerSpec, Recorder, Scenario};
use gram_core::ids::{ConsumerId, GroupId, NodeId, Peer};
use gram_core::message::PacketKind;
use gram_core::topology::{AnchorSet, Position, Topology};
use gram_core::trace::Direction;
use gram_core::{ScenarioConfig, SimDuration, SimTime};

fn chain(n: u32) -> Topology {
    let positions: Vec<Position> = (0..n).map(|i| Position::new(10.0 * i as f64, 0.0)).collect();
    Topology::from_positions(&positions, 15.0, SimDuration::from_millis(15)).unwrap()
}

fn late_join(join_ms: u64, cache: usize) -> (u64, SimTime, PacketKind, u64) {
    let mut anchors = AnchorSet::new();
    anchors.insert(GroupId(0), NodeId(0)).unwrap();
    let consumers = vec![
        ConsumerSpec { router: NodeId(2), group: GroupId(0), join_at: SimTime::ZERO },
        ConsumerSpec {
            router: NodeId(4),
            group: GroupId(0),
            join_at: SimTime::from_millis(join_ms),
        },
    ];
    let scenario = Scenario::custom(chain(5), anchors, consumers).unwrap();
    let cfg = ScenarioConfig {
        rate: 10.0,
        duration: SimDuration::from_secs(2),
        warmup: SimDuration::ZERO,
        payload_size: 64,
        cache_capacity: cache,
        ..ScenarioConfig::default()
    };
    let mut rec = Recorder::default();
    let report = run_scenario(&cfg, &scenario, &mut rec).unwrap();
    let join = SimTime::from_millis(join_ms);
    let rounds_before = report
        .deliveries
        .iter()
        .filter(|d| d.consumer == ConsumerId(0) && d.received_at <= join)
        .map(|d| d.counter)
        .max()
        .unwrap_or(0);
    let first = rec
        .trace
        .iter()
        .find(|r| r.dir == Direction::Rx && r.node == Peer::Consumer(ConsumerId(1)))
        .expect("late joiner hears back");
    (rounds_before, first.time, first.kind, first.counter)
}

#[test]
fn late_joiner_gets_cached_data_within_a_round_trip() {
    let (k, at, kind, counter) = late_join(550, 1000);
    assert_eq!(k, 5);
    assert_eq!(kind, PacketKind::Mp);
    assert!(counter >= k);
    // Two hops up to the branch router and two back.
    assert_eq!(at, SimTime::from_millis(550 + 60));
}

#[test]
fn late_joiner_without_cache_gets_the_current_counter() {
    let (k, at, kind, counter) = late_join(550, 0);
    assert_eq!(k, 5);
    assert_eq!(kind, PacketKind::Mr);
    assert!(counter >= k);
    assert!(at <= SimTime::from_millis(550 + 60));
}
