// SPDX-License-Identifier: Apache-2.0 OR MIT
//! Hand-checkable scenarios on a five-router chain.
//!
//! Routers `0..=4` sit 10 m apart with 15 ms links; the producer is router
//! 0 and consumers attach to routers 2 and 4. In the two-group variant
//! each consumer has its own group, so every round is a plain
//! request/response over the shortest path. In the one-group variant the
//! far consumer's Interests wait at router 2 for data the near consumer
//! already pulled.

use gram_core::engine::{run_scenario, ConsumerSpec, MartRow, Recorder, RunReport, Scenario};
use gram_core::ids::{GroupId, NodeId};
use gram_core::topology::{AnchorSet, Position, Topology};
use gram_core::{RunError, ScenarioConfig, SimDuration, SimTime};

pub const LINK_MS: u64 = 15;
pub const PRODUCER: NodeId = NodeId(0);
pub const CONSUMER_ROUTERS: [NodeId; 2] = [NodeId(2), NodeId(4)];

pub const GOLDEN_TWO_GROUPS: &str = include_str!("../golden/chain5_two_groups.trace");
pub const GOLDEN_ONE_GROUP: &str = include_str!("../golden/chain5_one_group.trace");
pub const GOLDEN_TOPOLOGY: &str = include_str!("../golden/chain5.topo");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    TwoGroups,
    OneGroup,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::TwoGroups, Variant::OneGroup];

    pub fn name(self) -> &'static str {
        match self {
            Variant::TwoGroups => "chain5_two_groups",
            Variant::OneGroup => "chain5_one_group",
        }
    }

    pub fn golden(self) -> &'static str {
        match self {
            Variant::TwoGroups => GOLDEN_TWO_GROUPS,
            Variant::OneGroup => GOLDEN_ONE_GROUP,
        }
    }

    fn group_of(self, consumer: usize) -> GroupId {
        match self {
            Variant::TwoGroups => GroupId(consumer as u32),
            Variant::OneGroup => GroupId(0),
        }
    }
}

pub fn chain_topology() -> Topology {
    let positions: Vec<Position> = (0..5).map(|i| Position::new(10.0 * i as f64, 0.0)).collect();
    Topology::from_positions(&positions, 15.0, SimDuration::from_millis(LINK_MS))
        .expect("fixed chain is valid")
}

pub fn scenario(variant: Variant) -> Scenario {
    let mut anchors = AnchorSet::new();
    let consumers: Vec<ConsumerSpec> = CONSUMER_ROUTERS
        .iter()
        .enumerate()
        .map(|(i, &router)| ConsumerSpec {
            router,
            group: variant.group_of(i),
            join_at: SimTime::ZERO,
        })
        .collect();
    for c in &consumers {
        if anchors.anchor(c.group).is_none() {
            anchors.insert(c.group, PRODUCER).expect("fresh group");
        }
    }
    Scenario::custom(chain_topology(), anchors, consumers).expect("anchors exist")
}

/// Ten rounds at 10 requests per second, no warm-up.
pub fn config() -> ScenarioConfig {
    ScenarioConfig {
        rate: 10.0,
        duration: SimDuration::from_secs(1),
        warmup: SimDuration::ZERO,
        payload_size: 64,
        ..ScenarioConfig::default()
    }
}

pub struct OracleRun {
    pub report: RunReport,
    pub trace: String,
}

pub fn run(variant: Variant) -> Result<OracleRun, RunError> {
    let mut rec = Recorder::default();
    let report = run_scenario(&config(), &scenario(variant), &mut rec)?;
    Ok(OracleRun {
        report,
        trace: crate::report::trace_to_string(&rec.trace),
    })
}

/// Shortest-path round trip from each consumer's router to the producer,
/// by breadth-first search over the chain.
pub fn shortest_round_trip(router: NodeId) -> SimDuration {
    let hops = chain_topology().hop_distances(PRODUCER)[router.index()].expect("connected");
    SimDuration::from_millis(2 * hops as u64 * LINK_MS)
}

/// Expected per-consumer delay. In the one-group variant the far consumer
/// gets each round as soon as it reaches router 2 on its way to the near
/// consumer, then travels two more hops.
pub fn expected_delay(variant: Variant, consumer: usize) -> SimDuration {
    match (variant, consumer) {
        (Variant::OneGroup, 1) => {
            shortest_round_trip(CONSUMER_ROUTERS[0])
                + SimDuration::from_millis(2 * LINK_MS)
        }
        _ => shortest_round_trip(CONSUMER_ROUTERS[consumer]),
    }
}

/// Final MART rows derived by hand: each group's tree is the chain from
/// the producer up to the farthest consumer, and consumer routers list
/// themselves.
pub fn expected_mart(variant: Variant, rounds: u64) -> Vec<MartRow> {
    let mut rows = Vec::new();
    let row = |router: u32, group: u32, hops: &[u32]| MartRow {
        router: NodeId(router),
        group: GroupId(group),
        counter: rounds,
        next_hops: hops.iter().map(|&h| NodeId(h)).collect(),
    };
    match variant {
        Variant::TwoGroups => {
            rows.push(row(0, 0, &[1]));
            rows.push(row(0, 1, &[1]));
            rows.push(row(1, 0, &[2]));
            rows.push(row(1, 1, &[2]));
            rows.push(row(2, 0, &[2]));
            rows.push(row(2, 1, &[3]));
            rows.push(row(3, 1, &[4]));
            rows.push(row(4, 1, &[4]));
        }
        Variant::OneGroup => {
            rows.push(row(0, 0, &[1]));
            rows.push(row(1, 0, &[2]));
            rows.push(row(2, 0, &[2, 3]));
            rows.push(row(3, 0, &[4]));
            rows.push(row(4, 0, &[4]));
        }
    }
    rows
}

/// Everything that differs from the hand-derived oracle or the golden
/// trace, one line each.
pub fn check(variant: Variant, run: &OracleRun) -> Vec<String> {
    let mut problems = check_behavior(variant, run);
    if let Some(line) = golden_mismatch(variant, run) {
        problems.push(format!("trace differs from golden at line {line}"));
    }
    problems
}

/// Delays and final MART against the hand derivation.
pub fn check_behavior(variant: Variant, run: &OracleRun) -> Vec<String> {
    let mut problems = Vec::new();
    let cfg = config();
    let rounds = (cfg.duration.as_micros() as f64 * cfg.rate / 1e6).round() as u64;
    for (i, _) in CONSUMER_ROUTERS.iter().enumerate() {
        let want = expected_delay(variant, i);
        let got: Vec<_> = run
            .report
            .deliveries
            .iter()
            .filter(|d| d.consumer.index() == i)
            .collect();
        if got.len() as u64 != rounds {
            problems.push(format!("consumer {i}: {} deliveries, expected {rounds}", got.len()));
        }
        for d in got {
            if d.delay() != want {
                problems.push(format!(
                    "consumer {i} round {}: delay {} ms, expected {} ms",
                    d.counter,
                    d.delay(),
                    want
                ));
            }
        }
    }
    if run.report.final_mart != expected_mart(variant, rounds) {
        problems.push(format!("final MART differs: {:?}", run.report.final_mart));
    }
    problems
}

/// First differing line (1-based), if the trace is not the golden one.
pub fn golden_mismatch(variant: Variant, run: &OracleRun) -> Option<usize> {
    let golden = variant.golden();
    if run.trace == golden {
        return None;
    }
    let first = run
        .trace
        .lines()
        .zip(golden.lines())
        .position(|(a, b)| a != b)
        .unwrap_or_else(|| run.trace.lines().count().min(golden.lines().count()));
    Some(first + 1)
}
