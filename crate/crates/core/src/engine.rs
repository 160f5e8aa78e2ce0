// SPDX-License-Identifier: Apache-2.0 OR MIT
//! Deterministic discrete-event engine.
//!
//! Events are ordered by `(time, seq)` where `seq` is a global counter
//! assigned at scheduling time, so two sends over the same link at the
//! same instant arrive in send order. Routers and consumers only talk
//! through scheduled deliveries; handlers run in zero time.
//!
//! A run has two phases. Until the horizon consumers tick, tables are
//! sampled and idle state is collected. After it the queue drains without
//! new requests, so every run ends quiescent and the final tables can be
//! checked for counter agreement.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::mem;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::consumer::{Consumer, ConsumerStatus, Plane};
use crate::gram::{Emission, RouterState};
use crate::ids::{ConsumerId, GroupId, NodeId, Peer};
use crate::message::{Packet, PacketKind, DEFAULT_PAYLOAD_SIZE};
use crate::ndn::NdnRouter;
use crate::time::{SimDuration, SimTime};
use crate::topology::{
    compute_fibs, generate_connected, AnchorError, AnchorSet, FibTable, GeometricParams, Topology,
    TopologyError,
};
use crate::trace::{Acceptance, Direction, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Protocol {
    Gram,
    Ndn,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Gram => "gram",
            Protocol::Ndn => "ndn",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gram" => Some(Protocol::Gram),
            "ndn" => Some(Protocol::Ndn),
            _ => None,
        }
    }
}

impl core::fmt::Display for Protocol {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub protocol: Protocol,
    pub nodes: u32,
    /// Side of the deployment square, meters.
    pub side: f64,
    /// Connectivity radius, meters.
    pub radius: f64,
    pub link_delay: SimDuration,
    pub groups: u32,
    /// Consumers per group.
    pub group_size: u32,
    /// Requests per second per consumer.
    pub rate: f64,
    /// Content objects per router; 0 disables caching.
    pub cache_capacity: usize,
    pub duration: SimDuration,
    pub sample_period: SimDuration,
    pub warmup: SimDuration,
    pub payload_size: usize,
    pub seed: u64,
    pub mart_timeout: SimDuration,
    pub interest_lifetime: SimDuration,
    /// Consumer to router delay, both directions.
    pub access_delay: SimDuration,
    pub max_topology_attempts: u32,
    /// Check counter agreement on the final trees.
    pub verify_counters: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            protocol: Protocol::Gram,
            nodes: 200,
            side: 100.0,
            radius: 15.0,
            link_delay: SimDuration::from_millis(15),
            groups: 20,
            group_size: 20,
            rate: 160.0,
            cache_capacity: 1000,
            duration: SimDuration::from_secs(10),
            sample_period: SimDuration::from_millis(100),
            warmup: SimDuration::from_secs(1),
            payload_size: DEFAULT_PAYLOAD_SIZE,
            seed: 1,
            mart_timeout: SimDuration::from_secs(10),
            interest_lifetime: SimDuration::from_secs(4),
            access_delay: SimDuration::ZERO,
            max_topology_attempts: 1000,
            verify_counters: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("{0} must be positive and finite")]
    NotPositive(&'static str),
    #[error("warm-up must be shorter than the duration")]
    WarmupTooLong,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in [
            ("nodes", self.nodes),
            ("groups", self.groups),
            ("group_size", self.group_size),
            ("max_topology_attempts", self.max_topology_attempts),
        ] {
            if value == 0 {
                return Err(ConfigError::ZeroCount(name));
            }
        }
        for (name, value) in [("side", self.side), ("radius", self.radius), ("rate", self.rate)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::NotPositive(name));
            }
        }
        for (name, value) in [
            ("sample_period", self.sample_period),
            ("mart_timeout", self.mart_timeout),
            ("interest_lifetime", self.interest_lifetime),
        ] {
            if value.is_zero() {
                return Err(ConfigError::NotPositive(name));
            }
        }
        if SimDuration::from_secs_f64(1.0 / self.rate).is_zero() {
            return Err(ConfigError::NotPositive("request interval"));
        }
        // A zero-length run is allowed and simply produces nothing.
        if !self.duration.is_zero() && self.warmup >= self.duration {
            return Err(ConfigError::WarmupTooLong);
        }
        Ok(())
    }

    fn geometry(&self) -> GeometricParams {
        GeometricParams {
            nodes: self.nodes,
            side: self.side,
            radius: self.radius,
            link_delay: self.link_delay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Anchor(#[from] AnchorError),
    #[error("router {from} sent to {to}, which is not a neighbor")]
    NoLink { from: NodeId, to: NodeId },
    #[error("consumer {0} does not exist")]
    UnknownConsumer(ConsumerId),
    #[error("consumer {consumer} is not attached to router {router}")]
    NotAttached { consumer: ConsumerId, router: NodeId },
    #[error("consumer {consumer} attached to unknown router {router}")]
    BadAttachment { consumer: ConsumerId, router: NodeId },
    #[error("{packet:?} is not valid from {from} to {to}")]
    UnexpectedPacket {
        from: Peer,
        to: Peer,
        packet: PacketKind,
    },
    #[error("router {router} holds counter {counter} for {group}, source holds {source_counter}")]
    CounterDesync {
        router: NodeId,
        group: GroupId,
        counter: u64,
        source_counter: u64,
    },
    #[error("event at {at} popped after {now}")]
    TimeReversal { now: SimTime, at: SimTime },
}

/// One consumer of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConsumerSpec {
    pub router: NodeId,
    pub group: GroupId,
    pub join_at: SimTime,
}

/// A packet dropped into a router from outside the simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Injection {
    pub at: SimTime,
    pub router: NodeId,
    pub from: Peer,
    pub packet: Packet,
}

/// Everything both protocols share for one seed: graph, FIBs, producers
/// and consumer placement.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topology: Topology,
    /// Seed that produced the topology, after connectivity retries.
    pub topology_seed: u64,
    pub anchors: AnchorSet,
    pub fibs: Vec<FibTable>,
    /// Indexed by consumer id.
    pub consumers: Vec<ConsumerSpec>,
    pub injections: Vec<Injection>,
}

impl Scenario {
    /// Random geometric topology plus random placement.
    ///
    /// Each group draws its producer and then its consumers from its own
    /// random stream, so a scenario with more groups or larger groups
    /// contains the smaller one. Consumers avoid the producer's router
    /// whenever another router exists, and all join at time zero.
    pub fn generate(cfg: &ScenarioConfig) -> Result<Self, RunError> {
        cfg.validate()?;
        let (topology, topology_seed) =
            generate_connected(&cfg.geometry(), cfg.seed, cfg.max_topology_attempts)?;
        Self::place(cfg, topology, topology_seed)
    }

    /// Random placement over a given topology, drawn as in
    /// [`Scenario::generate`] with `cfg.seed` as the placement seed.
    pub fn with_topology(cfg: &ScenarioConfig, topology: Topology) -> Result<Self, RunError> {
        cfg.validate()?;
        Self::place(cfg, topology, cfg.seed)
    }

    fn place(cfg: &ScenarioConfig, topology: Topology, topology_seed: u64) -> Result<Self, RunError> {
        let n = topology.len() as u32;
        let mut anchors = AnchorSet::new();
        let mut consumers = Vec::with_capacity((cfg.groups * cfg.group_size) as usize);
        for g in 0..cfg.groups {
            let group = GroupId(g);
            let mut rng = ChaCha8Rng::seed_from_u64(topology_seed ^ 0x5eed_91ac_e3e7_0000);
            rng.set_stream(g as u64);
            let anchor = NodeId(rng.gen_range(0..n));
            anchors.insert(group, anchor)?;
            for _ in 0..cfg.group_size {
                let router = loop {
                    let r = NodeId(rng.gen_range(0..n));
                    if r != anchor || n == 1 {
                        break r;
                    }
                };
                consumers.push(ConsumerSpec {
                    router,
                    group,
                    join_at: SimTime::ZERO,
                });
            }
        }
        let fibs = compute_fibs(&topology, &anchors)?;
        Ok(Scenario {
            topology,
            topology_seed,
            anchors,
            fibs,
            consumers,
            injections: Vec::new(),
        })
    }

    /// Hand-built scenario; FIBs come from shortest paths and may be
    /// replaced afterwards.
    pub fn custom(
        topology: Topology,
        anchors: AnchorSet,
        consumers: Vec<ConsumerSpec>,
    ) -> Result<Self, RunError> {
        let fibs = compute_fibs(&topology, &anchors)?;
        Ok(Scenario {
            topology,
            topology_seed: 0,
            anchors,
            fibs,
            consumers,
            injections: Vec::new(),
        })
    }
}

/// Receives trace records and acceptances as they happen.
pub trait Observer {
    fn on_trace(&mut self, _record: &TraceRecord) {}
    fn on_accept(&mut self, _acceptance: &Acceptance) {}
}

/// Discards everything.
pub struct NoObserver;

impl Observer for NoObserver {}

/// Keeps everything in memory.
#[derive(Debug, Clone, Default)]
pub struct Recorder {
    pub trace: Vec<TraceRecord>,
    pub acceptances: Vec<Acceptance>,
}

impl Observer for Recorder {
    fn on_trace(&mut self, record: &TraceRecord) {
        self.trace.push(*record);
    }

    fn on_accept(&mut self, acceptance: &Acceptance) {
        self.acceptances.push(*acceptance);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableSample {
    pub time: SimTime,
    pub node: NodeId,
    pub entries: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeliveryRecord {
    pub group: GroupId,
    pub consumer: ConsumerId,
    pub counter: u64,
    pub requested_at: SimTime,
    pub received_at: SimTime,
}

impl DeliveryRecord {
    pub fn delay(&self) -> SimDuration {
        self.received_at - self.requested_at
    }
}

/// Final MART entry of one router.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MartRow {
    pub router: NodeId,
    pub group: GroupId,
    pub counter: u64,
    pub next_hops: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub protocol: Protocol,
    pub topology_seed: u64,
    pub duration: SimDuration,
    pub warmup: SimDuration,
    pub samples: Vec<TableSample>,
    /// Deliveries of rounds the consumer had asked for.
    pub deliveries: Vec<DeliveryRecord>,
    /// Rounds that reached a consumer before it asked for them.
    pub unrequested_deliveries: u64,
    /// Transmissions by kind, indexed by [`PacketKind::index`].
    pub messages: [u64; 6],
    pub final_mart: Vec<MartRow>,
    pub source_counters: BTreeMap<GroupId, u64>,
    pub failed_consumers: Vec<ConsumerId>,
    pub events: u64,
}

impl RunReport {
    pub fn message_count(&self, kind: PacketKind) -> u64 {
        self.messages[kind.index()]
    }
}

/// Generates the scenario for `cfg` and runs it.
pub fn run(cfg: &ScenarioConfig) -> Result<RunReport, RunError> {
    let scenario = Scenario::generate(cfg)?;
    run_scenario(cfg, &scenario, &mut NoObserver)
}

/// Runs `cfg.protocol` over a prepared scenario. Topology parameters in
/// `cfg` are ignored; timing, rate, caching and table settings apply.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    scenario: &Scenario,
    observer: &mut dyn Observer,
) -> Result<RunReport, RunError> {
    cfg.validate()?;
    let mut sim = Sim::new(cfg, scenario, observer)?;
    sim.run()?;
    sim.finish()
}

enum EventKind {
    Deliver { to: Peer, from: Peer, packet: Packet },
    Join(ConsumerId),
    Tick(ConsumerId),
    Sample,
}

struct Scheduled {
    time: SimTime,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so the max-heap pops the earliest event.
impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

enum Routers {
    Gram(Vec<RouterState>),
    Ndn(Vec<NdnRouter>),
}

/// Pending events. Almost every event fires a fixed delay after the
/// moment it is scheduled, and time never goes back, so each distinct
/// delay gets a FIFO lane that stays sorted by construction. Events at an
/// absolute time go to a heap. Popping takes the smallest `(time, seq)`
/// over the lane heads and the heap top.
#[derive(Default)]
struct EventQueue {
    lanes: Vec<(SimDuration, VecDeque<Scheduled>)>,
    heap: BinaryHeap<Scheduled>,
    seq: u64,
}

impl EventQueue {
    fn next_seq(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }

    fn push_at(&mut self, time: SimTime, kind: EventKind) {
        let seq = self.next_seq();
        self.heap.push(Scheduled { time, seq, kind });
    }

    fn push_after(&mut self, now: SimTime, delay: SimDuration, kind: EventKind) {
        let seq = self.next_seq();
        let ev = Scheduled {
            time: now + delay,
            seq,
            kind,
        };
        match self.lanes.iter_mut().find(|(d, _)| *d == delay) {
            Some((_, lane)) => lane.push_back(ev),
            None => self.lanes.push((delay, VecDeque::from([ev]))),
        }
    }

    fn pop(&mut self) -> Option<Scheduled> {
        let mut best: Option<(usize, SimTime, u64)> = None;
        for (i, (_, lane)) in self.lanes.iter().enumerate() {
            if let Some(head) = lane.front() {
                if best.is_none_or(|(_, t, s)| (head.time, head.seq) < (t, s)) {
                    best = Some((i, head.time, head.seq));
                }
            }
        }
        match (best, self.heap.peek()) {
            (Some((_, t, s)), Some(top)) if (top.time, top.seq) < (t, s) => self.heap.pop(),
            (Some((i, _, _)), _) => self.lanes[i].1.pop_front(),
            (None, _) => self.heap.pop(),
        }
    }
}

struct Sim<'a> {
    cfg: &'a ScenarioConfig,
    scenario: &'a Scenario,
    observer: &'a mut dyn Observer,
    routers: Routers,
    consumers: Vec<Consumer>,
    queue: EventQueue,
    now: SimTime,
    horizon: SimTime,
    out: Vec<Emission>,
    samples: Vec<TableSample>,
    deliveries: Vec<DeliveryRecord>,
    unrequested: u64,
    messages: [u64; 6],
    events: u64,
}

impl<'a> Sim<'a> {
    fn new(
        cfg: &'a ScenarioConfig,
        scenario: &'a Scenario,
        observer: &'a mut dyn Observer,
    ) -> Result<Self, RunError> {
        let n = scenario.topology.len();
        let fib = |i: usize| scenario.fibs.get(i).cloned().unwrap_or_default();
        let routers = match cfg.protocol {
            Protocol::Gram => {
                let mut rs: Vec<RouterState> = (0..n)
                    .map(|i| {
                        RouterState::new(NodeId(i as u32), fib(i), cfg.cache_capacity, cfg.payload_size)
                    })
                    .collect();
                for (g, a) in scenario.anchors.iter() {
                    rs[a.index()].add_source(g);
                }
                Routers::Gram(rs)
            }
            Protocol::Ndn => {
                let mut rs: Vec<NdnRouter> = (0..n)
                    .map(|i| {
                        NdnRouter::new(
                            NodeId(i as u32),
                            fib(i),
                            cfg.cache_capacity,
                            cfg.interest_lifetime,
                            cfg.payload_size,
                        )
                    })
                    .collect();
                for (g, a) in scenario.anchors.iter() {
                    rs[a.index()].add_producer(g);
                }
                Routers::Ndn(rs)
            }
        };
        let plane = match cfg.protocol {
            Protocol::Gram => Plane::Gram,
            Protocol::Ndn => Plane::Ndn,
        };
        let mut consumers = Vec::with_capacity(scenario.consumers.len());
        for (i, spec) in scenario.consumers.iter().enumerate() {
            let id = ConsumerId(i as u32);
            if spec.router.index() >= n {
                return Err(RunError::BadAttachment {
                    consumer: id,
                    router: spec.router,
                });
            }
            consumers.push(Consumer::new(id, spec.router, spec.group, plane, cfg.rate));
        }
        let mut sim = Sim {
            cfg,
            scenario,
            observer,
            routers,
            consumers,
            queue: EventQueue::default(),
            now: SimTime::ZERO,
            horizon: SimTime::ZERO + cfg.duration,
            out: Vec::new(),
            samples: Vec::new(),
            deliveries: Vec::new(),
            unrequested: 0,
            messages: [0; 6],
            events: 0,
        };
        for (i, spec) in scenario.consumers.iter().enumerate() {
            if spec.join_at < sim.horizon {
                sim.queue
                    .push_at(spec.join_at, EventKind::Join(ConsumerId(i as u32)));
            }
        }
        for inj in &scenario.injections {
            sim.queue.push_at(
                inj.at,
                EventKind::Deliver {
                    to: Peer::Router(inj.router),
                    from: inj.from,
                    packet: inj.packet.clone(),
                },
            );
        }
        let first_sample = SimTime::ZERO + cfg.sample_period;
        if first_sample <= sim.horizon {
            sim.queue.push_at(first_sample, EventKind::Sample);
        }
        Ok(sim)
    }

    fn run(&mut self) -> Result<(), RunError> {
        while let Some(ev) = self.queue.pop() {
            if ev.time < self.now {
                return Err(RunError::TimeReversal {
                    now: self.now,
                    at: ev.time,
                });
            }
            self.now = ev.time;
            self.events += 1;
            match ev.kind {
                EventKind::Deliver { to, from, packet } => self.deliver(to, from, packet)?,
                EventKind::Join(c) => {
                    let packet = self.consumers[c.index()].join(self.now);
                    self.after_request(c, packet)?;
                }
                EventKind::Tick(c) => {
                    if let Some(packet) = self.consumers[c.index()].tick(self.now) {
                        self.after_request(c, packet)?;
                    }
                }
                EventKind::Sample => self.sample(),
            }
        }
        Ok(())
    }

    fn after_request(&mut self, c: ConsumerId, packet: Packet) -> Result<(), RunError> {
        let router = self.consumers[c.index()].router;
        self.send(Peer::Consumer(c), Peer::Router(router), packet)?;
        if let Some(next) = self.consumers[c.index()].next_tick() {
            if next < self.horizon {
                self.queue
                    .push_after(self.now, next - self.now, EventKind::Tick(c));
            }
        }
        Ok(())
    }

    fn send(&mut self, from: Peer, to: Peer, packet: Packet) -> Result<(), RunError> {
        let delay = match (from, to) {
            (Peer::Router(a), Peer::Router(b)) => self
                .scenario
                .topology
                .link_delay(a, b)
                .ok_or(RunError::NoLink { from: a, to: b })?,
            (Peer::Router(r), Peer::Consumer(c)) | (Peer::Consumer(c), Peer::Router(r)) => {
                let consumer = self
                    .consumers
                    .get(c.index())
                    .ok_or(RunError::UnknownConsumer(c))?;
                if consumer.router != r {
                    return Err(RunError::NotAttached {
                        consumer: c,
                        router: r,
                    });
                }
                self.cfg.access_delay
            }
            (Peer::Consumer(_), Peer::Consumer(_)) => {
                return Err(RunError::UnexpectedPacket {
                    from,
                    to,
                    packet: packet.kind(),
                })
            }
        };
        self.messages[packet.kind().index()] += 1;
        self.observer
            .on_trace(&TraceRecord::new(self.now, from, Direction::Tx, to, &packet));
        self.queue
            .push_after(self.now, delay, EventKind::Deliver { to, from, packet });
        Ok(())
    }

    fn deliver(&mut self, to: Peer, from: Peer, packet: Packet) -> Result<(), RunError> {
        self.observer
            .on_trace(&TraceRecord::new(self.now, to, Direction::Rx, from, &packet));
        match to {
            Peer::Consumer(c) => {
                let consumer = self
                    .consumers
                    .get_mut(c.index())
                    .ok_or(RunError::UnknownConsumer(c))?;
                if let Some(d) = consumer.on_packet(&packet, self.now) {
                    match d.requested_at {
                        Some(requested_at) => self.deliveries.push(DeliveryRecord {
                            group: d.group,
                            consumer: d.consumer,
                            counter: d.counter,
                            requested_at,
                            received_at: d.received_at,
                        }),
                        None => self.unrequested += 1,
                    }
                }
                Ok(())
            }
            Peer::Router(n) => {
                let mut out = mem::take(&mut self.out);
                let result = self.route(n, from, &packet, &mut out);
                let sent = result.and_then(|()| {
                    out.drain(..)
                        .try_for_each(|e| self.send(Peer::Router(n), e.to, e.packet))
                });
                out.clear();
                self.out = out;
                sent
            }
        }
    }

    fn route(
        &mut self,
        n: NodeId,
        from: Peer,
        packet: &Packet,
        out: &mut Vec<Emission>,
    ) -> Result<(), RunError> {
        let now = self.now;
        let unexpected = || RunError::UnexpectedPacket {
            from,
            to: Peer::Router(n),
            packet: packet.kind(),
        };
        match &mut self.routers {
            Routers::Gram(rs) => {
                let r = &mut rs[n.index()];
                match (packet, from) {
                    (Packet::Interest(mi), _) => {
                        let before = r.mart.counter(mi.group).unwrap_or(0);
                        match from {
                            Peer::Consumer(c) if mi.distance.is_none() => {
                                r.handle_local_interest(c, mi, now, out)
                            }
                            Peer::Router(p) if mi.distance.is_some() => {
                                r.handle_neighbor_interest(p, mi, now, out)
                            }
                            _ => return Err(unexpected()),
                        }
                        let after = r.mart.counter(mi.group).unwrap_or(0);
                        if after == before + 1 && mi.counter == after {
                            self.observer.on_accept(&Acceptance {
                                time: now,
                                router: n,
                                group: mi.group,
                                counter: after,
                            });
                        }
                    }
                    (Packet::Data(mp), Peer::Router(p)) => r.handle_data_packet(p, mp, now, out),
                    (Packet::Reply(mr), Peer::Router(p)) => r.handle_reply(p, mr, now, out),
                    _ => return Err(unexpected()),
                }
            }
            Routers::Ndn(rs) => {
                let r = &mut rs[n.index()];
                match packet {
                    Packet::NdnInterest(name) => r.on_interest(from, *name, now, out),
                    Packet::NdnData(name, content) if matches!(from, Peer::Router(_)) => {
                        r.on_data(from, *name, content, now, out)
                    }
                    Packet::NdnNack(name) if matches!(from, Peer::Router(_)) => {
                        r.on_nack(from, *name, now, out)
                    }
                    _ => return Err(unexpected()),
                }
            }
        }
        Ok(())
    }

    fn sample(&mut self) {
        let now = self.now;
        match &mut self.routers {
            Routers::Gram(rs) => {
                for r in rs.iter_mut() {
                    r.mart_gc(now, self.cfg.mart_timeout);
                    self.samples.push(TableSample {
                        time: now,
                        node: r.id,
                        entries: r.mart.len() as u32,
                    });
                }
            }
            Routers::Ndn(rs) => {
                for r in rs.iter_mut() {
                    r.pit_expire(now);
                    self.samples.push(TableSample {
                        time: now,
                        node: r.id,
                        entries: r.pit.len() as u32,
                    });
                }
            }
        }
        let next = now + self.cfg.sample_period;
        if next <= self.horizon {
            self.queue
                .push_after(now, self.cfg.sample_period, EventKind::Sample);
        }
    }

    /// Every router reachable from a group's source over next-hop sets
    /// must hold the source's counter once nothing is in flight.
    fn check_counters(&self, rs: &[RouterState]) -> Result<(), RunError> {
        for (group, source) in self.scenario.anchors.iter() {
            let Some(source_counter) = rs[source.index()].mart.counter(group) else {
                continue;
            };
            let mut seen = BTreeSet::new();
            let mut queue = VecDeque::new();
            seen.insert(source);
            queue.push_back(source);
            while let Some(u) = queue.pop_front() {
                let Some(entry) = rs[u.index()].mart.get(group) else {
                    continue;
                };
                if entry.counter != source_counter {
                    return Err(RunError::CounterDesync {
                        router: u,
                        group,
                        counter: entry.counter,
                        source_counter,
                    });
                }
                for &h in &entry.next_hops {
                    if seen.insert(h) {
                        queue.push_back(h);
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<RunReport, RunError> {
        let mut final_mart = Vec::new();
        let mut source_counters = BTreeMap::new();
        if let Routers::Gram(rs) = &self.routers {
            if self.cfg.verify_counters {
                self.check_counters(rs)?;
            }
            for r in rs {
                for (group, entry) in r.mart.iter() {
                    final_mart.push(MartRow {
                        router: r.id,
                        group,
                        counter: entry.counter,
                        next_hops: entry.next_hops.iter().copied().collect(),
                    });
                }
            }
            for (group, source) in self.scenario.anchors.iter() {
                source_counters.insert(group, rs[source.index()].mart.counter(group).unwrap_or(0));
            }
        }
        let failed_consumers = self
            .consumers
            .iter()
            .filter(|c| c.status() == ConsumerStatus::Failed)
            .map(|c| c.id)
            .collect();
        Ok(RunReport {
            protocol: self.cfg.protocol,
            topology_seed: self.scenario.topology_seed,
            duration: self.cfg.duration,
            warmup: self.cfg.warmup,
            samples: self.samples,
            deliveries: self.deliveries,
            unrequested_deliveries: self.unrequested,
            messages: self.messages,
            final_mart,
            source_counters,
            failed_consumers,
            events: self.events,
        })
    }
}
