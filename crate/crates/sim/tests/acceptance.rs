// SPDX-License-Identifier: Apache-2.0 OR MIT
//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the lines are always printed. Every sweep
//! uses the default 200-router scenario with seed 1 and 10 s of
//! simulated time; gram runs verify counter synchronization at the end of
//! each run, so any desync surfaces as a run error.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use gram_core::engine::{
    run_scenario, ConsumerSpec, Injection, NoObserver, Recorder, RunReport, Scenario,
};
use gram_core::ids::{GroupId, NodeId, Peer};
use gram_core::message::{MulticastInterest, Packet, PacketKind, ReplyCode};
use gram_core::metrics::summarize;
use gram_core::topology::{
    AnchorSet, FibTable, Link, Node, Position, PrefixEntry, Topology,
};
use gram_core::trace::{pacing_violations, repeated_acceptances};
use gram_core::{Protocol, ScenarioConfig, SimDuration, SimTime};
use gram_sim::report::{self, SummaryRow, TraceWriter};
use gram_sim::sweep::{self, ComparisonTable, SweepParam, SweepSpec};
use gram_sim::{checks, oracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn base() -> ScenarioConfig {
    ScenarioConfig {
        seed: SEED,
        ..ScenarioConfig::default()
    }
}

fn sweep_with(param: SweepParam, cfg: ScenarioConfig) -> Result<ComparisonTable, String> {
    eprintln!("sweeping {} at {}/s", param.name(), cfg.rate);
    let spec = SweepSpec::new(cfg, param, 1);
    sweep::run_sweep(&spec).map_err(|e| e.to_string())
}

fn fmt_series(values: impl Iterator<Item = f64>) -> String {
    values.map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(", ")
}

fn non_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] <= w[1])
}

struct Sweeps {
    rate: ComparisonTable,
    delay: ComparisonTable,
    groups: ComparisonTable,
    size: ComparisonTable,
}

fn criterion_1(s: &Sweeps) -> Outcome {
    let means: Vec<f64> = s.rate.rows.iter().map(|r| r.gram_mean_table).collect();
    let equal = means.iter().all(|m| m.to_bits() == means[0].to_bits());
    let max = s.rate.rows.iter().map(|r| r.gram_max_table).max().unwrap_or(0);
    let in_range = (1.0..=20.0).contains(&means[0]);
    outcome(
        equal && max <= 20 && in_range,
        format!("gram mean MART per rate [{}], max {max}", fmt_series(means.into_iter())),
    )
}

fn criterion_2(s: &Sweeps) -> Outcome {
    let row = s.rate.rows.iter().find(|r| r.value == 800.0).expect("800/s point");
    let ratio = row.ndn_mean_table / row.gram_mean_table;
    let max_ratio = row.ndn_max_table as f64 / row.gram_max_table as f64;
    outcome(
        ratio >= 20.0 && max_ratio >= 10.0,
        format!(
            "800/s: PIT mean {:.2} vs MART mean {:.3} ({ratio:.1}x), PIT max {} vs MART max {} ({max_ratio:.1}x)",
            row.ndn_mean_table, row.gram_mean_table, row.ndn_max_table, row.gram_max_table
        ),
    )
}

fn criterion_3(s: &Sweeps) -> Outcome {
    let r15 = &s.delay.rows[0];
    let r30 = &s.delay.rows[1];
    let factor = r30.ndn_mean_table / r15.ndn_mean_table;
    let mart_change = r30.gram_mean_table - r15.gram_mean_table;
    outcome(
        (1.5..=2.5).contains(&factor) && mart_change == 0.0,
        format!(
            "PIT {:.2} -> {:.2} (x{factor:.3}), MART {:.3} -> {:.3}",
            r15.ndn_mean_table, r30.ndn_mean_table, r15.gram_mean_table, r30.gram_mean_table
        ),
    )
}

fn criterion_4(s: &Sweeps) -> Outcome {
    let bounded = s.groups.rows.iter().all(|r| r.gram_mean_table <= r.value);
    let pit: Vec<f64> = s.groups.rows.iter().map(|r| r.ndn_mean_table).collect();
    let growing = pit.windows(2).all(|w| w[0] < w[1]);
    outcome(
        bounded && growing,
        format!(
            "MART [{}], PIT [{}]",
            fmt_series(s.groups.rows.iter().map(|r| r.gram_mean_table)),
            fmt_series(pit.into_iter())
        ),
    )
}

fn criterion_5(s: &Sweeps) -> Outcome {
    let gram: Vec<f64> = s.size.rows.iter().map(|r| r.gram_mean_table).collect();
    let ndn: Vec<f64> = s.size.rows.iter().map(|r| r.ndn_mean_table).collect();
    let gap: Vec<f64> = ndn.iter().zip(&gram).map(|(n, g)| n - g).collect();
    outcome(
        non_decreasing(&gram) && non_decreasing(&ndn) && non_decreasing(&gap),
        format!(
            "MART [{}], PIT [{}], gap [{}]",
            fmt_series(gram.into_iter()),
            fmt_series(ndn.into_iter()),
            fmt_series(gap.into_iter())
        ),
    )
}

fn criterion_6(s: &Sweeps) -> Outcome {
    let mut failures = Vec::new();
    let mut points = 0;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (table, bounded) in [(&s.rate, true), (&s.groups, true), (&s.size, true), (&s.delay, false)] {
        for r in &table.rows {
            points += 1;
            let bounds_apply = bounded || r.value == 15.0;
            match (r.gram_delay_ms, r.ndn_delay_ms) {
                (Some(g), Some(n)) => {
                    if g > n {
                        failures.push(format!("{}={}: gram {g:.2} > ndn {n:.2}", r.param, r.value));
                    }
                    if bounds_apply {
                        lo = lo.min(g.min(n));
                        hi = hi.max(g.max(n));
                        if !(30.0..=300.0).contains(&g) || !(30.0..=300.0).contains(&n) {
                            failures.push(format!("{}={}: delay outside [30, 300] ms", r.param, r.value));
                        }
                    }
                }
                _ => failures.push(format!("{}={}: no deliveries", r.param, r.value)),
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{points} paired points, 15 ms delays within [{lo:.2}, {hi:.2}] ms")
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

/// Six routers on a ring, producer at router 0. Routers 2 and 3 get FIBs
/// pointing at each other with the same claimed distance, so each takes
/// the other for its successor and neither passes the forwarding rule.
fn looped_ring() -> Scenario {
    let n = 6u32;
    let nodes: Vec<Node> = (0..n)
        .map(|i| {
            let a = i as f64 * std::f64::consts::TAU / n as f64;
            Node {
                id: NodeId(i),
                position: Position::new(10.0 * a.cos(), 10.0 * a.sin()),
            }
        })
        .collect();
    let links: Vec<Link> = (0..n)
        .map(|i| Link {
            a: NodeId(i),
            b: NodeId((i + 1) % n),
            delay: SimDuration::from_millis(15),
        })
        .collect();
    let topology = Topology::new(nodes, links).expect("valid ring");
    let mut anchors = AnchorSet::new();
    for g in 0..2 {
        anchors.insert(GroupId(g), NodeId(0)).expect("fresh group");
    }
    let consumers = [2u32, 3, 4, 5]
        .iter()
        .enumerate()
        .map(|(i, &r)| ConsumerSpec {
            router: NodeId(r),
            group: GroupId(i as u32 % 2),
            join_at: SimTime::ZERO,
        })
        .collect();
    let mut scenario = Scenario::custom(topology, anchors, consumers).expect("anchors exist");
    let cycle = [(2u32, 3u32), (3, 2)];
    for (router, next) in cycle {
        let mut fib = FibTable::new();
        for g in 0..2 {
            fib.insert(GroupId(g), PrefixEntry::new([(NodeId(next), 2)]));
        }
        scenario.fibs[router as usize] = fib;
    }
    scenario
}

fn criterion_7() -> Outcome {
    let mut scenario = looped_ring();
    let mut rng = ChaCha8Rng::seed_from_u64(0x100b_f4ee);
    let horizon_us = 2_000_000u64;
    for _ in 0..1000 {
        let router = NodeId(rng.gen_range(0..6));
        let neighbors = scenario.topology.neighbors(router);
        let (from, _) = neighbors[rng.gen_range(0..neighbors.len())];
        scenario.injections.push(Injection {
            at: SimTime::ZERO + SimDuration::from_micros(rng.gen_range(0..horizon_us)),
            router,
            from: Peer::Router(from),
            packet: Packet::Interest(MulticastInterest {
                group: GroupId(rng.gen_range(0..2)),
                distance: Some(rng.gen_range(0..6)),
                counter: rng.gen_range(1..40),
            }),
        });
    }
    let cfg = ScenarioConfig {
        rate: 10.0,
        duration: SimDuration::from_secs(2),
        warmup: SimDuration::ZERO,
        payload_size: 64,
        verify_counters: false,
        ..ScenarioConfig::default()
    };
    let mut rec = Recorder::default();
    if let Err(e) = run_scenario(&cfg, &scenario, &mut rec) {
        return outcome(false, format!("run failed: {e}"));
    }
    let repeats = repeated_acceptances(&rec.acceptances);
    let loops = rec
        .trace
        .iter()
        .filter(|r| r.kind == PacketKind::Mr && r.code == Some(ReplyCode::Loop))
        .count();
    outcome(
        repeats.is_empty() && loops > 0,
        format!(
            "1000 injections, {} acceptances, {} repeated, {loops} MR(loop) records",
            rec.acceptances.len(),
            repeats.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for variant in oracle::Variant::ALL {
        match oracle::run(variant) {
            Ok(run) => {
                let problems = oracle::check(variant, &run);
                ok &= problems.is_empty();
                notes.push(if problems.is_empty() {
                    format!("{} exact", variant.name())
                } else {
                    format!("{}: {}", variant.name(), problems.join("; "))
                });
            }
            Err(e) => {
                ok = false;
                notes.push(format!("{}: {e}", variant.name()));
            }
        }
    }
    let rtts: Vec<String> = oracle::CONSUMER_ROUTERS
        .iter()
        .map(|&r| format!("{} ms", oracle::shortest_round_trip(r)))
        .collect();
    notes.push(format!("shortest round trips {}", rtts.join(", ")));
    outcome(ok, notes.join(", "))
}

/// Counters on every router of each group's active tree against the
/// source, found by walking next hops from the anchor. Independent of the
/// engine's own end-of-run check.
fn counter_sync(report: &RunReport, anchors: &AnchorSet) -> Vec<String> {
    let rows: BTreeMap<(NodeId, GroupId), &gram_core::engine::MartRow> =
        report.final_mart.iter().map(|r| ((r.router, r.group), r)).collect();
    let mut bad = Vec::new();
    for (&group, &source) in &report.source_counters {
        let Some(anchor) = anchors.anchor(group) else {
            bad.push(format!("group {group} has no anchor"));
            continue;
        };
        let mut seen = BTreeSet::from([anchor]);
        let mut queue = VecDeque::from([anchor]);
        while let Some(router) = queue.pop_front() {
            let Some(row) = rows.get(&(router, group)) else {
                continue;
            };
            if row.counter != source {
                bad.push(format!(
                    "router {router} group {group}: counter {} vs source {source}",
                    row.counter
                ));
            }
            for &next in &row.next_hops {
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
    }
    bad
}

fn criterion_9(gram_runs: usize) -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    let mut runs: Vec<(ScenarioConfig, Scenario)> = oracle::Variant::ALL
        .into_iter()
        .map(|v| (oracle::config(), oracle::scenario(v)))
        .collect();
    for rate in [50.0, 800.0] {
        let cfg = ScenarioConfig {
            rate,
            duration: SimDuration::from_secs(5),
            verify_counters: false,
            ..base()
        };
        let scenario = Scenario::generate(&cfg).expect("scenario");
        runs.push((cfg, scenario));
    }
    for (cfg, scenario) in &runs {
        match run_scenario(cfg, scenario, &mut NoObserver) {
            Ok(report) => {
                checked += report.final_mart.len();
                bad.extend(counter_sync(&report, &scenario.anchors));
            }
            Err(e) => bad.push(e.to_string()),
        }
    }
    let detail = if bad.is_empty() {
        format!(
            "{checked} final MART rows walked from the anchors; {gram_runs} sweep runs passed the end-of-run check"
        )
    } else {
        bad.join("; ")
    };
    outcome(bad.is_empty(), detail)
}

fn short_config(protocol: Protocol) -> ScenarioConfig {
    ScenarioConfig {
        protocol,
        duration: SimDuration::from_secs(2),
        warmup: SimDuration::from_millis(500),
        ..base()
    }
}

fn criterion_10() -> Outcome {
    let mut traces = 0;
    let mut records = 0;
    let mut bad = Vec::new();
    for variant in oracle::Variant::ALL {
        let cfg = oracle::config();
        let scenario = oracle::scenario(variant);
        let mut rec = Recorder::default();
        run_scenario(&cfg, &scenario, &mut rec).expect("oracle run");
        records += rec.trace.len();
        traces += 1;
        bad.extend(pacing_violations(&rec.trace));
    }
    for (rate, secs) in [(160.0, 2), (800.0, 1)] {
        let cfg = ScenarioConfig {
            rate,
            duration: SimDuration::from_secs(secs),
            ..short_config(Protocol::Gram)
        };
        let scenario = Scenario::generate(&cfg).expect("scenario");
        let mut rec = Recorder::default();
        run_scenario(&cfg, &scenario, &mut rec).expect("gram run");
        records += rec.trace.len();
        traces += 1;
        bad.extend(pacing_violations(&rec.trace));
        let other: Vec<String> = checks::violations(&cfg, &scenario, &rec);
        if !other.is_empty() {
            return outcome(false, format!("rate {rate}: {}", other[0]));
        }
    }
    outcome(
        bad.is_empty(),
        format!("{traces} gram traces, {records} records, {} duplicate upstream MIs", bad.len()),
    )
}

fn run_artifacts(cfg: &ScenarioConfig, dir: &Path) -> Vec<u8> {
    let scenario = Scenario::generate(cfg).expect("scenario");
    let mut writer = TraceWriter::new(Vec::new());
    let report = run_scenario(cfg, &scenario, &mut writer).expect("run");
    let summary = summarize(&report).expect("summary");
    fs::create_dir_all(dir).expect("artifact dir");
    report::write_tables(&dir.join("tables.csv"), &report).expect("tables");
    report::write_delays(&dir.join("delays.csv"), &report).expect("delays");
    report::write_summary(&dir.join("summary.csv"), &[SummaryRow::new(cfg.seed, &report, &summary)])
        .expect("summary");
    writer.finish().expect("trace")
}

fn criterion_11(tmp: &Path) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for protocol in [Protocol::Gram, Protocol::Ndn] {
        let cfg = short_config(protocol);
        let a_dir = tmp.join(format!("{protocol}-a"));
        let b_dir = tmp.join(format!("{protocol}-b"));
        let a = run_artifacts(&cfg, &a_dir);
        let b = run_artifacts(&cfg, &b_dir);
        let mut same = a == b;
        for file in ["tables.csv", "delays.csv", "summary.csv"] {
            same &= fs::read(a_dir.join(file)).ok() == fs::read(b_dir.join(file)).ok();
        }
        ok &= same;
        notes.push(format!(
            "{protocol}: {} trace bytes {}",
            a.len(),
            if same { "identical" } else { "DIFFER" }
        ));
    }
    outcome(ok, notes.join(", "))
}

fn main() -> ExitCode {
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let started = Instant::now();

    let sweeps = (|| -> Result<Sweeps, String> {
        Ok(Sweeps {
            rate: sweep_with(SweepParam::Rate, base())?,
            delay: sweep_with(
                SweepParam::LinkDelay,
                ScenarioConfig {
                    rate: 800.0,
                    ..base()
                },
            )?,
            groups: sweep_with(SweepParam::Groups, base())?,
            size: sweep_with(SweepParam::GroupSize, base())?,
        })
    })();
    let sweep_time = started.elapsed();

    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    match &sweeps {
        Ok(s) => {
            results.push((1, "rate invariance", criterion_1(s)));
            results.push((2, "PIT vs MART separation", criterion_2(s)));
            results.push((3, "link-delay scaling", criterion_3(s)));
            results.push((4, "group-count scaling", criterion_4(s)));
            results.push((5, "group-size trend", criterion_5(s)));
            results.push((6, "delay ordering", criterion_6(s)));
        }
        Err(e) => {
            for (n, name) in [
                (1, "rate invariance"),
                (2, "PIT vs MART separation"),
                (3, "link-delay scaling"),
                (4, "group-count scaling"),
                (5, "group-size trend"),
                (6, "delay ordering"),
            ] {
                results.push((n, name, outcome(false, format!("sweep failed: {e}"))));
            }
        }
    }
    let gram_runs = sweeps
        .as_ref()
        .map(|s| [&s.rate, &s.delay, &s.groups, &s.size].iter().map(|t| t.rows.len()).sum())
        .unwrap_or(0);
    results.push((7, "loop freedom", criterion_7()));
    results.push((8, "oracle equivalence", criterion_8()));
    results.push((9, "counter synchronization", criterion_9(gram_runs)));
    results.push((10, "pacing invariant", criterion_10()));
    results.push((11, "determinism", criterion_11(&tmp)));

    println!();
    for (n, name, o) in &results {
        println!(
            "criterion {n:>2} {:<24} {}  {}",
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "sweeps {:.1} s, total {:.1} s",
        sweep_time.as_secs_f64(),
        started.elapsed().as_secs_f64()
    );
    if results.iter().all(|(_, _, o)| o.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
