// SPDX-License-Identifier: Apache-2.0 OR MIT

use gram_core::engine::Scenario;
use gram_core::{Protocol, ScenarioConfig, SimDuration};
use gram_sim::config;
use gram_sim::oracle;
use gram_sim::topology_io::{parse_topology, write_topology};
use proptest::prelude::*;

#[test]
fn config_file_round_trips_through_disk() {
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("formats");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scenario.conf");
    let cfg = ScenarioConfig {
        protocol: Protocol::Ndn,
        rate: 400.0,
        groups: 7,
        link_delay: SimDuration::from_millis(30),
        warmup: SimDuration::from_millis(250),
        ..ScenarioConfig::default()
    };
    std::fs::write(&path, config::to_kv(&cfg)).unwrap();
    let mut back = ScenarioConfig::default();
    config::apply_file(&mut back, &path).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn missing_config_file_is_an_error() {
    let mut cfg = ScenarioConfig::default();
    let err = config::apply_file(&mut cfg, std::path::Path::new("/nonexistent/x.conf")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/x.conf"));
}

#[test]
fn golden_chain_topology_parses_to_the_oracle_chain() {
    let topo = parse_topology(oracle::GOLDEN_TOPOLOGY).unwrap();
    assert_eq!(topo, oracle::chain_topology());
}

#[test]
fn generated_topology_survives_a_file_round_trip() {
    let scenario = Scenario::generate(&ScenarioConfig::default()).unwrap();
    let text = write_topology(&scenario.topology);
    let back = parse_topology(&text).unwrap();
    assert_eq!(back.links(), scenario.topology.links());
    assert_eq!(write_topology(&back), text);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_generated_topology_round_trips(seed in any::<u64>(), nodes in 2u32..60) {
        let cfg = ScenarioConfig {
            nodes,
            side: 40.0,
            seed,
            groups: 1,
            group_size: 1,
            ..ScenarioConfig::default()
        };
        let scenario = Scenario::generate(&cfg).unwrap();
        let text = write_topology(&scenario.topology);
        let back = parse_topology(&text).unwrap();
        prop_assert_eq!(back.links(), scenario.topology.links());
        prop_assert_eq!(back.len(), scenario.topology.len());
    }

    #[test]
    fn config_kv_round_trips(rate in 1u32..2000, groups in 1u32..50, delay_ms in 1u32..100, seed in any::<u64>()) {
        let cfg = ScenarioConfig {
            rate: rate as f64,
            groups,
            link_delay: SimDuration::from_millis(delay_ms as u64),
            seed,
            ..ScenarioConfig::default()
        };
        let mut back = ScenarioConfig::default();
        config::apply_str(&mut back, &config::to_kv(&cfg)).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
