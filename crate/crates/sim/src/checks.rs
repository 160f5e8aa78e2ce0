// SPDX-License-Identifier: Apache-2.0 OR MIT
//! Trace invariants over a recorded run.

use gram_core::engine::{Recorder, Scenario};
use gram_core::ids::Peer;
use gram_core::trace::{
    conservation_violations, pacing_violations, repeated_acceptances, reverse_path_violations,
};
use gram_core::{Protocol, ScenarioConfig, SimDuration};

/// Hop delay between two trace endpoints, or `None` for a hop that does
/// not exist in the scenario.
pub fn hop_delay(cfg: &ScenarioConfig, scenario: &Scenario, a: Peer, b: Peer) -> Option<SimDuration> {
    let attached = |c: gram_core::ids::ConsumerId, r| {
        scenario
            .consumers
            .get(c.index())
            .filter(|spec| spec.router == r)
            .map(|_| cfg.access_delay)
    };
    match (a, b) {
        (Peer::Router(x), Peer::Router(y)) => scenario.topology.link_delay(x, y),
        (Peer::Consumer(c), Peer::Router(r)) | (Peer::Router(r), Peer::Consumer(c)) => {
            attached(c, r)
        }
        (Peer::Consumer(_), Peer::Consumer(_)) => None,
    }
}

/// Every invariant broken by the recorded run, one line each.
pub fn violations(cfg: &ScenarioConfig, scenario: &Scenario, rec: &Recorder) -> Vec<String> {
    let mut out = Vec::new();
    if cfg.protocol == Protocol::Gram {
        for (router, group, counter) in pacing_violations(&rec.trace) {
            out.push(format!("pacing: router {router} sent MI {group}/{counter} upstream twice"));
        }
        for (router, group, counter) in repeated_acceptances(&rec.acceptances) {
            out.push(format!("router {router} accepted {group}/{counter} twice"));
        }
    }
    for r in conservation_violations(&rec.trace, |a, b| hop_delay(cfg, scenario, a, b)) {
        out.push(format!("conservation: {r}"));
    }
    for r in reverse_path_violations(&rec.trace) {
        out.push(format!("reverse path: {r}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use gram_core::engine::run_scenario;

    #[test]
    fn oracle_runs_are_clean() {
        for variant in oracle::Variant::ALL {
            for protocol in [Protocol::Gram, Protocol::Ndn] {
                let cfg = ScenarioConfig {
                    protocol,
                    ..oracle::config()
                };
                let scenario = oracle::scenario(variant);
                let mut rec = Recorder::default();
                run_scenario(&cfg, &scenario, &mut rec).unwrap();
                assert!(!rec.trace.is_empty());
                assert_eq!(violations(&cfg, &scenario, &rec), Vec::<String>::new());
            }
        }
    }

    #[test]
    fn dropped_reception_is_reported() {
        let cfg = oracle::config();
        let scenario = oracle::scenario(oracle::Variant::TwoGroups);
        let mut rec = Recorder::default();
        run_scenario(&cfg, &scenario, &mut rec).unwrap();
        let rx = rec
            .trace
            .iter()
            .position(|r| r.dir == gram_core::trace::Direction::Rx)
            .unwrap();
        rec.trace.remove(rx);
        assert!(!violations(&cfg, &scenario, &rec).is_empty());
    }
}
