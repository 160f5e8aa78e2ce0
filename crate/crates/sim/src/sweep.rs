// SPDX-License-Identifier: Apache-2.0 OR MIT
//! Paired parameter sweeps.
//!
//! Every `(value, seed)` point builds one scenario and runs both
//! protocols over it, so the two always see the same topology, producers
//! and consumers. Points run on the rayon pool; results are sorted by
//! `(value, seed)` before aggregation.

use std::path::Path;

use anyhow::Result;
use gram_core::engine::{run_scenario, NoObserver, Scenario};
use gram_core::metrics::{summarize, MetricsError, Summary};
use gram_core::{Protocol, RunError, ScenarioConfig, SimDuration};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Rate,
    Groups,
    GroupSize,
    LinkDelay,
}

impl SweepParam {
    pub const ALL: [SweepParam; 4] = [
        SweepParam::Rate,
        SweepParam::Groups,
        SweepParam::GroupSize,
        SweepParam::LinkDelay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Rate => "rate",
            SweepParam::Groups => "groups",
            SweepParam::GroupSize => "group_size",
            SweepParam::LinkDelay => "link_delay_ms",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepParam::Rate => vec![50.0, 100.0, 200.0, 400.0, 800.0],
            SweepParam::Groups => vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            SweepParam::GroupSize => vec![10.0, 20.0, 30.0, 40.0],
            SweepParam::LinkDelay => vec![15.0, 30.0],
        }
    }

    /// Figure file this sweep feeds, if any.
    pub fn figure_file(self) -> Option<&'static str> {
        match self {
            SweepParam::Rate => Some("fig_rate.csv"),
            SweepParam::Groups => Some("fig_groups.csv"),
            SweepParam::GroupSize => Some("fig_size.csv"),
            SweepParam::LinkDelay => None,
        }
    }

    pub fn apply(self, cfg: &mut ScenarioConfig, value: f64) {
        match self {
            SweepParam::Rate => cfg.rate = value,
            SweepParam::Groups => cfg.groups = value as u32,
            SweepParam::GroupSize => cfg.group_size = value as u32,
            SweepParam::LinkDelay => cfg.link_delay = SimDuration::from_millis_f64(value),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl SweepSpec {
    pub fn new(base: ScenarioConfig, param: SweepParam, seeds: u64) -> Self {
        let first = base.seed;
        SweepSpec {
            base,
            param,
            values: param.default_values(),
            seeds: (first..first + seeds).collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("{param}={value} seed {seed} ({protocol}): {source}")]
    Run {
        param: &'static str,
        value: f64,
        seed: u64,
        protocol: Protocol,
        #[source]
        source: RunError,
    },
    #[error("{param}={value} seed {seed} ({protocol}): {source}")]
    Metrics {
        param: &'static str,
        value: f64,
        seed: u64,
        protocol: Protocol,
        #[source]
        source: MetricsError,
    },
    #[error("{param}={value} seed {seed}: {source}")]
    Scenario {
        param: &'static str,
        value: f64,
        seed: u64,
        #[source]
        source: RunError,
    },
    #[error("sweep needs at least one value and one seed")]
    Empty,
}

/// Both protocol summaries for one `(value, seed)` point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub value: f64,
    pub seed: u64,
    pub topology_seed: u64,
    pub gram: Summary,
    pub ndn: Summary,
}

pub fn run_point(spec: &SweepSpec, value: f64, seed: u64) -> Result<PointResult, SweepError> {
    let param = spec.param.name();
    let mut cfg = spec.base.clone();
    spec.param.apply(&mut cfg, value);
    cfg.seed = seed;
    let scenario = Scenario::generate(&cfg).map_err(|source| SweepError::Scenario {
        param,
        value,
        seed,
        source,
    })?;
    let mut summaries = Vec::with_capacity(2);
    for protocol in [Protocol::Gram, Protocol::Ndn] {
        let cfg = ScenarioConfig {
            protocol,
            ..cfg.clone()
        };
        let report = run_scenario(&cfg, &scenario, &mut NoObserver).map_err(|source| {
            SweepError::Run {
                param,
                value,
                seed,
                protocol,
                source,
            }
        })?;
        let summary = summarize(&report).map_err(|source| SweepError::Metrics {
            param,
            value,
            seed,
            protocol,
            source,
        })?;
        summaries.push(summary);
    }
    let ndn = summaries.pop().expect("two runs");
    let gram = summaries.pop().expect("two runs");
    Ok(PointResult {
        value,
        seed,
        topology_seed: scenario.topology_seed,
        gram,
        ndn,
    })
}

/// Mean and 95% Student-t half-width. The half-width is zero for a
/// single sample.
pub fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    (mean, t * (var / n as f64).sqrt())
}

/// One row per swept value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub param: &'static str,
    pub value: f64,
    pub seeds: usize,
    pub gram_mean_table: f64,
    pub gram_mean_table_ci: f64,
    pub gram_max_table: u32,
    pub ndn_mean_table: f64,
    pub ndn_mean_table_ci: f64,
    pub ndn_max_table: u32,
    pub gram_delay_ms: Option<f64>,
    pub gram_delay_ci: Option<f64>,
    pub ndn_delay_ms: Option<f64>,
    pub ndn_delay_ci: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub param: SweepParam,
    pub rows: Vec<ComparisonRow>,
}

fn delay_ci(summaries: &[&Summary]) -> (Option<f64>, Option<f64>) {
    let delays: Option<Vec<f64>> = summaries.iter().map(|s| s.mean_delay_ms()).collect();
    match delays {
        Some(d) if !d.is_empty() => {
            let (m, ci) = mean_ci(&d);
            (Some(m), Some(ci))
        }
        _ => (None, None),
    }
}

/// Groups point results by value. Results may come in any order.
pub fn aggregate(param: SweepParam, points: &[PointResult]) -> ComparisonTable {
    let mut sorted: Vec<&PointResult> = points.iter().collect();
    sorted.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.seed.cmp(&b.seed)));
    let mut rows = Vec::new();
    for chunk in sorted.chunk_by(|a, b| a.value == b.value) {
        let gram: Vec<&Summary> = chunk.iter().map(|p| &p.gram).collect();
        let ndn: Vec<&Summary> = chunk.iter().map(|p| &p.ndn).collect();
        let means = |s: &[&Summary]| mean_ci(&s.iter().map(|x| x.mean_table).collect::<Vec<_>>());
        let (gm, gci) = means(&gram);
        let (nm, nci) = means(&ndn);
        let (gd, gdci) = delay_ci(&gram);
        let (nd, ndci) = delay_ci(&ndn);
        rows.push(ComparisonRow {
            param: param.name(),
            value: chunk[0].value,
            seeds: chunk.len(),
            gram_mean_table: gm,
            gram_mean_table_ci: gci,
            gram_max_table: gram.iter().map(|s| s.max_table).max().unwrap_or(0),
            ndn_mean_table: nm,
            ndn_mean_table_ci: nci,
            ndn_max_table: ndn.iter().map(|s| s.max_table).max().unwrap_or(0),
            gram_delay_ms: gd,
            gram_delay_ci: gdci,
            ndn_delay_ms: nd,
            ndn_delay_ci: ndci,
        });
    }
    ComparisonTable { param, rows }
}

pub fn run_sweep_points(spec: &SweepSpec) -> Result<Vec<PointResult>, SweepError> {
    if spec.values.is_empty() || spec.seeds.is_empty() {
        return Err(SweepError::Empty);
    }
    let jobs: Vec<(f64, u64)> = spec
        .values
        .iter()
        .flat_map(|&v| spec.seeds.iter().map(move |&s| (v, s)))
        .collect();
    jobs.into_par_iter()
        .map(|(v, s)| run_point(spec, v, s))
        .collect()
}

pub fn run_sweep(spec: &SweepSpec) -> Result<ComparisonTable, SweepError> {
    let points = run_sweep_points(spec)?;
    Ok(aggregate(spec.param, &points))
}

impl ComparisonTable {
    /// Rows where the multicast table outgrew the group count.
    pub fn violations(&self, base: &ScenarioConfig) -> Vec<String> {
        self.rows
            .iter()
            .filter_map(|r| {
                let groups = if self.param == SweepParam::Groups {
                    r.value as u32
                } else {
                    base.groups
                };
                (r.gram_max_table > groups).then(|| {
                    format!(
                        "{}={}: max MART {} exceeds {} groups",
                        r.param, r.value, r.gram_max_table, groups
                    )
                })
            })
            .collect()
    }
}

#[derive(Serialize)]
struct TableFigRow {
    value: f64,
    gram_mean_table: f64,
    gram_ci: f64,
    ndn_mean_table: f64,
    ndn_ci: f64,
}

#[derive(Serialize)]
struct DelayFigRow {
    value: f64,
    gram_delay_ms: Option<f64>,
    gram_ci: Option<f64>,
    ndn_delay_ms: Option<f64>,
    ndn_ci: Option<f64>,
}

pub fn write_comparison(path: &Path, tables: &[ComparisonTable]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for t in tables {
        for r in &t.rows {
            w.serialize(r)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Table sizes against the swept value.
pub fn write_table_figure(path: &Path, table: &ComparisonTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in &table.rows {
        w.serialize(TableFigRow {
            value: r.value,
            gram_mean_table: r.gram_mean_table,
            gram_ci: r.gram_mean_table_ci,
            ndn_mean_table: r.ndn_mean_table,
            ndn_ci: r.ndn_mean_table_ci,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Mean delays against the swept value.
pub fn write_delay_figure(path: &Path, table: &ComparisonTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in &table.rows {
        w.serialize(DelayFigRow {
            value: r.value,
            gram_delay_ms: r.gram_delay_ms,
            gram_ci: r.gram_delay_ci,
            ndn_delay_ms: r.ndn_delay_ms,
            ndn_ci: r.ndn_delay_ci,
        })?;
    }
    w.flush()?;
    Ok(())
}
