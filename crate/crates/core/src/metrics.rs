// SPDX-License-Identifier: Apache-2.0 OR MIT
//! Run summaries over the post-warm-up window.

use alloc::vec::Vec;

use thiserror::Error;

use crate::engine::RunReport;
use crate::message::PacketKind;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq)]
pub struct DelayStats {
    pub count: usize,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// Mean over every `(router, sample)` pair in the window.
    pub mean_table: f64,
    pub max_table: u32,
    pub samples: usize,
    /// `None` when no requested round arrived in the window.
    pub delay: Option<DelayStats>,
    pub messages: [u64; 6],
    pub failed_consumers: usize,
}

impl Summary {
    pub fn message_count(&self, kind: PacketKind) -> u64 {
        self.messages[kind.index()]
    }

    pub fn mean_delay_ms(&self) -> Option<f64> {
        self.delay.as_ref().map(|d| d.mean_ms)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("insufficient data: no table samples after the warm-up")]
    InsufficientData,
}

/// Nearest-rank percentile of sorted values.
fn percentile(sorted: &[f64], p: usize) -> f64 {
    let rank = (p * sorted.len()).div_ceil(100);
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Table samples taken at or after the warm-up and deliveries of rounds
/// requested at or after it.
pub fn summarize(report: &RunReport) -> Result<Summary, MetricsError> {
    let start = SimTime::ZERO + report.warmup;
    let mut total = 0u64;
    let mut samples = 0usize;
    let mut max_table = 0u32;
    for s in report.samples.iter().filter(|s| s.time >= start) {
        total += s.entries as u64;
        samples += 1;
        max_table = max_table.max(s.entries);
    }
    if samples == 0 {
        return Err(MetricsError::InsufficientData);
    }
    let mut delays: Vec<f64> = report
        .deliveries
        .iter()
        .filter(|d| d.requested_at >= start)
        .map(|d| d.delay().as_millis_f64())
        .collect();
    let delay = if delays.is_empty() {
        None
    } else {
        delays.sort_by(f64::total_cmp);
        let mean_ms = delays.iter().sum::<f64>() / delays.len() as f64;
        Some(DelayStats {
            count: delays.len(),
            mean_ms,
            p50_ms: percentile(&delays, 50),
            p95_ms: percentile(&delays, 95),
            max_ms: delays[delays.len() - 1],
        })
    };
    Ok(Summary {
        mean_table: total as f64 / samples as f64,
        max_table,
        samples,
        delay,
        messages: report.messages,
        failed_consumers: report.failed_consumers.len(),
    })
}
