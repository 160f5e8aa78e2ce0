// SPDX-License-Identifier: Apache-2.0 OR MIT
//! CSV output for a single run and trace files.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use gram_core::engine::{Observer, RunReport};
use gram_core::message::PacketKind;
use gram_core::metrics::Summary;
use gram_core::trace::TraceRecord;
use serde::Serialize;

#[derive(Serialize)]
struct TableRow {
    time: String,
    node: u32,
    entries: u32,
}

#[derive(Serialize)]
struct DelayRow {
    group: u32,
    consumer: u32,
    counter: u64,
    delay_ms: String,
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub protocol: String,
    pub seed: u64,
    pub topology_seed: u64,
    pub mean_table: f64,
    pub max_table: u32,
    pub samples: usize,
    pub deliveries: usize,
    pub mean_delay_ms: Option<f64>,
    pub p50_delay_ms: Option<f64>,
    pub p95_delay_ms: Option<f64>,
    pub max_delay_ms: Option<f64>,
    pub mi: u64,
    pub mp: u64,
    pub mr: u64,
    pub ni: u64,
    pub nd: u64,
    pub nn: u64,
    pub failed_consumers: usize,
}

impl SummaryRow {
    pub fn new(seed: u64, report: &RunReport, s: &Summary) -> Self {
        let d = s.delay.as_ref();
        SummaryRow {
            protocol: report.protocol.to_string(),
            seed,
            topology_seed: report.topology_seed,
            mean_table: s.mean_table,
            max_table: s.max_table,
            samples: s.samples,
            deliveries: d.map_or(0, |d| d.count),
            mean_delay_ms: d.map(|d| d.mean_ms),
            p50_delay_ms: d.map(|d| d.p50_ms),
            p95_delay_ms: d.map(|d| d.p95_ms),
            max_delay_ms: d.map(|d| d.max_ms),
            mi: s.message_count(PacketKind::Mi),
            mp: s.message_count(PacketKind::Mp),
            mr: s.message_count(PacketKind::Mr),
            ni: s.message_count(PacketKind::Ni),
            nd: s.message_count(PacketKind::Nd),
            nn: s.message_count(PacketKind::Nn),
            failed_consumers: s.failed_consumers,
        }
    }
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

/// `tables.csv`: one row per router per sample.
pub fn write_tables(path: &Path, report: &RunReport) -> Result<()> {
    let mut w = writer(path)?;
    for s in &report.samples {
        w.serialize(TableRow {
            time: s.time.to_string(),
            node: s.node.0,
            entries: s.entries,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// `delays.csv`: one row per requested round that arrived.
pub fn write_delays(path: &Path, report: &RunReport) -> Result<()> {
    let mut w = writer(path)?;
    for d in &report.deliveries {
        w.serialize(DelayRow {
            group: d.group.0,
            consumer: d.consumer.0,
            counter: d.counter,
            delay_ms: d.delay().to_string(),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = writer(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Streams trace lines to a writer. The first I/O error is kept and
/// later records are dropped.
pub struct TraceWriter<W: Write> {
    out: W,
    error: Option<io::Error>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> Self {
        TraceWriter { out, error: None }
    }

    pub fn finish(mut self) -> io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> Observer for TraceWriter<W> {
    fn on_trace(&mut self, record: &TraceRecord) {
        if self.error.is_none() {
            if let Err(e) = writeln!(self.out, "{record}") {
                self.error = Some(e);
            }
        }
    }
}

pub fn trace_to_string(trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(trace.len() * 32);
    for r in trace {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

pub fn write_trace(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    std::fs::write(path, trace_to_string(trace))
        .with_context(|| format!("writing {}", path.display()))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let record = line
            .parse()
            .with_context(|| format!("{}:{}", path.display(), idx + 1))?;
        out.push(record);
    }
    Ok(out)
}
