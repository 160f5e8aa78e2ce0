// SPDX-License-Identifier: Apache-2.0 OR MIT
//! File formats, sweeps and oracle scenarios around `gram-core`.
//!
//! - [`checks`]: trace invariants over a recorded run
//! - [`config`]: `key = value` scenario files and overrides
//! - [`topology_io`]: `node`/`link` topology files
//! - [`report`]: `tables.csv`, `delays.csv`, `summary.csv` and trace files
//! - [`sweep`]: paired protocol sweeps and figure tables
//! - [`oracle`]: five-router chain scenarios with golden traces

pub mod checks;
pub mod config;
pub mod oracle;
pub mod report;
pub mod sweep;
pub mod topology_io;
