// SPDX-License-Identifier: Apache-2.0 OR MIT
//! `gramsim`: run scenarios, sweeps and the chain oracle from the shell.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Arg, ArgAction, ArgMatches, Command};
use gram_core::engine::{run_scenario, NoObserver, Recorder, Scenario};
use gram_core::metrics::summarize;
use gram_core::ScenarioConfig;
use gram_sim::sweep::{self, SweepParam, SweepSpec};
use gram_sim::{checks, config, oracle, report, topology_io};

fn scenario_args(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("Scenario file with `key = value` lines"),
    );
    config::KEYS.iter().fold(cmd, |cmd, key| {
        cmd.arg(
            Arg::new(*key)
                .long(*key)
                .value_name("VALUE")
                .help(format!("Override `{key}`")),
        )
    })
}

fn cli() -> Command {
    Command::new("gramsim")
        .about("Multicast counter forwarding against an NDN PIT baseline")
        .subcommand_required(true)
        .subcommand(
            scenario_args(Command::new("run").about("Run one scenario"))
                .arg(
                    Arg::new("out")
                        .long("out")
                        .value_name("DIR")
                        .default_value("out")
                        .help("Directory for tables.csv, delays.csv, summary.csv, topology.txt and config.txt"),
                )
                .arg(
                    Arg::new("trace")
                        .long("trace")
                        .value_name("FILE")
                        .help("Record the packet trace, check its invariants and write it here"),
                )
                .arg(
                    Arg::new("topology")
                        .long("topology")
                        .value_name("FILE")
                        .help("Use this topology instead of generating one"),
                ),
        )
        .subcommand(
            scenario_args(Command::new("sweep").about("Paired sweep of both protocols over one parameter"))
                .arg(
                    Arg::new("param")
                        .long("param")
                        .required(true)
                        .value_parser(["rate", "groups", "group_size", "link_delay_ms"]),
                )
                .arg(
                    Arg::new("values")
                        .long("values")
                        .value_name("LIST")
                        .help("Comma-separated values; defaults depend on --param"),
                )
                .arg(
                    Arg::new("seeds")
                        .long("seeds")
                        .value_name("N")
                        .default_value("1")
                        .value_parser(clap::value_parser!(u64).range(1..))
                        .help("Number of consecutive seeds starting at `seed`"),
                )
                .arg(Arg::new("out").long("out").value_name("DIR").default_value("out")),
        )
        .subcommand(
            Command::new("oracle")
                .about("Run the five-router chain scenarios and compare with the golden traces")
                .arg(
                    Arg::new("bless")
                        .long("bless")
                        .value_name("DIR")
                        .help("Write fresh golden files to DIR instead of comparing traces"),
                ),
        )
        .subcommand(
            scenario_args(Command::new("topology").about("Generate a topology file"))
                .arg(Arg::new("out").long("out").value_name("FILE").action(ArgAction::Set)),
        )
}

fn load_config(m: &ArgMatches) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    if let Some(path) = m.get_one::<String>("config") {
        config::apply_file(&mut cfg, Path::new(path))?;
    }
    for key in config::KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            config::set(&mut cfg, key, v).with_context(|| format!("--{key}"))?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(m: &ArgMatches) -> Result<PathBuf> {
    let dir = PathBuf::from(m.get_one::<String>("out").expect("has default"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn cmd_run(m: &ArgMatches) -> Result<bool> {
    let cfg = load_config(m)?;
    let scenario = match m.get_one::<String>("topology") {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let topo = topology_io::parse_topology(&text).with_context(|| path.clone())?;
            Scenario::with_topology(&cfg, topo)?
        }
        None => Scenario::generate(&cfg)?,
    };
    let dir = out_dir(m)?;
    let mut problems = Vec::new();
    let report = match m.get_one::<String>("trace") {
        Some(path) => {
            let mut rec = Recorder::default();
            let report = run_scenario(&cfg, &scenario, &mut rec)?;
            report::write_trace(Path::new(path), &rec.trace)?;
            problems = checks::violations(&cfg, &scenario, &rec);
            report
        }
        None => run_scenario(&cfg, &scenario, &mut NoObserver)?,
    };
    let summary = summarize(&report)?;
    report::write_tables(&dir.join("tables.csv"), &report)?;
    report::write_delays(&dir.join("delays.csv"), &report)?;
    report::write_summary(
        &dir.join("summary.csv"),
        &[report::SummaryRow::new(cfg.seed, &report, &summary)],
    )?;
    fs::write(dir.join("topology.txt"), topology_io::write_topology(&scenario.topology))?;
    fs::write(dir.join("config.txt"), config::to_kv(&cfg))?;

    println!(
        "{}: mean table {:.3}, max table {}, mean delay {}, {} failed consumers",
        report.protocol,
        summary.mean_table,
        summary.max_table,
        summary
            .mean_delay_ms()
            .map_or_else(|| "n/a".to_string(), |d| format!("{d:.3} ms")),
        summary.failed_consumers,
    );
    for p in &problems {
        eprintln!("violation: {p}");
    }
    Ok(problems.is_empty())
}

fn cmd_sweep(m: &ArgMatches) -> Result<bool> {
    let cfg = load_config(m)?;
    let param = SweepParam::parse(m.get_one::<String>("param").expect("required"))
        .expect("restricted by value parser");
    let mut spec = SweepSpec::new(cfg, param, *m.get_one::<u64>("seeds").expect("has default"));
    if let Some(list) = m.get_one::<String>("values") {
        spec.values = list
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad value `{v}`")))
            .collect::<Result<_>>()?;
    }
    let dir = out_dir(m)?;
    let table = sweep::run_sweep(&spec)?;
    sweep::write_comparison(&dir.join("comparison.csv"), std::slice::from_ref(&table))?;
    if let Some(name) = param.figure_file() {
        sweep::write_table_figure(&dir.join(name), &table)?;
    }
    if param == SweepParam::Rate {
        sweep::write_delay_figure(&dir.join("fig_delay.csv"), &table)?;
    }
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{:>10} {:>12} {:>8} {:>12} {:>8} {:>10} {:>10}",
        param.name(), "gram_mean", "gram_max", "ndn_mean", "ndn_max", "gram_ms", "ndn_ms")?;
    for r in &table.rows {
        let ms = |d: Option<f64>| d.map_or_else(|| "n/a".to_string(), |d| format!("{d:.2}"));
        writeln!(stdout, "{:>10} {:>12.3} {:>8} {:>12.3} {:>8} {:>10} {:>10}",
            r.value, r.gram_mean_table, r.gram_max_table, r.ndn_mean_table, r.ndn_max_table,
            ms(r.gram_delay_ms), ms(r.ndn_delay_ms))?;
    }
    let violations = table.violations(&spec.base);
    for v in &violations {
        eprintln!("violation: {v}");
    }
    Ok(violations.is_empty())
}

fn cmd_oracle(m: &ArgMatches) -> Result<bool> {
    let bless = m.get_one::<String>("bless").map(PathBuf::from);
    if let Some(dir) = &bless {
        fs::create_dir_all(dir)?;
        fs::write(
            dir.join("chain5.topo"),
            topology_io::write_topology(&oracle::chain_topology()),
        )?;
    }
    let mut ok = true;
    for variant in oracle::Variant::ALL {
        let run = oracle::run(variant)?;
        let problems = match &bless {
            Some(dir) => {
                fs::write(dir.join(format!("{}.trace", variant.name())), &run.trace)?;
                oracle::check_behavior(variant, &run)
            }
            None => oracle::check(variant, &run),
        };
        println!("{}: {}", variant.name(), if problems.is_empty() { "ok" } else { "FAILED" });
        for p in &problems {
            println!("  {p}");
        }
        ok &= problems.is_empty();
    }
    Ok(ok)
}

fn cmd_topology(m: &ArgMatches) -> Result<bool> {
    let cfg = load_config(m)?;
    let scenario = Scenario::generate(&cfg)?;
    let text = topology_io::write_topology(&scenario.topology);
    match m.get_one::<String>("out") {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {path}"))?,
        None => print!("{text}"),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let result = match matches.subcommand() {
        Some(("run", m)) => cmd_run(m),
        Some(("sweep", m)) => cmd_sweep(m),
        Some(("oracle", m)) => cmd_oracle(m),
        Some(("topology", m)) => cmd_topology(m),
        _ => bail_unknown(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn bail_unknown() -> Result<bool> {
    bail!("unknown subcommand")
}
