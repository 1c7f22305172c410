use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use refvw::expr::Bindings;
use refvw::lambdaring::{eagon_northcott_check, MAX_RANK};
use refvw::scenario::{Registry, Report, RunResult};

/// Exact refined Vafa-Witten computations from declarative scenario files.
#[derive(Parser, Debug)]
#[command(name = "refvw", version)]
struct Cli {
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Print only verdicts.
    #[arg(long, global = true, conflicts_with = "json")]
    quiet: bool,
    /// Extra directory of scenario files; entries replace built-ins of the same name.
    #[arg(long, global = true, value_name = "DIR")]
    scenario_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one scenario.
    Run {
        name: String,
        /// Integer binding, e.g. `--bind P2=3`.
        #[arg(long = "bind", value_name = "K=V", value_parser = parse_binding)]
        bind: Vec<(String, i64)>,
    },
    /// Evaluate a series scenario to the given q-order.
    Series {
        name: String,
        #[arg(long)]
        order: i64,
        #[arg(long = "bind", value_name = "K=V", value_parser = parse_binding)]
        bind: Vec<(String, i64)>,
    },
    /// Run every scenario over all of its cases.
    Check {
        /// Only scenarios whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Check the degeneracy-locus identity for given ranks, or for all ranks up to 5.
    Identities {
        #[arg(long, requires = "r1")]
        r0: Option<usize>,
        #[arg(long, requires = "r0")]
        r1: Option<usize>,
    },
    /// List the registered scenarios.
    List,
}

fn parse_binding(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected K=V, got `{s}`"))?;
    let v = v.trim().parse::<i64>().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn fmt_bindings(b: &Bindings) -> String {
    b.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn print_run(cli: &Cli, res: &RunResult) -> Result<()> {
    if cli.json {
        println!("{}", serde_json::to_string_pretty(res)?);
        return Ok(());
    }
    if cli.quiet {
        println!("{} {} {}", verdict(res.passed()), res.scenario, fmt_bindings(&res.bindings));
        return Ok(());
    }
    println!("scenario: {} ({})", res.scenario, res.label);
    println!("bindings: {}", fmt_bindings(&res.bindings));
    if res.coefficients.is_empty() {
        println!("result:   {}", res.result_canonical);
    } else {
        println!("coefficients:");
        for row in &res.coefficients {
            println!("  q^{}: {}", row.q_exp, row.coeff);
        }
    }
    if let Some(v) = &res.t1_value {
        println!("t=1:      {v}");
    }
    for (k, v) in &res.values {
        println!("{k}: {v}");
    }
    if let Some(s) = res.symmetric {
        println!("symmetric: {s}");
    }
    if let Some(g) = res.golden_match {
        println!("golden:   {}", if g { "match" } else { "MISMATCH" });
    }
    if res.conjectural {
        println!("note:     conjectural outside the proven cases");
    }
    for c in &res.checks {
        if c.detail.is_empty() {
            println!("  {} {}", verdict(c.passed), c.name);
        } else {
            println!("  {} {}: {}", verdict(c.passed), c.name, c.detail);
        }
    }
    Ok(())
}

fn print_report(cli: &Cli, report: &Report) -> Result<()> {
    if cli.json {
        println!("{}", serde_json::to_string_pretty(report)?);
        return Ok(());
    }
    let failures = report.failures().count();
    if !cli.quiet {
        for e in &report.entries {
            let b = fmt_bindings(&e.bindings);
            let b = if b.is_empty() { String::new() } else { format!(" [{b}]") };
            let d = if e.detail.is_empty() { String::new() } else { format!(": {}", e.detail) };
            println!("{} {}{} {} ({}){}", verdict(e.passed), e.scenario, b, e.check, e.label, d);
        }
    }
    println!("{}: {} checks, {} failed", verdict(failures == 0), report.entries.len(), failures);
    Ok(())
}

fn registry(cli: &Cli) -> Result<Registry> {
    let mut reg = Registry::builtin();
    if let Some(dir) = &cli.scenario_dir {
        reg.load_dir(dir).with_context(|| format!("loading {}", dir.display()))?;
    }
    Ok(reg)
}

fn real_main(cli: &Cli) -> Result<bool> {
    let reg = registry(cli)?;
    match &cli.command {
        Command::Run { name, bind } => {
            let res = reg.run(name, &bind.iter().cloned().collect())?;
            print_run(cli, &res)?;
            Ok(res.passed())
        }
        Command::Series { name, order, bind } => {
            let res = reg.series(name, *order, &bind.iter().cloned().collect())?;
            print_run(cli, &res)?;
            Ok(res.passed())
        }
        Command::Check { filter } => {
            let report = reg.check_all(filter.as_deref());
            if report.entries.is_empty() {
                bail!("no scenario matches the filter");
            }
            print_report(cli, &report)?;
            Ok(report.passed())
        }
        Command::Identities { r0, r1 } => {
            let pairs: Vec<(usize, usize)> = match (r0, r1) {
                (Some(a), Some(b)) => vec![(*a, *b)],
                _ => (1..=MAX_RANK.min(5)).flat_map(|b| (1..=b).map(move |a| (a, b))).collect(),
            };
            let mut reports = Vec::new();
            for (a, b) in pairs {
                let rep = eagon_northcott_check(a, b).map_err(|e| anyhow!("r0={a} r1={b}: {e}"))?;
                reports.push(rep);
            }
            let all = reports.iter().all(|r| r.passed());
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&reports)?);
            } else {
                for r in &reports {
                    if !cli.quiet {
                        println!(
                            "{} r0={} r1={}: lhs=rhs {}, steps agree {}, symmetric {}",
                            verdict(r.passed()),
                            r.r0,
                            r.r1,
                            r.lhs_eq_rhs,
                            r.steps_agree,
                            r.symmetric
                        );
                    }
                }
                println!("{}: {} identities", verdict(all), reports.len());
            }
            Ok(all)
        }
        Command::List => {
            for sc in reg.scenarios() {
                if cli.quiet {
                    println!("{}", sc.name);
                } else {
                    println!("{:<22} {:<9} {}", sc.name, format!("{:?}", sc.kind).to_lowercase(), sc.label);
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
