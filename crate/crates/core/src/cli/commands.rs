use std::f64::consts::TAU;
use std::path::Path;

use log::info;
use serde::Serialize;
use serde_json::json;

use super::output::{parse_json, read_input, RunContext};
use super::{parse_grid, Cli, CliError, Command, ExitCode, Outcome};
use crate::error::Error;
use crate::linalg::check_simpson_nodes;
use crate::ltv::{
    output_gramian, scan_with, transition_at_offsets, GramianReport, LtvSystem, MatrixFn,
    DEFAULT_DT, MU_TOL,
};
use crate::observability::{
    build_chain, build_counterexample, counterexample_report, nodes_for_window,
    CounterexampleEntry,
};
use crate::observer::{
    convergence_metrics, run_observer, write_trace_csv, ConvergenceSummary, ObserverConfigFile,
};
use crate::range::{build_lifted_system, build_m, default_grid, pe_check, Scenario, ScenarioFile};

pub const BUILTIN_COUNTEREXAMPLE: &str = "builtin:counterexample";

/// Counterexample thresholds: Gramian must vanish, output energy must not.
const GRAMIAN_NULL_TOL: f64 = 1e-8;
const ENERGY_FLOOR: f64 = 1e-3;
/// Samples in the witness output CSV.
const WITNESS_SAMPLES: usize = 1001;
/// Window starts used when no `--grid` is given.
const DEFAULT_GRID_COUNT: usize = 10;

fn lib_error(e: Error) -> CliError {
    let code = match &e {
        Error::Config(_) | Error::Dimension { .. } => ExitCode::Parse,
        Error::InvalidArgument(_) | Error::Smoothness { .. } => ExitCode::Usage,
        Error::CovarianceCollapse { .. } | Error::Divergence { .. } => ExitCode::AnalyticFailure,
        _ => ExitCode::NumericFailure,
    };
    CliError::new(code, e.to_string())
}

fn csv_row(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
    cells.join(",")
}

fn check_nodes(nodes: usize) -> Result<(), CliError> {
    check_simpson_nodes(nodes).map_err(|e| CliError::usage(e.to_string()))
}

fn check_delta(delta: f64) -> Result<(), CliError> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(CliError::usage(format!("--delta must be > 0, got {delta}")))
    }
}

/// At most one `--delta` for subcommands that take a single window.
fn single_delta(cli: &Cli) -> Result<Option<f64>, CliError> {
    match cli.delta.as_slice() {
        [] => Ok(None),
        [d] => check_delta(*d).map(|_| Some(*d)),
        _ => Err(CliError::usage(format!(
            "{} takes a single --delta",
            cli.command.name()
        ))),
    }
}

fn require_config(cli: &Cli) -> Result<&str, CliError> {
    cli.config
        .as_deref()
        .ok_or_else(|| CliError::usage(format!("{} requires --config PATH", cli.command.name())))
}

/// Read and validate a scenario; returns it with the input digest.
fn load_scenario(path: &Path, delta: Option<f64>) -> Result<(Scenario, String), CliError> {
    let input = read_input(path)?;
    let mut file: ScenarioFile = parse_json(&input)?;
    if let Some(d) = delta {
        file.delta = d;
    }
    let sc = Scenario::try_from(file).map_err(|e| {
        CliError::new(ExitCode::Parse, format!("{}: {e}", path.display()))
    })?;
    Ok((sc, input.sha256))
}

fn grid_for(cli: &Cli, sc: &Scenario) -> Result<Vec<f64>, CliError> {
    match &cli.grid {
        Some(spec) => parse_grid(spec),
        None => Ok(default_grid(sc, DEFAULT_GRID_COUNT)),
    }
}

/// Run `body` with the output directory open and always leave a manifest.
fn with_run<F>(cli: &Cli, ctx: RunContext, config: serde_json::Value, body: F) -> Result<Outcome, CliError>
where
    F: FnOnce(&RunContext) -> Result<Outcome, CliError>,
{
    let result = body(&ctx);
    let code = match &result {
        Ok(o) => o.code,
        Err(e) => e.code,
    };
    ctx.finish(config, code)?;
    info!("{} finished with exit code {}", cli.command.name(), code.code());
    result
}

#[derive(Serialize)]
struct CounterexampleOutput<'a> {
    gramian_null_tol: f64,
    energy_floor: f64,
    witness: [f64; 2],
    entries: &'a [CounterexampleEntry],
    reproduced: bool,
}

pub fn counterexample(cli: &Cli) -> Result<Outcome, CliError> {
    let deltas = if cli.delta.is_empty() {
        vec![1.0, TAU, 10.0]
    } else {
        cli.delta.clone()
    };
    for &d in &deltas {
        check_delta(d)?;
    }
    let ctx = RunContext::open(Command::Counterexample, &cli.out)?;
    let config = json!({ "deltas": deltas, "witness_samples": WITNESS_SAMPLES });
    with_run(cli, ctx, config, |ctx| {
        let entries = counterexample_report(&deltas).map_err(lib_error)?;
        let reproduced = entries
            .iter()
            .all(|e| e.gramian_min_eig <= GRAMIAN_NULL_TOL && e.m_integral_min_eig >= ENERGY_FLOOR);
        let witness = crate::observability::witness();
        ctx.write_json(
            "counterexample_report.json",
            &CounterexampleOutput {
                gramian_null_tol: GRAMIAN_NULL_TOL,
                energy_floor: ENERGY_FLOOR,
                witness: [witness[0], witness[1]],
                entries: &entries,
                reproduced,
            },
        )?;

        let sys = build_counterexample();
        let span = deltas.iter().copied().fold(0.0, f64::max);
        let offsets: Vec<f64> = (0..WITNESS_SAMPLES)
            .map(|k| span * k as f64 / (WITNESS_SAMPLES - 1) as f64)
            .collect();
        let phis = transition_at_offsets(&sys, 0.0, &offsets, DEFAULT_DT).map_err(lib_error)?;
        let mut csv = String::from("s,y1,y2\n");
        for (s, phi) in offsets.iter().zip(&phis) {
            let y = sys.c().eval(*s).map_err(lib_error)? * phi * &witness;
            csv.push_str(&csv_row(&[*s, y[0], y[1]]));
            csv.push('\n');
        }
        ctx.write_text("counterexample_witness.csv", &csv)?;

        let mut summary = String::new();
        for e in &entries {
            summary.push_str(&format!(
                "delta={:.6} gramian_min_eig={:.3e} m_integral_min_eig={:.6}\n",
                e.delta, e.gramian_min_eig, e.m_integral_min_eig
            ));
        }
        summary.push_str(if reproduced { "reproduced" } else { "not reproduced" });
        Ok(Outcome {
            code: if reproduced {
                ExitCode::Success
            } else {
                ExitCode::AnalyticFailure
            },
            summary,
        })
    })
}

pub fn pe_check_cmd(cli: &Cli) -> Result<Outcome, CliError> {
    let path = require_config(cli)?;
    let delta = single_delta(cli)?;
    let (sc, digest) = load_scenario(Path::new(path), delta)?;
    let grid = grid_for(cli, &sc)?;
    let mut ctx = RunContext::open(Command::PeCheck, &cli.out)?;
    ctx.input_sha256 = Some(digest);
    let config = json!({ "scenario": sc.to_file(), "grid": grid });
    with_run(cli, ctx, config, |ctx| {
        let report = pe_check(&sc, &grid).map_err(lib_error)?;
        ctx.write_json("pe_report.json", &report)?;
        Ok(Outcome {
            code: if report.pass {
                ExitCode::Success
            } else {
                ExitCode::AnalyticFailure
            },
            summary: format!(
                "mu={:.6e} pass={} windows={}",
                report.mu,
                report.pass,
                report.windows.len()
            ),
        })
    })
}

#[derive(Serialize)]
struct GramianOutput<'a> {
    target: &'a str,
    output_map: &'static str,
    observable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    chain_provenance: Option<Vec<String>>,
    report: &'a GramianReport,
}

pub fn gramian_cmd(cli: &Cli) -> Result<Outcome, CliError> {
    let target = require_config(cli)?;
    let delta = single_delta(cli)?;
    check_nodes(cli.nodes)?;
    if !cli.t.is_finite() {
        return Err(CliError::usage("--t must be finite"));
    }

    let mut digest = None;
    let mut provenance = None;
    let (sys, output, delta, resolved): (LtvSystem, MatrixFn, f64, serde_json::Value) =
        if target == BUILTIN_COUNTEREXAMPLE {
            let sys = build_counterexample();
            let output = if cli.use_m {
                let chain = build_chain(&sys, 1, false).map_err(lib_error)?;
                provenance = Some(
                    chain
                        .provenance()
                        .iter()
                        .map(|p| format!("{p:?}"))
                        .collect(),
                );
                chain.stack_all().map_err(lib_error)?
            } else {
                sys.c().clone()
            };
            (sys, output, delta.unwrap_or(TAU), json!(BUILTIN_COUNTEREXAMPLE))
        } else {
            let (sc, d) = load_scenario(Path::new(target), delta)?;
            digest = Some(d);
            let sys = build_lifted_system(&sc);
            let output = if cli.use_m {
                build_m(&sc)
            } else {
                sys.c().clone()
            };
            let delta = sc.delta;
            (sys, output, delta, serde_json::to_value(sc.to_file()).unwrap_or_default())
        };

    let mut ctx = RunContext::open(Command::Gramian, &cli.out)?;
    ctx.input_sha256 = digest;
    let config = json!({
        "target": resolved,
        "t": cli.t,
        "delta": delta,
        "nodes": cli.nodes,
        "use_m": cli.use_m,
    });
    with_run(cli, ctx, config, |ctx| {
        let report =
            output_gramian(&sys, &output, cli.t, delta, cli.nodes, DEFAULT_DT).map_err(lib_error)?;
        let observable = report.min_eigenvalue() >= MU_TOL;
        ctx.write_json(
            "gramian_report.json",
            &GramianOutput {
                target,
                output_map: if cli.use_m { "M" } else { "C" },
                observable,
                chain_provenance: provenance,
                report: &report,
            },
        )?;
        Ok(Outcome {
            code: ExitCode::Success,
            summary: format!(
                "min_eig={:.6e} max_eig={:.6e} observable={observable}",
                report.min_eigenvalue(),
                report.max_eigenvalue()
            ),
        })
    })
}

#[derive(Serialize)]
struct SimulateSummary {
    seed: u64,
    completed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metrics: Option<ConvergenceSummary>,
    gramian_scan_min: f64,
    unobservable_suspected: bool,
}

pub fn simulate(cli: &Cli) -> Result<Outcome, CliError> {
    let path = require_config(cli)?;
    let delta = single_delta(cli)?;
    let (sc, digest) = load_scenario(Path::new(path), delta)?;
    let (obs_file, obs_digest) = match &cli.observer {
        Some(p) => {
            let input = read_input(p)?;
            (parse_json::<ObserverConfigFile>(&input)?, Some(input.sha256))
        }
        None => (ObserverConfigFile::default(), None),
    };
    let cfg = obs_file.resolve(&sc).map_err(|e| match e {
        Error::Config(_) | Error::Dimension { .. } | Error::InvalidArgument(_) => {
            CliError::new(ExitCode::Parse, format!("observer config: {e}"))
        }
        other => lib_error(other),
    })?;
    let grid = grid_for(cli, &sc)?;

    let mut ctx = RunContext::open(Command::Simulate, &cli.out)?;
    ctx.input_sha256 = Some(digest);
    ctx.observer_config_sha256 = obs_digest;
    let config = json!({
        "scenario": sc.to_file(),
        "observer": obs_file,
        "seed": cli.seed,
        "scan_grid": grid,
    });
    with_run(cli, ctx, config, |ctx| {
        let sys = build_lifted_system(&sc);
        let scan = scan_with(&sys, sys.c(), &grid, sc.delta, nodes_for_window(sc.delta), cli.jobs)
            .map_err(lib_error)?;
        let gramian_scan_min = scan
            .iter()
            .map(|p| p.min_eigenvalue)
            .fold(f64::INFINITY, f64::min);
        let unobservable_suspected = gramian_scan_min <= MU_TOL;

        let (summary, code) = match run_observer(&sc, &cfg, cli.seed) {
            Ok(trace) => {
                let mut csv = Vec::new();
                write_trace_csv(&trace, &mut csv)
                    .map_err(|e| CliError::new(ExitCode::NumericFailure, e.to_string()))?;
                let csv = String::from_utf8(csv)
                    .map_err(|e| CliError::new(ExitCode::NumericFailure, e.to_string()))?;
                ctx.write_text("trace.csv", &csv)?;
                let metrics = convergence_metrics(&trace).map_err(lib_error)?;
                (
                    SimulateSummary {
                        seed: cli.seed,
                        completed: true,
                        failure: None,
                        metrics: Some(metrics),
                        gramian_scan_min,
                        unobservable_suspected,
                    },
                    ExitCode::Success,
                )
            }
            Err(e @ (Error::CovarianceCollapse { .. } | Error::Divergence { .. })) => (
                SimulateSummary {
                    seed: cli.seed,
                    completed: false,
                    failure: Some(e.to_string()),
                    metrics: None,
                    gramian_scan_min,
                    unobservable_suspected,
                },
                ExitCode::AnalyticFailure,
            ),
            Err(e) => return Err(lib_error(e)),
        };
        ctx.write_json("summary.json", &summary)?;
        let text = match &summary.metrics {
            Some(m) => format!(
                "final_pos_err={:.3e} final_bias_err={:.3e} decay_rate={:.4} unobservable_suspected={}",
                m.final_pos_err, m.final_bias_err, m.decay_rate, unobservable_suspected
            ),
            None => format!(
                "observer stopped: {}",
                summary.failure.as_deref().unwrap_or("unknown")
            ),
        };
        Ok(Outcome { code, summary: text })
    })
}
