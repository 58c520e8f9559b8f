//! Command-line front end: condition verification, stability scans, single
//! solves, and convergence sweeps with CSV/JSON/SVG artifacts.
//!
//! Exit codes: 0 success, 1 verification failure, 2 solver or I/O failure,
//! 3 usage error.  All artifacts are deterministic; reruns of the same
//! invocation produce byte-identical files.  `PEEROC_THREADS` caps sweep
//! parallelism without affecting output bytes.

mod plot;

use clap::{Parser, Subcommand};
use peeroc_core::convergence::{
    convergence_table, default_guess, reference_source, ConvergenceTable, ReferenceSource,
};
use peeroc_core::kkt::{solve_kkt, GuessMode, KktError, NewtonOptions};
use peeroc_core::problems::{problem_by_name, BvpProblem};
use peeroc_core::stability::boundary_locus;
use peeroc_core::triplets::{builtin_names, load_triplet, PeerTriplet};
use peeroc_core::verify_triplet;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "peeroc",
    version,
    about = "Implicit two-step peer triplets for ODE-constrained optimal control"
)]
struct Cli {
    /// Directory receiving all artifact files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Table artifact format: csv or json.
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    /// Condition gate (verify) or Newton tolerance (solve, converge).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the condition checklist and indicator tables for triplets.
    Verify {
        /// Triplet name, comma list, or "all".
        #[arg(long, default_value = "all")]
        method: String,
    },
    /// Print stability indicators; optionally dump the boundary locus.
    Stability {
        #[arg(long)]
        method: String,
        /// Locus sweep resolution.
        #[arg(long, default_value_t = 3600)]
        samples: usize,
        /// Write the sweep as CSV (theta, re_z, im_z) to this file.
        #[arg(long)]
        locus: Option<PathBuf>,
    },
    /// Solve one coupled system and dump all stage values.
    Solve {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        method: String,
        /// Step count N+1.
        #[arg(long)]
        steps: usize,
        /// Initial iterate: auto, constant, sweep, or transfer.
        #[arg(long, default_value = "auto")]
        guess: String,
    },
    /// Error sweep over doubling step counts; writes tables and a plot.
    Converge {
        #[arg(long)]
        problem: String,
        /// Triplet name, comma list, or "all".
        #[arg(long, default_value = "all")]
        methods: String,
        /// Doubling sequence of step counts N+1.
        #[arg(long, default_value = "20,40,80,160,320", value_delimiter = ',')]
        steps: Vec<usize>,
        /// Oracle resolution for problems without a closed-form solution.
        #[arg(long, default_value_t = 1280)]
        oracle_steps: usize,
    },
}

enum CliError {
    Usage(String),
    Runtime(String),
    Verification,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 3,
            CliError::Runtime(_) => 2,
            CliError::Verification => 1,
        }
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Runtime(format!("i/o failure: {e}"))
}

/// Replayable record of one invocation.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    replay: Vec<String>,
    methods: Vec<String>,
    problem: Option<String>,
    step_counts: Vec<usize>,
    tolerance: f64,
    determinism: &'static str,
    outputs: Vec<String>,
}

const DETERMINISM_NOTE: &str =
    "seed-free; replaying this manifest reproduces every artifact byte for byte";

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful exits, anything else is usage.
            use clap::error::ErrorKind::*;
            let _ = e.print();
            return match e.kind() {
                DisplayHelp | DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("usage error: {msg}"),
                CliError::Runtime(msg) => eprintln!("error: {msg}"),
                CliError::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.format != "csv" && cli.format != "json" {
        return Err(CliError::Usage(format!(
            "unknown format {:?}; expected csv or json",
            cli.format
        )));
    }
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(CliError::Usage("tolerance must be positive".into()));
        }
    }
    fs::create_dir_all(&cli.out_dir).map_err(io_err)?;
    match &cli.cmd {
        Cmd::Verify { method } => cmd_verify(&cli, method),
        Cmd::Stability { method, samples, locus } => {
            cmd_stability(&cli, method, *samples, locus.as_deref())
        }
        Cmd::Solve { problem, method, steps, guess } => {
            cmd_solve(&cli, problem, method, *steps, guess)
        }
        Cmd::Converge { problem, methods, steps, oracle_steps } => {
            cmd_converge(&cli, problem, methods, steps, *oracle_steps)
        }
    }
}

fn resolve_methods(selector: &str) -> Result<Vec<String>, CliError> {
    let known = builtin_names();
    if selector == "all" {
        return Ok(known.iter().map(|s| s.to_string()).collect());
    }
    let mut out = Vec::new();
    for name in selector.split(',') {
        let name = name.trim();
        if !known.contains(&name) {
            return Err(CliError::Usage(format!(
                "unknown method {name:?}; known: {}",
                known.join(", ")
            )));
        }
        out.push(name.to_string());
    }
    Ok(out)
}

fn resolve_problem(name: &str) -> Result<BvpProblem, CliError> {
    problem_by_name(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown problem {name:?}; known: rayleigh, motion, wave"
        ))
    })
}

fn thread_cap() -> usize {
    std::env::var("PEEROC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .map(|v| v.max(1))
        .unwrap_or(1)
}

fn write_artifact(cli: &Cli, name: &str, content: &str) -> Result<String, CliError> {
    let path = cli.out_dir.join(name);
    fs::write(&path, content).map_err(io_err)?;
    Ok(name.to_string())
}

fn write_manifest(cli: &Cli, manifest: &RunManifest) -> Result<(), CliError> {
    let body = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Runtime(format!("manifest serialization: {e}")))?;
    write_artifact(cli, &format!("manifest_{}.json", manifest.command), &(body + "\n"))?;
    Ok(())
}

// ---- verify ---------------------------------------------------------------

#[derive(Serialize)]
struct IndicatorRow {
    method: String,
    alpha_deg: f64,
    lambda2: f64,
    inf_norm: f64,
    err_s: f64,
    a_stable: bool,
    mu0: f64,
    rho_start: f64,
    mu_end: f64,
    rho_end: f64,
    rho_mixed: f64,
    conditions_pass: bool,
}

#[derive(Serialize)]
struct ConditionRow {
    method: String,
    id: &'static str,
    max_abs: f64,
    tol: f64,
    exact: bool,
    gating: bool,
    pass: bool,
}

fn cmd_verify(cli: &Cli, selector: &str) -> Result<(), CliError> {
    let methods = resolve_methods(selector)?;
    let mut indicator_rows = Vec::new();
    let mut condition_rows = Vec::new();
    let mut all_pass = true;
    for name in &methods {
        let trip = load_triplet(name).map_err(|e| CliError::Runtime(e.to_string()))?;
        let tol = cli
            .tol
            .unwrap_or_else(|| peeroc_core::analysis::recommended_tolerance(&trip));
        let report = verify_triplet(&trip, tol).map_err(|e| CliError::Runtime(e.to_string()))?;
        for c in &report.conditions {
            condition_rows.push(ConditionRow {
                method: name.clone(),
                id: c.id,
                max_abs: c.max_abs,
                tol: c.tol,
                exact: c.exact,
                gating: c.gating,
                pass: c.pass,
            });
        }
        let st = &report.stability;
        println!(
            "{name}: alpha = {:.2} deg, |lambda2| = {:.4}, norm = {:.4}, err_{} = {:.6e}, {}",
            st.alpha_deg,
            st.lambda2,
            st.inf_norm,
            trip.s,
            report.err_s,
            if report.pass { "conditions ok" } else { "CONDITIONS FAILED" }
        );
        println!(
            "{name}: mu0 = {:.4}, rho(B A0^-1) = {:.4}, muN = {:.4}, rho(AN^-1 BN) = {:.4}, rho(BN A^-1) = {:.4}",
            st.mu0, st.rho_start, st.mu_end, st.rho_end, st.rho_mixed
        );
        all_pass &= report.pass;
        indicator_rows.push(IndicatorRow {
            method: name.clone(),
            alpha_deg: st.alpha_deg,
            lambda2: st.lambda2,
            inf_norm: st.inf_norm,
            err_s: report.err_s,
            a_stable: st.a_stable,
            mu0: st.mu0,
            rho_start: st.rho_start,
            mu_end: st.mu_end,
            rho_end: st.rho_end,
            rho_mixed: st.rho_mixed,
            conditions_pass: report.pass,
        });
    }

    let mut outputs = Vec::new();
    if cli.format == "json" {
        outputs.push(write_artifact(
            cli,
            "verify_indicators.json",
            &to_json(&indicator_rows)?,
        )?);
        outputs.push(write_artifact(
            cli,
            "verify_conditions.json",
            &to_json(&condition_rows)?,
        )?);
    } else {
        let mut csv = String::from(
            "method,alpha_deg,lambda2,inf_norm,err_s,a_stable,mu0,rho_start,mu_end,rho_end,rho_mixed,conditions_pass\n",
        );
        for r in &indicator_rows {
            let _ = writeln!(
                csv,
                "{},{:.6},{:.6},{:.6},{:.17e},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                r.method,
                r.alpha_deg,
                r.lambda2,
                r.inf_norm,
                r.err_s,
                r.a_stable,
                r.mu0,
                r.rho_start,
                r.mu_end,
                r.rho_end,
                r.rho_mixed,
                r.conditions_pass
            );
        }
        outputs.push(write_artifact(cli, "verify_indicators.csv", &csv)?);
        let mut csv = String::from("method,condition,max_abs,tol,exact,gating,pass\n");
        for r in &condition_rows {
            let _ = writeln!(
                csv,
                "{},{},{:.17e},{:.3e},{},{},{}",
                r.method, r.id, r.max_abs, r.tol, r.exact, r.gating, r.pass
            );
        }
        outputs.push(write_artifact(cli, "verify_conditions.csv", &csv)?);
    }
    write_manifest(
        cli,
        &RunManifest {
            command: "verify".into(),
            replay: replay_args(cli, &["verify", "--method", selector]),
            methods,
            problem: None,
            step_counts: vec![],
            tolerance: cli.tol.unwrap_or(0.0),
            determinism: DETERMINISM_NOTE,
            outputs,
        },
    )?;
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Verification)
    }
}

fn to_json<T: Serialize>(rows: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(rows)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Runtime(format!("serialization: {e}")))
}

fn replay_args(cli: &Cli, head: &[&str]) -> Vec<String> {
    let mut out: Vec<String> = head.iter().map(|s| s.to_string()).collect();
    out.push("--out-dir".into());
    out.push(cli.out_dir.display().to_string());
    out.push("--format".into());
    out.push(cli.format.clone());
    if let Some(t) = cli.tol {
        out.push("--tol".into());
        out.push(format!("{t:e}"));
    }
    out
}

// ---- stability ------------------------------------------------------------

fn cmd_stability(
    cli: &Cli,
    method: &str,
    samples: usize,
    locus: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let names = resolve_methods(method)?;
    if names.len() != 1 {
        return Err(CliError::Usage("stability takes exactly one method".into()));
    }
    if samples < 8 {
        return Err(CliError::Usage("need at least 8 locus samples".into()));
    }
    let trip = load_triplet(&names[0]).map_err(|e| CliError::Runtime(e.to_string()))?;
    let report = peeroc_core::stability::stability_report(&trip, samples)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("method = {}", trip.name);
    println!("alpha = {:.2}", report.alpha_deg);
    println!("lambda2 = {:.4}", report.lambda2);
    println!("norm = {:.4}", report.inf_norm);
    println!("mu0 = {:.4}", report.mu0);
    println!("muN = {:.4}", report.mu_end);
    println!("a_stable = {}", report.a_stable);

    let mut outputs = Vec::new();
    if let Some(path) = locus {
        let st = &trip.coeffs.standard;
        let sweep = boundary_locus(&st.a, &st.b, &st.k, samples)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let mut csv = String::from("theta,re_z,im_z\n");
        for sample in &sweep {
            for z in &sample.z {
                let _ = writeln!(csv, "{:.17e},{:.17e},{:.17e}", sample.theta, z.re, z.im);
            }
        }
        let full = if path.is_absolute() {
            path.to_path_buf()
        } else {
            cli.out_dir.join(path)
        };
        fs::write(&full, csv).map_err(io_err)?;
        outputs.push(path.display().to_string());
    }
    write_manifest(
        cli,
        &RunManifest {
            command: "stability".into(),
            replay: replay_args(cli, &["stability", "--method", &names[0]]),
            methods: names,
            problem: None,
            step_counts: vec![samples],
            tolerance: cli.tol.unwrap_or(0.0),
            determinism: DETERMINISM_NOTE,
            outputs,
        },
    )
}

// ---- solve ----------------------------------------------------------------

fn parse_guess(label: &str, prob: &BvpProblem) -> Result<GuessMode, CliError> {
    match label {
        "auto" => Ok(default_guess(prob)),
        "constant" => Ok(GuessMode::Constant),
        "sweep" => Ok(GuessMode::Sweep),
        "transfer" => Ok(GuessMode::Transfer),
        other => Err(CliError::Usage(format!(
            "unknown guess {other:?}; expected auto, constant, sweep, or transfer"
        ))),
    }
}

fn cmd_solve(
    cli: &Cli,
    problem: &str,
    method: &str,
    steps: usize,
    guess: &str,
) -> Result<(), CliError> {
    if steps < 2 {
        return Err(CliError::Usage("need at least 2 steps".into()));
    }
    let prob = resolve_problem(problem)?;
    let names = resolve_methods(method)?;
    if names.len() != 1 {
        return Err(CliError::Usage("solve takes exactly one method".into()));
    }
    let trip = load_triplet(&names[0]).map_err(|e| CliError::Runtime(e.to_string()))?;
    let opts = NewtonOptions {
        tolerance: cli.tol.unwrap_or(1e-10),
        guess: parse_guess(guess, &prob)?,
        ..NewtonOptions::default()
    };
    let sol = solve_kkt(&trip, &prob, steps - 1, &opts).map_err(|e| match e {
        KktError::Stalled { solution } => CliError::Runtime(format!(
            "solver stalled after {} iterations, residual {:.3e}",
            solution.iterations, solution.residual_norm
        )),
        other => CliError::Runtime(other.to_string()),
    })?;

    println!(
        "{} on {} with N+1 = {}: {} iterations, residual {:.3e}",
        trip.name, prob.name, steps, sol.iterations, sol.residual_norm
    );
    println!("y(T) = {:?}", sol.y_end);
    println!("p(0) = {:?}", sol.p_start);

    let file = format!("solve_{}_{}_{}", prob.name, trip.name, steps);
    let mut outputs = Vec::new();
    if cli.format == "json" {
        let body = serde_json::json!({
            "method": sol.method,
            "problem": sol.problem,
            "n_steps": sol.n_steps,
            "h": sol.h,
            "nodes": sol.nodes,
            "iterations": sol.iterations,
            "residual_norm": sol.residual_norm,
            "y_end": sol.y_end,
            "p_start": sol.p_start,
            "p_end": sol.p_end,
            "stage_y": sol.stage_y,
            "stage_p": sol.stage_p,
        });
        outputs.push(write_artifact(
            cli,
            &format!("{file}.json"),
            &(serde_json::to_string_pretty(&body)
                .map_err(|e| CliError::Runtime(e.to_string()))?
                + "\n"),
        )?);
    } else {
        let mut buf = Vec::new();
        sol.dump_csv(&mut buf).map_err(io_err)?;
        outputs.push(write_artifact(
            cli,
            &format!("{file}.csv"),
            &String::from_utf8(buf).expect("csv is utf-8"),
        )?);
    }
    write_manifest(
        cli,
        &RunManifest {
            command: "solve".into(),
            replay: replay_args(
                cli,
                &[
                    "solve",
                    "--problem",
                    problem,
                    "--method",
                    &names[0],
                    "--steps",
                    &steps.to_string(),
                    "--guess",
                    guess,
                ],
            ),
            methods: names,
            problem: Some(prob.name.to_string()),
            step_counts: vec![steps],
            tolerance: opts.tolerance,
            determinism: DETERMINISM_NOTE,
            outputs,
        },
    )
}

// ---- converge -------------------------------------------------------------

fn validate_steps(steps: &[usize]) -> Result<(), CliError> {
    if steps.is_empty() {
        return Err(CliError::Usage("need at least one step count".into()));
    }
    if steps.iter().any(|&n| n < 4) {
        return Err(CliError::Usage("step counts must be at least 4".into()));
    }
    if !steps.windows(2).all(|w| w[1] == 2 * w[0]) {
        return Err(CliError::Usage(format!(
            "step counts must double: {steps:?}"
        )));
    }
    Ok(())
}

fn cmd_converge(
    cli: &Cli,
    problem: &str,
    selector: &str,
    steps: &[usize],
    oracle_steps: usize,
) -> Result<(), CliError> {
    validate_steps(steps)?;
    let prob = resolve_problem(problem)?;
    let methods = resolve_methods(selector)?;
    if !prob.has_exact() && oracle_steps < 64 {
        return Err(CliError::Usage("oracle needs at least 64 steps".into()));
    }
    let source = reference_source(&prob, oracle_steps)
        .map_err(|e| CliError::Runtime(format!("reference failed: {e}")))?;
    let opts = NewtonOptions {
        tolerance: cli.tol.unwrap_or(1e-10),
        guess: default_guess(&prob),
        ..NewtonOptions::default()
    };

    let tables = sweep_tables(&methods, &prob, steps, &opts, &source)?;

    let mut outputs = Vec::new();
    for table in &tables {
        println!(
            "{} on {}: errors {}",
            table.method,
            table.problem,
            table
                .cells
                .iter()
                .map(|c| format!("{}:{:.3e}/{:.3e}", c.n_steps, c.state_error, c.adjoint_error))
                .collect::<Vec<_>>()
                .join(" ")
        );
        let name = format!("converge_{}_{}", table.problem, table.method);
        if cli.format == "json" {
            outputs.push(write_artifact(cli, &format!("{name}.json"), &to_json(table)?)?);
        } else {
            outputs.push(write_artifact(cli, &format!("{name}.csv"), &table_csv(table))?);
        }
    }
    let svg = plot::convergence_svg(&tables);
    outputs.push(write_artifact(cli, &format!("converge_{}.svg", prob.name), &svg)?);

    write_manifest(
        cli,
        &RunManifest {
            command: "converge".into(),
            replay: replay_args(
                cli,
                &[
                    "converge",
                    "--problem",
                    problem,
                    "--methods",
                    selector,
                    "--steps",
                    &steps.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
                    "--oracle-steps",
                    &oracle_steps.to_string(),
                ],
            ),
            methods,
            problem: Some(prob.name.to_string()),
            step_counts: steps.to_vec(),
            tolerance: opts.tolerance,
            determinism: DETERMINISM_NOTE,
            outputs,
        },
    )
}

/// Runs one table per method, optionally spreading methods over worker
/// threads.  Results are collected by index, so the artifact bytes do not
/// depend on the thread count.
fn sweep_tables(
    methods: &[String],
    prob: &BvpProblem,
    steps: &[usize],
    opts: &NewtonOptions,
    source: &ReferenceSource,
) -> Result<Vec<ConvergenceTable>, CliError> {
    let cap = thread_cap().min(methods.len());
    let run_one = |name: &str| -> Result<ConvergenceTable, String> {
        let trip: PeerTriplet = load_triplet(name).map_err(|e| e.to_string())?;
        convergence_table(&trip, prob, steps, opts, source).map_err(|e| e.to_string())
    };
    let mut slots: Vec<Option<Result<ConvergenceTable, String>>> =
        (0..methods.len()).map(|_| None).collect();
    if cap <= 1 {
        for (i, name) in methods.iter().enumerate() {
            slots[i] = Some(run_one(name));
        }
    } else {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for worker in 0..cap {
                let run_one = &run_one;
                handles.push(scope.spawn(move || {
                    let mut mine = Vec::new();
                    let mut i = worker;
                    while i < methods.len() {
                        mine.push((i, run_one(&methods[i])));
                        i += cap;
                    }
                    mine
                }));
            }
            for handle in handles {
                for (i, result) in handle.join().expect("sweep worker panicked") {
                    slots[i] = Some(result);
                }
            }
        });
    }
    slots
        .into_iter()
        .map(|slot| slot.expect("all slots filled").map_err(CliError::Runtime))
        .collect()
}

fn table_csv(table: &ConvergenceTable) -> String {
    let mut csv = String::from("n_steps,state_error,adjoint_error,state_order,adjoint_order\n");
    let orders = table.observed_orders();
    for (i, cell) in table.cells.iter().enumerate() {
        let (os, oa) = if i == 0 { (f64::NAN, f64::NAN) } else { orders[i - 1] };
        let _ = writeln!(
            csv,
            "{},{:.17e},{:.17e},{:.4},{:.4}",
            cell.n_steps, cell.state_error, cell.adjoint_error, os, oa
        );
    }
    csv
}
