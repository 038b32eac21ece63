//! Scenario-driven front end: `classical`, `validate`, `phase` and `sweep`
//! subcommands over a strict JSON scenario file.
//!
//! Exit codes: 0 success, 1 suite/sweep failure, 2 quasi-periodicity
//! violation, 3 classical instability, 4 configuration error.

mod report;
mod suites;

use calogero::classical::monodromy;
use calogero::phase::{default_probes, phase_pipeline, DEFAULT_TIME_INTERVALS};
use calogero::scenario::TrajectoryBlock;
use calogero::wavefn::CoherentState;
use calogero::{Error, Scenario};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "calogero", version, about = "Coherent states and geometric phases of inverse-square N-body models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (overrides the scenario's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Promote quadrature-truncation warnings to errors.
    #[arg(long)]
    strict: bool,
    /// Override the scenario's quadrature seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the classical envelope and write the trajectory CSV plus
    /// the monodromy report.
    Classical(Common),
    /// Run the validation suites named in the scenario.
    Validate(Common),
    /// Extract the global, dynamical and geometric phases for the scenario's
    /// state.
    Phase(Common),
    /// Sweep one scalar parameter and tabulate (gamma, chi, energy).
    Sweep(Common),
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Instability { .. } | Error::MarginalStability { .. } => 3,
        Error::QuasiPeriodicity { .. } | Error::NonPeriodicTrajectory => 2,
        Error::Config(_) | Error::ExprParse(_) | Error::ScheduleEval(_) | Error::Domain(_) => 4,
        _ => 1,
    }
}

fn load(common: &Common) -> calogero::Result<(Scenario, PathBuf)> {
    let src = std::fs::read_to_string(&common.scenario)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", common.scenario.display())))?;
    let mut scenario = Scenario::from_json(&src)?;
    if let Some(seed) = common.seed {
        scenario.quadrature.seed = seed;
    }
    scenario.quadrature.strict = common.strict;
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&scenario.output_dir));
    std::fs::create_dir_all(&out)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", out.display())))?;
    if let Some(threads) = common.threads {
        // a second invocation in the same process is fine; keep the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok((scenario, out))
}

fn cmd_classical(common: &Common) -> calogero::Result<u8> {
    let (scenario, out) = load(common)?;
    let schedule = scenario.schedule()?;
    let steps = match &scenario.trajectory {
        TrajectoryBlock::Floquet { steps_per_tau, .. } => *steps_per_tau,
        TrajectoryBlock::Explicit { steps_per_tau, .. } => *steps_per_tau,
    };
    let mon = monodromy(&schedule, steps)?;
    let traj = scenario.trajectory()?;

    let mut csv = String::from("t,u,u_dot,v,v_dot,rho,rho_dot,u_f,u_f_dot,delta_f\n");
    for i in 0..traj.len() {
        let f = traj.node(i);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            f.t, f.u, f.u_dot, f.v, f.v_dot, f.rho, f.rho_dot, f.uf, f.uf_dot, f.delta_f
        ));
    }
    std::fs::write(out.join("trajectory.csv"), csv)
        .map_err(|e| Error::Config(format!("write trajectory.csv: {e}")))?;

    let body = serde_json::json!({
        "meta": report::meta(),
        "trace": mon.trace(),
        "det": mon.det(),
        "tau_prime": traj.tau_prime,
        "stable": mon.stable(),
    });
    report::write_json(&out.join("monodromy.json"), &body)?;
    println!(
        "classical: omega = {}, wronskian defect = {:.3e}, rho periodicity defect = {:.3e}",
        traj.omega, traj.wronskian_defect, traj.rho_shift_defect
    );
    println!(
        "monodromy: trace = {}, det = {}, stable = {}",
        mon.trace(),
        mon.det(),
        mon.stable()
    );
    Ok(0)
}

fn cmd_validate(common: &Common) -> calogero::Result<u8> {
    let (scenario, out) = load(common)?;
    let (cases, overlaps) = suites::run_suites(&scenario)?;
    let all_pass = cases.iter().all(|c| c.pass);
    let body = serde_json::json!({
        "meta": report::meta(),
        "cases": cases,
    });
    report::write_json(&out.join("validation.json"), &body)?;
    if !overlaps.is_empty() {
        let body = serde_json::json!({
            "meta": report::meta(),
            "overlaps": overlaps,
        });
        report::write_json(&out.join("overlaps.json"), &body)?;
    }
    for c in &cases {
        println!(
            "[{}] {}/{} {} = {:.3e} (tol {:.1e})",
            if c.pass { "pass" } else { "FAIL" },
            c.suite,
            c.case,
            c.metric,
            c.value,
            c.tolerance
        );
    }
    Ok(if all_pass { 0 } else { 1 })
}

fn build_phase_inputs(
    scenario: &Scenario,
) -> calogero::Result<(
    calogero::ModelSpec,
    calogero::Schedule,
    calogero::Trajectory,
    calogero::Label,
    Option<calogero::SymmetricPolynomial>,
)> {
    let spec = scenario.model_spec()?;
    let schedule = scenario.schedule()?;
    let traj = scenario.trajectory()?;
    let label = scenario.label()?;
    let poly = scenario.polynomial()?;
    Ok((spec, schedule, traj, label, poly))
}

fn cmd_phase(common: &Common) -> calogero::Result<u8> {
    let (scenario, out) = load(common)?;
    let (spec, schedule, traj, label, poly) = build_phase_inputs(&scenario)?;
    let state = CoherentState::new(
        &spec,
        label,
        &traj,
        poly.as_ref(),
        scenario.dressing_norm()?,
    )?;
    let probes = default_probes(&spec, 6, scenario.quadrature.seed ^ 0x9e3779b97f4a7c15);
    let intervals = scenario
        .quadrature
        .time_intervals
        .unwrap_or(DEFAULT_TIME_INTERVALS);
    let (rep, samples) = phase_pipeline(&spec, &schedule, &state, &scenario.quadrature, intervals, &probes)?;

    let mut csv = String::from("t,H_exp_re,H_exp_im,overlap_dt_im\n");
    for s in &samples {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            s.t, s.h_exp_re, s.h_exp_im, s.overlap_dt_im
        ));
    }
    std::fs::write(out.join("expectations.csv"), csv)
        .map_err(|e| Error::Config(format!("write expectations.csv: {e}")))?;

    let tolerances: serde_json::Map<String, serde_json::Value> =
        calogero::scenario::KNOWN_TOLERANCES
            .iter()
            .map(|(k, _)| ((*k).to_string(), serde_json::json!(scenario.tolerance(k))))
            .collect();
    let body = serde_json::json!({
        "meta": report::meta(),
        "report": rep,
        "scenario": scenario,
        "tolerances": tolerances,
    });
    report::write_json(&out.join("phase.json"), &body)?;
    println!(
        "phase: chi = {:.9}, dyn = {:.9}, gamma = {:.9} (closed {:.9}), |routes| = {:.3e}, |disc| = {:.3e}",
        rep.chi, rep.dyn_phase, rep.gamma_numeric, rep.gamma_closed, rep.disc_routes, rep.disc_gamma
    );
    Ok(0)
}

fn cmd_sweep(common: &Common) -> calogero::Result<u8> {
    let (scenario, out) = load(common)?;
    let sweep = scenario
        .sweep
        .clone()
        .ok_or_else(|| Error::Config("sweep command needs a sweep block".into()))?;

    let mut rows = String::from("parameter,gamma,chi,energy\n");
    let mut failures = 0usize;
    for &value in &sweep.values {
        match sweep_point(&scenario, &sweep.parameter, value) {
            Ok((gamma, chi, energy)) => {
                rows.push_str(&format!("{value},{gamma},{chi},{energy}\n"));
            }
            Err(e) => {
                eprintln!("sweep point {value} failed: {e}");
                rows.push_str(&format!("{value},NaN,NaN,NaN\n"));
                failures += 1;
            }
        }
    }
    std::fs::write(out.join("sweep.csv"), rows)
        .map_err(|e| Error::Config(format!("write sweep.csv: {e}")))?;
    println!(
        "sweep over {}: {} points, {} failures",
        sweep.parameter,
        sweep.values.len(),
        failures
    );
    Ok(if failures > 0 { 1 } else { 0 })
}

fn sweep_point(base: &Scenario, parameter: &str, value: f64) -> calogero::Result<(f64, f64, f64)> {
    let mut scenario = base.clone();
    let integer = |v: f64| -> calogero::Result<u32> {
        if v.fract() != 0.0 || v < 0.0 {
            return Err(Error::Config(format!(
                "parameter `{parameter}` needs a nonnegative integer, got {v}"
            )));
        }
        Ok(v as u32)
    };
    match parameter {
        "lambda" => scenario.model.lambda = value,
        "alpha" => scenario.model.alpha = Some(value),
        "squeeze" => match &mut scenario.trajectory {
            TrajectoryBlock::Explicit { vdot0, .. } => *vdot0 = value,
            _ => {
                return Err(Error::Config(
                    "squeeze sweep needs an explicit trajectory block".into(),
                ))
            }
        },
        "m" => scenario.quantum.m = Some(integer(value)?),
        "n" => scenario.quantum.n = Some(integer(value)?),
        "level" => scenario.quantum.level = Some(integer(value)? as u8),
        other => {
            return Err(Error::Config(format!(
                "unknown sweep parameter `{other}` (lambda, alpha, squeeze, m, n, level)"
            )))
        }
    }
    scenario.validate()?;
    let (spec, schedule, traj, label, poly) = build_phase_inputs(&scenario)?;
    let state = CoherentState::new(
        &spec,
        label,
        &traj,
        poly.as_ref(),
        scenario.dressing_norm()?,
    )?;
    let probes = default_probes(&spec, 6, scenario.quadrature.seed ^ 0x9e3779b97f4a7c15);
    let intervals = scenario.quadrature.time_intervals.unwrap_or(DEFAULT_TIME_INTERVALS);
    let (rep, _) = phase_pipeline(&spec, &schedule, &state, &scenario.quadrature, intervals, &probes)?;
    Ok((rep.gamma_numeric, rep.chi, calogero::energy(&spec, &label)?))
}

fn main() -> ExitCode {
    // map argument errors onto the config exit code; keep help/version at 0
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Classical(c) => cmd_classical(c),
        Command::Validate(c) => cmd_validate(c),
        Command::Phase(c) => cmd_phase(c),
        Command::Sweep(c) => cmd_sweep(c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
