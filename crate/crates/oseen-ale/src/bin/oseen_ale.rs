//! Batch experiment runner: simulations with energy ledgers, geometric
//! conservation checks, temporal convergence studies, and the step-size
//! admissibility condition. Stdout carries data, stderr diagnostics; exit
//! codes: 0 success, 1 check failed, 2 configuration error, 3 solver error.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use clap::{Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;

use oseen_ale::analysis::{
    certify_gcl_stability, certify_nogcl_stability, problem_from_registry, run_case,
    standard_sweep, temporal_convergence, worst_dt_condition, ConvergenceSetup, EnergyLedger,
    StabilityCertificate,
};
use oseen_ale::config::ExperimentConfig;
use oseen_ale::fem::FunctionSpace;
use oseen_ale::mesh_motion::{
    gcl_residual, uniform_grid, DiscreteAleMap, MotionProgram, ReferenceMesh,
};
use oseen_ale::timestepper::{run_simulation, SchemeVariant};
use oseen_ale::SolverError;

#[derive(Parser)]
#[command(name = "oseen-ale", about = "Moving-domain Oseen solver experiment runner")]
struct Cli {
    /// Path to the experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, default_value = ".", global = true)]
    out: PathBuf,
    /// Worker threads for sweep runs.
    #[arg(long, default_value_t = 1, global = true)]
    jobs: usize,
    /// Pass/fail tolerance for the geometric conservation check.
    #[arg(long, default_value_t = 1e-12, global = true)]
    tolerance: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation (or the standard sweep) and write ledger CSVs plus
    /// a JSON summary.
    Run,
    /// Check the mass-matrix conservation identity over all intervals.
    GclCheck,
    /// Temporal convergence study against a refined-step reference.
    Converge,
    /// Evaluate the step-size admissibility condition.
    DtCondition,
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SolverError::Config(_) | SolverError::InvalidMesh(_)
                | SolverError::InvalidMotion(_) => 2,
                _ => 3,
            }
        }
    };
    std::process::exit(code);
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, SolverError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| SolverError::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| SolverError::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::parse(&text)
}

fn seed_from_env() -> u64 {
    std::env::var("OSEEN_ALE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<(), SolverError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| SolverError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| SolverError::Config(format!("cannot write {}: {e}", path.display())))
}

fn dispatch(cli: &Cli) -> Result<i32, SolverError> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Run => cmd_run(cli, &cfg),
        Command::GclCheck => cmd_gcl_check(cli, &cfg),
        Command::Converge => cmd_converge(cli, &cfg),
        Command::DtCondition => cmd_dt_condition(cli, &cfg),
    }
}

fn build_map(cfg: &ExperimentConfig) -> Result<(Arc<ReferenceMesh>, DiscreteAleMap), SolverError> {
    let mesh = Arc::new(ReferenceMesh::unit_square(cfg.nx, cfg.ny)?);
    let motion = Arc::new(MotionProgram::from_registry(&cfg.motion, &cfg.motion_params)?);
    let map = DiscreteAleMap::build(mesh.clone(), motion, uniform_grid(0.0, cfg.dt, cfg.n_steps))?;
    Ok((mesh, map))
}

fn certificate_for(
    cfg: &ExperimentConfig,
    map: &DiscreteAleMap,
    traj: &oseen_ale::timestepper::Trajectory,
) -> Result<StabilityCertificate, SolverError> {
    match cfg.scheme.variant {
        SchemeVariant::GclMidpoint => certify_gcl_stability(traj, cfg.c_omega),
        SchemeVariant::Endpoint => {
            let cond = worst_dt_condition(map, cfg.c)?;
            certify_nogcl_stability(traj, cfg.c_prime, &cond)
        }
    }
}

fn cmd_run(cli: &Cli, cfg: &ExperimentConfig) -> Result<i32, SolverError> {
    if cfg.sweep {
        return cmd_run_sweep(cli, cfg);
    }
    let (mesh, map) = build_map(cfg)?;
    let space = FunctionSpace::taylor_hood(mesh)?;
    let problem = problem_from_registry(&cfg.problem, cfg.scheme.mu)?;
    let traj = run_simulation(&map, &space, &cfg.scheme, &problem)?;
    let ledger = EnergyLedger::from_trajectory(&traj);
    write_artifact(&cli.out, "ledger.csv", &ledger.to_csv())?;
    let cert = certificate_for(cfg, &map, &traj)?;
    let summary = serde_json::to_string_pretty(&cert)
        .map_err(|e| SolverError::Config(format!("summary serialization: {e}")))?;
    write_artifact(&cli.out, "summary.json", &summary)?;
    println!("{summary}");
    Ok(if cert.holds { 0 } else { 1 })
}

fn cmd_run_sweep(cli: &Cli, cfg: &ExperimentConfig) -> Result<i32, SolverError> {
    let mut cases = standard_sweep();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed_from_env());
    cases.shuffle(&mut rng);
    let mesh = Arc::new(ReferenceMesh::unit_square(cfg.nx, cfg.ny)?);
    let space = FunctionSpace::taylor_hood(mesh.clone())?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(String, StabilityCertificate)>> = Mutex::new(Vec::new());
    let failure: Mutex<Option<SolverError>> = Mutex::new(None);
    let jobs = cli.jobs.max(1).min(cases.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= cases.len() || failure.lock().unwrap().is_some() {
                    break;
                }
                let case = &cases[i];
                let outcome = (|| {
                    let (map, traj) = run_case(
                        case,
                        &mesh,
                        &space,
                        cfg.scheme.variant,
                        cfg.dt,
                        cfg.n_steps,
                    )?;
                    let ledger = EnergyLedger::from_trajectory(&traj);
                    write_artifact(&cli.out, &format!("{}.csv", case.label()), &ledger.to_csv())?;
                    let cert = certificate_for(cfg, &map, &traj)?;
                    Ok::<_, SolverError>((case.label(), cert))
                })();
                match outcome {
                    Ok(entry) => results.lock().unwrap().push(entry),
                    Err(e) => {
                        *failure.lock().unwrap() = Some(e);
                        break;
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let mut results = results.into_inner().unwrap();
    results.sort_by(|a, b| a.0.cmp(&b.0));
    let all_hold = results.iter().all(|(_, c)| c.holds);
    let summary: serde_json::Value = serde_json::json!({
        "cases": results.iter().map(|(label, c)| {
            serde_json::json!({ "label": label, "certificate": c })
        }).collect::<Vec<_>>(),
        "all_hold": all_hold,
    });
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| SolverError::Config(format!("summary serialization: {e}")))?;
    write_artifact(&cli.out, "sweep_summary.json", &text)?;
    println!("{text}");
    Ok(if all_hold { 0 } else { 1 })
}

fn cmd_gcl_check(cli: &Cli, cfg: &ExperimentConfig) -> Result<i32, SolverError> {
    let (mesh, map) = build_map(cfg)?;
    let space = FunctionSpace::taylor_hood(mesh)?;
    let mut worst = 0.0f64;
    for n in 0..map.n_intervals() {
        worst = worst.max(gcl_residual(&map, &space, n, cfg.gcl_rule)?);
    }
    println!(
        "{}",
        serde_json::json!({
            "max_residual": worst,
            "tolerance": cli.tolerance,
            "rule": format!("{:?}", cfg.gcl_rule),
            "pass": worst <= cli.tolerance,
        })
    );
    Ok(if worst <= cli.tolerance { 0 } else { 1 })
}

fn cmd_converge(cli: &Cli, cfg: &ExperimentConfig) -> Result<i32, SolverError> {
    let mesh = Arc::new(ReferenceMesh::unit_square(cfg.nx, cfg.ny)?);
    let motion = Arc::new(MotionProgram::from_registry(&cfg.motion, &cfg.motion_params)?);
    let problem = problem_from_registry(&cfg.problem, cfg.scheme.mu)?;
    let setup = ConvergenceSetup {
        mesh,
        motion,
        problem: &problem,
        scheme: cfg.scheme,
        t_final: cfg.t_final,
    };
    let table = temporal_convergence(&setup, &cfg.dts)?;
    write_artifact(&cli.out, "convergence.csv", &table.to_csv())?;
    print!("{}", table.to_csv());
    let all_floor = table.rows.iter().all(|r| r.below_floor);
    if all_floor {
        eprintln!("all errors below noise floor; no rate measurable");
        return Ok(0);
    }
    match table.finest_rate() {
        Some(rate) if rate >= 0.85 => Ok(0),
        Some(rate) => {
            eprintln!("finest observed rate {rate} below 0.85");
            Ok(1)
        }
        None => {
            eprintln!("finest rate unavailable");
            Ok(1)
        }
    }
}

fn cmd_dt_condition(cli: &Cli, cfg: &ExperimentConfig) -> Result<i32, SolverError> {
    let (_, map) = build_map(cfg)?;
    let cond = worst_dt_condition(&map, cfg.c)?;
    let text = serde_json::to_string_pretty(&cond)
        .map_err(|e| SolverError::Config(format!("serialization: {e}")))?;
    write_artifact(&cli.out, "dt_condition.json", &text)?;
    println!("{text}");
    Ok(if cond.admissible { 0 } else { 1 })
}
