use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use nlwave_cli::output::{
    prepare_dir, write_certificates, write_convergence, write_energy, write_sweep, write_trajectory,
};
use nlwave_cli::{config_hash, parse_config, CliError, RunConfig, RunManifest};
use nlwave_core::experiments::{energy_report, fit_order, manufactured_test, self_convergence, tau_sweep};
use nlwave_core::kernels::{certify, CertifyParams};
use nlwave_core::solver::solve;
use nlwave_core::{Error, Kernel, NonlinearityMode, TimeGrid};
use serde_json::json;

/// Default output directory when neither the flag nor the config sets one.
const OUT_DIR_ENV: &str = "NLWAVE_OUT_DIR";

#[derive(Parser)]
#[command(name = "nlwave", version, about = "Nonlocal JMGT-type wave equations: certificates, runs and sweeps")]
struct Cli {
    /// Output directory; overrides the config and NLWAVE_OUT_DIR.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel checks.
    Kernel {
        #[command(subcommand)]
        action: KernelAction,
    },
    /// Single run; writes trajectory.csv.
    Solve { config: PathBuf },
    /// Relaxation-time sweep with order fit; writes sweep.csv.
    Sweep { config: PathBuf },
    /// Temporal convergence study; writes convergence.csv.
    Converge {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Energy diagnostics of a single run; writes energy.csv.
    Energy { config: PathBuf },
}

#[derive(Subcommand)]
enum KernelAction {
    /// Coercivity certificates for the configured kernel pair; writes certificates.csv.
    Validate { config: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Manufactured solution when the kernels allow it, else self-convergence.
    Auto,
    Manufactured,
    SelfConvergence,
}

enum Status {
    Pass,
    Fail(String),
}

struct Job {
    name: &'static str,
    text: String,
    run: RunConfig,
    dir: PathBuf,
    started: Instant,
}

impl Job {
    fn load(name: &'static str, path: &Path, flag_dir: Option<&Path>) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let run = parse_config(&text)?;
        let dir = flag_dir
            .map(Path::to_path_buf)
            .or_else(|| run.out_dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let dir = prepare_dir(&dir)?;
        Ok(Self { name, text, run, dir, started: Instant::now() })
    }

    fn output(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    fn manifest(&self, csv: &str, seed: Option<u64>, status: &Status, summary: serde_json::Value) -> Result<()> {
        let stem = csv.trim_end_matches(".csv");
        let manifest = RunManifest {
            command: self.name.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(&self.text),
            config: self.text.clone(),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            seed,
            status: match status {
                Status::Pass => "ok".into(),
                Status::Fail(why) => format!("failed: {why}"),
            },
            outputs: vec![csv.to_string()],
            summary,
        };
        manifest.write(&self.output(&format!("{stem}.manifest.json")))?;
        Ok(())
    }
}

fn solve_cmd(job: Job) -> Result<Status> {
    let cfg = &job.run.scenario;
    let traj = solve(cfg, &job.run.data).map_err(CliError::from)?;
    let file = "trajectory.csv";
    write_trajectory(&traj, cfg.domain.mode_count(), &job.output(file))?;
    println!(
        "{} samples, peak modal displacement {:e}, {} fixed-point iterations",
        traj.len(),
        traj.peak_displacement(),
        traj.meta.iterations
    );
    let summary = json!({
        "samples": traj.len(),
        "peak_displacement": traj.peak_displacement(),
        "iterations": traj.meta.iterations,
        "residuals": traj.meta.residuals,
    });
    job.manifest(file, None, &Status::Pass, summary)?;
    Ok(Status::Pass)
}

fn sweep_cmd(job: Job) -> Result<Status> {
    let sweep = tau_sweep(&job.run.scenario, &job.run.data, &job.run.experiment.taus).map_err(CliError::from)?;
    let file = "sweep.csv";
    write_sweep(&sweep, &job.output(file))?;
    for e in &sweep.entries {
        match (&e.error, &e.failure) {
            (Some(err), _) => println!("tau {:e}: error {err:e}", e.tau),
            (_, Some(why)) => println!("tau {:e}: failed: {why}", e.tau),
            _ => {}
        }
    }
    let fit = fit_order(&sweep.pairs()).ok();
    if let Some(f) = &fit {
        println!("fitted order {:.4} (residual {:.2e})", f.slope, f.residual);
        for w in &f.warnings {
            println!("warning: {w}");
        }
    } else {
        println!("fitted order unavailable: fewer than 3 nonzero errors");
    }
    println!("energy spread {:.4}", sweep.energy_spread());
    let status = if sweep.failures() == sweep.entries.len() {
        Status::Fail("every run failed".into())
    } else {
        Status::Pass
    };
    let summary = json!({
        "order": fit.as_ref().map(|f| f.slope),
        "order_residual": fit.as_ref().map(|f| f.residual),
        "energy_spread": sweep.energy_spread(),
        "failures": sweep.failures(),
    });
    job.manifest(file, None, &status, summary)?;
    Ok(status)
}

fn converge_cmd(job: Job, method: Method) -> Result<Status> {
    let cfg = &job.run.scenario;
    let exp = &job.run.experiment;
    let local = cfg.pair.k1 == Kernel::DiracDelta && cfg.pair.k2 == Kernel::ConstantOne;
    let manufactured = match method {
        Method::Auto => local && cfg.mode == NonlinearityMode::Linear,
        Method::Manufactured => true,
        Method::SelfConvergence => false,
    };
    let report = if manufactured {
        manufactured_test(cfg, &exp.steps, exp.amplitude, exp.omega)
    } else {
        self_convergence(cfg, &job.run.data, &exp.steps)
    }
    .map_err(CliError::from)?;
    let file = "convergence.csv";
    write_convergence(&report, &job.output(file))?;
    for (h, err) in &report.rows {
        println!("h {h:e}: error {err:e}");
    }
    match &report.order {
        Some(fit) => println!("fitted order {:.4}", fit.slope),
        None => println!("fitted order unavailable: fewer than 3 nonzero errors"),
    }
    let summary = json!({
        "method": if manufactured { "manufactured" } else { "self_convergence" },
        "order": report.order.as_ref().map(|f| f.slope),
    });
    job.manifest(file, None, &Status::Pass, summary)?;
    Ok(Status::Pass)
}

fn energy_cmd(job: Job) -> Result<Status> {
    let cfg = &job.run.scenario;
    let traj = solve(cfg, &job.run.data).map_err(CliError::from)?;
    let records = energy_report(cfg, &traj).map_err(CliError::from)?;
    let file = "energy.csv";
    write_energy(&records, &job.output(file))?;
    let last = records.last().expect("trajectory has the initial sample");
    println!(
        "final wave energy {:e}, cumulative |grad u_tt|^2 {:e}",
        last.wave_energy, last.grad_utt_cumulative
    );
    let summary = json!({
        "final_wave_energy": last.wave_energy,
        "grad_utt_cumulative": last.grad_utt_cumulative,
        "phi_proxy": last.phi_proxy,
        "psi_proxy": last.psi_proxy,
    });
    job.manifest(file, None, &Status::Pass, summary)?;
    Ok(Status::Pass)
}

fn validate_cmd(job: Job) -> Result<Status> {
    let cfg = &job.run.scenario;
    let exp = &job.run.experiment;
    let grid = TimeGrid::covering(cfg.final_time, cfg.step).map_err(CliError::from)?;
    let params = CertifyParams { tau: cfg.tau, c: cfg.c, delta: cfg.delta };
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for &id in &exp.assumptions {
        let row = match certify(id, &cfg.pair, params, grid, exp.trials, exp.seed) {
            Ok(cert) => {
                println!(
                    "{:<6} {} worst margin {:+.3e}, constant {:.4e}",
                    id.name(),
                    if cert.pass { "pass" } else { "FAIL" },
                    cert.worst_margin,
                    cert.empirical_constant
                );
                if !cert.pass {
                    failed.push(id.name());
                }
                Ok(cert)
            }
            Err(Error::CaseMismatch(why)) => {
                println!("{:<6} skipped: {why}", id.name());
                Err(why)
            }
            Err(e) => return Err(CliError::from(e).into()),
        };
        rows.push((id.name().to_string(), row));
    }
    let file = "certificates.csv";
    write_certificates(&rows, &job.output(file))?;
    let status = if failed.is_empty() {
        Status::Pass
    } else {
        Status::Fail(format!("certificates failed: {}", failed.join(", ")))
    };
    let summary = json!({ "failed": failed, "trials": exp.trials });
    job.manifest(file, Some(exp.seed), &status, summary)?;
    Ok(status)
}

fn run(cli: Cli) -> Result<Status> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let dir = cli.out_dir.as_deref();
    match cli.command {
        Command::Kernel { action: KernelAction::Validate { config } } => {
            validate_cmd(Job::load("kernel validate", &config, dir)?)
        }
        Command::Solve { config } => solve_cmd(Job::load("solve", &config, dir)?),
        Command::Sweep { config } => sweep_cmd(Job::load("sweep", &config, dir)?),
        Command::Converge { config, method } => converge_cmd(Job::load("converge", &config, dir)?, method),
        Command::Energy { config } => energy_cmd(Job::load("energy", &config, dir)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail(why)) => {
            eprintln!("error[failed]: {why}");
            ExitCode::from(1)
        }
        Err(err) => {
            let (prefix, code) = match err.downcast_ref::<CliError>() {
                Some(e) => (e.prefix(), e.exit_code()),
                None => ("error[solver]", 3),
            };
            let message = format!("{err:#}").replace('\n', " ");
            eprintln!("{prefix}: {message}");
            ExitCode::from(code)
        }
    }
}
