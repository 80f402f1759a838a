use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uwsn::harness::{
    ensure_dir, format_float, front_csv, load_config, manifest, metrics_csv, write_file, write_results,
    Experiment, ExperimentConfig, RunSummary,
};

#[derive(Parser)]
#[command(name = "uwsn", version, about = "Sensor selection for target tracking in uncertain WSNs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Key-value config file; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct Parallel {
    /// Worker threads; all cores when omitted. Results do not depend on it.
    #[arg(long, value_name = "K")]
    workers: Option<usize>,
    /// Overrides `run.trials`.
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Full Monte Carlo run: mse.csv, reliability.csv, front_<t>.csv, manifest.cfg.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        parallel: Parallel,
    },
    /// Pareto front of trial 0 at one step: front_<t>.csv.
    Front {
        #[command(flatten)]
        common: Common,
        /// Tracking step, from 1.
        #[arg(long, default_value_t = 1)]
        step: usize,
    },
    /// Per-sensor FI and MI of trial 0 at one step: metrics.csv.
    Metrics {
        #[command(flatten)]
        common: Common,
        /// Tracking step, from 1.
        #[arg(long, default_value_t = 1)]
        step: usize,
    },
    /// Runs several configs and joins their MSE columns into compare.csv.
    Compare {
        /// Config files, one run each; repeat the flag.
        #[arg(long = "config", value_name = "PATH", required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, value_name = "U64")]
        seed: Option<u64>,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        parallel: Parallel,
    },
}

fn resolve(path: Option<&Path>, seed: Option<u64>, trials: Option<usize>) -> uwsn::Result<ExperimentConfig> {
    let mut c = match path {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        c.seed = s;
    }
    if let Some(t) = trials {
        c.trials = t;
    }
    c.validate()?;
    Ok(c)
}

fn report(name: &str, s: &RunSummary) {
    eprintln!(
        "{name}: {} trials in {:.1}s, terminal MSE {:.4}, mean selected {:.2}",
        s.trials_ok,
        s.elapsed.as_secs_f64(),
        s.mse.last().copied().unwrap_or(f64::NAN),
        s.mean_selected.iter().sum::<f64>() / s.mean_selected.len().max(1) as f64,
    );
    for (i, e) in &s.failures {
        eprintln!("  trial {i} failed: {e}");
    }
}

fn simulate(common: &Common, parallel: &Parallel) -> uwsn::Result<()> {
    let config = resolve(common.config.as_deref(), common.seed, parallel.trials)?;
    let exp = Experiment::new(config)?;
    let summary = exp.run_monte_carlo(parallel.workers)?;
    write_results(&summary, exp.config(), &common.out)?;
    report("simulate", &summary);
    Ok(())
}

fn front(common: &Common, step: usize) -> uwsn::Result<()> {
    let exp = Experiment::new(resolve(common.config.as_deref(), common.seed, None)?)?;
    let seed = exp.trial_seed(0);
    let snap = exp.snapshot(seed, step)?;
    let points = match snap.decision.front {
        Some(f) => f,
        // schemes without a front still get the configured metric's front
        None => exp.pareto_front(&snap.table, &mut uwsn::rng::derived(seed, &[uwsn::rng::stream::OPTIMIZER, step as u64 - 1]))?,
    };
    ensure_dir(&common.out)?;
    write_file(&common.out.join(format!("front_{step}.csv")), &front_csv(&points))?;
    write_file(&common.out.join("manifest.cfg"), &manifest(exp.config()))?;
    eprintln!("front at step {step}: {} points", points.len());
    Ok(())
}

fn metrics(common: &Common, step: usize) -> uwsn::Result<()> {
    let exp = Experiment::new(resolve(common.config.as_deref(), common.seed, None)?)?;
    let snap = exp.snapshot(exp.trial_seed(0), step)?;
    ensure_dir(&common.out)?;
    write_file(&common.out.join("metrics.csv"), &metrics_csv(&exp.sensor_metrics(&snap)))?;
    write_file(&common.out.join("manifest.cfg"), &manifest(exp.config()))?;
    Ok(())
}

fn compare(configs: &[PathBuf], seed: Option<u64>, out: &Path, parallel: &Parallel) -> uwsn::Result<()> {
    let names: Vec<String> = configs
        .iter()
        .map(|p| p.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned()))
        .collect();
    if names.iter().collect::<BTreeSet<_>>().len() != names.len() {
        return Err(uwsn::Error::Config {
            key: "--config".into(),
            reason: "config file names must be distinct".into(),
        });
    }
    let mut runs = Vec::with_capacity(configs.len());
    for (path, name) in configs.iter().zip(&names) {
        let exp = Experiment::new(resolve(Some(path), seed, parallel.trials)?)?;
        let summary = exp.run_monte_carlo(parallel.workers)?;
        write_results(&summary, exp.config(), &out.join(name))?;
        report(name, &summary);
        runs.push(summary);
    }
    let steps = runs.iter().map(|r| r.mse.len()).max().unwrap_or(0);
    let mut csv = String::from("step");
    for n in &names {
        let _ = write!(csv, ",mse_{n}");
    }
    csv.push('\n');
    for t in 0..steps {
        let _ = write!(csv, "{}", t + 1);
        for r in &runs {
            let v = r.mse.get(t).map_or(String::new(), |&v| format_float(v));
            let _ = write!(csv, ",{v}");
        }
        csv.push('\n');
    }
    write_file(&out.join("compare.csv"), &csv)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { common, parallel } => simulate(common, parallel),
        Command::Front { common, step } => front(common, *step),
        Command::Metrics { common, step } => metrics(common, *step),
        Command::Compare {
            configs,
            seed,
            out,
            parallel,
        } => compare(configs, *seed, out, parallel),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
