//! Command-line frontend for the pilot-assisted MIMO capacity simulator.
//!
//! Configuration comes from a flat `key = value` file, command-line flags,
//! or both; flags win over file entries. Results print as CSV on stdout and
//! are optionally written to a file. Exit codes: 0 success, 2 configuration
//! error, 3 numeric contract violation, 4 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use psam_mimo::capacity::{MonteCarlo, Scheme, SchemeConfig};
use psam_mimo::error::{Error, Result};
use psam_mimo::experiment::{
    self, config_entries, preset, spec_from_entries, ConfigEntries, ExperimentKind, ExperimentSpec,
    SchemeKind,
};
use psam_mimo::optimize::{
    ccf_validity_ratio, closed_form_alpha, grid_optimal_phi, numeric_alpha, optimal_pilot_length,
    CCF_VALIDITY_THRESHOLD,
};

#[derive(Parser)]
#[command(
    name = "psam-mimo",
    about = "Capacity simulation and pilot/data power optimization for pilot-assisted MIMO links",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single configuration point.
    Simulate(RunArgs),
    /// Run a grid sweep (lists allowed for snr-db, rho, alpha).
    Sweep(RunArgs),
    /// Run a canned experiment preset.
    Figure(FigureArgs),
    /// Optimize one design parameter for a configuration point.
    Optimize(OptimizeArgs),
}

/// Flags mirroring the config-file keys; any flag overrides the file.
#[derive(Args, Clone)]
struct ConfigFlags {
    /// Config file in flat `key = value` format.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scheme: nonfeedback, cgf, ccf, or beamforming.
    #[arg(long)]
    scheme: Option<String>,
    /// Transmit antennas.
    #[arg(long)]
    nt: Option<String>,
    /// Receive antennas.
    #[arg(long)]
    nr: Option<String>,
    /// Block length in symbols.
    #[arg(long)]
    block_len: Option<String>,
    /// Training length in symbols.
    #[arg(long)]
    pilot_len: Option<String>,
    /// Feedback delay in symbols (gain feedback only).
    #[arg(long)]
    delay: Option<String>,
    /// Average SNR in dB (scalar or comma list).
    #[arg(long)]
    snr_db: Option<String>,
    /// Transmit correlation factor (scalar or comma list).
    #[arg(long)]
    rho: Option<String>,
    /// Power factor: number, comma list, or "auto".
    #[arg(long)]
    alpha: Option<String>,
    /// Data power division: number, "beta", or "auto".
    #[arg(long)]
    phi: Option<String>,
    /// Monte-Carlo trials per point.
    #[arg(long)]
    trials: Option<String>,
    /// Random seed.
    #[arg(long)]
    seed: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<String>,
}

impl ConfigFlags {
    fn entries(&self) -> Result<ConfigEntries> {
        let mut entries = match &self.config {
            Some(path) => config_entries(&std::fs::read_to_string(path)?)?,
            None => Vec::new(),
        };
        let overrides: [(&str, &Option<String>); 12] = [
            ("scheme", &self.scheme),
            ("nt", &self.nt),
            ("nr", &self.nr),
            ("block_len", &self.block_len),
            ("pilot_len", &self.pilot_len),
            ("delay", &self.delay),
            ("snr_db", &self.snr_db),
            ("rho", &self.rho),
            ("alpha", &self.alpha),
            ("phi", &self.phi),
            ("trials", &self.trials),
            ("seed", &self.seed),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                entries.push((key.to_string(), v.clone(), None));
            }
        }
        if let Some(out) = &self.out {
            entries.push(("out".to_string(), out.clone(), None));
        }
        Ok(entries)
    }

    fn spec(&self) -> Result<ExperimentSpec> {
        spec_from_entries(&self.entries()?)
    }
}

#[derive(Args, Clone)]
struct RunCommon {
    /// Worker threads for the Monte-Carlo loops (0 = all cores). Does not
    /// change any numeric output.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Suppress the timestamp comment so identical runs produce
    /// byte-identical CSV.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    flags: ConfigFlags,
    /// Also estimate the capacity upper bound and emit the gap ratio.
    #[arg(long)]
    gap: bool,
    #[command(flatten)]
    common: RunCommon,
}

#[derive(Args)]
struct FigureArgs {
    /// Preset name; see `figure --list`.
    name: Option<String>,
    /// List available presets.
    #[arg(long)]
    list: bool,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: RunCommon,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Parameter to optimize: alpha, phi, or lp.
    target: String,
    #[command(flatten)]
    flags: ConfigFlags,
    #[command(flatten)]
    common: RunCommon,
}

fn configure_workers(workers: usize) {
    if workers > 0 {
        // Ignore failure: the global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
}

fn scalar_point(spec: &ExperimentSpec) -> Result<(f64, f64)> {
    if spec.snr_db.len() != 1 {
        return Err(Error::Config {
            field: "snr_db".into(),
            message: "this command needs a single SNR point".into(),
            line: None,
        });
    }
    if spec.rho.len() > 1 {
        return Err(Error::Config {
            field: "rho".into(),
            message: "this command needs a single correlation point".into(),
            line: None,
        });
    }
    Ok((spec.snr_db[0], spec.rho.first().copied().unwrap_or(0.0)))
}

fn build_point_config(spec: &ExperimentSpec, alpha: f64, phi: f64) -> Result<SchemeConfig> {
    let (snr, rho) = scalar_point(spec)?;
    let power = 10f64.powf(snr / 10.0);
    let scheme = match spec.scheme {
        SchemeKind::NonFeedback => Scheme::NonFeedback,
        SchemeKind::Cgf if spec.delay == 0 => Scheme::CgfDelayless,
        SchemeKind::Cgf => Scheme::CgfDelayed {
            delay: spec.delay,
            phi,
        },
        SchemeKind::Ccf => Scheme::Ccf(psam_mimo::channel::CovarianceSpec::exponential(
            spec.num_tx,
            rho,
        )?),
        SchemeKind::Beamforming => Scheme::Beamforming(
            psam_mimo::channel::CovarianceSpec::exponential(spec.num_tx, rho)?,
        ),
    };
    SchemeConfig::new(
        spec.num_tx,
        spec.num_rx,
        spec.block_len,
        spec.train_len,
        power,
        alpha,
        scheme,
    )
}

fn run_sweep(args: &RunArgs, single_point: bool) -> Result<()> {
    configure_workers(args.common.workers);
    let mut spec = args.flags.spec()?;
    spec.with_gap = args.gap;
    if single_point {
        scalar_point(&spec)?;
        if let experiment::AlphaSpec::List(_) = &spec.alpha {
            return Err(Error::Config {
                field: "alpha".into(),
                message: "simulate takes a single alpha (use sweep for lists)".into(),
                line: None,
            });
        }
    }
    let table = experiment::run(&spec, args.common.deterministic)?;
    print!("{}", table.to_csv(true));
    if let Some(path) = &spec.out {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn run_figure(args: &FigureArgs) -> Result<()> {
    if args.list {
        for name in ExperimentKind::all_presets() {
            println!("{name}");
        }
        return Ok(());
    }
    let Some(name) = &args.name else {
        return Err(Error::Config {
            field: "figure".into(),
            message: "missing preset name (try --list)".into(),
            line: None,
        });
    };
    let kind = ExperimentKind::from_name(name).ok_or_else(|| Error::Config {
        field: "figure".into(),
        message: format!("unknown preset `{name}` (try --list)"),
        line: None,
    })?;
    if kind == ExperimentKind::CustomSweep {
        return Err(Error::Config {
            field: "figure".into(),
            message: "custom-sweep runs through `sweep`, not `figure`".into(),
            line: None,
        });
    }
    configure_workers(args.common.workers);
    let spec = preset(
        kind,
        args.trials.unwrap_or(10_000),
        args.seed.unwrap_or(42),
        args.out.clone(),
    );
    let table = experiment::run(&spec, args.common.deterministic)?;
    print!("{}", table.to_csv(true));
    if let Some(path) = &spec.out {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn run_optimize(args: &OptimizeArgs) -> Result<()> {
    configure_workers(args.common.workers);
    let spec = args.flags.spec()?;
    let mc = MonteCarlo::new(spec.trials, spec.seed);
    match args.target.as_str() {
        "alpha" => {
            let cfg = build_point_config(&spec, 0.5, default_phi(&spec))?;
            let search = numeric_alpha(&cfg, &mc, 0.005)?;
            println!("alpha_numeric = {:.6}", search.alpha);
            println!("capacity = {:.6}", search.value);
            if search.grid_fallback {
                println!("note = objective failed the unimodality probe; grid scan used");
            }
            match closed_form_alpha(&cfg) {
                Ok(closed) => println!("alpha_closed_form = {closed:.6}"),
                Err(e) => println!("alpha_closed_form = unavailable ({e})"),
            }
            if let Scheme::Ccf(cov) = cfg.scheme() {
                let ratio =
                    ccf_validity_ratio(cov, cfg.train_len(), cfg.avg_power(), cfg.block_len())?;
                if ratio < CCF_VALIDITY_THRESHOLD {
                    println!(
                        "warning = closed form outside its validity range (P*L / sum(1/g) = {ratio:.2} < {CCF_VALIDITY_THRESHOLD})"
                    );
                }
            }
        }
        "phi" => {
            if spec.scheme != SchemeKind::Cgf || spec.delay == 0 {
                return Err(Error::Config {
                    field: "phi".into(),
                    message: "phi optimization needs scheme=cgf with delay > 0".into(),
                    line: None,
                });
            }
            let beta = spec.delay as f64 / (spec.block_len - spec.train_len) as f64;
            let alpha = match spec.alpha {
                experiment::AlphaSpec::Fixed(a) => a,
                _ => closed_form_alpha(&build_point_config(&spec, 0.5, beta)?)?,
            };
            let cfg = build_point_config(&spec, alpha, beta)?;
            let (phi, est) = grid_optimal_phi(&cfg, 0.01, &mc)?;
            let at_beta = psam_mimo::capacity::evaluate(&cfg, &mc)?;
            println!("phi_star = {phi:.4}");
            println!("beta = {beta:.4}");
            println!("capacity_at_phi_star = {:.6}", est.mean);
            println!("capacity_at_beta = {:.6}", at_beta.mean);
        }
        "lp" => {
            if spec.scheme != SchemeKind::Ccf {
                return Err(Error::Config {
                    field: "lp".into(),
                    message: "training-length optimization applies to scheme=ccf".into(),
                    line: None,
                });
            }
            let (snr, rho) = scalar_point(&spec)?;
            let power = 10f64.powf(snr / 10.0);
            let cov = psam_mimo::channel::CovarianceSpec::exponential(spec.num_tx, rho)?;
            let (best, table) =
                optimal_pilot_length(&cov, spec.num_rx, spec.block_len, power, &mc)?;
            println!("lp,alpha,mean,stderr,effective_lp,validity_ratio");
            for row in &table {
                println!(
                    "{},{:.6},{:.6},{:.6},{},{:.2}",
                    row.train_len,
                    row.alpha,
                    row.estimate.mean,
                    row.estimate.stderr,
                    row.effective_len,
                    row.validity_ratio
                );
            }
            println!("lp_star = {best}");
        }
        other => {
            return Err(Error::Config {
                field: "optimize".into(),
                message: format!("unknown target `{other}` (expected alpha, phi, or lp)"),
                line: None,
            })
        }
    }
    Ok(())
}

fn default_phi(spec: &ExperimentSpec) -> f64 {
    if spec.delay == 0 {
        0.0
    } else {
        spec.delay as f64 / (spec.block_len - spec.train_len) as f64
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => run_sweep(args, true),
        Command::Sweep(args) => run_sweep(args, false),
        Command::Figure(args) => run_figure(args),
        Command::Optimize(args) => run_optimize(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
