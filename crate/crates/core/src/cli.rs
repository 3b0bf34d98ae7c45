//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, out-of-domain
//! arguments), 2 on configuration errors (unparsable or infeasible config
//! files, resource limits, unreadable input).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{error::ErrorKind, Parser, Subcommand};

use crate::capacity::{
    capacity_cognizant, capacity_oblivious_feedback, capacity_oblivious_nofeedback, ChannelParams,
    HelperRate,
};
use crate::cognizant::CognizantScheme;
use crate::converse::check_budget;
use crate::error::{Error, Result};
use crate::geometry::{achievable_rate_threshold, cap_rate_exponent, cap_ratio_exact, Angle, CapSpec};
use crate::harness::config::{parse_config, Experiment, ParsedConfig};
use crate::harness::csv::{emit_csv_with, fmt_sig9, CsvOptions, MISSING};
use crate::harness::sweep::{run_experiment, run_sweep, with_workers, worker_count, CellOutcome};
use crate::summary::SchemeKind;

#[derive(Debug, Parser)]
#[command(name = "gaussian-helper", version, about = "Gaussian channel with a rate-limited helper")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cognizant, oblivious and oblivious-with-feedback capacities.
    Capacity {
        #[arg(long)]
        snr: f64,
        #[arg(long)]
        rh: f64,
        /// Accept snr = 0 and rh = inf and print the limiting values.
        #[arg(long)]
        allow_limits: bool,
    },
    /// Rate achieved by the geometric scheme.
    Threshold {
        #[arg(long)]
        snr: f64,
        #[arg(long)]
        rh: f64,
        /// Defaults to 0.1 * rh.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Exact spherical cap area ratio and its rate exponent.
    CapArea {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        phi: f64,
    },
    /// Run the experiment(s) described by a config file.
    Simulate(RunArgs),
    /// Same as simulate; lists in the config file span the grid.
    Sweep(RunArgs),
    /// Audit input/noise correlations of a cognizant simulation.
    Diagnose {
        #[arg(long)]
        config: PathBuf,
        /// Standard deviations of estimator slack.
        #[arg(long, default_value_t = 3.0)]
        sigmas: f64,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall time (makes output nondeterministic).
    #[arg(long)]
    timing: bool,
    /// Worker threads; overrides the environment.
    #[arg(long)]
    workers: Option<usize>,
    /// Write the helper base codebook of a single cognizant experiment.
    #[arg(long)]
    dump_codebook: Option<PathBuf>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Domain(_) | Error::Divergent(_) => 1,
        Error::Config { .. } | Error::Capacity(_) | Error::Io(_) => 2,
    }
}

/// Parses `args` (program name first) and runs the command, writing results
/// to stdout and diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Capacity { snr, rh, allow_limits } => capacity(snr, rh, allow_limits, out),
        Command::Threshold { snr, rh, eps } => {
            let ch = ChannelParams::from_snr(snr)?;
            let rh = HelperRate::new(rh)?;
            let t = achievable_rate_threshold(&ch, rh, eps.unwrap_or(0.1 * rh.bits()))?;
            writeln!(out, "threshold {}", fmt_sig9(t))?;
            Ok(())
        }
        Command::CapArea { n, phi } => {
            let angle = Angle::new(phi)?;
            let ratio = cap_ratio_exact(CapSpec::new(n, angle)?);
            let exponent = match cap_rate_exponent(angle) {
                Ok(v) => fmt_sig9(v),
                Err(Error::Divergent(_)) => "inf".to_string(),
                Err(_) => MISSING.to_string(),
            };
            writeln!(out, "cap_ratio {}", fmt_sig9(ratio))?;
            writeln!(out, "cap_rate_exponent {exponent}")?;
            Ok(())
        }
        Command::Simulate(args) | Command::Sweep(args) => simulate(args, out, err),
        Command::Diagnose { config, sigmas, workers } => {
            let exp = single_experiment(&config)?;
            if exp.scheme != SchemeKind::Cognizant {
                return Err(Error::config(0, "diagnose requires scheme = cognizant"));
            }
            let cfg = exp.config.with_diagnostics(true);
            let (ch, rh) = (cfg.channel, cfg.helper_rate);
            let run = with_workers(workers.unwrap_or_else(worker_count), || {
                CognizantScheme::new(cfg)?.simulate()
            })??;
            let profile = run
                .correlations
                .ok_or_else(|| Error::config(0, "diagnose needs at least 2 trials"))?;
            let slack = profile.estimator_slack(sigmas);
            check_budget(&profile, &ch, rh, slack).write_csv(out)
        }
    }
}

fn capacity(snr: f64, rh: f64, allow_limits: bool, out: &mut dyn Write) -> Result<()> {
    let limit = allow_limits && (snr == 0.0 || rh == f64::INFINITY);
    let values = if limit {
        if !(snr >= 0.0 && rh >= 0.0) {
            return Err(Error::domain("snr and rh must be nonnegative"));
        }
        if rh == f64::INFINITY {
            [f64::INFINITY; 3]
        } else {
            // Without power the helper description is the only resource.
            [rh; 3]
        }
    } else {
        let ch = ChannelParams::from_snr(snr)?;
        let rh = HelperRate::new(rh)?;
        [
            capacity_cognizant(&ch, rh),
            capacity_oblivious_nofeedback(&ch, rh),
            capacity_oblivious_feedback(&ch, rh),
        ]
    };
    for (name, v) in ["cognizant", "oblivious", "oblivious_feedback"].iter().zip(values) {
        writeln!(out, "{name} {}", fmt_sig9(v))?;
    }
    Ok(())
}

fn read_config(path: &PathBuf) -> Result<ParsedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(0, format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn single_experiment(path: &PathBuf) -> Result<Experiment> {
    match read_config(path)? {
        ParsedConfig::Single(exp) => Ok(exp),
        ParsedConfig::Sweep(_) => Err(Error::config(0, "expected a single experiment, found lists")),
    }
}

fn simulate(args: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let parsed = read_config(&args.config)?;
    let workers = args.workers.unwrap_or_else(worker_count);
    let summaries = match parsed {
        ParsedConfig::Single(exp) => {
            if let Some(path) = &args.dump_codebook {
                if exp.scheme != SchemeKind::Cognizant {
                    return Err(Error::usage("--dump-codebook requires scheme = cognizant"));
                }
                let scheme = CognizantScheme::new(exp.config.clone())?;
                scheme.codebook().write_dump(BufWriter::new(File::create(path)?))?;
            }
            vec![with_workers(workers, || run_experiment(&exp))??]
        }
        ParsedConfig::Sweep(spec) => {
            if args.dump_codebook.is_some() {
                return Err(Error::usage("--dump-codebook needs a single experiment"));
            }
            with_workers(workers, || run_sweep(&spec))?
                .into_iter()
                .filter_map(|cell| match cell {
                    CellOutcome::Done(s) => Some(s),
                    CellOutcome::Skipped { cell, reason } => {
                        let _ = writeln!(err, "skipped cell {:?}: {reason}", cell.index);
                        None
                    }
                })
                .collect()
        }
    };
    let opts = CsvOptions { timing: args.timing };
    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            emit_csv_with(&summaries, &mut w, opts)?;
            w.flush()?;
        }
        None => emit_csv_with(&summaries, out, opts)?,
    }
    Ok(())
}
