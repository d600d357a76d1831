use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bincue::cli::{cmd_behavior, cmd_report, cmd_stimulus, cmd_sweep, BehaviorInput, Overrides, RunConfig};
use bincue::Result;

/// Binaural cue simulation and localisation analysis.
///
/// Settings come from built-in defaults, then the `--config` TOML file,
/// then command-line flags, each overriding the previous.
#[derive(Parser, Debug)]
#[command(name = "bincue", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the 1.6 s localisation stimulus as a WAV file.
    Stimulus {
        /// Mono 1 s core audio at the configured rate; pink noise if absent.
        #[arg(long)]
        core: Option<PathBuf>,
    },
    /// Sweep ITD, ILD and IACC over azimuth, distance and condition.
    Sweep {
        #[arg(long)]
        azimuth_step: Option<f64>,
        /// Comma-separated distances in metres.
        #[arg(long, value_delimiter = ',')]
        distances: Option<Vec<f64>>,
    },
    /// Localisation and head-movement metrics from trial logs.
    Behavior {
        #[arg(long, required_unless_present = "fixture", conflicts_with = "fixture")]
        trials: Option<PathBuf>,
        #[arg(long, requires = "trials")]
        poses: Option<PathBuf>,
        /// Analyse a synthetic fixture generated from the seed instead.
        #[arg(long)]
        fixture: bool,
        /// Subjects in the synthetic fixture.
        #[arg(long, requires = "fixture")]
        subjects: Option<usize>,
    },
    /// Summary statistics from a cue table and/or subject metrics.
    Report {
        #[arg(long, required_unless_present = "metrics")]
        cues: Option<PathBuf>,
        /// `subject_metrics.csv` written by `behavior`.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut overrides = Overrides { seed: cli.seed, out_dir: cli.out.clone(), ..Overrides::default() };
    match &cli.command {
        Command::Sweep { azimuth_step, distances } => {
            overrides.azimuth_step_deg = *azimuth_step;
            overrides.distances_m = distances.clone();
        }
        Command::Behavior { subjects, .. } => overrides.subjects = *subjects,
        _ => {}
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    let say = |s: String| {
        if !cli.quiet {
            println!("{s}");
        }
    };
    match cli.command {
        Command::Stimulus { core } => {
            let o = cmd_stimulus(&cfg, core.as_deref())?;
            say(format!("wrote {} ({} frames at {} Hz)", o.wav_path.display(), o.frames, o.sample_rate_hz));
            let [a, b, c] = o.segment_boundaries_s;
            say(format!("segments: noise 0-{a} s, core {a}-{b} s, noise {b}-{c} s, tone {c}-1.6 s"));
            if o.placeholder_core {
                say("core: pink-noise placeholder".into());
            }
        }
        Command::Sweep { .. } => {
            let o = cmd_sweep(&cfg)?;
            say(format!("wrote {} rows to {}", o.table.rows().len(), cfg.out_dir.display()));
            for (c, m) in &o.mean_iacc {
                say(format!("mean IACC {c}: {m:.3}"));
            }
            if let Some(devs) = &o.deviations {
                for d in devs {
                    say(format!(
                        "ILD deviation at {} m: raw {:.2} dB, normalized {:.2} dB",
                        d.distance_m, d.raw_rms_db, d.normalized_rms_db
                    ));
                }
            }
        }
        Command::Behavior { trials, poses, fixture, .. } => {
            let input = if fixture {
                BehaviorInput::Fixture
            } else {
                BehaviorInput::Files { trials: trials.expect("required by clap"), poses }
            };
            let o = cmd_behavior(&cfg, &input)?;
            say(format!(
                "{} trials, {} groups, {} rejected rows; wrote {}",
                o.n_trials,
                o.localisation.len(),
                o.rejects.len(),
                cfg.out_dir.display()
            ));
        }
        Command::Report { cues, metrics } => {
            let text = cmd_report(&cfg, cues.as_deref(), metrics.as_deref())?;
            say(text);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
