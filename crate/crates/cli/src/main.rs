use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use urbansynth::config::{load_config, ConfigError, Overrides, ScenarioConfig};
use urbansynth::pipeline::{preview_frame, run_pipeline};

/// Environment variable naming the default output root.
const OUT_ENV: &str = "URBANSYNTH_OUT";

#[derive(Parser)]
#[command(name = "urbansynth", version, about = "Synthetic urban-traffic dataset generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and list every problem found.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Generate the full dataset.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Render the single frame at a capture time.
    Preview {
        config: PathBuf,
        /// Seconds since capture start.
        #[arg(long, allow_negative_numbers = true)]
        time: f64,
        #[command(flatten)]
        overrides: OverrideArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct OverrideArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    frames: Option<u64>,
    /// sunny, cloudy, rainy or foggy.
    #[arg(long)]
    weather: Option<String>,
    /// Clock hour at capture start, in [0, 24).
    #[arg(long)]
    time_of_day: Option<f64>,
}

impl From<&OverrideArgs> for Overrides {
    fn from(a: &OverrideArgs) -> Self {
        Overrides {
            seed: a.seed,
            frames: a.frames,
            weather: a.weather.clone(),
            time_of_day: a.time_of_day,
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory. Defaults to the scenario's `output`, else
    /// `$URBANSYNTH_OUT/<scenario>`, else `out/<scenario>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; output is identical for any count.
    #[arg(long)]
    threads: Option<usize>,
}

fn output_dir(cfg: &ScenarioConfig, args: &OutputArgs) -> PathBuf {
    if let Some(o) = &args.out {
        return o.clone();
    }
    if let Some(o) = &cfg.output {
        return o.clone();
    }
    let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"));
    root.join(&cfg.name)
}

fn load(path: &Path, overrides: &OverrideArgs) -> Result<ScenarioConfig, ConfigError> {
    load_config(path, &overrides.into())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            println!(
                "{}: ok ({} frames at {} Hz, {}x{}, seed {})",
                config.display(),
                cfg.capture().frames,
                cfg.capture().rate,
                cfg.capture().width,
                cfg.capture().height,
                cfg.seed()
            );
        }
        Command::Run {
            config,
            overrides,
            output,
        } => {
            let cfg = load(&config, &overrides)?;
            let out = output_dir(&cfg, &output);
            let total = cfg.capture().frames;
            let step = (total / 10).max(1);
            let mut shown = 0;
            let summary = run_pipeline(&cfg, &out, output.threads, |done| {
                if done >= shown + step || done == total {
                    eprintln!("  {done}/{total} frames");
                    shown = done;
                }
            })
            .with_context(|| format!("generating {}", out.display()))?;
            let m = &summary.manifest;
            println!(
                "wrote {} frames ({} vehicles) to {} in {:.2} s: {:.2} fps",
                m.frame_count,
                m.vehicle_count,
                out.display(),
                m.timing.elapsed_s,
                m.timing.fps
            );
        }
        Command::Preview {
            config,
            time,
            overrides,
            output,
        } => {
            let cfg = load(&config, &overrides)?;
            let out = output_dir(&cfg, &output);
            let b = urbansynth::par::with_threads(output.threads, || preview_frame(&cfg, time, &out))
                .with_context(|| format!("previewing t = {time} s"))?;
            println!("wrote frame {} (t = {:.3} s, {} boxes) to {}", b.frame, b.time, b.boxes.len(), out.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // bad arguments count as configuration errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
