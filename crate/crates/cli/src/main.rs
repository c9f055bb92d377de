use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use colortouch::classify::Method;
use colortouch_cli::{
    cmd_export_bars, cmd_generate, cmd_infer, cmd_render, cmd_train_eval, load_config, InferInput,
    Mode, TrainEvalArgs,
};

#[derive(Parser)]
#[command(
    name = "colortouch",
    version,
    about = "Color-coded optical tactile sensor simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; defaults apply to anything it omits.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a calibration sweep and write it as CSV.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Master seed; defaults to the configured optics seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split by trial, cross-validate, train and report accuracies.
    TrainEval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
        /// Classifier; repeat to run several. All four when omitted.
        #[arg(long, value_parser = parse_method)]
        method: Vec<Method>,
        #[arg(long, default_value = "flat")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        train_trials: usize,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// JSON report; a `.txt` table is written next to it.
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
        /// Save the final trained model (single method only).
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Classify one frame or response vector with a saved model.
    Infer {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// Binary PPM camera frame.
        #[arg(
            long,
            conflicts_with = "response",
            required_unless_present = "response"
        )]
        frame: Option<PathBuf>,
        /// CSV row with the 27 feature values.
        #[arg(long)]
        response: Option<PathBuf>,
    },
    /// Write per-state mean feature vectors for bar charts.
    ExportBars {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        locations: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the camera frame of one contact state as PPM.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        location: usize,
        #[arg(long)]
        level: usize,
        /// Noise seed; the frame is noiseless when omitted.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: colortouch::Error| e.to_string())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { common, seed, out } => {
            let config = load_config(common.config.as_deref())?;
            let seed = seed.unwrap_or(config.optics.rng_seed);
            println!("{}", cmd_generate(&config, &out, seed)?);
        }
        Command::TrainEval {
            common,
            dataset,
            method,
            mode,
            seed,
            train_trials,
            folds,
            out,
            model_out,
        } => {
            let config = load_config(common.config.as_deref())?;
            let methods = if method.is_empty() {
                Method::ALL.to_vec()
            } else {
                method
            };
            let report = cmd_train_eval(
                &config,
                &TrainEvalArgs {
                    dataset,
                    methods,
                    mode,
                    seed,
                    train_trials,
                    folds,
                    model_out,
                },
            )?;
            report.write(&out)?;
            print!("{}", report.to_text());
        }
        Command::Infer {
            common,
            model,
            frame,
            response,
        } => {
            let config = load_config(common.config.as_deref())?;
            let input = match (frame, response) {
                (Some(f), _) => InferInput::Frame(f),
                (None, Some(r)) => InferInput::Response(r),
                (None, None) => unreachable!("clap requires one input"),
            };
            println!("{}", cmd_infer(&config, &model, &input)?);
        }
        Command::ExportBars {
            dataset,
            locations,
            levels,
            out,
        } => {
            let rows = cmd_export_bars(&dataset, &locations, &levels, &out)?;
            println!("{} rows written to {}", rows.len(), out.display());
        }
        Command::Render {
            common,
            location,
            level,
            seed,
            out,
        } => {
            let config = load_config(common.config.as_deref())?;
            cmd_render(
                &config,
                location,
                level,
                seed.unwrap_or(0),
                seed.is_some(),
                &out,
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
