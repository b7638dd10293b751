//! Command-line front end. Each subcommand reads and writes files so the
//! pipeline can be run, inspected and resumed stage by stage.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use routeseg::audio::Representation;
use routeseg::canvas::RadarProfile;
use routeseg::Error;

#[derive(Parser, Debug)]
#[command(name = "routeseg", version, about = "Weakly-supervised route segmentation for scanning radar")]
pub struct Cli {
    /// Global seed; overrides the value in the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Pipeline configuration (JSON). Defaults are used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads. Every stage is single-threaded, so only 1 is accepted.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a world, drive it and record every sensor stream.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_profile)]
        profile: Option<RadarProfile>,
    },
    /// Time-frequency image of a WAV file, as PGM or CSV (by extension).
    Features {
        #[arg(long)]
        wav: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_representation)]
        representation: Option<Representation>,
    },
    /// Train the terrain classifier on a synthetic recording campaign.
    TrainAudio {
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a classifier on a fresh campaign, or build the representation table.
    EvalAudio {
        #[arg(long, required_unless_present = "table")]
        model: Option<PathBuf>,
        /// Compare all representations over several trials instead.
        #[arg(long)]
        table: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        min_accuracy: Option<f64>,
    },
    /// Fuse odometry and GPS of a run into `fused.csv`.
    Fuse {
        #[arg(long)]
        run: PathBuf,
    },
    /// Classify a run's audio and paint terrain labels into its scans.
    Paint {
        #[arg(long)]
        run: PathBuf,
        /// Directory holding `classifier.kowt` and `classifier.json`.
        #[arg(long)]
        model: PathBuf,
    },
    /// Train the segmenter: stage 1 on painted labels, stage 2 on propagated ones.
    TrainSeg {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        stage: u8,
        #[arg(long = "run", required = true)]
        runs: Vec<PathBuf>,
        /// Stage-1 model to fine-tune (stage 2 only), as a path without extension.
        #[arg(long)]
        init: Option<PathBuf>,
        /// Output model path without extension.
        #[arg(long)]
        out: PathBuf,
    },
    /// Complete the painted labels of a run with a stage-1 model.
    Propagate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        run: PathBuf,
    },
    /// Segment every scan of a run into `segmentation/`.
    Segment {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        run: PathBuf,
    },
    /// Score predicted masks against ground truth.
    EvalSeg {
        /// Directory of predicted masks (values above 127 are path).
        #[arg(long)]
        pred: PathBuf,
        /// Run directory holding `truth_masks/` and `run.json`.
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        min_accuracy: Option<f64>,
        #[arg(long)]
        min_iou: Option<f64>,
    },
    /// Composite a scan and a label mask into a PPM.
    Render {
        /// Rendered scan (PGM) or raw polar scan (RDS).
        #[arg(long)]
        scan: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the whole pipeline and write every artefact.
    Reproduce {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_profile(s: &str) -> Result<RadarProfile, String> {
    match s {
        "short" => Ok(RadarProfile::Short),
        "long" => Ok(RadarProfile::Long),
        _ => Err(format!("unknown radar profile {:?} (short or long)", s)),
    }
}

fn parse_representation(s: &str) -> Result<Representation, String> {
    Representation::parse(s).map_err(|e| e.to_string())
}

/// Outcome of a subcommand that completed without an error.
pub enum Outcome {
    Ok,
    GateFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match commands::run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::GateFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {}", e);
            match e {
                Error::Input(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
