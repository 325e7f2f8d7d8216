//! `pestvision` command line: batch detection, evaluation, controller
//! simulation and synthetic scene generation.
//!
//! Exit codes: 0 success, 2 some inputs unreadable, 3 alarm raised by
//! `simulate`, 64 usage or configuration error, 65 malformed data,
//! 66 missing input, 70 internal error, 73 output cannot be created.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod detect;
pub mod eval;
pub mod exit;
pub mod files;
pub mod generate;
pub mod simulate;

#[derive(Debug, Parser)]
#[command(name = "pestvision", version, about = "Detect triangular moth markings in crop images")]
pub struct Cli {
    /// More diagnostics on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the detector over every image in a directory.
    Detect(DetectArgs),
    /// Score detections against ground-truth annotations.
    Eval(EvalArgs),
    /// Drive the arm controller with a similarity stream.
    Simulate(SimulateArgs),
    /// Write seeded synthetic scenes with annotations.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory of template patch images.
    #[arg(long)]
    pub templates: PathBuf,
    /// Reference contour image; repeat for several exemplars.
    #[arg(long = "reference", required = true)]
    pub references: Vec<PathBuf>,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write annotated copies of every frame.
    #[arg(long)]
    pub annotate: bool,
    /// Overrides the `stride` key.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Overrides any configuration key, e.g. `--set match_threshold=0.75`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// JSON-lines detections written by `detect`.
    #[arg(long)]
    pub detections: PathBuf,
    /// Directory of `<frame>.json` annotation files.
    #[arg(long)]
    pub truth: PathBuf,
    /// Match by overlap instead of centroid containment.
    #[arg(long, value_name = "MIN_IOU")]
    pub iou: Option<f64>,
    /// Also write the report as JSON to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Print JSON instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// CSV of per-frame similarities, or a `manifest.json` from `detect`.
    #[arg(long)]
    pub stream: PathBuf,
    /// Configuration file for the controller keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Transcript CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub count: usize,
    /// Frame size as WIDTHxHEIGHT.
    #[arg(long, value_parser = parse_size, default_value = "640x480")]
    pub size: (usize, usize),
    #[arg(long, default_value = "generated")]
    pub out: PathBuf,
    /// Distractor blobs per scene.
    #[arg(long, default_value_t = 3)]
    pub clutter: usize,
    /// Most insects per scene; scene `i` gets `1 + i % max` of them.
    #[arg(long, default_value_t = 3)]
    pub max_insects: usize,
    /// Overwrite existing files.
    #[arg(long)]
    pub force: bool,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let dim = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    let (w, h) = (dim(w)?, dim(h)?);
    if w < 64 || h < 64 {
        return Err(format!("scenes need at least 64x64 pixels, got {w}x{h}"));
    }
    Ok((w, h))
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().format_timestamp(None).try_init();

    let result = match &cli.command {
        Command::Detect(a) => detect::run(a),
        Command::Eval(a) => eval::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Generate(a) => generate::run(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            log::error!("{f}");
            f.code
        }
    }
}
