//! `vidtempo` — analytics for video object detection streams: score their
//! temporal quality without ground truth, refine them online, track through
//! them, generate synthetic ones, and export plot-ready tables.

mod cmds;
mod error;
mod io;
mod specfile;
mod wire;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "vidtempo", version, about = "Temporal quality analytics for detection streams")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Score a stream for recall continuity and localization stability.
    Eval(cmds::eval::EvalArgs),
    /// Suppress short tracks, fill gaps, and fuse locations.
    Refine(cmds::refine::RefineArgs),
    /// Associate into tracklets, or follow a single object.
    Track(cmds::track::TrackArgs),
    /// Generate a stream with known injected defects.
    Synth(cmds::synth::SynthArgs),
    /// Time plain suppression against overlap-gated selection.
    Bench(cmds::bench::BenchArgs),
    /// Export per-tracklet curves and spectra as CSV.
    PlotData(cmds::plotdata::PlotDataArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Eval(args) => cmds::eval::run(args),
        Cmd::Refine(args) => cmds::refine::run(args),
        Cmd::Track(args) => cmds::track::run(args),
        Cmd::Synth(args) => cmds::synth::run(args),
        Cmd::Bench(args) => cmds::bench::run(args),
        Cmd::PlotData(args) => cmds::plotdata::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
