//! `vidtempo bench`: time plain full-frame suppression against
//! overlap-gated candidate selection on one reproducible synthetic frame.

use clap::Args;
use serde::Serialize;
use vidtempo_core::nms;
use vidtempo_core::sot::{bench_candidate_selection, SotConfig};
use vidtempo_core::synth::{candidate_set, OverlapProfile};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProfileArg {
    /// ~30% of candidates crowd the tracked box, the rest scatter.
    Clustered,
    /// Everything scatters clear of the tracked box.
    Uniform,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1000)]
    pub candidates: usize,
    #[arg(long, value_enum, default_value_t = ProfileArg::Clustered)]
    pub profile: ProfileArg,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Timing repetitions; medians are reported.
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Overlap gate for the single-object route.
    #[arg(long, default_value_t = 0.3)]
    pub u_sos: f64,
    /// Suppression threshold used by both routes.
    #[arg(long, default_value_t = 0.5)]
    pub u_nms: f64,
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Serialize)]
struct BenchOut {
    candidates: usize,
    profile: &'static str,
    seed: u64,
    reps: usize,
    nms_ms: f64,
    sos_nms_ms: f64,
    /// sos_nms_ms / nms_ms — below 1 means the gated route is faster.
    ratio: f64,
    speedup: f64,
    survivors_after_gate: usize,
    survivors_after_nms: usize,
}

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    let profile = match args.profile {
        ProfileArg::Clustered => OverlapProfile::Clustered,
        ProfileArg::Uniform => OverlapProfile::Uniform,
    };
    let cfg = SotConfig { u_sos: args.u_sos, u_nms: args.u_nms, score_threshold: 0.0 };
    let reps = args.reps.max(1);
    let rec = bench_candidate_selection(args.candidates, profile, &cfg, args.seed, reps);

    let (_, candidates) = candidate_set(args.candidates, profile, args.seed);
    let survivors_after_nms = nms(&candidates, 0.0, args.u_nms).len();
    let out = BenchOut {
        candidates: rec.candidates,
        profile: match args.profile {
            ProfileArg::Clustered => "clustered",
            ProfileArg::Uniform => "uniform",
        },
        seed: args.seed,
        reps: rec.reps,
        nms_ms: rec.nms_ms,
        sos_nms_ms: rec.sos_nms_ms,
        ratio: if rec.nms_ms > 0.0 { rec.sos_nms_ms / rec.nms_ms } else { f64::INFINITY },
        speedup: rec.speedup,
        survivors_after_gate: rec.survivors_after_gate,
        survivors_after_nms,
    };

    if args.json {
        println!("{}", serde_json::to_string_pretty(&out).expect("bench row serializes"));
    } else {
        println!("candidates            {}", out.candidates);
        println!("profile               {}", out.profile);
        println!("seed                  {}", out.seed);
        println!("reps                  {}", out.reps);
        println!("nms_ms                {:.4}", out.nms_ms);
        println!("sos_nms_ms            {:.4}", out.sos_nms_ms);
        println!("ratio                 {:.3}", out.ratio);
        println!("speedup               {:.2}x", out.speedup);
        println!("survivors_after_gate  {}", out.survivors_after_gate);
        println!("survivors_after_nms   {}", out.survivors_after_nms);
    }
    Ok(())
}
