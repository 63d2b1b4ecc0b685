//! `vidtempo refine`: rebuild a stream through short-track suppression,
//! gap filling, and temporal fusion. The output is again a detection
//! stream, so it can feed straight back into `eval`.

use std::path::PathBuf;

use clap::Args;
use vidtempo_core::refine::{refine_stream, EmitMode, RefinerConfig};

use super::PipelineOpts;
use crate::error::CliError;
use crate::io;
use crate::wire::{DetectionRecord, TrackletRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EmitModeArg {
    /// Fully causal: a track's boxes appear only once it has proven out.
    OnlineDrop,
    /// Additionally replay the withheld early boxes at that moment.
    OfflineRetroemit,
}

impl From<EmitModeArg> for EmitMode {
    fn from(m: EmitModeArg) -> Self {
        match m {
            EmitModeArg::OnlineDrop => EmitMode::OnlineDrop,
            EmitModeArg::OfflineRetroemit => EmitMode::OfflineRetroemit,
        }
    }
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    /// JSON-Lines detection stream, or `-` for stdin.
    #[arg(default_value = "-")]
    pub input: String,
    /// Refined detection stream destination (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the refined boxes as tracklet rows (ids and fill flags).
    #[arg(long)]
    pub tracklets_out: Option<PathBuf>,
    /// Sequence length in frames; inferred as max frame + 1 when omitted.
    #[arg(long)]
    pub t_v: Option<usize>,
    /// Reliability bar: emit a track once its matched span exceeds this.
    #[arg(long, default_value_t = 10)]
    pub s_sde: usize,
    /// Fusion weight base.
    #[arg(long, default_value_t = 10.0)]
    pub omega: f64,
    #[arg(long, value_enum, default_value_t = EmitModeArg::OnlineDrop)]
    pub emit_mode: EmitModeArg,
    #[command(flatten)]
    pub pipeline: PipelineOpts,
}

pub fn run(args: &RefineArgs) -> Result<(), CliError> {
    let videos = super::load_videos(&args.input, args.t_v, &args.pipeline)?;
    if videos.is_empty() {
        super::warn_empty(&args.input);
    }

    let cfg =
        RefinerConfig { s_sde: args.s_sde, omega: args.omega, emit_mode: args.emit_mode.into() };
    let mut detections = Vec::new();
    let mut tracklets = Vec::new();
    for seq in &videos {
        let refined = refine_stream(seq, args.pipeline.assoc_config(), cfg)
            .map_err(|source| CliError::Associate { video_id: seq.video_id.clone(), source })?;
        for b in &refined.boxes {
            detections.push(DetectionRecord {
                video_id: seq.video_id.clone(),
                frame: b.frame,
                class_id: b.class_id,
                score: b.score,
                cx: b.bbox.cx,
                cy: b.bbox.cy,
                w: b.bbox.w,
                h: b.bbox.h,
            });
            if args.tracklets_out.is_some() {
                tracklets.push(TrackletRecord::from_refined(&seq.video_id, b));
            }
        }
    }

    io::write_text(args.output.as_deref(), &io::to_jsonl(&detections))?;
    if let Some(path) = &args.tracklets_out {
        io::write_text(Some(path), &io::to_jsonl(&tracklets))?;
    }
    Ok(())
}
