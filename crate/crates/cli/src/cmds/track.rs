//! `vidtempo track`: plain association into tracklets, or single-object
//! tracking that initializes from the multi-object branch and re-acquires
//! through it after failures.

use std::path::PathBuf;

use clap::Args;
use vidtempo_core::associate;
use vidtempo_core::refine::RefinerConfig;
use vidtempo_core::sot::{SotConfig, SotTracker, TrackMode};

use super::PipelineOpts;
use crate::error::CliError;
use crate::io;
use crate::wire::{TrackletRecord, TrajectoryRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    /// Associate every object; output is tracklet rows.
    Mot,
    /// Follow one object; output is one trajectory row per frame.
    SotByDetection,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// JSON-Lines detection stream, or `-` for stdin.
    #[arg(default_value = "-")]
    pub input: String,
    /// Output destination (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Sequence length in frames; inferred as max frame + 1 when omitted.
    #[arg(long)]
    pub t_v: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Mot)]
    pub mode: ModeArg,
    /// Overlap gate for single-object candidate selection.
    #[arg(long, default_value_t = 0.3)]
    pub u_sos: f64,
    /// Reliability bar for adoption and refined emission.
    #[arg(long, default_value_t = 10)]
    pub s_sde: usize,
    /// Fusion weight base.
    #[arg(long, default_value_t = 10.0)]
    pub omega: f64,
    #[command(flatten)]
    pub pipeline: PipelineOpts,
}

fn mode_name(mode: TrackMode) -> &'static str {
    match mode {
        TrackMode::Mot => "mot",
        TrackMode::Sot => "sot",
    }
}

pub fn run(args: &TrackArgs) -> Result<(), CliError> {
    let videos = super::load_videos(&args.input, args.t_v, &args.pipeline)?;
    if videos.is_empty() {
        super::warn_empty(&args.input);
    }

    match args.mode {
        ModeArg::Mot => {
            let mut rows = Vec::new();
            for seq in &videos {
                let mut tracklets =
                    associate::run(seq, args.pipeline.assoc_config()).map_err(|source| {
                        CliError::Associate { video_id: seq.video_id.clone(), source }
                    })?;
                tracklets.sort_by_key(|t| t.id);
                for t in &tracklets {
                    rows.extend(TrackletRecord::rows_from_tracklet(&seq.video_id, t));
                }
            }
            io::write_text(args.output.as_deref(), &io::to_jsonl(&rows))
        }
        ModeArg::SotByDetection => {
            let sot_cfg = SotConfig {
                u_sos: args.u_sos,
                u_nms: args.pipeline.nms_threshold,
                score_threshold: args.pipeline.score_threshold,
            };
            let refiner_cfg =
                RefinerConfig { s_sde: args.s_sde, omega: args.omega, ..Default::default() };
            let mut rows = Vec::new();
            for seq in &videos {
                let mut tracker =
                    SotTracker::new(sot_cfg, args.pipeline.assoc_config(), refiner_cfg);
                for frame in &seq.frames {
                    let out = tracker.step(frame).map_err(|source| CliError::Associate {
                        video_id: seq.video_id.clone(),
                        source,
                    })?;
                    let mut row = TrajectoryRecord {
                        video_id: seq.video_id.clone(),
                        frame: out.frame,
                        mode: mode_name(out.mode).to_owned(),
                        track_id: None,
                        score: None,
                        cx: None,
                        cy: None,
                        w: None,
                        h: None,
                        switch_to: None,
                    };
                    if let Some(t) = &out.tracked {
                        row.track_id = Some(t.track_id);
                        row.score = Some(t.score);
                        row.cx = Some(t.bbox.cx);
                        row.cy = Some(t.bbox.cy);
                        row.w = Some(t.bbox.w);
                        row.h = Some(t.bbox.h);
                    }
                    if let Some(sw) = &out.switch {
                        row.switch_to = Some(mode_name(sw.to).to_owned());
                        if row.track_id.is_none() {
                            row.track_id = sw.track_id;
                        }
                    }
                    rows.push(row);
                }
            }
            io::write_text(args.output.as_deref(), &io::to_jsonl(&rows))
        }
    }
}
