//! Subcommand implementations plus the stream-loading pipeline they share.

pub mod bench;
pub mod eval;
pub mod plotdata;
pub mod refine;
pub mod synth;
pub mod track;

use std::collections::BTreeMap;

use clap::Args;
use vidtempo_core::associate::AssociatorConfig;
use vidtempo_core::{nms, Detection, VideoSequence};

use crate::error::CliError;
use crate::io;
use crate::wire::DetectionRecord;

/// Flags shared by every stream-consuming subcommand.
#[derive(Debug, Clone, Copy, Args)]
pub struct PipelineOpts {
    /// Score floor applied before suppression and matching.
    #[arg(long, default_value_t = 0.5)]
    pub score_threshold: f64,
    /// Same-class IoU above which the lower-scored box is suppressed.
    #[arg(long, default_value_t = 0.5)]
    pub nms_threshold: f64,
    /// Minimum IoU for a detection to continue a track.
    #[arg(long, default_value_t = 0.3)]
    pub assoc_iou: f64,
    /// Consecutive missed frames a track survives.
    #[arg(long, default_value_t = 10)]
    pub s_lost_max: usize,
    /// Recent-observation window kept per track.
    #[arg(long, default_value_t = 5)]
    pub s_obj_max: usize,
}

impl Default for PipelineOpts {
    fn default() -> Self {
        Self {
            score_threshold: 0.5,
            nms_threshold: 0.5,
            assoc_iou: 0.3,
            s_lost_max: 10,
            s_obj_max: 5,
        }
    }
}

impl PipelineOpts {
    pub fn assoc_config(&self) -> AssociatorConfig {
        AssociatorConfig {
            score_threshold: self.score_threshold,
            iou_threshold: self.assoc_iou,
            s_lost_max: self.s_lost_max,
            s_obj_max: self.s_obj_max,
        }
    }
}

/// Reads a detection stream and regroups it into one suppressed sequence
/// per video. Records may arrive frame-unsorted; each video's length is
/// `t_v_override` or its highest frame index + 1. BTreeMap grouping keeps
/// video order (and therefore every downstream artifact) deterministic.
pub fn load_videos(
    input: &str,
    t_v_override: Option<usize>,
    opts: &PipelineOpts,
) -> Result<Vec<VideoSequence>, CliError> {
    let text = io::read_input(input)?;
    let records: Vec<(usize, DetectionRecord)> = io::parse_jsonl(input, &text)?;

    let mut by_video: BTreeMap<String, Vec<Detection>> = BTreeMap::new();
    for (line, rec) in &records {
        let det = rec.to_detection();
        det.validate().map_err(|source| CliError::Record {
            path: io::display_path(input).to_owned(),
            line: *line,
            source,
        })?;
        by_video.entry(rec.video_id.clone()).or_default().push(det);
    }

    let mut out = Vec::with_capacity(by_video.len());
    for (video_id, dets) in by_video {
        let t_v =
            t_v_override.unwrap_or_else(|| dets.iter().map(|d| d.frame).max().unwrap_or(0) + 1);
        let seq = VideoSequence::from_detections(video_id.clone(), t_v, dets)
            .map_err(|source| CliError::Stream { video_id, source })?;
        out.push(suppress(seq, opts));
    }
    Ok(out)
}

/// Per-frame same-class suppression, applied once before any matching.
pub fn suppress(mut seq: VideoSequence, opts: &PipelineOpts) -> VideoSequence {
    for frame in &mut seq.frames {
        frame.detections = nms(&frame.detections, opts.score_threshold, opts.nms_threshold);
    }
    seq
}

pub fn warn_empty(input: &str) {
    eprintln!(
        "warning: no records in {}; output reflects an empty stream",
        io::display_path(input)
    );
}
