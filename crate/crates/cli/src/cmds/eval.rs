//! `vidtempo eval`: score a detection stream for recall continuity and
//! localization stability, with no ground truth involved.

use std::path::PathBuf;

use clap::Args;
use vidtempo_core::associate;
use vidtempo_core::metrics::{self, MetricsConfig, SequenceReport};

use super::PipelineOpts;
use crate::error::CliError;
use crate::io;
use crate::wire::{AggregateOut, ReportConfig, ReportFile, VideoReport};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// JSON-Lines detection stream, or `-` for stdin.
    #[arg(default_value = "-")]
    pub input: String,
    /// Report destination (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Sequence length in frames; inferred as max frame + 1 when omitted.
    #[arg(long)]
    pub t_v: Option<usize>,
    /// Duration cutoff for the ephemeral short-tracklet score.
    #[arg(long, default_value_t = 3)]
    pub s_esde: usize,
    /// Duration cutoff for the broader short-tracklet score.
    #[arg(long, default_value_t = 10)]
    pub s_sde: usize,
    /// Report raw error ratios only, skipping the log-contrast map.
    #[arg(long)]
    pub no_log: bool,
    #[command(flatten)]
    pub pipeline: PipelineOpts,
}

pub fn run(args: &EvalArgs) -> Result<(), CliError> {
    let videos = super::load_videos(&args.input, args.t_v, &args.pipeline)?;
    if videos.is_empty() {
        super::warn_empty(&args.input);
    }

    let cfg = MetricsConfig { s_esde: args.s_esde, s_sde: args.s_sde };
    let mut reports: Vec<(String, SequenceReport)> = Vec::with_capacity(videos.len());
    for seq in &videos {
        let tracklets = associate::run(seq, args.pipeline.assoc_config())
            .map_err(|source| CliError::Associate { video_id: seq.video_id.clone(), source })?;
        let report = metrics::evaluate(&tracklets, seq.t_v, &cfg)
            .map_err(|source| CliError::Metrics { video_id: seq.video_id.clone(), source })?;
        reports.push((seq.video_id.clone(), report));
    }

    let pooled: Vec<SequenceReport> = reports.iter().map(|(_, r)| r.clone()).collect();
    let aggregate = metrics::aggregate(&pooled);
    let log = !args.no_log;
    let file = ReportFile {
        config: ReportConfig {
            score_threshold: args.pipeline.score_threshold,
            nms_threshold: args.pipeline.nms_threshold,
            assoc_iou: args.pipeline.assoc_iou,
            s_lost_max: args.pipeline.s_lost_max,
            s_obj_max: args.pipeline.s_obj_max,
            s_esde: args.s_esde,
            s_sde: args.s_sde,
            log,
        },
        videos: reports.iter().map(|(id, r)| VideoReport::new(id, r, log)).collect(),
        aggregate: AggregateOut::new(&aggregate, log),
    };

    let mut text = serde_json::to_string_pretty(&file).expect("report serializes");
    text.push('\n');
    io::write_text(args.output.as_deref(), &text)
}
