//! `vidtempo synth`: generate a detection stream with known injected
//! defects, plus a ledger of what was actually injected.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use vidtempo_core::synth::{self, DefectLedger};

use crate::error::CliError;
use crate::io;
use crate::specfile::SynthSpecFile;
use crate::wire::DetectionRecord;

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Spec document (JSON), or `-` for stdin.
    #[arg(long)]
    pub spec: String,
    /// Overrides the spec's RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Detection stream destination (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the defect ledger.
    #[arg(long)]
    pub ledger: Option<PathBuf>,
}

/// Serialized twin of the generator's ledger.
#[derive(Debug, Serialize)]
struct LedgerOut {
    video_id: String,
    t_v: usize,
    seed: u64,
    tracks: Vec<LedgerTrackOut>,
    ghosts: Vec<LedgerGhostOut>,
}

#[derive(Debug, Serialize)]
struct LedgerTrackOut {
    spec_index: usize,
    class_id: i64,
    emitted: usize,
    span: Option<(usize, usize)>,
    t_n: usize,
    om: usize,
}

#[derive(Debug, Serialize)]
struct LedgerGhostOut {
    first_frame: usize,
    length: usize,
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
}

impl LedgerOut {
    fn new(video_id: &str, ledger: &DefectLedger) -> Self {
        Self {
            video_id: video_id.to_owned(),
            t_v: ledger.t_v,
            seed: ledger.seed,
            tracks: ledger
                .tracks
                .iter()
                .map(|t| LedgerTrackOut {
                    spec_index: t.spec_index,
                    class_id: t.class_id,
                    emitted: t.emitted,
                    span: t.span,
                    t_n: t.t_n,
                    om: t.om,
                })
                .collect(),
            ghosts: ledger
                .ghosts
                .iter()
                .map(|g| LedgerGhostOut {
                    first_frame: g.first_frame,
                    length: g.length,
                    cx: g.bbox.cx,
                    cy: g.bbox.cy,
                    w: g.bbox.w,
                    h: g.bbox.h,
                })
                .collect(),
        }
    }
}

pub fn run(args: &SynthArgs) -> Result<(), CliError> {
    let text = io::read_input(&args.spec)?;
    let spec = SynthSpecFile::parse(&args.spec, &text)?;
    let (seq, ledger) = synth::generate(
        &spec.video_id,
        spec.t_v,
        &spec.track_specs(),
        &spec.perturbation(args.seed),
    )
    .map_err(|source| CliError::Spec { path: io::display_path(&args.spec).to_owned(), source })?;

    let rows: Vec<DetectionRecord> = seq
        .frames
        .iter()
        .flat_map(|f| f.detections.iter())
        .map(|d| DetectionRecord::from_detection(&seq.video_id, d))
        .collect();
    io::write_text(args.output.as_deref(), &io::to_jsonl(&rows))?;

    if let Some(path) = &args.ledger {
        let mut text = serde_json::to_string_pretty(&LedgerOut::new(&seq.video_id, &ledger))
            .expect("ledger serializes");
        text.push('\n');
        io::write_text(Some(path), &text)?;
    }
    Ok(())
}
