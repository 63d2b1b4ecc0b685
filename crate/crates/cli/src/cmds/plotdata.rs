//! `vidtempo plot-data`: dump per-tracklet channel curves and their DFT
//! spectra as CSV. Input is either a raw detection stream (associated
//! here first) or tracklet rows (taken as given); it is treated as
//! tracklet rows exactly when every record carries a `track_id`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args};
use serde::Serialize;
use vidtempo_core::associate::{self, HistoryEntry, Tracklet};
use vidtempo_core::metrics::{channel_series, dft_amplitudes, CHANNELS};

use super::PipelineOpts;
use crate::error::CliError;
use crate::io;
use crate::wire::TrackletRecord;

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("tables").required(true).multiple(true).args(["curves", "spectrum"])))]
pub struct PlotDataArgs {
    /// JSON-Lines detections or tracklet rows, or `-` for stdin.
    #[arg(default_value = "-")]
    pub input: String,
    /// Channel-value rows per frame; misses become explicit rows.
    #[arg(long)]
    pub curves: Option<PathBuf>,
    /// DFT magnitude rows per tracklet channel.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    /// Sequence length in frames; inferred as max frame + 1 when omitted.
    #[arg(long)]
    pub t_v: Option<usize>,
    #[command(flatten)]
    pub pipeline: PipelineOpts,
}

#[derive(Debug, Serialize)]
struct CurveRow<'a> {
    video_id: &'a str,
    track_id: u64,
    frame: usize,
    channel: &'static str,
    value: Option<f64>,
    missed: bool,
}

#[derive(Debug, Serialize)]
struct SpectrumRow<'a> {
    video_id: &'a str,
    track_id: u64,
    channel: &'static str,
    q: f64,
    amplitude: f64,
    /// Jitter band: anything above 0.1 cycles per frame.
    high_freq: bool,
}

/// Rebuilds tracklets from explicit rows: rows grouped per (video, track),
/// gaps in the frame range become misses.
fn tracklets_from_rows(
    path: &str,
    rows: Vec<(usize, TrackletRecord)>,
    s_obj_max: usize,
) -> Result<BTreeMap<String, Vec<Tracklet>>, CliError> {
    let mut grouped: BTreeMap<(String, u64), BTreeMap<usize, (usize, TrackletRecord)>> =
        BTreeMap::new();
    for (line, rec) in rows {
        let det = rec.to_detection();
        det.validate().map_err(|source| CliError::Record {
            path: io::display_path(path).to_owned(),
            line,
            source,
        })?;
        let key = (rec.video_id.clone(), rec.track_id);
        if let Some((_, dup)) = grouped.entry(key).or_default().insert(rec.frame, (line, rec)) {
            return Err(CliError::DuplicateTrackFrame {
                video_id: dup.video_id,
                track_id: dup.track_id,
                frame: dup.frame,
            });
        }
    }

    let mut out: BTreeMap<String, Vec<Tracklet>> = BTreeMap::new();
    for ((video_id, track_id), by_frame) in grouped {
        let first = *by_frame.keys().next().expect("group is non-empty");
        let last = *by_frame.keys().next_back().expect("group is non-empty");
        let class_id = by_frame.values().next().expect("group is non-empty").1.class_id;
        let history: Vec<HistoryEntry> = (first..=last)
            .map(|frame| match by_frame.get(&frame) {
                Some((_, rec)) => HistoryEntry::Matched(rec.to_detection()),
                None => HistoryEntry::Missed,
            })
            .collect();
        let tracklet = Tracklet::from_history(track_id, class_id, first, history, s_obj_max)
            .map_err(|source| CliError::Associate { video_id: video_id.clone(), source })?;
        out.entry(video_id).or_default().push(tracklet);
    }
    Ok(out)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for row in rows {
        wtr.serialize(row).expect("csv rows serialize");
    }
    let bytes = wtr.into_inner().expect("csv buffer flushes");
    let text = String::from_utf8(bytes).expect("csv output is utf-8");
    io::write_text(Some(path), &text)
}

pub fn run(args: &PlotDataArgs) -> Result<(), CliError> {
    let text = io::read_input(&args.input)?;
    let values: Vec<(usize, serde_json::Value)> = io::parse_jsonl(&args.input, &text)?;
    let tracklet_mode =
        !values.is_empty() && values.iter().all(|(_, v)| v.get("track_id").is_some());

    let by_video: BTreeMap<String, Vec<Tracklet>> = if tracklet_mode {
        let mut rows = Vec::with_capacity(values.len());
        for (line, value) in values {
            let rec: TrackletRecord = serde_json::from_value(value).map_err(|source| {
                CliError::Parse { path: io::display_path(&args.input).to_owned(), line, source }
            })?;
            rows.push((line, rec));
        }
        tracklets_from_rows(&args.input, rows, args.pipeline.s_obj_max)?
    } else {
        if values.is_empty() {
            super::warn_empty(&args.input);
        }
        let videos = super::load_videos(&args.input, args.t_v, &args.pipeline)?;
        let mut out = BTreeMap::new();
        for seq in &videos {
            let mut tracklets = associate::run(seq, args.pipeline.assoc_config())
                .map_err(|source| CliError::Associate { video_id: seq.video_id.clone(), source })?;
            tracklets.sort_by_key(|t| t.id);
            out.insert(seq.video_id.clone(), tracklets);
        }
        out
    };

    if let Some(path) = &args.curves {
        let mut rows = Vec::new();
        for (video_id, tracklets) in &by_video {
            for t in tracklets {
                for channel in CHANNELS {
                    for (i, entry) in t.history.iter().enumerate() {
                        rows.push(CurveRow {
                            video_id,
                            track_id: t.id,
                            frame: t.first_frame + i,
                            channel: channel.name(),
                            value: entry.detection().map(|d| channel.of(&d.bbox)),
                            missed: entry.detection().is_none(),
                        });
                    }
                }
            }
        }
        write_csv(path, &rows)?;
    }

    if let Some(path) = &args.spectrum {
        let mut rows = Vec::new();
        for (video_id, tracklets) in &by_video {
            for t in tracklets {
                for channel in CHANNELS {
                    let series = channel_series(t, channel);
                    for p in dft_amplitudes(&series) {
                        rows.push(SpectrumRow {
                            video_id,
                            track_id: t.id,
                            channel: channel.name(),
                            q: p.q,
                            amplitude: p.amplitude,
                            high_freq: p.q > 0.1,
                        });
                    }
                }
            }
        }
        write_csv(path, &rows)?;
    }
    Ok(())
}
