//! On-disk shapes: JSON-Lines rows for streams and tracklets, one JSON
//! document for score reports. Unknown fields in rows are ignored on read;
//! key names are part of the CLI contract.

use serde::{Deserialize, Serialize};
use vidtempo_core::associate::Tracklet;
use vidtempo_core::metrics::{AggregateReport, ContinuityErrors, SequenceReport};
use vidtempo_core::refine::RefinedBox;
use vidtempo_core::{BBox, Detection};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub video_id: String,
    pub frame: usize,
    pub class_id: i64,
    pub score: f64,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl DetectionRecord {
    pub fn to_detection(&self) -> Detection {
        Detection::new(
            self.frame,
            self.class_id,
            self.score,
            BBox::new(self.cx, self.cy, self.w, self.h),
        )
    }

    pub fn from_detection(video_id: &str, d: &Detection) -> Self {
        Self {
            video_id: video_id.to_owned(),
            frame: d.frame,
            class_id: d.class_id,
            score: d.score,
            cx: d.bbox.cx,
            cy: d.bbox.cy,
            w: d.bbox.w,
            h: d.bbox.h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackletRecord {
    pub video_id: String,
    pub track_id: u64,
    pub frame: usize,
    pub class_id: i64,
    pub score: f64,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    /// True for boxes produced by gap filling rather than a detector.
    #[serde(default)]
    pub interpolated: bool,
}

impl TrackletRecord {
    pub fn from_refined(video_id: &str, r: &RefinedBox) -> Self {
        Self {
            video_id: video_id.to_owned(),
            track_id: r.track_id,
            frame: r.frame,
            class_id: r.class_id,
            score: r.score,
            cx: r.bbox.cx,
            cy: r.bbox.cy,
            w: r.bbox.w,
            h: r.bbox.h,
            interpolated: r.interpolated,
        }
    }

    /// One row per matched slot; interior misses leave no row.
    pub fn rows_from_tracklet(video_id: &str, t: &Tracklet) -> Vec<Self> {
        t.history
            .iter()
            .enumerate()
            .filter_map(|(i, entry)| entry.detection().map(|d| (t.first_frame + i, d)))
            .map(|(frame, d)| Self {
                video_id: video_id.to_owned(),
                track_id: t.id,
                frame,
                class_id: t.class_id,
                score: d.score,
                cx: d.bbox.cx,
                cy: d.bbox.cy,
                w: d.bbox.w,
                h: d.bbox.h,
                interpolated: false,
            })
            .collect()
    }

    pub fn to_detection(&self) -> Detection {
        Detection::new(
            self.frame,
            self.class_id,
            self.score,
            BBox::new(self.cx, self.cy, self.w, self.h),
        )
    }
}

/// One per-frame row of a single-object tracking run. `mode` is the branch
/// that processed the frame; box fields are present on successful SOT
/// frames; `switch_to` marks a mode change decided on this frame (it takes
/// effect on the next one). `track_id` names the tracked or adopted track.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub video_id: String,
    pub frame: usize,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track_id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch_to: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorsOut {
    pub esde: f64,
    pub sde: f64,
    pub tfe: f64,
    pub ftr: f64,
}

impl From<ContinuityErrors> for ErrorsOut {
    fn from(e: ContinuityErrors) -> Self {
        Self { esde: e.esde, sde: e.sde, tfe: e.tfe, ftr: e.ftr }
    }
}

/// Pipeline settings echoed into every report so a result file is
/// self-describing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub score_threshold: f64,
    pub nms_threshold: f64,
    pub assoc_iou: f64,
    pub s_lost_max: usize,
    pub s_obj_max: usize,
    pub s_esde: usize,
    pub s_sde: usize,
    pub log: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoReport {
    pub video_id: String,
    pub t_v: usize,
    pub n_tracklets: usize,
    pub total_t_n: usize,
    pub raw: ErrorsOut,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logged: Option<ErrorsOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rce: Option<f64>,
    pub cje: f64,
    pub sje: f64,
    pub lje: f64,
}

impl VideoReport {
    pub fn new(video_id: &str, r: &SequenceReport, log: bool) -> Self {
        Self {
            video_id: video_id.to_owned(),
            t_v: r.t_v,
            n_tracklets: r.n_tracklets,
            total_t_n: r.total_t_n,
            raw: r.raw.into(),
            logged: log.then(|| r.logged.into()),
            rce: log.then_some(r.rce),
            cje: r.cje,
            sje: r.sje,
            lje: r.lje,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateOut {
    pub n_videos: usize,
    pub total_t_v: usize,
    pub n_tracklets: usize,
    pub raw: ErrorsOut,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logged: Option<ErrorsOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rce: Option<f64>,
    pub cje: f64,
    pub sje: f64,
    pub lje: f64,
}

impl AggregateOut {
    pub fn new(a: &AggregateReport, log: bool) -> Self {
        Self {
            n_videos: a.n_videos,
            total_t_v: a.total_t_v,
            n_tracklets: a.n_tracklets,
            raw: a.raw.into(),
            logged: log.then(|| a.logged.into()),
            rce: log.then_some(a.rce),
            cje: a.cje,
            sje: a.sje,
            lje: a.lje,
        }
    }
}

/// The one-document score report: pooled scores plus a per-video breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub config: ReportConfig,
    pub videos: Vec<VideoReport>,
    pub aggregate: AggregateOut,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detection_record_round_trips_field_for_field() {
        let rec = DetectionRecord {
            video_id: "v1".into(),
            frame: 12,
            class_id: 3,
            score: 0.875,
            cx: 0.5,
            cy: 0.25,
            w: 0.125,
            h: 0.0625,
        };
        let line = serde_json::to_string(&rec).unwrap();
        let back: DetectionRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, rec);
        assert_eq!(DetectionRecord::from_detection("v1", &rec.to_detection()), rec);
    }

    #[test]
    fn unknown_fields_are_ignored_and_flags_default() {
        let line = r#"{"video_id":"v","frame":0,"class_id":0,"score":0.9,
            "cx":0.5,"cy":0.5,"w":0.1,"h":0.1,"detector":"yolo"}"#;
        let rec: DetectionRecord = serde_json::from_str(line).unwrap();
        assert_eq!(rec.video_id, "v");

        let line = r#"{"video_id":"v","track_id":4,"frame":0,"class_id":0,
            "score":0.9,"cx":0.5,"cy":0.5,"w":0.1,"h":0.1}"#;
        let rec: TrackletRecord = serde_json::from_str(line).unwrap();
        assert!(!rec.interpolated);
    }

    #[test]
    fn trajectory_rows_omit_absent_fields() {
        let row = TrajectoryRecord {
            video_id: "v".into(),
            frame: 3,
            mode: "mot".into(),
            track_id: None,
            score: None,
            cx: None,
            cy: None,
            w: None,
            h: None,
            switch_to: None,
        };
        let line = serde_json::to_string(&row).unwrap();
        assert_eq!(line, r#"{"video_id":"v","frame":3,"mode":"mot"}"#);
        let back: TrajectoryRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, row);
    }
}
