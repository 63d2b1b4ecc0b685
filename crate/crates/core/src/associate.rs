//! Greedy IoU association of per-frame detections into tracklets.
//!
//! Matching is per class and greedy over descending IoU: every frame, all
//! (track, detection) pairs at or above the IoU threshold are ranked and
//! consumed best-first, so a high-overlap pair is never sacrificed for a
//! globally better assignment. Unmatched tracks survive a bounded number of
//! consecutive missed frames before being finalized; unmatched detections
//! spawn new tracks.

use crate::geom::{iou, BBox};
use crate::stream::{Detection, FrameDetections, StreamError, VideoSequence};
use std::collections::VecDeque;
use thiserror::Error;

pub type TrackId = u64;

#[derive(Debug, Error)]
pub enum AssociateError {
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("frame {got} fed to associator expecting frame {expected}")]
    NonConsecutiveFrame { expected: usize, got: usize },
    #[error("tracklet history is empty")]
    EmptyHistory,
    #[error("tracklet history must start and end with a matched entry")]
    UnanchoredHistory,
    #[error("history entry {index} holds frame {found}, expected {expected}")]
    HistoryFrameMismatch { index: usize, expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociatorConfig {
    /// Detections scoring below this never enter matching.
    pub score_threshold: f64,
    /// Minimum IoU for a (track, detection) pair to be a match candidate.
    pub iou_threshold: f64,
    /// A track survives at most this many consecutive missed frames.
    pub s_lost_max: usize,
    /// Length of the recent-observation window kept per track.
    pub s_obj_max: usize,
}

impl Default for AssociatorConfig {
    fn default() -> Self {
        Self { score_threshold: 0.5, iou_threshold: 0.3, s_lost_max: 10, s_obj_max: 5 }
    }
}

/// A matched observation retained in a track's recent window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowBox {
    pub score: f64,
    pub bbox: BBox,
}

/// One slot of a tracklet's frame-by-frame record. Slot `i` covers frame
/// `first_frame + i`; interior gaps are explicit `Missed` entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HistoryEntry {
    Matched(Detection),
    Missed,
}

impl HistoryEntry {
    pub fn detection(&self) -> Option<&Detection> {
        match self {
            HistoryEntry::Matched(d) => Some(d),
            HistoryEntry::Missed => None,
        }
    }
}

/// A detection chain for one object hypothesis. `history` spans exactly
/// `first_frame..=last_matched_frame` (trailing losses are never recorded),
/// so `t_n() == history.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracklet {
    pub id: TrackId,
    pub class_id: i64,
    /// Most recent matched observations, newest last, capped at `s_obj_max`.
    pub window: VecDeque<WindowBox>,
    /// Consecutive missed frames since the last match (0 right after one).
    pub s_lost: usize,
    /// Matched-span duration: first to last matched frame, interior gaps
    /// included. Frozen while the track is lost, so it always equals
    /// `t_n()` — downstream reliability checks read this field.
    pub s_dur: usize,
    pub first_frame: usize,
    pub last_matched_frame: usize,
    pub history: Vec<HistoryEntry>,
    /// Total missed entries in `history`.
    pub om: usize,
}

impl Tracklet {
    fn spawn(id: TrackId, det: Detection, s_obj_max: usize) -> Self {
        let mut window = VecDeque::with_capacity(s_obj_max);
        window.push_back(WindowBox { score: det.score, bbox: det.bbox });
        Self {
            id,
            class_id: det.class_id,
            window,
            s_lost: 0,
            s_dur: 1,
            first_frame: det.frame,
            last_matched_frame: det.frame,
            history: vec![HistoryEntry::Matched(det)],
            om: 0,
        }
    }

    /// Builds a finalized tracklet straight from a history record, for
    /// callers that already hold per-track observations (tests, file
    /// loaders). The record must start and end matched and carry frame
    /// indices consistent with `first_frame`.
    pub fn from_history(
        id: TrackId,
        class_id: i64,
        first_frame: usize,
        history: Vec<HistoryEntry>,
        s_obj_max: usize,
    ) -> Result<Self, AssociateError> {
        if history.is_empty() {
            return Err(AssociateError::EmptyHistory);
        }
        if history.first().unwrap().detection().is_none()
            || history.last().unwrap().detection().is_none()
        {
            return Err(AssociateError::UnanchoredHistory);
        }
        let mut om = 0;
        for (i, entry) in history.iter().enumerate() {
            match entry {
                HistoryEntry::Matched(d) => {
                    if d.frame != first_frame + i {
                        return Err(AssociateError::HistoryFrameMismatch {
                            index: i,
                            expected: first_frame + i,
                            found: d.frame,
                        });
                    }
                }
                HistoryEntry::Missed => om += 1,
            }
        }
        let window = history
            .iter()
            .filter_map(HistoryEntry::detection)
            .rev()
            .take(s_obj_max.max(1))
            .map(|d| WindowBox { score: d.score, bbox: d.bbox })
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        let last_matched_frame = first_frame + history.len() - 1;
        Ok(Self {
            id,
            class_id,
            window,
            s_lost: 0,
            s_dur: last_matched_frame - first_frame + 1,
            first_frame,
            last_matched_frame,
            history,
            om,
        })
    }

    /// Matched-span duration in frames, interior gaps included.
    pub fn t_n(&self) -> usize {
        self.last_matched_frame - self.first_frame + 1
    }

    pub fn last_box(&self) -> &WindowBox {
        // The window holds at least the spawning detection.
        self.window.back().expect("tracklet window never empty")
    }

    fn record_match(&mut self, det: Detection, s_obj_max: usize) {
        // Back-fill the gap since the last match so history stays dense.
        for _ in 0..self.s_lost {
            self.history.push(HistoryEntry::Missed);
        }
        self.om += self.s_lost;
        self.s_lost = 0;
        self.history.push(HistoryEntry::Matched(det));
        self.last_matched_frame = det.frame;
        self.window.push_back(WindowBox { score: det.score, bbox: det.bbox });
        while self.window.len() > s_obj_max.max(1) {
            self.window.pop_front();
        }
    }

    fn finalize(&mut self) {
        self.s_lost = 0;
        self.s_dur = self.t_n();
    }
}

/// What happened to each track on one frame. A track appears in exactly one
/// list; `died` entries are final (their state has been archived).
#[derive(Debug, Clone, Default)]
pub struct FrameEvents {
    pub frame: usize,
    pub born: Vec<(TrackId, Detection)>,
    pub matched: Vec<(TrackId, Detection)>,
    pub missed: Vec<TrackId>,
    pub died: Vec<TrackId>,
}

/// Streaming tracker state. Feed frames in consecutive order via [`step`],
/// then [`finish`] to collect every tracklet ever spawned.
///
/// [`step`]: Associator::step
/// [`finish`]: Associator::finish
#[derive(Debug)]
pub struct Associator {
    cfg: AssociatorConfig,
    alive: Vec<Tracklet>,
    finished: Vec<Tracklet>,
    next_id: TrackId,
    expected_frame: Option<usize>,
}

impl Associator {
    pub fn new(cfg: AssociatorConfig) -> Self {
        Self { cfg, alive: Vec::new(), finished: Vec::new(), next_id: 1, expected_frame: None }
    }

    pub fn config(&self) -> &AssociatorConfig {
        &self.cfg
    }

    pub fn alive(&self) -> &[Tracklet] {
        &self.alive
    }

    /// Processes one frame. The first frame may carry any index; every
    /// later call must advance by exactly one.
    pub fn step(&mut self, frame: &FrameDetections) -> Result<FrameEvents, AssociateError> {
        let f = frame.frame;
        if let Some(expected) = self.expected_frame {
            if f != expected {
                return Err(AssociateError::NonConsecutiveFrame { expected, got: f });
            }
        }
        self.expected_frame = Some(f + 1);

        // Canonical detection order makes matching invariant to the input
        // permutation within a frame.
        let mut dets: Vec<Detection> = frame
            .detections
            .iter()
            .copied()
            .filter(|d| d.score >= self.cfg.score_threshold)
            .collect();
        for d in &dets {
            d.validate()?;
        }
        dets.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then(a.class_id.cmp(&b.class_id))
                .then(a.bbox.cx.total_cmp(&b.bbox.cx))
                .then(a.bbox.cy.total_cmp(&b.bbox.cy))
                .then(a.bbox.w.total_cmp(&b.bbox.w))
                .then(a.bbox.h.total_cmp(&b.bbox.h))
        });

        // Rank candidate pairs: IoU first, then detection score, then the
        // older track, then detection order.
        struct Pair {
            iou: f64,
            det_score: f64,
            track_id: TrackId,
            ti: usize,
            di: usize,
        }
        let mut pairs = Vec::new();
        for (ti, track) in self.alive.iter().enumerate() {
            for (di, det) in dets.iter().enumerate() {
                if det.class_id != track.class_id {
                    continue;
                }
                let v = iou(&track.last_box().bbox, &det.bbox);
                if v >= self.cfg.iou_threshold {
                    pairs.push(Pair { iou: v, det_score: det.score, track_id: track.id, ti, di });
                }
            }
        }
        pairs.sort_by(|a, b| {
            b.iou
                .total_cmp(&a.iou)
                .then(b.det_score.total_cmp(&a.det_score))
                .then(a.track_id.cmp(&b.track_id))
                .then(a.di.cmp(&b.di))
        });

        let mut det_match: Vec<Option<usize>> = vec![None; dets.len()]; // det -> track index
        let mut track_match: Vec<Option<usize>> = vec![None; self.alive.len()];
        for p in &pairs {
            if track_match[p.ti].is_none() && det_match[p.di].is_none() {
                track_match[p.ti] = Some(p.di);
                det_match[p.di] = Some(p.ti);
            }
        }

        let mut events = FrameEvents { frame: f, ..Default::default() };
        let mut survivors = Vec::with_capacity(self.alive.len());
        for (ti, mut track) in self.alive.drain(..).enumerate() {
            match track_match[ti] {
                Some(di) => {
                    let det = dets[di];
                    track.record_match(det, self.cfg.s_obj_max);
                    track.s_dur = track.t_n();
                    events.matched.push((track.id, det));
                    survivors.push(track);
                }
                None => {
                    track.s_lost += 1;
                    if track.s_lost > self.cfg.s_lost_max {
                        events.died.push(track.id);
                        track.finalize();
                        self.finished.push(track);
                    } else {
                        events.missed.push(track.id);
                        survivors.push(track);
                    }
                }
            }
        }
        self.alive = survivors;

        for (di, det) in dets.iter().enumerate() {
            if det_match[di].is_none() {
                let id = self.next_id;
                self.next_id += 1;
                self.alive.push(Tracklet::spawn(id, *det, self.cfg.s_obj_max));
                events.born.push((id, *det));
            }
        }
        Ok(events)
    }

    /// Finalizes all live tracks and returns every tracklet ever spawned,
    /// ordered by id.
    pub fn finish(mut self) -> Vec<Tracklet> {
        for mut track in self.alive.drain(..) {
            track.finalize();
            self.finished.push(track);
        }
        self.finished.sort_by_key(|t| t.id);
        self.finished
    }
}

/// Runs the associator over a whole sequence.
pub fn run(seq: &VideoSequence, cfg: AssociatorConfig) -> Result<Vec<Tracklet>, AssociateError> {
    seq.validate()?;
    let mut assoc = Associator::new(cfg);
    for frame in &seq.frames {
        assoc.step(frame)?;
    }
    Ok(assoc.finish())
}
