//! Online tracklet refinement: suppress tracks until they prove out,
//! fill missed frames by constant-velocity extrapolation, and smooth every
//! emitted box by exponentially-weighted fusion over the recent window.

use crate::associate::{
    AssociateError, Associator, AssociatorConfig, FrameEvents, TrackId, WindowBox,
};
use crate::geom::BBox;
use crate::stream::{Detection, VideoSequence};
use std::collections::{BTreeMap, VecDeque};

/// Smallest box extent the fragment filler will emit; extrapolation is never
/// allowed to collapse or invert a box.
pub const MIN_EXTENT: f64 = 1e-4;

/// Normalized fusion weights, `weights[0]` applying to the newest box.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionWeights {
    pub omega: f64,
    pub weights: Vec<f64>,
}

/// Weights proportional to `omega^l` with exponents falling linearly from
/// 1.0 (newest box) to 0.1 (oldest) across `s_obj` window slots, then
/// normalized to sum to 1. A single-slot window gets weight 1.
pub fn fusion_weights(omega: f64, s_obj: usize) -> FusionWeights {
    assert!(s_obj >= 1, "fusion window must hold at least one box");
    assert!(omega > 0.0, "fusion base must be positive");
    let mut weights: Vec<f64> = (0..s_obj)
        .map(|i| {
            let l = if s_obj == 1 { 1.0 } else { 1.0 - 0.9 * i as f64 / (s_obj - 1) as f64 };
            omega.powf(l)
        })
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    FusionWeights { omega, weights }
}

/// Constant-velocity prediction one frame past the end of `window`
/// (oldest to newest). The velocity is the per-frame average step across
/// the window; a single-box window predicts standing still. Width and
/// height are clamped to stay positive.
pub fn fill_fragment(window: &[BBox]) -> BBox {
    assert!(!window.is_empty(), "cannot extrapolate an empty window");
    let last = *window.last().unwrap();
    if window.len() == 1 {
        return last;
    }
    let first = window[0];
    let steps = (window.len() - 1) as f64;
    BBox {
        cx: last.cx + (last.cx - first.cx) / steps,
        cy: last.cy + (last.cy - first.cy) / steps,
        w: (last.w + (last.w - first.w) / steps).max(MIN_EXTENT),
        h: (last.h + (last.h - first.h) / steps).max(MIN_EXTENT),
    }
}

/// Weighted average of the newest boxes in `window` (oldest to newest).
/// When the window holds fewer boxes than there are weights, the leading
/// (newest-side) weights are renormalized over what is present.
pub fn fuse_location(window: &[BBox], weights: &FusionWeights) -> BBox {
    assert!(!window.is_empty(), "cannot fuse an empty window");
    let n = window.len().min(weights.weights.len());
    let used = &weights.weights[..n];
    let total: f64 = used.iter().sum();
    let mut fused = BBox::new(0.0, 0.0, 0.0, 0.0);
    for (i, w) in used.iter().enumerate() {
        let b = &window[window.len() - 1 - i];
        let w = w / total;
        fused.cx += w * b.cx;
        fused.cy += w * b.cy;
        fused.w += w * b.w;
        fused.h += w * b.h;
    }
    fused
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitMode {
    /// Emit a track's boxes only from the frame it proves out; its earlier
    /// frames are dropped. Fully causal.
    OnlineDrop,
    /// Additionally replay the withheld early boxes the moment the track
    /// proves out (their frame indices predate the emission frame).
    OfflineRetroemit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinerConfig {
    /// A track is emitted once its matched span exceeds this many frames.
    pub s_sde: usize,
    /// Fusion weight base.
    pub omega: f64,
    pub emit_mode: EmitMode,
}

impl Default for RefinerConfig {
    fn default() -> Self {
        Self { s_sde: 10, omega: 10.0, emit_mode: EmitMode::OnlineDrop }
    }
}

/// One refined output box. `interpolated` marks boxes whose raw source was
/// a velocity fill rather than a detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedBox {
    pub track_id: TrackId,
    pub frame: usize,
    pub class_id: i64,
    pub score: f64,
    pub bbox: BBox,
    pub interpolated: bool,
}

/// Per-track refinement state. The window holds the raw per-frame boxes
/// (detections and velocity fills) that fusion draws from; fused outputs
/// never feed back into it.
#[derive(Debug, Clone)]
pub struct TrackState {
    pub class_id: i64,
    pub first_frame: usize,
    /// Most recent frame with a real detection. The matched span
    /// `last_matched_frame - first_frame + 1` is what reliability is
    /// judged on: it counts interior gaps but freezes during an open loss
    /// run, so a track cannot prove out while unobserved.
    pub last_matched_frame: usize,
    /// Score of the most recent real detection; fills inherit it.
    pub last_score: f64,
    /// Set once the matched-span bar is passed; never unset.
    pub reliable: bool,
    window: VecDeque<WindowBox>,
    pending: Vec<RefinedBox>,
}

impl TrackState {
    pub fn window(&self) -> &VecDeque<WindowBox> {
        &self.window
    }
}

/// Streaming refiner driven by associator frame events.
#[derive(Debug)]
pub struct Refiner {
    cfg: RefinerConfig,
    s_obj_max: usize,
    weights: FusionWeights,
    tracks: BTreeMap<TrackId, TrackState>,
}

impl Refiner {
    /// `s_obj_max` is the window capacity and must match the associator
    /// feeding this refiner.
    pub fn new(cfg: RefinerConfig, s_obj_max: usize) -> Self {
        let weights = fusion_weights(cfg.omega, s_obj_max.max(1));
        Self { cfg, s_obj_max: s_obj_max.max(1), weights, tracks: BTreeMap::new() }
    }

    pub fn config(&self) -> &RefinerConfig {
        &self.cfg
    }

    pub fn weights(&self) -> &FusionWeights {
        &self.weights
    }

    pub fn tracks(&self) -> &BTreeMap<TrackId, TrackState> {
        &self.tracks
    }

    /// Consumes one frame's association events and returns the refined
    /// boxes released on that frame. In retro-emit mode a track crossing
    /// the lifetime bar releases its withheld earlier boxes too, so frame
    /// indices in the output may lag the event frame.
    pub fn step(&mut self, events: &FrameEvents) -> Vec<RefinedBox> {
        let frame = events.frame;
        let mut out = Vec::new();
        for (id, det) in &events.born {
            self.tracks.insert(
                *id,
                TrackState {
                    class_id: det.class_id,
                    first_frame: frame,
                    last_matched_frame: frame,
                    last_score: det.score,
                    reliable: false,
                    window: VecDeque::with_capacity(self.s_obj_max),
                    pending: Vec::new(),
                },
            );
            self.observe(
                *id,
                frame,
                WindowBox { score: det.score, bbox: det.bbox },
                false,
                &mut out,
            );
        }
        for (id, det) in &events.matched {
            self.observe(
                *id,
                frame,
                WindowBox { score: det.score, bbox: det.bbox },
                false,
                &mut out,
            );
        }
        for id in &events.missed {
            let fill = {
                let st = self.tracks.get(id).expect("missed event for unknown track");
                let boxes: Vec<BBox> = st.window.iter().map(|w| w.bbox).collect();
                WindowBox { score: st.last_score, bbox: fill_fragment(&boxes) }
            };
            self.observe(*id, frame, fill, true, &mut out);
        }
        for id in &events.died {
            // Withheld boxes of a track that never proved out die with it.
            self.tracks.remove(id);
        }
        out
    }

    fn observe(
        &mut self,
        id: TrackId,
        frame: usize,
        raw: WindowBox,
        interpolated: bool,
        out: &mut Vec<RefinedBox>,
    ) {
        let st = self.tracks.get_mut(&id).expect("event for unknown track");
        if !interpolated {
            st.last_score = raw.score;
            st.last_matched_frame = frame;
        }
        st.window.push_back(raw);
        while st.window.len() > self.s_obj_max {
            st.window.pop_front();
        }
        let boxes: Vec<BBox> = st.window.iter().map(|w| w.bbox).collect();
        let refined = RefinedBox {
            track_id: id,
            frame,
            class_id: st.class_id,
            score: st.last_score,
            bbox: fuse_location(&boxes, &self.weights),
            interpolated,
        };
        let span = st.last_matched_frame - st.first_frame + 1;
        if span > self.cfg.s_sde {
            if !st.reliable {
                st.reliable = true;
                out.append(&mut st.pending);
            }
            out.push(refined);
        } else if self.cfg.emit_mode == EmitMode::OfflineRetroemit {
            st.pending.push(refined);
        }
    }
}

/// A refined detection stream, ordered by frame then track.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedStream {
    pub video_id: String,
    pub t_v: usize,
    pub boxes: Vec<RefinedBox>,
}

impl RefinedStream {
    /// Repackages the refined boxes as a plain detection sequence, e.g. to
    /// score the refined stream with the same metrics as the raw one.
    pub fn to_video_sequence(&self) -> VideoSequence {
        VideoSequence::from_detections(
            self.video_id.clone(),
            self.t_v,
            self.boxes.iter().map(|r| Detection::new(r.frame, r.class_id, r.score, r.bbox)),
        )
        .expect("refined boxes stay within the source sequence")
    }
}

/// Associates and refines a whole sequence in one pass.
pub fn refine_stream(
    seq: &VideoSequence,
    assoc_cfg: AssociatorConfig,
    cfg: RefinerConfig,
) -> Result<RefinedStream, AssociateError> {
    seq.validate()?;
    let mut assoc = Associator::new(assoc_cfg);
    let mut refiner = Refiner::new(cfg, assoc_cfg.s_obj_max);
    let mut boxes = Vec::new();
    for frame in &seq.frames {
        let events = assoc.step(frame)?;
        boxes.extend(refiner.step(&events));
    }
    boxes.sort_by(|a, b| a.frame.cmp(&b.frame).then(a.track_id.cmp(&b.track_id)));
    Ok(RefinedStream { video_id: seq.video_id.clone(), t_v: seq.t_v, boxes })
}
