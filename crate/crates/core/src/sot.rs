//! Single-object tracking by detection.
//!
//! While no object has proven out, frames run through the full
//! multi-object pipeline (NMS, association, refinement). Once a reliable
//! track exists the tracker hands that object to a cheaper per-frame
//! selector: candidates are gated by overlap with the previous box before
//! suppression runs, so most of the frame never reaches the quadratic
//! part, and the survivor with the strongest overlap continuity wins.
//! When the gate empties (the object is gone), the tracker falls back to
//! the multi-object pipeline and waits for the next reliable track.

use crate::associate::{AssociateError, Associator, AssociatorConfig, TrackId, WindowBox};
use crate::geom::{iou, BBox};
use crate::nms::nms;
use crate::refine::{
    fuse_location, fusion_weights, FusionWeights, RefinedBox, Refiner, RefinerConfig,
};
use crate::stream::{Detection, FrameDetections};
use crate::synth::{candidate_set, OverlapProfile};
use std::collections::VecDeque;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SotConfig {
    /// Minimum IoU with the previous box for a candidate to survive the gate.
    pub u_sos: f64,
    /// Suppression threshold among gate survivors (and for MOT-side NMS).
    pub u_nms: f64,
    /// Detection score floor in SOT mode.
    pub score_threshold: f64,
}

impl Default for SotConfig {
    fn default() -> Self {
        Self { u_sos: 0.3, u_nms: 0.5, score_threshold: 0.5 }
    }
}

/// Overlap-gated suppression and selection for one tracked object.
///
/// Candidates whose IoU with `prev_box` falls below the gate are discarded
/// outright; an empty survivor set means tracking failure (`None`). The
/// survivors then run greedy score-ordered suppression, each carrying its
/// gate IoU, and the kept candidate with the highest carried IoU is
/// returned unmodified — scores are never rescored, and ties fall to the
/// higher score, then to input order. Callers apply any score floor
/// beforehand.
pub fn sos_nms(candidates: &[Detection], prev_box: &BBox, cfg: &SotConfig) -> Option<Detection> {
    struct Gated {
        det: Detection,
        overlap: f64,
        index: usize,
    }
    let mut pool: Vec<Gated> = candidates
        .iter()
        .enumerate()
        .filter_map(|(index, d)| {
            let overlap = iou(prev_box, &d.bbox);
            (overlap >= cfg.u_sos).then_some(Gated { det: *d, overlap, index })
        })
        .collect();
    if pool.is_empty() {
        return None;
    }

    let mut kept: Vec<Gated> = Vec::new();
    while !pool.is_empty() {
        let best = pool
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| {
                a.det.score.total_cmp(&b.det.score).then(b.index.cmp(&a.index))
            })
            .map(|(i, _)| i)
            .unwrap();
        let winner = pool.swap_remove(best);
        pool.retain(|g| iou(&winner.det.bbox, &g.det.bbox) <= cfg.u_nms);
        kept.push(winner);
    }

    kept.into_iter()
        .max_by(|a, b| {
            a.overlap
                .total_cmp(&b.overlap)
                .then(a.det.score.total_cmp(&b.det.score))
                .then(b.index.cmp(&a.index))
        })
        .map(|g| g.det)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackMode {
    Mot,
    Sot,
}

/// A mode change decided while processing a frame; it takes effect on the
/// next frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchEvent {
    pub frame: usize,
    pub to: TrackMode,
    /// The adopted track when switching into SOT.
    pub track_id: Option<TrackId>,
}

/// One frame's result: which branch processed it, what it produced, and
/// any mode switch it triggered.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub frame: usize,
    pub mode: TrackMode,
    /// Refined multi-object boxes (MOT frames only).
    pub emitted: Vec<RefinedBox>,
    /// The tracked object's fused box (successful SOT frames only).
    pub tracked: Option<RefinedBox>,
    pub switch: Option<SwitchEvent>,
}

#[derive(Debug)]
struct Target {
    track_id: TrackId,
    class_id: i64,
    last_score: f64,
    window: VecDeque<WindowBox>,
    prev_box: BBox,
}

#[derive(Debug)]
enum Branch {
    Mot { assoc: Associator, refiner: Refiner },
    Sot { target: Target },
}

/// Mode-switching tracker. Feed frames in consecutive order; the tracker
/// starts in MOT mode, adopts the highest-scoring reliable track for SOT,
/// and drops back to a fresh MOT pipeline on tracking failure.
#[derive(Debug)]
pub struct SotTracker {
    cfg: SotConfig,
    assoc_cfg: AssociatorConfig,
    refiner_cfg: RefinerConfig,
    weights: FusionWeights,
    branch: Branch,
    expected_frame: Option<usize>,
}

impl SotTracker {
    pub fn new(cfg: SotConfig, assoc_cfg: AssociatorConfig, refiner_cfg: RefinerConfig) -> Self {
        let weights = fusion_weights(refiner_cfg.omega, assoc_cfg.s_obj_max.max(1));
        Self {
            cfg,
            assoc_cfg,
            refiner_cfg,
            weights,
            branch: Branch::Mot {
                assoc: Associator::new(assoc_cfg),
                refiner: Refiner::new(refiner_cfg, assoc_cfg.s_obj_max),
            },
            expected_frame: None,
        }
    }

    pub fn mode(&self) -> TrackMode {
        match self.branch {
            Branch::Mot { .. } => TrackMode::Mot,
            Branch::Sot { .. } => TrackMode::Sot,
        }
    }

    pub fn step(&mut self, frame: &FrameDetections) -> Result<StepOutput, AssociateError> {
        let f = frame.frame;
        if let Some(expected) = self.expected_frame {
            if f != expected {
                return Err(AssociateError::NonConsecutiveFrame { expected, got: f });
            }
        }
        self.expected_frame = Some(f + 1);

        match &mut self.branch {
            Branch::Mot { assoc, refiner } => {
                let kept = nms(&frame.detections, self.assoc_cfg.score_threshold, self.cfg.u_nms);
                let events = assoc.step(&FrameDetections::new(f, kept))?;
                let emitted = refiner.step(&events);

                // Adopt the highest-scoring reliable track; older id wins ties.
                let adopted = refiner
                    .tracks()
                    .iter()
                    .filter(|(_, st)| st.reliable)
                    .max_by(|(ia, a), (ib, b)| {
                        a.last_score.total_cmp(&b.last_score).then(ib.cmp(ia))
                    })
                    .map(|(&id, st)| {
                        let prev_box = emitted
                            .iter()
                            .find(|r| r.track_id == id && r.frame == f)
                            .map(|r| r.bbox)
                            .expect("reliable live track emits every frame");
                        Target {
                            track_id: id,
                            class_id: st.class_id,
                            last_score: st.last_score,
                            window: st.window().clone(),
                            prev_box,
                        }
                    });

                let mut switch = None;
                if let Some(target) = adopted {
                    switch = Some(SwitchEvent {
                        frame: f,
                        to: TrackMode::Sot,
                        track_id: Some(target.track_id),
                    });
                    self.branch = Branch::Sot { target };
                }
                Ok(StepOutput { frame: f, mode: TrackMode::Mot, emitted, tracked: None, switch })
            }
            Branch::Sot { target } => {
                let candidates: Vec<Detection> = frame
                    .detections
                    .iter()
                    .copied()
                    .filter(|d| {
                        d.class_id == target.class_id && d.score >= self.cfg.score_threshold
                    })
                    .collect();
                match sos_nms(&candidates, &target.prev_box, &self.cfg) {
                    Some(det) => {
                        target.window.push_back(WindowBox { score: det.score, bbox: det.bbox });
                        while target.window.len() > self.assoc_cfg.s_obj_max.max(1) {
                            target.window.pop_front();
                        }
                        let boxes: Vec<BBox> = target.window.iter().map(|w| w.bbox).collect();
                        let fused = fuse_location(&boxes, &self.weights);
                        target.prev_box = fused;
                        target.last_score = det.score;
                        Ok(StepOutput {
                            frame: f,
                            mode: TrackMode::Sot,
                            emitted: Vec::new(),
                            tracked: Some(RefinedBox {
                                track_id: target.track_id,
                                frame: f,
                                class_id: target.class_id,
                                score: det.score,
                                bbox: fused,
                                interpolated: false,
                            }),
                            switch: None,
                        })
                    }
                    None => {
                        // Gate emptied: the object is gone. Restart
                        // multi-object tracking from the next frame.
                        self.branch = Branch::Mot {
                            assoc: Associator::new(self.assoc_cfg),
                            refiner: Refiner::new(self.refiner_cfg, self.assoc_cfg.s_obj_max),
                        };
                        Ok(StepOutput {
                            frame: f,
                            mode: TrackMode::Sot,
                            emitted: Vec::new(),
                            tracked: None,
                            switch: Some(SwitchEvent {
                                frame: f,
                                to: TrackMode::Mot,
                                track_id: None,
                            }),
                        })
                    }
                }
            }
        }
    }
}

/// Timing comparison of plain suppression against overlap-gated
/// suppression on one reproducible candidate set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRecord {
    pub candidates: usize,
    pub reps: usize,
    /// Median per-call time of full-frame NMS, milliseconds.
    pub nms_ms: f64,
    /// Median per-call time of gate-then-suppress selection, milliseconds.
    pub sos_nms_ms: f64,
    /// Candidates passing the overlap gate.
    pub survivors_after_gate: usize,
    pub speedup: f64,
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

/// Times both candidate-selection routes on the same synthetic frame,
/// interleaving repetitions so neither side benefits from warm-up.
pub fn bench_candidate_selection(
    count: usize,
    profile: OverlapProfile,
    cfg: &SotConfig,
    seed: u64,
    reps: usize,
) -> BenchRecord {
    assert!(reps >= 1, "at least one repetition required");
    let (prev_box, candidates) = candidate_set(count, profile, seed);
    let survivors_after_gate =
        candidates.iter().filter(|d| iou(&prev_box, &d.bbox) >= cfg.u_sos).count();

    let mut nms_samples = Vec::with_capacity(reps);
    let mut sos_samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t0 = Instant::now();
        let kept = nms(std::hint::black_box(&candidates), 0.0, cfg.u_nms);
        std::hint::black_box(&kept);
        nms_samples.push(t0.elapsed().as_secs_f64() * 1e3);

        let t1 = Instant::now();
        let selected = sos_nms(std::hint::black_box(&candidates), &prev_box, cfg);
        std::hint::black_box(&selected);
        sos_samples.push(t1.elapsed().as_secs_f64() * 1e3);
    }
    let nms_ms = median(&mut nms_samples);
    let sos_nms_ms = median(&mut sos_samples);
    BenchRecord {
        candidates: count,
        reps,
        nms_ms,
        sos_nms_ms,
        survivors_after_gate,
        speedup: if sos_nms_ms > 0.0 { nms_ms / sos_nms_ms } else { f64::INFINITY },
    }
}
