//! Reproducible synthetic detection streams with a ledger of the defects
//! that were injected, plus independent reference implementations of the
//! numerically delicate routines for cross-checking.
//!
//! All randomness flows from one seeded ChaCha stream, so a (spec, seed)
//! pair always produces the identical sequence.

use crate::geom::{iou, BBox, BoxError};
use crate::metrics::SpectrumPoint;
use crate::refine::MIN_EXTENT;
use crate::sot::SotConfig;
use crate::stream::{Detection, VideoSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("track {index} spans {first}..={last}, inverted")]
    InvertedSpan { index: usize, first: usize, last: usize },
    #[error("track {index} spans {first}..={last}, beyond duration {t_v}")]
    SpanOutOfRange { index: usize, first: usize, last: usize, t_v: usize },
    #[error("track {index}: {source}")]
    BadBox { index: usize, source: BoxError },
    #[error("track {index} score {score} outside [0, 1]")]
    BadScore { index: usize, score: f64 },
    #[error("track {index} oscillation period {period} shorter than 2 frames")]
    BadPeriod { index: usize, period: usize },
    #[error("dropout rate {0} outside [0, 1]")]
    BadDropout(f64),
    #[error("ghost length {length} does not fit duration {t_v}")]
    GhostTooLong { length: usize, t_v: usize },
    #[error("no clear spot for ghost {index} after {attempts} attempts")]
    GhostPlacement { index: usize, attempts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    Stationary,
    /// Per-frame increments on every channel.
    ConstantVelocity {
        dcx: f64,
        dcy: f64,
        dw: f64,
        dh: f64,
    },
    /// Horizontal oscillation: `cx` swings by `amplitude` with the given
    /// period in frames, starting at phase zero.
    Sinusoidal {
        amplitude: f64,
        period: usize,
    },
}

/// One noise-free object trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSpec {
    pub motion: Motion,
    pub first_frame: usize,
    /// Inclusive.
    pub last_frame: usize,
    pub base_box: BBox,
    pub class_id: i64,
    pub score: f64,
}

/// Noise-free box of a track at a frame inside its span.
pub fn true_box(spec: &TrackSpec, frame: usize) -> BBox {
    let dt = (frame - spec.first_frame) as f64;
    let b = spec.base_box;
    match spec.motion {
        Motion::Stationary => b,
        Motion::ConstantVelocity { dcx, dcy, dw, dh } => BBox {
            cx: b.cx + dcx * dt,
            cy: b.cy + dcy * dt,
            w: (b.w + dw * dt).max(MIN_EXTENT),
            h: (b.h + dh * dt).max(MIN_EXTENT),
        },
        Motion::Sinusoidal { amplitude, period } => {
            BBox { cx: b.cx + amplitude * (2.0 * PI * dt / period as f64).sin(), ..b }
        }
    }
}

/// Defects to inject into the clean trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    /// Gaussian sigma added to cx/cy of every emitted box, clamped to
    /// four sigma.
    pub center_jitter: f64,
    /// Same for w/h (sizes additionally stay positive).
    pub size_jitter: f64,
    /// Per-frame probability that an emission is dropped.
    pub dropout: f64,
    /// `(start, length)` frame windows dropped for every track.
    pub bursts: Vec<(usize, usize)>,
    /// Number of short spurious tracks, spatially disjoint from everything.
    pub ghosts: usize,
    pub ghost_length: usize,
    pub seed: u64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            center_jitter: 0.0,
            size_jitter: 0.0,
            dropout: 0.0,
            bursts: Vec::new(),
            ghosts: 0,
            ghost_length: 2,
            seed: 0,
        }
    }
}

/// What actually happened to one track after perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackDefects {
    pub spec_index: usize,
    pub class_id: i64,
    /// Frames actually emitted.
    pub emitted: usize,
    /// First and last emitted frame, if any survived.
    pub span: Option<(usize, usize)>,
    /// Emitted-span length (0 when nothing survived).
    pub t_n: usize,
    /// Missing frames inside the emitted span.
    pub om: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostDefects {
    pub first_frame: usize,
    pub length: usize,
    pub bbox: BBox,
}

/// Ground truth about the generated stream. It describes what was emitted,
/// not what an associator will make of it.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectLedger {
    pub t_v: usize,
    pub seed: u64,
    pub tracks: Vec<TrackDefects>,
    pub ghosts: Vec<GhostDefects>,
}

const GHOST_SCORE: f64 = 0.8;
const GHOST_EXTENT: f64 = 0.04;
const PLACEMENT_ATTEMPTS: usize = 10_000;

fn validate(t_v: usize, specs: &[TrackSpec], perturb: &PerturbationSpec) -> Result<(), SynthError> {
    for (index, s) in specs.iter().enumerate() {
        if s.first_frame > s.last_frame {
            return Err(SynthError::InvertedSpan {
                index,
                first: s.first_frame,
                last: s.last_frame,
            });
        }
        if s.last_frame >= t_v {
            return Err(SynthError::SpanOutOfRange {
                index,
                first: s.first_frame,
                last: s.last_frame,
                t_v,
            });
        }
        s.base_box.validate().map_err(|source| SynthError::BadBox { index, source })?;
        if !(s.score.is_finite() && (0.0..=1.0).contains(&s.score)) {
            return Err(SynthError::BadScore { index, score: s.score });
        }
        if let Motion::Sinusoidal { period, .. } = s.motion {
            if period < 2 {
                return Err(SynthError::BadPeriod { index, period });
            }
        }
    }
    if !(perturb.dropout.is_finite() && (0.0..=1.0).contains(&perturb.dropout)) {
        return Err(SynthError::BadDropout(perturb.dropout));
    }
    if perturb.ghosts > 0 && (perturb.ghost_length == 0 || perturb.ghost_length > t_v) {
        return Err(SynthError::GhostTooLong { length: perturb.ghost_length, t_v });
    }
    Ok(())
}

/// Generates the perturbed stream and its defect ledger.
///
/// Per spanned frame, in spec order: one uniform draw decides dropout, then
/// four clamped normal draws jitter the surviving box. Ghosts are placed
/// afterwards by rejection sampling until spatially disjoint from every
/// emitted box. This draw order is part of the reproducibility contract.
pub fn generate(
    video_id: &str,
    t_v: usize,
    specs: &[TrackSpec],
    perturb: &PerturbationSpec,
) -> Result<(VideoSequence, DefectLedger), SynthError> {
    validate(t_v, specs, perturb)?;
    let mut rng = ChaCha8Rng::seed_from_u64(perturb.seed);
    let center = Normal::new(0.0, perturb.center_jitter).expect("finite sigma");
    let size = Normal::new(0.0, perturb.size_jitter).expect("finite sigma");
    let c4 = 4.0 * perturb.center_jitter;
    let s4 = 4.0 * perturb.size_jitter;
    let in_burst =
        |f: usize| perturb.bursts.iter().any(|&(start, len)| f >= start && f < start + len);

    let mut detections: Vec<Detection> = Vec::new();
    let mut tracks = Vec::with_capacity(specs.len());
    for (spec_index, spec) in specs.iter().enumerate() {
        let mut emitted = 0usize;
        let mut span: Option<(usize, usize)> = None;
        for f in spec.first_frame..=spec.last_frame {
            let coin: f64 = rng.random();
            if in_burst(f) || coin < perturb.dropout {
                continue;
            }
            let tb = true_box(spec, f);
            let bbox = BBox {
                cx: tb.cx + center.sample(&mut rng).clamp(-c4, c4),
                cy: tb.cy + center.sample(&mut rng).clamp(-c4, c4),
                w: (tb.w + size.sample(&mut rng).clamp(-s4, s4)).max(MIN_EXTENT),
                h: (tb.h + size.sample(&mut rng).clamp(-s4, s4)).max(MIN_EXTENT),
            };
            detections.push(Detection::new(f, spec.class_id, spec.score, bbox));
            emitted += 1;
            span = Some((span.map_or(f, |(first, _)| first), f));
        }
        let (t_n, om) = span.map_or((0, 0), |(first, last)| {
            let t_n = last - first + 1;
            (t_n, t_n - emitted)
        });
        tracks.push(TrackDefects { spec_index, class_id: spec.class_id, emitted, span, t_n, om });
    }

    let mut ghosts = Vec::with_capacity(perturb.ghosts);
    let mut ghost_boxes: Vec<BBox> = Vec::new();
    for index in 0..perturb.ghosts {
        let mut placed = None;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let candidate = BBox::new(
                rng.random_range(0.05..0.95),
                rng.random_range(0.05..0.95),
                GHOST_EXTENT,
                GHOST_EXTENT,
            );
            let clear = detections.iter().all(|d| iou(&d.bbox, &candidate) == 0.0)
                && ghost_boxes.iter().all(|b| iou(b, &candidate) == 0.0);
            if clear {
                placed = Some(candidate);
                break;
            }
        }
        let bbox =
            placed.ok_or(SynthError::GhostPlacement { index, attempts: PLACEMENT_ATTEMPTS })?;
        let first_frame = rng.random_range(0..=t_v - perturb.ghost_length);
        for f in first_frame..first_frame + perturb.ghost_length {
            detections.push(Detection::new(f, 0, GHOST_SCORE, bbox));
        }
        ghost_boxes.push(bbox);
        ghosts.push(GhostDefects { first_frame, length: perturb.ghost_length, bbox });
    }

    let seq = VideoSequence::from_detections(video_id, t_v, detections)
        .expect("generated detections are valid by construction");
    Ok((seq, DefectLedger { t_v, seed: perturb.seed, tracks, ghosts }))
}

/// Direct O(t^2) DFT magnitudes at `k/t` for `k = 1..=t/2`, summed from the
/// definition with no detrending and no FFT — the cross-check for
/// [`crate::metrics::dft_amplitudes`].
pub fn oracle_dft(series: &[f64]) -> Vec<SpectrumPoint> {
    let t = series.len();
    if t < 2 {
        return Vec::new();
    }
    (1..=t / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0_f64, 0.0_f64);
            for (j, &x) in series.iter().enumerate() {
                let angle = -2.0 * PI * (k as f64) * (j as f64) / t as f64;
                re += x * angle.cos();
                im += x * angle.sin();
            }
            SpectrumPoint { q: k as f64 / t as f64, amplitude: re.hypot(im) }
        })
        .collect()
}

/// Compositional reference for [`crate::sot::sos_nms`]: gate, then classic
/// sort-and-scan suppression, then selection — three separate passes over
/// explicitly indexed candidates, structured nothing like the streaming
/// implementation but defined to agree with it exactly.
pub fn oracle_sos_nms(
    candidates: &[Detection],
    prev_box: &BBox,
    cfg: &SotConfig,
) -> Option<Detection> {
    let gated: Vec<(usize, Detection, f64)> = candidates
        .iter()
        .enumerate()
        .map(|(i, d)| (i, *d, iou(prev_box, &d.bbox)))
        .filter(|&(_, _, overlap)| overlap >= cfg.u_sos)
        .collect();
    if gated.is_empty() {
        return None;
    }

    let mut order: Vec<usize> = (0..gated.len()).collect();
    order.sort_by(|&a, &b| {
        gated[b].1.score.total_cmp(&gated[a].1.score).then(gated[a].0.cmp(&gated[b].0))
    });
    let mut removed = vec![false; gated.len()];
    let mut kept = Vec::new();
    for (pos, &a) in order.iter().enumerate() {
        if removed[a] {
            continue;
        }
        kept.push(a);
        for &b in &order[pos + 1..] {
            if !removed[b] && iou(&gated[a].1.bbox, &gated[b].1.bbox) > cfg.u_nms {
                removed[b] = true;
            }
        }
    }

    kept.into_iter()
        .max_by(|&x, &y| {
            gated[x]
                .2
                .total_cmp(&gated[y].2)
                .then(gated[x].1.score.total_cmp(&gated[y].1.score))
                .then(gated[y].0.cmp(&gated[x].0))
        })
        .map(|i| gated[i].1)
}

/// Spatial layout of a synthetic candidate frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapProfile {
    /// Roughly 30% of candidates crowd the previous box; the rest scatter.
    Clustered,
    /// Everything scatters with exactly zero overlap against the previous
    /// box, so the overlap gate keeps nothing.
    Uniform,
}

/// One reproducible frame of candidates around a fixed previous box, for
/// exercising and timing the candidate-selection routes.
pub fn candidate_set(count: usize, profile: OverlapProfile, seed: u64) -> (BBox, Vec<Detection>) {
    let prev = BBox::new(0.5, 0.5, 0.12, 0.12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let near = Normal::new(0.0, 0.02).unwrap();
    let clustered = match profile {
        OverlapProfile::Clustered => count * 3 / 10,
        OverlapProfile::Uniform => 0,
    };
    let mut detections = Vec::with_capacity(count);
    for i in 0..count {
        let bbox = if i < clustered {
            BBox {
                cx: prev.cx + near.sample(&mut rng),
                cy: prev.cy + near.sample(&mut rng),
                w: prev.w * rng.random_range(0.85..1.18),
                h: prev.h * rng.random_range(0.85..1.18),
            }
        } else {
            // Rejection-sample until spatially disjoint from the previous
            // box; scattered candidates may still overlap each other.
            loop {
                let candidate = BBox::new(
                    rng.random_range(0.05..0.95),
                    rng.random_range(0.05..0.95),
                    rng.random_range(0.03..0.15),
                    rng.random_range(0.03..0.15),
                );
                if iou(&prev, &candidate) == 0.0 {
                    break candidate;
                }
            }
        };
        detections.push(Detection::new(0, 0, rng.random_range(0.5..1.0), bbox));
    }
    (prev, detections)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::associate;
    use approx::assert_relative_eq;

    fn steady_spec(first: usize, last: usize) -> TrackSpec {
        TrackSpec {
            motion: Motion::Stationary,
            first_frame: first,
            last_frame: last,
            base_box: BBox::new(0.3, 0.4, 0.1, 0.12),
            class_id: 1,
            score: 0.9,
        }
    }

    #[test]
    fn same_seed_reproduces_the_stream() {
        let specs = [steady_spec(0, 40)];
        let perturb = PerturbationSpec {
            center_jitter: 0.004,
            dropout: 0.1,
            ghosts: 2,
            seed: 11,
            ..Default::default()
        };
        let (a, la) = generate("v", 50, &specs, &perturb).unwrap();
        let (b, lb) = generate("v", 50, &specs, &perturb).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        let (c, _) = generate("v", 50, &specs, &PerturbationSpec { seed: 12, ..perturb }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn clean_track_is_recovered_exactly() {
        let (seq, ledger) =
            generate("v", 30, &[steady_spec(3, 25)], &PerturbationSpec::default()).unwrap();
        assert_eq!(ledger.tracks[0].t_n, 23);
        assert_eq!(ledger.tracks[0].om, 0);
        let tracks = associate::run(&seq, associate::AssociatorConfig::default()).unwrap();
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].t_n(), 23);
        assert_eq!(tracks[0].om, 0);
        assert_eq!(tracks[0].first_frame, 3);
    }

    #[test]
    fn burst_dropout_gaps_the_ledger() {
        let perturb = PerturbationSpec { bursts: vec![(10, 3)], ..Default::default() };
        let (seq, ledger) = generate("v", 30, &[steady_spec(0, 19)], &perturb).unwrap();
        let t = &ledger.tracks[0];
        assert_eq!(t.emitted, 17);
        assert_eq!(t.span, Some((0, 19)));
        assert_eq!(t.om, 3);
        for f in 10..13 {
            assert!(seq.frames[f].detections.is_empty());
        }
    }

    #[test]
    fn full_dropout_leaves_nothing() {
        let perturb = PerturbationSpec { dropout: 1.0, ..Default::default() };
        let (seq, ledger) = generate("v", 10, &[steady_spec(0, 9)], &perturb).unwrap();
        assert_eq!(seq.total_detections(), 0);
        assert_eq!(ledger.tracks[0].emitted, 0);
        assert_eq!(ledger.tracks[0].t_n, 0);
        assert_eq!(ledger.tracks[0].span, None);
    }

    #[test]
    fn ghosts_are_short_and_disjoint() {
        let perturb =
            PerturbationSpec { ghosts: 4, ghost_length: 2, seed: 3, ..Default::default() };
        let (seq, ledger) = generate("v", 60, &[steady_spec(0, 59)], &perturb).unwrap();
        assert_eq!(ledger.ghosts.len(), 4);
        let real: Vec<BBox> = seq
            .frames
            .iter()
            .flat_map(|f| f.detections.iter())
            .filter(|d| d.class_id == 1)
            .map(|d| d.bbox)
            .collect();
        for g in &ledger.ghosts {
            assert_eq!(g.length, 2);
            assert!(g.first_frame + g.length <= 60);
            assert!(real.iter().all(|b| iou(b, &g.bbox) == 0.0));
        }
        // Ghosts show up as extra 2-frame tracklets.
        let tracks = associate::run(&seq, associate::AssociatorConfig::default()).unwrap();
        assert_eq!(tracks.len(), 5);
        assert_eq!(tracks.iter().filter(|t| t.t_n() == 2).count(), 4);
    }

    #[test]
    fn jitter_is_clamped_to_four_sigma() {
        let sigma = 0.01;
        let perturb = PerturbationSpec {
            center_jitter: sigma,
            size_jitter: sigma,
            seed: 5,
            ..Default::default()
        };
        let (seq, _) = generate("v", 200, &[steady_spec(0, 199)], &perturb).unwrap();
        for d in seq.frames.iter().flat_map(|f| f.detections.iter()) {
            assert!((d.bbox.cx - 0.3).abs() <= 4.0 * sigma + 1e-12);
            assert!((d.bbox.cy - 0.4).abs() <= 4.0 * sigma + 1e-12);
            assert!((d.bbox.w - 0.1).abs() <= 4.0 * sigma + 1e-12);
        }
    }

    #[test]
    fn constant_velocity_and_oscillation_trajectories() {
        let cv = TrackSpec {
            motion: Motion::ConstantVelocity { dcx: 0.01, dcy: -0.005, dw: 0.0, dh: 0.0 },
            ..steady_spec(5, 25)
        };
        let b = true_box(&cv, 15);
        assert_relative_eq!(b.cx, 0.3 + 0.01 * 10.0, max_relative = 1e-12);
        assert_relative_eq!(b.cy, 0.4 - 0.005 * 10.0, max_relative = 1e-12);

        let osc = TrackSpec {
            motion: Motion::Sinusoidal { amplitude: 0.05, period: 8 },
            ..steady_spec(0, 31)
        };
        assert_relative_eq!(true_box(&osc, 0).cx, 0.3);
        assert_relative_eq!(true_box(&osc, 2).cx, 0.35, max_relative = 1e-12);
        assert_relative_eq!(true_box(&osc, 8).cx, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn generate_validates_specs() {
        let bad_span = TrackSpec { first_frame: 5, last_frame: 3, ..steady_spec(0, 0) };
        assert!(matches!(
            generate("v", 10, &[bad_span], &PerturbationSpec::default()),
            Err(SynthError::InvertedSpan { .. })
        ));
        let long = steady_spec(0, 20);
        assert!(matches!(
            generate("v", 10, &[long], &PerturbationSpec::default()),
            Err(SynthError::SpanOutOfRange { .. })
        ));
        let bad_rate = PerturbationSpec { dropout: 1.5, ..Default::default() };
        assert!(matches!(
            generate("v", 10, &[steady_spec(0, 5)], &bad_rate),
            Err(SynthError::BadDropout(_))
        ));
    }

    #[test]
    fn dft_oracle_agrees_with_fft_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..60 {
            let len = rng.random_range(2..128);
            let series: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fast = crate::metrics::dft_amplitudes(&series);
            let slow = oracle_dft(&series);
            assert_eq!(fast.len(), slow.len());
            for (a, b) in fast.iter().zip(&slow) {
                assert_relative_eq!(a.q, b.q);
                assert_relative_eq!(a.amplitude, b.amplitude, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sos_oracle_agrees_with_streaming_route() {
        let cfg = SotConfig::default();
        for seed in 0..300 {
            let count = 1 + (seed as usize * 7) % 60;
            let (prev, mut cands) = candidate_set(count, OverlapProfile::Clustered, seed);
            // Quantize scores to force ties through the tie-break rules.
            for d in &mut cands {
                d.score = (d.score * 10.0).round() / 10.0;
            }
            assert_eq!(
                crate::sot::sos_nms(&cands, &prev, &cfg),
                oracle_sos_nms(&cands, &prev, &cfg),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn uniform_profile_defeats_the_gate() {
        let (prev, cands) = candidate_set(300, OverlapProfile::Uniform, 9);
        assert!(cands.iter().all(|d| iou(&prev, &d.bbox) == 0.0));
        assert_eq!(crate::sot::sos_nms(&cands, &prev, &SotConfig::default()), None);

        let (prev, cands) = candidate_set(300, OverlapProfile::Clustered, 9);
        let survivors = cands.iter().filter(|d| iou(&prev, &d.bbox) >= 0.3).count();
        assert!(survivors > 50, "got {survivors}");
    }
}
