//! Non-reference quality scores for tracked detection streams.
//!
//! Continuity side: mass of too-short tracklets (two duration cutoffs),
//! missed-frame mass inside tracklet spans, and the fraction of fragmented
//! tracklets. Stability side: discrete-Fourier jitter scores over each
//! tracklet's box-channel series. Raw ratios live in [0, 1] and pass through
//! a shared logarithmic contrast curve that spreads out the small values
//! where detector quality actually differs.

use crate::associate::{TrackId, Tracklet};
use crate::geom::BBox;
use rustfft::{num_complex::Complex, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("contrast input {0} outside [0, 1]")]
    ContrastDomain(f64),
    #[error("tracklet {id} reaches frame {last}, beyond sequence duration {t_v}")]
    TrackletBeyondSequence { id: TrackId, last: usize, t_v: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsConfig {
    /// Duration cutoff for the ephemeral short-tracklet score.
    pub s_esde: usize,
    /// Duration cutoff for the broader short-tracklet score; also the
    /// reliability bar used by stream refinement.
    pub s_sde: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { s_esde: 3, s_sde: 10 }
    }
}

/// One spectral sample: normalized frequency `q` (cycles per frame, up to
/// 0.5) and unnormalized DFT magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub q: f64,
    pub amplitude: f64,
}

/// `log_100(1 + 99x)`: fixes 0 and 1, strictly increasing in between, and
/// steepest near zero where raw error ratios cluster.
pub fn log_contrast(alpha: f64) -> Result<f64, MetricsError> {
    if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
        return Err(MetricsError::ContrastDomain(alpha));
    }
    Ok((1.0 + 99.0 * alpha).log(100.0))
}

/// Mass of tracklets shorter than `s` frames, relative to video duration:
/// `(1/t_v) * sum of t_n over tracklets with t_n < s`. Empty input or a
/// zero-length video scores 0.
pub fn short_duration_error(tracklets: &[Tracklet], t_v: usize, s: usize) -> f64 {
    if t_v == 0 {
        return 0.0;
    }
    let mass: usize = tracklets.iter().map(Tracklet::t_n).filter(|&t_n| t_n < s).sum();
    mass as f64 / t_v as f64
}

/// Fragment scores: `(missed-frame mass / total tracklet span, fraction of
/// tracklets with at least one interior miss)`. Both 0 for empty input.
pub fn fragment_errors(tracklets: &[Tracklet]) -> (f64, f64) {
    if tracklets.is_empty() {
        return (0.0, 0.0);
    }
    let om: usize = tracklets.iter().map(|t| t.om).sum();
    let span: usize = tracklets.iter().map(Tracklet::t_n).sum();
    let fragmented = tracklets.iter().filter(|t| t.om > 0).count();
    (om as f64 / span as f64, fragmented as f64 / tracklets.len() as f64)
}

/// DFT magnitude spectrum of one channel series, reported at normalized
/// frequencies `k/t` for `k = 1..=t/2`. The series mean is removed before
/// the transform, which leaves those magnitudes unchanged but keeps the
/// zero-frequency term from bleeding into them numerically; magnitudes are
/// unnormalized (no `1/t`). Series shorter than 2 samples have no spectrum.
pub fn dft_amplitudes(series: &[f64]) -> Vec<SpectrumPoint> {
    let t = series.len();
    if t < 2 {
        return Vec::new();
    }
    let mean = series.iter().sum::<f64>() / t as f64;
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&x| Complex::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(t).process(&mut buf);
    (1..=t / 2)
        .map(|k| SpectrumPoint { q: k as f64 / t as f64, amplitude: buf[k].norm() })
        .collect()
}

pub const CHANNELS: [Channel; 4] = [Channel::Cx, Channel::Cy, Channel::W, Channel::H];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Cx,
    Cy,
    W,
    H,
}

impl Channel {
    pub fn of(&self, b: &BBox) -> f64 {
        match self {
            Channel::Cx => b.cx,
            Channel::Cy => b.cy,
            Channel::W => b.w,
            Channel::H => b.h,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Channel::Cx => "cx",
            Channel::Cy => "cy",
            Channel::W => "w",
            Channel::H => "h",
        }
    }
}

/// Complete per-frame series of one box channel over a tracklet's span,
/// with interior gaps filled by linear interpolation between the
/// surrounding matches.
pub fn channel_series(tracklet: &Tracklet, channel: Channel) -> Vec<f64> {
    let n = tracklet.history.len();
    let mut out = vec![f64::NAN; n];
    for (i, entry) in tracklet.history.iter().enumerate() {
        if let Some(d) = entry.detection() {
            out[i] = channel.of(&d.bbox);
        }
    }
    // History starts and ends matched, so every gap has both anchors.
    let mut prev = 0;
    for i in 1..n {
        if out[i].is_nan() {
            continue;
        }
        if i > prev + 1 {
            let (a, b) = (out[prev], out[i]);
            let len = (i - prev) as f64;
            for (step, slot) in out[prev + 1..i].iter_mut().enumerate() {
                *slot = a + (b - a) * (step + 1) as f64 / len;
            }
        }
        prev = i;
    }
    out
}

fn weighted_spectrum_sum(series: &[f64]) -> f64 {
    dft_amplitudes(series).iter().map(|p| p.q * p.amplitude).sum()
}

/// Frequency-weighted spectral mass of one tracklet, split into
/// (center channels, size channels).
pub fn tracklet_jitter(tracklet: &Tracklet) -> (f64, f64) {
    let center = weighted_spectrum_sum(&channel_series(tracklet, Channel::Cx))
        + weighted_spectrum_sum(&channel_series(tracklet, Channel::Cy));
    let size = weighted_spectrum_sum(&channel_series(tracklet, Channel::W))
        + weighted_spectrum_sum(&channel_series(tracklet, Channel::H));
    (center, size)
}

/// Center and size jitter scores over a tracklet set: `1000 * sum of
/// q-weighted spectral mass / sum of tracklet spans`. Returns (center, size).
pub fn jitter_errors(tracklets: &[Tracklet]) -> (f64, f64) {
    let span: usize = tracklets.iter().map(Tracklet::t_n).sum();
    if span == 0 {
        return (0.0, 0.0);
    }
    let (mut center, mut size) = (0.0, 0.0);
    for t in tracklets {
        let (c, s) = tracklet_jitter(t);
        center += c;
        size += s;
    }
    (1e3 * center / span as f64, 1e3 * size / span as f64)
}

/// Continuity ratios, either raw or contrast-mapped depending on context.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ContinuityErrors {
    pub esde: f64,
    pub sde: f64,
    pub tfe: f64,
    pub ftr: f64,
}

impl ContinuityErrors {
    pub fn sum(&self) -> f64 {
        self.esde + self.sde + self.tfe + self.ftr
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackletStats {
    pub id: TrackId,
    pub class_id: i64,
    pub first_frame: usize,
    pub last_matched_frame: usize,
    pub t_n: usize,
    pub om: usize,
    /// q-weighted spectral mass of the center channels (unscaled).
    pub center_jitter: f64,
    /// Same for the size channels.
    pub size_jitter: f64,
}

/// Full score set for one sequence's tracklets.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceReport {
    pub t_v: usize,
    pub n_tracklets: usize,
    /// Sum of tracklet spans (the fragment and jitter denominator).
    pub total_t_n: usize,
    pub raw: ContinuityErrors,
    /// Contrast-mapped continuity errors; raw ratios above 1 (possible when
    /// overlapping short tracklets outweigh the video length) are clamped
    /// to 1 first.
    pub logged: ContinuityErrors,
    /// Sum of the four contrast-mapped continuity errors.
    pub rce: f64,
    pub cje: f64,
    pub sje: f64,
    pub lje: f64,
    pub tracklets: Vec<TrackletStats>,
}

/// Scores one sequence's tracklets against its duration `t_v`.
pub fn evaluate(
    tracklets: &[Tracklet],
    t_v: usize,
    cfg: &MetricsConfig,
) -> Result<SequenceReport, MetricsError> {
    for t in tracklets {
        if t.last_matched_frame >= t_v {
            return Err(MetricsError::TrackletBeyondSequence {
                id: t.id,
                last: t.last_matched_frame,
                t_v,
            });
        }
    }
    let raw = ContinuityErrors {
        esde: short_duration_error(tracklets, t_v, cfg.s_esde),
        sde: short_duration_error(tracklets, t_v, cfg.s_sde),
        tfe: fragment_errors(tracklets).0,
        ftr: fragment_errors(tracklets).1,
    };
    let log = |x: f64| log_contrast(x.min(1.0)).expect("clamped input is in domain");
    let logged = ContinuityErrors {
        esde: log(raw.esde),
        sde: log(raw.sde),
        tfe: log(raw.tfe),
        ftr: log(raw.ftr),
    };
    let (cje, sje) = jitter_errors(tracklets);
    let stats = tracklets
        .iter()
        .map(|t| {
            let (center, size) = tracklet_jitter(t);
            TrackletStats {
                id: t.id,
                class_id: t.class_id,
                first_frame: t.first_frame,
                last_matched_frame: t.last_matched_frame,
                t_n: t.t_n(),
                om: t.om,
                center_jitter: center,
                size_jitter: size,
            }
        })
        .collect();
    Ok(SequenceReport {
        t_v,
        n_tracklets: tracklets.len(),
        total_t_n: tracklets.iter().map(Tracklet::t_n).sum(),
        raw,
        logged,
        rce: logged.sum(),
        cje,
        sje,
        lje: cje + sje,
        tracklets: stats,
    })
}

/// Pooled scores across several sequences, equal to scoring the union of
/// their tracklets: each raw ratio is recombined over its own natural
/// denominator (duration, span sum, or tracklet count), then re-mapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateReport {
    pub n_videos: usize,
    pub total_t_v: usize,
    pub n_tracklets: usize,
    pub raw: ContinuityErrors,
    pub logged: ContinuityErrors,
    pub rce: f64,
    pub cje: f64,
    pub sje: f64,
    pub lje: f64,
}

pub fn aggregate(reports: &[SequenceReport]) -> AggregateReport {
    let total_t_v: usize = reports.iter().map(|r| r.t_v).sum();
    let n_tracklets: usize = reports.iter().map(|r| r.n_tracklets).sum();
    let total_t_n: usize = reports.iter().map(|r| r.total_t_n).sum();
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };

    let mut short_esde = 0.0;
    let mut short_sde = 0.0;
    let mut om_mass = 0.0;
    let mut fragmented = 0.0;
    let mut center = 0.0;
    let mut size = 0.0;
    for r in reports {
        short_esde += r.raw.esde * r.t_v as f64;
        short_sde += r.raw.sde * r.t_v as f64;
        om_mass += r.raw.tfe * r.total_t_n as f64;
        fragmented += r.raw.ftr * r.n_tracklets as f64;
        center += r.cje * r.total_t_n as f64 / 1e3;
        size += r.sje * r.total_t_n as f64 / 1e3;
    }
    let raw = ContinuityErrors {
        esde: ratio(short_esde, total_t_v as f64),
        sde: ratio(short_sde, total_t_v as f64),
        tfe: ratio(om_mass, total_t_n as f64),
        ftr: ratio(fragmented, n_tracklets as f64),
    };
    let log = |x: f64| log_contrast(x.min(1.0)).expect("clamped input is in domain");
    let logged = ContinuityErrors {
        esde: log(raw.esde),
        sde: log(raw.sde),
        tfe: log(raw.tfe),
        ftr: log(raw.ftr),
    };
    let cje = 1e3 * ratio(center, total_t_n as f64);
    let sje = 1e3 * ratio(size, total_t_n as f64);
    AggregateReport {
        n_videos: reports.len(),
        total_t_v,
        n_tracklets,
        raw,
        logged,
        rce: logged.sum(),
        cje,
        sje,
        lje: cje + sje,
    }
}
