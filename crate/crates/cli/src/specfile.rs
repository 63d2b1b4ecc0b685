//! Generator spec documents: one JSON object describing the clean tracks
//! and the defects to inject. Unknown keys are schema errors here (unlike
//! stream rows), so a typo cannot silently disable a defect.

use serde::Deserialize;
use vidtempo_core::synth::{Motion, PerturbationSpec, TrackSpec};
use vidtempo_core::BBox;

use crate::error::CliError;
use crate::io;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpecFile {
    pub video_id: String,
    pub t_v: usize,
    pub tracks: Vec<TrackSpecFile>,
    #[serde(default)]
    pub perturb: PerturbFile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackSpecFile {
    pub motion: MotionFile,
    pub first_frame: usize,
    /// Inclusive.
    pub last_frame: usize,
    pub base_box: BoxFile,
    #[serde(default)]
    pub class_id: i64,
    #[serde(default = "default_score")]
    pub score: f64,
}

fn default_score() -> f64 {
    0.9
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxFile {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MotionFile {
    Stationary,
    ConstantVelocity {
        #[serde(default)]
        dcx: f64,
        #[serde(default)]
        dcy: f64,
        #[serde(default)]
        dw: f64,
        #[serde(default)]
        dh: f64,
    },
    Sinusoidal {
        amplitude: f64,
        period: usize,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbFile {
    pub center_jitter: f64,
    pub size_jitter: f64,
    pub dropout: f64,
    /// `[start, length]` frame windows dropped for every track.
    pub bursts: Vec<(usize, usize)>,
    pub ghosts: usize,
    pub ghost_length: usize,
    pub seed: u64,
}

impl Default for PerturbFile {
    fn default() -> Self {
        let p = PerturbationSpec::default();
        Self {
            center_jitter: p.center_jitter,
            size_jitter: p.size_jitter,
            dropout: p.dropout,
            bursts: p.bursts,
            ghosts: p.ghosts,
            ghost_length: p.ghost_length,
            seed: p.seed,
        }
    }
}

impl SynthSpecFile {
    pub fn parse(path: &str, text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
            path: io::display_path(path).to_owned(),
            at: e.path().to_string(),
            source: e.into_inner(),
        })
    }

    pub fn track_specs(&self) -> Vec<TrackSpec> {
        self.tracks
            .iter()
            .map(|t| TrackSpec {
                motion: match t.motion {
                    MotionFile::Stationary => Motion::Stationary,
                    MotionFile::ConstantVelocity { dcx, dcy, dw, dh } => {
                        Motion::ConstantVelocity { dcx, dcy, dw, dh }
                    }
                    MotionFile::Sinusoidal { amplitude, period } => {
                        Motion::Sinusoidal { amplitude, period }
                    }
                },
                first_frame: t.first_frame,
                last_frame: t.last_frame,
                base_box: BBox::new(t.base_box.cx, t.base_box.cy, t.base_box.w, t.base_box.h),
                class_id: t.class_id,
                score: t.score,
            })
            .collect()
    }

    pub fn perturbation(&self, seed_override: Option<u64>) -> PerturbationSpec {
        let p = &self.perturb;
        PerturbationSpec {
            center_jitter: p.center_jitter,
            size_jitter: p.size_jitter,
            dropout: p.dropout,
            bursts: p.bursts.clone(),
            ghosts: p.ghosts,
            ghost_length: p.ghost_length,
            seed: seed_override.unwrap_or(p.seed),
        }
    }
}
