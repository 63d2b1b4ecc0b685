//! Detection stream containers: single detections, per-frame groups, and
//! whole sequences with a fixed duration.

use crate::geom::{BBox, BoxError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error(transparent)]
    Box(#[from] BoxError),
    #[error("detection score {score} outside [0, 1]")]
    ScoreOutOfRange { score: f64 },
    #[error("frame {frame} outside sequence duration {t_v}")]
    FrameOutOfRange { frame: usize, t_v: usize },
    #[error("frame slot {slot} holds frame index {found}")]
    MisplacedFrame { slot: usize, found: usize },
    #[error("detection in frame slot {slot} carries frame index {found}")]
    MisplacedDetection { slot: usize, found: usize },
}

/// One detector output: a scored, class-labeled box on a specific frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub frame: usize,
    pub class_id: i64,
    pub score: f64,
    pub bbox: BBox,
}

impl Detection {
    pub fn new(frame: usize, class_id: i64, score: f64, bbox: BBox) -> Self {
        Self { frame, class_id, score, bbox }
    }

    pub fn validate(&self) -> Result<(), StreamError> {
        self.bbox.validate()?;
        if !(self.score.is_finite() && (0.0..=1.0).contains(&self.score)) {
            return Err(StreamError::ScoreOutOfRange { score: self.score });
        }
        Ok(())
    }
}

/// All detections of one frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameDetections {
    pub frame: usize,
    pub detections: Vec<Detection>,
}

impl FrameDetections {
    pub fn new(frame: usize, detections: Vec<Detection>) -> Self {
        Self { frame, detections }
    }
}

/// A whole video's detection stream: exactly `t_v` frame slots, one per
/// frame index `0..t_v`, frames without detections included as empty slots.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoSequence {
    pub video_id: String,
    pub t_v: usize,
    pub frames: Vec<FrameDetections>,
}

impl VideoSequence {
    /// Sequence of `t_v` empty frames.
    pub fn empty(video_id: impl Into<String>, t_v: usize) -> Self {
        Self {
            video_id: video_id.into(),
            t_v,
            frames: (0..t_v).map(|f| FrameDetections::new(f, Vec::new())).collect(),
        }
    }

    /// Buckets a flat detection list into dense frame slots, validating each
    /// detection along the way. Input order within a frame is preserved.
    pub fn from_detections(
        video_id: impl Into<String>,
        t_v: usize,
        detections: impl IntoIterator<Item = Detection>,
    ) -> Result<Self, StreamError> {
        let mut seq = Self::empty(video_id, t_v);
        for det in detections {
            det.validate()?;
            if det.frame >= t_v {
                return Err(StreamError::FrameOutOfRange { frame: det.frame, t_v });
            }
            seq.frames[det.frame].detections.push(det);
        }
        Ok(seq)
    }

    /// Checks the density invariant: slot `i` holds frame `i`, and every
    /// detection in it agrees, with valid scores and boxes.
    pub fn validate(&self) -> Result<(), StreamError> {
        if self.frames.len() != self.t_v {
            return Err(StreamError::MisplacedFrame { slot: self.frames.len(), found: self.t_v });
        }
        for (slot, fd) in self.frames.iter().enumerate() {
            if fd.frame != slot {
                return Err(StreamError::MisplacedFrame { slot, found: fd.frame });
            }
            for det in &fd.detections {
                if det.frame != slot {
                    return Err(StreamError::MisplacedDetection { slot, found: det.frame });
                }
                det.validate()?;
            }
        }
        Ok(())
    }

    pub fn total_detections(&self) -> usize {
        self.frames.iter().map(|f| f.detections.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(frame: usize, score: f64) -> Detection {
        Detection::new(frame, 0, score, BBox::new(0.5, 0.5, 0.1, 0.1))
    }

    #[test]
    fn from_detections_buckets_densely() {
        let seq =
            VideoSequence::from_detections("v", 4, vec![det(2, 0.9), det(0, 0.8), det(2, 0.7)])
                .unwrap();
        assert_eq!(seq.frames.len(), 4);
        assert_eq!(seq.frames[0].detections.len(), 1);
        assert_eq!(seq.frames[1].detections.len(), 0);
        assert_eq!(seq.frames[2].detections.len(), 2);
        // Input order kept within the frame.
        assert_eq!(seq.frames[2].detections[0].score, 0.9);
        seq.validate().unwrap();
        assert_eq!(seq.total_detections(), 3);
    }

    #[test]
    fn from_detections_rejects_out_of_range_frame() {
        let err = VideoSequence::from_detections("v", 3, vec![det(3, 0.9)]).unwrap_err();
        assert!(matches!(err, StreamError::FrameOutOfRange { frame: 3, t_v: 3 }));
    }

    #[test]
    fn validation_rejects_bad_scores() {
        assert!(det(0, 1.0).validate().is_ok());
        assert!(det(0, 0.0).validate().is_ok());
        assert!(det(0, 1.5).validate().is_err());
        assert!(det(0, -0.1).validate().is_err());
        assert!(det(0, f64::NAN).validate().is_err());
    }

    #[test]
    fn validate_catches_misplaced_frames() {
        let mut seq = VideoSequence::empty("v", 3);
        seq.frames[1].frame = 2;
        assert!(matches!(seq.validate(), Err(StreamError::MisplacedFrame { slot: 1, found: 2 })));
    }

    #[test]
    fn empty_sequence_is_valid() {
        VideoSequence::empty("v", 0).validate().unwrap();
        VideoSequence::empty("v", 5).validate().unwrap();
    }
}
