//! Analytics for video object detection streams, built around tracklets:
//! per-object detection chains recovered by IoU association.
//!
//! The crate covers four stages that share one set of stream types:
//!
//! * [`associate`] — greedy IoU tracker that turns per-frame detections
//!   into tracklets with explicit gap bookkeeping,
//! * [`metrics`] — non-reference continuity scores (short-duration,
//!   fragment, fragmented-track rates) and Fourier jitter scores computed
//!   from those tracklets,
//! * [`refine`] — online stream refinement: short-tracklet suppression,
//!   velocity fill for missed frames, and weighted temporal box fusion,
//! * [`sot`] — single-object tracking by detection with overlap-gated
//!   candidate suppression and automatic MOT/SOT hand-off.
//!
//! [`synth`] generates perturbed synthetic streams with a defect ledger so
//! every score can be checked against known ground truth.
//!
//! All boxes are axis-aligned in normalized image coordinates (center x,
//! center y, width, height as fractions of the frame size).

pub mod associate;
pub mod geom;
pub mod metrics;
pub mod nms;
pub mod refine;
pub mod sot;
pub mod stream;
pub mod synth;

pub use associate::{Associator, AssociatorConfig, FrameEvents, HistoryEntry, TrackId, Tracklet};
pub use geom::{iou, BBox};
pub use metrics::{evaluate, MetricsConfig, SequenceReport, SpectrumPoint};
pub use nms::nms;
pub use refine::{refine_stream, EmitMode, FusionWeights, RefinedBox, Refiner, RefinerConfig};
pub use sot::{sos_nms, SotConfig, SotTracker};
pub use stream::{Detection, FrameDetections, VideoSequence};
