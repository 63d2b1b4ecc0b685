//! Process-level error type. Every failure maps onto one of two non-zero
//! exit codes: 1 for anything unreadable or unparseable, 2 for well-formed
//! input that breaks a domain invariant.

use thiserror::Error;
use vidtempo_core::associate::AssociateError;
use vidtempo_core::metrics::MetricsError;
use vidtempo_core::stream::StreamError;
use vidtempo_core::synth::SynthError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Parse {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    /// Spec-document schema violation; `at` names the offending JSON path.
    #[error("{path}: at `{at}`: {source}")]
    Schema {
        path: String,
        at: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}:{line}: {source}")]
    Record {
        path: String,
        line: usize,
        #[source]
        source: StreamError,
    },
    #[error("video {video_id}: {source}")]
    Stream {
        video_id: String,
        #[source]
        source: StreamError,
    },
    #[error("video {video_id}: {source}")]
    Associate {
        video_id: String,
        #[source]
        source: AssociateError,
    },
    #[error("video {video_id}: {source}")]
    Metrics {
        video_id: String,
        #[source]
        source: MetricsError,
    },
    #[error("{path}: {source}")]
    Spec {
        path: String,
        #[source]
        source: SynthError,
    },
    #[error("video {video_id}: track {track_id} has two rows for frame {frame}")]
    DuplicateTrackFrame { video_id: String, track_id: u64, frame: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Schema { .. } => 1,
            CliError::Record { .. }
            | CliError::Stream { .. }
            | CliError::Associate { .. }
            | CliError::Metrics { .. }
            | CliError::Spec { .. }
            | CliError::DuplicateTrackFrame { .. } => 2,
        }
    }
}
