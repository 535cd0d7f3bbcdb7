//! Track ingestion, windowed estimation, trajectory integration and
//! evaluation against ground truth.

mod evaluate;
mod tracks;
mod trajectory;
mod windows;

pub use evaluate::{
    evaluate, read_ground_truth, read_ground_truth_from, write_stats, ErrorStats, EvalReport,
    GroundTruth, GtPose, WindowError,
};
pub use tracks::{
    normalize, parse_tracks, parse_tracks_from, read_intrinsics, CameraIntrinsics, DropReason,
    DroppedTrack, Event, EventTrack, Mount, TrackReport, TrackValidity,
};
pub use trajectory::{
    integrate_trajectory, read_scale, read_scale_from, scale_from_ground_truth, write_scale,
    write_trajectory, Scale, ScaleEntry, TrajectoryPose,
};
pub use windows::{
    estimate_windows, read_omega, read_omega_from, translation_direction, window_bounds,
    write_omega, GapReason, WindowConfig, WindowEstimate, WindowGap, WindowOutcome,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: u64,
        column: usize,
        message: String,
    },
    #[error("{0}: no records")]
    EmptyInput(String),
    #[error("invalid intrinsics: {0}")]
    Intrinsics(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no scale for the window starting at {t_start}")]
    MissingScale { t_start: f64 },
    #[error(
        "window starting at {t_start} has no estimate; trajectories are not bridged across gaps"
    )]
    GapInSequence { t_start: f64 },
    #[error("ground truth does not cover [{t_start}, {t_end}]")]
    CoverageGap { t_start: f64, t_end: f64 },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl PipelineError {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn from_csv(path: &str, err: csv::Error) -> Self {
        let (line, column) = match err.kind() {
            csv::ErrorKind::Deserialize { pos, err } => (
                pos.as_ref().map_or(0, |p| p.line()),
                err.field().map_or(0, |f| f as usize + 1),
            ),
            csv::ErrorKind::UnequalLengths { pos, .. } => (pos.as_ref().map_or(0, |p| p.line()), 0),
            _ => (err.position().map_or(0, |p| p.line()), 0),
        };
        PipelineError::Parse {
            path: path.to_string(),
            line,
            column,
            message: err.to_string(),
        }
    }
}

/// Linear interpolation helper shared by ground truth lookups.
pub(crate) fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a + (b - a) * s
}
