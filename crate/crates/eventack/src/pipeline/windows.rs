use std::io::{Read, Write};
use std::path::Path;

use eventack_core::robust::{histogram_vote, VoteConfig, VoteError};
use eventack_core::solver::{solve_omega, ExpansionOrder, SolverConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tracks::{normalize, CameraIntrinsics, EventTrack};
use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowConfig {
    /// Window length, s. Also used as the solver's scale constant.
    pub length: f64,
    pub stride: f64,
    /// Time of the first window boundary; all boundaries are `epoch + k * stride`.
    pub epoch: f64,
    /// Events a clipped track needs inside a window.
    pub min_events: usize,
    /// Minimum time span of a clipped track, as a fraction of `length`.
    pub min_span_fraction: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            length: 0.2,
            stride: 0.1,
            epoch: 0.0,
            min_events: 8,
            min_span_fraction: 0.5,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.length > 0.0) || !(self.stride > 0.0) || !self.epoch.is_finite() {
            return Err(PipelineError::InvalidConfig(
                "window length and stride must be positive".into(),
            ));
        }
        if self.min_events < eventack_core::solver::MIN_SAMPLES {
            return Err(PipelineError::InvalidConfig(format!(
                "min_events must be at least {}",
                eventack_core::solver::MIN_SAMPLES
            )));
        }
        Ok(())
    }
}

/// Every lattice window `[epoch + k stride, epoch + k stride + length]`
/// lying inside `[t_min, t_max]`.
pub fn window_bounds(cfg: &WindowConfig, t_min: f64, t_max: f64) -> Vec<(f64, f64)> {
    let eps = 1e-9 * cfg.stride;
    let k_lo = ((t_min - cfg.epoch) / cfg.stride - eps).ceil() as i64;
    let k_hi = ((t_max - cfg.length - cfg.epoch) / cfg.stride + eps).floor() as i64;
    (k_lo..=k_hi)
        .map(|k| {
            // Rounded to the nanosecond so boundaries print and match cleanly.
            let s = round_ns(cfg.epoch + k as f64 * cfg.stride);
            (s, round_ns(s + cfg.length))
        })
        .collect()
}

fn round_ns(t: f64) -> f64 {
    (t * 1e9).round() / 1e9
}

/// Unit direction of travel over an arc that turns by `theta`.
///
/// Proportional to `(1 - cos theta, sin theta) / sin(theta)`, i.e. the chord
/// of the arc for positive forward displacement.
pub fn translation_direction(theta: f64) -> [f64; 2] {
    let h = 0.5 * theta;
    [h.sin(), h.cos()]
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowEstimate {
    pub t_start: f64,
    pub t_end: f64,
    pub omega: f64,
    pub inlier_count: usize,
    pub translation_dir: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "reason")]
pub enum GapReason {
    NoTracks,
    NoSolutions {
        failed: usize,
    },
    InsufficientConsensus {
        found: usize,
        needed: usize,
    },
    /// Read back from an omega file, where the cause is not stored.
    Recorded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowGap {
    pub t_start: f64,
    pub t_end: f64,
    #[serde(flatten)]
    pub reason: GapReason,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindowOutcome {
    Estimate(WindowEstimate),
    Gap(WindowGap),
}

impl WindowOutcome {
    pub fn t_start(&self) -> f64 {
        match self {
            WindowOutcome::Estimate(e) => e.t_start,
            WindowOutcome::Gap(g) => g.t_start,
        }
    }

    pub fn t_end(&self) -> f64 {
        match self {
            WindowOutcome::Estimate(e) => e.t_end,
            WindowOutcome::Gap(g) => g.t_end,
        }
    }

    pub fn estimate(&self) -> Option<&WindowEstimate> {
        match self {
            WindowOutcome::Estimate(e) => Some(e),
            WindowOutcome::Gap(_) => None,
        }
    }
}

/// Solves every window of the lattice covering the tracks. Output is sorted by
/// window start.
pub fn estimate_windows(
    tracks: &[EventTrack],
    intrinsics: &CameraIntrinsics,
    order: ExpansionOrder,
    window: &WindowConfig,
    solver: &SolverConfig,
    vote: &VoteConfig,
) -> Result<Vec<WindowOutcome>, PipelineError> {
    window.validate()?;
    let t_min = tracks
        .iter()
        .map(|t| t.t_first())
        .fold(f64::INFINITY, f64::min);
    let t_max = tracks
        .iter()
        .map(|t| t.t_last())
        .fold(f64::NEG_INFINITY, f64::max);
    if !(t_max >= t_min) {
        return Ok(Vec::new());
    }
    let bounds = window_bounds(window, t_min, t_max);
    Ok(bounds
        .par_iter()
        .map(|&(s, e)| solve_window(tracks, intrinsics, order, window, solver, vote, s, e))
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn solve_window(
    tracks: &[EventTrack],
    intrinsics: &CameraIntrinsics,
    order: ExpansionOrder,
    window: &WindowConfig,
    solver: &SolverConfig,
    vote: &VoteConfig,
    t_start: f64,
    t_end: f64,
) -> WindowOutcome {
    let gap = |reason| {
        WindowOutcome::Gap(WindowGap {
            t_start,
            t_end,
            reason,
        })
    };
    let mut estimates = Vec::new();
    let mut candidates = 0usize;
    for track in tracks {
        if track.t_last() < t_start || track.t_first() >= t_end {
            continue;
        }
        let clipped = EventTrack {
            track_id: track.track_id,
            events: track
                .events
                .iter()
                .filter(|e| e.t >= t_start && e.t < t_end)
                .copied()
                .collect(),
        };
        if clipped.events.len() < window.min_events
            || clipped.duration() < window.min_span_fraction * window.length
        {
            continue;
        }
        candidates += 1;
        let samples = normalize(&clipped, intrinsics, t_start);
        if let Ok(mut est) = solve_omega(&samples, order, window.length, solver) {
            est.track_id = track.track_id;
            estimates.push(est);
        }
    }
    if candidates == 0 {
        return gap(GapReason::NoTracks);
    }
    if estimates.is_empty() {
        return gap(GapReason::NoSolutions { failed: candidates });
    }
    match histogram_vote(&estimates, vote) {
        Ok(r) => WindowOutcome::Estimate(WindowEstimate {
            t_start,
            t_end,
            omega: r.omega_consensus,
            inlier_count: r.inlier_ids.len(),
            translation_dir: translation_direction(r.omega_consensus * (t_end - t_start)),
        }),
        Err(VoteError::InsufficientConsensus { found, needed }) => {
            gap(GapReason::InsufficientConsensus { found, needed })
        }
        Err(_) => gap(GapReason::NoSolutions { failed: candidates }),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct OmegaRow {
    t_start: f64,
    t_end: f64,
    omega: f64,
    inliers: usize,
    dir_x: f64,
    dir_y: f64,
}

/// Writes `t_start,t_end,omega,inliers,dir_x,dir_y`; gaps carry NaN.
pub fn write_omega(out: impl Write, outcomes: &[WindowOutcome]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    for o in outcomes {
        let row = match o {
            WindowOutcome::Estimate(e) => OmegaRow {
                t_start: e.t_start,
                t_end: e.t_end,
                omega: e.omega,
                inliers: e.inlier_count,
                dir_x: e.translation_dir[0],
                dir_y: e.translation_dir[1],
            },
            WindowOutcome::Gap(g) => OmegaRow {
                t_start: g.t_start,
                t_end: g.t_end,
                omega: f64::NAN,
                inliers: 0,
                dir_x: f64::NAN,
                dir_y: f64::NAN,
            },
        };
        w.serialize(row)?;
    }
    if outcomes.is_empty() {
        w.write_record(["t_start", "t_end", "omega", "inliers", "dir_x", "dir_y"])?;
    }
    w.flush()
        .map_err(|e| PipelineError::io("omega output", e))?;
    Ok(())
}

pub fn read_omega(path: &Path) -> Result<Vec<WindowOutcome>, PipelineError> {
    let name = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| PipelineError::io(&name, e))?;
    read_omega_from(file, &name)
}

pub fn read_omega_from(reader: impl Read, name: &str) -> Result<Vec<WindowOutcome>, PipelineError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<OmegaRow>() {
        let r = row.map_err(|e| PipelineError::from_csv(name, e))?;
        out.push(if r.omega.is_nan() {
            WindowOutcome::Gap(WindowGap {
                t_start: r.t_start,
                t_end: r.t_end,
                reason: GapReason::Recorded,
            })
        } else {
            WindowOutcome::Estimate(WindowEstimate {
                t_start: r.t_start,
                t_end: r.t_end,
                omega: r.omega,
                inlier_count: r.inliers,
                translation_dir: [r.dir_x, r.dir_y],
            })
        });
    }
    if out.is_empty() {
        return Err(PipelineError::EmptyInput(name.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_is_data_independent() {
        let cfg = WindowConfig::default();
        let a = window_bounds(&cfg, 0.03, 1.0);
        assert_eq!(a.first().unwrap().0, 0.1);
        assert!((a.last().unwrap().1 - 1.0).abs() < 1e-12);
        // Shifting the data inside the same lattice cell keeps boundaries.
        let b = window_bounds(&cfg, 0.05, 1.02);
        assert_eq!(a, b);
        let shifted = window_bounds(&WindowConfig { epoch: 0.05, ..cfg }, 0.03, 1.0);
        assert_eq!(shifted.first().unwrap().0, 0.05);
    }

    #[test]
    fn direction_is_unit_chord() {
        for theta in [-0.8, -0.1, 0.0, 0.05, 0.6] {
            let d = translation_direction(theta);
            assert!((d[0].hypot(d[1]) - 1.0).abs() < 1e-15);
            if theta != 0.0 {
                // Parallel to (1 - cos, sin) / sin(theta), the chord for d > 0.
                let r = 1.0 / f64::sin(theta);
                let chord = [r * (1.0 - theta.cos()), r * theta.sin()];
                assert!((d[0] * chord[1] - d[1] * chord[0]).abs() < 1e-12);
                assert!(d[0] * chord[0] + d[1] * chord[1] > 0.0);
            }
        }
        assert_eq!(translation_direction(0.0), [0.0, 1.0]);
    }

    #[test]
    fn omega_csv_round_trip() {
        let outcomes = vec![
            WindowOutcome::Estimate(WindowEstimate {
                t_start: 0.0,
                t_end: 0.2,
                omega: 0.123_456_789_012_345_6,
                inlier_count: 7,
                translation_dir: translation_direction(0.0246),
            }),
            WindowOutcome::Gap(WindowGap {
                t_start: 0.1,
                t_end: 0.3,
                reason: GapReason::NoTracks,
            }),
        ];
        let mut buf = Vec::new();
        write_omega(&mut buf, &outcomes).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t_start,t_end,omega,inliers,dir_x,dir_y\n"));
        assert!(text.contains("NaN"));
        let back = read_omega_from(buf.as_slice(), "mem").unwrap();
        assert_eq!(back[0], outcomes[0]);
        assert!(matches!(
            back[1],
            WindowOutcome::Gap(WindowGap {
                reason: GapReason::Recorded,
                ..
            })
        ));
    }
}
