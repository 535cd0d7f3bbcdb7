use std::io::{Read, Write};
use std::path::Path;

use eventack_core::geometry::{relative_pose, AckermannParams, PlanarPose};
use serde::{Deserialize, Serialize};

use super::evaluate::GroundTruth;
use super::windows::WindowOutcome;
use super::PipelineError;

/// Vehicle pose in the frame of the first window start. Same convention as
/// the ground-truth files: x right, y forward, yaw positive for right turns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPose {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

/// Forward displacement over one window, from an external source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleEntry {
    pub t_start: f64,
    pub t_end: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scale {
    Constant(f64),
    PerWindow(Vec<ScaleEntry>),
}

impl Scale {
    fn lookup(&self, t_start: f64) -> Option<f64> {
        match self {
            Scale::Constant(d) => Some(*d),
            Scale::PerWindow(v) => v
                .iter()
                .find(|e| (e.t_start - t_start).abs() <= 1e-6)
                .map(|e| e.d),
        }
    }
}

/// Chains the per-window arcs into a trajectory.
///
/// Consecutive windows may overlap; each window advances the pose up to the
/// start of the next one (the last window runs to its end).
pub fn integrate_trajectory(
    windows: &[WindowOutcome],
    scale: &Scale,
) -> Result<Vec<TrajectoryPose>, PipelineError> {
    let Some(first) = windows.first() else {
        return Ok(Vec::new());
    };
    let mut pose = PlanarPose::identity();
    let mut out = vec![TrajectoryPose {
        t: first.t_start(),
        x: 0.0,
        y: 0.0,
        yaw: 0.0,
    }];
    for (k, w) in windows.iter().enumerate() {
        let est = w.estimate().ok_or(PipelineError::GapInSequence {
            t_start: w.t_start(),
        })?;
        let d = scale
            .lookup(est.t_start)
            .ok_or(PipelineError::MissingScale {
                t_start: est.t_start,
            })?;
        let step_end = windows.get(k + 1).map_or(est.t_end, |n| n.t_start());
        let params = AckermannParams::new(est.omega, est.t_end - est.t_start).with_displacement(d);
        pose = pose.compose(&relative_pose(&params, step_end - est.t_start));
        out.push(TrajectoryPose {
            t: step_end,
            x: pose.translation[0],
            y: pose.translation[1],
            yaw: pose.rotation,
        });
    }
    Ok(out)
}

/// Forward displacement of the ground truth over each window, measured in the
/// window's start frame.
pub fn scale_from_ground_truth(
    gt: &GroundTruth,
    windows: &[(f64, f64)],
) -> Result<Vec<ScaleEntry>, PipelineError> {
    windows
        .iter()
        .map(|&(t_start, t_end)| {
            let (a, b) = gt
                .pose_at(t_start)
                .zip(gt.pose_at(t_end))
                .ok_or(PipelineError::CoverageGap { t_start, t_end })?;
            let start = PlanarPose {
                rotation: a.yaw,
                translation: [a.x, a.y],
            };
            let q = start.from_reference([b.x, b.y]);
            Ok(ScaleEntry {
                t_start,
                t_end,
                d: q[1],
            })
        })
        .collect()
}

pub fn write_trajectory(out: impl Write, poses: &[TrajectoryPose]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "y", "yaw"])?;
    for p in poses {
        w.serialize((p.t, p.x, p.y, p.yaw))?;
    }
    w.flush()
        .map_err(|e| PipelineError::io("trajectory output", e))?;
    Ok(())
}

pub fn write_scale(out: impl Write, entries: &[ScaleEntry]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_start", "t_end", "d"])?;
    for e in entries {
        w.serialize((e.t_start, e.t_end, e.d))?;
    }
    w.flush()
        .map_err(|e| PipelineError::io("scale output", e))?;
    Ok(())
}

pub fn read_scale(path: &Path) -> Result<Scale, PipelineError> {
    let name = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| PipelineError::io(&name, e))?;
    read_scale_from(file, &name)
}

pub fn read_scale_from(reader: impl Read, name: &str) -> Result<Scale, PipelineError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let entries = rdr
        .deserialize::<ScaleEntry>()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| PipelineError::from_csv(name, e))?;
    if entries.is_empty() {
        return Err(PipelineError::EmptyInput(name.to_string()));
    }
    Ok(Scale::PerWindow(entries))
}
