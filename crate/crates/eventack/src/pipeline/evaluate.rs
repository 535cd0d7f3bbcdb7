use std::io::{Read, Write};
use std::path::Path;

use eventack_core::geometry::PlanarPose;
use serde::{Deserialize, Serialize};

use super::windows::WindowOutcome;
use super::{lerp, PipelineError};

/// One ground-truth sample. Same planar convention as the estimator: x
/// right, y forward, yaw positive for right turns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtPose {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

/// Time-sorted poses with unwrapped yaw.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    poses: Vec<GtPose>,
}

impl GroundTruth {
    pub fn new(mut poses: Vec<GtPose>) -> Self {
        poses.sort_by(|a, b| a.t.total_cmp(&b.t));
        for k in 1..poses.len() {
            let prev = poses[k - 1].yaw;
            poses[k].yaw = prev + wrap_angle(poses[k].yaw - prev);
        }
        Self { poses }
    }

    pub fn poses(&self) -> &[GtPose] {
        &self.poses
    }

    /// Linear interpolation in time; `None` outside the covered span.
    pub fn pose_at(&self, t: f64) -> Option<GtPose> {
        let first = self.poses.first()?;
        let last = self.poses.last()?;
        if t < first.t || t > last.t {
            return None;
        }
        let k = self.poses.partition_point(|p| p.t <= t);
        if k == self.poses.len() {
            return Some(*last);
        }
        let (a, b) = (self.poses[k - 1], self.poses[k]);
        let s = (t - a.t) / (b.t - a.t);
        Some(GtPose {
            t,
            x: lerp(a.x, b.x, s),
            y: lerp(a.y, b.y, s),
            yaw: lerp(a.yaw, b.yaw, s),
        })
    }
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(std::f64::consts::TAU);
    if w > std::f64::consts::PI {
        w - std::f64::consts::TAU
    } else {
        w
    }
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruth, PipelineError> {
    let name = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| PipelineError::io(&name, e))?;
    read_ground_truth_from(file, &name)
}

pub fn read_ground_truth_from(reader: impl Read, name: &str) -> Result<GroundTruth, PipelineError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let poses = rdr
        .deserialize::<GtPose>()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| PipelineError::from_csv(name, e))?;
    if poses.is_empty() {
        return Err(PipelineError::EmptyInput(name.to_string()));
    }
    Ok(GroundTruth::new(poses))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowError {
    pub t_start: f64,
    pub t_end: f64,
    /// Rotation-angle error, degrees.
    pub eps_deg: f64,
    /// Translation-direction error, degrees.
    pub phi_deg: f64,
}

/// RMS (`mu`) and median (`nu`) of the per-window errors, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorStats {
    pub mu_eps: f64,
    pub nu_eps: f64,
    pub mu_phi: f64,
    pub nu_phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub stats: ErrorStats,
    pub per_window: Vec<WindowError>,
    pub gaps: usize,
}

impl EvalReport {
    pub fn windows(&self) -> usize {
        self.per_window.len()
    }
}

/// Scores every estimated window against the ground truth; gaps are counted
/// but not scored.
///
/// The reference direction is the ground-truth displacement over the window,
/// expressed in the window's start frame. A window without displacement
/// scores a direction error of zero.
pub fn evaluate(outcomes: &[WindowOutcome], gt: &GroundTruth) -> Result<EvalReport, PipelineError> {
    let mut per_window = Vec::new();
    let mut gaps = 0;
    for o in outcomes {
        let Some(e) = o.estimate() else {
            gaps += 1;
            continue;
        };
        let (a, b) =
            gt.pose_at(e.t_start)
                .zip(gt.pose_at(e.t_end))
                .ok_or(PipelineError::CoverageGap {
                    t_start: e.t_start,
                    t_end: e.t_end,
                })?;
        let theta_hat = e.omega * (e.t_end - e.t_start);
        let theta_gt = b.yaw - a.yaw;
        let start = PlanarPose {
            rotation: a.yaw,
            translation: [a.x, a.y],
        };
        let q = start.from_reference([b.x, b.y]);
        let [dx, dy] = e.translation_dir;
        let phi = f64::atan2((dx * q[1] - dy * q[0]).abs(), dx * q[0] + dy * q[1]);
        per_window.push(WindowError {
            t_start: e.t_start,
            t_end: e.t_end,
            eps_deg: (theta_hat - theta_gt).abs().to_degrees(),
            phi_deg: phi.to_degrees(),
        });
    }
    if per_window.is_empty() {
        return Err(PipelineError::EmptyInput(
            "no estimated windows to evaluate".into(),
        ));
    }
    let eps: Vec<f64> = per_window.iter().map(|w| w.eps_deg).collect();
    let phi: Vec<f64> = per_window.iter().map(|w| w.phi_deg).collect();
    Ok(EvalReport {
        stats: ErrorStats {
            mu_eps: rms(&eps),
            nu_eps: median(&eps),
            mu_phi: rms(&phi),
            nu_phi: median(&phi),
        },
        per_window,
        gaps,
    })
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Writes `mu_eps,nu_eps,mu_phi,nu_phi,windows,gaps`.
pub fn write_stats(out: impl Write, report: &EvalReport) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mu_eps", "nu_eps", "mu_phi", "nu_phi", "windows", "gaps"])?;
    let s = report.stats;
    w.serialize((
        s.mu_eps,
        s.nu_eps,
        s.mu_phi,
        s.nu_phi,
        report.windows(),
        report.gaps,
    ))?;
    w.flush()
        .map_err(|e| PipelineError::io("stats output", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::windows::{translation_direction, GapReason, WindowEstimate, WindowGap};

    /// Constant arc at `omega` with unit speed, sampled every 10 ms.
    fn arc_gt(omega: f64, t_end: f64) -> GroundTruth {
        let r = 1.0 / omega;
        GroundTruth::new(
            (0..=(t_end * 100.0).round() as usize)
                .map(|k| {
                    let t = k as f64 * 0.01;
                    let th = omega * t;
                    GtPose {
                        t,
                        x: r * (1.0 - th.cos()),
                        y: r * th.sin(),
                        yaw: th,
                    }
                })
                .collect(),
        )
    }

    fn est(t_start: f64, t_end: f64, omega: f64) -> WindowOutcome {
        WindowOutcome::Estimate(WindowEstimate {
            t_start,
            t_end,
            omega,
            inlier_count: 5,
            translation_dir: translation_direction(omega * (t_end - t_start)),
        })
    }

    #[test]
    fn exact_estimates_score_zero() {
        let gt = arc_gt(0.5, 1.0);
        let ws: Vec<_> = (0..5)
            .map(|k| est(0.2 * k as f64, 0.2 * k as f64 + 0.2, 0.5))
            .collect();
        let r = evaluate(&ws, &gt).unwrap();
        // Linear interpolation between 10 ms samples is exact at sample times.
        assert!(r.stats.mu_eps < 1e-10 && r.stats.nu_eps < 1e-10);
        assert!(r.stats.mu_phi < 1e-6 && r.stats.nu_phi < 1e-6);
    }

    #[test]
    fn one_degree_off() {
        let gt = arc_gt(0.5, 1.0);
        let omega = 0.5 + 1f64.to_radians() / 0.2;
        let r = evaluate(&[est(0.2, 0.4, omega)], &gt).unwrap();
        assert!((r.stats.mu_eps - 1.0).abs() < 1e-9);
        assert!((r.stats.nu_eps - 1.0).abs() < 1e-9);
        // The chord direction turns by half the angle.
        assert!((r.stats.mu_phi - 0.5).abs() < 1e-6);
    }

    #[test]
    fn gaps_counted_and_coverage_checked() {
        let gt = arc_gt(0.5, 1.0);
        let gap = WindowOutcome::Gap(WindowGap {
            t_start: 0.4,
            t_end: 0.6,
            reason: GapReason::NoTracks,
        });
        let r = evaluate(&[est(0.2, 0.4, 0.5), gap], &gt).unwrap();
        assert_eq!((r.windows(), r.gaps), (1, 1));
        let err = evaluate(&[est(0.9, 1.1, 0.5)], &gt).unwrap_err();
        assert!(matches!(err, PipelineError::CoverageGap { .. }));
    }

    #[test]
    fn yaw_unwraps() {
        let gt = GroundTruth::new(vec![
            GtPose {
                t: 0.0,
                x: 0.0,
                y: 0.0,
                yaw: 3.1,
            },
            GtPose {
                t: 1.0,
                x: 0.0,
                y: 1.0,
                yaw: -3.1,
            },
        ]);
        let mid = gt.pose_at(0.5).unwrap();
        assert!((mid.yaw - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn stats_csv() {
        let gt = arc_gt(0.5, 1.0);
        let r = evaluate(&[est(0.0, 0.2, 0.5)], &gt).unwrap();
        let mut buf = Vec::new();
        write_stats(&mut buf, &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("mu_eps,nu_eps,mu_phi,nu_phi,windows,gaps\n"));
        assert!(text.trim_end().ends_with(",1,0"));
    }
}
