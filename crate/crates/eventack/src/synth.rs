//! Synthetic event-track sequences with ground truth, used to build the
//! bundled fixtures and to exercise the pipeline end to end.
//!
//! The vehicle drives at constant speed with a slowly varying rotational
//! velocity `omega(t) = mean + amp * sin(2 pi t / period)`. Each track follows
//! one static landmark for a short interval.

use std::io::Write;
use std::path::Path;

use eventack_core::geometry::PlanarPose;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::pipeline::{
    scale_from_ground_truth, window_bounds, write_scale, CameraIntrinsics, Event, EventTrack,
    GroundTruth, GtPose, Mount, PipelineError, WindowConfig,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceConfig {
    pub duration: f64,
    pub omega_mean: f64,
    pub omega_amp: f64,
    pub omega_period: f64,
    /// Scene units per second.
    pub speed: f64,
    /// New tracks per second.
    pub track_rate: f64,
    pub events_per_track: usize,
    pub track_duration: (f64, f64),
    pub depth: (f64, f64),
    /// Pixel noise standard deviation.
    pub noise_sigma: f64,
    pub intrinsics: CameraIntrinsics,
    /// Ground-truth sampling interval, s.
    pub gt_step: f64,
    pub seed: u64,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        Self {
            duration: 1.5,
            omega_mean: 0.3,
            omega_amp: 0.1,
            omega_period: 4.0,
            speed: 5.0,
            track_rate: 120.0,
            events_per_track: 60,
            track_duration: (0.16, 0.24),
            depth: (4.0, 25.0),
            noise_sigma: 1.0,
            intrinsics: CameraIntrinsics {
                focal: 700.0,
                cx: 320.0,
                width: 640,
                height: 480,
                mount: Mount::VehicleNative,
            },
            gt_step: 0.01,
            seed: 0,
        }
    }
}

impl SequenceConfig {
    pub fn omega(&self, t: f64) -> f64 {
        self.omega_mean + self.omega_amp * (std::f64::consts::TAU * t / self.omega_period).sin()
    }

    /// Heading at `t`, the closed-form integral of `omega`.
    pub fn yaw(&self, t: f64) -> f64 {
        let k = std::f64::consts::TAU / self.omega_period;
        self.omega_mean * t + self.omega_amp / k * (1.0 - (k * t).cos())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub config: SequenceConfig,
    pub tracks: Vec<EventTrack>,
    pub ground_truth: GroundTruth,
}

/// Vehicle poses from a fine Simpson integration of the heading.
struct Path2D {
    step: f64,
    nodes: Vec<[f64; 2]>,
}

impl Path2D {
    fn new(cfg: &SequenceConfig, t_end: f64) -> Self {
        let step = 1e-3;
        let n = (t_end / step).ceil() as usize + 1;
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push([0.0, 0.0]);
        for k in 0..n {
            let p = nodes[k];
            let d = simpson(cfg, k as f64 * step, (k + 1) as f64 * step);
            nodes.push([p[0] + d[0], p[1] + d[1]]);
        }
        Self { step, nodes }
    }

    fn pose(&self, cfg: &SequenceConfig, t: f64) -> PlanarPose {
        let k = ((t / self.step).floor() as usize).min(self.nodes.len() - 1);
        let t0 = k as f64 * self.step;
        let p = self.nodes[k];
        let d = simpson(cfg, t0, t);
        PlanarPose {
            rotation: cfg.yaw(t),
            translation: [p[0] + d[0], p[1] + d[1]],
        }
    }
}

/// Displacement between `a` and `b`: velocity is `speed * (sin yaw, cos yaw)`.
fn simpson(cfg: &SequenceConfig, a: f64, b: f64) -> [f64; 2] {
    const N: usize = 4;
    let h = (b - a) / N as f64;
    let mut acc = [0.0, 0.0];
    for i in 0..=N {
        let w = if i == 0 || i == N {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let y = cfg.yaw(a + i as f64 * h);
        acc[0] += w * y.sin();
        acc[1] += w * y.cos();
    }
    [acc[0] * cfg.speed * h / 3.0, acc[1] * cfg.speed * h / 3.0]
}

pub fn generate_sequence(cfg: &SequenceConfig) -> Result<Sequence, PipelineError> {
    cfg.intrinsics.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let path = Path2D::new(cfg, cfg.duration);
    let cam = &cfg.intrinsics;
    let noise = Normal::new(0.0, cfg.noise_sigma)
        .map_err(|_| PipelineError::InvalidConfig("noise sigma must be non-negative".into()))?;
    // Keep a margin so pixel noise never leaves the sensor.
    let margin = 4.0 * cfg.noise_sigma + 1.0;
    let u_lo = margin;
    let u_hi = f64::from(cam.width) - margin;

    let n_tracks = (cfg.track_rate * cfg.duration).round() as usize;
    let mut tracks = Vec::with_capacity(n_tracks);
    for track_id in 0..n_tracks as u64 {
        let dur = rng.random_range(cfg.track_duration.0..=cfg.track_duration.1);
        let t_s = rng.random_range(0.0..=(cfg.duration - dur).max(0.0));
        let mut times: Vec<f64> = (0..cfg.events_per_track)
            .map(|k| match k {
                0 => t_s,
                1 => t_s + dur,
                _ => rng.random_range(t_s..t_s + dur),
            })
            .map(|t| (t * 1e6).round() / 1e6)
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();

        let start = path.pose(cfg, t_s);
        let mut events = None;
        for _ in 0..1000 {
            let depth = rng.random_range(cfg.depth.0..=cfg.depth.1);
            let x0 = cam.bearing(rng.random_range(u_lo..=u_hi));
            let world = start.to_reference([x0 * depth, depth]);
            let v0 = rng.random_range(margin..f64::from(cam.height) - margin);
            let ev: Option<Vec<Event>> = times
                .iter()
                .map(|&t| {
                    let p = path.pose(cfg, t).from_reference(world);
                    if p[1] <= 0.0 {
                        return None;
                    }
                    let u = cam.pixel(p[0] / p[1]);
                    (u >= u_lo && u <= u_hi).then_some((t, u))
                })
                .map(|o| {
                    o.map(|(t, u)| Event {
                        u: round3(u + noise.sample(&mut rng)),
                        v: round3(v0 + noise.sample(&mut rng)),
                        t,
                        polarity: if rng.random_bool(0.5) { 1 } else { -1 },
                    })
                })
                .collect();
            if ev.is_some() {
                events = ev;
                break;
            }
        }
        let events = events.ok_or_else(|| {
            PipelineError::InvalidConfig("landmark placement failed; widen the depth range".into())
        })?;
        tracks.push(EventTrack { track_id, events });
    }

    let n_gt = (cfg.duration / cfg.gt_step).round() as usize;
    let poses = (0..=n_gt)
        .map(|k| {
            let t = k as f64 * cfg.gt_step;
            let p = path.pose(cfg, t);
            GtPose {
                t,
                x: p.translation[0],
                y: p.translation[1],
                yaw: p.rotation,
            }
        })
        .collect();
    Ok(Sequence {
        config: cfg.clone(),
        tracks,
        ground_truth: GroundTruth::new(poses),
    })
}

fn round3(x: f64) -> f64 {
    (x * 1e3).round() / 1e3
}

impl Sequence {
    pub fn write_tracks(&self, out: impl Write) -> Result<(), PipelineError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["track_id", "t", "u", "v", "polarity"])?;
        for tr in &self.tracks {
            for e in &tr.events {
                w.write_record([
                    tr.track_id.to_string(),
                    format!("{:.6}", e.t),
                    format!("{:.3}", e.u),
                    format!("{:.3}", e.v),
                    e.polarity.to_string(),
                ])?;
            }
        }
        w.flush()
            .map_err(|e| PipelineError::io("tracks output", e))?;
        Ok(())
    }

    pub fn write_ground_truth(&self, out: impl Write) -> Result<(), PipelineError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "y", "yaw"])?;
        for p in self.ground_truth.poses() {
            w.write_record([
                format!("{:.6}", p.t),
                format!("{:.9}", p.x),
                format!("{:.9}", p.y),
                format!("{:.9}", p.yaw),
            ])?;
        }
        w.flush()
            .map_err(|e| PipelineError::io("ground truth output", e))?;
        Ok(())
    }

    /// Writes `tracks.csv`, `cam.toml`, `gt.csv` and `scale.csv` (for the
    /// given window lattice) into `dir`.
    pub fn write_fixture(&self, dir: &Path, window: &WindowConfig) -> Result<(), PipelineError> {
        let io = |p: &Path, e| PipelineError::io(p.display().to_string(), e);
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut buf = Vec::new();
        self.write_tracks(&mut buf)?;
        let p = dir.join("tracks.csv");
        std::fs::write(&p, &buf).map_err(|e| io(&p, e))?;

        buf.clear();
        self.write_ground_truth(&mut buf)?;
        let p = dir.join("gt.csv");
        std::fs::write(&p, &buf).map_err(|e| io(&p, e))?;

        let cam = toml::to_string(&self.config.intrinsics)
            .map_err(|e| PipelineError::Intrinsics(e.to_string()))?;
        let p = dir.join("cam.toml");
        std::fs::write(&p, cam).map_err(|e| io(&p, e))?;

        let bounds = window_bounds(window, 0.0, self.config.duration);
        let scale = scale_from_ground_truth(&self.ground_truth, &bounds)?;
        buf.clear();
        write_scale(&mut buf, &scale)?;
        let p = dir.join("scale.csv");
        std::fs::write(&p, &buf).map_err(|e| io(&p, e))?;
        Ok(())
    }
}
