//! Synthetic scenes and Monte-Carlo factor sweeps.
//!
//! A trial draws one rotational velocity, places landmarks in front of the
//! vehicle, observes each one at random instants of the window with pixel
//! noise, solves every track and fuses them by histogram voting. Trials use
//! independent ChaCha streams keyed by `(seed, trial)`, so a sweep is
//! reproducible regardless of thread count and every factor value sees the
//! same underlying random draws.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use eventack_core::geometry::{project_bearing, relative_pose, AckermannParams, WorldPoint2D};
use eventack_core::robust::{histogram_vote, VoteConfig};
use eventack_core::solver::{solve_omega, BearingSample, ExpansionOrder, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

const MAX_REJECTIONS: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("no in-view landmark after {0} draws; the bearing cone cannot hold the scene")]
    RejectionExhausted(usize),
    #[error("invalid scene configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("sweep needs at least one factor value and one order")]
    EmptySweep,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Toml(#[from] toml::ser::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneConfig {
    pub n_landmarks: usize,
    /// Mean forward depth of the landmarks, scene units.
    pub depth_mean: f64,
    pub depth_halfwidth: f64,
    /// Pixel noise standard deviation.
    pub noise_sigma: f64,
    /// Observation window, s.
    pub window: f64,
    /// Focal length, px.
    pub focal: f64,
    /// Image width, px. Together with `focal` it sets the bearing cone.
    pub image_width: f64,
    pub events_per_track: usize,
    /// Fixed rotational velocity; drawn per trial when `None`.
    pub omega_true: Option<f64>,
    /// Half-range of the uniform draw of `omega_true`, rad/s.
    pub omega_range: f64,
    /// Scale constant handed to the solver, s.
    pub tau: f64,
    /// Vehicle speed, scene units per second.
    pub speed: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n_landmarks: 15,
            depth_mean: 10.0,
            depth_halfwidth: 8.0,
            noise_sigma: 1.0,
            window: 0.3,
            focal: 700.0,
            image_width: 640.0,
            events_per_track: 30,
            omega_true: None,
            omega_range: 0.5,
            tau: 0.3,
            speed: 1.0 / 0.3,
            trials: 1000,
            seed: 0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.depth_mean - self.depth_halfwidth > 0.0) || self.depth_halfwidth < 0.0 {
            return Err(SimError::InvalidConfig(
                "landmarks must lie in front of the camera",
            ));
        }
        if !(self.window > 0.0) || !(self.tau > 0.0) {
            return Err(SimError::InvalidConfig("window and tau must be positive"));
        }
        if !(self.focal > 0.0) || !(self.image_width > 0.0) {
            return Err(SimError::InvalidConfig(
                "focal and image width must be positive",
            ));
        }
        if !(self.noise_sigma >= 0.0) || !(self.speed >= 0.0) || !(self.omega_range >= 0.0) {
            return Err(SimError::InvalidConfig(
                "noise, speed and omega range must be non-negative",
            ));
        }
        if self.events_per_track < 3 || self.n_landmarks == 0 {
            return Err(SimError::InvalidConfig(
                "need landmarks with at least 3 events",
            ));
        }
        Ok(())
    }

    /// Half-width of the visible bearing cone in normalized coordinates.
    pub fn bearing_limit(&self) -> f64 {
        0.5 * self.image_width / self.focal
    }

    /// Exact motion over the window for a given rotational velocity.
    pub fn motion(&self, omega: f64) -> AckermannParams {
        let theta = omega * self.window;
        let d = if theta.abs() < 1e-9 {
            self.speed * self.window
        } else {
            self.speed * theta.sin() / omega
        };
        AckermannParams::new(omega, self.window).with_displacement(d)
    }

    /// Principal point used when converting bearings to pixels.
    pub fn principal_x(&self) -> f64 {
        0.5 * self.image_width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTrack {
    pub samples: Vec<BearingSample>,
    pub landmark: WorldPoint2D,
    pub omega_true: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub omega_true: f64,
    pub motion: AckermannParams,
    pub tracks: Vec<SyntheticTrack>,
}

/// Draws one scene. The rotational velocity is `config.omega_true` or a
/// uniform draw from `[-omega_range, omega_range]`.
pub fn generate_scene(config: &SceneConfig, rng: &mut impl Rng) -> Result<Scene, SimError> {
    config.validate()?;
    let omega = match config.omega_true {
        Some(w) => w,
        None if config.omega_range > 0.0 => {
            rng.random_range(-config.omega_range..=config.omega_range)
        }
        None => 0.0,
    };
    let motion = config.motion(omega);
    let limit = config.bearing_limit();
    let noise = Normal::new(0.0, config.noise_sigma).expect("sigma validated");
    let cx = config.principal_x();

    let mut tracks = Vec::with_capacity(config.n_landmarks);
    for _ in 0..config.n_landmarks {
        let mut times: Vec<f64> = (0..config.events_per_track)
            .map(|_| rng.random_range(0.0..=config.window))
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();

        // Only the lateral position is resampled, so depth stays uniform.
        let depth = rng.random_range(
            config.depth_mean - config.depth_halfwidth..=config.depth_mean + config.depth_halfwidth,
        );
        let mut accepted = None;
        for _ in 0..MAX_REJECTIONS {
            let x0 = rng.random_range(-limit..=limit);
            let landmark = WorldPoint2D::new(x0 * depth, depth);
            let bearings: Option<Vec<f64>> = times
                .iter()
                .map(|&t| {
                    project_bearing(&landmark, &relative_pose(&motion, t))
                        .ok()
                        .filter(|x| x.abs() <= limit)
                })
                .collect();
            if let Some(b) = bearings {
                accepted = Some((landmark, b));
                break;
            }
        }
        let (landmark, bearings) = accepted.ok_or(SimError::RejectionExhausted(MAX_REJECTIONS))?;

        let samples = times
            .iter()
            .zip(bearings)
            .map(|(&t, x)| {
                let u = config.focal * x + cx + noise.sample(rng);
                BearingSample::new((u - cx) / config.focal, t)
            })
            .collect();
        tracks.push(SyntheticTrack {
            samples,
            landmark,
            omega_true: omega,
        });
    }
    Ok(Scene {
        omega_true: omega,
        motion,
        tracks,
    })
}

/// Absolute rotational-velocity error.
pub fn omega_error(omega_rec: f64, omega_gt: f64) -> f64 {
    (omega_rec - omega_gt).abs()
}

/// RNG for one trial: stream `trial` of the sweep seed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Solves every track of a scene and fuses them. Returns the consensus.
pub fn estimate_scene(
    scene: &Scene,
    order: ExpansionOrder,
    tau: f64,
    solver: &SolverConfig,
    vote: &VoteConfig,
) -> Option<f64> {
    let estimates: Vec<_> = scene
        .tracks
        .iter()
        .enumerate()
        .filter_map(|(i, tr)| {
            let mut e = solve_omega(&tr.samples, order, tau, solver).ok()?;
            e.track_id = i as u64;
            Some(e)
        })
        .collect();
    if estimates.is_empty() {
        return None;
    }
    histogram_vote(&estimates, vote)
        .ok()
        .map(|r| r.omega_consensus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Tau,
    Noise,
    Interval,
    Landmarks,
    Focal,
    Depth,
}

impl Factor {
    pub const ALL: [Factor; 6] = [
        Factor::Tau,
        Factor::Noise,
        Factor::Interval,
        Factor::Landmarks,
        Factor::Focal,
        Factor::Depth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Factor::Tau => "tau",
            Factor::Noise => "noise",
            Factor::Interval => "interval",
            Factor::Landmarks => "landmarks",
            Factor::Focal => "focal",
            Factor::Depth => "depth",
        }
    }

    /// Default sweep values.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            Factor::Tau => vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            Factor::Noise => (0..=8).map(f64::from).collect(),
            Factor::Interval => vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45],
            Factor::Landmarks => vec![3.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0],
            Factor::Focal => vec![100.0, 200.0, 300.0, 400.0, 500.0, 700.0, 900.0, 1100.0],
            Factor::Depth => vec![10.0, 14.0, 18.0, 22.0, 26.0, 30.0],
        }
    }

    /// Whether the default range is approximate rather than exact.
    pub fn approximate_range(self) -> bool {
        matches!(
            self,
            Factor::Tau | Factor::Landmarks | Factor::Depth | Factor::Noise
        )
    }

    pub fn apply(self, config: &mut SceneConfig, value: f64) {
        match self {
            Factor::Tau => config.tau = value,
            Factor::Noise => config.noise_sigma = value,
            Factor::Interval => config.window = value,
            Factor::Landmarks => config.n_landmarks = value.round().max(1.0) as usize,
            Factor::Focal => config.focal = value,
            Factor::Depth => config.depth_mean = value,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Factor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Factor::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown factor `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub factor_value: f64,
    pub order: ExpansionOrder,
    /// Mean error over the successful trials, rad/s.
    pub mean_eps: f64,
    pub trials: usize,
    pub failures: usize,
    /// Per-trial errors; `None` marks a failed trial.
    pub errors: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub factor: Factor,
    pub values: Vec<f64>,
    pub orders: Vec<ExpansionOrder>,
    pub base: SceneConfig,
    pub solver: SolverConfig,
    pub vote: VoteConfig,
    /// Ordered by factor value, then by position in `orders`.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, value: f64, order: ExpansionOrder) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.factor_value == value && r.order == order)
    }

    pub fn mean_eps(&self, order: ExpansionOrder) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.order == order)
            .map(|r| r.mean_eps)
            .collect()
    }

    pub fn write_csv(&self, out: impl Write) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["factor_value", "order", "mean_eps", "trials", "failures"])?;
        for r in &self.rows {
            w.write_record([
                r.factor_value.to_string(),
                r.order.name().to_string(),
                format!("{:.9e}", r.mean_eps),
                r.trials.to_string(),
                r.failures.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn metadata_toml(&self) -> Result<String, SimError> {
        #[derive(Serialize)]
        struct Meta<'a> {
            factor: Factor,
            values: &'a [f64],
            orders: Vec<&'static str>,
            approximate_range: bool,
            omega_distribution: String,
            scene: &'a SceneConfig,
            solver: SolverMeta,
            vote: VoteMeta,
        }
        #[derive(Serialize)]
        struct SolverMeta {
            omega_max: f64,
            root_tol: f64,
        }
        #[derive(Serialize)]
        struct VoteMeta {
            bin_width: f64,
            neighbor_span: usize,
            min_inliers: usize,
            refine: bool,
            omega_max: f64,
        }
        let omega_distribution = match self.base.omega_true {
            Some(w) => format!("fixed {w}"),
            None => format!("uniform [-{r}, {r}] rad/s", r = self.base.omega_range),
        };
        let meta = Meta {
            factor: self.factor,
            values: &self.values,
            orders: self.orders.iter().map(|o| o.name()).collect(),
            approximate_range: self.factor.approximate_range(),
            omega_distribution,
            scene: &self.base,
            solver: SolverMeta {
                omega_max: self.solver.omega_max,
                root_tol: self.solver.root_tol,
            },
            vote: VoteMeta {
                bin_width: self.vote.bin_width,
                neighbor_span: self.vote.neighbor_span,
                min_inliers: self.vote.min_inliers,
                refine: self.vote.refine,
                omega_max: self.vote.omega_max,
            },
        };
        Ok(toml::to_string(&meta)?)
    }

    /// Writes `path` as CSV and `path` with a `.toml` extension as the sidecar.
    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
        std::fs::write(path.with_extension("toml"), self.metadata_toml()?)?;
        Ok(())
    }
}

/// Runs a sweep with default solver and vote settings.
pub fn run_sweep(
    factor: Factor,
    values: &[f64],
    base: &SceneConfig,
    orders: &[ExpansionOrder],
) -> Result<SweepResult, SimError> {
    run_sweep_with(
        factor,
        values,
        base,
        orders,
        &SolverConfig::default(),
        &VoteConfig::default(),
    )
}

pub fn run_sweep_with(
    factor: Factor,
    values: &[f64],
    base: &SceneConfig,
    orders: &[ExpansionOrder],
    solver: &SolverConfig,
    vote: &VoteConfig,
) -> Result<SweepResult, SimError> {
    if values.is_empty() || orders.is_empty() {
        return Err(SimError::EmptySweep);
    }
    let mut rows = Vec::with_capacity(values.len() * orders.len());
    for &value in values {
        let mut config = base.clone();
        factor.apply(&mut config, value);
        config.validate()?;
        // One scene per trial, shared by all orders.
        let per_trial: Vec<Vec<Option<f64>>> = (0..config.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(config.seed, trial);
                match generate_scene(&config, &mut rng) {
                    Ok(scene) => orders
                        .iter()
                        .map(|&o| {
                            estimate_scene(&scene, o, config.tau, solver, vote)
                                .map(|w| omega_error(w, scene.omega_true))
                        })
                        .collect(),
                    Err(_) => vec![None; orders.len()],
                }
            })
            .collect();
        for (k, &order) in orders.iter().enumerate() {
            let errors: Vec<Option<f64>> = per_trial.iter().map(|t| t[k]).collect();
            let ok: Vec<f64> = errors.iter().flatten().copied().collect();
            let mean_eps = if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().sum::<f64>() / ok.len() as f64
            };
            rows.push(SweepRow {
                factor_value: value,
                order,
                mean_eps,
                trials: errors.len(),
                failures: errors.len() - ok.len(),
                errors,
            });
        }
    }
    Ok(SweepResult {
        factor,
        values: values.to_vec(),
        orders: orders.to_vec(),
        base: base.clone(),
        solver: *solver,
        vote: *vote,
        rows,
    })
}
