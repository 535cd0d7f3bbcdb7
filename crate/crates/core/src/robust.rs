//! Histogram voting over per-track estimates.
//!
//! Estimates are binned on `[-omega_max, omega_max]`. The mode is the bin with
//! the most votes once each bin is summed with its `neighbor_span` neighbours
//! on either side; everything in that neighbourhood is an inlier. The
//! consensus is the inlier median, optionally replaced by the minimizer of the
//! summed, per-track normalized determinant objectives over the inlier span.

use alloc::vec;
use alloc::vec::Vec;

use crate::solver::OmegaEstimate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteConfig {
    /// Bin width, rad/s.
    pub bin_width: f64,
    /// Bins on each side of the mode that still count as inliers.
    pub neighbor_span: usize,
    pub min_inliers: usize,
    pub refine: bool,
    /// Histogram half-range, rad/s.
    pub omega_max: f64,
}

impl Default for VoteConfig {
    fn default() -> Self {
        Self {
            bin_width: 0.01,
            neighbor_span: 1,
            min_inliers: 3,
            refine: true,
            omega_max: core::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VoteError {
    #[error("no estimates to vote on")]
    Empty,
    #[error("invalid vote configuration")]
    InvalidConfig,
    #[error("mode neighbourhood holds {found} estimates, need {needed}")]
    InsufficientConsensus { found: usize, needed: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// Left edge of bin 0.
    pub lo: f64,
    pub bin_width: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn center(&self, bin: usize) -> f64 {
        self.lo + (bin as f64 + 0.5) * self.bin_width
    }

    pub fn edges(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.counts.len()).map(|k| self.lo + k as f64 * self.bin_width)
    }

    fn bin_of(&self, omega: f64) -> Option<usize> {
        let k = libm::floor((omega - self.lo) / self.bin_width);
        if !(k >= 0.0) {
            return None;
        }
        let k = k as usize;
        if k < self.counts.len() {
            Some(k)
        } else if omega <= self.lo + self.counts.len() as f64 * self.bin_width {
            Some(self.counts.len() - 1)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoteResult {
    pub omega_consensus: f64,
    /// Inlier track ids, ascending.
    pub inlier_ids: Vec<u64>,
    pub histogram: Histogram,
    pub mode_bin: usize,
    pub refined: bool,
}

/// Fuses per-track estimates into one rotational velocity.
///
/// When fewer estimates than `min_inliers` are supplied the threshold drops to
/// the number of estimates, so a single track still yields a result.
pub fn histogram_vote(
    estimates: &[OmegaEstimate],
    config: &VoteConfig,
) -> Result<VoteResult, VoteError> {
    if estimates.is_empty() {
        return Err(VoteError::Empty);
    }
    if !(config.bin_width > 0.0) || !(config.omega_max > 0.0) {
        return Err(VoteError::InvalidConfig);
    }

    // Canonical order makes the result independent of input order.
    let mut sorted: Vec<&OmegaEstimate> = estimates.iter().collect();
    sorted.sort_by(|a, b| {
        a.omega
            .total_cmp(&b.omega)
            .then(a.track_id.cmp(&b.track_id))
    });

    let n_bins = libm::ceil(2.0 * config.omega_max / config.bin_width).max(1.0) as usize;
    let mut hist = Histogram {
        lo: -config.omega_max,
        bin_width: config.bin_width,
        counts: vec![0; n_bins],
    };
    let bins: Vec<Option<usize>> = sorted.iter().map(|e| hist.bin_of(e.omega)).collect();
    for b in bins.iter().flatten() {
        hist.counts[*b] += 1;
    }

    let span = config.neighbor_span;
    let window =
        |b: usize| -> (usize, usize) { (b.saturating_sub(span), (b + span).min(n_bins - 1)) };
    let mut mode = 0usize;
    let mut best = 0usize;
    for b in 0..n_bins {
        let (lo, hi) = window(b);
        let votes: usize = hist.counts[lo..=hi].iter().sum();
        let better = votes > best
            || (votes == best && votes > 0 && hist.center(b).abs() < hist.center(mode).abs());
        if better {
            best = votes;
            mode = b;
        }
    }

    let needed = config.min_inliers.min(estimates.len()).max(1);
    if best < needed {
        return Err(VoteError::InsufficientConsensus {
            found: best,
            needed,
        });
    }

    let (lo_bin, hi_bin) = window(mode);
    let inliers: Vec<&OmegaEstimate> = sorted
        .iter()
        .zip(&bins)
        .filter(|(_, b)| b.is_some_and(|b| b >= lo_bin && b <= hi_bin))
        .map(|(e, _)| *e)
        .collect();

    let mut consensus = median_sorted(&inliers.iter().map(|e| e.omega).collect::<Vec<_>>());
    let mut refined = false;
    if config.refine {
        if let Some(w) = refine_joint(&inliers) {
            consensus = w;
            refined = true;
        }
    }

    let mut inlier_ids: Vec<u64> = inliers.iter().map(|e| e.track_id).collect();
    inlier_ids.sort_unstable();
    Ok(VoteResult {
        omega_consensus: consensus,
        inlier_ids,
        histogram: hist,
        mode_bin: mode,
        refined,
    })
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

const REFINE_GRID: usize = 64;

/// Minimizes the sum of each inlier's determinant divided by its sup-norm on
/// the inlier span. Needs at least two inliers carrying an objective.
fn refine_joint(inliers: &[&OmegaEstimate]) -> Option<f64> {
    let objectives: Vec<_> = inliers
        .iter()
        .filter_map(|e| e.objective.as_ref())
        .collect();
    if objectives.len() < 2 {
        return None;
    }
    let lo = inliers.first()?.omega;
    let hi = inliers.last()?.omega;
    if !(hi > lo) {
        return None;
    }
    let grid: Vec<f64> = (0..=REFINE_GRID)
        .map(|k| lo + (hi - lo) * k as f64 / REFINE_GRID as f64)
        .collect();
    let weights: Vec<f64> = objectives
        .iter()
        .map(|o| {
            let sup = grid.iter().fold(0.0f64, |m, &w| m.max(o.eval(w).abs()));
            if sup > 0.0 {
                1.0 / sup
            } else {
                0.0
            }
        })
        .collect();
    let joint = |w: f64| -> f64 {
        objectives
            .iter()
            .zip(&weights)
            .map(|(o, k)| k * o.eval(w))
            .sum()
    };

    let mut best_k = 0;
    let mut best_v = f64::INFINITY;
    for (k, &w) in grid.iter().enumerate() {
        let v = joint(w);
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    let a = grid[best_k.saturating_sub(1)];
    let b = grid[(best_k + 1).min(REFINE_GRID)];
    let w = golden_section(joint, a, b, 1e-10 * (1.0 + (hi - lo)));
    Some(w.clamp(lo, hi))
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
