//! Single-track rotational-velocity solver.
//!
//! Every bearing sample contributes one row `(b1, b2, b3)` of polynomials in
//! `omega`, obtained by replacing the trigonometric incidence coefficients by
//! truncated Taylor series and clearing the common denominator. Stacking rows
//! gives `B(omega)`; the true `omega` makes `B` rank deficient, so the solver
//! minimizes `det(B^T B)`, a univariate polynomial, over its real critical
//! points (found with a Sturm chain) and the search-interval endpoints.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{Matrix3, SymmetricEigen};

use crate::geometry::WorldPoint2D;
use crate::poly::{isolate_roots, PolyError, Polynomial, DEFAULT_ROOT_TOL};

/// Truncation orders of the sine / cosine expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExpansionOrder {
    S3C2,
    S5C4,
    S7C6,
}

impl ExpansionOrder {
    pub const ALL: [ExpansionOrder; 3] = [Self::S3C2, Self::S5C4, Self::S7C6];

    /// `m` such that the sine is truncated at degree `2m + 1` and the cosine
    /// at `2m`.
    pub fn half_order(self) -> usize {
        match self {
            Self::S3C2 => 1,
            Self::S5C4 => 2,
            Self::S7C6 => 3,
        }
    }

    pub fn sin_order(self) -> usize {
        2 * self.half_order() + 1
    }

    pub fn cos_order(self) -> usize {
        2 * self.half_order()
    }

    /// Highest degree in `omega` of any row entry: 5 / 9 / 13.
    pub fn b_row_degree(self) -> usize {
        4 * self.half_order() + 1
    }

    /// Highest degree of any Gram entry: 10 / 18 / 26.
    pub fn gram_degree(self) -> usize {
        2 * self.b_row_degree()
    }

    /// Three times the Gram entry degree: 30 / 54 / 78. An upper bound on the
    /// determinant degree; the third column has degree `2m` only, which keeps
    /// the actual determinant degree lower.
    pub fn nominal_det_degree(self) -> usize {
        3 * self.gram_degree()
    }

    /// Integer factor `(-1)^m (2m+1)!` relating the clearing multiplier to
    /// the truncated `sin(omega tau) / omega`.
    pub fn multiplier_factor(self) -> f64 {
        match self {
            Self::S3C2 => -6.0,
            Self::S5C4 => 120.0,
            Self::S7C6 => -5040.0,
        }
    }

    /// Largest `|omega * tau|` searched. The multiplier vanishes at the first
    /// positive root of the truncated sine (sqrt 6 for s3c2, 3.0786 for s7c6),
    /// which would plant a spurious zero of the determinant; the search stays
    /// within half of that root.
    pub fn max_scale_angle(self) -> f64 {
        match self {
            Self::S3C2 => 0.5 * 2.449_489_742_783_178,
            Self::S5C4 => f64::INFINITY,
            Self::S7C6 => 0.5 * 3.078_642_304_738_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::S3C2 => "s3c2",
            Self::S5C4 => "s5c4",
            Self::S7C6 => "s7c6",
        }
    }
}

impl fmt::Display for ExpansionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown expansion order `{0}` (expected s3c2, s5c4 or s7c6)")]
pub struct UnknownOrder(pub alloc::string::String);

impl FromStr for ExpansionOrder {
    type Err = UnknownOrder;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s3c2" => Ok(Self::S3C2),
            "s5c4" => Ok(Self::S5C4),
            "s7c6" => Ok(Self::S7C6),
            _ => Err(UnknownOrder(s.into())),
        }
    }
}

/// Normalized horizontal bearing `x` observed `tau_i` seconds after the
/// window start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BearingSample {
    pub x: f64,
    pub tau_i: f64,
}

impl BearingSample {
    pub fn new(x: f64, tau_i: f64) -> Self {
        Self { x, tau_i }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("sample {index} repeats the previous timestamp")]
    DuplicateTimestamp { index: usize },
    #[error("sample {index} goes back in time")]
    NonMonotonicTime { index: usize },
    #[error("invalid sample {index} (non-finite or negative time)")]
    InvalidSample { index: usize },
    #[error("scale interval tau must be positive, got {tau}")]
    InvalidScale { tau: f64 },
    #[error("no candidate minimizer (degenerate data)")]
    NoCandidates,
    #[error("numerical breakdown in root isolation ({0}); try a shorter window")]
    Numerical(#[from] PolyError),
    #[error("ambiguous structure: two smallest singular values {0:e} and {1:e} coincide")]
    DegenerateNullspace(f64, f64),
}

/// Minimum number of rows for the rank condition on three columns.
pub const MIN_SAMPLES: usize = 3;

/// Stacked rows `B(u)`, polynomials in `u = omega * time_unit`.
#[derive(Debug, Clone)]
pub struct MeasurementMatrix {
    pub rows: Vec<[Polynomial; 3]>,
    pub order: ExpansionOrder,
    pub tau: f64,
    /// `1.0` means the variable is `omega` itself.
    pub time_unit: f64,
}

impl MeasurementMatrix {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Numeric rows at `omega` (rad/s).
    pub fn eval(&self, omega: f64) -> Vec<[f64; 3]> {
        let u = omega * self.time_unit;
        self.rows
            .iter()
            .map(|r| [r[0].eval(u), r[1].eval(u), r[2].eval(u)])
            .collect()
    }
}

/// Symmetric 3x3 matrix of polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix3 {
    pub entries: [[Polynomial; 3]; 3],
}

impl PolyMatrix3 {
    pub fn identity() -> Self {
        let one = Polynomial::constant(1.0);
        let z = Polynomial::zero();
        Self {
            entries: [
                [one.clone(), z.clone(), z.clone()],
                [z.clone(), one.clone(), z.clone()],
                [z.clone(), z, one],
            ],
        }
    }

    pub fn eval(&self, u: f64) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in self.entries.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                out[i][j] = p.eval(u);
            }
        }
        out
    }

    pub fn max_entry_degree(&self) -> Option<usize> {
        self.entries
            .iter()
            .flatten()
            .filter_map(|p| p.degree())
            .max()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Search bound on `|omega|`, rad/s.
    pub omega_max: f64,
    /// Root refinement width in the rescaled variable.
    pub root_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            omega_max: core::f64::consts::PI,
            root_tol: DEFAULT_ROOT_TOL,
        }
    }
}

/// `det(M)` of one track as a function of `omega`, kept for joint refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct DetObjective {
    /// Determinant polynomial in `u = omega * time_unit`.
    pub poly: Polynomial,
    pub time_unit: f64,
}

impl DetObjective {
    pub fn eval(&self, omega: f64) -> f64 {
        self.poly.eval(omega * self.time_unit)
    }
}

/// Solved rotational velocity of one track.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaEstimate {
    pub track_id: u64,
    pub omega: f64,
    /// `det(M)` at `omega`, with the determinant polynomial (in the rescaled
    /// variable) scaled to unit max-coefficient.
    pub residual: f64,
    pub n_candidates: usize,
    /// Another candidate reached the same determinant within 1e-9 relative.
    pub ambiguous: bool,
    pub objective: Option<DetObjective>,
}

impl OmegaEstimate {
    /// An estimate without a determinant objective, e.g. from an external source.
    pub fn bare(track_id: u64, omega: f64) -> Self {
        Self {
            track_id,
            omega,
            residual: 0.0,
            n_candidates: 0,
            ambiguous: false,
            objective: None,
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn sign(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Truncated `sin(omega * s)` as a polynomial in `omega`.
fn sin_series(m: usize, s: f64) -> Polynomial {
    let mut c = alloc::vec![0.0; 2 * m + 2];
    for j in 0..=m {
        let k = 2 * j + 1;
        c[k] = sign(j) * libm::pow(s, k as f64) / factorial(k);
    }
    Polynomial::new(c)
}

/// Truncated `cos(omega * s)` as a polynomial in `omega`.
fn cos_series(m: usize, s: f64) -> Polynomial {
    let mut c = alloc::vec![0.0; 2 * m + 1];
    for j in 0..=m {
        let k = 2 * j;
        c[k] = sign(j) * libm::pow(s, k as f64) / factorial(k);
    }
    Polynomial::new(c)
}

/// Row `(b1, b2, b3)` in `omega` for one sample.
///
/// `b1, b2` are the truncated `a1, a2` times the clearing multiplier `c`;
/// `b3` is the numerator of the truncated `a3` (its denominator is `c`).
pub fn taylor_row(sample: &BearingSample, order: ExpansionOrder, tau: f64) -> [Polynomial; 3] {
    let m = order.half_order();
    let k = order.multiplier_factor();
    let x = sample.x;
    let ti = sample.tau_i;

    // c = k * S(omega tau) / omega
    let c = Polynomial::new(sin_series(m, tau).coeffs()[1..].to_vec()).scale(k);
    let s_i = sin_series(m, ti);
    let c_i = cos_series(m, ti);

    let a1 = &c_i - &s_i.scale(x);
    let a2 = -&(&c_i.scale(x) + &s_i);

    // (x S(omega ti) + 1 - C(omega ti)) / omega, both terms divisible by omega
    let one_minus_cos = &Polynomial::constant(1.0) - &c_i;
    let mut num = s_i.scale(x).coeffs().to_vec();
    let omc = one_minus_cos.coeffs();
    if num.len() < omc.len() {
        num.resize(omc.len(), 0.0);
    }
    for (n, o) in num.iter_mut().zip(omc) {
        *n += o;
    }
    let a3_num = Polynomial::new(num.get(1..).map(<[f64]>::to_vec).unwrap_or_default());

    [&c * &a1, &c * &a2, a3_num.scale(k)]
}

fn validate(samples: &[BearingSample], tau: f64) -> Result<(), SolveError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(SolveError::InvalidScale { tau });
    }
    if samples.len() < MIN_SAMPLES {
        return Err(SolveError::TooFewSamples {
            got: samples.len(),
            min: MIN_SAMPLES,
        });
    }
    for (i, s) in samples.iter().enumerate() {
        if !s.x.is_finite() || !s.tau_i.is_finite() || s.tau_i < 0.0 {
            return Err(SolveError::InvalidSample { index: i });
        }
        if i > 0 {
            let prev = samples[i - 1].tau_i;
            if s.tau_i == prev {
                return Err(SolveError::DuplicateTimestamp { index: i });
            }
            if s.tau_i < prev {
                return Err(SolveError::NonMonotonicTime { index: i });
            }
        }
    }
    Ok(())
}

/// Stacks one row per sample, polynomials in `omega`.
pub fn build_matrix(
    samples: &[BearingSample],
    order: ExpansionOrder,
    tau: f64,
) -> Result<MeasurementMatrix, SolveError> {
    build_matrix_in(samples, order, tau, 1.0)
}

/// Like [`build_matrix`] but in the variable `u = omega * time_unit`.
///
/// Times are expressed in units of `time_unit` before expansion, which keeps
/// the coefficients of high powers of `u` near unit scale. The rows differ
/// from the `omega` rows by the constant factor `1 / time_unit`, which does
/// not move the minimizer.
pub fn build_matrix_in(
    samples: &[BearingSample],
    order: ExpansionOrder,
    tau: f64,
    time_unit: f64,
) -> Result<MeasurementMatrix, SolveError> {
    validate(samples, tau)?;
    let rows = samples
        .iter()
        .map(|s| {
            let scaled = BearingSample::new(s.x, s.tau_i / time_unit);
            taylor_row(&scaled, order, tau / time_unit)
        })
        .collect();
    Ok(MeasurementMatrix {
        rows,
        order,
        tau,
        time_unit,
    })
}

/// `M = B^T B` entrywise as polynomial products.
pub fn gram(b: &MeasurementMatrix) -> PolyMatrix3 {
    let mut entries: [[Polynomial; 3]; 3] = Default::default();
    for p in 0..3 {
        for q in p..3 {
            let mut acc = Polynomial::zero();
            for row in &b.rows {
                acc = &acc + &(&row[p] * &row[q]);
            }
            entries[p][q] = acc.clone();
            entries[q][p] = acc;
        }
    }
    PolyMatrix3 { entries }
}

/// Cofactor expansion of a symmetric 3x3 polynomial matrix, normalized.
pub fn det_poly(m: &PolyMatrix3) -> Polynomial {
    let e = &m.entries;
    let minor =
        |a: &Polynomial, b: &Polynomial, c: &Polynomial, d: &Polynomial| &(a * b) - &(c * d);
    let c0 = minor(&e[1][1], &e[2][2], &e[1][2], &e[2][1]);
    let c1 = minor(&e[1][0], &e[2][2], &e[1][2], &e[2][0]);
    let c2 = minor(&e[1][0], &e[2][1], &e[1][1], &e[2][0]);
    let det = &(&(&e[0][0] * &c0) - &(&e[0][1] * &c1)) + &(&e[0][2] * &c2);
    det.normalized()
}

/// Estimates `omega` for one track.
pub fn solve_omega(
    samples: &[BearingSample],
    order: ExpansionOrder,
    tau: f64,
    config: &SolverConfig,
) -> Result<OmegaEstimate, SolveError> {
    validate(samples, tau)?;
    let span = samples[samples.len() - 1].tau_i;
    let time_unit = if span > 0.0 { span } else { tau };

    let b = build_matrix_in(samples, order, tau, time_unit)?;
    let det = det_poly(&gram(&b));
    if det.is_zero() {
        return Err(SolveError::NoCandidates);
    }
    // Unit max-coefficient: residuals become comparable to rounding levels.
    let det = det.scale(1.0 / det.max_abs_coeff());

    let omega_bound = config.omega_max.min(order.max_scale_angle() / tau);
    let bound = omega_bound * time_unit;

    let mut candidates: Vec<f64> = alloc::vec![-bound, bound];
    let crit = det.derivative().normalized();
    if crit.degree().is_some_and(|d| d > 0) {
        let sf = crit.square_free();
        let mut roots = isolate_roots(&sf, -bound, bound)?;
        roots.refine(&sf, config.root_tol);
        candidates.extend(roots.values());
    }
    let n_candidates = candidates.len();

    let scored: Vec<(f64, f64)> = candidates.iter().map(|&u| (u, det.eval(u))).collect();
    let best = scored
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(SolveError::NoCandidates)?;

    // Near-ties go to the gentler motion.
    let tol = 1e-9 * best.1.abs();
    let mut ties = scored.iter().filter(|c| (c.1 - best.1).abs() <= tol);
    let mut pick = *ties.next().unwrap_or(&best);
    let mut ambiguous = false;
    for c in ties {
        ambiguous = true;
        if c.0.abs() < pick.0.abs() {
            pick = *c;
        }
    }

    Ok(OmegaEstimate {
        track_id: 0,
        omega: pick.0 / time_unit,
        residual: pick.1,
        n_candidates,
        ambiguous,
        objective: Some(DetObjective {
            poly: det,
            time_unit,
        }),
    })
}

/// Structure `(p0x, p0y, d)` recovered as the null direction of `B(omega)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureEstimate {
    pub point: WorldPoint2D,
    /// Third null-vector component; `1.0` whenever it could be normalized.
    pub d: f64,
    /// Singular values of `B(omega)`, ascending.
    pub singular_values: [f64; 3],
}

/// Right singular vector of the numeric `B(omega)` for the smallest singular
/// value, scaled so its third component is one when that is nonzero.
pub fn recover_structure(
    samples: &[BearingSample],
    order: ExpansionOrder,
    tau: f64,
    omega: f64,
) -> Result<StructureEstimate, SolveError> {
    let b = build_matrix(samples, order, tau)?;
    let rows = b.eval(omega);
    let mut m = Matrix3::<f64>::zeros();
    for r in &rows {
        for p in 0..3 {
            for q in 0..3 {
                m[(p, q)] += r[p] * r[q];
            }
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let sv = idx.map(|i| libm::sqrt(eig.eigenvalues[i].max(0.0)));
    if sv[1] - sv[0] <= 1e-6 * sv[1] {
        return Err(SolveError::DegenerateNullspace(sv[0], sv[1]));
    }
    let v = eig.eigenvectors.column(idx[0]);
    let (mut x, mut y, mut d) = (v[0], v[1], v[2]);
    let largest = [x, y, d].into_iter().fold(0.0, |m: f64, c| m.max(c.abs()));
    if d.abs() > 1e-12 * largest {
        x /= d;
        y /= d;
        d = 1.0;
    } else if y < 0.0 {
        x = -x;
        y = -y;
        d = -d;
    }
    Ok(StructureEstimate {
        point: WorldPoint2D::new(x, y),
        d,
        singular_values: sv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{exact_incidence_row, project_bearing, relative_pose, AckermannParams};

    fn clean_track(
        omega: f64,
        p: WorldPoint2D,
        n: usize,
        span: f64,
        tau: f64,
    ) -> Vec<BearingSample> {
        let params = AckermannParams::new(omega, tau);
        (0..n)
            .map(|i| {
                let t = span * i as f64 / (n - 1) as f64;
                let x = project_bearing(&p, &relative_pose(&params, t)).unwrap();
                BearingSample::new(x, t)
            })
            .collect()
    }

    #[test]
    fn order_parsing_and_degrees() {
        assert_eq!(
            "S7C6".parse::<ExpansionOrder>().unwrap(),
            ExpansionOrder::S7C6
        );
        assert!("s9c8".parse::<ExpansionOrder>().is_err());
        let d: Vec<_> = ExpansionOrder::ALL
            .iter()
            .map(|o| o.b_row_degree())
            .collect();
        assert_eq!(d, [5, 9, 13]);
        let d: Vec<_> = ExpansionOrder::ALL
            .iter()
            .map(|o| o.nominal_det_degree())
            .collect();
        assert_eq!(d, [30, 54, 78]);
    }

    #[test]
    fn row_degrees() {
        let s = BearingSample::new(0.3, 0.17);
        for (order, deg) in ExpansionOrder::ALL.iter().zip([5, 9, 13]) {
            let row = taylor_row(&s, *order, 0.3);
            assert_eq!(row[0].degree(), Some(deg));
            assert_eq!(row[1].degree(), Some(deg));
            assert_eq!(row[2].degree(), Some(2 * order.half_order()));
        }
    }

    #[test]
    fn s3c2_row_matches_closed_form() {
        // c = tau (tau^2 w^2 - 6); b3 = -ti (-x ti^2 w^2 + 3 ti w + 6 x)
        let (x, ti, tau) = (0.37, 0.21, 0.3);
        let row = taylor_row(&BearingSample::new(x, ti), ExpansionOrder::S3C2, tau);
        for w in [-2.0, -0.4, 0.0, 0.25, 1.3] {
            let th = w * ti;
            let c = tau * (tau * tau * w * w - 6.0);
            let a1 = x * (th * th * th / 6.0 - th) - th * th / 2.0 + 1.0;
            let a2 = x * (th * th / 2.0 - 1.0) + th * th * th / 6.0 - th;
            let b3 = -(ti * (-x * ti * ti * w * w + 3.0 * ti * w + 6.0 * x));
            assert!((row[0].eval(w) - c * a1).abs() < 1e-12);
            assert!((row[1].eval(w) - c * a2).abs() < 1e-12);
            assert!((row[2].eval(w) - b3).abs() < 1e-12);
        }
    }

    #[test]
    fn s5c4_and_s7c6_third_column_closed_form() {
        let (x, t, tau): (f64, f64, f64) = (-0.22, 0.19, 0.3);
        let r5 = taylor_row(&BearingSample::new(x, t), ExpansionOrder::S5C4, tau);
        let r7 = taylor_row(&BearingSample::new(x, t), ExpansionOrder::S7C6, tau);
        for w in [-1.5f64, -0.2, 0.0, 0.6, 2.0] {
            let b5 = t
                * (x * t.powi(4) * w.powi(4)
                    - 5.0 * t.powi(3) * w.powi(3)
                    - 20.0 * x * t * t * w * w
                    + 60.0 * t * w
                    + 120.0 * x);
            let b7 = -(t
                * (-x * t.powi(6) * w.powi(6)
                    + 7.0 * t.powi(5) * w.powi(5)
                    + 42.0 * x * t.powi(4) * w.powi(4)
                    - 210.0 * t.powi(3) * w.powi(3)
                    - 840.0 * x * t * t * w * w
                    + 2520.0 * t * w
                    + 5040.0 * x));
            assert!(
                (r5[2].eval(w) - b5).abs() < 1e-10,
                "{} vs {b5}",
                r5[2].eval(w)
            );
            assert!(
                (r7[2].eval(w) - b7).abs() < 1e-9,
                "{} vs {b7}",
                r7[2].eval(w)
            );
        }
    }

    #[test]
    fn row_at_zero_omega() {
        let (x, ti, tau) = (0.4, 0.12, 0.3);
        for order in ExpansionOrder::ALL {
            let row = taylor_row(&BearingSample::new(x, ti), order, tau);
            let c0 = order.multiplier_factor() * tau;
            let want = [c0, -c0 * x, c0 * ti * x / tau];
            for j in 0..3 {
                assert!((row[j].eval(0.0) - want[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn taylor_tracks_exact_row() {
        let tau = 0.3;
        for &(x, ti) in &[(0.1, 0.05), (-0.3, 0.2), (0.5, 0.25)] {
            let row = taylor_row(&BearingSample::new(x, ti), ExpansionOrder::S7C6, tau);
            for k in -10..=10 {
                let w = 0.4 * k as f64 / 10.0;
                let params = AckermannParams::new(w, tau);
                let exact = exact_incidence_row(x, ti, &params).unwrap();
                let mult = taylor_multiplier(ExpansionOrder::S7C6, tau, w);
                for j in 0..3 {
                    assert!((row[j].eval(w) / mult - exact[j]).abs() < 1e-8);
                }
            }
        }
    }

    fn taylor_multiplier(order: ExpansionOrder, tau: f64, w: f64) -> f64 {
        let s = sin_series(order.half_order(), tau);
        let d = Polynomial::new(s.coeffs()[1..].to_vec());
        order.multiplier_factor() * d.eval(w)
    }

    #[test]
    fn three_samples_three_rows() {
        let s = clean_track(0.2, WorldPoint2D::new(0.3, 5.0), 3, 0.2, 0.3);
        let b = build_matrix(&s, ExpansionOrder::S3C2, 0.3).unwrap();
        assert_eq!(b.n(), 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = [BearingSample::new(0.0, 0.0), BearingSample::new(0.1, 0.1)];
        assert!(matches!(
            build_matrix(&s, ExpansionOrder::S3C2, 0.3),
            Err(SolveError::TooFewSamples { got: 2, .. })
        ));
        let s = [
            BearingSample::new(0.0, 0.0),
            BearingSample::new(0.1, 0.1),
            BearingSample::new(0.1, 0.1),
        ];
        assert!(matches!(
            build_matrix(&s, ExpansionOrder::S3C2, 0.3),
            Err(SolveError::DuplicateTimestamp { index: 2 })
        ));
        let s = [
            BearingSample::new(0.0, 0.0),
            BearingSample::new(0.1, 0.2),
            BearingSample::new(0.1, 0.1),
        ];
        assert!(matches!(
            build_matrix(&s, ExpansionOrder::S3C2, 0.3),
            Err(SolveError::NonMonotonicTime { index: 2 })
        ));
        let s = clean_track(0.2, WorldPoint2D::new(0.3, 5.0), 5, 0.2, 0.3);
        assert!(matches!(
            build_matrix(&s, ExpansionOrder::S3C2, 0.0),
            Err(SolveError::InvalidScale { .. })
        ));
    }

    #[test]
    fn single_row_gram_is_rank_one() {
        let row = taylor_row(&BearingSample::new(0.2, 0.1), ExpansionOrder::S5C4, 0.3);
        let b = MeasurementMatrix {
            rows: alloc::vec![row],
            order: ExpansionOrder::S5C4,
            tau: 0.3,
            time_unit: 1.0,
        };
        let m = gram(&b);
        let d = det_poly(&m);
        for w in [-1.0, 0.0, 0.5] {
            let scale = m.eval(w)[0][0].powi(3).abs().max(1.0);
            assert!(d.eval(w).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn det_of_identity_and_zero_row() {
        assert_eq!(
            det_poly(&PolyMatrix3::identity()),
            Polynomial::constant(1.0)
        );
        let mut m = PolyMatrix3::identity();
        m.entries[1][1] = Polynomial::zero();
        assert!(det_poly(&m).is_zero());
    }

    #[test]
    fn solves_clean_right_and_left_turns() {
        let p = WorldPoint2D::new(0.5, 4.0);
        for omega in [0.3, -0.4, 0.0] {
            let s = clean_track(omega, p, 30, 0.25, 0.3);
            let est = solve_omega(&s, ExpansionOrder::S7C6, 0.3, &SolverConfig::default()).unwrap();
            assert!((est.omega - omega).abs() < 1e-6, "{omega}: {}", est.omega);
            assert!(est.residual >= -1e-9);
        }
    }

    #[test]
    fn structure_from_clean_track() {
        let p = WorldPoint2D::new(0.5, 4.0);
        let s = clean_track(0.3, p, 30, 0.25, 0.3);
        let st = recover_structure(&s, ExpansionOrder::S7C6, 0.3, 0.3).unwrap();
        assert!((st.point.p0x - 0.5).abs() < 1e-4);
        assert!((st.point.p0y - 4.0).abs() < 1e-4);
        assert_eq!(st.d, 1.0);
        let off = recover_structure(&s, ExpansionOrder::S7C6, 0.3, 0.6).unwrap();
        assert!(off.singular_values[0] > 100.0 * st.singular_values[0]);
    }

    #[test]
    fn on_axis_landmark_is_degenerate() {
        let s = clean_track(0.0, WorldPoint2D::new(0.0, 6.0), 10, 0.2, 0.3);
        let err = recover_structure(&s, ExpansionOrder::S7C6, 0.3, 0.0).unwrap_err();
        assert!(matches!(err, SolveError::DegenerateNullspace(..)));
    }
}
