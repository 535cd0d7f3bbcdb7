//! Dense univariate polynomials over `f64` and real-root machinery.
//!
//! Coefficients are stored in ascending order (`coeffs[k]` multiplies `x^k`).
//! Arithmetic is exact coefficient arithmetic in double precision; the only
//! place a tolerance enters is [`Polynomial::normalized`], which drops leading
//! coefficients that are negligible relative to the largest one.
//!
//! Root finding follows the classical route: make the input square-free, build
//! a Sturm chain, bisect on sign-variation counts until every interval holds a
//! single root, then refine each interval by bisection plus a Newton polish.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

/// Relative threshold under which a leading coefficient counts as zero.
pub const TRIM_REL_TOL: f64 = 1e-12;

/// Isolation stops splitting intervals narrower than this.
pub const ISOLATION_FLOOR: f64 = 1e-12;

/// Default refinement width for [`refine_root`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    /// A Sturm remainder vanished while the chain still had positive degree:
    /// the input is numerically not square-free (or badly conditioned).
    #[error("Sturm chain broke down at step {step} (degree {degree} remainder vanished)")]
    NumericalBreakdown { step: usize, degree: usize },
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
}

/// A dense polynomial with real coefficients, ascending degree.
///
/// The zero polynomial has an empty coefficient vector; every other value has
/// a nonzero last coefficient.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, stripping exact zeros
    /// at the top.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self { coeffs };
        p.strip();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c * x^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// The monic polynomial `prod (x - r)`.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut coeffs = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= r * c;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    fn strip(&mut self) {
        while self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Leading coefficient, `0.0` for the zero polynomial.
    pub fn leading_coeff(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| f64::max(m, c.abs()))
    }

    /// Drops leading coefficients with `|c| < rel_tol * max|coeffs|`.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        let cutoff = rel_tol * self.max_abs_coeff();
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.abs() < cutoff || *c == 0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// [`trimmed`](Self::trimmed) with the crate-wide [`TRIM_REL_TOL`].
    pub fn normalized(&self) -> Self {
        self.trimmed(TRIM_REL_TOL)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Horner evaluation with error-free transformations, accurate as if run
    /// in twice the working precision.
    pub fn eval_compensated(&self, x: f64) -> f64 {
        let mut s = 0.0;
        let mut e = 0.0;
        for &c in self.coeffs.iter().rev() {
            let prod = s * x;
            let perr = libm::fma(s, x, -prod);
            let sum = prod + c;
            let bb = sum - prod;
            let serr = (prod - (sum - bb)) + (c - bb);
            s = sum;
            e = e * x + (perr + serr);
        }
        s + e
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Returns `q(x) = p(s * x)`.
    pub fn rescale_variable(&self, s: f64) -> Self {
        let mut pow = 1.0;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            coeffs.push(c * pow);
            pow *= s;
        }
        Self::new(coeffs)
    }

    /// Scales so that the largest coefficient magnitude is one. Signs (and so
    /// Sturm sign patterns) are preserved.
    fn unit_scaled(&self) -> Self {
        let m = self.max_abs_coeff();
        if m == 0.0 {
            Self::zero()
        } else {
            self.scale(1.0 / m)
        }
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dn = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading_coeff();
        let Some(n) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if n < dn {
            return (Self::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0.0; n - dn + 1];
        for k in (0..=n - dn).rev() {
            let q = rem[k + dn] / lead;
            quot[k] = q;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * d;
            }
            rem[k + dn] = 0.0;
        }
        rem.truncate(dn);
        (Self::new(quot), Self::new(rem))
    }

    /// Numerical gcd by the Euclidean algorithm. A remainder whose largest
    /// coefficient falls below `TRIM_REL_TOL` times the dividend's is taken as
    /// zero. The result is scaled to unit max-coefficient.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.unit_scaled().normalized();
        let mut b = other.unit_scaled().normalized();
        if a.degree() < b.degree() {
            core::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            let r = if r.max_abs_coeff() < TRIM_REL_TOL * a.max_abs_coeff() {
                Self::zero()
            } else {
                r.normalized().unit_scaled()
            };
            a = b;
            b = r;
        }
        a
    }

    /// `p / gcd(p, p')`: same distinct roots, all simple.
    pub fn square_free(&self) -> Self {
        let g = self.gcd(&self.derivative());
        match g.degree() {
            None | Some(0) => self.clone(),
            Some(_) => self.div_rem(&g).0,
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut coeffs = long.coeffs.clone();
        for (c, s) in coeffs.iter_mut().zip(&short.coeffs) {
            *c += s;
        }
        Polynomial::new(coeffs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial::new(coeffs)
    }
}

impl Mul<f64> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, k: f64) -> Polynomial {
        self.scale(k)
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

/// Sturm chain `p0 = p, p1 = p', p_{k+1} = -rem(p_{k-1}, p_k)`.
///
/// Each element is scaled to unit max-coefficient, which leaves the sign
/// pattern (all that the counts depend on) unchanged.
#[derive(Debug, Clone)]
pub struct SturmSequence {
    chain: Vec<Polynomial>,
}

impl SturmSequence {
    /// Builds the chain for a square-free `p`.
    pub fn new(p: &Polynomial) -> Result<Self, PolyError> {
        let p0 = p.normalized().unit_scaled();
        if p0.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let mut chain = vec![p0];
        let p1 = chain[0].derivative().normalized().unit_scaled();
        if p1.is_zero() {
            return Ok(Self { chain });
        }
        chain.push(p1);
        loop {
            let n = chain.len();
            let last = &chain[n - 1];
            if last.degree() == Some(0) {
                break;
            }
            let prev = &chain[n - 2];
            let (_, r) = prev.div_rem(last);
            if r.max_abs_coeff() < TRIM_REL_TOL * prev.max_abs_coeff() {
                return Err(PolyError::NumericalBreakdown {
                    step: n,
                    degree: last.degree().unwrap_or(0),
                });
            }
            chain.push((-r.normalized()).unit_scaled());
        }
        Ok(Self { chain })
    }

    pub fn polynomials(&self) -> &[Polynomial] {
        &self.chain
    }

    /// Sign changes along the chain evaluated at `x`, zeros skipped.
    pub fn sign_variations(&self, x: f64) -> usize {
        let mut count = 0;
        let mut last = 0.0f64;
        for p in &self.chain {
            let v = p.eval(x);
            if v == 0.0 {
                continue;
            }
            if last != 0.0 && (v < 0.0) != (last < 0.0) {
                count += 1;
            }
            last = v;
        }
        count
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count_roots(&self, a: f64, b: f64) -> usize {
        self.sign_variations(a)
            .saturating_sub(self.sign_variations(b))
    }
}

/// One isolated root: an interval `(lo, hi]` and, once refined, its value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolatedRoot {
    pub lo: f64,
    pub hi: f64,
    /// Distinct roots the Sturm count reports inside the interval. Anything
    /// above one means isolation stopped at [`ISOLATION_FLOOR`].
    pub count: usize,
    pub value: Option<f64>,
}

/// Real roots of a polynomial on an interval, sorted and pairwise disjoint.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RootSet {
    pub roots: Vec<IsolatedRoot>,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Refines every interval in place. Intervals without a sign change
    /// (tangential roots that survived square-free reduction numerically) are
    /// left unrefined and reported back by their index.
    pub fn refine(&mut self, p: &Polynomial, tol: f64) -> Vec<usize> {
        let mut skipped = Vec::new();
        for (i, root) in self.roots.iter_mut().enumerate() {
            match refine_root(p, root.lo, root.hi, tol) {
                Ok(x) => root.value = Some(x),
                Err(_) => skipped.push(i),
            }
        }
        skipped
    }

    /// Refined root values, in ascending order.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots.iter().filter_map(|r| r.value)
    }
}

/// Isolates the distinct real roots of a square-free `p` in `(lo, hi]` by
/// Sturm-count bisection.
pub fn isolate_roots(p: &Polynomial, lo: f64, hi: f64) -> Result<RootSet, PolyError> {
    if !(lo < hi) {
        return Err(PolyError::InvalidInterval { lo, hi });
    }
    let sturm = SturmSequence::new(p)?;
    Ok(isolate_with(&sturm, lo, hi))
}

/// Isolation against a prebuilt chain.
pub fn isolate_with(sturm: &SturmSequence, lo: f64, hi: f64) -> RootSet {
    let mut out = Vec::new();
    // (lo, hi, V(lo), V(hi))
    let mut stack = vec![(lo, hi, sturm.sign_variations(lo), sturm.sign_variations(hi))];
    while let Some((a, b, va, vb)) = stack.pop() {
        let count = va.saturating_sub(vb);
        if count == 0 {
            continue;
        }
        if count == 1 || b - a < ISOLATION_FLOOR {
            out.push(IsolatedRoot {
                lo: a,
                hi: b,
                count,
                value: None,
            });
            continue;
        }
        let mid = 0.5 * (a + b);
        let vm = sturm.sign_variations(mid);
        // Upper half pushed first so the lower half pops first.
        stack.push((mid, b, vm, vb));
        stack.push((a, mid, va, vm));
    }
    out.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    RootSet { roots: out }
}

/// Refines the single root of `p` in `[lo, hi]`: bisection down to `tol`,
/// then one Newton step, accepted only if it stays in the bracket and does not
/// increase `|p|`.
pub fn refine_root(p: &Polynomial, lo: f64, hi: f64, tol: f64) -> Result<f64, PolyError> {
    if !(lo <= hi) {
        return Err(PolyError::InvalidInterval { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = p.eval_compensated(a);
    let fb = p.eval_compensated(b);
    if fb == 0.0 {
        return Ok(b);
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if (fa < 0.0) == (fb < 0.0) {
        return Err(PolyError::NoSignChange { lo, hi });
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = p.eval_compensated(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let x = 0.5 * (a + b);
    let fx = p.eval_compensated(x);
    let dfx = p.eval_with_derivative(x).1;
    if dfx != 0.0 {
        let xn = x - fx / dfx;
        if xn >= lo && xn <= hi && p.eval_compensated(xn).abs() <= fx.abs() {
            return Ok(xn);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec())
    }

    #[test]
    fn product_of_conjugates() {
        assert_eq!(&p(&[1.0, 1.0]) * &p(&[1.0, -1.0]), p(&[1.0, 0.0, -1.0]));
    }

    #[test]
    fn additive_identity_and_zero() {
        let q = p(&[2.0, 0.0, 3.0]);
        assert_eq!(&q + &Polynomial::zero(), q);
        assert!((&q - &q).is_zero());
        assert_eq!(Polynomial::zero().degree(), None);
        assert_eq!(p(&[0.0, 0.0]), Polynomial::zero());
    }

    #[test]
    fn compensated_eval_near_multiple_root() {
        let mut q = Polynomial::constant(1.0);
        for _ in 0..7 {
            q = &q * &p(&[-1.0, 1.0]);
        }
        let x = 1.0 + 1.0 / 1024.0;
        let exact = libm::pow(1.0 / 1024.0, 7.0);
        assert!((q.eval_compensated(x) - exact).abs() < 1e-6 * exact);
        assert!((q.eval(x) - exact).abs() > 1e-6 * exact);
    }

    #[test]
    fn eval_basics() {
        assert_eq!(p(&[-1.0, 0.0, 1.0]).eval(1.0), 0.0);
        assert_eq!(Polynomial::constant(4.5).eval(-123.0), 4.5);
        assert_eq!(Polynomial::zero().eval(3.0), 0.0);
        let (v, d) = p(&[1.0, 2.0, 3.0]).eval_with_derivative(2.0);
        assert_eq!((v, d), (17.0, 14.0));
    }

    #[test]
    fn derivative_power_rule() {
        assert_eq!(
            Polynomial::monomial(1.0, 3).derivative(),
            Polynomial::monomial(3.0, 2)
        );
        assert!(Polynomial::constant(7.0).derivative().is_zero());
    }

    #[test]
    fn trimming_uses_relative_tolerance() {
        let q = p(&[1.0, 2.0, 1e-13]);
        assert_eq!(q.degree(), Some(2));
        assert_eq!(q.normalized().degree(), Some(1));
        assert_eq!(p(&[1e-20, 1e-21]).normalized().degree(), Some(1));
    }

    #[test]
    fn division_reconstructs() {
        let a = p(&[3.0, -2.0, 0.5, 4.0, 1.0]);
        let b = p(&[1.0, 1.0, 2.0]);
        let (q, r) = a.div_rem(&b);
        assert!(r.degree().unwrap() < 2);
        let back = &(&q * &b) + &r;
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn square_free_double_root() {
        let sq = Polynomial::from_roots(&[1.0, 1.0]);
        let sf = sq.square_free();
        assert_eq!(sf.degree(), Some(1));
        assert!(sf.eval(1.0).abs() < 1e-12);
        let plain = Polynomial::from_roots(&[0.5, -2.0, 3.0]);
        let sf = plain.square_free();
        assert_eq!(sf.degree(), Some(3));
        let ratio = sf.leading_coeff() / plain.leading_coeff();
        for (x, y) in sf.coeffs().iter().zip(plain.coeffs()) {
            assert!((x - ratio * y).abs() < 1e-12);
        }
    }

    #[test]
    fn square_free_mixed_multiplicity() {
        let q = Polynomial::from_roots(&[1.0, 1.0, -2.0, -2.0, -2.0]);
        let sf = q.square_free();
        assert_eq!(sf.degree(), Some(2));
        assert!(sf.eval(1.0).abs() < 1e-9 * sf.max_abs_coeff());
        assert!(sf.eval(-2.0).abs() < 1e-9 * sf.max_abs_coeff());
    }

    #[test]
    fn sturm_counts() {
        let s = SturmSequence::new(&p(&[-2.0, 0.0, 1.0])).unwrap();
        assert_eq!(s.count_roots(-2.0, 2.0), 2);
        assert_eq!(s.count_roots(0.0, 2.0), 1);
        let s = SturmSequence::new(&p(&[1.0, 0.0, 1.0])).unwrap();
        assert_eq!(s.count_roots(-100.0, 100.0), 0);
    }

    #[test]
    fn sturm_breakdown_on_repeated_root() {
        let err = SturmSequence::new(&Polynomial::from_roots(&[0.3, 0.3, 1.0])).unwrap_err();
        assert!(matches!(err, PolyError::NumericalBreakdown { .. }));
    }

    #[test]
    fn isolate_cubic() {
        let q = Polynomial::from_roots(&[-1.0, 0.0, 1.0]);
        let set = isolate_roots(&q, -2.0, 2.0).unwrap();
        assert_eq!(set.len(), 3);
        for (r, want) in set.roots.iter().zip([-1.0, 0.0, 1.0]) {
            assert!(r.lo < want && want <= r.hi);
        }
        for w in set.roots.windows(2) {
            assert!(w[0].hi <= w[1].lo);
        }
    }

    #[test]
    fn isolate_positive_definite_is_empty() {
        let q = p(&[2.0, 0.0, 1.0, 0.0, 3.0]);
        assert!(isolate_roots(&q, -10.0, 10.0).unwrap().is_empty());
    }

    #[test]
    fn isolate_rejects_bad_interval() {
        assert!(matches!(
            isolate_roots(&p(&[1.0, 1.0]), 1.0, 1.0),
            Err(PolyError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn refine_sqrt2_and_linear() {
        let r = refine_root(&p(&[-2.0, 0.0, 1.0]), 1.0, 2.0, DEFAULT_ROOT_TOL).unwrap();
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-10);
        let r = refine_root(&p(&[-6.0, 3.0]), 0.0, 10.0, DEFAULT_ROOT_TOL).unwrap();
        assert!((r - 2.0).abs() < 1e-10);
    }

    #[test]
    fn refine_reports_missing_sign_change() {
        let err = refine_root(&p(&[1.0, 0.0, 1.0]), -1.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, PolyError::NoSignChange { .. }));
    }

    #[test]
    fn rescale_variable_matches_substitution() {
        let q = p(&[1.0, -3.0, 0.5, 2.0]);
        let r = q.rescale_variable(0.25);
        for x in [-2.0, 0.3, 1.7] {
            assert!((r.eval(x) - q.eval(0.25 * x)).abs() < 1e-12);
        }
    }
}
