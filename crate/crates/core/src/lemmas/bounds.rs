//! Inequalities with one exact side and one closed-form side.
//!
//! The exact side is an integer or rational; the closed form is enclosed with
//! directed rounding and compared through its unfavorable endpoint, so a
//! `Pass` is a certificate, not a floating-point coincidence.

use rug::{Float, Integer, Rational};
use serde::Serialize;

use super::sums::SumStats;
use super::Verdict;
use crate::arith::totient_table;
use crate::constants::precise;
use crate::error::{Error, Result};
use crate::rounding::{Interval, PRECISION};

/// Result of one inequality check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityOutcome {
    pub verdict: Verdict,
    /// Left-hand side, as written in the inequality.
    pub lhs: f64,
    /// Right-hand side (midpoint of its enclosure).
    pub rhs: f64,
    /// `(allowed - actual) / max(|lhs|, |rhs|)`: positive on a pass.
    pub margin: f64,
}

/// Relative margin of `small <= big`.
pub(crate) fn relative_margin(small: &Float, big: &Float) -> f64 {
    let diff = Float::with_val(PRECISION, big - small);
    let scale = Float::with_val(PRECISION, small.abs_ref()).max(&Float::with_val(PRECISION, big.abs_ref()));
    if scale == 0 {
        0.0
    } else {
        (diff / scale).to_f64()
    }
}

fn outcome_le(lhs: Float, rhs: &Interval, pass: bool) -> InequalityOutcome {
    InequalityOutcome {
        verdict: Verdict::from_pass(pass),
        lhs: lhs.to_f64(),
        rhs: rhs.midpoint(),
        margin: relative_margin(&lhs, rhs.lo()),
    }
}

fn outcome_ge(lhs: Float, rhs: &Interval, pass: bool) -> InequalityOutcome {
    InequalityOutcome {
        verdict: Verdict::from_pass(pass),
        lhs: lhs.to_f64(),
        rhs: rhs.midpoint(),
        margin: relative_margin(rhs.hi(), &lhs),
    }
}

/// `(2r)! / (2^r r!)`, exactly.
pub fn double_factorial_ratio(r: u32) -> Integer {
    let num = Integer::from(Integer::factorial(2 * r));
    let den = Integer::from(Integer::factorial(r)) << r;
    num / den
}

/// `(2r)!/(2^r r!) <= sqrt(2) (2r/e)^r`.
pub fn check_stirling_ratio(r: u32) -> Result<InequalityOutcome> {
    if r == 0 {
        return Err(Error::Precondition("r must be positive".into()));
    }
    let lhs = double_factorial_ratio(r);
    let base = &Interval::from_u64(2 * r as u64) / &Interval::e();
    let rhs = &Interval::from_u64(2).sqrt() * &base.pow(r);
    let pass = *rhs.lo() >= lhs;
    Ok(outcome_le(Float::with_val(PRECISION, &lhs), &rhs, pass))
}

/// Enclosure of `(9/pi^2) x^2 f(x)` for `x > 1`.
pub fn totient_rhs(x: &Rational) -> Interval {
    let xi = Interval::from_rational(x);
    let nine_over_pi2 = &Interval::from_u64(9) / &Interval::pi().sqr();
    &(&nine_over_pi2 * &xi.sqr()) * &precise::totient_factor_f(&xi)
}

/// `2x sum_{a<=x} phi(a)/a - sum_{a<=x} phi(a) >= (9/pi^2) x^2 f(x)` at one `x`.
pub fn check_totient_inequality(x: &Rational) -> Result<InequalityOutcome> {
    let mut sweep = TotientSweep::new(x)?;
    sweep.check(x)
}

/// Incremental evaluation of the totient inequality along increasing `x`:
/// the partial sums over `a <= x` are extended as `floor(x)` grows.
pub struct TotientSweep {
    phi: Vec<u64>,
    upto: u64,
    sum_ratio: Rational,
    sum_phi: Integer,
    last_x: Option<Rational>,
}

impl TotientSweep {
    /// Prepares a sweep for arguments up to `x_max`.
    pub fn new(x_max: &Rational) -> Result<Self> {
        let top = x_max.clone().floor().numer().to_u64().ok_or_else(|| {
            Error::Precondition(format!("x = {x_max} is out of range for the totient sweep"))
        })?;
        Ok(TotientSweep {
            phi: totient_table(top as usize),
            upto: 0,
            sum_ratio: Rational::new(),
            sum_phi: Integer::new(),
            last_x: None,
        })
    }

    /// Checks the inequality at `x`, which must exceed 1, be at most the sweep
    /// maximum, and be no smaller than the previous argument.
    pub fn check(&mut self, x: &Rational) -> Result<InequalityOutcome> {
        if *x <= 1 {
            return Err(Error::Precondition(format!("need x > 1, got {x}")));
        }
        if let Some(prev) = &self.last_x {
            if x < prev {
                return Err(Error::Precondition("sweep arguments must be nondecreasing".into()));
            }
        }
        let top = x.clone().floor().numer().to_u64().unwrap_or(u64::MAX);
        if top as usize >= self.phi.len() {
            return Err(Error::Precondition(format!("x = {x} exceeds the sweep maximum")));
        }
        while self.upto < top {
            self.upto += 1;
            let phi = self.phi[self.upto as usize];
            self.sum_ratio += Rational::from((phi, self.upto));
            self.sum_phi += phi;
        }
        self.last_x = Some(x.clone());

        let lhs = Rational::from(x * 2u32) * &self.sum_ratio - &self.sum_phi;
        let rhs = totient_rhs(x);
        let pass = *rhs.hi() <= lhs;
        Ok(outcome_ge(Float::with_val(PRECISION, &lhs), &rhs, pass))
    }
}

/// `(h/(h-2j))^{2r} <= exp(16 r j / (3h))` for `j <= h/8`.
pub fn check_convexity_bound(h: u64, r: u64, j: u64) -> Result<InequalityOutcome> {
    if h == 0 || r == 0 {
        return Err(Error::Precondition("h and r must be positive".into()));
    }
    if 8 * j > h {
        return Err(Error::Precondition(format!("need j <= h/8 (h = {h}, j = {j})")));
    }
    let exponent = u32::try_from(2 * r)
        .map_err(|_| Error::Precondition(format!("r = {r} is too large")))?;
    let base = Rational::from((h, h - 2 * j));
    let lhs = Rational::from(rug::ops::Pow::pow(&base, exponent));
    let arg = &Interval::from_u64(16 * r * j) / &Interval::from_u64(3 * h);
    let rhs = arg.exp();
    let pass = *rhs.lo() >= lhs;
    Ok(outcome_le(Float::with_val(PRECISION, &lhs), &rhs, pass))
}

/// [`check_convexity_bound`] for `r = 1, ..., r_max` at fixed `(h, j)`, with
/// both sides carried forward by one multiplication per step.
pub fn check_convexity_row(h: u64, j: u64, r_max: u64) -> Result<Vec<InequalityOutcome>> {
    if h == 0 {
        return Err(Error::Precondition("h must be positive".into()));
    }
    if 8 * j > h {
        return Err(Error::Precondition(format!("need j <= h/8 (h = {h}, j = {j})")));
    }
    let step_lhs = Rational::from((h * h, (h - 2 * j) * (h - 2 * j)));
    let step_rhs = (&Interval::from_u64(16 * j) / &Interval::from_u64(3 * h)).exp();
    let mut lhs = Rational::from(1);
    let mut rhs = Interval::from_u64(1);
    let mut row = Vec::with_capacity(r_max as usize);
    for _ in 0..r_max {
        lhs *= &step_lhs;
        rhs = &rhs * &step_rhs;
        let pass = *rhs.lo() >= lhs;
        row.push(outcome_le(Float::with_val(PRECISION, &lhs), &rhs, pass));
    }
    Ok(row)
}

/// Enclosure of `sqrt(2) (2r/e)^r p h^r + (2r-1) sqrt(p) h^{2r}`.
pub fn s_upper_bound(p: u64, h: u64, r: u32) -> Interval {
    let p_iv = Interval::from_u64(p);
    let h_iv = Interval::from_u64(h);
    let ratio = &Interval::from_u64(2 * r as u64) / &Interval::e();
    let first = &(&(&Interval::from_u64(2).sqrt() * &ratio.pow(r)) * &p_iv) * &h_iv.pow(r);
    let second =
        &(&Interval::from_u64(2 * r as u64 - 1) * &p_iv.sqrt()) * &h_iv.pow(2 * r);
    &first + &second
}

/// `S(chi, h, r) <= sqrt(2) (2r/e)^r p h^r + (2r-1) sqrt(p) h^{2r}` for
/// `h < p` and `r <= 9h`, given the computed sum.
pub fn check_s_upper(stats: &SumStats) -> Result<InequalityOutcome> {
    let (p, h, r) = (stats.p, stats.h, stats.r);
    if h == 0 || h >= p {
        return Err(Error::Precondition(format!("need 0 < h < p (h = {h}, p = {p})")));
    }
    if r == 0 || r as u64 > 9 * h {
        return Err(Error::Precondition(format!("need 1 <= r <= 9h (r = {r}, h = {h})")));
    }
    let rhs = s_upper_bound(p, h, r);
    let pass = stats.certainly_le(&rhs);
    let lhs = match stats.exact() {
        Some(s) => Float::with_val(PRECISION, s),
        None => stats.enclosure().hi().clone(),
    };
    Ok(outcome_le(lhs, &rhs, pass))
}
