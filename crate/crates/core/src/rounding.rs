//! Closed intervals with MPFR endpoints and outward (directed) rounding.
//!
//! Every operation rounds the lower endpoint toward `-inf` and the upper
//! endpoint toward `+inf`, and MPFR rounds each elementary function correctly
//! in the requested direction, so an [`Interval`] always contains the exact
//! real value of the expression that produced it. Inequality checks compare one
//! exact side against the unfavorable endpoint of the other.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

/// Working precision in bits for all enclosures.
pub const PRECISION: u32 = 192;

#[derive(Clone, PartialEq)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

fn down<T>(value: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(PRECISION, value, Round::Down).0
}

fn up<T>(value: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(PRECISION, value, Round::Up).0
}

impl Interval {
    /// # Panics
    /// If `lo > hi` or either endpoint is NaN.
    pub fn new(lo: Float, hi: Float) -> Self {
        assert!(lo <= hi, "interval endpoints out of order: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn from_f64(x: f64) -> Self {
        let v = Float::with_val(PRECISION.max(53), x);
        Interval::new(v.clone(), v)
    }

    pub fn from_u64(x: u64) -> Self {
        Interval::new(down(x), up(x))
    }

    pub fn from_i64(x: i64) -> Self {
        Interval::new(down(x), up(x))
    }

    pub fn from_integer(x: &Integer) -> Self {
        Interval::new(down(x), up(x))
    }

    pub fn from_rational(x: &Rational) -> Self {
        Interval::new(down(x), up(x))
    }

    pub fn pi() -> Self {
        Interval::new(down(Constant::Pi), up(Constant::Pi))
    }

    /// Euler's number `e`.
    pub fn e() -> Self {
        Interval::from_u64(1).exp()
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn midpoint(&self) -> f64 {
        let sum = Float::with_val(PRECISION + 1, &self.lo + &self.hi);
        (sum / 2u32).to_f64()
    }

    /// Upper bound on the width, as `f64` rounded up.
    pub fn width(&self) -> f64 {
        up(&self.hi - &self.lo).to_f64_round(Round::Up)
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn sqr(&self) -> Self {
        self.pow(2)
    }

    /// Integer power, exact in sign for intervals that straddle zero.
    pub fn pow(&self, k: u32) -> Self {
        if k == 0 {
            return Interval::from_u64(1);
        }
        let lo_k = |r| Float::with_val_round(PRECISION, (&self.lo).pow(k), r).0;
        let hi_k = |r| Float::with_val_round(PRECISION, (&self.hi).pow(k), r).0;
        if self.lo >= 0 {
            Interval::new(lo_k(Round::Down), hi_k(Round::Up))
        } else if self.hi <= 0 {
            if k % 2 == 0 {
                Interval::new(hi_k(Round::Down), lo_k(Round::Up))
            } else {
                Interval::new(lo_k(Round::Down), hi_k(Round::Up))
            }
        } else if k % 2 == 0 {
            let m = if -self.lo.clone() > self.hi {
                lo_k(Round::Up)
            } else {
                hi_k(Round::Up)
            };
            Interval::new(Float::with_val(PRECISION, 0), m)
        } else {
            Interval::new(lo_k(Round::Down), hi_k(Round::Up))
        }
    }

    /// # Panics
    /// If the interval has a negative lower endpoint.
    pub fn sqrt(&self) -> Self {
        assert!(self.lo >= 0, "sqrt of an interval with negative part");
        Interval::new(down(self.lo.sqrt_ref()), up(self.hi.sqrt_ref()))
    }

    /// # Panics
    /// If the interval is not strictly positive.
    pub fn ln(&self) -> Self {
        assert!(self.lo > 0, "ln of a nonpositive interval");
        Interval::new(down(self.lo.ln_ref()), up(self.hi.ln_ref()))
    }

    pub fn exp(&self) -> Self {
        Interval::new(down(self.lo.exp_ref()), up(self.hi.exp_ref()))
    }

    /// Enclosures of `cos(2 pi t / d)` and `sin(2 pi t / d)`.
    ///
    /// The angle is enclosed first; cosine and sine are 1-Lipschitz, so the
    /// values at the lower angle endpoint are widened by the angle width.
    pub fn cos_sin_turn(t: u64, d: u64) -> (Self, Self) {
        let angle = &(&Interval::pi() * &Interval::from_u64(2 * t)) / &Interval::from_u64(d);
        let slack = up(&angle.hi - &angle.lo);
        let widen = |f: &dyn Fn(Round) -> Float| {
            let lo = down(&f(Round::Down) - &slack).max(&Float::with_val(PRECISION, -1));
            let hi = up(&f(Round::Up) + &slack).min(&Float::with_val(PRECISION, 1));
            Interval::new(lo, hi)
        };
        let cos = widen(&|r| Float::with_val_round(PRECISION, angle.lo.cos_ref(), r).0);
        let sin = widen(&|r| Float::with_val_round(PRECISION, angle.lo.sin_ref(), r).0);
        (cos, sin)
    }

    /// True when every point of `self` is `<=` every point of `other`.
    pub fn certainly_le(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.20e}, {:.20e}]", self.lo.to_f64(), self.hi.to_f64())
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        Interval::new(down(&self.lo + &rhs.lo), up(&self.hi + &rhs.hi))
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        Interval::new(down(&self.lo - &rhs.hi), up(&self.hi - &rhs.lo))
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        let pairs = [
            (&self.lo, &rhs.lo),
            (&self.lo, &rhs.hi),
            (&self.hi, &rhs.lo),
            (&self.hi, &rhs.hi),
        ];
        let lo = pairs
            .iter()
            .map(|(a, b)| down(*a * *b))
            .reduce(|a, b| a.min(&b))
            .unwrap();
        let hi = pairs
            .iter()
            .map(|(a, b)| up(*a * *b))
            .reduce(|a, b| a.max(&b))
            .unwrap();
        Interval::new(lo, hi)
    }
}

impl Div for &Interval {
    type Output = Interval;
    /// # Panics
    /// If the divisor contains zero.
    fn div(self, rhs: &Interval) -> Interval {
        assert!(!rhs.contains_zero(), "division by an interval containing zero");
        let pairs = [
            (&self.lo, &rhs.lo),
            (&self.lo, &rhs.hi),
            (&self.hi, &rhs.lo),
            (&self.hi, &rhs.hi),
        ];
        let lo = pairs
            .iter()
            .map(|(a, b)| down(*a / *b))
            .reduce(|a, b| a.min(&b))
            .unwrap();
        let hi = pairs
            .iter()
            .map(|(a, b)| up(*a / *b))
            .reduce(|a, b| a.max(&b))
            .unwrap();
        Interval::new(lo, hi)
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi.clone(), -self.lo.clone())
    }
}

/// Enclosure of `|re + i im|^2`.
pub fn norm_sqr(re: &Interval, im: &Interval) -> Interval {
    &re.sqr() + &im.sqr()
}
