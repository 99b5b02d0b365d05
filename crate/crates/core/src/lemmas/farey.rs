//! The intervals attached to Farey fractions `b/a` with exact rational
//! endpoints:
//!
//! ```text
//! I(a,b)  = (bp/a, (bp+H)/a]        I*(a,b) = (bp/a, (bp+H)/a - h + 1]
//! J(a,b)  = [(bp-H)/a, bp/a)        J*(a,b) = [(bp-H)/a, bp/a - h + 1)
//! ```
//!
//! For `0 <= b < a <= X` coprime and `2XH < p`, the unstarred intervals are
//! pairwise disjoint subintervals of `(0, p - H)`, except `J(1,0) = [-H, 0)`.

use std::cmp::Ordering;

use rug::{Integer, Rational};
use serde::Serialize;

use crate::arith::gcd;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum IntervalKind {
    I,
    J,
    IStar,
    JStar,
}

impl IntervalKind {
    pub fn is_starred(self) -> bool {
        matches!(self, IntervalKind::IStar | IntervalKind::JStar)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FareyInterval {
    pub a: u64,
    pub b: u64,
    pub kind: IntervalKind,
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl FareyInterval {
    /// `h` only matters for the starred kinds.
    pub fn new(p: u64, big_h: u64, h: u64, a: u64, b: u64, kind: IntervalKind) -> Result<Self> {
        if a == 0 || b >= a {
            return Err(Error::Precondition(format!("need 0 <= b < a, got a = {a}, b = {b}")));
        }
        if gcd(a, b) != 1 {
            return Err(Error::Precondition(format!("gcd({a}, {b}) != 1")));
        }
        let center = Rational::from((Integer::from(b) * p, a));
        let offset = Rational::from((big_h, a));
        let shrink = Rational::from(Integer::from(h) - 1);
        let (lo, hi, lo_closed, hi_closed) = match kind {
            IntervalKind::I => (center.clone(), center + offset, false, true),
            IntervalKind::IStar => (center.clone(), center + offset - shrink, false, true),
            IntervalKind::J => (center.clone() - offset, center, true, false),
            IntervalKind::JStar => (center.clone() - offset, center - shrink, true, false),
        };
        Ok(FareyInterval {
            a,
            b,
            kind,
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            Ordering::Less => false,
            Ordering::Equal => !(self.lo_closed && self.hi_closed),
            Ordering::Greater => true,
        }
    }

    /// The integers in the interval, as an inclusive range (empty when `first > last`).
    pub fn integer_span(&self) -> (Integer, Integer) {
        let first = if self.lo_closed {
            self.lo.clone().ceil()
        } else {
            self.lo.clone().floor() + 1u32
        };
        let last = if self.hi_closed {
            self.hi.clone().floor()
        } else {
            self.hi.clone().ceil() - 1u32
        };
        (first.numer().clone(), last.numer().clone())
    }

    pub fn count_integers(&self) -> u64 {
        let (first, last) = self.integer_span();
        if last < first {
            0
        } else {
            (last - first + 1u32).to_u64().unwrap_or(u64::MAX)
        }
    }

    /// Whether `self` lies entirely before `other` with no common point.
    fn precedes(&self, other: &FareyInterval) -> bool {
        match self.hi.cmp(&other.lo) {
            Ordering::Less => true,
            Ordering::Equal => !(self.hi_closed && other.lo_closed),
            Ordering::Greater => false,
        }
    }

    pub fn intersects(&self, other: &FareyInterval) -> bool {
        !(self.is_empty() || other.is_empty() || self.precedes(other) || other.precedes(self))
    }

    /// Containment in the open interval `(0, upper)`.
    pub fn inside_open(&self, upper: &Rational) -> bool {
        let lo_ok = if self.lo_closed { self.lo > 0 } else { self.lo >= 0 };
        let hi_ok = if self.hi_closed {
            self.hi < *upper
        } else {
            self.hi <= *upper
        };
        lo_ok && hi_ok
    }

    pub fn label(&self) -> String {
        let kind = match self.kind {
            IntervalKind::I => "I",
            IntervalKind::J => "J",
            IntervalKind::IStar => "I*",
            IntervalKind::JStar => "J*",
        };
        format!(
            "{kind}({}, {}) = {}{}, {}{}",
            self.a,
            self.b,
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Coprime pairs `(a, b)` with `0 <= b < a <= x_max`, ordered by `a` then `b`.
pub fn farey_pairs(x_max: u64) -> Vec<(u64, u64)> {
    let mut pairs = Vec::new();
    for a in 1..=x_max {
        for b in 0..a {
            if gcd(a, b) == 1 {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DisjointnessReport {
    pub p: u64,
    pub big_h: u64,
    pub h: u64,
    pub x: String,
    pub intervals: usize,
    /// Overlapping pairs, as labels.
    pub overlaps: Vec<(String, String)>,
    /// Intervals other than `J(1,0)` that leave `(0, p - H)`.
    pub escapes: Vec<String>,
    /// Whether `J(1,0)` equals `[-H, 0)` (checked when `X >= 1`).
    pub exception_matches: bool,
    /// `(a, b)` whose starred intervals hold fewer than `2(H/a - h)` integers.
    pub count_shortfalls: Vec<(u64, u64)>,
    /// Smallest `(#I* + #J*) - 2(H/a - h)` over all pairs.
    pub min_count_margin: Option<f64>,
}

impl DisjointnessReport {
    pub fn passed(&self) -> bool {
        self.overlaps.is_empty()
            && self.escapes.is_empty()
            && self.exception_matches
            && self.count_shortfalls.is_empty()
    }
}

/// Checks that the intervals `I(a,b)`, `J(a,b)` for coprime `0 <= b < a <= X`
/// are pairwise disjoint and lie in `(0, p - H)` apart from `J(1,0) = [-H, 0)`,
/// and that `I*(a,b)` and `J*(a,b)` together hold at least `2(H/a - h)` integers.
///
/// Requires `2XH < p`.
pub fn check_interval_disjointness(
    p: u64,
    big_h: u64,
    x: &Rational,
    h: u64,
) -> Result<DisjointnessReport> {
    if big_h == 0 || h == 0 {
        return Err(Error::Precondition("H and h must be positive".into()));
    }
    if *x < 0 {
        return Err(Error::Precondition("X must be nonnegative".into()));
    }
    if Rational::from(x * 2u32) * big_h >= p {
        return Err(Error::Precondition(format!("need 2XH < p (p = {p}, H = {big_h}, X = {x})")));
    }
    let x_max = x.clone().floor().numer().to_u64().unwrap_or(0);
    let pairs = farey_pairs(x_max);
    let upper = Rational::from(p - big_h);
    let mut report = DisjointnessReport {
        p,
        big_h,
        h,
        x: x.to_string(),
        exception_matches: true,
        ..Default::default()
    };

    let mut intervals = Vec::with_capacity(2 * pairs.len());
    for &(a, b) in &pairs {
        for kind in [IntervalKind::I, IntervalKind::J] {
            let iv = FareyInterval::new(p, big_h, h, a, b, kind)?;
            if (a, b, kind) == (1, 0, IntervalKind::J) {
                report.exception_matches = iv.lo == -Integer::from(big_h)
                    && iv.hi == 0
                    && iv.lo_closed
                    && !iv.hi_closed;
            } else if !iv.inside_open(&upper) {
                report.escapes.push(iv.label());
            }
            intervals.push(iv);
        }
        let i_star = FareyInterval::new(p, big_h, h, a, b, IntervalKind::IStar)?;
        let j_star = FareyInterval::new(p, big_h, h, a, b, IntervalKind::JStar)?;
        let count = Rational::from(i_star.count_integers() + j_star.count_integers());
        let needed = (Rational::from((big_h, a)) - h) * 2u32;
        let margin = count - needed;
        if margin < 0 {
            report.count_shortfalls.push((a, b));
        }
        let margin = margin.to_f64();
        report.min_count_margin = Some(report.min_count_margin.map_or(margin, |m| m.min(margin)));
    }
    report.intervals = intervals.len();

    intervals.sort_by(|u, v| {
        u.lo.cmp(&v.lo)
            .then_with(|| v.lo_closed.cmp(&u.lo_closed))
            .then_with(|| u.hi.cmp(&v.hi))
    });
    for pair in intervals.windows(2) {
        if !pair[0].precedes(&pair[1]) {
            report.overlaps.push((pair[0].label(), pair[1].label()));
        }
    }
    Ok(report)
}
