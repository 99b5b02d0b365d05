//! The lower bound for `S(chi, h, r)` built from windows on which `chi` is
//! nearly constant, and the checks feeding it.
//!
//! Everything here starts from a [`NonresidueFactorization`]: a squarefree `u`
//! and a length `H` such that `chi(n) = 1` for every `n` in `(0, H]` coprime to
//! `u`. That hypothesis is verified by enumeration in [`verify_hypothesis`],
//! which hands back a [`Verified`] token; the checks only accept the token.

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::Serialize;

use super::bounds::{relative_margin, s_upper_bound};
use super::farey::{FareyInterval, IntervalKind};
use super::sums::{window_exponents, RootTable, SumStats, WindowProfile};
use super::Verdict;
use crate::arith::{gcd, is_prime};
use crate::character::{prime_nonresidues, Character, CharacterValue};
use crate::constants::precise;
use crate::error::{Error, Result};
use crate::rounding::{Interval, PRECISION};

/// A squarefree `u` split by the window length `h` into `u1` (primes below
/// `h`) and `u2` (primes in `[h, p)`), with the hypothesis length `H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonresidueFactorization {
    pub u: u64,
    pub u1: u64,
    pub u2: u64,
    pub k: u32,
    pub j: u32,
    /// `omega(u) + 1`.
    pub n: u32,
    pub big_h: u64,
    pub h: u64,
    pub primes: Vec<u64>,
}

impl NonresidueFactorization {
    /// `primes` are the distinct prime factors of `u`, each below `p`.
    pub fn new(p: u64, primes: &[u64], big_h: u64, h: u64) -> Result<Self> {
        if h == 0 || big_h == 0 {
            return Err(Error::Precondition("h and H must be positive".into()));
        }
        let mut sorted = primes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != primes.len() {
            return Err(Error::Precondition("prime factors of u must be distinct".into()));
        }
        let (mut u1, mut u2, mut k, mut j) = (1u64, 1u64, 0u32, 0u32);
        for &q in &sorted {
            if !is_prime(q) {
                return Err(Error::NotPrime(q));
            }
            if q >= p {
                return Err(Error::Precondition(format!("prime factor {q} is not below p = {p}")));
            }
            let overflow = || Error::Precondition("u does not fit in 64 bits".into());
            if q < h {
                u1 = u1.checked_mul(q).ok_or_else(overflow)?;
                k += 1;
            } else {
                u2 = u2.checked_mul(q).ok_or_else(overflow)?;
                j += 1;
            }
        }
        let u = u1
            .checked_mul(u2)
            .ok_or_else(|| Error::Precondition("u does not fit in 64 bits".into()))?;
        Ok(NonresidueFactorization {
            u,
            u1,
            u2,
            k,
            j,
            n: j + k + 1,
            big_h,
            h,
            primes: sorted,
        })
    }

    /// `u = q_1 ... q_{n-1}` and `H = q_n - 1` from the least prime nonresidues.
    pub fn from_nonresidues(p: u64, d: u64, n: u32, h: u64, cap: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("n must be positive".into()));
        }
        let q = prime_nonresidues(p, d, n as usize, cap)?;
        let (head, last) = q.split_at(n as usize - 1);
        NonresidueFactorization::new(p, head, last[0] - 1, h)
    }

    /// The same `u` and `H` split at another window length.
    pub fn with_window(&self, p: u64, h: u64) -> Result<Self> {
        NonresidueFactorization::new(p, &self.primes, self.big_h, h)
    }

    /// `X = H / (2h)`.
    pub fn x(&self) -> Rational {
        Rational::from((self.big_h, 2 * self.h))
    }
}

/// A character and factorization whose hypothesis has been checked.
#[derive(Clone, Copy, Debug)]
pub struct Verified<'a> {
    character: &'a Character,
    nf: &'a NonresidueFactorization,
}

impl<'a> Verified<'a> {
    pub fn character(&self) -> &'a Character {
        self.character
    }

    pub fn factorization(&self) -> &'a NonresidueFactorization {
        self.nf
    }
}

/// Checks `chi(n) = 1` for every `n` in `(0, H]` with `gcd(n, u) = 1`.
pub fn verify_hypothesis<'a>(
    character: &'a Character,
    nf: &'a NonresidueFactorization,
) -> Result<Verified<'a>> {
    for m in 1..=nf.big_h {
        if gcd(m, nf.u) == 1 && !character.value(m as i64).is_one() {
            return Err(Error::Hypothesis(format!(
                "chi({m}) != 1 for p = {}, d = {}, u = {}, H = {}",
                character.p(),
                character.order(),
                nf.u,
                nf.big_h
            )));
        }
    }
    Ok(Verified { character, nf })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftedSumOutcome {
    pub verdict: Verdict,
    /// Integers `z` examined.
    pub points: u64,
    /// `h - 2j`.
    pub bound: i64,
    pub min_abs: f64,
    pub max_abs: f64,
}

/// `|sum_{m<h} chi(z+m)|^2`, exactly for quadratic characters.
fn window_norm_sqr(character: &Character, roots: Option<&RootTable>, z: i64, h: u64) -> Interval {
    match roots {
        None => {
            let s: i64 = (0..h as i64)
                .map(|m| match character.value(z + m) {
                    CharacterValue::Zero => 0,
                    CharacterValue::Root(0) => 1,
                    CharacterValue::Root(_) => -1,
                })
                .sum();
            Interval::from_i64(s * s)
        }
        Some(roots) => roots.norm_sqr_of_sum(&window_exponents(character, z, h)),
    }
}

/// `|sum_{m<h} chi(z+m)| >= h - 2j` for every integer `z` in the starred
/// interval `I*(a,b)` or `J*(a,b)`, where `u1 | a` and `a < p`.
pub fn check_shifted_sum_lower(
    verified: &Verified,
    a: u64,
    b: u64,
    kind: IntervalKind,
) -> Result<ShiftedSumOutcome> {
    let (character, nf) = (verified.character, verified.nf);
    let p = character.p();
    if !kind.is_starred() {
        return Err(Error::Precondition("the window bound applies to I* and J* only".into()));
    }
    if a % nf.u1 != 0 {
        return Err(Error::Precondition(format!("u1 = {} does not divide a = {a}", nf.u1)));
    }
    if a >= p {
        return Err(Error::Precondition(format!("need a < p (a = {a}, p = {p})")));
    }
    let interval = FareyInterval::new(p, nf.big_h, nf.h, a, b, kind)?;
    let bound = nf.h as i64 - 2 * nf.j as i64;
    let (first, last) = interval.integer_span();
    let mut outcome = ShiftedSumOutcome {
        verdict: Verdict::Vacuous,
        points: 0,
        bound,
        min_abs: f64::INFINITY,
        max_abs: 0.0,
    };
    if bound <= 0 || last < first {
        return Ok(outcome);
    }
    let to_i64 = |v: &Integer| {
        v.to_i64()
            .ok_or_else(|| Error::Precondition(format!("interval endpoint {v} out of range")))
    };
    let (first, last) = (to_i64(&first)?, to_i64(&last)?);
    let roots = (character.order() != 2).then(|| RootTable::new(character.order()));
    let target = Interval::from_i64(bound * bound);
    let mut pass = true;
    for z in first..=last {
        let norm = window_norm_sqr(character, roots.as_ref(), z, nf.h);
        pass &= norm.lo() >= target.hi();
        let abs = norm.midpoint().max(0.0).sqrt();
        outcome.min_abs = outcome.min_abs.min(abs);
        outcome.max_abs = outcome.max_abs.max(abs);
        outcome.points += 1;
    }
    outcome.verdict = Verdict::from_pass(pass);
    Ok(outcome)
}

/// The pairs `(a, b)` to which the window bound applies: `u1 | a`, `a < p`,
/// `gcd(a, b) = 1`, with a nonempty `I*(a,b)` or `J*(a,b)`.
pub fn shifted_sum_pairs(p: u64, nf: &NonresidueFactorization) -> Vec<(u64, u64)> {
    let mut pairs = Vec::new();
    let a_max = nf.big_h.min(p - 1);
    let mut a = nf.u1;
    while a <= a_max {
        // Both starred intervals have length H/a - h + 1.
        if nf.big_h + a > nf.h * a {
            for b in 0..a {
                if gcd(a, b) == 1 {
                    pairs.push((a, b));
                }
            }
        }
        a += nf.u1;
    }
    pairs
}

/// Checks the preconditions of the lower bound: `2h < H < sqrt(hp)` and
/// `X/u1 > 1` with `X = H/(2h)`.
pub fn check_lower_preconditions(p: u64, nf: &NonresidueFactorization) -> Result<()> {
    let (h, big_h) = (nf.h, nf.big_h);
    if 2 * h >= big_h {
        return Err(Error::Precondition(format!(
            "need 2h < H, i.e. X > 1 (h = {h}, H = {big_h})"
        )));
    }
    if (big_h as u128).pow(2) >= h as u128 * p as u128 {
        return Err(Error::Precondition(format!(
            "need H < sqrt(hp) (h = {h}, H = {big_h}, p = {p})"
        )));
    }
    if big_h as u128 <= 2 * h as u128 * nf.u1 as u128 {
        return Err(Error::Precondition(format!("need X/u1 > 1 (u1 = {})", nf.u1)));
    }
    Ok(())
}

/// Enclosure of `(18/pi^2) h (h-2j)^{2r} (phi(u1)/u1^2) X^2 f(X/u1)`.
pub fn proposition_lower_bound(nf: &NonresidueFactorization, r: u32) -> Interval {
    let h = nf.h as i64;
    let spoiled = h - 2 * nf.j as i64;
    let phi_u1: u64 = nf.primes.iter().filter(|&&q| q < nf.h).map(|&q| q - 1).product();
    let x = nf.x();
    let y = Rational::from(&x / nf.u1);
    let weight = Integer::from(h) * Integer::from(spoiled).pow(2 * r);
    let exact = Rational::from(x.square_ref()) * weight * Rational::from((phi_u1, nf.u1 * nf.u1));
    let eighteen_over_pi2 = &Interval::from_u64(18) / &Interval::pi().sqr();
    let f = precise::totient_factor_f(&Interval::from_rational(&y));
    &(&eighteen_over_pi2 * &Interval::from_rational(&exact)) * &f
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropositionOutcome {
    pub verdict: Verdict,
    pub lower: f64,
    pub s: f64,
    pub margin: f64,
}

fn s_value(stats: &SumStats) -> rug::Float {
    match stats.exact() {
        Some(s) => rug::Float::with_val(PRECISION, s),
        None => stats.enclosure().lo().clone(),
    }
}

/// `S(chi, h, r) >= (18/pi^2) h (h-2j)^{2r} (phi(u1)/u1^2) X^2 f(X/u1)`.
pub fn check_proposition_lower(verified: &Verified, r: u32) -> Result<PropositionOutcome> {
    let profile = WindowProfile::new(verified.character, verified.nf.h)?;
    check_proposition_lower_with(verified, &profile, r)
}

/// As [`check_proposition_lower`], reusing a window profile for `(chi, h)`.
pub fn check_proposition_lower_with(
    verified: &Verified,
    profile: &WindowProfile,
    r: u32,
) -> Result<PropositionOutcome> {
    let stats = proposition_stats(verified, profile, r)?;
    Ok(lower_outcome(verified.nf, &stats))
}

fn proposition_stats(verified: &Verified, profile: &WindowProfile, r: u32) -> Result<SumStats> {
    let (character, nf) = (verified.character, verified.nf);
    if r == 0 {
        return Err(Error::Precondition("r must be positive".into()));
    }
    if profile.p() != character.p() || profile.h() != nf.h {
        return Err(Error::Precondition("window profile does not match the instance".into()));
    }
    check_lower_preconditions(character.p(), nf)?;
    profile.moment(r)
}

fn lower_outcome(nf: &NonresidueFactorization, stats: &SumStats) -> PropositionOutcome {
    let s = s_value(stats);
    if nf.h <= 2 * nf.j as u64 {
        return PropositionOutcome {
            verdict: Verdict::Vacuous,
            lower: f64::NAN,
            s: s.to_f64(),
            margin: f64::NAN,
        };
    }
    let lower = proposition_lower_bound(nf, stats.r);
    PropositionOutcome {
        verdict: Verdict::from_pass(stats.certainly_ge(&lower)),
        lower: lower.midpoint(),
        s: s.to_f64(),
        margin: relative_margin(lower.hi(), &s),
    }
}

/// Lower bound, `S`, and upper bound for one instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub p: u64,
    pub d: u64,
    pub factorization: NonresidueFactorization,
    pub r: u32,
    pub lower: f64,
    pub s: f64,
    pub upper: f64,
    /// `S / lower`, when the lower bound is positive.
    pub lower_ratio: Option<f64>,
    /// `S / upper`.
    pub upper_ratio: f64,
    pub lower_verdict: Verdict,
    pub upper_verdict: Verdict,
}

impl SandwichReport {
    pub fn verdict(&self) -> Verdict {
        match (self.lower_verdict, self.upper_verdict) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Vacuous, _) => Verdict::Vacuous,
            _ => Verdict::Pass,
        }
    }

    /// Smaller of the two relative margins; `None` for vacuous instances.
    pub fn slack(&self) -> Option<f64> {
        let upper = 1.0 - self.upper_ratio;
        match self.lower_ratio {
            Some(ratio) if self.lower_verdict != Verdict::Vacuous => {
                Some(upper.min(1.0 - 1.0 / ratio))
            }
            _ if self.lower_verdict == Verdict::Vacuous => None,
            _ => Some(upper),
        }
    }
}

/// Checks `lower <= S(chi, h, r) <= upper`.
pub fn sandwich_report(verified: &Verified, r: u32) -> Result<SandwichReport> {
    let profile = WindowProfile::new(verified.character, verified.nf.h)?;
    sandwich_report_with(verified, &profile, r)
}

/// As [`sandwich_report`], reusing a window profile for `(chi, h)`.
pub fn sandwich_report_with(
    verified: &Verified,
    profile: &WindowProfile,
    r: u32,
) -> Result<SandwichReport> {
    let (character, nf) = (verified.character, verified.nf);
    if r as u64 > 9 * nf.h {
        return Err(Error::Precondition(format!("need r <= 9h (r = {r}, h = {})", nf.h)));
    }
    let stats = proposition_stats(verified, profile, r)?;
    let lower = lower_outcome(nf, &stats);
    let upper = s_upper_bound(character.p(), nf.h, r);
    let upper_mid = upper.midpoint();
    Ok(SandwichReport {
        p: character.p(),
        d: character.order(),
        factorization: nf.clone(),
        r,
        lower: lower.lower,
        s: lower.s,
        upper: upper_mid,
        lower_ratio: (lower.lower > 0.0).then(|| lower.s / lower.lower),
        upper_ratio: lower.s / upper_mid,
        lower_verdict: lower.verdict,
        upper_verdict: Verdict::from_pass(stats.certainly_le(&upper)),
    })
}

/// Window lengths `h` for which `u = q_1 ... q_{n-1}`, `H = q_n - 1` meets
/// the preconditions of the lower bound, with their factorizations.
pub fn admissible_windows(p: u64, nonresidues: &[u64], n: u32) -> Vec<NonresidueFactorization> {
    let n = n as usize;
    if n == 0 || nonresidues.len() < n {
        return Vec::new();
    }
    let head = &nonresidues[..n - 1];
    let big_h = nonresidues[n - 1] - 1;
    if head.iter().any(|&q| q >= p) {
        return Vec::new();
    }
    (1..big_h.div_ceil(2))
        .filter_map(|h| NonresidueFactorization::new(p, head, big_h, h).ok())
        .filter(|nf| check_lower_preconditions(p, nf).is_ok())
        .collect()
}
