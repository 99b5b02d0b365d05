//! Complete moments of short character sums,
//! `S(chi, h, r) = sum_{x mod p} |sum_{m<h} chi(x+m)|^{2r}`.
//!
//! The windows are tabulated once per `(chi, h)` into a [`WindowProfile`]: for
//! quadratic characters a histogram of the integer window sums, otherwise a
//! histogram of the multiset of root-of-unity exponents in each window. Every
//! moment `r` is then read off the profile, exactly for `d = 2` and as a
//! certified enclosure otherwise.

use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;

use crate::character::{Character, CharacterValue};
use crate::error::{Error, Result};
use crate::rounding::{norm_sqr, Interval};

/// Certified enclosures of `cos(2 pi t/d)` and `sin(2 pi t/d)` for `t < d`.
#[derive(Clone, Debug)]
pub struct RootTable {
    roots: Vec<(Interval, Interval)>,
}

impl RootTable {
    pub fn new(d: u64) -> Self {
        RootTable {
            roots: (0..d).map(|t| Interval::cos_sin_turn(t, d)).collect(),
        }
    }

    /// Enclosure of `|sum_t e^{2 pi i t/d}|^2` over the given exponents.
    pub fn norm_sqr_of_sum(&self, exponents: &[u32]) -> Interval {
        let zero = Interval::from_u64(0);
        let (mut re, mut im) = (zero.clone(), zero);
        for &t in exponents {
            let (c, s) = &self.roots[t as usize];
            re = &re + c;
            im = &im + s;
        }
        norm_sqr(&re, &im)
    }
}

/// `S(chi, h, r)` with its provenance.
#[derive(Clone, Debug, Serialize)]
pub struct SumStats {
    pub p: u64,
    pub h: u64,
    pub r: u32,
    /// Best `f64` estimate of the sum.
    pub value: f64,
    /// Bound on `|value - S|`; zero when the sum is known exactly.
    pub error_bound: f64,
    #[serde(skip)]
    exact: Option<Integer>,
    #[serde(skip)]
    enclosure: Interval,
}

impl SumStats {
    fn from_exact(p: u64, h: u64, r: u32, exact: Integer) -> Self {
        let value = exact.to_f64();
        let error_bound = (Integer::from(&exact) - Integer::from_f64(value).unwrap_or_default())
            .abs()
            .to_f64();
        SumStats {
            p,
            h,
            r,
            value,
            error_bound,
            enclosure: Interval::from_integer(&exact),
            exact: Some(exact),
        }
    }

    fn from_enclosure(p: u64, h: u64, r: u32, enclosure: Interval) -> Self {
        let value = enclosure.midpoint();
        let lo_err = Float::with_val(64, enclosure.hi() - value).to_f64();
        let hi_err = Float::with_val(64, value - enclosure.lo()).to_f64();
        let error_bound = lo_err.abs().max(hi_err.abs()) * (1.0 + 1e-12) + f64::MIN_POSITIVE;
        SumStats {
            p,
            h,
            r,
            value,
            error_bound,
            exact: None,
            enclosure,
        }
    }

    /// The exact integer value, available for quadratic characters.
    pub fn exact(&self) -> Option<&Integer> {
        self.exact.as_ref()
    }

    pub fn enclosure(&self) -> &Interval {
        &self.enclosure
    }

    /// Certifies `S <= bound` for every value in the bound's enclosure.
    pub fn certainly_le(&self, bound: &Interval) -> bool {
        match &self.exact {
            Some(s) => *bound.lo() >= *s,
            None => self.enclosure.hi() <= bound.lo(),
        }
    }

    /// Certifies `S >= bound` for every value in the bound's enclosure.
    pub fn certainly_ge(&self, bound: &Interval) -> bool {
        match &self.exact {
            Some(s) => *bound.hi() <= *s,
            None => self.enclosure.lo() >= bound.hi(),
        }
    }
}

#[derive(Clone, Debug)]
enum Windows {
    /// `counts[w + h]` windows with integer sum `w`.
    Quadratic { counts: Vec<u64> },
    /// Windows grouped by the sorted exponents of their nonzero terms.
    General {
        classes: BTreeMap<Vec<u32>, u64>,
        roots: RootTable,
    },
}

/// All `p` windows `chi(x), ..., chi(x+h-1)` of one character, tabulated.
#[derive(Clone, Debug)]
pub struct WindowProfile {
    p: u64,
    h: u64,
    windows: Windows,
}

fn check_window(p: u64, h: u64) -> Result<()> {
    if h == 0 {
        return Err(Error::Precondition("window length h must be positive".into()));
    }
    if h >= p {
        return Err(Error::Precondition(format!("window length h = {h} must be below p = {p}")));
    }
    Ok(())
}

impl WindowProfile {
    pub fn new(character: &Character, h: u64) -> Result<Self> {
        let p = character.p();
        check_window(p, h)?;
        let values = character.values();
        let windows = if character.order() == 2 {
            let signs: Vec<i64> = values
                .iter()
                .map(|v| match v {
                    CharacterValue::Zero => 0,
                    CharacterValue::Root(0) => 1,
                    CharacterValue::Root(_) => -1,
                })
                .collect();
            let at = |i: u64| signs[(i % p) as usize];
            let mut w: i64 = (0..h).map(at).sum();
            let mut counts = vec![0u64; 2 * h as usize + 1];
            for x in 0..p {
                counts[(w + h as i64) as usize] += 1;
                w += at(x + h) - at(x);
            }
            Windows::Quadratic { counts }
        } else {
            let mut classes = BTreeMap::new();
            let mut key = Vec::with_capacity(h as usize);
            for x in 0..p {
                key.clear();
                for m in 0..h {
                    if let CharacterValue::Root(t) = values[((x + m) % p) as usize] {
                        key.push(t as u32);
                    }
                }
                key.sort_unstable();
                *classes.entry(key.clone()).or_insert(0u64) += 1;
            }
            Windows::General {
                classes,
                roots: RootTable::new(character.order()),
            }
        };
        Ok(WindowProfile { p, h, windows })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn h(&self) -> u64 {
        self.h
    }

    /// `S(chi, h, r)`.
    pub fn moment(&self, r: u32) -> Result<SumStats> {
        if r == 0 {
            return Err(Error::Precondition("moment r must be positive".into()));
        }
        let (p, h) = (self.p, self.h);
        let stats = match &self.windows {
            Windows::Quadratic { counts } => {
                let mut total = Integer::new();
                for (i, &count) in counts.iter().enumerate() {
                    let w = i as i64 - h as i64;
                    if count > 0 && w != 0 {
                        total += Integer::from(w).pow(2 * r) * count;
                    }
                }
                SumStats::from_exact(p, h, r, total)
            }
            Windows::General { classes, roots } => {
                let mut total = Interval::from_u64(0);
                for (exponents, &count) in classes {
                    if exponents.is_empty() {
                        continue;
                    }
                    let term = roots.norm_sqr_of_sum(exponents).pow(r);
                    total = &total + &(&term * &Interval::from_u64(count));
                }
                SumStats::from_enclosure(p, h, r, total)
            }
        };
        // |inner sum| <= h for every window.
        let trivial = Integer::from(h).pow(2 * r) * p;
        if *stats.enclosure.lo() > trivial {
            return Err(Error::Internal(format!(
                "S(p={p}, h={h}, r={r}) exceeds the trivial bound p h^(2r)"
            )));
        }
        Ok(stats)
    }
}

/// `S(chi, h, r)`; windows wrap around modulo `p`.
pub fn moment_sum(character: &Character, h: u64, r: u32) -> Result<SumStats> {
    WindowProfile::new(character, h)?.moment(r)
}

/// Exponents of the nonzero terms of `chi(z), ..., chi(z+h-1)`.
pub fn window_exponents(character: &Character, z: i64, h: u64) -> Vec<u32> {
    (0..h as i64)
        .filter_map(|m| match character.value(z + m) {
            CharacterValue::Root(t) => Some(t as u32),
            CharacterValue::Zero => None,
        })
        .collect()
}
