//! Closed-form constants for the explicit nonresidue bound.
//!
//! For `n >= 1` and a real modulus `p`, with `L = log p` and `B = n / (2(n+1))`:
//!
//! ```text
//! X*     = (pi/3) (2e)^{-1/2} ((n+1)/n)^{n-1} p^{1/4} / L^{(n-1)/2} * (1 - ((n+1)/n) e^{-1/n} / L)
//! f(x)   = 1 - (pi^2/9) (log x + 9) / (3x)
//! g(n,p) = (pi/3) sqrt(2e) (n/(n+1)) * sqrt((1 + sqrt2 / (2BL - 3)) / f(X*))
//! ```
//!
//! and `H <= g(n,p) p^{1/4} L^{(n+1)/2}` whenever `X* > 3.8`, `L > e^{8/3}` and
//! `L > 8(n-1)`. The table of constants `C = g(n0, p0)` additionally requires
//! `p0 > max(2e6, e^{8(n0-1)})`.
//!
//! Everything here is evaluated in `f64`; [`precise`] re-evaluates the same
//! expressions as certified MPFR enclosures for cross-checking.

use std::f64::consts::{E, PI, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const XSTAR_THRESHOLD: f64 = 3.8;

/// Lower bound on `p0` used when building the table of constants.
pub const TABLE_P0_FLOOR: f64 = 2.0e6;

/// The moduli `p0` of the published table of constants.
pub const TABLE_P0: [f64; 9] = [1e7, 1e8, 1e9, 1e10, 1e15, 1e20, 1e25, 1e30, 1e35];

/// The row range `n0 = 1..=8` of the published table of constants.
pub const TABLE_N0: [u32; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

/// `(n, p)` pair fed to every closed form. `p` is a real number; it need not
/// be prime and may exceed the `u64` range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInput {
    n: u32,
    p: f64,
    log_p: f64,
}

impl BoundInput {
    pub fn new(n: u32, p: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Precondition("n must be at least 1".into()));
        }
        if !(p >= 2.0) || !p.is_finite() {
            return Err(Error::Precondition(format!("p must be a finite real >= 2, got {p}")));
        }
        Ok(BoundInput { n, p, log_p: p.ln() })
    }

    /// Builds the input from `log p` directly, which keeps `log p` exact for
    /// moduli such as `p = e^12`.
    pub fn from_log(n: u32, log_p: f64) -> Result<Self> {
        if !(log_p >= std::f64::consts::LN_2) {
            return Err(Error::Precondition(format!("log p must be >= log 2, got {log_p}")));
        }
        let p = log_p.exp();
        if n < 1 {
            return Err(Error::Precondition("n must be at least 1".into()));
        }
        Ok(BoundInput { n, p, log_p })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn log_p(&self) -> f64 {
        self.log_p
    }
}

/// A named hypothesis of the bound or of the table of constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "xstar_gt_3.8")]
    XstarAboveThreshold,
    #[serde(rename = "log_p_gt_exp_8/3")]
    LogPAboveExpEightThirds,
    #[serde(rename = "log_p_gt_8(n-1)")]
    LogPAboveEightNMinusOne,
    #[serde(rename = "p0_gt_2e6")]
    P0AboveFloor,
    #[serde(rename = "p0_gt_exp_8(n-1)")]
    P0AboveExpEightNMinusOne,
}

impl Condition {
    pub fn id(self) -> &'static str {
        match self {
            Condition::XstarAboveThreshold => "xstar_gt_3.8",
            Condition::LogPAboveExpEightThirds => "log_p_gt_exp_8/3",
            Condition::LogPAboveEightNMinusOne => "log_p_gt_8(n-1)",
            Condition::P0AboveFloor => "p0_gt_2e6",
            Condition::P0AboveExpEightNMinusOne => "p0_gt_exp_8(n-1)",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantsResult {
    pub n: u32,
    pub p: f64,
    pub xstar: f64,
    /// `f(X*)`; absent when `X* <= 1`, where `f` is undefined.
    pub f_at_xstar: Option<f64>,
    /// Absent when a denominator of `g` is nonpositive.
    pub g: Option<f64>,
    /// `g p^{1/4} (log p)^{(n+1)/2}`, absent together with `g`.
    pub bound: Option<f64>,
    pub valid: bool,
    pub failed_conditions: Vec<Condition>,
}

/// `f(x) = 1 - (pi^2/9) (log x + 9) / (3x)`, defined for `x > 1`.
pub fn totient_factor_f(x: f64) -> Result<f64> {
    if !(x > 1.0) {
        return Err(Error::Domain(format!("f(x) requires x > 1, got {x}")));
    }
    Ok(1.0 - PI * PI / 9.0 * (x.ln() + 9.0) / (3.0 * x))
}

pub fn compute_xstar(input: &BoundInput) -> f64 {
    let n = input.n as f64;
    let l = input.log_p;
    let ratio = (n + 1.0) / n;
    PI / 3.0 / (2.0 * E).sqrt() * ratio.powi(input.n as i32 - 1) * (0.25 * l).exp()
        / l.powf((n - 1.0) / 2.0)
        * (1.0 - ratio * (-1.0 / n).exp() / l)
}

/// `p^{1/4} (log p)^{(n+1)/2}`, the normalizing factor of the bound.
pub fn bound_scale(input: &BoundInput) -> f64 {
    let n = input.n as f64;
    (0.25 * input.log_p).exp() * input.log_p.powf((n + 1.0) / 2.0)
}

/// Evaluates `g(n, p)` together with `X*`, `f(X*)` and the bound, and reports
/// which hypotheses fail. Values are filled in whenever the expression is
/// defined, even if a hypothesis fails.
pub fn compute_g(input: &BoundInput) -> ConstantsResult {
    let n = input.n as f64;
    let l = input.log_p;
    let b = n / (2.0 * (n + 1.0));
    let xstar = compute_xstar(input);
    let f_at_xstar = totient_factor_f(xstar).ok();

    let numerator_den = 2.0 * b * l - 3.0;
    let g = match f_at_xstar {
        Some(f) if f > 0.0 && numerator_den > 0.0 => {
            let leading = PI / 3.0 * (2.0 * E).sqrt() * n / (n + 1.0);
            Some(leading * ((1.0 + SQRT_2 / numerator_den) / f).sqrt())
        }
        _ => None,
    };
    let bound = g.map(|g| g * bound_scale(input));

    let mut failed_conditions = Vec::new();
    if !(xstar > XSTAR_THRESHOLD) {
        failed_conditions.push(Condition::XstarAboveThreshold);
    }
    if !(l > (8.0f64 / 3.0).exp()) {
        failed_conditions.push(Condition::LogPAboveExpEightThirds);
    }
    if !(l > 8.0 * (n - 1.0)) {
        failed_conditions.push(Condition::LogPAboveEightNMinusOne);
    }
    ConstantsResult {
        n: input.n,
        p: input.p,
        xstar,
        f_at_xstar,
        g,
        bound,
        valid: failed_conditions.is_empty(),
        failed_conditions,
    }
}

/// `c p^{1/4} (log p)^{(n+1)/2}`.
pub fn compute_bound(input: &BoundInput, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Precondition(format!("the constant must be positive, got {c}")));
    }
    Ok(c * bound_scale(input))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Validity {
    pub holds: bool,
    pub failed_conditions: Vec<Condition>,
}

/// Whether `C = g(n0, p0)` is a valid constant for all `p >= p0`, `n <= n0`:
/// `X*(n0, p0) > 3.8` and `p0 > max(2e6, e^{8(n0-1)})`.
pub fn corollary_validity(n0: u32, p0: f64) -> Result<Validity> {
    let input = BoundInput::new(n0, p0)?;
    let mut failed_conditions = Vec::new();
    if !(compute_xstar(&input) > XSTAR_THRESHOLD) {
        failed_conditions.push(Condition::XstarAboveThreshold);
    }
    if !(p0 > TABLE_P0_FLOOR) {
        failed_conditions.push(Condition::P0AboveFloor);
    }
    if !(p0 > (8.0 * (n0 as f64 - 1.0)).exp()) {
        failed_conditions.push(Condition::P0AboveExpEightNMinusOne);
    }
    Ok(Validity {
        holds: failed_conditions.is_empty(),
        failed_conditions,
    })
}

/// Rounds up to three decimals, the direction that keeps a printed constant
/// usable as an upper bound.
pub fn round_up_3(x: f64) -> f64 {
    (x * 1000.0).ceil() / 1000.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableCell {
    pub n0: u32,
    pub p0: f64,
    /// `g(n0, p0)`, present only when the table conditions hold.
    pub g: Option<f64>,
    pub xstar: f64,
    pub failed_conditions: Vec<Condition>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsTable {
    pub n0s: Vec<u32>,
    pub p0s: Vec<f64>,
    /// Row-major: `cells[i][j]` is `(n0s[i], p0s[j])`.
    pub cells: Vec<Vec<TableCell>>,
}

pub fn make_table(n0s: &[u32], p0s: &[f64]) -> Result<ConstantsTable> {
    let mut cells = Vec::with_capacity(n0s.len());
    for &n0 in n0s {
        let mut row = Vec::with_capacity(p0s.len());
        for &p0 in p0s {
            let input = BoundInput::new(n0, p0)?;
            let validity = corollary_validity(n0, p0)?;
            let result = compute_g(&input);
            row.push(TableCell {
                n0,
                p0,
                g: if validity.holds { result.g } else { None },
                xstar: result.xstar,
                failed_conditions: validity.failed_conditions,
            });
        }
        cells.push(row);
    }
    Ok(ConstantsTable {
        n0s: n0s.to_vec(),
        p0s: p0s.to_vec(),
        cells,
    })
}

/// `1e7`-style label for a modulus.
pub fn format_modulus(p: f64) -> String {
    format!("{p:e}")
}

impl ConstantsTable {
    pub fn get(&self, n0: u32, p0: f64) -> Option<&TableCell> {
        let i = self.n0s.iter().position(|&n| n == n0)?;
        let j = self.p0s.iter().position(|&p| p == p0)?;
        Some(&self.cells[i][j])
    }

    fn cell_text(cell: &TableCell) -> String {
        match cell.g {
            Some(g) => format!("{:.3}", round_up_3(g)),
            None => "-".to_string(),
        }
    }

    /// Header row of `p0` values, one row per `n0`, `-` for invalid cells.
    /// Values are rounded up to three decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n0");
        for &p0 in &self.p0s {
            out.push(',');
            out.push_str(&format_modulus(p0));
        }
        out.push('\n');
        for (n0, row) in self.n0s.iter().zip(&self.cells) {
            out.push_str(&n0.to_string());
            for cell in row {
                out.push(',');
                out.push_str(&Self::cell_text(cell));
            }
            out.push('\n');
        }
        out
    }

    /// Row-major array of `{n0, p0, g, xstar, failed_conditions}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.cells.iter().flatten().collect::<Vec<_>>())
            .expect("table cells serialize")
    }

    /// Fixed-width grid with `n0` down the side and `p0` across the top.
    pub fn render_text(&self) -> String {
        let width = self
            .p0s
            .iter()
            .map(|&p| format_modulus(p).len())
            .max()
            .unwrap_or(0)
            .max(5);
        let mut out = format!("{:>6} |", "n0\\p0");
        for &p0 in &self.p0s {
            out.push_str(&format!(" {:>width$} |", format_modulus(p0)));
        }
        out.push('\n');
        out.push_str(&"-".repeat(7 + self.p0s.len() * (width + 3)));
        out.push('\n');
        for (n0, row) in self.n0s.iter().zip(&self.cells) {
            out.push_str(&format!("{n0:>6} |"));
            for cell in row {
                out.push_str(&format!(" {:>width$} |", Self::cell_text(cell)));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotonicityDirection {
    /// `g(n, p) < g(n, p')` for some `p < p'`.
    IncreasingInP,
    /// `g(n, p) > g(n', p)` for some `n < n'`.
    DecreasingInN,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityViolation {
    pub direction: MonotonicityDirection,
    pub n: u32,
    pub p: f64,
    pub g: f64,
    pub n_other: u32,
    pub p_other: f64,
    pub g_other: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub valid_points: usize,
    pub skipped_points: usize,
    pub comparisons: usize,
    pub violations: Vec<MonotonicityViolation>,
}

/// Checks over a grid that `g` is nonincreasing in `p` and nondecreasing in
/// `n`, comparing every pair of valid points in the same row or column.
/// Points where the bound's hypotheses fail are skipped.
pub fn monotonicity_scan(ns: &[u32], ps: &[f64]) -> Result<MonotonicityReport> {
    let mut report = MonotonicityReport::default();
    let mut grid: Vec<Vec<Option<f64>>> = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut row = Vec::with_capacity(ps.len());
        for &p in ps {
            let result = compute_g(&BoundInput::new(n, p)?);
            let g = result.g.filter(|_| result.valid);
            if g.is_some() {
                report.valid_points += 1;
            } else {
                report.skipped_points += 1;
            }
            row.push(g);
        }
        grid.push(row);
    }
    for (i, &n) in ns.iter().enumerate() {
        for (j, &p) in ps.iter().enumerate() {
            let Some(g) = grid[i][j] else { continue };
            for (j2, &p2) in ps.iter().enumerate() {
                let Some(g2) = grid[i][j2] else { continue };
                if p < p2 {
                    report.comparisons += 1;
                    if g < g2 {
                        report.violations.push(MonotonicityViolation {
                            direction: MonotonicityDirection::IncreasingInP,
                            n,
                            p,
                            g,
                            n_other: n,
                            p_other: p2,
                            g_other: g2,
                        });
                    }
                }
            }
            for (i2, &n2) in ns.iter().enumerate() {
                let Some(g2) = grid[i2][j] else { continue };
                if n < n2 {
                    report.comparisons += 1;
                    if g > g2 {
                        report.violations.push(MonotonicityViolation {
                            direction: MonotonicityDirection::DecreasingInN,
                            n,
                            p,
                            g,
                            n_other: n2,
                            p_other: p,
                            g_other: g2,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Window length and moment used in the Burgess argument:
/// `A = (n/(n+1)) e^{1/n}`, `B = n/(2(n+1))`, `h = ceil(A log p)`,
/// `r = floor(B log p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BurgessParameters {
    pub a: f64,
    pub b: f64,
    pub h: u64,
    pub r: u64,
}

impl BurgessParameters {
    /// `|(2B/(Ae))^{B log p} sqrt(p) - 1|`, which vanishes identically because
    /// `A = (2B/e) e^{1/(2B)}`.
    pub fn identity_residual(&self, log_p: f64) -> f64 {
        let lhs = (2.0 * self.b / (self.a * E)).powf(self.b * log_p);
        (lhs * (0.5 * log_p).exp() - 1.0).abs()
    }
}

pub fn burgess_params(input: &BoundInput) -> BurgessParameters {
    let n = input.n as f64;
    let l = input.log_p;
    let a = n / (n + 1.0) * (1.0 / n).exp();
    let b = n / (2.0 * (n + 1.0));
    BurgessParameters {
        a,
        b,
        h: (a * l).ceil().max(1.0) as u64,
        // n L / (2(n+1)) with the division last, so exact logs give exact r.
        r: (n * l / (2.0 * (n + 1.0))).floor().max(0.0) as u64,
    }
}

/// The same closed forms as certified enclosures at [`PRECISION`] bits.
///
/// [`PRECISION`]: crate::rounding::PRECISION
pub mod precise {
    use crate::rounding::Interval;

    fn log_p(p: f64) -> Interval {
        Interval::from_f64(p).ln()
    }

    /// Enclosure of `f(x)`; `x` must be certainly greater than 1.
    pub fn totient_factor_f(x: &Interval) -> Interval {
        let pi2_9 = &Interval::pi().sqr() / &Interval::from_u64(9);
        let inner = &(&x.ln() + &Interval::from_u64(9)) / &(&Interval::from_u64(3) * x);
        &Interval::from_u64(1) - &(&pi2_9 * &inner)
    }

    pub fn xstar(n: u32, p: f64) -> Interval {
        let l = log_p(p);
        let nn = Interval::from_u64(n as u64);
        let ratio = &Interval::from_u64(n as u64 + 1) / &nn;
        let two_e = &Interval::from_u64(2) * &Interval::e();
        let half_nm1 = &Interval::from_u64(n as u64 - 1) / &Interval::from_u64(2);
        let p_quarter = (&l / &Interval::from_u64(4)).exp();
        let l_pow = (&half_nm1 * &l.ln()).exp();
        let correction = &Interval::from_u64(1)
            - &(&(&ratio * &(&(-&Interval::from_u64(1)) / &nn).exp()) / &l);
        let leading = &(&Interval::pi() / &Interval::from_u64(3)) / &two_e.sqrt();
        let value = &(&(&leading * &ratio.pow(n - 1)) * &p_quarter) / &l_pow;
        &value * &correction
    }

    /// Enclosure of `g(n, p)`; `None` when the enclosure of a denominator is
    /// not certainly positive.
    pub fn g(n: u32, p: f64) -> Option<Interval> {
        let l = log_p(p);
        let nn = Interval::from_u64(n as u64);
        let n1 = Interval::from_u64(n as u64 + 1);
        let b = &nn / &(&Interval::from_u64(2) * &n1);
        let den = &(&(&Interval::from_u64(2) * &b) * &l) - &Interval::from_u64(3);
        let x = xstar(n, p);
        if !den.is_positive() || *x.lo() <= 1 {
            return None;
        }
        let f = totient_factor_f(&x);
        if !f.is_positive() {
            return None;
        }
        let two_e = &Interval::from_u64(2) * &Interval::e();
        let leading = &(&(&Interval::pi() / &Interval::from_u64(3)) * &two_e.sqrt()) * &(&nn / &n1);
        let numer = &Interval::from_u64(1) + &(&Interval::from_u64(2).sqrt() / &den);
        Some(&leading * &(&numer / &f).sqrt())
    }

    /// Enclosure of `c p^{1/4} (log p)^{(n+1)/2}` for an integer modulus.
    pub fn bound(n: u32, p: u64, c: &Interval) -> Interval {
        let l = Interval::from_u64(p).ln();
        let half_n1 = &Interval::from_u64(n as u64 + 1) / &Interval::from_u64(2);
        let scale = &(&l / &Interval::from_u64(4)).exp() * &(&half_n1 * &l.ln()).exp();
        c * &scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn f_values() {
        assert!(close(totient_factor_f(3.8).unwrap(), 0.0059, 0.0005));
        assert!(close(totient_factor_f(2.0).unwrap(), -0.7715, 0.0005));
        let far = totient_factor_f(1e12).unwrap();
        assert!(far > 0.999 && far < 1.0);
        assert!(matches!(totient_factor_f(1.0), Err(Error::Domain(_))));
        assert!(matches!(totient_factor_f(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn f_monotone_above_threshold() {
        let mut prev = totient_factor_f(3.8).unwrap();
        let mut x = 3.8;
        while x < 1e9 {
            x *= 1.01;
            let v = totient_factor_f(x).unwrap();
            assert!(v >= prev, "f not monotone at {x}");
            prev = v;
        }
    }

    #[test]
    fn xstar_values() {
        let x = compute_xstar(&BoundInput::new(1, 1e7).unwrap());
        assert!(close(x, 24.10, 0.01), "{x}");
        let x = compute_xstar(&BoundInput::new(3, 1e7).unwrap());
        assert!(close(x, 2.62, 0.01), "{x}");
        let a = compute_xstar(&BoundInput::new(1, 1e20).unwrap());
        let b = compute_xstar(&BoundInput::new(1, 1e24).unwrap());
        // Dominated by p^{1/4}; the log correction is close to 1 this far out.
        assert!(close(b / a, 10.0, 0.1));
    }

    #[test]
    fn g_anchor_values() {
        for &(n, p, want) in &[(1, 1e7, 1.530), (2, 1e8, 2.070), (5, 1e15, 6.469)] {
            let r = compute_g(&BoundInput::new(n, p).unwrap());
            assert!(r.valid, "({n}, {p}) {:?}", r.failed_conditions);
            assert!(close(r.g.unwrap(), want, 0.001), "({n}, {p}) -> {:?}", r.g);
        }
        let r = compute_g(&BoundInput::new(3, 1e7).unwrap());
        assert!(!r.valid);
        assert_eq!(r.failed_conditions, vec![Condition::XstarAboveThreshold]);
    }

    #[test]
    fn invalid_points_keep_diagnostics() {
        // f(X*) < 0 here, so g is undefined but X* is still reported.
        let r = compute_g(&BoundInput::new(3, 1e7).unwrap());
        assert!(r.f_at_xstar.unwrap() < 0.0);
        assert!(r.g.is_none() && r.bound.is_none());
        // X* < 1: f itself is undefined.
        let r = compute_g(&BoundInput::new(8, 1e7).unwrap());
        assert!(r.f_at_xstar.is_none());
        assert!(r.failed_conditions.contains(&Condition::LogPAboveEightNMinusOne));
        // Small p fails the log condition.
        let r = compute_g(&BoundInput::new(1, 1e5).unwrap());
        assert!(r.failed_conditions.contains(&Condition::LogPAboveExpEightThirds));
    }

    #[test]
    fn bound_values() {
        let b = compute_bound(&BoundInput::new(1, 1e7).unwrap(), 1.530).unwrap();
        assert!(close(b, 1386.8, 0.5), "{b}");
        let b = compute_bound(&BoundInput::from_log(1, 4.0).unwrap(), 1.0).unwrap();
        assert!(close(b, 4.0 * E, 0.001));
        assert!(compute_bound(&BoundInput::new(1, 1e7).unwrap(), 0.0).is_err());
        assert!(compute_bound(&BoundInput::new(1, 1e7).unwrap(), -1.0).is_err());
    }

    #[test]
    fn corollary_conditions() {
        assert!(corollary_validity(1, 1e7).unwrap().holds);
        let v = corollary_validity(4, 1e10).unwrap();
        assert!(!v.holds);
        assert!(v.failed_conditions.contains(&Condition::P0AboveExpEightNMinusOne));
        let v = corollary_validity(1, 1e6).unwrap();
        assert_eq!(v.failed_conditions, vec![Condition::P0AboveFloor]);
    }

    #[test]
    fn input_validation() {
        assert!(BoundInput::new(0, 1e7).is_err());
        assert!(BoundInput::new(1, 1.5).is_err());
        assert!(BoundInput::new(1, f64::NAN).is_err());
        assert!(BoundInput::new(1, f64::INFINITY).is_err());
        assert!(BoundInput::new(1, 2.0).is_ok());
    }

    #[test]
    fn table_spot_cells() {
        let table = make_table(&TABLE_N0, &TABLE_P0).unwrap();
        assert!(close(table.get(8, 1e30).unwrap().g.unwrap(), 2.745, 0.001));
        assert!(close(table.get(1, 1e35).unwrap().g.unwrap(), 1.244, 0.001));
        assert!(table.get(6, 1e15).unwrap().g.is_none());
    }

    #[test]
    fn table_renderings() {
        let table = make_table(&[1, 3], &[1e7, 1e8]).unwrap();
        assert_eq!(table.to_csv(), "n0,1e7,1e8\n1,1.530,1.433\n3,-,7.170\n");
        let text = table.render_text();
        assert!(text.contains("1.530") && text.contains("-"));
        let json = table.to_json();
        assert_eq!(json.as_array().unwrap().len(), 4);
        assert_eq!(json[2]["g"], serde_json::Value::Null);
        assert_eq!(json[2]["failed_conditions"][0], "xstar_gt_3.8");
    }

    #[test]
    fn monotonicity_on_rows_and_columns() {
        let report = monotonicity_scan(&TABLE_N0, &TABLE_P0).unwrap();
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        assert_eq!(report.valid_points, 45);
        let single = monotonicity_scan(&[1], &[1e7]).unwrap();
        assert_eq!(single.comparisons, 0);
        assert!(single.violations.is_empty());
    }

    #[test]
    fn burgess_parameter_values() {
        let params = burgess_params(&BoundInput::new(1, 1e7).unwrap());
        assert!(close(params.a, E / 2.0, 1e-12));
        assert_eq!(params.b, 0.25);
        assert_eq!(params.h, 22);
        assert_eq!(params.r, 4);
        assert!(params.identity_residual(1e7f64.ln()) < 1e-9);
        let exact = burgess_params(&BoundInput::from_log(2, 12.0).unwrap());
        assert!(close(exact.b, 1.0 / 3.0, 1e-15));
        assert_eq!(exact.r, 4);
    }

    #[test]
    fn g_exceeds_leading_factor() {
        for &n in &TABLE_N0 {
            for &p in &TABLE_P0 {
                let r = compute_g(&BoundInput::new(n, p).unwrap());
                if r.xstar > XSTAR_THRESHOLD && r.valid {
                    let f = r.f_at_xstar.unwrap();
                    assert!(f > 0.0 && f < 1.0);
                    let leading = PI / 3.0 * (2.0 * E).sqrt() * n as f64 / (n as f64 + 1.0);
                    assert!(r.g.unwrap() > leading);
                }
            }
        }
    }

    #[test]
    fn precise_path_agrees() {
        for &n in &TABLE_N0 {
            for &p in &TABLE_P0 {
                let fast = compute_g(&BoundInput::new(n, p).unwrap());
                let Some(g) = fast.g else { continue };
                let enclosure = precise::g(n, p).unwrap();
                assert!(enclosure.width() < 1e-40);
                let rel = ((g - enclosure.midpoint()) / enclosure.midpoint()).abs();
                assert!(rel < 1e-12, "({n}, {p}): rel {rel}");
            }
        }
    }
}
