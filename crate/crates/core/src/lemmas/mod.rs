//! Oracles for the inequalities behind the explicit bound, and sweeps that
//! run them over finite grids.
//!
//! Each check returns a [`Verdict`]; precondition violations are errors rather
//! than failures. The sweeps in this module are deterministic for a given
//! [`GridConfig`] (including its seed) and thread count.

pub mod bounds;
pub mod farey;
pub mod proposition;
pub mod sums;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::character::{character_orders, prime_nonresidues, Character, DEFAULT_SEARCH_CAP};
use crate::error::{Error, Result};
use crate::sieve::primes_up_to;
use bounds::{check_convexity_row, check_s_upper, check_stirling_ratio, TotientSweep};
use farey::{check_interval_disjointness, IntervalKind};
use proposition::{
    admissible_windows, check_shifted_sum_lower, sandwich_report_with, shifted_sum_pairs,
    verify_hypothesis, NonresidueFactorization,
};
use sums::WindowProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The inequality is trivially true or its hypotheses leave nothing to check.
    Vacuous,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    Stirling,
    Totient,
    Convexity,
    SUpper,
    Disjointness,
    ShiftedSum,
    Proposition,
}

impl Lemma {
    pub const ALL: [Lemma; 7] = [
        Lemma::Stirling,
        Lemma::Totient,
        Lemma::Convexity,
        Lemma::SUpper,
        Lemma::Disjointness,
        Lemma::ShiftedSum,
        Lemma::Proposition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Lemma::Stirling => "stirling",
            Lemma::Totient => "totient",
            Lemma::Convexity => "convexity",
            Lemma::SUpper => "s-upper",
            Lemma::Disjointness => "disjointness",
            Lemma::ShiftedSum => "shifted-sum",
            Lemma::Proposition => "proposition",
        }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Lemma::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown lemma '{s}'")))
    }
}

/// Sizes of the sweep grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub seed: u64,
    /// Stirling ratio for `r = 1..=stirling_r_max`.
    pub stirling_r_max: u32,
    /// Totient inequality at `x = k/10` for `k = 11..=totient_k_max`.
    pub totient_k_max: u64,
    /// Convexity for `h, r <= convexity_max`.
    pub convexity_max: u64,
    /// S upper bound for primes `p <= s_upper_p_max`, every order, `h <= s_upper_h_max`,
    /// `r <= min(s_upper_r_max, 9h)`, plus the boundary `r = 9h`.
    pub s_upper_p_max: u64,
    pub s_upper_h_max: u64,
    pub s_upper_r_max: u32,
    pub disjoint_trials: usize,
    pub disjoint_p_max: u64,
    /// Largest `X` drawn, which bounds the number of Farey pairs per trial.
    pub disjoint_x_cap: u64,
    /// Shifted-sum families: `u = 1` (any prime up to the first limit),
    /// `u = q1` with `h > q1` (quadratic), `u = q1 q2` with `h <= q1` (every order).
    pub shifted_unit_p_max: u64,
    pub shifted_quadratic_p_max: u64,
    pub shifted_general_p_max: u64,
    /// Constructed lower-bound instances: quadratic, `p <= proposition_p_max`,
    /// `n <= proposition_n_max`, `r <= proposition_r_max`.
    pub proposition_p_max: u64,
    pub proposition_n_max: u32,
    pub proposition_r_max: u32,
}

impl GridConfig {
    /// Grids sized to finish in minutes on one core.
    pub fn desk() -> Self {
        GridConfig {
            seed: 0x5eed,
            stirling_r_max: 500,
            totient_k_max: 50_000,
            convexity_max: 200,
            s_upper_p_max: 300,
            s_upper_h_max: 8,
            s_upper_r_max: 6,
            disjoint_trials: 200,
            disjoint_p_max: 100_000,
            disjoint_x_cap: 120,
            shifted_unit_p_max: 2_000,
            shifted_quadratic_p_max: 100_000,
            shifted_general_p_max: 10_000,
            proposition_p_max: 100_000,
            proposition_n_max: 3,
            proposition_r_max: 6,
        }
    }

    /// Larger grids for overnight runs.
    pub fn extended() -> Self {
        GridConfig {
            stirling_r_max: 2_000,
            totient_k_max: 200_000,
            convexity_max: 400,
            s_upper_p_max: 1_000,
            s_upper_h_max: 12,
            s_upper_r_max: 8,
            disjoint_trials: 2_000,
            disjoint_x_cap: 300,
            shifted_unit_p_max: 20_000,
            shifted_quadratic_p_max: 300_000,
            shifted_general_p_max: 30_000,
            proposition_p_max: 300_000,
            proposition_n_max: 4,
            proposition_r_max: 8,
            ..GridConfig::desk()
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig::desk()
    }
}

/// Failures listed per lemma before the list is truncated.
pub const MAX_LISTED_FAILURES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub instances_run: u64,
    pub passes: u64,
    pub failures: u64,
    /// Constructed instances whose character hypothesis did not hold.
    pub hypothesis_failures: u64,
    pub vacuous_skips: u64,
    /// Smallest relative margin over non-vacuous instances.
    pub min_slack: Option<f64>,
    pub worst_instance: Option<String>,
    pub failed_instances: Vec<String>,
}

impl LemmaReport {
    fn new(lemma: Lemma) -> Self {
        LemmaReport {
            lemma,
            instances_run: 0,
            passes: 0,
            failures: 0,
            hypothesis_failures: 0,
            vacuous_skips: 0,
            min_slack: None,
            worst_instance: None,
            failed_instances: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.hypothesis_failures == 0
    }

    fn record(&mut self, verdict: Verdict, slack: f64, label: impl FnOnce() -> String) {
        self.instances_run += 1;
        let mut label = Some(label);
        let mut text: Option<String> = None;
        let mut get = || text.get_or_insert_with(|| (label.take().unwrap())()).clone();
        match verdict {
            Verdict::Pass => self.passes += 1,
            Verdict::Vacuous => {
                self.vacuous_skips += 1;
                return;
            }
            Verdict::Fail => {
                self.failures += 1;
                if self.failed_instances.len() < MAX_LISTED_FAILURES {
                    self.failed_instances.push(get());
                }
            }
        }
        if slack.is_finite() && self.min_slack.is_none_or(|m| slack < m) {
            self.min_slack = Some(slack);
            self.worst_instance = Some(get());
        }
    }

    fn hypothesis_failure(&mut self, message: String) {
        self.instances_run += 1;
        self.hypothesis_failures += 1;
        if self.failed_instances.len() < MAX_LISTED_FAILURES {
            self.failed_instances.push(message);
        }
    }

    /// Appends `other`, as if its instances had been recorded after ours.
    fn absorb(&mut self, other: LemmaReport) {
        self.instances_run += other.instances_run;
        self.passes += other.passes;
        self.failures += other.failures;
        self.hypothesis_failures += other.hypothesis_failures;
        self.vacuous_skips += other.vacuous_skips;
        if let Some(slack) = other.min_slack {
            if self.min_slack.is_none_or(|m| slack < m) {
                self.min_slack = Some(slack);
                self.worst_instance = other.worst_instance;
            }
        }
        let room = MAX_LISTED_FAILURES - self.failed_instances.len();
        self.failed_instances.extend(other.failed_instances.into_iter().take(room));
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub lemmas: BTreeMap<Lemma, LemmaReport>,
    pub all_passed: bool,
}

/// Runs the selected sweeps in order.
pub fn run_suite(lemmas: &[Lemma], config: &GridConfig) -> Result<SuiteReport> {
    let mut reports = BTreeMap::new();
    for &lemma in lemmas {
        reports.insert(lemma, run_lemma(lemma, config)?);
    }
    Ok(SuiteReport {
        seed: config.seed,
        all_passed: reports.values().all(LemmaReport::passed),
        lemmas: reports,
    })
}

pub fn run_lemma(lemma: Lemma, config: &GridConfig) -> Result<LemmaReport> {
    match lemma {
        Lemma::Stirling => sweep_stirling(config.stirling_r_max),
        Lemma::Totient => sweep_totient(config.totient_k_max),
        Lemma::Convexity => sweep_convexity(config.convexity_max),
        Lemma::SUpper => {
            sweep_s_upper(config.s_upper_p_max, config.s_upper_h_max, config.s_upper_r_max)
        }
        Lemma::Disjointness => sweep_disjointness(config),
        Lemma::ShiftedSum => sweep_shifted_sum(config),
        Lemma::Proposition => sweep_proposition(
            config.proposition_p_max,
            config.proposition_n_max,
            config.proposition_r_max,
        ),
    }
}

/// Runs `per_item` in parallel and merges the partial reports in input order.
fn ordered_sweep<T: Sync>(
    lemma: Lemma,
    items: &[T],
    per_item: impl Fn(&T, &mut LemmaReport) -> Result<()> + Sync,
) -> Result<LemmaReport> {
    let parts: Vec<Result<LemmaReport>> = items
        .par_iter()
        .map(|item| {
            let mut part = LemmaReport::new(lemma);
            per_item(item, &mut part)?;
            Ok(part)
        })
        .collect();
    let mut report = LemmaReport::new(lemma);
    for part in parts {
        report.absorb(part?);
    }
    Ok(report)
}

pub fn sweep_stirling(r_max: u32) -> Result<LemmaReport> {
    let rs: Vec<u32> = (1..=r_max).collect();
    ordered_sweep(Lemma::Stirling, &rs, |&r, report| {
        let o = check_stirling_ratio(r)?;
        report.record(o.verdict, o.margin, || format!("r={r}"));
        Ok(())
    })
}

/// `x = k/10` for `k = 11..=k_max`.
pub fn sweep_totient(k_max: u64) -> Result<LemmaReport> {
    let mut report = LemmaReport::new(Lemma::Totient);
    if k_max < 11 {
        return Ok(report);
    }
    let mut sweep = TotientSweep::new(&Rational::from((k_max, 10)))?;
    for k in 11..=k_max {
        let x = Rational::from((k, 10));
        let o = sweep.check(&x)?;
        report.record(o.verdict, o.margin, || format!("x={x}"));
    }
    Ok(report)
}

pub fn sweep_convexity(max: u64) -> Result<LemmaReport> {
    let rows: Vec<(u64, u64)> = (1..=max).flat_map(|h| (0..=h / 8).map(move |j| (h, j))).collect();
    ordered_sweep(Lemma::Convexity, &rows, |&(h, j), report| {
        for (i, o) in check_convexity_row(h, j, max)?.into_iter().enumerate() {
            // j = 0 is the equality case 1 <= 1.
            let verdict = if j == 0 && o.verdict == Verdict::Pass {
                Verdict::Vacuous
            } else {
                o.verdict
            };
            report.record(verdict, o.margin, || format!("h={h} r={} j={j}", i + 1));
        }
        Ok(())
    })
}

pub fn sweep_s_upper(p_max: u64, h_max: u64, r_max: u32) -> Result<LemmaReport> {
    let mut cases = Vec::new();
    for p in primes_up_to(p_max) {
        for d in character_orders(p)? {
            cases.push((p, d));
        }
    }
    ordered_sweep(Lemma::SUpper, &cases, |&(p, d), report| {
        let chi = Character::of_order(p, d)?;
        for h in 1..=h_max.min(p - 1) {
            let profile = WindowProfile::new(&chi, h)?;
            let boundary = 9 * h as u32;
            let mut rs: Vec<u32> = (1..=r_max.min(boundary)).collect();
            if boundary > r_max {
                rs.push(boundary);
            }
            for r in rs {
                let o = check_s_upper(&profile.moment(r)?)?;
                report.record(o.verdict, o.margin, || format!("p={p} d={d} h={h} r={r}"));
            }
        }
        Ok(())
    })
}

/// One random disjointness instance.
#[derive(Clone, Debug, PartialEq)]
pub struct DisjointnessTrial {
    pub p: u64,
    pub big_h: u64,
    pub x: Rational,
    pub h: u64,
}

/// Random `(p, H, X, h)` with `p <= p_max` prime and `2XH < p`.
pub fn disjointness_trials(seed: u64, trials: usize, p_max: u64, x_cap: u64) -> Vec<DisjointnessTrial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    let p_max = p_max.max(5);
    while out.len() < trials {
        let mut p = rng.gen_range(5..=p_max);
        while !is_prime(p) {
            p -= 1;
        }
        let big_h = rng.gen_range(1..=((p - 1) / 2).clamp(1, 2_000));
        let den: u64 = rng.gen_range(1..=12);
        // Largest numerator with 2 (num/den) H < p and num/den <= x_cap.
        let by_p = (p * den - 1) / (2 * big_h);
        let num = rng.gen_range(0..=by_p.min(x_cap * den));
        let h = rng.gen_range(1..=16);
        out.push(DisjointnessTrial {
            p,
            big_h,
            x: Rational::from((num, den)),
            h,
        });
    }
    out
}

pub fn sweep_disjointness(config: &GridConfig) -> Result<LemmaReport> {
    let trials = disjointness_trials(
        config.seed,
        config.disjoint_trials,
        config.disjoint_p_max,
        config.disjoint_x_cap,
    );
    ordered_sweep(Lemma::Disjointness, &trials, |t, report| {
        let r = check_interval_disjointness(t.p, t.big_h, &t.x, t.h)?;
        let verdict = if r.intervals == 0 {
            Verdict::Vacuous
        } else {
            Verdict::from_pass(r.passed())
        };
        let slack = r.min_count_margin.unwrap_or(f64::INFINITY);
        report.record(verdict, slack, || {
            format!("p={} H={} X={} h={}: {:?}", t.p, t.big_h, t.x, t.h, r.overlaps.first())
        });
        Ok(())
    })
}

fn check_all_pairs(
    chi: &Character,
    nf: &NonresidueFactorization,
    report: &mut LemmaReport,
    require_equality: bool,
) {
    let p = chi.p();
    let verified = match verify_hypothesis(chi, nf) {
        Ok(v) => v,
        Err(e) => return report.hypothesis_failure(e.to_string()),
    };
    if nf.h <= 2 * nf.j as u64 {
        report.record(Verdict::Vacuous, f64::NAN, String::new);
        return;
    }
    for (a, b) in shifted_sum_pairs(p, nf) {
        for kind in [IntervalKind::IStar, IntervalKind::JStar] {
            let o = match check_shifted_sum_lower(&verified, a, b, kind) {
                Ok(o) => o,
                Err(e) => {
                    report.record(Verdict::Fail, f64::NAN, || e.to_string());
                    continue;
                }
            };
            if o.points == 0 {
                continue;
            }
            let mut verdict = o.verdict;
            if require_equality && (o.min_abs != nf.h as f64 || o.max_abs != nf.h as f64) {
                verdict = Verdict::Fail;
            }
            let slack = (o.min_abs - o.bound as f64) / nf.h as f64;
            report.record(verdict, slack, || {
                format!("p={p} d={} u={} H={} h={} a={a} b={b} {kind:?}", chi.order(), nf.u, nf.big_h, nf.h)
            });
        }
    }
}

pub fn sweep_shifted_sum(config: &GridConfig) -> Result<LemmaReport> {
    let p_top = config
        .shifted_unit_p_max
        .max(config.shifted_quadratic_p_max)
        .max(config.shifted_general_p_max);
    let primes: Vec<u64> = primes_up_to(p_top).into_iter().filter(|&p| p >= 5).collect();
    ordered_sweep(Lemma::ShiftedSum, &primes, |&p, report| {
        let mut quadratic: Option<Character> = None;
        let q = prime_nonresidues(p, 2, 2, DEFAULT_SEARCH_CAP)?;
        let (q1, q2) = (q[0], q[1]);

        // u = 1: every window inside I* or J* has all terms equal.
        if p <= config.shifted_unit_p_max {
            let chi = quadratic.get_or_insert(Character::of_order(p, 2)?).clone();
            for h in 1..q1 {
                let nf = NonresidueFactorization::new(p, &[], q1 - 1, h)?;
                check_all_pairs(&chi, &nf, report, true);
            }
        }

        // u = q1 below the window, so j = 0 and a runs over multiples of q1.
        if p <= config.shifted_quadratic_p_max && q2 < p {
            let big_h = q2 - 1;
            let hs: Vec<u64> = (q1 + 1..=big_h).filter(|&h| big_h + q1 > h * q1).collect();
            if !hs.is_empty() {
                let chi = match &quadratic {
                    Some(c) => c.clone(),
                    None => Character::of_order(p, 2)?,
                };
                for h in hs {
                    let nf = NonresidueFactorization::new(p, &[q1], big_h, h)?;
                    check_all_pairs(&chi, &nf, report, false);
                }
            }
        }

        // u = q1 q2 at or above the window, so j = 2.
        if p <= config.shifted_general_p_max {
            for d in character_orders(p)? {
                let q = prime_nonresidues(p, d, 3, DEFAULT_SEARCH_CAP)?;
                let (q1, big_h) = (q[0], q[2] - 1);
                if q[2] >= p || q1 < 5 || big_h < 5 {
                    continue;
                }
                let chi = Character::of_order(p, d)?;
                for h in 1..=q1.min(big_h) {
                    let nf = NonresidueFactorization::new(p, &q[..2], big_h, h)?;
                    check_all_pairs(&chi, &nf, report, false);
                }
            }
        }
        Ok(())
    })
}

pub fn sweep_proposition(p_max: u64, n_max: u32, r_max: u32) -> Result<LemmaReport> {
    let primes: Vec<u64> = primes_up_to(p_max).into_iter().filter(|&p| p >= 3).collect();
    ordered_sweep(Lemma::Proposition, &primes, |&p, report| {
        let q = prime_nonresidues(p, 2, n_max as usize, DEFAULT_SEARCH_CAP)?;
        let instances: Vec<NonresidueFactorization> =
            (1..=n_max).flat_map(|n| admissible_windows(p, &q, n)).collect();
        if instances.is_empty() {
            return Ok(());
        }
        let chi = Character::of_order(p, 2)?;
        for nf in &instances {
            let verified = match verify_hypothesis(&chi, nf) {
                Ok(v) => v,
                Err(e) => {
                    report.hypothesis_failure(e.to_string());
                    continue;
                }
            };
            if nf.h <= 2 * nf.j as u64 {
                report.record(Verdict::Vacuous, f64::NAN, String::new);
                continue;
            }
            let profile = WindowProfile::new(&chi, nf.h)?;
            for r in 1..=r_max.min(9 * nf.h as u32) {
                let s = sandwich_report_with(&verified, &profile, r)?;
                let slack = s.slack().unwrap_or(f64::NAN);
                report.record(s.verdict(), slack, || {
                    format!("p={p} n={} u={} H={} h={} r={r}", nf.n, nf.u, nf.big_h, nf.h)
                });
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_names_round_trip() {
        for lemma in Lemma::ALL {
            assert_eq!(lemma.name().parse::<Lemma>().unwrap(), lemma);
            let json = serde_json::to_string(&lemma).unwrap();
            assert_eq!(json, format!("\"{}\"", lemma.name()));
        }
        assert!("nope".parse::<Lemma>().is_err());
    }

    #[test]
    fn trials_respect_precondition() {
        for t in disjointness_trials(7, 300, 100_000, 120) {
            assert!(is_prime(t.p));
            assert!(Rational::from(&t.x * 2u32) * t.big_h < t.p);
            assert!(t.x <= 120);
        }
    }

    #[test]
    fn small_sweeps_pass() {
        let config = GridConfig {
            stirling_r_max: 40,
            totient_k_max: 500,
            convexity_max: 24,
            s_upper_p_max: 30,
            s_upper_h_max: 4,
            s_upper_r_max: 3,
            disjoint_trials: 20,
            disjoint_p_max: 5_000,
            disjoint_x_cap: 40,
            shifted_unit_p_max: 300,
            shifted_quadratic_p_max: 2_000,
            shifted_general_p_max: 1_000,
            proposition_p_max: 2_000,
            proposition_n_max: 3,
            proposition_r_max: 3,
            ..GridConfig::desk()
        };
        let suite = run_suite(&Lemma::ALL, &config).unwrap();
        for report in suite.lemmas.values() {
            assert!(report.passed(), "{report:?}");
            assert!(report.passes > 0, "{report:?}");
        }
        assert!(suite.all_passed);
    }

    #[test]
    fn absorb_keeps_first_minimum() {
        let mut a = LemmaReport::new(Lemma::Stirling);
        a.record(Verdict::Pass, 0.5, || "a".into());
        let mut b = LemmaReport::new(Lemma::Stirling);
        b.record(Verdict::Pass, 0.5, || "b".into());
        b.record(Verdict::Vacuous, 0.0, || "v".into());
        a.absorb(b);
        assert_eq!(a.worst_instance.as_deref(), Some("a"));
        assert_eq!((a.instances_run, a.passes, a.vacuous_skips), (3, 2, 1));
    }
}
