use proptest::prelude::*;
use qbound::arith::{gcd, is_prime, mod_pow};
use qbound::character::{character_orders, prime_nonresidues, Character, CharacterValue};
use qbound::constants::{compute_g, precise, BoundInput};
use qbound::lemmas::sums::moment_sum;
use qbound::rounding::Interval;
use qbound::scanner::{scan_records, Aggregate, ScanOptions, ScanRecord, ScanTask};
use qbound::sieve::primes_up_to;

fn odd_prime(max: u64) -> impl Strategy<Value = u64> {
    let primes: Vec<u64> = primes_up_to(max).into_iter().filter(|&p| p > 2).collect();
    proptest::sample::select(primes)
}

fn prime_and_order(max: u64) -> impl Strategy<Value = (u64, u64)> {
    odd_prime(max).prop_flat_map(|p| {
        let orders = character_orders(p).unwrap();
        (Just(p), proptest::sample::select(orders))
    })
}

fn exponent(v: CharacterValue) -> Option<u64> {
    match v {
        CharacterValue::Zero => None,
        CharacterValue::Root(t) => Some(t),
    }
}

/// `S(chi, h, r)` by direct summation over windows starting at `shift`,
/// with `f64` complex arithmetic.
fn naive_moment(chi: &Character, h: u64, r: u32, shift: u64) -> f64 {
    let p = chi.p();
    let d = chi.order() as f64;
    let mut total = 0.0;
    for i in 0..p {
        let x = (i + shift) % p;
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for m in 0..h {
            if let CharacterValue::Root(t) = chi.value((x + m) as i64) {
                let angle = std::f64::consts::TAU * t as f64 / d;
                re += angle.cos();
                im += angle.sin();
            }
        }
        total += (re * re + im * im).powi(r as i32);
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn character_is_multiplicative((p, d) in prime_and_order(2_000), a in 1i64..100_000, b in 1i64..100_000) {
        let chi = Character::of_order(p, d).unwrap();
        let ab = (a % p as i64) * (b % p as i64);
        match (exponent(chi.value(a)), exponent(chi.value(b))) {
            (Some(s), Some(t)) => prop_assert_eq!(exponent(chi.value(ab)), Some((s + t) % d)),
            _ => prop_assert_eq!(chi.value(ab), CharacterValue::Zero),
        }
    }

    #[test]
    fn character_has_exact_order((p, d) in prime_and_order(2_000), a in 1u64..2_000) {
        prop_assume!(a % p != 0);
        let chi = Character::of_order(p, d).unwrap();
        let t = exponent(chi.value(a as i64)).unwrap();
        prop_assert!(t < d);
        // chi(a) = 1 exactly when a^{(p-1)/d} = 1.
        prop_assert_eq!(t == 0, mod_pow(a, (p - 1) / d, p) == 1);
    }

    #[test]
    fn nonresidues_are_increasing_primes_outside_kernel((p, d) in prime_and_order(5_000), count in 0usize..5) {
        let q = prime_nonresidues(p, d, count, 1_000_000).unwrap();
        prop_assert_eq!(q.len(), count);
        prop_assert!(q.windows(2).all(|w| w[0] < w[1]));
        let mut expected = Vec::new();
        let mut c = 2;
        while expected.len() < count {
            if is_prime(c) && c != p && mod_pow(c, (p - 1) / d, p) != 1 {
                expected.push(c);
            }
            c += 1;
        }
        prop_assert_eq!(q, expected);
    }

    #[test]
    fn moment_matches_shifted_direct_sum((p, d) in prime_and_order(200), h in 1u64..8, r in 1u32..4, shift in 0u64..1_000) {
        prop_assume!(h < p);
        let chi = Character::of_order(p, d).unwrap();
        let stats = moment_sum(&chi, h, r).unwrap();
        let naive = naive_moment(&chi, h, r, shift);
        let tol = stats.error_bound + 1e-9 * naive.max(1.0);
        prop_assert!((stats.value - naive).abs() <= tol, "{} vs {}", stats.value, naive);
        prop_assert!(stats.value <= p as f64 * (h as f64).powi(2 * r as i32) * (1.0 + 1e-12));
        if d == 2 {
            prop_assert_eq!(stats.error_bound, 0.0);
            prop_assert_eq!(stats.value, naive.round());
        }
    }

    #[test]
    fn interval_arithmetic_encloses_f64(a in -1e6f64..1e6, b in 1e-3f64..1e6) {
        let (x, y) = (Interval::from_f64(a), Interval::from_f64(b));
        for (iv, v) in [(&x + &y, a + b), (&x - &y, a - b), (&x * &y, a * b), (&x / &y, a / b)] {
            let slack = v.abs() * 4.0 * f64::EPSILON;
            prop_assert!(iv.lo().to_f64() <= v + slack && iv.hi().to_f64() >= v - slack);
            prop_assert!(iv.width() <= v.abs() * 1e-50 + 1e-300);
        }
        let e = y.ln().exp();
        prop_assert!(*e.lo() <= b && *e.hi() >= b);
    }

    #[test]
    fn precise_g_encloses_fast_g(n in 1u32..9, e in 7.0f64..40.0) {
        let p = 10f64.powf(e);
        let fast = compute_g(&BoundInput::new(n, p).unwrap());
        if let (Some(g), Some(iv)) = (fast.g, precise::g(n, p)) {
            prop_assert!((g - iv.midpoint()).abs() <= 1e-10 * g);
        }
    }

    #[test]
    fn aggregate_merge_is_associative(records in arb_records(), cut1 in 0usize..30, cut2 in 0usize..30) {
        let (i, j) = (cut1.min(cut2).min(records.len()), cut1.max(cut2).min(records.len()));
        let part = |rs: &[ScanRecord]| {
            let mut a = Aggregate::new(3);
            for r in rs {
                a.add_prime(std::slice::from_ref(r));
            }
            a
        };
        let whole = part(&records);
        let (a, b, c) = (part(&records[..i]), part(&records[i..j]), part(&records[j..]));
        let mut left = a.clone();
        left.merge(&b);
        left.merge(&c);
        let mut bc = b.clone();
        bc.merge(&c);
        let mut right = a.clone();
        right.merge(&bc);
        let mut reversed = c.clone();
        reversed.merge(&b);
        reversed.merge(&a);
        prop_assert_eq!(&left, &whole);
        prop_assert_eq!(&right, &whole);
        prop_assert_eq!(&reversed, &whole);
    }

    #[test]
    fn split_ranges_merge_to_full_scan(lo in 3u64..2_000, len in 1u64..3_000, cut in 0u64..3_000) {
        let hi = lo + len;
        let mid = lo + cut.min(len - 1);
        let mut task = ScanTask::new(lo, hi, 3);
        task.shard_width = 97;
        let (_, full) = scan_records(&task, &ScanOptions::default()).unwrap();
        let mut left = task.clone();
        left.p_hi = mid;
        let mut right = task.clone();
        right.p_lo = mid + 1;
        let mut merged = scan_records(&left, &ScanOptions::default()).unwrap().1.aggregate;
        merged.merge(&scan_records(&right, &ScanOptions::default()).unwrap().1.aggregate);
        prop_assert_eq!(merged, full.aggregate);
    }
}

/// Records with distinct `(p, d)`, as a scan produces.
fn arb_records() -> impl Strategy<Value = Vec<ScanRecord>> {
    proptest::collection::vec(arb_record(), 0..30).prop_map(|mut rs| {
        for (i, r) in rs.iter_mut().enumerate() {
            r.p = 2 * i as u64 + 3;
        }
        rs.reverse();
        rs
    })
}

fn arb_record() -> impl Strategy<Value = ScanRecord> {
    (1u64..50, 2u64..5, proptest::collection::vec(1u64..40, 0..4), any::<bool>()).prop_map(
        |(p, d, mut q, ok)| {
            q.sort_unstable();
            q.dedup();
            q.truncate(3);
            let ratio = q.iter().map(|&x| x as f64 / 7.0).collect();
            let bound_ok = q.iter().map(|&x| ok || x < 20).collect();
            ScanRecord {
                p,
                d,
                cap_exhausted: q.len() < 3,
                q,
                ratio,
                bound_ok,
            }
        },
    )
}

/// Independent evaluation of the q-lists: a table of d-th powers for small
/// moduli, and a different exponentiation path for large ones.
#[test]
fn sampled_records_match_naive_evaluator() {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let mut task = ScanTask::new(50_000, 100_000, 3);
    task.order_policy = qbound::scanner::OrderPolicy::AllDivisorsUpTo(12);
    let (records, _) = scan_records(&task, &ScanOptions::default()).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for r in records.choose_multiple(&mut rng, 100) {
        let (p, d) = (r.p, r.d);
        // Image of x -> x^d by repeated multiplication.
        let mut is_power = vec![false; p as usize];
        for x in 1..p {
            let mut y = 1u64;
            for _ in 0..d {
                y = y * x % p;
            }
            is_power[y as usize] = true;
        }
        let naive: Vec<u64> = (2..)
            .filter(|&q| is_prime(q) && q != p && !is_power[(q % p) as usize])
            .take(3)
            .collect();
        assert_eq!(r.q, naive, "p={p} d={d}");
    }

    let big = 1_000_000_007u64;
    let q = prime_nonresidues(big, 2, 3, 1_000).unwrap();
    for &c in &q {
        // Euler's criterion by repeated squaring of u128 values.
        let (mut base, mut e, mut acc) = (c as u128, (big - 1) / 2, 1u128);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % big as u128;
            }
            base = base * base % big as u128;
            e >>= 1;
        }
        assert_eq!(acc, big as u128 - 1);
    }
    assert_eq!(gcd(q[0], big), 1);
}
