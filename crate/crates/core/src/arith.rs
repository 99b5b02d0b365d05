//! Word-sized modular arithmetic, primality and factorization.
//!
//! Products go through `u128`, so every modulus below `2^64` is supported.

use crate::error::{Error, Result};

/// Trial division bound used before switching to Pollard's rho.
pub const TRIAL_DIVISION_LIMIT: u64 = 10_000_000;

/// Iteration budget for a single Pollard rho attempt.
const RHO_BUDGET: u64 = 1 << 22;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Returns `a^e mod m` in `[0, m)`.
///
/// `m` must be at least 2; `a` need not be reduced.
pub fn mod_pow(a: u64, mut e: u64, m: u64) -> u64 {
    assert!(m >= 2, "modulus must be at least 2");
    let mut base = a % m;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &q in &WITNESSES {
        if n % q == 0 {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
///
/// Trial division runs up to [`TRIAL_DIVISION_LIMIT`]; a composite cofactor
/// left over after that is split with Brent's variant of Pollard's rho. Gives
/// up with [`Error::Factorization`] when rho exhausts its budget.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>> {
    if n == 0 {
        return Err(Error::Domain("cannot factor 0".into()));
    }
    let mut primes = Vec::new();
    let mut rest = n;
    let mut push = |q: u64, rest: &mut u64| {
        let mut e = 0;
        while *rest % q == 0 {
            *rest /= q;
            e += 1;
        }
        if e > 0 {
            primes.push((q, e));
        }
    };
    push(2, &mut rest);
    let mut q = 3u64;
    let mut cofactor_prime = is_prime(rest);
    while !cofactor_prime && q <= TRIAL_DIVISION_LIMIT && q.saturating_mul(q) <= rest {
        if rest % q == 0 {
            push(q, &mut rest);
            cofactor_prime = is_prime(rest);
        }
        q += 2;
    }
    let mut factors: Vec<(u64, u32)> = primes;
    if rest > 1 {
        let mut stack = vec![rest];
        let mut leftovers = Vec::new();
        while let Some(m) = stack.pop() {
            if is_prime(m) {
                leftovers.push(m);
            } else {
                let f = pollard_brent(m).ok_or(Error::Factorization(n))?;
                stack.push(f);
                stack.push(m / f);
            }
        }
        for m in leftovers {
            match factors.iter_mut().find(|(p, _)| *p == m) {
                Some(entry) => entry.1 += 1,
                None => factors.push((m, 1)),
            }
        }
    }
    factors.sort_unstable();
    Ok(factors)
}

fn pollard_brent(n: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    for c in 1..64u64 {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
        let mut g = 1u64;
        let mut x = y;
        let mut ys = y;
        let mut steps = 0u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                let m = 128.min(r - k);
                for _ in 0..m {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += m;
            }
            r *= 2;
            steps += r;
            if steps > RHO_BUDGET {
                break;
            }
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g > 1 && g < n {
            return Some(g);
        }
    }
    None
}

/// All positive divisors of the number with the given factorization, sorted.
pub fn divisors(factors: &[(u64, u32)]) -> Vec<u64> {
    let mut divs = vec![1u64];
    for &(q, e) in factors {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= q;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

/// Euler's totient from a factorization.
pub fn totient(factors: &[(u64, u32)]) -> u64 {
    factors
        .iter()
        .map(|&(q, e)| (q - 1) * q.pow(e - 1))
        .product()
}

/// Totients of `0..=n` by a linear sieve; entry 0 is 0.
pub fn totient_table(n: usize) -> Vec<u64> {
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for i in 2..=n {
        if phi[i] == i as u64 {
            let mut k = i;
            while k <= n {
                phi[k] -= phi[k] / i as u64;
                k += i;
            }
        }
    }
    phi
}
