//! Prime generation: a cached table of small primes and a segmented sieve for
//! arbitrary ranges.

use std::sync::OnceLock;

/// Primes below this bound are served from a shared table.
pub const SMALL_PRIME_LIMIT: u64 = 1 << 16;

const SEGMENT_LEN: u64 = 1 << 15;

/// Plain sieve of Eratosthenes: all primes `<= limit`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut k = i * i;
            while k <= n {
                composite[k] = true;
                k += i;
            }
        }
    }
    primes
}

pub fn small_primes() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| primes_up_to(SMALL_PRIME_LIMIT - 1))
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

/// Iterator over the primes in `[lo, hi]`, in increasing order.
///
/// Primes below [`SMALL_PRIME_LIMIT`] come from the cached table; the rest of
/// the range is sieved one segment at a time, so memory stays bounded for wide
/// ranges.
pub struct PrimeRange {
    hi: u64,
    next_lo: u64,
    base: Vec<u64>,
    buffer: Vec<u64>,
    pos: usize,
}

impl PrimeRange {
    pub fn new(lo: u64, hi: u64) -> Self {
        // Keeps `hi + 1` representable.
        let hi = hi.min(u64::MAX - 1);
        let mut buffer = Vec::new();
        let mut next_lo = lo.max(2);
        if next_lo < SMALL_PRIME_LIMIT {
            let end = hi.min(SMALL_PRIME_LIMIT - 1);
            buffer.extend(
                small_primes()
                    .iter()
                    .copied()
                    .filter(|&q| q >= next_lo && q <= end),
            );
            next_lo = SMALL_PRIME_LIMIT;
        }
        let base = if hi >= SMALL_PRIME_LIMIT {
            let root = isqrt(hi);
            if root < SMALL_PRIME_LIMIT {
                small_primes().iter().copied().take_while(|&q| q <= root).collect()
            } else {
                primes_up_to(root)
            }
        } else {
            Vec::new()
        };
        PrimeRange {
            hi,
            next_lo,
            base,
            buffer,
            pos: 0,
        }
    }

    fn refill(&mut self) -> bool {
        while self.next_lo <= self.hi {
            let lo = self.next_lo;
            let hi = lo.saturating_add(SEGMENT_LEN - 1).min(self.hi);
            self.next_lo = hi + 1;
            let len = (hi - lo + 1) as usize;
            let mut composite = vec![false; len];
            for &q in &self.base {
                if q * q > hi {
                    break;
                }
                let start = (q * q).max(lo.div_ceil(q) * q);
                let mut k = start;
                while k <= hi {
                    composite[(k - lo) as usize] = true;
                    k += q;
                }
            }
            self.buffer.clear();
            self.pos = 0;
            self.buffer.extend(
                composite
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| !c)
                    .map(|(i, _)| lo + i as u64)
                    .filter(|&v| v >= 2),
            );
            if !self.buffer.is_empty() {
                return true;
            }
        }
        false
    }
}

impl Iterator for PrimeRange {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.pos >= self.buffer.len() && !self.refill() {
            return None;
        }
        let q = self.buffer[self.pos];
        self.pos += 1;
        Some(q)
    }
}
