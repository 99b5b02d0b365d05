//! Dirichlet characters modulo an odd prime.
//!
//! A character of order `d` is realized as `chi(g^k) = e^{2 pi i m k / (p-1)}`
//! for a primitive root `g` and an exponent `m` with `(p-1)/gcd(m, p-1) = d`.
//! Its kernel is the subgroup of `d`-th powers, so membership can be decided
//! with one modular exponentiation and no discrete logarithm; full character
//! values need an index table and are limited to `p <= DLOG_TABLE_LIMIT`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use crate::arith::mod_pow;

use crate::arith::{divisors, factorize, gcd, is_prime};
use crate::error::{Error, Result};
use crate::sieve::PrimeRange;

/// Largest modulus for which a discrete-log table is built.
pub const DLOG_TABLE_LIMIT: u64 = 1_000_000;

/// Default upper limit on candidate primes in the nonresidue search.
pub const DEFAULT_SEARCH_CAP: u64 = 1_000_000;

/// Least primitive root modulo the prime `p`.
pub fn find_primitive_root(p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p == 2 {
        return Ok(1);
    }
    let factors = factorize(p - 1)?;
    Ok(least_primitive_root(p, &factors))
}

fn least_primitive_root(p: u64, factors: &[(u64, u32)]) -> u64 {
    (2..p)
        .find(|&g| factors.iter().all(|&(q, _)| mod_pow(g, (p - 1) / q, p) != 1))
        .expect("every prime has a primitive root")
}

/// Whether `q` lies in the kernel of the order-`d` characters mod `p`, that is
/// `q^{(p-1)/d} = 1 (mod p)`.
pub fn is_kernel(p: u64, d: u64, q: u64) -> Result<bool> {
    if p < 2 {
        return Err(Error::NotPrime(p));
    }
    if d == 0 || (p - 1) % d != 0 {
        return Err(Error::InvalidOrder { p, d });
    }
    if q % p == 0 {
        return Err(Error::Precondition(format!("{q} is divisible by the modulus {p}")));
    }
    Ok(mod_pow(q, (p - 1) / d, p) == 1)
}

/// The `count` smallest primes `q != p` outside the kernel of an order-`d`
/// character mod `p`, searching candidates up to `cap`.
pub fn prime_nonresidues(p: u64, d: u64, count: usize, cap: u64) -> Result<Vec<u64>> {
    if !is_prime(p) || p == 2 {
        return Err(Error::NotPrime(p));
    }
    if d < 2 || (p - 1) % d != 0 {
        return Err(Error::InvalidOrder { p, d });
    }
    let exponent = (p - 1) / d;
    let mut found = Vec::with_capacity(count);
    if count == 0 {
        return Ok(found);
    }
    for q in PrimeRange::new(2, cap) {
        if q != p && mod_pow(q, exponent, p) != 1 {
            found.push(q);
            if found.len() == count {
                return Ok(found);
            }
        }
    }
    Err(Error::SearchCap {
        p,
        d,
        cap,
        wanted: count,
        found,
    })
}

/// Character orders `d >= 2` dividing `p - 1`.
pub fn character_orders(p: u64) -> Result<Vec<u64>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p == 2 {
        return Ok(Vec::new());
    }
    Ok(divisors(&factorize(p - 1)?).into_iter().filter(|&d| d >= 2).collect())
}

/// An order-`d` character modulo `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharacterSpec {
    p: u64,
    d: u64,
    generator: u64,
    exponent: u64,
}

impl CharacterSpec {
    /// The character `g^k -> e^{2 pi i k / d}` for the least primitive root `g`.
    pub fn new(p: u64, d: u64) -> Result<Self> {
        if d < 2 || p < 3 || (p - 1) % d != 0 {
            return Err(Error::InvalidOrder { p, d });
        }
        let generator = find_primitive_root(p)?;
        Ok(CharacterSpec {
            p,
            d,
            generator,
            exponent: (p - 1) / d,
        })
    }

    /// The character `g^k -> e^{2 pi i m k / (p-1)}`; its order is derived from `m`.
    pub fn with_exponent(p: u64, m: u64) -> Result<Self> {
        let generator = find_primitive_root(p)?;
        if p < 3 {
            return Err(Error::InvalidOrder { p, d: 1 });
        }
        let exponent = m % (p - 1);
        let d = (p - 1) / gcd(exponent, p - 1);
        if d < 2 {
            return Err(Error::Precondition(format!(
                "exponent {m} gives the principal character mod {p}"
            )));
        }
        Ok(CharacterSpec {
            p,
            d,
            generator,
            exponent,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn order(&self) -> u64 {
        self.d
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }
}

/// `chi(a)`: zero on multiples of `p`, otherwise `e^{2 pi i t / d}` stored as `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CharacterValue {
    Zero,
    Root(u64),
}

impl CharacterValue {
    pub fn is_one(self) -> bool {
        self == CharacterValue::Root(0)
    }
}

/// Discrete logarithms to base `g` for every unit mod `p`.
#[derive(Debug)]
pub struct DlogTable {
    p: u64,
    generator: u64,
    index: Vec<u32>,
}

impl DlogTable {
    pub fn new(p: u64, generator: u64) -> Result<Self> {
        if p > DLOG_TABLE_LIMIT {
            return Err(Error::TableLimit {
                p,
                limit: DLOG_TABLE_LIMIT,
            });
        }
        let mut index = vec![u32::MAX; p as usize];
        let mut x = 1u64;
        for k in 0..p - 1 {
            if index[x as usize] != u32::MAX {
                return Err(Error::Precondition(format!(
                    "{generator} is not a primitive root mod {p}"
                )));
            }
            index[x as usize] = k as u32;
            x = x * generator % p;
        }
        Ok(DlogTable {
            p,
            generator,
            index,
        })
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    /// `k` with `g^k = a (mod p)`, or `None` for multiples of `p`.
    pub fn log(&self, a: u64) -> Option<u64> {
        match self.index[(a % self.p) as usize] {
            u32::MAX => None,
            k => Some(k as u64),
        }
    }
}

/// A character together with its discrete-log table, for evaluation at
/// arbitrary arguments. Cheap to clone.
#[derive(Clone, Debug)]
pub struct Character {
    spec: CharacterSpec,
    table: Arc<DlogTable>,
}

impl Character {
    pub fn new(spec: CharacterSpec) -> Result<Self> {
        let table = DlogTable::new(spec.p, spec.generator)?;
        Ok(Character {
            spec,
            table: Arc::new(table),
        })
    }

    /// Builds the order-`d` character of [`CharacterSpec::new`] with its table.
    pub fn of_order(p: u64, d: u64) -> Result<Self> {
        if p > DLOG_TABLE_LIMIT {
            return Err(Error::TableLimit {
                p,
                limit: DLOG_TABLE_LIMIT,
            });
        }
        Character::new(CharacterSpec::new(p, d)?)
    }

    pub fn spec(&self) -> &CharacterSpec {
        &self.spec
    }

    pub fn p(&self) -> u64 {
        self.spec.p
    }

    pub fn order(&self) -> u64 {
        self.spec.d
    }

    /// `chi(a)` for any integer `a`, reduced mod `p`.
    pub fn value(&self, a: i64) -> CharacterValue {
        let p = self.spec.p;
        let reduced = a.rem_euclid(p as i64) as u64;
        match self.table.log(reduced) {
            None => CharacterValue::Zero,
            Some(k) => {
                let full = (self.spec.exponent as u128 * k as u128 % (p - 1) as u128) as u64;
                CharacterValue::Root(full / ((p - 1) / self.spec.d))
            }
        }
    }

    /// Values at `0, 1, ..., p-1`.
    pub fn values(&self) -> Vec<CharacterValue> {
        (0..self.spec.p as i64).map(|a| self.value(a)).collect()
    }
}

/// Convenience wrapper for [`Character::value`].
pub fn char_value(character: &Character, a: i64) -> CharacterValue {
    character.value(a)
}
