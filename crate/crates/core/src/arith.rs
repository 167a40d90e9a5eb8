//! Integer helpers: primes, p-adic valuation, gcd.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A prime number, the characteristic of the ground field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u32) -> Result<Self> {
        if is_prime(p as u64) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p as u64))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `p^k`, panicking on overflow.
    pub fn pow(self, k: u32) -> usize {
        (self.0 as usize)
            .checked_pow(k)
            .expect("prime power overflows usize")
    }

    pub fn divides(self, n: usize) -> bool {
        n.is_multiple_of(self.0 as usize)
    }
}

impl TryFrom<u32> for Prime {
    type Error = Error;
    fn try_from(p: u32) -> Result<Self> {
        Prime::new(p)
    }
}

impl From<Prime> for u32 {
    fn from(p: Prime) -> u32 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Prime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let p: u32 = s.trim().parse().map_err(|_| Error::Unknown {
            kind: "prime",
            input: s.to_string(),
        })?;
        Prime::new(p)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Largest `k` with `p^k | n`. `n` must be nonzero.
pub fn valuation(n: usize, p: Prime) -> u32 {
    assert!(n > 0, "valuation of zero");
    let p = p.0 as usize;
    let mut n = n;
    let mut k = 0;
    while n.is_multiple_of(p) {
        n /= p;
        k += 1;
    }
    k
}

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Row `n` of Pascal's triangle reduced mod `p`.
pub fn binomial_row_mod(n: usize, p: Prime) -> Vec<u32> {
    let p = p.0 as u64;
    let mut row = vec![1u32];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(1);
        for w in row.windows(2) {
            next.push(((w[0] as u64 + w[1] as u64) % p) as u32);
        }
        next.push(1);
        row = next;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let ps: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(Prime::new(9).is_err());
        assert!(Prime::new(1).is_err());
        assert_eq!("7".parse::<Prime>().unwrap().get(), 7);
    }

    #[test]
    fn valuations() {
        let p5 = Prime::new(5).unwrap();
        assert_eq!(valuation(5, p5), 1);
        assert_eq!(valuation(1, p5), 0);
        assert_eq!(valuation(250, p5), 3);
        assert_eq!(valuation(96, Prime::new(2).unwrap()), 5);
    }

    #[test]
    fn binomial_rows() {
        // C(8, 3) = 56 = 2 mod 3
        let row = binomial_row_mod(8, Prime::new(3).unwrap());
        assert_eq!(row[3], 2);
        assert_eq!(
            binomial_row_mod(4, Prime::new(7).unwrap()),
            vec![1, 4, 6, 4, 1]
        );
    }
}
