//! Jordan types (partitions with multiplicities) and the group contexts
//! they are interpreted in.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, valuation, Prime};
use crate::error::{Error, Result};

/// Multiset of Jordan block sizes.
///
/// Only positive sizes with positive multiplicities are stored, so
/// `J_0 = 0` is implicit. The canonical text form lists sizes ascending
/// as `d^m`, comma separated, with `^1` omitted: `1^2,3`. The zero
/// module is written `0`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JordanType {
    blocks: BTreeMap<usize, usize>,
}

impl JordanType {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a type from a list of block sizes (repeats allowed).
    /// Zero sizes are dropped.
    pub fn from_sizes<I: IntoIterator<Item = usize>>(sizes: I) -> Self {
        let mut jt = Self::default();
        for d in sizes {
            jt.add_blocks(d, 1);
        }
        jt
    }

    /// Builds a type from `(size, multiplicity)` pairs.
    pub fn from_multiplicities<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Self {
        let mut jt = Self::default();
        for (d, m) in pairs {
            jt.add_blocks(d, m);
        }
        jt
    }

    pub fn add_blocks(&mut self, size: usize, mult: usize) {
        if size == 0 || mult == 0 {
            return;
        }
        *self.blocks.entry(size).or_insert(0) += mult;
    }

    /// Removes `mult` blocks of `size`; returns false (and leaves `self`
    /// untouched) if fewer are present.
    pub fn remove_blocks(&mut self, size: usize, mult: usize) -> bool {
        if mult == 0 {
            return true;
        }
        match self.blocks.get_mut(&size) {
            Some(m) if *m > mult => {
                *m -= mult;
                true
            }
            Some(m) if *m == mult => {
                self.blocks.remove(&size);
                true
            }
            _ => false,
        }
    }

    /// Number of blocks of size `m` (`r_m`). Size 0 always gives 0.
    pub fn r(&self, m: usize) -> usize {
        self.blocks.get(&m).copied().unwrap_or(0)
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|(d, m)| d * m).sum()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn max_size(&self) -> Option<usize> {
        self.blocks.keys().next_back().copied()
    }

    pub fn min_size(&self) -> Option<usize> {
        self.blocks.keys().next().copied()
    }

    /// `(size, multiplicity)` pairs, sizes ascending.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.blocks.iter().map(|(&d, &m)| (d, m))
    }

    /// Block sizes ascending, each repeated by its multiplicity.
    pub fn sizes(&self) -> Vec<usize> {
        self.iter()
            .flat_map(|(d, m)| std::iter::repeat_n(d, m))
            .collect()
    }

    /// `ν_p` of the gcd of the block sizes.
    pub fn alpha(&self, p: Prime) -> Result<u32> {
        let g = self.blocks.keys().fold(0, |g, &d| gcd(g, d));
        if g == 0 {
            return Err(Error::UndefinedAlpha);
        }
        Ok(valuation(g, p))
    }

    pub fn sum(&self, other: &JordanType) -> JordanType {
        let mut out = self.clone();
        for (d, m) in other.iter() {
            out.add_blocks(d, m);
        }
        out
    }

    /// Pointwise difference; `other` must be a sub-multiset of `self`.
    pub fn diff(&self, other: &JordanType) -> Result<JordanType> {
        let mut out = self.clone();
        for (d, m) in other.iter() {
            if !out.remove_blocks(d, m) {
                return Err(Error::NotSubMultiset {
                    sup: self.to_string(),
                    sub: other.to_string(),
                });
            }
        }
        Ok(out)
    }

    pub fn contains(&self, other: &JordanType) -> bool {
        other.iter().all(|(d, m)| self.r(d) >= m)
    }

    /// Multiplies every multiplicity by `k`.
    pub fn scale(&self, k: usize) -> JordanType {
        JordanType::from_multiplicities(self.iter().map(|(d, m)| (d, m * k)))
    }
}

/// Free-function aliases for the multiset operations.
pub fn r_m(jt: &JordanType, m: usize) -> usize {
    jt.r(m)
}

pub fn multiset_sum(a: &JordanType, b: &JordanType) -> JordanType {
    a.sum(b)
}

pub fn multiset_diff(a: &JordanType, b: &JordanType) -> Result<JordanType> {
    a.diff(b)
}

impl fmt::Display for JordanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return f.write_str("0");
        }
        for (i, (d, m)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if m == 1 {
                write!(f, "{d}")?;
            } else {
                write!(f, "{d}^{m}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for JordanType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Err(err("empty input"));
        }
        if trimmed == "0" {
            return Ok(JordanType::empty());
        }
        let mut jt = JordanType::empty();
        for part in trimmed.split(',') {
            let part = part.trim();
            let (d, m) = match part.split_once('^') {
                Some((d, m)) => (d.trim(), m.trim()),
                None => (part, "1"),
            };
            let d: usize = d.parse().map_err(|_| err("block size is not an integer"))?;
            let m: usize = m
                .parse()
                .map_err(|_| err("multiplicity is not an integer"))?;
            if d == 0 {
                return Err(err("block sizes must be positive"));
            }
            if m == 0 {
                return Err(err("multiplicities must be positive"));
            }
            jt.add_blocks(d, m);
        }
        Ok(jt)
    }
}

impl Serialize for JordanType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for JordanType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    SL,
    Sp,
    SO,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::SL => "SL",
            Family::Sp => "Sp",
            Family::SO => "SO",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sl" | "a" => Ok(Family::SL),
            "sp" | "c" => Ok(Family::Sp),
            "so" | "b" | "d" => Ok(Family::SO),
            _ => Err(Error::Unknown {
                kind: "group family",
                input: s.to_string(),
            }),
        }
    }
}

/// A classical group `SL(V)`, `Sp(V)` or `SO(V)` with `dim V = n` over a
/// field of characteristic `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupContext {
    family: Family,
    n: usize,
    p: Prime,
}

impl GroupContext {
    pub fn new(family: Family, n: usize, p: Prime) -> Result<Self> {
        if family != Family::SL && p.get() == 2 {
            return Err(Error::BadCharacteristic(p.get(), family.to_string()));
        }
        let bad = |msg: String| Err(Error::InvalidGroup(msg));
        match family {
            Family::SL if n < 2 => return bad(format!("SL needs n >= 2, got {n}")),
            Family::Sp if !n.is_multiple_of(2) => return bad(format!("Sp needs n even, got {n}")),
            Family::Sp if n < 4 => return bad(format!("Sp needs n >= 4, got {n}")),
            Family::SO if n < 5 => return bad(format!("SO needs n >= 5, got {n}")),
            _ => {}
        }
        Ok(GroupContext { family, n, p })
    }

    pub fn sl(n: usize, p: Prime) -> Result<Self> {
        Self::new(Family::SL, n, p)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> Prime {
        self.p
    }
}

impl fmt::Display for GroupContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}) in characteristic {}",
            self.family, self.n, self.p
        )
    }
}

/// Whether `jt` is the Jordan type of a nilpotent element of the Lie
/// algebra of `ctx`: always for SL; odd sizes paired for Sp; even sizes
/// paired for SO.
pub fn validate_partition_for_group(jt: &JordanType, ctx: &GroupContext) -> Result<bool> {
    if jt.total_dim() != ctx.n {
        return Err(Error::DimensionMismatch {
            expected: ctx.n,
            actual: jt.total_dim(),
        });
    }
    let paired_parity = match ctx.family {
        Family::SL => return Ok(true),
        Family::Sp => 1,
        Family::SO => 0,
    };
    Ok(jt
        .iter()
        .filter(|(d, _)| d % 2 == paired_parity)
        .all(|(_, m)| m % 2 == 0))
}
