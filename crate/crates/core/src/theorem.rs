//! Closed rules turning the Jordan type of `e` on `gl(V)` (or on `∧²V`,
//! `S²V`) into its Jordan type on `sl(V)`, `psl(V)`, `L(ϖ₂)` and `L(2ϖ₁)`.
//!
//! The rules never touch matrices. Base types on `V ⊗ V*`, `∧²V` and `S²V`
//! come from the direct-sum decomposition of `V` into Jordan blocks, with
//! the type on each `J_a ⊗ J_b`, `∧²J_d`, `S²J_d` computed once and cached.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use crate::arith::Prime;
use crate::error::{Error, Result};
use crate::gfp::{jordan_type_of_nilpotent, GFpMatrix};
use crate::jordan::{validate_partition_for_group, Family, GroupContext, JordanType};
use crate::operator::{build_nilpotent_on_V, lift_to_sym2, lift_to_wedge2, Isogeny, ModuleSpec};

/// `gl(V)` type to `sl(V)` type.
pub fn rule_sl(jt0: &JordanType, alpha: u32, p: Prime) -> Result<JordanType> {
    let mut out = jt0.clone();
    if alpha == 0 {
        if !out.remove_blocks(1, 1) {
            return Err(inconsistent(
                jt0,
                "sl rule with alpha = 0 needs a block of size 1",
            ));
        }
    } else {
        let q = p.pow(alpha);
        if !out.remove_blocks(q, 1) {
            return Err(inconsistent(
                jt0,
                &format!("sl rule needs a block of size {q}"),
            ));
        }
        out.add_blocks(q - 1, 1);
    }
    Ok(out)
}

/// `gl(V)` type to `psl(V) = L(ϖ₁ + ϖ_{n-1})` type.
pub fn rule_psl(jt0: &JordanType, alpha: u32, p: Prime, n: usize) -> Result<JordanType> {
    let mut out = jt0.clone();
    if !p.divides(n) {
        if alpha > 0 {
            return Err(inconsistent(jt0, "alpha > 0 forces p | n"));
        }
        if !out.remove_blocks(1, 1) {
            return Err(inconsistent(
                jt0,
                "psl rule with p not dividing n needs a block of size 1",
            ));
        }
    } else if alpha == 0 {
        if !out.remove_blocks(1, 2) {
            return Err(inconsistent(
                jt0,
                "psl rule with alpha = 0 needs two blocks of size 1",
            ));
        }
    } else {
        let q = p.pow(alpha);
        if !out.remove_blocks(q, 2) {
            return Err(inconsistent(
                jt0,
                &format!("psl rule needs two blocks of size {q}"),
            ));
        }
        out.add_blocks(q - 1, 2);
    }
    Ok(out)
}

fn inconsistent(jt0: &JordanType, why: &str) -> Error {
    Error::InconsistentInput(format!("{jt0}: {why}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Corollary {
    /// `L(ϖ₂)` for `Sp(V)` from the type on `∧²V`.
    SpOmega2,
    /// `L(2ϖ₁)` for `SO(V)` from the type on `S²V`.
    SO2Omega1,
}

/// The psl rules applied to the `∧²V` (Sp) or `S²V` (SO) type.
pub fn rule_corollary(
    jt_base: &JordanType,
    which: Corollary,
    alpha: u32,
    p: Prime,
    n: usize,
) -> Result<JordanType> {
    if p.get() == 2 {
        let group = match which {
            Corollary::SpOmega2 => "Sp",
            Corollary::SO2Omega1 => "SO",
        };
        return Err(Error::BadCharacteristic(2, group.into()));
    }
    rule_psl(jt_base, alpha, p, n)
}

/// Whether `u` and `e` with the same type on `V` have the same block sizes
/// on `psl(V)`: exactly when `p^{α+1} | n`.
pub fn unipotent_nilpotent_agree_on_psl(jt_on_v: &JordanType, p: Prime, n: usize) -> Result<bool> {
    if jt_on_v.total_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: jt_on_v.total_dim(),
        });
    }
    let alpha = jt_on_v.alpha(p)?;
    Ok(n.is_multiple_of(p.pow(alpha + 1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum PairKey {
    /// `J_a ⊗ J_b` with `a >= b`.
    Tensor(usize, usize),
    Wedge(usize),
    Sym(usize),
}

/// Shared memo of the types of `J_a ⊗ J_b`, `∧²J_d` and `S²J_d` keyed by
/// block sizes and `p`. Concurrent readers never block each other; two
/// workers racing on a missing key both compute it and the second insert
/// is a no-op.
#[derive(Debug, Default)]
pub struct PairCache {
    map: RwLock<HashMap<(PairKey, Prime), JordanType>>,
}

impl PairCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn global() -> &'static PairCache {
        static CACHE: OnceLock<PairCache> = OnceLock::new();
        CACHE.get_or_init(PairCache::new)
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get_or_compute(&self, key: PairKey, p: Prime) -> Result<JordanType> {
        if let Some(t) = self.map.read().unwrap().get(&(key, p)) {
            return Ok(t.clone());
        }
        let t = compute_pair(key, p)?;
        self.map
            .write()
            .unwrap()
            .entry((key, p))
            .or_insert_with(|| t.clone());
        Ok(t)
    }

    /// Type of `e` on `J_a ⊗ J_b`.
    pub fn tensor(&self, a: usize, b: usize, p: Prime) -> Result<JordanType> {
        self.get_or_compute(PairKey::Tensor(a.max(b), a.min(b)), p)
    }

    pub fn wedge(&self, d: usize, p: Prime) -> Result<JordanType> {
        self.get_or_compute(PairKey::Wedge(d), p)
    }

    pub fn sym(&self, d: usize, p: Prime) -> Result<JordanType> {
        self.get_or_compute(PairKey::Sym(d), p)
    }
}

fn compute_pair(key: PairKey, p: Prime) -> Result<JordanType> {
    let shift = |d: usize| GFpMatrix::from_fn(p, d, d, |i, j| i64::from(j == i + 1));
    match key {
        PairKey::Tensor(a, b) => {
            let x = shift(a).kron(&GFpMatrix::identity(p, b))?;
            let y = GFpMatrix::identity(p, a).kron(&shift(b))?;
            jordan_type_of_nilpotent(&x.add(&y)?)
        }
        PairKey::Wedge(1) => Ok(JordanType::empty()),
        PairKey::Wedge(d) => {
            lift_to_wedge2(&build_nilpotent_on_V(&JordanType::from_sizes([d]), p)?)?.jordan_type()
        }
        PairKey::Sym(d) => {
            lift_to_sym2(&build_nilpotent_on_V(&JordanType::from_sizes([d]), p)?)?.jordan_type()
        }
    }
}

/// Type on `V ⊗ V* = ⊕_{i,j} W_i ⊗ W_j`.
pub fn tensor_type(jt: &JordanType, p: Prime, cache: &PairCache) -> Result<JordanType> {
    let mut out = JordanType::empty();
    for (a, ma) in jt.iter() {
        for (b, mb) in jt.iter() {
            out = out.sum(&cache.tensor(a, b, p)?.scale(ma * mb));
        }
    }
    Ok(out)
}

/// Type on `∧²V` (or `S²V`) from `∧²W_i` (`S²W_i`) and `W_i ⊗ W_j`, `i < j`.
fn square_type(jt: &JordanType, p: Prime, cache: &PairCache, wedge: bool) -> Result<JordanType> {
    let blocks: Vec<(usize, usize)> = jt.iter().collect();
    let mut out = JordanType::empty();
    for (k, &(a, ma)) in blocks.iter().enumerate() {
        let single = if wedge {
            cache.wedge(a, p)?
        } else {
            cache.sym(a, p)?
        };
        out = out.sum(&single.scale(ma));
        out = out.sum(&cache.tensor(a, a, p)?.scale(ma * (ma - 1) / 2));
        for &(b, mb) in &blocks[k + 1..] {
            out = out.sum(&cache.tensor(a, b, p)?.scale(ma * mb));
        }
    }
    Ok(out)
}

pub fn wedge2_type(jt: &JordanType, p: Prime, cache: &PairCache) -> Result<JordanType> {
    square_type(jt, p, cache, true)
}

pub fn sym2_type(jt: &JordanType, p: Prime, cache: &PairCache) -> Result<JordanType> {
    square_type(jt, p, cache, false)
}

/// The closed-rule route from a Jordan type on `V` to the type on a module.
#[derive(Debug, Clone, Copy)]
pub struct Pipeline<'a> {
    cache: &'a PairCache,
    alpha_override: Option<u32>,
}

impl<'a> Pipeline<'a> {
    pub fn new(cache: &'a PairCache) -> Self {
        Pipeline {
            cache,
            alpha_override: None,
        }
    }

    /// Feeds a fixed `α` to every rule instead of the true one. Only useful
    /// for checking that a sweep notices wrong rules.
    pub fn with_alpha_override(mut self, alpha: u32) -> Self {
        self.alpha_override = Some(alpha);
        self
    }

    pub fn jordan_type(
        &self,
        jt: &JordanType,
        ctx: &GroupContext,
        module: ModuleSpec,
    ) -> Result<JordanType> {
        if !validate_partition_for_group(jt, ctx)? {
            return Err(Error::Inadmissible {
                partition: jt.to_string(),
                group: ctx.to_string(),
            });
        }
        module.check_compatible(ctx)?;
        let (p, n) = (ctx.p(), ctx.n());
        let alpha = match self.alpha_override {
            Some(a) => a,
            None => jt.alpha(p)?,
        };
        let gl = || tensor_type(jt, p, self.cache);
        match module {
            ModuleSpec::NaturalV => Ok(jt.clone()),
            ModuleSpec::TensorVVdual | ModuleSpec::TensorVV | ModuleSpec::GL => gl(),
            ModuleSpec::Wedge2 => wedge2_type(jt, p, self.cache),
            ModuleSpec::Sym2 => sym2_type(jt, p, self.cache),
            ModuleSpec::SL | ModuleSpec::Adjoint(Isogeny::SimplyConnected | Isogeny::Adjoint) => {
                rule_sl(&gl()?, alpha, p)
            }
            ModuleSpec::PSL => rule_psl(&gl()?, alpha, p, n),
            ModuleSpec::Adjoint(Isogeny::Intermediate) => {
                Ok(rule_psl(&gl()?, alpha, p, n)?.sum(&JordanType::from_sizes([1])))
            }
            ModuleSpec::LOmega2Sp => {
                debug_assert_eq!(ctx.family(), Family::Sp);
                let base = wedge2_type(jt, p, self.cache)?;
                rule_corollary(&base, Corollary::SpOmega2, alpha, p, n)
            }
            ModuleSpec::L2Omega1SO => {
                let base = sym2_type(jt, p, self.cache)?;
                rule_corollary(&base, Corollary::SO2Omega1, alpha, p, n)
            }
        }
    }
}

/// Jordan type on `module` by the closed rules, using the global pair cache.
pub fn full_pipeline(
    jt_on_v: &JordanType,
    ctx: &GroupContext,
    module: ModuleSpec,
) -> Result<JordanType> {
    Pipeline::new(PairCache::global()).jordan_type(jt_on_v, ctx, module)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(p: u32) -> Prime {
        Prime::new(p).unwrap()
    }

    fn jt(s: &str) -> JordanType {
        s.parse().unwrap()
    }

    #[test]
    fn sl_rules() {
        assert_eq!(rule_sl(&jt("3^3"), 1, p(3)).unwrap(), jt("2,3^2"));
        assert_eq!(rule_sl(&jt("1^9"), 0, p(3)).unwrap(), jt("1^8"));
        assert_eq!(rule_sl(&jt("2^8"), 1, p(2)).unwrap(), jt("1,2^7"));
        assert!(matches!(
            rule_sl(&jt("2^8"), 0, p(2)),
            Err(Error::InconsistentInput(_))
        ));
        assert!(rule_sl(&jt("3^3"), 1, p(2)).is_err());
    }

    #[test]
    fn psl_rules() {
        assert_eq!(rule_psl(&jt("5^5"), 1, p(5), 5).unwrap(), jt("4^2,5^3"));
        assert_eq!(rule_psl(&jt("1^2,2^2,3"), 0, p(3), 3).unwrap(), jt("2^2,3"));
        assert_eq!(rule_psl(&jt("1^16"), 0, p(2), 4).unwrap(), jt("1^14"));
        assert_eq!(rule_psl(&jt("1^9"), 0, p(2), 3).unwrap(), jt("1^8"));
        assert!(rule_psl(&jt("5"), 1, p(5), 5).is_err());
        assert!(rule_psl(&jt("1^4"), 1, p(2), 3).is_err());
    }

    #[test]
    fn smallest_prime_power_blocks() {
        // α = 1, p = 2 adds blocks of size p^α - 1 = 1, never size 0
        let out = rule_sl(&jt("2^4"), 1, p(2)).unwrap();
        assert_eq!(out, jt("1,2^3"));
        let out = rule_psl(&jt("2^4"), 1, p(2), 2).unwrap();
        assert_eq!(out, jt("1^2,2^2"));
        assert_eq!(out.r(0), 0);
    }

    #[test]
    fn corollary_rules() {
        assert_eq!(
            rule_corollary(&jt("1^6"), Corollary::SpOmega2, 0, p(3), 4).unwrap(),
            jt("1^5")
        );
        assert_eq!(
            rule_corollary(&jt("1^15"), Corollary::SpOmega2, 0, p(3), 6).unwrap(),
            jt("1^13")
        );
        assert!(matches!(
            rule_corollary(&jt("1^6"), Corollary::SpOmega2, 0, p(2), 4),
            Err(Error::BadCharacteristic(2, _))
        ));
    }

    #[test]
    fn agreement_predicate() {
        assert!(!unipotent_nilpotent_agree_on_psl(&jt("5"), p(5), 5).unwrap());
        assert!(unipotent_nilpotent_agree_on_psl(&jt("1^4"), p(2), 4).unwrap());
        assert!(unipotent_nilpotent_agree_on_psl(&jt("2^2"), p(2), 4).unwrap());
        assert!(unipotent_nilpotent_agree_on_psl(&jt("2"), p(2), 4).is_err());
    }

    #[test]
    fn pipeline_examples() {
        let sl5 = GroupContext::sl(5, p(5)).unwrap();
        assert_eq!(
            full_pipeline(&jt("1,4"), &sl5, ModuleSpec::PSL).unwrap(),
            jt("4^2,5^3")
        );
        assert_eq!(
            full_pipeline(&jt("1^3,2"), &sl5, ModuleSpec::PSL).unwrap(),
            jt("1^8,2^6,3")
        );
        let sl2 = GroupContext::sl(2, p(2)).unwrap();
        assert_eq!(
            full_pipeline(&jt("2"), &sl2, ModuleSpec::PSL).unwrap(),
            jt("1^2")
        );
    }

    #[test]
    fn cache_is_shared_and_symmetric() {
        let cache = PairCache::new();
        let a = cache.tensor(3, 5, p(3)).unwrap();
        let b = cache.tensor(5, 3, p(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(cache.len(), 1);
        assert_eq!(cache.wedge(1, p(3)).unwrap(), JordanType::empty());
    }

    #[test]
    fn large_p_tensor_pattern() {
        // for p >= a + b - 1: J_a ⊗ J_b = J_{a+b-1} ⊕ J_{a+b-3} ⊕ ... ⊕ J_{a-b+1}
        let cache = PairCache::new();
        for a in 1..=6 {
            for b in 1..=a {
                let expect = JordanType::from_sizes((0..b).map(|k| a + b - 1 - 2 * k));
                for prime in [11, 13] {
                    assert_eq!(cache.tensor(a, b, p(prime)).unwrap(), expect, "{a} {b}");
                }
            }
        }
    }
}
