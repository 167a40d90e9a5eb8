//! Sweeps that compare the closed rules against the matrix oracle over
//! every partition in a range, plus explicit checks of the vector
//! identities the rules rest on.

use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{binomial_row_mod, Prime};
use crate::error::{Error, Result};
use crate::gfp::residue;
use crate::jordan::{validate_partition_for_group, Family, GroupContext, JordanType};
use crate::operator::{
    build_distinguished_vectors, build_nilpotent_on_V, gamma_vector, lift_to_gl, Element,
    ModuleSpec, Oracle, TensorAction,
};
use crate::theorem::{unipotent_nilpotent_agree_on_psl, PairCache, Pipeline};

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "JORDANBLOCKS_THREADS";

/// All partitions of `n` in reverse lexicographic order, parts descending
/// (`[4], [3, 1], [2, 2], [2, 1, 1], [1, 1, 1, 1]`).
#[derive(Debug, Clone)]
pub struct Partitions {
    current: Option<Vec<usize>>,
}

impl Iterator for Partitions {
    type Item = JordanType;

    fn next(&mut self) -> Option<JordanType> {
        let parts = self.current.take()?;
        let out = JordanType::from_sizes(parts.iter().copied());
        // rightmost part > 1
        if let Some(k) = parts.iter().rposition(|&x| x > 1) {
            let mut next = parts[..k].to_vec();
            let head = parts[k] - 1;
            let mut rest = parts[k + 1..].iter().sum::<usize>() + 1;
            next.push(head);
            while rest > 0 {
                let take = rest.min(head);
                next.push(take);
                rest -= take;
            }
            self.current = Some(next);
        }
        Some(out)
    }
}

pub fn enumerate_partitions(n: usize) -> Partitions {
    Partitions {
        current: (n >= 1).then(|| vec![n]),
    }
}

/// A deliberate corruption of the closed rules, for checking that sweeps
/// detect wrong rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Apply every rule as if `α = 0`.
    IgnoreAlpha,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    /// Smallest `n` considered; contexts below a family's bound are skipped.
    pub min_n: usize,
    pub max_n: usize,
    pub primes: Vec<Prime>,
    pub families: Vec<Family>,
    /// Modules compared; ones not defined for a family are skipped.
    pub modules: Vec<ModuleSpec>,
    pub fail_fast: bool,
    /// Also compare oracle types of `u` and `e` (SL entries only).
    pub unipotent_checks: bool,
    pub mutation: Option<Mutation>,
    /// Worker threads; `None` reads `JORDANBLOCKS_THREADS`, else all cores.
    pub threads: Option<usize>,
}

impl SweepConfig {
    pub fn new(
        max_n: usize,
        primes: &[u32],
        families: &[Family],
        modules: &[ModuleSpec],
    ) -> Result<Self> {
        let cfg = SweepConfig {
            min_n: 2,
            max_n,
            primes: primes
                .iter()
                .map(|&p| Prime::new(p))
                .collect::<Result<_>>()?,
            families: families.to_vec(),
            modules: modules.to_vec(),
            fail_fast: false,
            unipotent_checks: false,
            mutation: None,
            threads: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_n < 2 {
            return Err(Error::InvalidGroup(format!(
                "max_n must be >= 2, got {}",
                self.max_n
            )));
        }
        let classical = self.families.iter().any(|f| *f != Family::SL);
        if let Some(p) = self
            .primes
            .iter()
            .find(|p| p.get() == 2)
            .filter(|_| classical)
        {
            return Err(Error::BadCharacteristic(p.get(), "Sp/SO sweeps".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// Closed rules (expected) against the oracle (actual).
    Theorem,
    /// Oracle type of `e` (expected) against that of `u` (actual); on
    /// `psl` a mismatch is only reported when it contradicts the
    /// `p^{α+1} | n` criterion.
    UnipotentAgreement,
    /// The oracle or the rules returned an error.
    OracleFailure,
}

/// One disagreement. `partition`, `family`, `n`, `p`, `module` and `check`
/// determine the whole computation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub family: Family,
    pub n: usize,
    pub p: Prime,
    pub partition: JordanType,
    pub module: ModuleSpec,
    pub check: CheckKind,
    pub expected: String,
    pub actual: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation: Option<Mutation>,
}

impl DiscrepancyReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// Re-runs the check from the report's fields.
    pub fn reproduce(&self) -> Result<Option<DiscrepancyReport>> {
        let ctx = GroupContext::new(self.family, self.n, self.p)?;
        let cache = PairCache::new();
        let item = Item {
            ctx,
            partition: self.partition.clone(),
        };
        let cfg = SweepConfig {
            min_n: self.n,
            max_n: self.n,
            primes: vec![self.p],
            families: vec![self.family],
            modules: vec![self.module],
            fail_fast: false,
            unipotent_checks: self.check == CheckKind::UnipotentAgreement,
            mutation: self.mutation,
            threads: Some(1),
        };
        Ok(check_item(&item, &cfg, &cache)
            .into_iter()
            .find(|r| r.module == self.module && r.check == self.check))
    }
}

#[derive(Debug, Clone)]
struct Item {
    ctx: GroupContext,
    partition: JordanType,
}

fn work_items(cfg: &SweepConfig) -> Vec<Item> {
    let mut items = Vec::new();
    for &family in &cfg.families {
        for n in cfg.min_n..=cfg.max_n {
            for &p in &cfg.primes {
                let Ok(ctx) = GroupContext::new(family, n, p) else {
                    continue;
                };
                for partition in enumerate_partitions(n) {
                    // admissibility filtering lives here, not in the enumerator
                    if validate_partition_for_group(&partition, &ctx) == Ok(true) {
                        items.push(Item { ctx, partition });
                    }
                }
            }
        }
    }
    items
}

fn check_item(item: &Item, cfg: &SweepConfig, cache: &PairCache) -> Vec<DiscrepancyReport> {
    let ctx = &item.ctx;
    let report = |module: ModuleSpec, check: CheckKind, expected: String, actual: String| {
        DiscrepancyReport {
            family: ctx.family(),
            n: ctx.n(),
            p: ctx.p(),
            partition: item.partition.clone(),
            module,
            check,
            expected,
            actual,
            mutation: cfg.mutation,
        }
    };
    let failure = |module: ModuleSpec, what: &str, e: &Error| {
        report(
            module,
            CheckKind::OracleFailure,
            format!("no error from {what}"),
            e.to_string(),
        )
    };
    let mut out = Vec::new();
    let nil = match Oracle::new(Element::Nilpotent, &item.partition, ctx) {
        Ok(o) => o,
        Err(e) => {
            out.push(failure(ModuleSpec::NaturalV, "oracle", &e));
            return out;
        }
    };
    let mut pipeline = Pipeline::new(cache);
    if cfg.mutation == Some(Mutation::IgnoreAlpha) {
        pipeline = pipeline.with_alpha_override(0);
    }
    for &module in &cfg.modules {
        if module.check_compatible(ctx).is_err() {
            continue;
        }
        let rules = pipeline.jordan_type(&item.partition, ctx, module);
        let oracle = nil.jordan_type(module);
        match (rules, oracle) {
            (Ok(r), Ok(o)) if r == o => {}
            (Ok(r), Ok(o)) => out.push(report(
                module,
                CheckKind::Theorem,
                r.to_string(),
                o.to_string(),
            )),
            (Err(e), _) => out.push(failure(module, "rules", &e)),
            (_, Err(e)) => out.push(failure(module, "oracle", &e)),
        }
    }
    if cfg.unipotent_checks && ctx.family() == Family::SL {
        out.extend(unipotent_checks(item, &nil, cfg.mutation));
    }
    out
}

fn unipotent_checks(
    item: &Item,
    nil: &Oracle,
    mutation: Option<Mutation>,
) -> Vec<DiscrepancyReport> {
    let ctx = &item.ctx;
    let (n, p) = (ctx.n(), ctx.p());
    let mut out = Vec::new();
    let report = |module: ModuleSpec, check: CheckKind, expected: String, actual: String| {
        DiscrepancyReport {
            family: ctx.family(),
            n,
            p,
            partition: item.partition.clone(),
            module,
            check,
            expected,
            actual,
            mutation,
        }
    };
    let uni = match Oracle::new(Element::Unipotent, &item.partition, ctx) {
        Ok(o) => o,
        Err(e) => {
            out.push(report(
                ModuleSpec::NaturalV,
                CheckKind::OracleFailure,
                "no error from unipotent oracle".into(),
                e.to_string(),
            ));
            return out;
        }
    };
    let mut modules = vec![ModuleSpec::TensorVVdual, ModuleSpec::SL];
    if p.get() > 2 {
        modules.extend([ModuleSpec::Wedge2, ModuleSpec::Sym2]);
    }
    if p.divides(n) {
        modules.push(ModuleSpec::PSL);
    }
    for module in modules {
        let (e, u) = match (nil.jordan_type(module), uni.jordan_type(module)) {
            (Ok(e), Ok(u)) => (e, u),
            (Err(err), _) | (_, Err(err)) => {
                out.push(report(
                    module,
                    CheckKind::OracleFailure,
                    "no error from oracle".into(),
                    err.to_string(),
                ));
                continue;
            }
        };
        let should_agree = if module == ModuleSpec::PSL {
            unipotent_nilpotent_agree_on_psl(&item.partition, p, n).unwrap_or(true)
        } else {
            true
        };
        if (e == u) != should_agree {
            let expected = if should_agree {
                e.to_string()
            } else {
                format!("different from {e}")
            };
            out.push(report(
                module,
                CheckKind::UnipotentAgreement,
                expected,
                u.to_string(),
            ));
        }
    }
    out
}

fn thread_count(cfg: &SweepConfig) -> Option<usize> {
    cfg.threads.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .filter(|&t| t > 0)
    })
}

/// Runs the sweep and returns every discrepancy, sorted. Empty means the
/// closed rules reproduced the oracle on every input.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<DiscrepancyReport>> {
    cfg.validate()?;
    let items = work_items(cfg);
    let cache = PairCache::global();
    let stop = AtomicBool::new(false);
    let run = || -> Vec<DiscrepancyReport> {
        items
            .par_iter()
            .flat_map_iter(|item| {
                if cfg.fail_fast && stop.load(Ordering::Relaxed) {
                    return Vec::new();
                }
                let found = check_item(item, cfg, cache);
                if !found.is_empty() {
                    stop.store(true, Ordering::Relaxed);
                }
                found
            })
            .collect()
    };
    let mut reports = match thread_count(cfg) {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidGroup(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    reports.sort();
    Ok(reports)
}

/// Number of work items (admissible partition/context pairs) in a sweep.
pub fn sweep_size(cfg: &SweepConfig) -> usize {
    work_items(cfg).len()
}

/// Largest `n` for which lemma checks build dense `n² x n²` matrices.
pub const DENSE_LEMMA_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl LemmaCheck {
    fn new(name: &'static str) -> Self {
        LemmaCheck {
            name,
            cases: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub p: Prime,
    pub beta_max: u32,
    pub n_max: usize,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(LemmaCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const BINOMIAL_CONGRUENCE: &str = "binomial congruence";
pub const TENSOR_POWER_COEFFICIENTS: &str = "tensor power coefficients";
pub const DELTA_PRIME_ANNIHILATED: &str = "delta-prime annihilated";
pub const DELTA_MAPS_TO_GAMMA: &str = "delta maps to gamma";
pub const SMALLEST_BLOCK: &str = "smallest block is p^alpha";
pub const KERNEL_CONTAINMENT: &str = "kernel containment";

/// Checks the vector identities behind the closed rules by explicit
/// arithmetic:
///
/// * `C(p^β - 1, t) ≡ (-1)^t (mod p)` for `β <= beta_max`;
/// * the binomial expansion of `e^k (v_i ⊗ v_j^*)` for regular `e`;
/// * `e^{p^β} δ'_β = 0` and `e^{p^β - 1} δ_β = γ`, for regular `e` on every
///   `n <= n_max` divisible by `p^β`, and for every partition of
///   `n <= min(n_max, DENSE_LEMMA_LIMIT)` whose blocks are divisible by `p^β`;
/// * the smallest block of `e` on `gl(V)` is `p^α`, and
///   `Ker e_0^{p^α - 1} ⊆ Ker φ` while `Ker e_0^{p^α} ⊄ Ker φ`, for every
///   partition of `n <= min(n_max, DENSE_LEMMA_LIMIT)`.
pub fn check_lemma_identities(p: Prime, beta_max: u32, n_max: usize) -> LemmaReport {
    let pm = p.get();
    let mut binom = LemmaCheck::new(BINOMIAL_CONGRUENCE);
    for beta in 0..=beta_max {
        let top = p.pow(beta) - 1;
        let row = binomial_row_mod(top, p);
        for (t, &c) in row.iter().enumerate() {
            let sign = if t % 2 == 0 { 1 } else { pm - 1 };
            binom.record(c == sign % pm, || format!("C({top}, {t}) = {c} mod {pm}"));
        }
    }

    let mut coeffs = LemmaCheck::new(TENSOR_POWER_COEFFICIENTS);
    for n in 1..=n_max.min(2 * DENSE_LEMMA_LIMIT) {
        let act = TensorAction::new(&JordanType::from_sizes([n]), p);
        for i in 1..=n {
            for j in 1..=n {
                let mut x = vec![0u32; n * n];
                x[(i - 1) * n + j - 1] = 1;
                for k in 0..=n {
                    let row = binomial_row_mod(k, p);
                    let mut expect = vec![0i64; n * n];
                    for (t, &c) in row.iter().enumerate() {
                        if t < i && j + k - t <= n {
                            let sign = if (k + t) % 2 == 0 { 1 } else { -1 };
                            expect[(i - t - 1) * n + j + k - t - 1] += sign * c as i64;
                        }
                    }
                    let expect: Vec<u32> = expect.iter().map(|&v| residue(v, p)).collect();
                    coeffs.record(x == expect, || format!("n={n} k={k} i={i} j={j}"));
                    x = act.apply(&x);
                }
            }
        }
    }

    let mut zero = LemmaCheck::new(DELTA_PRIME_ANNIHILATED);
    let mut gamma = LemmaCheck::new(DELTA_MAPS_TO_GAMMA);
    let dense_n = n_max.min(DENSE_LEMMA_LIMIT);
    for beta in 0..=beta_max {
        let q = p.pow(beta);
        let mut inputs: Vec<JordanType> = (1..=n_max / q)
            .map(|k| JordanType::from_sizes([k * q]))
            .collect();
        for n in 1..=dense_n {
            inputs.extend(
                enumerate_partitions(n)
                    .filter(|jt| jt.num_blocks() > 1 && jt.iter().all(|(d, _)| d % q == 0)),
            );
        }
        for jt in inputs {
            let dv = build_distinguished_vectors(&jt, p, beta).expect("divisibility checked");
            let act = TensorAction::new(&jt, p);
            let z = act.apply_pow(&dv.delta_prime, q);
            zero.record(z.iter().all(|&x| x == 0), || format!("{jt}, beta={beta}"));
            let g = act.apply_pow(&dv.delta, q - 1);
            gamma.record(g == dv.gamma, || format!("{jt}, beta={beta}"));
        }
    }

    let mut smallest = LemmaCheck::new(SMALLEST_BLOCK);
    let mut kernels = LemmaCheck::new(KERNEL_CONTAINMENT);
    for n in 1..=dense_n {
        let phi = gamma_vector(n);
        for jt in enumerate_partitions(n) {
            let alpha = jt.alpha(p).expect("nonempty");
            let q = p.pow(alpha);
            let gl = build_nilpotent_on_V(&jt, p)
                .and_then(|e| lift_to_gl(&e))
                .expect("operator builds");
            let ty = gl.jordan_type().expect("gl action is nilpotent");
            smallest.record(ty.min_size() == Some(q), || format!("{jt}: gl type {ty}"));
            let below = gl.matrix().pow(q as u32 - 1).expect("square");
            let at = gl.matrix().pow(q as u32).expect("square");
            // Ker A ⊆ Ker φ  iff  φ lies in the row space of A
            let ok = below.row_space_contains(&phi) && !at.row_space_contains(&phi);
            kernels.record(ok, || format!("{jt} (alpha = {alpha})"));
        }
    }

    LemmaReport {
        p,
        beta_max,
        n_max,
        checks: vec![binom, coeffs, zero, gamma, smallest, kernels],
    }
}

pub fn verify_lemma_identities(p: Prime, beta_max: u32, n_max: usize) -> bool {
    check_lemma_identities(p, beta_max, n_max).passed()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(p: u32) -> Prime {
        Prime::new(p).unwrap()
    }

    #[test]
    fn partition_counts_and_order() {
        let two: Vec<String> = enumerate_partitions(2).map(|j| j.to_string()).collect();
        assert_eq!(two, ["2", "1^2"]);
        let four: Vec<String> = enumerate_partitions(4).map(|j| j.to_string()).collect();
        assert_eq!(four, ["4", "1,3", "2^2", "1^2,2", "1^4"]);
        assert_eq!(enumerate_partitions(5).count(), 7);
        let counts: Vec<usize> = (1..=12).map(|n| enumerate_partitions(n).count()).collect();
        assert_eq!(counts, [1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77]);
        assert_eq!(enumerate_partitions(0).count(), 0);
    }

    #[test]
    fn partitions_are_distinct_and_complete() {
        for n in 1..=10 {
            let all: Vec<JordanType> = enumerate_partitions(n).collect();
            let set: std::collections::BTreeSet<_> = all.iter().cloned().collect();
            assert_eq!(set.len(), all.len());
            assert!(all.iter().all(|j| j.total_dim() == n));
        }
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::new(1, &[2], &[Family::SL], &[ModuleSpec::SL]).is_err());
        assert!(SweepConfig::new(5, &[4], &[Family::SL], &[ModuleSpec::SL]).is_err());
        assert!(SweepConfig::new(5, &[2, 3], &[Family::Sp], &[ModuleSpec::LOmega2Sp]).is_err());
        assert!(SweepConfig::new(5, &[3], &[Family::Sp], &[ModuleSpec::LOmega2Sp]).is_ok());
    }

    #[test]
    fn small_sweep_is_clean() {
        let mut cfg = SweepConfig::new(
            5,
            &[2, 3, 5],
            &[Family::SL],
            &[ModuleSpec::SL, ModuleSpec::PSL],
        )
        .unwrap();
        cfg.threads = Some(2);
        assert_eq!(run_sweep(&cfg).unwrap(), vec![]);
    }

    #[test]
    fn mutation_is_detected_and_reproducible() {
        let mut cfg = SweepConfig::new(4, &[2], &[Family::SL], &[ModuleSpec::PSL]).unwrap();
        cfg.mutation = Some(Mutation::IgnoreAlpha);
        let reports = run_sweep(&cfg).unwrap();
        assert!(!reports.is_empty());
        for r in &reports {
            assert_eq!(r.reproduce().unwrap().as_ref(), Some(r));
        }
        let line = reports[0].to_json_line();
        let back: DiscrepancyReport = serde_json::from_str(&line).unwrap();
        assert_eq!(back, reports[0]);
    }

    #[test]
    fn fail_fast_stops_early() {
        let mut cfg = SweepConfig::new(6, &[2, 3], &[Family::SL], &[ModuleSpec::SL]).unwrap();
        cfg.mutation = Some(Mutation::IgnoreAlpha);
        cfg.threads = Some(1);
        let all = run_sweep(&cfg).unwrap().len();
        cfg.fail_fast = true;
        let first = run_sweep(&cfg).unwrap().len();
        assert!(first >= 1 && first < all, "{first} vs {all}");
    }

    #[test]
    fn lemma_identities_small() {
        assert!(verify_lemma_identities(p(3), 2, 9));
        assert!(verify_lemma_identities(p(2), 3, 8));
        let report = check_lemma_identities(p(3), 2, 9);
        assert!(report.checks.iter().all(|c| c.cases > 0), "{report:?}");
    }

    #[test]
    fn binomial_congruence_example() {
        // p^β - 1 = 8, t = 3: C(8, 3) = 56 ≡ 2 ≡ (-1)^3 (mod 3)
        assert_eq!(binomial_row_mod(8, p(3))[3], 2);
    }
}
