//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use jordanblocks::harness::{check_lemma_identities, sweep_size};
use jordanblocks::operator::Oracle;
use jordanblocks::{
    enumerate_partitions, full_pipeline, oracle_type, oracle_type_for, run_sweep,
    validate_partition_for_group, Element, Family, GroupContext, JordanType, ModuleSpec, Prime,
    SweepConfig,
};
use rayon::prelude::*;

fn prime(p: u32) -> Prime {
    Prime::new(p).unwrap()
}

fn jt(s: &str) -> JordanType {
    s.parse().unwrap()
}

struct Outcome {
    passed: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(passed: bool, summary: impl Into<String>) -> Self {
        Outcome {
            passed,
            summary: summary.into(),
            details: Vec::new(),
        }
    }

    fn with_details(mut self, details: Vec<String>) -> Self {
        self.details = details;
        self
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

/// Reference rows (n, p, V, V ⊗ V*, psl) for every partition with p | n.
const TABLE: [(usize, u32, &str, &str, &str); 17] = [
    (2, 2, "2", "2^2", "1^2"),
    (2, 2, "1^2", "1^4", "1^2"),
    (3, 3, "3", "3^3", "2^2,3"),
    (3, 3, "1,2", "1^2,2^2,3", "2^2,3"),
    (3, 3, "1^3", "1^9", "1^7"),
    (4, 2, "4", "4^4", "3^2,4^2"),
    (4, 2, "1,3", "1^2,3^2,4^2", "3^2,4^2"),
    (4, 2, "2^2", "2^8", "1^2,2^6"),
    (4, 2, "1^2,2", "1^4,2^6", "1^2,2^6"),
    (4, 2, "1^4", "1^16", "1^14"),
    (5, 5, "5", "5^5", "4^2,5^3"),
    (5, 5, "1,4", "1^2,4^2,5^3", "4^2,5^3"),
    (5, 5, "2,3", "1^2,2^2,3^2,4^2,5", "2^2,3^2,4^2,5"),
    (5, 5, "1^2,3", "1^5,3^5,5", "1^3,3^5,5"),
    (5, 5, "1,2^2", "1^5,2^4,3^4", "1^3,2^4,3^4"),
    (5, 5, "1^3,2", "1^10,2^6,3", "1^8,2^6,3"),
    (5, 5, "1^5", "1^25", "1^23"),
];

fn table_reproduction() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for &(n, p, v, tensor, psl) in &TABLE {
        let ctx = GroupContext::sl(n, prime(p)).unwrap();
        let v = jt(v);
        for (module, want) in [(ModuleSpec::TensorVVdual, tensor), (ModuleSpec::PSL, psl)] {
            let want = jt(want);
            let rules = full_pipeline(&v, &ctx, module);
            let oracle = oracle_type(&v, &ctx, module);
            if rules.as_ref() != Ok(&want) || oracle.as_ref() != Ok(&want) {
                bad.push(format!(
                    "n={n} p={p} {v} on {module}: want {want}, rules {rules:?}, oracle {oracle:?}"
                ));
            }
        }
    }
    let elapsed = start.elapsed();
    // every row with p | n, no more and no fewer
    let mut expected_rows = 0;
    for n in 2..=5 {
        for p in [2, 3, 5] {
            if n % p == 0 {
                expected_rows += enumerate_partitions(n).count();
            }
        }
    }
    if expected_rows != TABLE.len() {
        bad.push(format!(
            "table has {} rows, enumeration gives {expected_rows}",
            TABLE.len()
        ));
    }
    let ok = bad.is_empty() && elapsed < Duration::from_secs(1);
    Outcome::new(
        ok,
        format!(
            "{}/{} rows exact, {}",
            TABLE.len() - bad.len().min(TABLE.len()),
            TABLE.len(),
            secs(elapsed)
        ),
    )
    .with_details(bad)
}

fn single_threaded_sweep(cfg: SweepConfig) -> Outcome {
    let cfg = SweepConfig {
        threads: Some(1),
        ..cfg
    };
    let inputs = sweep_size(&cfg);
    let start = Instant::now();
    let reports = run_sweep(&cfg).unwrap();
    let elapsed = start.elapsed();
    let ok = reports.is_empty() && elapsed < Duration::from_secs(60);
    Outcome::new(
        ok,
        format!(
            "{inputs} inputs, {} discrepancies, {} single-threaded",
            reports.len(),
            secs(elapsed)
        ),
    )
    .with_details(reports.iter().take(10).map(|r| r.to_json_line()).collect())
}

fn theorem_sweep() -> Outcome {
    let cfg = SweepConfig::new(
        10,
        &[2, 3, 5, 7],
        &[Family::SL],
        &[ModuleSpec::SL, ModuleSpec::PSL],
    )
    .unwrap();
    single_threaded_sweep(cfg)
}

fn corollary_sweep() -> Outcome {
    let cfg = SweepConfig::new(
        8,
        &[3, 5, 7],
        &[Family::Sp, Family::SO],
        &[ModuleSpec::LOmega2Sp, ModuleSpec::L2Omega1SO],
    )
    .unwrap();
    single_threaded_sweep(cfg)
}

fn sl_inputs(n_max: usize, primes: &[u32]) -> Vec<(GroupContext, JordanType)> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        for &p in primes {
            let ctx = GroupContext::sl(n, prime(p)).unwrap();
            out.extend(enumerate_partitions(n).map(|jt| (ctx, jt)));
        }
    }
    out
}

fn unipotent_nilpotent_agreement() -> Outcome {
    let inputs = sl_inputs(8, &[2, 3, 5]);
    let results: Vec<(usize, Vec<String>)> = inputs
        .par_iter()
        .map(|(ctx, v)| {
            let nil = Oracle::new(Element::Nilpotent, v, ctx).unwrap();
            let uni = Oracle::new(Element::Unipotent, v, ctx).unwrap();
            let mut modules = vec![ModuleSpec::TensorVVdual];
            if ctx.p().get() > 2 {
                modules.extend([ModuleSpec::Wedge2, ModuleSpec::Sym2]);
            }
            let mut bad = Vec::new();
            for &m in &modules {
                let (e, u) = (nil.jordan_type(m), uni.jordan_type(m));
                if e.is_err() || e != u {
                    bad.push(format!(
                        "n={} p={} {v} on {m}: e {e:?}, u {u:?}",
                        ctx.n(),
                        ctx.p()
                    ));
                }
            }
            (modules.len(), bad)
        })
        .collect();
    let comparisons: usize = results.iter().map(|r| r.0).sum();
    let bad: Vec<String> = results.into_iter().flat_map(|r| r.1).collect();
    Outcome::new(
        bad.is_empty(),
        format!("{comparisons} comparisons, {} mismatches", bad.len()),
    )
    .with_details(bad)
}

fn regular_types_in_characteristic_2(n: usize) -> [(Element, ModuleSpec, JordanType); 4] {
    let ctx = GroupContext::sl(n, prime(2)).unwrap();
    let regular = JordanType::from_sizes([n]);
    let ty = |element, module| {
        (
            element,
            module,
            oracle_type_for(element, &regular, &ctx, module).unwrap(),
        )
    };
    [
        ty(Element::Unipotent, ModuleSpec::Wedge2),
        ty(Element::Nilpotent, ModuleSpec::Wedge2),
        ty(Element::Unipotent, ModuleSpec::Sym2),
        ty(Element::Nilpotent, ModuleSpec::Sym2),
    ]
}

/// Regular elements in characteristic 2, stated for `dim V = 3`.
fn characteristic_two_counterexample() -> Outcome {
    let claimed = [jt("2,4"), jt("3^2"), jt("2,4^2"), jt("1^2,4^2")];
    let at_three = regular_types_in_characteristic_2(3);
    let wedge_ok = at_three[0].2 == claimed[0] && at_three[1].2 == claimed[1];
    let mut details = Vec::new();
    for ((element, module, got), want) in at_three.iter().zip(&claimed) {
        details.push(format!(
            "n=3 {element:?} on {module}: computed {got} (dim {}), listed {want} (dim {}){}",
            got.total_dim(),
            want.total_dim(),
            if got == want { "" } else { "  MISMATCH" }
        ));
    }
    let at_four = regular_types_in_characteristic_2(4);
    let four_ok = at_four.iter().zip(&claimed).all(|(t, w)| t.2 == *w);
    details.push(format!(
        "annotation: all four listed types are the computed ones for n=4: {}",
        if four_ok { "yes" } else { "no" }
    ));
    for (element, module, got) in &at_four {
        details.push(format!("n=4 {element:?} on {module}: computed {got}"));
    }
    let u_ne_e = at_three[0].2 != at_three[1].2;
    details.push(format!(
        "n=3 u and e differ on wedge2: {}",
        if u_ne_e { "yes" } else { "no" }
    ));
    Outcome::new(
        wedge_ok,
        format!(
            "n=3 wedge2: u {}, e {} (listed {}, {})",
            at_three[0].2, at_three[1].2, claimed[0], claimed[1]
        ),
    )
    .with_details(details)
}

fn psl_agreement_criterion() -> Outcome {
    let mut inputs = Vec::new();
    for n in 2..=8 {
        for p in [2u32, 3] {
            if n % p as usize == 0 {
                let ctx = GroupContext::sl(n, prime(p)).unwrap();
                inputs.extend(enumerate_partitions(n).map(|jt| (ctx, jt)));
            }
        }
    }
    let bad: Vec<String> = inputs
        .par_iter()
        .filter_map(|(ctx, v)| {
            let (n, p) = (ctx.n(), ctx.p());
            let e = oracle_type_for(Element::Nilpotent, v, ctx, ModuleSpec::PSL).unwrap();
            let u = oracle_type_for(Element::Unipotent, v, ctx, ModuleSpec::PSL).unwrap();
            let alpha = v.alpha(p).unwrap();
            let divides = n % p.pow(alpha + 1) == 0;
            ((e == u) != divides)
                .then(|| format!("n={n} p={p} {v}: e {e}, u {u}, p^(alpha+1) | n is {divides}"))
        })
        .collect();
    Outcome::new(
        bad.is_empty(),
        format!("{} inputs, {} exceptions", inputs.len(), bad.len()),
    )
    .with_details(bad)
}

fn lemma_identities() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    let mut cases = 0;
    for p in [2, 3, 5] {
        let report = check_lemma_identities(prime(p), 3, 125);
        for c in &report.checks {
            cases += c.cases;
            if !c.passed() || c.cases == 0 {
                ok = false;
                details.push(format!(
                    "p={p} {}: {} cases, failures {:?}",
                    c.name, c.cases, c.failures
                ));
            }
        }
    }
    Outcome::new(ok, format!("p in 2,3,5, beta <= 3, {cases} cases")).with_details(details)
}

fn structural_invariants() -> Outcome {
    let mut inputs = sl_inputs(10, &[2, 3, 5, 7]);
    for (family, ns) in [(Family::Sp, vec![4, 6, 8]), (Family::SO, vec![5, 6, 7, 8])] {
        for n in ns {
            for p in [3, 5, 7] {
                let ctx = GroupContext::new(family, n, prime(p)).unwrap();
                inputs.extend(
                    enumerate_partitions(n)
                        .filter(|v| validate_partition_for_group(v, &ctx) == Ok(true))
                        .map(|v| (ctx, v)),
                );
            }
        }
    }
    let bad: Vec<String> = inputs
        .par_iter()
        .flat_map_iter(|(ctx, v)| {
            let (n, p) = (ctx.n(), ctx.p());
            let tag = format!("{} n={n} p={p} {v}", ctx.family());
            let nil = Oracle::new(Element::Nilpotent, v, ctx).unwrap();
            let mut bad = Vec::new();
            let mut modules = vec![ModuleSpec::TensorVVdual, ModuleSpec::SL, ModuleSpec::PSL];
            match ctx.family() {
                Family::SL => {}
                Family::Sp => modules.push(ModuleSpec::LOmega2Sp),
                Family::SO => modules.push(ModuleSpec::L2Omega1SO),
            }
            if p.get() > 2 {
                modules.extend([ModuleSpec::Wedge2, ModuleSpec::Sym2]);
                if n <= 8 {
                    let whole = nil.jordan_type(ModuleSpec::TensorVV).unwrap();
                    let parts = nil
                        .jordan_type(ModuleSpec::Wedge2)
                        .unwrap()
                        .sum(&nil.jordan_type(ModuleSpec::Sym2).unwrap());
                    if whole != parts {
                        bad.push(format!("{tag}: V⊗V {whole} != ∧² ⊎ S² {parts}"));
                    }
                }
            }
            for m in modules {
                let want = m.dim(n, p);
                match (full_pipeline(v, ctx, m), nil.jordan_type(m)) {
                    (Ok(r), Ok(o)) => {
                        if r.total_dim() != want || o.total_dim() != want {
                            bad.push(format!("{tag} on {m}: dim {want}, rules {r}, oracle {o}"));
                        }
                    }
                    (r, o) => bad.push(format!("{tag} on {m}: rules {r:?}, oracle {o:?}")),
                }
            }
            bad
        })
        .collect();
    Outcome::new(
        bad.is_empty(),
        format!("{} inputs, {} violations", inputs.len(), bad.len()),
    )
    .with_details(bad)
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("table reproduction", table_reproduction),
        ("theorem sweep", theorem_sweep),
        ("corollary sweep", corollary_sweep),
        (
            "unipotent/nilpotent agreement",
            unipotent_nilpotent_agreement,
        ),
        (
            "characteristic 2 counterexample",
            characteristic_two_counterexample,
        ),
        ("psl agreement criterion", psl_agreement_criterion),
        ("lemma identities", lemma_identities),
        ("structural invariants", structural_invariants),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {} {name}: {verdict} ({})",
            i + 1,
            outcome.summary
        );
        for d in outcome.details.iter().take(20) {
            println!("    {d}");
        }
        failed += usize::from(!outcome.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
