use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jordanblocks::harness::{check_lemma_identities, sweep_size, Mutation, THREADS_ENV};
use jordanblocks::operator::{
    build_on_v, lift_to_gl, lift_to_sym2, lift_to_tensor_vv, lift_to_tensor_vvdual, lift_to_wedge2,
    quotient_by_gamma, restrict_to_sl,
};
use jordanblocks::table::{render_table, table_rows, Engine, Format, TableSpec};
use jordanblocks::{
    full_pipeline, oracle_type_for, run_sweep, Element, Error, Family, GroupContext, JordanType,
    ModuleSpec, Prime, SweepConfig,
};

#[derive(Parser)]
#[command(
    name = "jordanblocks",
    version,
    about = "Jordan block sizes of nilpotent and unipotent elements on modules for classical groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Jordan type of one element on one module.
    Type(TypeArgs),
    /// Tables of Jordan types over a range of n and p.
    Table(TableArgs),
    /// Compare the closed rules with the matrix oracle over all partitions.
    Sweep(SweepArgs),
    /// Dump the matrix of an element on a module.
    Matrix(MatrixArgs),
}

#[derive(Args)]
struct Query {
    /// Jordan type on V, e.g. `1^2,3`.
    #[arg(long)]
    partition: String,
    /// Characteristic.
    #[arg(long = "p")]
    p: u32,
    /// SL, Sp or SO.
    #[arg(long, default_value = "SL")]
    family: String,
    #[arg(long)]
    module: String,
    /// nilpotent or unipotent.
    #[arg(long, default_value = "nilpotent")]
    element: String,
}

#[derive(Args)]
struct TypeArgs {
    #[command(flatten)]
    query: Query,
    /// rules, oracle or both.
    #[arg(long, default_value = "rules")]
    engine: String,
}

#[derive(Args)]
struct TableArgs {
    /// SL(V), 2 <= n <= 5, p in {2, 3, 5} dividing n, modules tensor and psl.
    #[arg(long)]
    paper_table: bool,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    primes: Option<Vec<u32>>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long, value_delimiter = ',')]
    modules: Option<Vec<String>>,
    /// Keep only rows with p | n (implied by --paper-table).
    #[arg(long)]
    divisible_only: bool,
    /// text, tsv or json.
    #[arg(long, default_value = "text")]
    format: String,
    #[arg(long, default_value = "rules")]
    engine: String,
}

#[derive(Args)]
struct SweepArgs {
    /// Largest n (default 10 for SL, 8 for Sp and SO).
    #[arg(long)]
    max_n: Option<usize>,
    /// Primes (default 2,3,5,7 for SL and 3,5,7 for Sp and SO).
    #[arg(long, value_delimiter = ',')]
    primes: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', default_value = "SL,Sp,SO")]
    families: Vec<String>,
    /// Modules to compare (default sl,psl for SL, l-omega2 for Sp, l-2omega1 for SO).
    #[arg(long, value_delimiter = ',')]
    modules: Option<Vec<String>>,
    #[arg(long)]
    fail_fast: bool,
    /// Also compare unipotent and nilpotent elements (SL only).
    #[arg(long)]
    unipotent: bool,
    /// Corrupt the rules on purpose; the sweep must then fail.
    #[arg(long)]
    mutate: bool,
    /// Check the vector identities behind the rules instead of sweeping.
    #[arg(long)]
    check_lemmas: bool,
    #[arg(long, default_value_t = 3)]
    beta_max: u32,
    #[arg(long, default_value_t = 125)]
    lemma_n_max: usize,
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    query: Query,
}

/// Exit status 1: a discrepancy or a failed check.
/// Exit status 2: the request itself is invalid.
enum Failure {
    Discrepancy(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DecompositionViolated(_) | Error::NotNilpotent | Error::NotInvariant => {
                Failure::Discrepancy(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Type(args) => cmd_type(args),
        Command::Table(args) => cmd_table(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Matrix(args) => cmd_matrix(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Discrepancy(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

struct ParsedQuery {
    jt: JordanType,
    ctx: GroupContext,
    module: ModuleSpec,
    element: Element,
}

fn parse_query(q: &Query) -> CliResult<ParsedQuery> {
    let jt: JordanType = q.partition.parse()?;
    if jt.is_empty() {
        return Err(usage("the partition must be nonempty"));
    }
    let p = Prime::new(q.p)?;
    let family: Family = q.family.parse()?;
    let ctx = GroupContext::new(family, jt.total_dim(), p)?;
    if !jordanblocks::validate_partition_for_group(&jt, &ctx)? {
        return Err(Error::Inadmissible {
            partition: jt.to_string(),
            group: ctx.to_string(),
        }
        .into());
    }
    let module: ModuleSpec = q.module.parse()?;
    module.check_compatible(&ctx)?;
    Ok(ParsedQuery {
        jt,
        ctx,
        module,
        element: q.element.parse()?,
    })
}

fn cmd_type(args: TypeArgs) -> CliResult {
    let q = parse_query(&args.query)?;
    let engine: Engine = args.engine.parse()?;
    if q.element == Element::Unipotent && engine != Engine::Oracle {
        return Err(usage(
            "unipotent elements are only supported by --engine oracle",
        ));
    }
    match engine {
        Engine::Rules => println!("{}", full_pipeline(&q.jt, &q.ctx, q.module)?),
        Engine::Oracle => println!("{}", oracle_type_for(q.element, &q.jt, &q.ctx, q.module)?),
        Engine::Both => {
            let rules = full_pipeline(&q.jt, &q.ctx, q.module)?;
            let oracle = oracle_type_for(q.element, &q.jt, &q.ctx, q.module)?;
            println!("rules   {rules}");
            println!("oracle  {oracle}");
            if rules == oracle {
                println!("AGREE");
            } else {
                println!("DISAGREE");
                return Err(Failure::Discrepancy(format!(
                    "{} on {} over {}",
                    q.jt, q.module, q.ctx
                )));
            }
        }
    }
    Ok(())
}

fn parse_primes(primes: &[u32]) -> CliResult<Vec<Prime>> {
    Ok(primes
        .iter()
        .map(|&p| Prime::new(p))
        .collect::<Result<_, _>>()?)
}

fn parse_modules(names: &[String]) -> CliResult<Vec<ModuleSpec>> {
    Ok(names.iter().map(|m| m.parse()).collect::<Result<_, _>>()?)
}

fn cmd_table(args: TableArgs) -> CliResult {
    let mut spec = TableSpec::reference_table();
    spec.divisible_only = args.paper_table || args.divisible_only;
    if let Some(n) = args.n_min {
        spec.n_min = n;
    }
    if let Some(n) = args.n_max {
        spec.n_max = n;
    }
    if let Some(ps) = &args.primes {
        spec.primes = parse_primes(ps)?;
    }
    if let Some(f) = &args.family {
        spec.family = f.parse()?;
    }
    if let Some(ms) = &args.modules {
        spec.modules = parse_modules(ms)?;
    }
    spec.engine = args.engine.parse()?;
    let format: Format = args.format.parse()?;
    let rows = table_rows(&spec)?;
    print!("{}", render_table(&rows, &spec.modules, format));
    Ok(())
}

fn default_modules(family: Family) -> Vec<ModuleSpec> {
    match family {
        Family::SL => vec![ModuleSpec::SL, ModuleSpec::PSL],
        Family::Sp => vec![ModuleSpec::LOmega2Sp],
        Family::SO => vec![ModuleSpec::L2Omega1SO],
    }
}

fn cmd_sweep(args: SweepArgs) -> CliResult {
    if args.check_lemmas {
        return check_lemmas(&args);
    }
    let families: Vec<Family> = args
        .families
        .iter()
        .map(|f| f.parse())
        .collect::<Result<_, _>>()?;
    let modules = args.modules.as_deref().map(parse_modules).transpose()?;
    let mut reports = Vec::new();
    let mut inputs = 0;
    for family in families {
        let classical = family != Family::SL;
        let primes = match &args.primes {
            Some(ps) => parse_primes(ps)?,
            None if classical => parse_primes(&[3, 5, 7])?,
            None => parse_primes(&[2, 3, 5, 7])?,
        };
        let modules = match &modules {
            Some(ms) => ms.clone(),
            None => default_modules(family),
        };
        let cfg = SweepConfig {
            min_n: 2,
            max_n: args.max_n.unwrap_or(if classical { 8 } else { 10 }),
            primes,
            families: vec![family],
            modules,
            fail_fast: args.fail_fast,
            unipotent_checks: args.unipotent,
            mutation: args.mutate.then_some(Mutation::IgnoreAlpha),
            threads: args.threads,
        };
        cfg.validate()?;
        inputs += sweep_size(&cfg);
        reports.extend(run_sweep(&cfg)?);
        if args.fail_fast && !reports.is_empty() {
            break;
        }
    }
    let mut out = std::io::stdout().lock();
    for r in &reports {
        let _ = writeln!(out, "{}", r.to_json_line());
    }
    eprintln!("checked {inputs} inputs, {} discrepancies", reports.len());
    if reports.is_empty() {
        Ok(())
    } else {
        Err(Failure::Discrepancy(format!(
            "{} discrepancies",
            reports.len()
        )))
    }
}

fn check_lemmas(args: &SweepArgs) -> CliResult {
    let primes = parse_primes(args.primes.as_deref().unwrap_or(&[2, 3, 5]))?;
    let mut ok = true;
    for p in primes {
        let report = check_lemma_identities(p, args.beta_max, args.lemma_n_max);
        for c in &report.checks {
            let verdict = if c.passed() { "ok" } else { "FAILED" };
            eprintln!("p={p} {:<28} {:>6} cases  {verdict}", c.name, c.cases);
            for f in c.failures.iter().take(5) {
                eprintln!("    {f}");
            }
        }
        ok &= report.passed();
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Discrepancy("lemma identities failed".into()))
    }
}

fn cmd_matrix(args: MatrixArgs) -> CliResult {
    let q = parse_query(&args.query)?;
    let v = build_on_v(q.element, &q.jt, q.ctx.p())?;
    let op = match q.module {
        ModuleSpec::NaturalV => v,
        ModuleSpec::TensorVVdual => lift_to_tensor_vvdual(&v)?,
        ModuleSpec::TensorVV => lift_to_tensor_vv(&v)?,
        ModuleSpec::GL => lift_to_gl(&v)?,
        ModuleSpec::Wedge2 => lift_to_wedge2(&v)?,
        ModuleSpec::Sym2 => lift_to_sym2(&v)?,
        ModuleSpec::SL => restrict_to_sl(&lift_to_gl(&v)?)?,
        ModuleSpec::PSL => {
            let sl = restrict_to_sl(&lift_to_gl(&v)?)?;
            if q.ctx.p().divides(q.ctx.n()) {
                quotient_by_gamma(&sl)?
            } else {
                sl
            }
        }
        other => {
            return Err(usage(format!(
                "{other} has no explicit matrix; it is computed as a difference of types"
            )))
        }
    };
    print!("{}", op.matrix().to_dump());
    Ok(())
}
