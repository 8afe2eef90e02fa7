//! Command-line interface.
//!
//! Every subcommand maps to one library operation chain and prints a
//! deterministic report: prose by default, `key=value` lines under
//! `--machine` (every number visible in prose also appears there). Exit
//! codes: 0 success, 1 computation error, 2 usage error.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::bounds::{
    self, decimal_render, BoundReport, RoundDirection, ThresholdOutcome,
};
use crate::gradings::{
    build_friable_grading, build_gp_grading, build_prime_power_grading, build_square_grading,
    verify_grading, ConditionOutcome, Grading, GradingKind,
};
use crate::grid;
use crate::patterns::{NaturalSet, PatternFamily};
use crate::solver::{
    exhaustive_max_free, solve_ground, ForbiddenHypergraph, ProofStatus, SolverOptions,
};
use crate::tables::{Quantity, RamseyRecord, Status, Table};
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "proscribe",
    version,
    about = "Exact solvers and certified density bounds for sets avoiding proscribed patterns"
)]
struct Cli {
    /// Emit machine-readable key=value lines instead of prose.
    #[arg(long, global = true)]
    machine: bool,

    /// Worker threads for internal search; results are independent of N.
    #[arg(long, global = true, value_name = "N",
          value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    /// Capacity table file (default: $PROSCRIBE_TABLE, else the bundled table).
    #[arg(long, global = true, value_name = "FILE")]
    table: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum free-subset size of [1, n] for a pattern family.
    Solve(SolveArgs),
    /// Ramsey-type grid capacities, stored or computed on demand.
    Ramsey(RamseyArgs),
    /// Enumerate lines, geometric lines, or subspaces of the k-ary d-cube.
    Grid(GridArgs),
    /// Asymptotic density upper bounds as certified exact rationals.
    Bound(BoundArgs),
    /// Finite-n density bound from an explicitly built grading.
    BoundFinite(BoundFiniteArgs),
    /// Build a grading and optionally verify its structural conditions.
    Grading(GradingCmdArgs),
    /// Least n where r_k(n) drops below the easy bound n - floor(n/k).
    Threshold(ThresholdArgs),
    /// Capacity-table management: export, import, verify.
    Table(TableArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Pattern family.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Ground interval [1, n].
    #[arg(long)]
    n: u64,
    /// Progression length (ap, gp-int, gp-rat, pp-gp).
    #[arg(long)]
    k: Option<u32>,
    /// Prime ratio base (pp-gp).
    #[arg(long)]
    p: Option<u64>,
    /// Friability bound on the ratio (friable-gp3).
    #[arg(long)]
    d: Option<u32>,
    /// Print a maximum free subset.
    #[arg(long)]
    witness: bool,
    /// Solve with the exhaustive validation oracle instead of branch and bound.
    #[arg(long)]
    oracle: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ap,
    GpInt,
    GpRat,
    Square,
    PpGp,
    FriableGp3,
}

#[derive(Args)]
struct RamseyArgs {
    /// Which capacity: line-free, geometric-line-free, or subspace-free.
    #[arg(long, value_enum)]
    which: RamseyWhich,
    /// Cube dimension.
    #[arg(long)]
    d: u32,
    /// Alphabet size.
    #[arg(long)]
    k: u32,
    /// Subspace dimension (space only).
    #[arg(long)]
    s: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RamseyWhich {
    Dhj,
    Moser,
    Space,
}

#[derive(Args)]
struct GridArgs {
    /// Structure to enumerate.
    #[arg(long, value_enum)]
    object: GridObject,
    /// Cube dimension.
    #[arg(long)]
    d: u32,
    /// Alphabet size.
    #[arg(long)]
    k: u32,
    /// Subspace dimension (space only).
    #[arg(long)]
    s: Option<u32>,
    /// Print only the count.
    #[arg(long)]
    count_only: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridObject {
    Line,
    Geoline,
    Space,
}

#[derive(Args)]
struct BoundArgs {
    /// Which asymptotic bound.
    #[arg(long, value_enum)]
    which: BoundWhich,
    /// Progression length (gp-int, gp-rat, prime-power).
    #[arg(long)]
    k: Option<u32>,
    /// Prime base (prime-power).
    #[arg(long)]
    p: Option<u64>,
    /// Friability bound (mcnew).
    #[arg(long)]
    d: Option<u32>,
    /// Truncation depth (default: stored-record depth for gp-int/gp-rat/
    /// square, 40 for prime-power, 8 for mcnew).
    #[arg(long)]
    depth: Option<u32>,
    /// Fractional digits in the decimal rendering (rounded up).
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    digits: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundWhich {
    GpInt,
    GpRat,
    Square,
    PrimePower,
    Mcnew,
}

#[derive(Args)]
struct BoundFiniteArgs {
    /// Grading to build.
    #[arg(long, value_enum)]
    grading: GradingArg,
    /// Ground interval [1, n].
    #[arg(long)]
    n: u64,
    /// Progression length (gp, prime-power).
    #[arg(long)]
    k: Option<u32>,
    /// Prime base (prime-power).
    #[arg(long)]
    p: Option<u64>,
    /// Friability bound (friable).
    #[arg(long)]
    d: Option<u32>,
    /// Also solve [1, n] exactly and print the optimum next to the bound.
    #[arg(long)]
    compare_exact: bool,
    /// Fractional digits in the decimal rendering (rounded up).
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    digits: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum GradingArg {
    Gp,
    PrimePower,
    Square,
    Friable,
}

#[derive(Args)]
struct GradingCmdArgs {
    /// Grading to build.
    #[arg(long, value_enum)]
    build: GradingArg,
    /// Ground interval [1, n].
    #[arg(long)]
    n: u64,
    /// Progression length (gp, prime-power).
    #[arg(long)]
    k: Option<u32>,
    /// Prime base (prime-power).
    #[arg(long)]
    p: Option<u64>,
    /// Friability bound (friable).
    #[arg(long)]
    d: Option<u32>,
    /// Check the structural grading conditions.
    #[arg(long)]
    verify: bool,
    /// Solve every cell exactly for the equal-capacity condition instead of
    /// the structural dilation check (implies --verify).
    #[arg(long)]
    check_ramsey: bool,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Progression length (k ≥ 3).
    #[arg(long)]
    k: u32,
    /// Largest n to scan.
    #[arg(long)]
    max_n: u64,
}

#[derive(Args)]
struct TableArgs {
    #[command(subcommand)]
    action: TableAction,
}

#[derive(Subcommand)]
enum TableAction {
    /// Write the active table to a file.
    Export {
        #[arg(long, value_name = "FILE")]
        file: PathBuf,
    },
    /// Merge records from a file into the active table (--table gives the
    /// destination, which is rewritten).
    Import {
        #[arg(long, value_name = "FILE")]
        file: PathBuf,
    },
    /// Recompute every exact record within the node budget; any mismatch is
    /// a fatal conflict.
    Verify,
}

/// CLI failure split by exit code.
#[derive(Debug)]
enum Failure {
    /// Flag combination outside the subcommand grammar (exit 2).
    Usage(String),
    /// The mapped library operation failed (exit 1).
    Run(Error),
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure::Run(error)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses argv and runs one command; the binary's whole `main`.
pub fn run() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("usage error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Run(error)) => {
            eprintln!("error: {error}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let mut opts = SolverOptions::default();
    if let Some(threads) = cli.threads {
        opts.threads = threads as usize;
    }
    let out = Printer {
        machine: cli.machine,
    };
    match cli.command {
        Command::Solve(args) => cmd_solve(&out, &opts, args),
        Command::Ramsey(args) => cmd_ramsey(&out, &opts, &cli.table, args),
        Command::Grid(args) => cmd_grid(&out, args),
        Command::Bound(args) => cmd_bound(&out, &opts, &cli.table, args),
        Command::BoundFinite(args) => cmd_bound_finite(&out, &opts, &cli.table, args),
        Command::Grading(args) => cmd_grading(&out, args),
        Command::Threshold(args) => cmd_threshold(&out, args),
        Command::Table(args) => cmd_table(&out, &opts, &cli.table, args),
    }
}

/// Output sink honoring the two modes. Exactly one mode prints per line
/// kind, so a command emits both without double output.
struct Printer {
    machine: bool,
}

impl Printer {
    fn human(&self, line: impl fmt::Display) {
        if !self.machine {
            println!("{line}");
        }
    }

    fn kv(&self, key: &str, value: impl fmt::Display) {
        if self.machine {
            println!("{key}={value}");
        }
    }
}

fn require<T>(value: Option<T>, flag: &str, context: &str) -> CliResult<T> {
    value.ok_or_else(|| Failure::Usage(format!("{flag} is required for {context}")))
}

fn forbid<T>(value: &Option<T>, flag: &str, context: &str) -> CliResult<()> {
    if value.is_some() {
        return Err(Failure::Usage(format!(
            "{flag} does not apply to {context}"
        )));
    }
    Ok(())
}

/// clap's kebab-case name of a value-enum variant.
fn slug<E: ValueEnum>(value: E) -> String {
    value
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

fn join<T: fmt::Display>(items: &[T], separator: &str) -> String {
    items
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(separator)
}

fn set_braces<T: fmt::Display>(items: &[T]) -> String {
    format!("{{{}}}", join(items, ", "))
}

/// Loads the active table: --table flag, then PROSCRIBE_TABLE, then bundled.
/// The path comes back too, for commands that write the table in place.
fn resolve_table(flag: &Option<PathBuf>) -> Result<(Table, Option<PathBuf>)> {
    if let Some(path) = flag {
        return Ok((Table::load(path)?, Some(path.clone())));
    }
    if let Some(path) = std::env::var_os("PROSCRIBE_TABLE") {
        if !path.is_empty() {
            let path = PathBuf::from(path);
            return Ok((Table::load(&path)?, Some(path)));
        }
    }
    Ok((Table::bundled_default(), None))
}

fn cmd_solve(out: &Printer, opts: &SolverOptions, args: SolveArgs) -> CliResult<()> {
    let context = format!("--family {}", slug(args.family));
    let family = match args.family {
        FamilyArg::Ap => {
            forbid(&args.p, "--p", &context)?;
            forbid(&args.d, "--d", &context)?;
            PatternFamily::ap(require(args.k, "--k", &context)?)?
        }
        FamilyArg::GpInt => {
            forbid(&args.p, "--p", &context)?;
            forbid(&args.d, "--d", &context)?;
            PatternFamily::gp_int(require(args.k, "--k", &context)?)?
        }
        FamilyArg::GpRat => {
            forbid(&args.p, "--p", &context)?;
            forbid(&args.d, "--d", &context)?;
            PatternFamily::gp_rat(require(args.k, "--k", &context)?)?
        }
        FamilyArg::Square => {
            forbid(&args.k, "--k", &context)?;
            forbid(&args.p, "--p", &context)?;
            forbid(&args.d, "--d", &context)?;
            PatternFamily::geom_square()
        }
        FamilyArg::PpGp => {
            forbid(&args.d, "--d", &context)?;
            PatternFamily::gp_prime_power(
                require(args.p, "--p", &context)?,
                require(args.k, "--k", &context)?,
            )?
        }
        FamilyArg::FriableGp3 => {
            forbid(&args.k, "--k", &context)?;
            forbid(&args.p, "--p", &context)?;
            PatternFamily::gp_friable3(require(args.d, "--d", &context)? as usize)?
        }
    };
    let ground = NaturalSet::interval(args.n)?;
    let (optimum, witness, nodes) = if args.oracle {
        let (h, elements) = ForbiddenHypergraph::from_family(&ground, family)?;
        let result = exhaustive_max_free(&h)?;
        let witness = result
            .witness
            .iter()
            .map(|&v| elements[v as usize])
            .collect();
        (result.optimum, witness, result.nodes_explored)
    } else {
        let solve = solve_ground(&ground, family, opts)?;
        if solve.result.proof_status != ProofStatus::Exact {
            return Err(Error::BudgetExceeded {
                explored: solve.result.nodes_explored,
                budget: opts.node_budget,
                best: solve.result.optimum,
            }
            .into());
        }
        (
            solve.result.optimum,
            solve.witness_elements,
            solve.result.nodes_explored,
        )
    };
    out.kv("family", slug(args.family));
    if let Some(k) = args.k {
        out.kv("k", k);
    }
    if let Some(p) = args.p {
        out.kv("p", p);
    }
    if let Some(d) = args.d {
        out.kv("d", d);
    }
    out.kv("n", args.n);
    out.kv("oracle", args.oracle);
    out.kv("g", optimum);
    out.kv("nodes", nodes);
    out.human(format!("G = {optimum}"));
    if args.witness {
        out.kv("witness", join(&witness, ","));
        out.human(format!("witness = {}", set_braces(&witness)));
    }
    Ok(())
}

fn cmd_ramsey(
    out: &Printer,
    opts: &SolverOptions,
    table_flag: &Option<PathBuf>,
    args: RamseyArgs,
) -> CliResult<()> {
    let quantity = match args.which {
        RamseyWhich::Dhj => {
            forbid(&args.s, "--s", "--which dhj")?;
            Quantity::Dhj {
                d: args.d,
                k: args.k,
            }
        }
        RamseyWhich::Moser => {
            forbid(&args.s, "--s", "--which moser")?;
            Quantity::Moser {
                d: args.d,
                k: args.k,
            }
        }
        RamseyWhich::Space => Quantity::Space {
            d: args.d,
            s: require(args.s, "--s", "--which space")?,
            k: args.k,
        },
    };
    let (mut table, _) = resolve_table(table_flag)?;
    let value = table.get_or_compute(quantity, opts)?;
    out.kv("which", slug(args.which));
    out.kv("d", args.d);
    if let Some(s) = args.s {
        out.kv("s", s);
    }
    out.kv("k", args.k);
    out.kv("value", value);
    out.human(format!("{quantity} = {value}"));
    Ok(())
}

fn cmd_grid(out: &Printer, args: GridArgs) -> CliResult<()> {
    let objects = match args.object {
        GridObject::Line => {
            forbid(&args.s, "--s", "--object line")?;
            grid::enumerate_lines(args.k, args.d)?
        }
        GridObject::Geoline => {
            forbid(&args.s, "--s", "--object geoline")?;
            grid::enumerate_geometric_lines(args.k, args.d)?
        }
        GridObject::Space => {
            grid::enumerate_spaces(args.k, args.d, require(args.s, "--s", "--object space")?)?
        }
    };
    out.kv("object", slug(args.object));
    out.kv("d", args.d);
    out.kv("k", args.k);
    if let Some(s) = args.s {
        out.kv("s", s);
    }
    if !args.count_only {
        for cells in &objects {
            out.kv("cells", join(cells, ","));
            out.human(set_braces(cells));
        }
    }
    out.kv("count", objects.len());
    out.human(format!("count = {}", objects.len()));
    Ok(())
}

fn cmd_bound(
    out: &Printer,
    opts: &SolverOptions,
    table_flag: &Option<PathBuf>,
    args: BoundArgs,
) -> CliResult<()> {
    let (mut table, _) = resolve_table(table_flag)?;
    let mut params: Vec<(&str, String)> = Vec::new();
    let (report, head) = match args.which {
        BoundWhich::GpInt => {
            let k = require(args.k, "--k", "--which gp-int")?;
            forbid(&args.p, "--p", "--which gp-int")?;
            forbid(&args.d, "--d", "--which gp-int")?;
            params.push(("k", k.to_string()));
            let depth = match args.depth {
                Some(depth) => depth,
                None => stored_depth(&table, |d| Quantity::Dhj { d, k })?,
            };
            let caps = table.dhj_series(k, depth, opts)?;
            let report = bounds::gp_int_asymptotic(k, &caps, depth)?;
            let head = leading_term(depth, || bounds::gp_int_asymptotic(k, &caps, 1))?;
            (report, head)
        }
        BoundWhich::GpRat => {
            let k = require(args.k, "--k", "--which gp-rat")?;
            forbid(&args.p, "--p", "--which gp-rat")?;
            forbid(&args.d, "--d", "--which gp-rat")?;
            params.push(("k", k.to_string()));
            let depth = match args.depth {
                Some(depth) => depth,
                None => stored_depth(&table, |d| Quantity::Moser { d, k })?,
            };
            let caps = table.moser_series(k, depth, opts)?;
            let report = bounds::gp_rat_asymptotic(k, &caps, depth)?;
            let head = leading_term(depth, || bounds::gp_rat_asymptotic(k, &caps, 1))?;
            (report, head)
        }
        BoundWhich::Square => {
            forbid(&args.k, "--k", "--which square")?;
            forbid(&args.p, "--p", "--which square")?;
            forbid(&args.d, "--d", "--which square")?;
            let depth = match args.depth {
                Some(depth) => depth,
                None => stored_depth(&table, |d| Quantity::Space { d, s: 2, k: 2 })?,
            };
            let caps = table.space_series(2, 2, depth, opts)?;
            let report = bounds::square_asymptotic(&caps, depth)?;
            let head = leading_term(depth, || bounds::square_asymptotic(&caps, 1))?;
            (report, head)
        }
        BoundWhich::PrimePower => {
            let p = require(args.p, "--p", "--which prime-power")?;
            let k = require(args.k, "--k", "--which prime-power")?;
            forbid(&args.d, "--d", "--which prime-power")?;
            params.push(("p", p.to_string()));
            params.push(("k", k.to_string()));
            let depth = args.depth.unwrap_or(40);
            let r = table.r_series(k, depth as u64 + 1)?;
            let report = bounds::prime_power_asymptotic(p, k, &r, depth)?;
            let head = leading_term(depth, || bounds::prime_power_asymptotic(p, k, &r, 1))?;
            (report, head)
        }
        BoundWhich::Mcnew => {
            let d = require(args.d, "--d", "--which mcnew")?;
            forbid(&args.k, "--k", "--which mcnew")?;
            forbid(&args.p, "--p", "--which mcnew")?;
            params.push(("d", d.to_string()));
            let depth = args.depth.unwrap_or(8);
            let caps = table.friable_series(d, depth, opts)?;
            let report = bounds::mcnew_asymptotic(d as usize, &caps, depth)?;
            let head = leading_term(depth, || bounds::mcnew_asymptotic(d as usize, &caps, 1))?;
            (report, head)
        }
    };
    let decimal = decimal_render(&report.value, args.digits, RoundDirection::Up);
    // The classic display splits off the first term when the remainder is a
    // small correction: "6/7 - tail ≈ decimal". Degenerate heads (1, or equal
    // to the whole value) fall back to the plain rational.
    let head = head.filter(|h| !h.is_one() && *h != report.value);
    out.kv("which", slug(args.which));
    for (key, value) in &params {
        out.kv(key, value);
    }
    out.kv("depth", report.depth);
    out.kv("value", &report.value);
    match &head {
        Some(head) => {
            let tail = head - &report.value;
            out.kv("head", head);
            out.kv("tail", &tail);
            out.human(format!("{head} - {tail} ≈ {decimal} (upper)"));
        }
        None => out.human(format!("{} ≈ {decimal} (upper)", report.value)),
    }
    out.kv("decimal", &decimal);
    out.kv("direction", "upper");
    Ok(())
}

/// Default truncation depth: the longest contiguous run of stored exact
/// records from index 0.
fn stored_depth(table: &Table, template: impl Fn(u32) -> Quantity) -> CliResult<u32> {
    table.contiguous_exact_depth(&template).ok_or_else(|| {
        Failure::Run(Error::MissingRecord(format!(
            "{} (no stored exact records; pass --depth to compute capacities)",
            template(0)
        )))
    })
}

/// The depth-1 truncation, evaluated only when a deeper bound was asked for.
fn leading_term(
    depth: u32,
    evaluate: impl FnOnce() -> Result<BoundReport>,
) -> CliResult<Option<BigRational>> {
    if depth < 2 {
        return Ok(None);
    }
    Ok(Some(evaluate()?.value))
}

fn cmd_bound_finite(
    out: &Printer,
    opts: &SolverOptions,
    table_flag: &Option<PathBuf>,
    args: BoundFiniteArgs,
) -> CliResult<()> {
    let (grading, family) =
        build_grading(args.grading, args.n, args.k, args.p, args.d)?;
    let (mut table, _) = resolve_table(table_flag)?;
    let depth = grading.depth();
    let caps = match args.grading {
        GradingArg::Gp => table.dhj_series(args.k.unwrap(), depth, opts)?,
        GradingArg::PrimePower => {
            let r = table.r_series(args.k.unwrap(), depth as u64 + 1)?;
            (0..=depth).map(|i| r[i as usize + 1]).collect()
        }
        GradingArg::Square => table.space_series(2, 2, depth, opts)?,
        GradingArg::Friable => table.friable_series(args.d.unwrap(), depth, opts)?,
    };
    let sizes = grading.level_sizes();
    let report = match grading.kind() {
        GradingKind::Expansion(k) => bounds::theorem1_bound(args.n, &sizes[1..], &caps, k)?,
        GradingKind::Growth(r) => bounds::theorem2_bound(args.n, &sizes[1..], &caps, r)?,
    };
    let integer_bound = report
        .integer_bound
        .as_ref()
        .expect("finite theorems certify an integer form");
    let decimal = decimal_render(&report.value, args.digits, RoundDirection::Up);

    out.kv("grading", slug(args.grading));
    out.kv("n", args.n);
    if let Some(k) = args.k {
        out.kv("k", k);
    }
    if let Some(p) = args.p {
        out.kv("p", p);
    }
    if let Some(d) = args.d {
        out.kv("d", d);
    }
    print_kind(out, &grading);
    out.kv("value", &report.value);
    out.kv("decimal", &decimal);
    out.kv("integer_bound", integer_bound);
    out.human(format!("bound = {} ≈ {decimal} (upper)", report.value));
    out.human(format!("integer form: G ≤ {integer_bound}"));
    if args.compare_exact {
        let exact = crate::solver::g_value(family, args.n)?;
        out.kv("exact", exact);
        out.human(format!("exact: G = {exact}"));
        if BigInt::from(exact) > *integer_bound {
            return Err(Failure::Run(Error::InvalidParameter(format!(
                "soundness violation: exact optimum {exact} exceeds certified bound {integer_bound}"
            ))));
        }
    }
    Ok(())
}

fn build_grading(
    which: GradingArg,
    n: u64,
    k: Option<u32>,
    p: Option<u64>,
    d: Option<u32>,
) -> CliResult<(Grading, PatternFamily)> {
    let context = format!("--grading {}", slug(which));
    match which {
        GradingArg::Gp => {
            forbid(&p, "--p", &context)?;
            forbid(&d, "--d", &context)?;
            let k = require(k, "--k", &context)?;
            Ok((build_gp_grading(n, k)?, PatternFamily::gp_int(k)?))
        }
        GradingArg::PrimePower => {
            forbid(&d, "--d", &context)?;
            let p = require(p, "--p", &context)?;
            let k = require(k, "--k", &context)?;
            Ok((
                build_prime_power_grading(n, p, k)?,
                PatternFamily::gp_prime_power(p, k)?,
            ))
        }
        GradingArg::Square => {
            forbid(&k, "--k", &context)?;
            forbid(&p, "--p", &context)?;
            forbid(&d, "--d", &context)?;
            Ok((build_square_grading(n)?, PatternFamily::geom_square()))
        }
        GradingArg::Friable => {
            forbid(&k, "--k", &context)?;
            forbid(&p, "--p", &context)?;
            let d = require(d, "--d", &context)? as usize;
            Ok((build_friable_grading(n, d)?, PatternFamily::gp_friable3(d)?))
        }
    }
}

fn print_kind(out: &Printer, grading: &Grading) {
    let (kind, parameter) = match grading.kind() {
        GradingKind::Expansion(k) => ("expansion", k),
        GradingKind::Growth(r) => ("growth", r),
    };
    out.kv("kind", kind);
    out.kv("parameter", parameter);
    out.kv("depth", grading.depth());
    let sizes = grading.level_sizes();
    let upper = &sizes[1..];
    out.kv("levels", join(upper, ","));
    out.human(format!(
        "grading kind = {kind} {parameter}, depth {}",
        grading.depth()
    ));
    out.human(format!(
        "level sizes = {}",
        if upper.is_empty() {
            "none".to_string()
        } else {
            join(upper, ", ")
        }
    ));
}

const CONDITION_LABELS: [&str; 6] = [
    "base level is the singletons",
    "cells within a level are pairwise disjoint",
    "cells nest or are disjoint across levels",
    "equal free-subset numbers within each level",
    "expansion",
    "growth",
];

fn cmd_grading(out: &Printer, args: GradingCmdArgs) -> CliResult<()> {
    let (grading, family) = build_grading(args.build, args.n, args.k, args.p, args.d)?;
    out.kv("grading", slug(args.build));
    out.kv("n", args.n);
    out.human(format!("grading = {} on [1, {}]", slug(args.build), args.n));
    print_kind(out, &grading);
    if !(args.verify || args.check_ramsey) {
        return Ok(());
    }
    let report = verify_grading(&grading, family, args.check_ramsey)?;
    for (i, outcome) in report.conditions.iter().enumerate() {
        let key = format!("condition{}", i + 1);
        let label = CONDITION_LABELS[i];
        match outcome {
            ConditionOutcome::Pass => {
                out.kv(&key, "pass");
                out.human(format!("condition {} ({label}): pass", i + 1));
            }
            ConditionOutcome::NotApplicable => {
                out.kv(&key, "n/a");
                out.human(format!("condition {} ({label}): n/a", i + 1));
            }
            ConditionOutcome::Fail(reason) => {
                out.kv(&key, "fail");
                out.human(format!("condition {} ({label}): FAIL — {reason}", i + 1));
            }
        }
    }
    out.kv("verified", report.all_pass());
    out.human(format!(
        "verification: {}",
        if report.all_pass() { "pass" } else { "FAIL" }
    ));
    if !report.all_pass() {
        return Err(Failure::Run(Error::GradingPrecondition(
            "one or more grading conditions failed".into(),
        )));
    }
    Ok(())
}

fn cmd_threshold(out: &Printer, args: ThresholdArgs) -> CliResult<()> {
    let outcome = bounds::threshold_search(args.k, args.max_n)?;
    out.kv("k", args.k);
    out.kv("max_n", args.max_n);
    match outcome {
        ThresholdOutcome::Found {
            n,
            r_value,
            easy_bound,
        } => {
            out.kv("found", true);
            out.kv("n", n);
            out.kv("r", r_value);
            out.kv("easy_bound", easy_bound);
            out.human(format!(
                "least n with r_{}(n) < n - floor(n/{}): n = {n} (r = {r_value}, easy bound = {easy_bound})",
                args.k, args.k
            ));
        }
        ThresholdOutcome::NotFound => {
            out.kv("found", false);
            out.human(format!(
                "no n ≤ {} with r_{}(n) < n - floor(n/{})",
                args.max_n, args.k, args.k
            ));
        }
    }
    Ok(())
}

fn cmd_table(
    out: &Printer,
    opts: &SolverOptions,
    table_flag: &Option<PathBuf>,
    args: TableArgs,
) -> CliResult<()> {
    match args.action {
        TableAction::Export { file } => {
            let (table, _) = resolve_table(table_flag)?;
            table.store(&file)?;
            out.kv("file", file.display());
            out.kv("records", table.len());
            out.human(format!(
                "exported {} records to {}",
                table.len(),
                file.display()
            ));
        }
        TableAction::Import { file } => {
            let (active, destination) = resolve_table(table_flag)?;
            let destination = destination.ok_or_else(|| {
                Failure::Usage("import needs --table (or PROSCRIBE_TABLE) as destination".into())
            })?;
            let incoming = Table::load(&file)?;
            let mut merged: Vec<RamseyRecord> = active.records().cloned().collect();
            let mut added = 0u64;
            for record in incoming.records() {
                match active.get(record.quantity, record.status) {
                    Some(existing) if existing.value != record.value => {
                        return Err(Failure::Run(Error::InvalidTable(format!(
                            "import conflicts with active table for {} ({}): {} vs {}",
                            record.quantity, record.status, existing.value, record.value
                        ))));
                    }
                    Some(_) => {}
                    None => {
                        merged.push(record.clone());
                        added += 1;
                    }
                }
            }
            let table = Table::from_records(merged)?;
            table.store(&destination)?;
            out.kv("file", file.display());
            out.kv("added", added);
            out.kv("total", table.len());
            out.human(format!(
                "imported {added} new records ({} total) into {}",
                table.len(),
                destination.display()
            ));
        }
        TableAction::Verify => {
            let (table, _) = resolve_table(table_flag)?;
            let report = table.verify(opts)?;
            for quantity in &report.verified {
                let value = table
                    .get(*quantity, Status::Exact)
                    .expect("verified records are stored")
                    .value;
                out.kv("verified", quantity);
                out.human(format!("ok {quantity} = {value}"));
            }
            for (quantity, reason) in &report.skipped {
                out.kv("skipped", quantity);
                out.human(format!("skipped {quantity}: {reason}"));
            }
            out.kv("verified_count", report.verified.len());
            out.kv("skipped_count", report.skipped.len());
            out.human(format!(
                "verified = {}, skipped = {}",
                report.verified.len(),
                report.skipped.len()
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_grammar_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn joins_and_braces() {
        assert_eq!(join(&[1u64, 2, 4], ","), "1,2,4");
        assert_eq!(set_braces(&[1u64, 2, 4]), "{1, 2, 4}");
        assert_eq!(set_braces::<u64>(&[]), "{}");
    }

    #[test]
    fn value_enum_slugs_are_kebab_case() {
        assert_eq!(slug(FamilyArg::GpInt), "gp-int");
        assert_eq!(slug(FamilyArg::FriableGp3), "friable-gp3");
        assert_eq!(slug(BoundWhich::PrimePower), "prime-power");
        assert_eq!(slug(GridObject::Geoline), "geoline");
    }

    #[test]
    fn leading_term_skips_shallow_depths() {
        assert_eq!(leading_term(0, || unreachable!()).unwrap(), None);
        assert_eq!(leading_term(1, || unreachable!()).unwrap(), None);
        let head = leading_term(2, || {
            bounds::gp_int_asymptotic(3, &[1, 2, 6], 1)
        })
        .unwrap()
        .unwrap();
        assert_eq!(head, BigRational::new(BigInt::from(6), BigInt::from(7)));
    }
}
