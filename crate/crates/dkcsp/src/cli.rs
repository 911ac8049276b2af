//! Command-line front end: parse, generate, solve, estimate, bound, and
//! verify, with text or JSON-lines output.
//!
//! Exit codes: 0 on success (or a satisfying assignment found), 10 when a
//! randomized solver exhausted its trials without an assignment (unknown),
//! 20 when a verified property failed, 2 on usage or input errors. JSON
//! payloads carry `"schema": 1` and contain no timing fields, so identical
//! configurations produce byte-identical output for any worker count.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis;
use crate::bounds;
use crate::formula::{Assignment, Formula};
use crate::generators::{self, GenSpec};
use crate::solver;
use crate::submodular;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 10;
pub const EXIT_PROPERTY_FAILED: i32 = 20;

const JSON_SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "dkcsp",
    version,
    about = "(d,k)-CSP solving and success-probability analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Worker threads for randomized trials (0 = one per CPU).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Ppz,
    Schoening,
    Brute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Adaptive Simpson quadrature of g(d,k,r).
    Quadrature,
    /// Beta-function closed form.
    Beta,
    /// Monte Carlo sampling.
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Planted,
    PlantedUnique,
    DistinctCritical,
    Chain,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Bounds,
    SuccessBound,
    Jensen,
    Kraft,
    Gluing,
    Concave,
    Worstcase,
    Solver,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance file with a randomized or brute-force solver.
    Solve {
        #[arg(long, value_enum, default_value_t = Algo::Ppz)]
        algo: Algo,
        /// Trial count (restarts for the walk solver).
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Walk length for the walk solver; defaults to 3n.
        #[arg(long)]
        steps: Option<u64>,
        /// Stop at the first success instead of running all trials.
        #[arg(long)]
        stop_early: bool,
        instance: PathBuf,
    },
    /// Compute the per-variable success exponent G(d,k).
    Bound {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value_t = Method::Quadrature)]
        method: Method,
        /// Absolute quadrature tolerance.
        #[arg(long, default_value_t = bounds::DEFAULT_QUADRATURE_TOL)]
        tolerance: f64,
        /// Sample count for the Monte Carlo method.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Per-variable base comparison across (d,k) pairs.
    Table {
        /// Comma-separated pairs like 2:3,3:3,5:4,6:4.
        #[arg(long, value_delimiter = ',', required = true)]
        pairs: Vec<String>,
    },
    /// Monte Carlo estimate of the per-pass success probability.
    Estimate {
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also compute the exact value (small instances only).
        #[arg(long)]
        exact: bool,
        instance: PathBuf,
    },
    /// Run the property-verification suites.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Generate an instance file.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 3)]
        d: u32,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Constraint count (uniform family only).
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; omit to write the instance to stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Routes a parsed invocation and returns the process exit code.
pub fn dispatch(cli: Cli, out: &mut dyn Write) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
    {
        Ok(pool) => pool,
        Err(err) => {
            eprintln!("error: cannot build worker pool: {err}");
            return EXIT_USAGE;
        }
    };
    let format = cli.format;
    // Buffer inside the pool: the report is assembled on worker threads and
    // written out once, so output never interleaves.
    let (result, buffer) = pool.install(|| {
        let mut buffer = Vec::new();
        let result = run_command(cli.command, format, &mut buffer);
        (result, buffer)
    });
    if let Err(err) = out.write_all(&buffer) {
        eprintln!("error: cannot write output: {err}");
        return EXIT_USAGE;
    }
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn run_command(command: Command, format: OutputFormat, out: &mut dyn Write) -> Result<i32, String> {
    match command {
        Command::Solve {
            algo,
            trials,
            seed,
            steps,
            stop_early,
            instance,
        } => run_solve(algo, trials, seed, steps, stop_early, &instance, format, out),
        Command::Bound {
            d,
            k,
            method,
            tolerance,
            samples,
            seed,
        } => run_bound(d, k, method, tolerance, samples, seed, format, out),
        Command::Table { pairs } => run_table(&pairs, format, out),
        Command::Estimate {
            trials,
            seed,
            exact,
            instance,
        } => run_estimate(trials, seed, exact, &instance, format, out),
        Command::Verify { suite, seed } => run_verify(suite, seed, format, out),
        Command::Gen {
            family,
            d,
            k,
            n,
            m,
            seed,
            output,
        } => run_gen(family, d, k, n, m, seed, output.as_deref(), format, out),
    }
}

fn load_instance(path: &std::path::Path) -> Result<Formula, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| format!("cannot read {}: {err}", path.display()))?;
    Formula::parse(&text).map_err(|err| format!("{}: {err}", path.display()))
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), String> {
    out.write_all(text.as_bytes())
        .map_err(|err| format!("cannot write output: {err}"))
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    schema: u32,
    command: &'static str,
    algo: &'static str,
    instance: &'a str,
    d: u32,
    n: usize,
    constraints: usize,
    trials_run: u64,
    successes: u64,
    found: Option<&'a Assignment>,
    seed: u64,
    stop_early: bool,
}

#[allow(clippy::too_many_arguments)]
fn run_solve(
    algo: Algo,
    trials: u64,
    seed: u64,
    steps: Option<u64>,
    stop_early: bool,
    instance: &std::path::Path,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<i32, String> {
    if trials < 1 {
        return Err("solve requires at least one trial".into());
    }
    let f = load_instance(instance)?;
    let (algo_name, report) = match algo {
        Algo::Ppz => ("ppz", solver::ppz_solve(&f, trials, seed, stop_early)),
        Algo::Schoening => {
            let steps = steps.unwrap_or(3 * f.num_vars() as u64);
            (
                "schoening",
                solver::schoening_solve(&f, trials, steps, seed, stop_early),
            )
        }
        Algo::Brute => {
            let found = solver::brute_solve(&f).map_err(|err| err.to_string())?;
            let successes = u64::from(found.is_some());
            (
                "brute",
                solver::SolveReport {
                    found,
                    trials_run: 0,
                    successes,
                    seed,
                },
            )
        }
    };
    let code = if report.found.is_some() {
        EXIT_OK
    } else {
        EXIT_UNKNOWN
    };
    match format {
        OutputFormat::Json => {
            let payload = SolveOutput {
                schema: JSON_SCHEMA,
                command: "solve",
                algo: algo_name,
                instance: &instance.display().to_string(),
                d: f.d(),
                n: f.num_vars(),
                constraints: f.num_constraints(),
                trials_run: report.trials_run,
                successes: report.successes,
                found: report.found.as_ref(),
                seed: report.seed,
                stop_early,
            };
            let line = serde_json::to_string(&payload).map_err(|err| err.to_string())?;
            write_out(out, &line)?;
            write_out(out, "\n")?;
        }
        OutputFormat::Text => {
            let mut text = String::new();
            match &report.found {
                Some(a) => {
                    let _ = writeln!(
                        text,
                        "found {a} after {} {algo_name} trials ({} successes, seed {seed})",
                        report.trials_run, report.successes
                    );
                }
                None => {
                    let _ = writeln!(
                        text,
                        "no assignment found in {} {algo_name} trials (seed {seed})",
                        report.trials_run
                    );
                }
            }
            write_out(out, &text)?;
        }
    }
    Ok(code)
}

#[derive(Serialize)]
struct BoundOutput {
    schema: u32,
    command: &'static str,
    d: u32,
    k: u32,
    method: bounds::BoundMethod,
    exponent: f64,
    base: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_error: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn run_bound(
    d: u32,
    k: u32,
    method: Method,
    tolerance: f64,
    samples: u64,
    seed: u64,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<i32, String> {
    let (value, std_error) = match method {
        Method::Quadrature => (
            bounds::g_quadrature(d, k, tolerance).map_err(|err| err.to_string())?,
            None,
        ),
        Method::Beta => (bounds::g_closed_form(d, k).map_err(|err| err.to_string())?, None),
        Method::Mc => {
            let (value, stderr) =
                bounds::g_monte_carlo(d, k, samples, seed).map_err(|err| err.to_string())?;
            (value, Some(stderr))
        }
    };
    match format {
        OutputFormat::Json => {
            let payload = BoundOutput {
                schema: JSON_SCHEMA,
                command: "bound",
                d,
                k,
                method: value.method,
                exponent: value.exponent,
                base: value.base,
                std_error,
            };
            let line = serde_json::to_string(&payload).map_err(|err| err.to_string())?;
            write_out(out, &line)?;
            write_out(out, "\n")?;
        }
        OutputFormat::Text => {
            let method_name = match value.method {
                bounds::BoundMethod::Quadrature => "quadrature",
                bounds::BoundMethod::BetaClosedForm => "beta-closed-form",
                bounds::BoundMethod::MonteCarlo => "monte-carlo",
            };
            let mut text = format!(
                "G({d},{k}) = {:.6}, base {:.4} ({method_name})",
                value.exponent, value.base
            );
            if let Some(stderr) = std_error {
                let _ = write!(text, ", std error {stderr:.2e}");
            }
            text.push('\n');
            write_out(out, &text)?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct TableOutput {
    schema: u32,
    command: &'static str,
    rows: Vec<bounds::TableRow>,
}

fn parse_pairs(tokens: &[String]) -> Result<Vec<bounds::BoundSpec>, String> {
    tokens
        .iter()
        .map(|token| {
            let (d, k) = token
                .split_once(':')
                .ok_or_else(|| format!("pair \"{token}\" is not of the form d:k"))?;
            let d = d
                .parse::<u32>()
                .map_err(|_| format!("\"{d}\" is not an integer"))?;
            let k = k
                .parse::<u32>()
                .map_err(|_| format!("\"{k}\" is not an integer"))?;
            Ok(bounds::BoundSpec { d, k })
        })
        .collect()
}

fn run_table(pairs: &[String], format: OutputFormat, out: &mut dyn Write) -> Result<i32, String> {
    let pairs = parse_pairs(pairs)?;
    let rows = bounds::comparison_table(&pairs).map_err(|err| err.to_string())?;
    match format {
        OutputFormat::Json => {
            let payload = TableOutput {
                schema: JSON_SCHEMA,
                command: "table",
                rows,
            };
            let line = serde_json::to_string(&payload).map_err(|err| err.to_string())?;
            write_out(out, &line)?;
            write_out(out, "\n")?;
        }
        OutputFormat::Text => {
            let mut text = format!(
                "{:<8} {:<12} {:<12} {:<12}\n",
                "(d,k)", "schoening", "ppz", "suboptimal"
            );
            for row in &rows {
                let schoening = row
                    .schoening_base
                    .map(bounds::format_base)
                    .unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    text,
                    "{:<8} {:<12} {:<12} {:<12}",
                    format!("({},{})", row.d, row.k),
                    schoening,
                    bounds::format_base(row.ppz_base),
                    bounds::format_base(row.suboptimal_base),
                );
            }
            write_out(out, &text)?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    schema: u32,
    command: &'static str,
    instance: &'a str,
    trials: u64,
    successes: u64,
    estimate: f64,
    std_error: f64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<f64>,
}

fn run_estimate(
    trials: u64,
    seed: u64,
    exact: bool,
    instance: &std::path::Path,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<i32, String> {
    if trials < 1 {
        return Err("estimate requires at least one trial".into());
    }
    let f = load_instance(instance)?;
    let est = analysis::monte_carlo_success(&f, trials, seed);
    let exact_value = if exact {
        Some(analysis::exact_success_prob(&f).map_err(|err| err.to_string())?)
    } else {
        None
    };
    match format {
        OutputFormat::Json => {
            let payload = EstimateOutput {
                schema: JSON_SCHEMA,
                command: "estimate",
                instance: &instance.display().to_string(),
                trials: est.trials,
                successes: est.successes,
                estimate: est.estimate,
                std_error: est.std_error,
                seed,
                exact: exact_value,
            };
            let line = serde_json::to_string(&payload).map_err(|err| err.to_string())?;
            write_out(out, &line)?;
            write_out(out, "\n")?;
        }
        OutputFormat::Text => {
            let mut text = format!(
                "success estimate {:.6} +/- {:.6} ({}/{} trials, seed {seed})\n",
                est.estimate, est.std_error, est.successes, est.trials
            );
            if let Some(exact) = exact_value {
                let _ = writeln!(text, "exact success probability {exact:.12}");
            }
            write_out(out, &text)?;
        }
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn run_gen(
    family: Family,
    d: u32,
    k: usize,
    n: usize,
    m: usize,
    seed: u64,
    output: Option<&std::path::Path>,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<i32, String> {
    let spec = GenSpec { d, k, n, m, seed };
    let (family_name, formula) = match family {
        Family::Planted => ("planted", generators::planted_random(&spec)),
        Family::PlantedUnique => ("planted-unique", generators::planted_unique(&spec, 1000)),
        Family::DistinctCritical => ("distinct-critical", generators::distinct_critical(&spec)),
        Family::Chain => ("chain", generators::constant_x_chain(n)),
        Family::Uniform => ("uniform", generators::uniform_random(&spec)),
    };
    let formula = formula.map_err(|err| err.to_string())?;
    let text = formula.to_instance_string();
    if let Some(path) = output {
        std::fs::write(path, &text)
            .map_err(|err| format!("cannot write {}: {err}", path.display()))?;
    }
    match format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct GenOutput<'a> {
                schema: u32,
                command: &'static str,
                family: &'static str,
                d: u32,
                n: usize,
                constraints: usize,
                seed: u64,
                #[serde(skip_serializing_if = "Option::is_none")]
                path: Option<String>,
                #[serde(skip_serializing_if = "Option::is_none")]
                instance: Option<&'a str>,
            }
            let payload = GenOutput {
                schema: JSON_SCHEMA,
                command: "gen",
                family: family_name,
                d: formula.d(),
                n: formula.num_vars(),
                constraints: formula.num_constraints(),
                seed,
                path: output.map(|p| p.display().to_string()),
                instance: output.is_none().then_some(text.as_str()),
            };
            let line = serde_json::to_string(&payload).map_err(|err| err.to_string())?;
            write_out(out, &line)?;
            write_out(out, "\n")?;
        }
        OutputFormat::Text => {
            if output.is_none() {
                write_out(out, &text)?;
            }
        }
    }
    Ok(EXIT_OK)
}

/// One verification check: a named pass/fail with detail.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(suite: &'static str, check: impl Into<String>, pass: bool, detail: String) -> Self {
        CheckOutcome {
            suite,
            check: check.into(),
            pass,
            detail,
        }
    }
}

fn run_verify(
    suite: Suite,
    seed: u64,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<i32, String> {
    let mut checks = Vec::new();
    let run_all = suite == Suite::All;
    if run_all || suite == Suite::Bounds {
        checks.extend(verify_bounds_suite(seed));
    }
    if run_all || suite == Suite::SuccessBound {
        checks.extend(verify_success_bound_suite(seed).map_err(|err| err.to_string())?);
    }
    if run_all || suite == Suite::Jensen {
        checks.extend(verify_jensen_suite(seed).map_err(|err| err.to_string())?);
    }
    if run_all || suite == Suite::Kraft {
        checks.extend(verify_kraft_suite(seed).map_err(|err| err.to_string())?);
    }
    if run_all || suite == Suite::Gluing {
        checks.extend(verify_gluing_suite(seed).map_err(|err| err.to_string())?);
    }
    if run_all || suite == Suite::Concave {
        checks.extend(verify_concave_suite(seed).map_err(|err| err.to_string())?);
    }
    if run_all || suite == Suite::Worstcase {
        checks.extend(verify_worstcase_suite(seed).map_err(|err| err.to_string())?);
    }
    if run_all || suite == Suite::Solver {
        checks.extend(verify_solver_suite(seed).map_err(|err| err.to_string())?);
    }

    let mut all_pass = true;
    for check in &checks {
        all_pass &= check.pass;
        match format {
            OutputFormat::Json => {
                #[derive(Serialize)]
                struct VerifyLine<'a> {
                    schema: u32,
                    command: &'static str,
                    suite: &'static str,
                    check: &'a str,
                    pass: bool,
                    detail: &'a str,
                }
                let line = serde_json::to_string(&VerifyLine {
                    schema: JSON_SCHEMA,
                    command: "verify",
                    suite: check.suite,
                    check: &check.check,
                    pass: check.pass,
                    detail: &check.detail,
                })
                .map_err(|err| err.to_string())?;
                write_out(out, &line)?;
                write_out(out, "\n")?;
            }
            OutputFormat::Text => {
                let status = if check.pass { "PASS" } else { "FAIL" };
                write_out(
                    out,
                    &format!(
                        "{status} {}/{}: {}\n",
                        check.suite, check.check, check.detail
                    ),
                )?;
            }
        }
    }
    if format == OutputFormat::Text {
        let passed = checks.iter().filter(|c| c.pass).count();
        write_out(out, &format!("{passed}/{} checks passed\n", checks.len()))?;
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_PROPERTY_FAILED })
}

fn verify_bounds_suite(seed: u64) -> Vec<CheckOutcome> {
    const SUITE: &str = "bounds";
    let mut checks = Vec::new();

    let quad = bounds::g_quadrature(2, 3, bounds::DEFAULT_QUADRATURE_TOL).unwrap();
    let beta = bounds::g_closed_form(2, 3).unwrap();
    let pass = (quad.exponent - 2.0 / 3.0).abs() <= 1e-9 && (beta.exponent - 2.0 / 3.0).abs() <= 1e-9;
    checks.push(CheckOutcome::new(
        SUITE,
        "g23-equals-two-thirds",
        pass,
        format!(
            "quadrature {:.12}, beta {:.12}, base {}",
            quad.exponent,
            beta.exponent,
            bounds::format_base(quad.base)
        ),
    ));

    let mut worst: f64 = 0.0;
    for d in 2..=8 {
        for k in 2..=6 {
            let q = bounds::g_quadrature(d, k, bounds::DEFAULT_QUADRATURE_TOL).unwrap();
            let b = bounds::g_closed_form(d, k).unwrap();
            worst = worst.max((q.exponent - b.exponent).abs());
        }
    }
    checks.push(CheckOutcome::new(
        SUITE,
        "dual-method-agreement",
        worst <= 1e-8,
        format!("max |quadrature - beta| = {worst:.3e} over 2<=d<=8, 2<=k<=6"),
    ));

    let mut pass = true;
    let mut detail = String::new();
    for (d, k, r) in [(2, 3, 0.5), (3, 3, 0.3), (5, 4, 0.7), (6, 4, 0.5)] {
        let exact = bounds::g_of_r(d, k, r).unwrap();
        let (mean, stderr) = bounds::g_monte_carlo_point(d, k, r, 1_000_000, seed).unwrap();
        let ok = (mean - exact).abs() <= 4.0 * stderr.max(1e-9);
        pass &= ok;
        let _ = write!(detail, "({d},{k},{r}): |{mean:.5}-{exact:.5}|<=4se; ");
    }
    checks.push(CheckOutcome::new(
        SUITE,
        "g-monte-carlo-consistency",
        pass,
        detail,
    ));

    let mut pass = true;
    for (d, k) in [(2u32, 3u32), (3, 3), (5, 4), (6, 4)] {
        let mut prev = f64::INFINITY;
        for i in 0..=1000 {
            let g = bounds::g_of_r(d, k, i as f64 / 1000.0).unwrap();
            pass &= g <= prev + 1e-12;
            prev = g;
        }
    }
    checks.push(CheckOutcome::new(
        SUITE,
        "g-nonincreasing-in-r",
        pass,
        "1000-point grid for (2,3),(3,3),(5,4),(6,4)".into(),
    ));

    let mut pass = true;
    for d in 1..=10u32 {
        for k in 1..=8u32 {
            let g = bounds::g_closed_form(d, k).unwrap().exponent;
            pass &= g >= -1e-12 && g <= (d as f64).log2() + 1e-10;
            pass &= g <= bounds::suboptimal_exponent(d, k) + 1e-10;
        }
    }
    checks.push(CheckOutcome::new(
        SUITE,
        "exponent-sandwich",
        pass,
        "0 <= G(d,k) <= min(log2 d, weaker bound) for d<=10, k<=8".into(),
    ));

    checks
}

fn verify_success_bound_suite(seed: u64) -> crate::Result<Vec<CheckOutcome>> {
    const SUITE: &str = "success-bound";
    let corpus = generators::verification_corpus(seed, 50)?;
    let mut pass = true;
    let mut worst = f64::INFINITY;
    for instance in &corpus {
        let g = bounds::g_closed_form(instance.spec.d, instance.spec.k as u32)?.exponent;
        let bound = (-(instance.formula.num_vars() as f64) * g).exp2();
        let exact = analysis::exact_success_prob(&instance.formula)?;
        let margin = exact - bound;
        worst = worst.min(margin);
        pass &= margin >= -analysis::INEQUALITY_TOL;
    }
    Ok(vec![CheckOutcome::new(
        SUITE,
        "success-dominates-bound",
        pass,
        format!(
            "{} satisfiable instances, min(exact - 2^(-nG)) = {worst:.3e}",
            corpus.len()
        ),
    )])
}

fn verify_jensen_suite(seed: u64) -> crate::Result<Vec<CheckOutcome>> {
    const SUITE: &str = "jensen";
    let mut checks = Vec::new();

    let chain = generators::constant_x_chain(4)?;
    let report = analysis::verify_jensen_bound(&chain)?;
    let gap = report.entries[0].jensen_gap.abs();
    checks.push(CheckOutcome::new(
        SUITE,
        "chain-equality",
        report.holds && gap <= analysis::INEQUALITY_TOL,
        format!("constant guess count makes both sides equal; |gap| = {gap:.3e}"),
    ));

    let corpus = generators::verification_corpus(seed, 50)?;
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut assignments = 0usize;
    for instance in &corpus {
        let report = analysis::verify_jensen_bound(&instance.formula)?;
        assignments += report.entries.len();
        pass &= report.holds;
        worst = worst.min(report.worst_gap);
    }
    checks.push(CheckOutcome::new(
        SUITE,
        "return-prob-dominates-jensen-bound",
        pass,
        format!(
            "{} instances / {assignments} satisfying assignments, worst gap {worst:.3e}",
            corpus.len()
        ),
    ));
    Ok(checks)
}

fn verify_kraft_suite(seed: u64) -> crate::Result<Vec<CheckOutcome>> {
    const SUITE: &str = "kraft";
    let mut checks = Vec::new();

    // Equality cases: unique satisfying assignment and the empty formula.
    let unique = generators::planted_unique(
        &GenSpec {
            d: 2,
            k: 3,
            n: 6,
            m: 0,
            seed,
        },
        1000,
    )?;
    let report = analysis::verify_kraft(&unique)?;
    checks.push(CheckOutcome::new(
        SUITE,
        "unique-sat-equality",
        report.holds && report.exactly_one,
        format!("sum = {} (exact one: {})", report.sum, report.exactly_one),
    ));
    let report = analysis::verify_kraft(&Formula::empty(3, 4))?;
    checks.push(CheckOutcome::new(
        SUITE,
        "empty-formula-equality",
        report.holds && report.exactly_one,
        format!("sum = {} (exact one: {})", report.sum, report.exactly_one),
    ));

    let mut pass = true;
    let mut min_sum = f64::INFINITY;
    let mut count = 0;
    let mut attempt = 0;
    while count < 100 {
        let spec = GenSpec {
            d: 3,
            k: 3,
            n: 6,
            m: 14,
            seed: seed.wrapping_add(1000 + attempt),
        };
        attempt += 1;
        let f = generators::uniform_random(&spec)?;
        if solver::brute_solve(&f)?.is_none() {
            continue;
        }
        let report = analysis::verify_kraft(&f)?;
        pass &= report.holds;
        min_sum = min_sum.min(report.sum);
        count += 1;
    }
    checks.push(CheckOutcome::new(
        SUITE,
        "random-satisfiable-sums",
        pass,
        format!("100 satisfiable instances, min sum = {min_sum:.6}"),
    ));
    Ok(checks)
}

fn verify_gluing_suite(seed: u64) -> crate::Result<Vec<CheckOutcome>> {
    const SUITE: &str = "gluing";
    let mut checks = Vec::new();

    let or = submodular::CubeFunction::or_function(3);
    checks.push(CheckOutcome::new(
        SUITE,
        "or-is-submodular",
        submodular::is_monotone(&or) && submodular::is_submodular(&or)?,
        "OR on 3 bits is monotone and submodular".into(),
    ));

    let and = submodular::CubeFunction::and_function(2);
    let witness = submodular::submodular_counterexample(&and)?;
    let pass = matches!(witness, Some(v) if (v.x.min(v.y), v.x.max(v.y)) == (0b01, 0b10));
    checks.push(CheckOutcome::new(
        SUITE,
        "and-counterexample",
        pass,
        format!("witness {witness:?} (expected the pair (0,1),(1,0))"),
    ));

    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut rng = solver::trial_rng(seed, 100);
    let mut pass = true;
    use rand::Rng;
    for _ in 0..500 {
        let m = rng.random_range(2..=4);
        let f = submodular::random_monotone_submodular(m, &mut rng);
        let gluing = submodular::random_gluing(m, &mut rng);
        let report = submodular::verify_gluing_lemma(&f, &gluing, &grid)?;
        pass &= report.holds;
    }
    checks.push(CheckOutcome::new(
        SUITE,
        "random-submodular-gluings",
        pass,
        "500 random submodular functions x random gluings x 11-point p grid".into(),
    ));

    // The submodularity precondition is necessary.
    let both = submodular::GluingMap::from_pairs(2, &[(0, 1)])?;
    let independent = submodular::expect(&and, 0.5, None)?;
    let glued = submodular::expect(&and, 0.5, Some(&both))?;
    checks.push(CheckOutcome::new(
        SUITE,
        "and-violates-without-submodularity",
        independent < glued,
        format!("E[AND] = {independent} < E[glued AND] = {glued}"),
    ));
    Ok(checks)
}

fn verify_concave_suite(seed: u64) -> crate::Result<Vec<CheckOutcome>> {
    const SUITE: &str = "concave";
    let mut checks = Vec::new();

    let f = submodular::CubeFunction::from_fn(3, |m| 1.0 + m.count_ones() as f64)?;
    let report = submodular::verify_concave_composition(&f, |t| t.log2())?;
    checks.push(CheckOutcome::new(
        SUITE,
        "log2-of-one-plus-sum",
        report.holds,
        "log2(1 + sum of 3 bits) is monotone and submodular".into(),
    ));

    let mut rng = solver::trial_rng(seed, 200);
    use rand::Rng;
    let mut pass = true;
    for _ in 0..200 {
        let m = rng.random_range(2..=4);
        let f = submodular::random_monotone_submodular(m, &mut rng);
        let report = submodular::verify_concave_composition(&f, |t| t.sqrt())?;
        pass &= report.holds;
    }
    checks.push(CheckOutcome::new(
        SUITE,
        "sqrt-composition-closure",
        pass,
        "200 random monotone submodular functions composed with sqrt".into(),
    ));
    Ok(checks)
}

fn verify_worstcase_suite(seed: u64) -> crate::Result<Vec<CheckOutcome>> {
    const SUITE: &str = "worstcase";
    let mut checks = Vec::new();

    let mut pass = true;
    for d in 1..=4u32 {
        for ell in 1..=d {
            for k in 2..=3u32 {
                let f = submodular::build_worstcase_f(d, k, ell)?;
                pass &= submodular::is_monotone(&f) && submodular::is_submodular(&f)?;
            }
        }
    }
    checks.push(CheckOutcome::new(
        SUITE,
        "worstcase-function-properties",
        pass,
        "log2(ell + #fired blocks) monotone+submodular for ell<=d<=4, k in {2,3}".into(),
    ));

    let mut rng = solver::trial_rng(seed, 300);
    use rand::Rng;
    let mut pass = true;
    let mut equality_pass = true;
    for _ in 0..1000 {
        let d = rng.random_range(1..=4u32);
        let ell = rng.random_range(1..=d);
        let k = rng.random_range(2..=3u32);
        let arity = ((d - ell) * (k - 1)) as usize;
        let gluing = submodular::random_gluing(arity, &mut rng);
        let identity = gluing.is_identity();
        for i in 0..=100 {
            let spec = submodular::WorstCaseSpec {
                d,
                k,
                ell,
                gluing: gluing.clone(),
                r: i as f64 / 100.0,
            };
            let report = submodular::verify_independence_worst_case(&spec)?;
            pass &= report.holds;
            if identity {
                equality_pass &=
                    (report.glued - report.independent).abs() <= submodular::INEQUALITY_TOL;
            }
        }
    }
    checks.push(CheckOutcome::new(
        SUITE,
        "independence-is-worst-case",
        pass,
        "1000 random (d,k,ell,gluing) specs x 101-point r grid".into(),
    ));
    checks.push(CheckOutcome::new(
        SUITE,
        "no-gluing-equality",
        equality_pass,
        "identity gluings match the binomial side exactly".into(),
    ));
    Ok(checks)
}

fn verify_solver_suite(seed: u64) -> crate::Result<Vec<CheckOutcome>> {
    const SUITE: &str = "solver";
    let mut checks = Vec::new();

    // One-sided error: brute-force-certified unsatisfiable instances never
    // produce an assignment.
    let mut unsat: Vec<Formula> = Vec::new();
    let mut attempt = 0;
    while unsat.len() < 5 {
        let spec = GenSpec {
            d: 2,
            k: 2,
            n: 5,
            m: 18,
            seed: seed.wrapping_add(400 + attempt),
        };
        attempt += 1;
        let f = generators::uniform_random(&spec)?;
        if solver::brute_solve(&f)?.is_none() {
            unsat.push(f);
        }
    }
    let mut pass = true;
    for f in &unsat {
        let report = solver::ppz_solve(f, 2000, seed, false);
        pass &= report.found.is_none() && report.successes == 0;
    }
    checks.push(CheckOutcome::new(
        SUITE,
        "one-sided-error",
        pass,
        format!("{} unsat instances x 2000 trials, no assignment returned", unsat.len()),
    ));

    // Estimator consistency against the exact value on the running example.
    let f = Formula::parse("p csp 3 3 2\n1!=2 2!=1 0\n1!=3 3!=1 0")?;
    let exact = analysis::exact_success_prob(&f)?;
    let est = analysis::monte_carlo_success(&f, 1_000_000, seed);
    let sigma = (exact * (1.0 - exact) / 1e6).sqrt();
    let pass = (est.estimate - exact).abs() <= 4.0 * sigma.max(1e-9);
    checks.push(CheckOutcome::new(
        SUITE,
        "estimator-matches-exact",
        pass,
        format!("estimate {:.6} vs exact {exact:.6}", est.estimate),
    ));

    // Determinism across worker counts.
    let chain = generators::constant_x_chain(6)?;
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("pool")
        .install(|| solver::ppz_solve(&chain, 5000, seed, false));
    let eight = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .expect("pool")
        .install(|| solver::ppz_solve(&chain, 5000, seed, false));
    checks.push(CheckOutcome::new(
        SUITE,
        "worker-count-determinism",
        single == eight,
        "identical reports with 1 and 8 workers".into(),
    ));
    Ok(checks)
}
