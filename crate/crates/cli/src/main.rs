//! `lincon`: solve, verify, generate and benchmark linear-contract instances.
//!
//! Exit codes: 0 on success, 1 when a verification or bench run fails, 2 on
//! usage, parse and unsupported-pairing errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lincon::approx::{scale_set_traced, ScalingParams};
use lincon::bench::{run_bench, BenchConfig, BenchFamily};
use lincon::contract::is_equilibrium;
use lincon::format::{parse_instance, write_instance};
use lincon::instances::{
    gen_random, gen_subadditive_lb, gen_xos_lb, gen_xos_lb_clauses, BumpChoice, RandomKind,
    RandomParams,
};
use lincon::scalar::{format_rational, parse_rational};
use lincon::verify::{
    brute_force_opt, check_class, check_decomposition_lemma, check_half_value_lemma,
    check_marginal_lemma, check_scaling_output, check_sqrt_cost_lemma, verify_lb_family,
    FunctionClass,
};
use lincon::{
    additive::partition_instance, solve, AgentSet, Algorithm, Error, Instance, Rational, Scalar,
    SolveOptions, SolveReport,
};

#[derive(Parser)]
#[command(name = "lincon", version, about = "Linear contracts for multi-agent principal-agent problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arith {
    /// Exact for brute/fptas/single, floating point for xos/submod.
    Auto,
    Exact,
    Float,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Check {
    Class,
    Lemma21,
    Lemma31,
    Lemma32,
    Lemma33,
    Scaling,
    LbFamily,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a contract for an instance file.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "brute")]
        alg: String,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.01)]
        xi: f64,
        #[arg(long, value_enum, default_value_t = Arith::Auto)]
        arith: Arith,
        /// Also run brute force and report g* and the ratio.
        #[arg(long)]
        compare: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check structural claims about an instance.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        check: Check,
        /// Class for `--check class`; all classes are reported when omitted.
        #[arg(long)]
        class: Option<String>,
        #[arg(long, default_value_t = 4096)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Target Ψ for `--check scaling` (default f(T)/2).
        #[arg(long)]
        psi: Option<String>,
        /// δ for `--check scaling`.
        #[arg(long, default_value = "1/2")]
        delta: String,
        /// Input set T for `--check scaling`, e.g. `0,2,5` (default: everyone).
        #[arg(long)]
        set: Option<String>,
    },
    /// Write a generated instance.
    Generate {
        /// subadditive-lb | xos-lb | xos-lb-clauses | partition | random-additive |
        /// random-coverage | random-xos-clauses
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// PARTITION weights, e.g. `1,1,2`.
        #[arg(long)]
        weights: Option<String>,
        /// Distinguished set of a lower-bound family (instead of a seeded one).
        #[arg(long)]
        bump_set: Option<String>,
        #[arg(long)]
        universe: Option<usize>,
        #[arg(long)]
        cover_prob: Option<f64>,
        #[arg(long)]
        clauses: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark sweep.
    Bench {
        /// Comma-separated families.
        #[arg(long)]
        families: String,
        /// Comma-separated sizes.
        #[arg(long)]
        sizes: String,
        /// Seeds as a list `1,2,3` or a range `0..100`.
        #[arg(long, default_value = "0..10")]
        seeds: String,
        /// Comma-separated algorithms.
        #[arg(long, default_value = "brute,xos,submod,single")]
        algs: String,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.01)]
        xi: f64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    /// Exit 1.
    Verification(String),
    /// Exit 2.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::RunFailed { .. } => Failure::Verification(e.to_string()),
            other => Failure::Usage(other.to_string()),
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
        Command::Solve {
            input,
            alg,
            epsilon,
            xi,
            arith,
            compare,
            format,
            out,
        } => cmd_solve(&input, &alg, SolveOptions { epsilon, xi }, arith, compare, format, out),
        Command::Verify {
            input,
            check,
            class,
            trials,
            seed,
            psi,
            delta,
            set,
        } => cmd_verify(&input, check, class, trials, seed, psi, &delta, set),
        Command::Generate {
            family,
            n,
            seed,
            weights,
            bump_set,
            universe,
            cover_prob,
            clauses,
            out,
        } => {
            let mut random = RandomParams::default();
            random.universe = universe.unwrap_or(random.universe);
            random.cover_prob = cover_prob.unwrap_or(random.cover_prob);
            random.clauses = clauses.unwrap_or(random.clauses);
            cmd_generate(&family, n, seed, weights, bump_set, &random, out)
        }
        Command::Bench {
            families,
            sizes,
            seeds,
            algs,
            epsilon,
            xi,
            workers,
            format,
            out,
        } => cmd_bench(&families, &sizes, &seeds, &algs, SolveOptions { epsilon, xi }, workers, format, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("lincon: verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("lincon: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_instance(path: &PathBuf) -> CliResult<Instance<Rational>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_instance(&text)?)
}

fn emit(text: &str, out: Option<PathBuf>) -> CliResult {
    match out {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_list<T: std::str::FromStr>(what: &str, text: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| usage(format!("bad {what} {s:?}"))))
        .collect()
}

fn parse_set(n: usize, text: &str) -> CliResult<AgentSet> {
    Ok(AgentSet::from_indices(n, parse_list::<usize>("agent", text)?)?)
}

/// `p/q = decimal` when the decimal form hides the fraction.
fn exact(q: &Rational) -> String {
    let text = format_rational(q);
    if q.is_integer() || text.contains('/') {
        text
    } else {
        format!("{}/{} = {text}", q.numer(), q.denom())
    }
}

fn cmd_solve(
    input: &PathBuf,
    alg: &str,
    opts: SolveOptions,
    arith: Arith,
    compare: bool,
    format: Format,
    out: Option<PathBuf>,
) -> CliResult {
    let alg: Algorithm = alg.parse()?;
    let inst = read_instance(input)?;
    let exact = match arith {
        Arith::Exact => true,
        Arith::Float => false,
        Arith::Auto => matches!(alg, Algorithm::Brute | Algorithm::Fptas | Algorithm::Single),
    };
    if exact {
        solve_and_emit(&inst, alg, &opts, compare, format, out)
    } else {
        solve_and_emit(&inst.map(Scalar::to_f64), alg, &opts, compare, format, out)
    }
}

fn solve_and_emit<T: Scalar>(
    inst: &Instance<T>,
    alg: Algorithm,
    opts: &SolveOptions,
    compare: bool,
    format: Format,
    out: Option<PathBuf>,
) -> CliResult {
    let mut report: SolveReport<T> = solve(inst, alg, opts)?;
    if !is_equilibrium(inst, &report.contract) {
        return Err(Failure::Verification(format!(
            "the contract for {} is not an equilibrium",
            report.set()
        )));
    }
    if alg == Algorithm::Brute {
        let g = report.g.clone();
        report.compare_with(g);
    } else if compare {
        let opt = brute_force_opt(inst)?;
        report.compare_with(opt.g);
    }
    let text = match format {
        Format::Text => report.to_string(),
        Format::Structured => report.to_structured(),
    };
    emit(&text, out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    input: &PathBuf,
    check: Check,
    class: Option<String>,
    trials: usize,
    seed: u64,
    psi: Option<String>,
    delta: &str,
    set: Option<String>,
) -> CliResult {
    let inst = read_instance(input)?;
    let n = inst.n();
    let mut out = String::new();
    let mut failed: Option<String> = None;
    let mut fail = |msg: String| {
        failed.get_or_insert(msg);
    };
    match check {
        Check::Class => {
            let classes = match &class {
                Some(name) => vec![FunctionClass::ALL
                    .into_iter()
                    .find(|c| c.name() == name)
                    .ok_or_else(|| usage(format!("unknown class {name:?}")))?],
                None => FunctionClass::ALL.to_vec(),
            };
            for c in classes {
                match check_class(&inst.reward, c) {
                    Ok(rep) => {
                        let verdict = if rep.passed() { "PASS" } else { "FAIL" };
                        writeln!(out, "{}: {verdict} ({:?}, {} checks)", c.name(), rep.method, rep.checked).ok();
                        if let Some(w) = &rep.witness {
                            writeln!(out, "  witness: {w:?}").ok();
                            if class.is_some() {
                                fail(format!("{} check failed: {w:?}", c.name()));
                            }
                        }
                    }
                    Err(Error::Unsupported(msg)) if class.is_none() => {
                        writeln!(out, "{}: skipped ({msg})", c.name()).ok();
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        Check::Lemma21 => {
            let rep = check_marginal_lemma(&inst.reward, trials, seed);
            writeln!(
                out,
                "marginal sums Σ f(i|T∖i) ≤ f(S) for S ⊆ T: {} pairs ({})",
                rep.checked,
                if rep.exhaustive { "exhaustive" } else { "sampled" }
            )
            .ok();
            if let Some(v) = rep.violation {
                fail(format!("violated at S = {}, T = {}", v[0], v[1]));
            }
        }
        Check::Lemma31 | Check::Lemma32 => {
            let opt = brute_force_opt(&inst)?;
            writeln!(out, "S* = {}, g* = {}", opt.set, opt.g).ok();
            if check == Check::Lemma31 {
                let ok = check_decomposition_lemma(&inst, &opt);
                writeln!(out, "g* ≤ f(S* ∩ A') + max(0, max_i g({{i}})): {}", if ok { "holds" } else { "violated" }).ok();
                if !ok {
                    fail("decomposition bound violated".into());
                }
            } else {
                let rep = check_sqrt_cost_lemma(&inst, &opt.set);
                writeln!(out, "Σ √c_i ≤ √f(S) for S ⊆ S*: {} subsets", rep.checked).ok();
                if let Some(v) = rep.violation {
                    fail(format!("violated at S = {}", v[0]));
                }
            }
        }
        Check::Lemma33 => {
            let rep = check_half_value_lemma(&inst, trials, seed);
            writeln!(
                out,
                "g(S) ≥ f(S)/2 under the marginal hypothesis: {} sets, {} meet the hypothesis",
                rep.checked, rep.hypothesis_met
            )
            .ok();
            if let Some(v) = rep.violation {
                fail(format!("violated at S = {}", v[0]));
            }
        }
        Check::Scaling => {
            let t = match &set {
                Some(text) => parse_set(n, text)?,
                None => AgentSet::full(n),
            };
            let ft = inst.reward.value(&t);
            let psi = match &psi {
                Some(text) => parse_rational(text)?,
                None => ft / Rational::from_integer(2.into()),
            };
            let params = ScalingParams {
                psi,
                delta: parse_rational(delta)?,
            };
            let oracle = lincon::Oracle::new(&inst.reward);
            let trace = scale_set_traced(&oracle, &t, &params)?;
            writeln!(
                out,
                "T = {t}, Ψ = {}, δ = {}: U = {}, f(U) = {} (j* = {}, k* = {}, t* = {})",
                format_rational(&params.psi),
                format_rational(&params.delta),
                trace.output,
                format_rational(&inst.reward.value(&trace.output)),
                trace.j_star,
                trace.k_star,
                trace.t_star
            )
            .ok();
            if let Some(v) = check_scaling_output(&inst.reward, &t, &params, &trace.output) {
                fail(format!("{v:?}"));
            }
        }
        Check::LbFamily => {
            let check = verify_lb_family(&inst)?;
            let r = &check.report;
            let show = |g: &lincon::Utility<Rational>| g.finite().map_or("-inf".into(), exact);
            writeln!(out, "family: {}", check.family.name()).ok();
            writeln!(out, "T = {}", r.bump_set).ok();
            writeln!(out, "g_T(T) = {}", show(&r.g_bump_set)).ok();
            writeln!(out, "max-other = {} at {}", show(&r.g_best_other), r.best_other).ok();
            writeln!(out, "per-cardinality maxima over S ≠ T:").ok();
            for (k, g) in r.per_cardinality.iter().enumerate() {
                writeln!(out, "  |S| = {k}: {}", show(g)).ok();
            }
            for c in &check.claims {
                let verdict = match (c.holds, c.binding) {
                    (true, _) => "PASS",
                    (false, true) => "FAIL",
                    (false, false) => "not at this n",
                };
                writeln!(out, "{}: {verdict} ({})", c.statement, c.detail).ok();
                if !c.holds && c.binding {
                    fail(c.statement.clone());
                }
            }
        }
    }
    print!("{out}");
    match failed {
        None => Ok(()),
        Some(msg) => Err(Failure::Verification(msg)),
    }
}

fn cmd_generate(
    family: &str,
    n: Option<usize>,
    seed: u64,
    weights: Option<String>,
    bump_set: Option<String>,
    random: &RandomParams,
    out: Option<PathBuf>,
) -> CliResult {
    let need_n = || n.ok_or_else(|| usage(format!("--n is required for {family}")));
    let choice = |n: usize| -> CliResult<BumpChoice> {
        Ok(match &bump_set {
            Some(text) => BumpChoice::Given(parse_set(n, text)?),
            None => BumpChoice::Seed(seed),
        })
    };
    let inst = match family {
        "subadditive-lb" => {
            let n = need_n()?;
            gen_subadditive_lb(n, &choice(n)?)?
        }
        "xos-lb" => {
            let n = need_n()?;
            gen_xos_lb(n, &choice(n)?)?
        }
        "xos-lb-clauses" => {
            let n = need_n()?;
            gen_xos_lb_clauses(n, &choice(n)?)?
        }
        "partition" => {
            let text = weights.ok_or_else(|| usage("--weights is required for partition"))?;
            partition_instance(&parse_list::<u64>("weight", &text)?)?
        }
        other => {
            let kind = other
                .strip_prefix("random-")
                .ok_or_else(|| usage(format!("unknown family {other:?}")))?;
            gen_random(RandomKind::parse(kind)?, need_n()?, seed, random)?
        }
    };
    emit(&write_instance(&inst), out)
}

fn parse_seeds(text: &str) -> CliResult<Vec<u64>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| usage(format!("bad seed range {text:?}")))?;
        let b: u64 = b.trim().parse().map_err(|_| usage(format!("bad seed range {text:?}")))?;
        return Ok((a..b).collect());
    }
    parse_list("seed", text)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    families: &str,
    sizes: &str,
    seeds: &str,
    algs: &str,
    options: SolveOptions,
    workers: Option<usize>,
    format: Format,
    out: Option<PathBuf>,
) -> CliResult {
    let families = families
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| BenchFamily::parse(s.strip_prefix("random-").unwrap_or(s)))
        .collect::<Result<Vec<_>, _>>()?;
    let config = BenchConfig {
        families,
        sizes: parse_list("size", sizes)?,
        seeds: parse_seeds(seeds)?,
        algorithms: parse_list::<String>("algorithm", algs)?
            .iter()
            .map(|a| a.parse::<Algorithm>())
            .collect::<Result<Vec<_>, _>>()?,
        options,
        random: RandomParams::default(),
        workers,
    };
    let report = run_bench(&config)?;
    let text = match format {
        Format::Text => report.to_text(),
        Format::Structured => report.to_structured(),
    };
    emit(&text, out)
}
