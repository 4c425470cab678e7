//! Benchmark sweeps over families × sizes × seeds × algorithms.
//!
//! Jobs run on a rayon pool sized by `LINCON_WORKERS` (default: all cores);
//! rows come back in job order, and the structured output carries no timings,
//! so it is byte-identical across runs and worker counts.

use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;

use crate::contract::{is_equilibrium, Instance};
use crate::error::{Error, Result};
use crate::instances::{
    gen_random, gen_subadditive_lb, gen_xos_lb, BumpChoice, RandomKind, RandomParams,
    SUBADDITIVE_LB, XOS_LB,
};
use crate::report::Algorithm;
use crate::scalar::{Rational, Scalar, Utility};
use crate::solve::{solve, SolveOptions};
use crate::verify::brute_force_opt;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "LINCON_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchFamily {
    Random(RandomKind),
    SubadditiveLb,
    XosLb,
}

impl BenchFamily {
    pub fn name(self) -> &'static str {
        match self {
            BenchFamily::Random(kind) => kind.name(),
            BenchFamily::SubadditiveLb => SUBADDITIVE_LB,
            BenchFamily::XosLb => XOS_LB,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            SUBADDITIVE_LB => Ok(BenchFamily::SubadditiveLb),
            XOS_LB => Ok(BenchFamily::XosLb),
            other => RandomKind::parse(other)
                .map(BenchFamily::Random)
                .map_err(|_| Error::Parameter(format!("unknown family {other:?}"))),
        }
    }

    pub fn generate(self, n: usize, seed: u64, params: &RandomParams) -> Result<Instance<Rational>> {
        match self {
            BenchFamily::Random(kind) => gen_random(kind, n, seed, params),
            BenchFamily::SubadditiveLb => gen_subadditive_lb(n, &BumpChoice::Seed(seed)),
            BenchFamily::XosLb => gen_xos_lb(n, &BumpChoice::Seed(seed)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub families: Vec<BenchFamily>,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    pub options: SolveOptions,
    pub random: RandomParams,
    /// Overrides `LINCON_WORKERS`.
    pub workers: Option<usize>,
}

impl BenchConfig {
    fn validate(&self) -> Result<()> {
        let empty = [
            (self.families.is_empty(), "family"),
            (self.sizes.is_empty(), "size"),
            (self.seeds.is_empty(), "seed"),
            (self.algorithms.is_empty(), "algorithm"),
        ];
        match empty.iter().find(|(e, _)| *e) {
            Some((_, what)) => Err(Error::Parameter(format!("bench needs at least one {what}"))),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub family: String,
    pub n: usize,
    pub seed: u64,
    pub algorithm: String,
    /// `g` of the returned contract; `None` for `-∞` or a failed run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub value_queries: u64,
    pub demand_queries: u64,
    pub approx_demand_queries: u64,
    /// Shown in text output only; structured reports stay reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchSummary {
    pub family: String,
    pub algorithm: String,
    pub runs: usize,
    /// Smallest `g / g*` over runs with a known positive optimum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub row: Vec<BenchRow>,
    pub summary: Vec<BenchSummary>,
}

fn finite(g: &Utility<f64>) -> Option<f64> {
    g.finite().copied()
}

fn run_instance(
    family: BenchFamily,
    n: usize,
    seed: u64,
    config: &BenchConfig,
) -> Result<Vec<BenchRow>> {
    let fail = |alg: Option<Algorithm>, e: Error| {
        let alg = alg.map_or(String::new(), |a| format!(" alg={a}"));
        Error::RunFailed {
            row: format!("family={} n={n} seed={seed}{alg}", family.name()),
            source: Box::new(e),
        }
    };
    let inst = family
        .generate(n, seed, &config.random)
        .map_err(|e| fail(None, e))?
        .map(Scalar::to_f64);
    let opt = brute_force_opt(&inst).map_err(|e| fail(None, e))?;
    let g_star = finite(&opt.g);
    config
        .algorithms
        .iter()
        .map(|&alg| {
            let report = solve(&inst, alg, &config.options).map_err(|e| fail(Some(alg), e))?;
            if !is_equilibrium(&inst, &report.contract) {
                return Err(fail(
                    Some(alg),
                    Error::CorruptRepresentation(format!(
                        "contract for {} is not an equilibrium",
                        report.set()
                    )),
                ));
            }
            let g = finite(&report.g);
            let ratio = match (g, g_star) {
                (Some(g), Some(opt)) if opt > 0.0 => Some(g / opt),
                _ => None,
            };
            Ok(BenchRow {
                family: family.name().into(),
                n,
                seed,
                algorithm: alg.name().into(),
                g,
                g_star,
                ratio,
                value_queries: report.queries.value_queries,
                demand_queries: report.queries.demand_queries,
                approx_demand_queries: report.queries.approx_demand_queries,
                wall_time: report.wall_time,
            })
        })
        .collect()
}

fn worker_count(config: &BenchConfig) -> Result<usize> {
    if let Some(w) = config.workers {
        return Ok(w);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Parameter(format!("{WORKERS_ENV}={v:?} is not a count"))),
        Err(_) => Ok(0),
    }
}

/// Runs the sweep. Rows are ordered by family, size, seed, then algorithm.
/// The first failing run (in that order) aborts the sweep.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let mut jobs = Vec::new();
    for &family in &config.families {
        for &n in &config.sizes {
            for &seed in &config.seeds {
                jobs.push((family, n, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(config)?)
        .build()
        .map_err(|e| Error::Parameter(format!("worker pool: {e}")))?;
    let results: Vec<Result<Vec<BenchRow>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(family, n, seed)| run_instance(family, n, seed, config))
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }

    let mut summary = Vec::new();
    for &family in &config.families {
        for &alg in &config.algorithms {
            let mine: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.family == family.name() && r.algorithm == alg.name())
                .collect();
            let worst_ratio = mine
                .iter()
                .filter_map(|r| r.ratio)
                .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.min(r))));
            summary.push(BenchSummary {
                family: family.name().into(),
                algorithm: alg.name().into(),
                runs: mine.len(),
                worst_ratio,
            });
        }
    }
    Ok(BenchReport { row: rows, summary })
}

impl BenchReport {
    /// TOML with one `[[row]]` per run and one `[[summary]]` per family and algorithm.
    pub fn to_structured(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            format_version: u32,
            #[serde(flatten)]
            report: &'a BenchReport,
        }
        let doc = Doc {
            format_version: crate::format::FORMAT_VERSION,
            report: self,
        };
        toml::to_string(&doc).expect("bench reports always serialize")
    }

    pub fn to_text(&self) -> String {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
        let mut out = format!(
            "{:<16} {:>5} {:>6} {:<7} {:>12} {:>12} {:>8} {:>10} {:>10}\n",
            "family", "n", "seed", "alg", "g", "g*", "ratio", "queries", "time_ms"
        );
        for r in &self.row {
            let queries = r.value_queries + r.demand_queries + r.approx_demand_queries;
            out.push_str(&format!(
                "{:<16} {:>5} {:>6} {:<7} {:>12} {:>12} {:>8} {:>10} {:>10.3}\n",
                r.family,
                r.n,
                r.seed,
                r.algorithm,
                opt(r.g),
                opt(r.g_star),
                r.ratio.map_or("-".to_string(), |v| format!("{v:.4}")),
                queries,
                r.wall_time.as_secs_f64() * 1e3
            ));
        }
        out.push_str("\nworst ratio per family and algorithm:\n");
        for s in &self.summary {
            out.push_str(&format!(
                "{:<16} {:<7} runs={} worst={}\n",
                s.family,
                s.algorithm,
                s.runs,
                s.worst_ratio.map_or("-".to_string(), |v| format!("{v:.4}"))
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(algorithms: Vec<Algorithm>) -> BenchConfig {
        BenchConfig {
            families: vec![BenchFamily::Random(RandomKind::Additive)],
            sizes: vec![6],
            seeds: vec![1, 2],
            algorithms,
            options: SolveOptions::default(),
            random: RandomParams::default(),
            workers: Some(2),
        }
    }

    #[test]
    fn rows_are_ordered_and_ratios_bounded() {
        let report = run_bench(&config(vec![Algorithm::Brute, Algorithm::Fptas])).unwrap();
        assert_eq!(report.row.len(), 4);
        assert_eq!(report.row[0].seed, 1);
        assert_eq!(report.row[1].algorithm, "fptas");
        for r in &report.row {
            assert!(r.ratio.is_none_or(|x| x <= 1.0 + 1e-9));
        }
        assert_eq!(report.summary.len(), 2);
    }

    #[test]
    fn empty_algorithm_list_is_an_error() {
        assert!(matches!(run_bench(&config(vec![])), Err(Error::Parameter(_))));
    }

    #[test]
    fn structured_output_is_stable_across_worker_counts() {
        let mut a = config(vec![Algorithm::Xos, Algorithm::Single]);
        let first = run_bench(&a).unwrap().to_structured();
        a.workers = Some(1);
        let second = run_bench(&a).unwrap().to_structured();
        assert_eq!(first, second);
        assert!(first.contains("[[row]]"));
    }

    #[test]
    fn failing_run_aborts_with_its_row() {
        let mut c = config(vec![Algorithm::Single, Algorithm::Fptas]);
        c.families = vec![BenchFamily::Random(RandomKind::Coverage)];
        let err = run_bench(&c).unwrap_err().to_string();
        assert!(err.contains("family=coverage n=6 seed=1 alg=fptas"), "{err}");
        assert!(err.contains("fptas requires additive reward"));
    }

    #[test]
    fn family_names_round_trip() {
        for f in [
            BenchFamily::SubadditiveLb,
            BenchFamily::XosLb,
            BenchFamily::Random(RandomKind::XosClauses),
        ] {
            assert_eq!(BenchFamily::parse(f.name()).unwrap(), f);
        }
        assert!(BenchFamily::parse("gross-substitutes").is_err());
    }
}
