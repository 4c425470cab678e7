use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::Serialize;

use crate::agents::AgentSet;
use crate::contract::{incentive_alphas, Contract, Instance};
use crate::error::Error;
use crate::scalar::{format_scalar, Scalar, Utility};
use crate::setfn::QueryCounter;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Brute,
    Fptas,
    Xos,
    Submod,
    Single,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Brute,
        Algorithm::Fptas,
        Algorithm::Xos,
        Algorithm::Submod,
        Algorithm::Single,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Brute => "brute",
            Algorithm::Fptas => "fptas",
            Algorithm::Xos => "xos",
            Algorithm::Submod => "submod",
            Algorithm::Single => "single",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown algorithm {s:?}")))
    }
}

/// One grid step of the main loop.
#[derive(Clone, Debug, PartialEq)]
pub struct GridEntry<T> {
    pub index: usize,
    pub estimate: T,
    pub psi: T,
    /// Size of the demand set; `None` when `Ψ ≤ 0` made the query unnecessary.
    pub demand_size: Option<usize>,
    pub output_size: usize,
    pub utility: Utility<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimumComparison<T> {
    pub g_star: Utility<T>,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport<T> {
    pub algorithm: Algorithm,
    pub contract: Contract<T>,
    pub g: Utility<T>,
    pub candidates: Vec<GridEntry<T>>,
    pub queries: QueryCounter,
    pub optimum: Option<OptimumComparison<T>>,
    pub wall_time: Duration,
}

impl<T: Scalar> SolveReport<T> {
    /// Builds the report for `set`, recomputing `g` from the incentive shares.
    pub fn new(
        inst: &Instance<T>,
        algorithm: Algorithm,
        set: &AgentSet,
        queries: QueryCounter,
    ) -> Self {
        let contract = incentive_alphas(inst, set);
        let g = utility_from_contract(inst, &contract);
        SolveReport {
            algorithm,
            contract,
            g,
            candidates: Vec::new(),
            queries,
            optimum: None,
            wall_time: Duration::ZERO,
        }
    }

    pub fn set(&self) -> &AgentSet {
        &self.contract.set
    }

    /// Attaches the exact optimum and the achieved ratio `g / g*` when `g* > 0`.
    pub fn compare_with(&mut self, g_star: Utility<T>) {
        let ratio = match g_star.finite() {
            Some(opt) if *opt > T::zero() => Some(self.g.to_f64() / opt.to_f64()),
            _ => None,
        };
        self.optimum = Some(OptimumComparison { g_star, ratio });
    }

    pub fn ratio(&self) -> Option<f64> {
        self.optimum.as_ref().and_then(|o| o.ratio)
    }
}

#[derive(Serialize)]
struct QueriesDoc {
    value: u64,
    demand: u64,
    approx_demand: u64,
}

#[derive(Serialize)]
struct CandidateDoc {
    index: usize,
    estimate: String,
    psi: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    demand_size: Option<usize>,
    output_size: usize,
    g: String,
}

#[derive(Serialize)]
struct SolveDoc {
    format_version: u32,
    algorithm: String,
    set: Vec<usize>,
    alpha: Vec<String>,
    g: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    g_star: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    queries: QueriesDoc,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    candidate: Vec<CandidateDoc>,
}

impl<T: Scalar> SolveReport<T> {
    /// TOML in the instance-file conventions: numbers as exact strings, no timings.
    pub fn to_structured(&self) -> String {
        let doc = SolveDoc {
            format_version: crate::format::FORMAT_VERSION,
            algorithm: self.algorithm.name().into(),
            set: self.contract.set.to_vec(),
            alpha: self.contract.alpha.iter().map(format_scalar).collect(),
            g: self.g.to_string(),
            g_star: self.optimum.as_ref().map(|o| o.g_star.to_string()),
            ratio: self.ratio(),
            queries: QueriesDoc {
                value: self.queries.value_queries,
                demand: self.queries.demand_queries,
                approx_demand: self.queries.approx_demand_queries,
            },
            candidate: self
                .candidates
                .iter()
                .map(|c| CandidateDoc {
                    index: c.index,
                    estimate: format_scalar(&c.estimate),
                    psi: format_scalar(&c.psi),
                    demand_size: c.demand_size,
                    output_size: c.output_size,
                    g: c.utility.to_string(),
                })
                .collect(),
        };
        toml::to_string(&doc).expect("solve reports always serialize")
    }
}

/// `f(S) · (1 − Σ α_i)`, or `-∞` for an infeasible contract.
pub fn utility_from_contract<T: Scalar>(inst: &Instance<T>, con: &Contract<T>) -> Utility<T> {
    if !con.is_feasible() {
        return Utility::NegInfinity;
    }
    if con.set.is_empty() {
        return Utility::zero();
    }
    Utility::Finite((T::one() - con.total_share()) * inst.reward.value(&con.set))
}

impl<T: Scalar> fmt::Display for SolveReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "algorithm: {}", self.algorithm)?;
        writeln!(f, "set: {}", self.contract.set)?;
        let alpha: Vec<String> = self.contract.alpha.iter().map(format_scalar).collect();
        writeln!(f, "alpha: [{}]", alpha.join(", "))?;
        writeln!(f, "g: {}", self.g)?;
        if let Some(opt) = &self.optimum {
            writeln!(f, "g*: {}", opt.g_star)?;
            if let Some(r) = opt.ratio {
                writeln!(f, "ratio: {r}")?;
            }
        }
        writeln!(
            f,
            "queries: value={} demand={} approx_demand={}",
            self.queries.value_queries, self.queries.demand_queries, self.queries.approx_demand_queries
        )?;
        if !self.candidates.is_empty() {
            writeln!(f, "grid:")?;
            for c in &self.candidates {
                writeln!(
                    f,
                    "  j={} x={} psi={} |T|={} |U|={} g(U)={}",
                    c.index,
                    format_scalar(&c.estimate),
                    format_scalar(&c.psi),
                    c.demand_size.map_or("-".to_string(), |k| k.to_string()),
                    c.output_size,
                    c.utility
                )?;
            }
        }
        Ok(())
    }
}
