//! Constant-factor approximation for XOS rewards (value + demand queries) and
//! for submodular rewards (value queries only).
//!
//! The pipeline has three layers:
//!
//! * [`scale_set`] shrinks a set `T` to a target value `Ψ` while keeping every
//!   surviving agent's marginal at least `δ` times its marginal in `T`.
//! * [`contract_from_estimate`] turns a guess `ỹ` of `f(S* ∩ A')` into a set by
//!   posting prices `(β/2)·√(c_i ỹ)`, taking a (β-approximate) demand set and
//!   scaling it down to `Ψ = β²ỹ/32 − max_{i∈A'} f({i})`.
//! * [`approx_contract_xos`] / [`approx_contract_submodular`] sweep `ỹ` over a
//!   geometric grid and return the best candidate, singletons and `∅` included.

use std::time::Instant;

use crate::agents::AgentSet;
use crate::contract::{utility_via, Instance};
use crate::error::{Error, Result};
use crate::report::{Algorithm, GridEntry, SolveReport};
use crate::scalar::{Scalar, Utility};
use crate::setfn::{Oracle, PriceVector};

/// Tolerance for "removing `i` does not decrease `f`" on inexact scalars.
const MINIMALITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingParams<T> {
    pub psi: T,
    pub delta: T,
}

/// Every intermediate quantity of one scaling run, kept for inspection.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingTrace<T> {
    /// Inclusion-minimal subset of the input with the same value.
    pub minimal: AgentSet,
    /// Agents in removal order `i_1, i_2, ...`.
    pub removed: Vec<usize>,
    /// `f(T_0), f(T_1), ..., f(T_{|T_0|}) = 0`.
    pub values: Vec<T>,
    /// `δ_1, ..., δ_{|T_0|}`; index `t − 1` holds `δ_t`.
    pub ratios: Vec<T>,
    pub j_star: usize,
    pub k_star: usize,
    pub t_star: usize,
    pub output: AgentSet,
}

/// Returns `U ⊆ T` with `(1−δ)Ψ ≤ f(U) ≤ Ψ + max_{i∈T} f({i})` and
/// `f(i | U∖{i}) ≥ δ · f(i | T∖{i})` for all `i ∈ U`.
pub fn scale_set<T: Scalar>(
    oracle: &Oracle<'_, T>,
    set: &AgentSet,
    params: &ScalingParams<T>,
) -> Result<AgentSet> {
    scale_set_traced(oracle, set, params).map(|trace| trace.output)
}

pub fn scale_set_traced<T: Scalar>(
    oracle: &Oracle<'_, T>,
    set: &AgentSet,
    params: &ScalingParams<T>,
) -> Result<ScalingTrace<T>> {
    let ScalingParams { psi, delta } = params;
    if !(*delta > T::zero() && *delta <= T::one()) {
        return Err(Error::Precondition(format!("δ = {delta} outside (0, 1]")));
    }
    let f_set = oracle.value(set);
    if *psi < T::zero() || *psi >= f_set {
        return Err(Error::Precondition(format!(
            "Ψ = {psi} must satisfy 0 ≤ Ψ < f(T) = {f_set}"
        )));
    }

    // T_0: drop the lowest-index agent whose removal keeps the value, rescan.
    let mut minimal = set.clone();
    let mut f_min = f_set;
    'scan: loop {
        for i in minimal.iter().collect::<Vec<_>>() {
            let without = minimal.without(i);
            let v = oracle.value(&without);
            if f_min.le_rel(&v, MINIMALITY_TOL) {
                minimal = without;
                f_min = v;
                continue 'scan;
            }
        }
        break;
    }

    let n = oracle.n();
    let mut base = vec![T::zero(); n];
    for i in minimal.iter() {
        let m = f_min.clone() - oracle.value(&minimal.without(i));
        if m <= T::zero() {
            return Err(Error::CorruptRepresentation(format!(
                "zero marginal for agent {i} in an inclusion-minimal set"
            )));
        }
        base[i] = m;
    }

    let mut current = minimal.clone();
    let mut values = vec![f_min];
    let mut removed = Vec::new();
    let mut ratios = Vec::new();
    while !current.is_empty() {
        let f_cur = values.last().unwrap().clone();
        let mut pick: Option<(T, usize, T)> = None;
        for i in current.iter() {
            let f_without = oracle.value(&current.without(i));
            let ratio = (f_cur.clone() - f_without.clone()) / base[i].clone();
            if pick.as_ref().is_none_or(|(best, _, _)| ratio < *best) {
                pick = Some((ratio, i, f_without));
            }
        }
        let (ratio, i, f_without) = pick.unwrap();
        current.remove(i);
        removed.push(i);
        values.push(f_without);
        ratios.push(ratio);
    }

    let j_star = values
        .iter()
        .position(|v| v <= psi)
        .expect("f(∅) = 0 ≤ Ψ");
    debug_assert!(j_star >= 1);
    let threshold = (T::one() - delta.clone()) * values[j_star - 1].clone();
    let k_star = (j_star..values.len())
        .find(|&k| values[k] <= threshold)
        .expect("f(∅) = 0 ≤ (1−δ)·f(T_{j*−1})");
    let mut t_star = j_star;
    for t in j_star..=k_star {
        if ratios[t - 1] > ratios[t_star - 1] {
            t_star = t;
        }
    }
    let mut output = minimal.clone();
    for &i in &removed[..t_star - 1] {
        output.remove(i);
    }
    Ok(ScalingTrace {
        minimal,
        removed,
        values,
        ratios,
        j_star,
        k_star,
        t_star,
        output,
    })
}

/// Agents with `c_i / f({i}) ≤ 1/2` (with `0/0 = 0`).
pub fn cheap_agents<T: Scalar>(oracle: &Oracle<'_, T>, costs: &[T]) -> AgentSet {
    let n = oracle.n();
    let mut a_prime = AgentSet::empty(n);
    for (i, c) in costs.iter().enumerate() {
        if c.clone() + c.clone() <= oracle.singleton(i) {
            a_prime.insert(i);
        }
    }
    a_prime
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateParams<T> {
    pub y_tilde: T,
    pub a_prime: AgentSet,
    pub prices: PriceVector<T>,
}

impl<T: Scalar> EstimateParams<T> {
    /// Prices `(β/2)·√(c_i ỹ)` on `A'` and `+∞` elsewhere.
    pub fn new(costs: &[T], a_prime: &AgentSet, y_tilde: T, beta: &T) -> Self {
        let half_beta = beta.clone() / T::from_int(2);
        let prices = (0..costs.len())
            .map(|i| {
                a_prime
                    .contains(i)
                    .then(|| half_beta.clone() * (costs[i].clone() * y_tilde.clone()).sqrt())
            })
            .collect();
        EstimateParams {
            y_tilde,
            a_prime: a_prime.clone(),
            prices: PriceVector::new(prices).expect("prices are nonnegative"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateOutcome<T> {
    pub psi: T,
    pub demand: Option<AgentSet>,
    pub output: AgentSet,
}

/// One grid step: with `β = 1` an exact demand query, with `β < 1` a
/// value-query approximate demand set pruned of agents whose marginal falls
/// below their price. Returns `∅` unless `0 < Ψ < f(T)`.
pub fn contract_from_estimate<T: Scalar>(
    oracle: &Oracle<'_, T>,
    params: &EstimateParams<T>,
    beta: &T,
) -> Result<EstimateOutcome<T>> {
    let max_single = params
        .a_prime
        .iter()
        .map(|i| oracle.singleton(i))
        .fold(T::zero(), T::max_of);
    let psi = beta.clone() * beta.clone() * params.y_tilde.clone() / T::from_int(32) - max_single;
    let empty = AgentSet::empty(oracle.n());
    if psi <= T::zero() {
        // The output is ∅ whatever the demand set is.
        return Ok(EstimateOutcome {
            psi,
            demand: None,
            output: empty,
        });
    }
    let demand = if *beta >= T::one() {
        oracle.demand(&params.prices)?
    } else {
        let mut t = oracle.approx_demand(&params.prices);
        'prune: loop {
            for i in t.iter().collect::<Vec<_>>() {
                let price = params.prices.get(i).cloned().expect("demand stays in A'");
                if oracle.marginal(i, &t) < price {
                    t.remove(i);
                    continue 'prune;
                }
            }
            break;
        }
        t
    };
    let output = if psi < oracle.value(&demand) {
        scale_set(
            oracle,
            &demand,
            &ScalingParams {
                psi: psi.clone(),
                delta: T::from_ratio(1, 2),
            },
        )?
    } else {
        empty
    };
    Ok(EstimateOutcome {
        psi,
        demand: Some(demand),
        output,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MainParams {
    /// Grid ratio, `> 1`.
    pub xi: f64,
    /// Demand approximation factor in `(0, 1]`.
    pub beta: f64,
}

impl MainParams {
    pub const DEFAULT_XI: f64 = 1.01;

    pub fn exact_demand(xi: f64) -> Self {
        MainParams { xi, beta: 1.0 }
    }

    pub fn value_queries(xi: f64) -> Self {
        MainParams {
            xi,
            beta: 1.0 - (-1.0f64).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.xi > 1.0 && self.xi.is_finite()) {
            return Err(Error::Parameter(format!("ξ = {} must exceed 1", self.xi)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Parameter(format!("β = {} outside (0, 1]", self.beta)));
        }
        Ok(())
    }

    /// Worst-case guarantee `β² / (256ξ + 2β²)`.
    pub fn guarantee(&self) -> f64 {
        let b2 = self.beta * self.beta;
        b2 / (256.0 * self.xi + 2.0 * b2)
    }
}

impl Default for MainParams {
    fn default() -> Self {
        MainParams::exact_demand(Self::DEFAULT_XI)
    }
}

/// Main loop for XOS rewards with exact demand queries; guarantees
/// `g(output) ≥ g(S*) / (256ξ + 2)`.
pub fn approx_contract_xos<T: Scalar>(
    inst: &Instance<T>,
    params: &MainParams,
) -> Result<SolveReport<T>> {
    if params.beta != 1.0 {
        return Err(Error::Parameter(
            "the exact-demand pipeline runs with β = 1".into(),
        ));
    }
    grid_search(inst, params, Algorithm::Xos)
}

/// Main loop for submodular rewards with value queries only; guarantees
/// `g(output) ≥ β² g(S*) / (256ξ + 2β²)` with `β = 1 − 1/e`.
pub fn approx_contract_submodular<T: Scalar>(
    inst: &Instance<T>,
    params: &MainParams,
) -> Result<SolveReport<T>> {
    if params.beta >= 1.0 {
        return Err(Error::Parameter(
            "the value-query pipeline needs β < 1".into(),
        ));
    }
    grid_search(inst, params, Algorithm::Submod)
}

fn grid_search<T: Scalar>(
    inst: &Instance<T>,
    params: &MainParams,
    algorithm: Algorithm,
) -> Result<SolveReport<T>> {
    params.validate()?;
    let start = Instant::now();
    let n = inst.n();
    let oracle = Oracle::new(&inst.reward);
    let beta = T::from_f64(params.beta);

    let mut best = (AgentSet::empty(n), Utility::zero());
    let mut consider = |s: AgentSet, g: Utility<T>| {
        if g.beats(&best.1) {
            best = (s, g);
        }
    };
    for i in 0..n {
        let s = AgentSet::singleton(n, i);
        let g = utility_via(&oracle, &inst.costs, &s);
        consider(s, g);
    }

    let a_prime = cheap_agents(&oracle, &inst.costs);
    let max_single = a_prime
        .iter()
        .map(|i| oracle.singleton(i))
        .fold(T::zero(), T::max_of);
    let mut log = Vec::new();
    if !a_prime.is_empty() && max_single > T::zero() {
        let x = max_single / T::from_int(2);
        let steps = ((2.0 * n as f64).ln() / params.xi.ln()).ceil() as usize;
        for j in 0..=steps {
            let estimate = x.clone() * T::from_f64(params.xi.powi(j as i32));
            let est = EstimateParams::new(&inst.costs, &a_prime, estimate.clone(), &beta);
            let outcome = contract_from_estimate(&oracle, &est, &beta)?;
            let g = utility_via(&oracle, &inst.costs, &outcome.output);
            log.push(GridEntry {
                index: j,
                estimate,
                psi: outcome.psi,
                demand_size: outcome.demand.as_ref().map(AgentSet::len),
                output_size: outcome.output.len(),
                utility: g.clone(),
            });
            consider(outcome.output, g);
        }
    }

    let mut report = SolveReport::new(inst, algorithm, &best.0, oracle.counter());
    report.candidates = log;
    report.wall_time = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::RewardFunction;

    fn set(n: usize, m: &[usize]) -> AgentSet {
        AgentSet::from_indices(n, m.iter().copied()).unwrap()
    }

    fn additive(v: Vec<f64>, c: Vec<f64>) -> Instance<f64> {
        Instance::new(c, RewardFunction::additive(v).unwrap()).unwrap()
    }

    #[test]
    fn scaling_hand_trace() {
        let f = RewardFunction::additive(vec![4.0, 3.0, 2.0, 1.0]).unwrap();
        let oracle = Oracle::new(&f);
        let trace = scale_set_traced(
            &oracle,
            &AgentSet::full(4),
            &ScalingParams {
                psi: 5.0,
                delta: 0.5,
            },
        )
        .unwrap();
        assert_eq!(trace.removed, vec![0, 1, 2, 3]);
        assert_eq!(trace.values, vec![10.0, 6.0, 3.0, 1.0, 0.0]);
        assert_eq!((trace.j_star, trace.k_star, trace.t_star), (2, 2, 2));
        assert_eq!(trace.output, set(4, &[1, 2, 3]));
    }

    #[test]
    fn scaling_singleton() {
        let f = RewardFunction::additive(vec![4.0]).unwrap();
        let oracle = Oracle::new(&f);
        let trace = scale_set_traced(
            &oracle,
            &set(1, &[0]),
            &ScalingParams {
                psi: 2.0,
                delta: 0.5,
            },
        )
        .unwrap();
        assert_eq!((trace.j_star, trace.k_star, trace.t_star), (1, 1, 1));
        assert_eq!(trace.output, set(1, &[0]));
    }

    #[test]
    fn scaling_drops_redundant_agents_first() {
        // Agent 1 adds nothing on top of {0, 2}: the minimal subset omits it.
        let f = RewardFunction::xos(3, vec![vec![2.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let oracle = Oracle::new(&f);
        let trace = scale_set_traced(
            &oracle,
            &AgentSet::full(3),
            &ScalingParams {
                psi: 0.0,
                delta: 1.0,
            },
        )
        .unwrap();
        assert_eq!(trace.minimal, set(3, &[0, 2]));
        assert_eq!(trace.t_star, trace.minimal.len());
    }

    #[test]
    fn scaling_rejects_bad_parameters() {
        let f = RewardFunction::additive(vec![1.0, 1.0]).unwrap();
        let oracle = Oracle::new(&f);
        let t = AgentSet::full(2);
        let run = |psi: f64, delta: f64| scale_set(&oracle, &t, &ScalingParams { psi, delta });
        assert!(matches!(run(2.0, 0.5), Err(Error::Precondition(_))));
        assert!(matches!(run(-0.1, 0.5), Err(Error::Precondition(_))));
        assert!(matches!(run(1.0, 0.0), Err(Error::Precondition(_))));
        assert!(matches!(run(1.0, 1.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn estimate_with_negative_psi_is_empty() {
        let inst = additive(vec![1.0; 4], vec![0.02; 4]);
        let oracle = Oracle::new(&inst.reward);
        let a_prime = cheap_agents(&oracle, &inst.costs);
        assert_eq!(a_prime.len(), 4);
        let est = EstimateParams::new(&inst.costs, &a_prime, 2.0, &1.0);
        let out = contract_from_estimate(&oracle, &est, &1.0).unwrap();
        assert!(out.psi < 0.0);
        assert!(out.output.is_empty());
        assert_eq!(oracle.counter().demand_queries, 0);
    }

    #[test]
    fn estimate_hand_trace_n40() {
        let inst = additive(vec![1.0; 40], vec![0.001; 40]);
        let oracle = Oracle::new(&inst.reward);
        let a_prime = cheap_agents(&oracle, &inst.costs);
        let est = EstimateParams::new(&inst.costs, &a_prime, 40.0, &1.0);
        assert!((est.prices.get(0).unwrap() - 0.1).abs() < 1e-12);
        let out = contract_from_estimate(&oracle, &est, &1.0).unwrap();
        assert!((out.psi - 0.25).abs() < 1e-12);
        assert_eq!(out.demand.as_ref().map(AgentSet::len), Some(40));
        assert_eq!(out.output.len(), 1);
        let g = crate::contract::principal_utility(&inst, &out.output).to_f64();
        assert!((g - 0.999).abs() < 1e-12);
        assert!(g >= 40.0 / 128.0 - 0.25);
    }

    #[test]
    fn zero_estimate_gives_zero_prices() {
        let inst = additive(vec![1.0, 2.0], vec![0.1, 0.1]);
        let oracle = Oracle::new(&inst.reward);
        let a_prime = cheap_agents(&oracle, &inst.costs);
        let est = EstimateParams::new(&inst.costs, &a_prime, 0.0, &1.0);
        assert_eq!(est.prices.get(0), Some(&0.0));
        assert!(contract_from_estimate(&oracle, &est, &1.0)
            .unwrap()
            .output
            .is_empty());
    }

    #[test]
    fn expensive_agents_leave_only_empty_set() {
        let inst = additive(vec![1.0, 1.0], vec![3.0, 3.0]);
        let report = approx_contract_xos(&inst, &MainParams::default()).unwrap();
        assert!(report.set().is_empty());
        assert_eq!(report.g, Utility::Finite(0.0));
        assert!(report.candidates.is_empty());
    }

    #[test]
    fn zero_costs_pick_a_singleton_at_least() {
        let inst = additive(vec![1.0, 3.0, 2.0], vec![0.0; 3]);
        let report = approx_contract_submodular(&inst, &MainParams::value_queries(1.01)).unwrap();
        assert!(report.g.to_f64() >= 3.0);
    }

    #[test]
    fn parameter_validation() {
        let inst = additive(vec![1.0], vec![0.1]);
        assert!(approx_contract_xos(&inst, &MainParams::exact_demand(1.0)).is_err());
        assert!(approx_contract_xos(&inst, &MainParams::value_queries(1.01)).is_err());
        assert!(approx_contract_submodular(&inst, &MainParams::default()).is_err());
    }

    #[test]
    fn large_additive_grid_produces_nonempty_candidates() {
        // n = 64 puts ξ^j·x above 32·max f({i}) at the top of the grid.
        let inst = additive(vec![1.0; 64], vec![0.001; 64]);
        let report = approx_contract_xos(&inst, &MainParams::default()).unwrap();
        assert!(report.candidates.iter().any(|c| c.output_size > 1));
        assert!(report.g.to_f64() > 1.0);
    }

    #[test]
    fn large_additive_value_query_grid_runs_approximate_demand() {
        // β² ≈ 0.4 needs ỹ > 80·max f({i}) before Ψ turns positive.
        let inst = additive(vec![1.0; 128], vec![0.001; 128]);
        let sub = approx_contract_submodular(&inst, &MainParams::value_queries(1.01)).unwrap();
        assert!(sub.candidates.iter().any(|c| c.demand_size.is_some()));
        assert!(sub.queries.approx_demand_queries > 0);
        assert_eq!(sub.queries.demand_queries, 0);
        // g* = 128 · (1 − 0.128) with everyone hired.
        let params = MainParams::value_queries(1.01);
        assert!(sub.g.to_f64() >= params.guarantee() * 128.0 * 0.872);
    }
}
