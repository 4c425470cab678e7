//! The principal-agent layer: incentive shares, the principal's utility
//! `g(S) = (1 − Σ_{i∈S} c_i / f(i | S∖{i})) · f(S)`, and equilibrium checks.

use crate::agents::AgentSet;
use crate::error::{Error, Result};
use crate::scalar::{Scalar, Utility, REL_TOL};
use crate::setfn::{Oracle, RewardFunction};

/// Free-form provenance carried alongside an instance in files.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metadata {
    pub family: Option<String>,
    pub seed: Option<u64>,
    pub t_star: Option<Vec<usize>>,
    pub warnings: Vec<String>,
}

/// A complete problem: per-agent costs and the reward function.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<T> {
    pub costs: Vec<T>,
    pub reward: RewardFunction<T>,
    pub metadata: Metadata,
}

impl<T: Scalar> Instance<T> {
    pub fn new(costs: Vec<T>, reward: RewardFunction<T>) -> Result<Self> {
        if costs.len() != reward.n() {
            return Err(Error::MalformedInput(format!(
                "{} costs for {} agents",
                costs.len(),
                reward.n()
            )));
        }
        if let Some(i) = costs.iter().position(|c| *c < T::zero()) {
            return Err(Error::MalformedInput(format!("negative cost for agent {i}")));
        }
        Ok(Instance {
            costs,
            reward,
            metadata: Metadata::default(),
        })
    }

    pub fn with_metadata(mut self, metadata: Metadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    pub fn map<U: Scalar>(&self, conv: impl Fn(&T) -> U) -> Instance<U> {
        Instance {
            costs: self.costs.iter().map(&conv).collect(),
            reward: self.reward.map(&conv),
            metadata: self.metadata.clone(),
        }
    }

    pub fn to_f64(&self) -> Instance<f64> {
        self.map(|x| x.to_f64())
    }

    /// All costs equal (the symmetric families rely on this).
    pub fn has_uniform_costs(&self) -> bool {
        self.costs.windows(2).all(|w| w[0] == w[1])
    }
}

/// A linear contract: shares `alpha` and the set `S` it is meant to incentivize.
///
/// Agents in `unbounded` would need an infinite share (positive cost, zero
/// marginal); their `alpha` entry is left at zero and the contract is infeasible.
#[derive(Clone, Debug, PartialEq)]
pub struct Contract<T> {
    pub alpha: Vec<T>,
    pub set: AgentSet,
    pub unbounded: AgentSet,
}

impl<T: Scalar> Contract<T> {
    pub fn is_feasible(&self) -> bool {
        self.unbounded.is_empty()
    }

    pub fn total_share(&self) -> T {
        crate::setfn::sum(self.alpha.iter().cloned())
    }
}

/// `c_i / f(i | S∖{i})` with `0/0 = 0` and `x/0 = ∞` (`None`).
fn required_share<T: Scalar>(cost: &T, marginal: T) -> Option<T> {
    if cost.is_zero() {
        Some(T::zero())
    } else if marginal <= T::zero() {
        None
    } else {
        Some(cost.clone() / marginal)
    }
}

pub fn principal_utility<T: Scalar>(inst: &Instance<T>, s: &AgentSet) -> Utility<T> {
    utility_via(&Oracle::new(&inst.reward), &inst.costs, s)
}

/// `g(S)` through a counting oracle. Any infinite share yields `-∞`, also
/// when `f(S) = 0`.
pub fn utility_via<T: Scalar>(oracle: &Oracle<'_, T>, costs: &[T], s: &AgentSet) -> Utility<T> {
    if s.is_empty() {
        return Utility::zero();
    }
    let fs = oracle.value(s);
    let parts = s
        .iter()
        .map(|i| (&costs[i], fs.clone() - oracle.value(&s.without(i))));
    utility_from_parts(fs.clone(), parts)
}

/// `g` from `f(S)` and the `(cost, marginal)` pair of each member.
pub(crate) fn utility_from_parts<'a, T: Scalar + 'a>(
    fs: T,
    parts: impl Iterator<Item = (&'a T, T)>,
) -> Utility<T> {
    let mut total = T::zero();
    for (cost, marginal) in parts {
        match required_share(cost, marginal) {
            Some(share) => total = total + share,
            None => return Utility::NegInfinity,
        }
    }
    Utility::Finite((T::one() - total) * fs)
}

pub fn incentive_alphas<T: Scalar>(inst: &Instance<T>, s: &AgentSet) -> Contract<T> {
    let f = &inst.reward;
    let n = inst.n();
    let mut alpha = vec![T::zero(); n];
    let mut unbounded = AgentSet::empty(n);
    if !s.is_empty() {
        let fs = f.value(s);
        for i in s.iter() {
            match required_share(&inst.costs[i], fs.clone() - f.value(&s.without(i))) {
                Some(share) => alpha[i] = share,
                None => unbounded.insert(i),
            }
        }
    }
    Contract {
        alpha,
        set: s.clone(),
        unbounded,
    }
}

/// Whether `con.alpha` makes `con.set` a pure Nash equilibrium: members weakly
/// prefer working, non-members weakly prefer shirking.
pub fn is_equilibrium<T: Scalar>(inst: &Instance<T>, con: &Contract<T>) -> bool {
    if !con.is_feasible() || con.alpha.len() != inst.n() {
        return false;
    }
    let f = &inst.reward;
    let s = &con.set;
    let fs = f.value(s);
    (0..inst.n()).all(|i| {
        let a = con.alpha[i].clone();
        let c = inst.costs[i].clone();
        if s.contains(i) {
            let lhs = a.clone() * fs.clone() - c;
            let rhs = a * f.value(&s.without(i));
            rhs.le_rel(&lhs, REL_TOL)
        } else {
            let lhs = a.clone() * fs.clone();
            let rhs = a * f.value(&s.with(i)) - c;
            rhs.le_rel(&lhs, REL_TOL)
        }
    })
}

/// The best of `∅` and every singleton under `g`; earlier candidates win ties.
pub fn best_single_agent<T: Scalar>(inst: &Instance<T>) -> (AgentSet, Utility<T>) {
    let n = inst.n();
    let mut best = (AgentSet::empty(n), Utility::zero());
    for i in 0..n {
        let s = AgentSet::singleton(n, i);
        let g = principal_utility(inst, &s);
        if g.beats(&best.1) {
            best = (s, g);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize, m: &[usize]) -> AgentSet {
        AgentSet::from_indices(n, m.iter().copied()).unwrap()
    }

    fn additive(v: &[f64], c: &[f64]) -> Instance<f64> {
        Instance::new(c.to_vec(), RewardFunction::additive(v.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn utility_examples() {
        let inst = additive(&[2.0, 1.0, 1.0], &[1.0, 0.2, 0.2]);
        assert_eq!(principal_utility(&inst, &AgentSet::empty(3)), Utility::Finite(0.0));
        let g = principal_utility(&inst, &set(3, &[1, 2])).to_f64();
        assert!((g - 1.2).abs() < 1e-12);
    }

    #[test]
    fn alphas_and_equilibrium() {
        let inst = additive(&[2.0, 1.0], &[1.0, 0.2]);
        let con = incentive_alphas(&inst, &set(2, &[0, 1]));
        assert_eq!(con.alpha, vec![0.5, 0.2]);
        assert!(is_equilibrium(&inst, &con));
        let weak = Contract {
            alpha: vec![0.4, 0.2],
            ..con
        };
        assert!(!is_equilibrium(&inst, &weak));
    }

    #[test]
    fn zero_contract_on_empty_set_is_equilibrium() {
        let inst = additive(&[2.0, 1.0], &[1.0, 0.2]);
        let con = incentive_alphas(&inst, &AgentSet::empty(2));
        assert_eq!(con.alpha, vec![0.0, 0.0]);
        assert!(is_equilibrium(&inst, &con));
    }

    #[test]
    fn zero_costs_give_zero_shares() {
        let inst = additive(&[2.0, 0.0], &[0.0, 0.0]);
        let con = incentive_alphas(&inst, &set(2, &[0, 1]));
        assert_eq!(con.alpha, vec![0.0, 0.0]);
        assert!(con.is_feasible());
        assert_eq!(principal_utility(&inst, &set(2, &[0, 1])), Utility::Finite(2.0));
    }

    #[test]
    fn zero_marginal_with_cost_is_unincentivizable() {
        let inst = additive(&[2.0, 0.0], &[0.5, 0.1]);
        let s = set(2, &[0, 1]);
        assert_eq!(principal_utility(&inst, &s), Utility::NegInfinity);
        let con = incentive_alphas(&inst, &s);
        assert!(!con.is_feasible());
        assert!(!is_equilibrium(&inst, &con));
        // f(S) = 0 with a positive cost is still −∞.
        assert_eq!(principal_utility(&inst, &set(2, &[1])), Utility::NegInfinity);
    }

    #[test]
    fn best_single_agent_examples() {
        let inst = additive(&[2.0, 1.0, 1.0], &[1.0, 0.2, 0.2]);
        let (s, g) = best_single_agent(&inst);
        assert_eq!(s, set(3, &[0]));
        assert_eq!(g, Utility::Finite(1.0));
        let pricey = additive(&[1.0, 1.0], &[2.0, 3.0]);
        assert_eq!(best_single_agent(&pricey), (AgentSet::empty(2), Utility::Finite(0.0)));
    }

    #[test]
    fn rejects_bad_costs() {
        let f = RewardFunction::additive(vec![1.0, 1.0]).unwrap();
        assert!(Instance::new(vec![1.0], f.clone()).is_err());
        assert!(Instance::new(vec![1.0, -0.5], f).is_err());
    }
}
