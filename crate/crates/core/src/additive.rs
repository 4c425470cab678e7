//! Additive rewards: the FPTAS and the PARTITION-reduction instance mapping.
//!
//! For a guess `b` of the largest singleton value in the optimum, values are
//! rounded down to multiples of `δb` (`δ = ε/n`). A knapsack-style table then
//! gives, for every rounded reward level `x = kδb`, the least total share
//! `Σ c_i/f({i})` reaching it, and the level maximizing `(1 − share)·x` is
//! kept. The best recovered set over all guesses, re-scored with the true `g`,
//! is `(1 − ε)`-optimal.

use std::time::Instant;

use num_bigint::BigInt;

use crate::agents::AgentSet;
use crate::contract::{principal_utility, Instance, Metadata};
use crate::error::{Error, Result};
use crate::report::{Algorithm, SolveReport};
use crate::scalar::{Rational, Scalar, Utility};
use crate::setfn::{Oracle, RewardFunction};

/// Rounding grid for one guess of `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct FptasGrid<T> {
    pub epsilon: f64,
    pub b: T,
    /// `δ = ε / n`.
    pub delta: T,
    /// Grid step `δb`.
    pub unit: T,
    /// Largest grid index, `⌈n / δ⌉`.
    pub cap: usize,
    /// `⌊f({i}) / δb⌋` per agent, saturated at `cap`.
    pub rounded: Vec<usize>,
}

impl<T: Scalar> FptasGrid<T> {
    pub fn new(values: &[T], epsilon: f64, b: T) -> Result<Self> {
        check_epsilon(epsilon)?;
        if b <= T::zero() {
            return Err(Error::Parameter("grid guess b must be positive".into()));
        }
        let n = values.len();
        let delta = T::from_f64(epsilon) / T::from_int(n as i64);
        let unit = delta.clone() * b.clone();
        let cap = ((n * n) as f64 / epsilon).ceil() as usize;
        let rounded = values
            .iter()
            .map(|v| ((v.clone() / unit.clone()).floor_to_u64() as usize).min(cap))
            .collect();
        Ok(FptasGrid {
            epsilon,
            b,
            delta,
            unit,
            cap,
            rounded,
        })
    }

    /// `f̃({i})` as a scalar.
    pub fn rounded_value(&self, i: usize) -> T {
        T::from_int(self.rounded[i] as i64) * self.unit.clone()
    }
}

/// Minimum total share reaching each rounded reward level, over all agents.
#[derive(Clone, Debug)]
pub struct DpTable<T> {
    /// `min_share[k]`: least `Σ c_i/f({i})` over `S` with `f̃(S) ≥ k·δb`; `None` = unreachable.
    pub min_share: Vec<Option<T>>,
    agents: Vec<usize>,
    // took[j][k]: the optimum for prefix j+1 at level k uses agents[j].
    took: Vec<Vec<bool>>,
    weights: Vec<usize>,
}

impl<T: Scalar> DpTable<T> {
    /// Runs the recurrence `A(j, x) = min{A(j−1, x), A(j−1, x − f̃({j})) + c_j/f({j})}`
    /// over `agents` (each must have positive value).
    pub fn build(grid: &FptasGrid<T>, shares: &[T], agents: &[usize]) -> Self {
        let width = grid.cap + 1;
        let mut row: Vec<Option<T>> = vec![None; width];
        row[0] = Some(T::zero());
        let mut took = Vec::with_capacity(agents.len());
        let mut weights = Vec::with_capacity(agents.len());
        for &i in agents {
            let w = grid.rounded[i];
            let share = &shares[i];
            let mut next = row.clone();
            let mut used = vec![false; width];
            for k in 0..width {
                if let Some(prev) = &row[k.saturating_sub(w)] {
                    let cand = prev.clone() + share.clone();
                    if next[k].as_ref().is_none_or(|cur| cand < *cur) {
                        next[k] = Some(cand);
                        used[k] = true;
                    }
                }
            }
            row = next;
            took.push(used);
            weights.push(w);
        }
        DpTable {
            min_share: row,
            agents: agents.to_vec(),
            took,
            weights,
        }
    }

    /// The set attaining `min_share[level]`.
    pub fn recover(&self, n: usize, level: usize) -> AgentSet {
        let mut s = AgentSet::empty(n);
        let mut k = level;
        for j in (0..self.agents.len()).rev() {
            if self.took[j][k] {
                s.insert(self.agents[j]);
                k = k.saturating_sub(self.weights[j]);
            }
        }
        s
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("ε = {epsilon} outside (0, 1)")))
    }
}

/// `(1 − ε)`-approximate contract for additive rewards.
pub fn fptas_additive<T: Scalar>(inst: &Instance<T>, epsilon: f64) -> Result<SolveReport<T>> {
    check_epsilon(epsilon)?;
    if !matches!(inst.reward, RewardFunction::Additive { .. }) {
        return Err(Error::Unsupported("fptas requires additive reward".into()));
    }
    let start = Instant::now();
    let n = inst.n();
    let oracle = Oracle::new(&inst.reward);
    let values: Vec<T> = (0..n).map(|i| oracle.singleton(i)).collect();
    // Zero-value agents either cannot be incentivized or add nothing.
    let active: Vec<usize> = (0..n).filter(|&i| values[i] > T::zero()).collect();
    let shares: Vec<T> = (0..n)
        .map(|i| {
            if values[i] > T::zero() {
                inst.costs[i].clone() / values[i].clone()
            } else {
                T::zero()
            }
        })
        .collect();

    let mut guesses: Vec<T> = Vec::new();
    for &i in &active {
        if !guesses.contains(&values[i]) {
            guesses.push(values[i].clone());
        }
    }

    let mut best = (AgentSet::empty(n), Utility::zero());
    for b in guesses {
        let grid = FptasGrid::new(&values, epsilon, b)?;
        let table = DpTable::build(&grid, &shares, &active);
        let mut pick: Option<(T, usize)> = None;
        for (k, share) in table.min_share.iter().enumerate() {
            if let Some(share) = share {
                let level = T::from_int(k as i64) * grid.unit.clone();
                let surrogate = (T::one() - share.clone()) * level;
                if pick.as_ref().is_none_or(|(v, _)| surrogate > *v) {
                    pick = Some((surrogate, k));
                }
            }
        }
        let (_, level) = pick.expect("level 0 is always reachable");
        let s = table.recover(n, level);
        let g = principal_utility(inst, &s);
        if g.beats(&best.1) {
            best = (s, g);
        }
    }

    let mut report = SolveReport::new(inst, Algorithm::Fptas, &best.0, oracle.counter());
    report.wall_time = start.elapsed();
    Ok(report)
}

/// The additive contract instance for a PARTITION input: `v_i = w_i`,
/// `c_i = w_i² / W`. It is a yes-instance iff the optimal `g` equals `W/4`.
pub fn partition_instance(weights: &[u64]) -> Result<Instance<Rational>> {
    if weights.is_empty() {
        return Err(Error::Parameter("PARTITION needs at least one weight".into()));
    }
    if weights.contains(&0) {
        return Err(Error::Parameter("PARTITION weights must be positive".into()));
    }
    let total: BigInt = weights.iter().map(|&w| BigInt::from(w)).sum();
    let values: Vec<Rational> = weights
        .iter()
        .map(|&w| Rational::from_integer(BigInt::from(w)))
        .collect();
    let costs = values
        .iter()
        .map(|v| v * v / Rational::from_integer(total.clone()))
        .collect();
    Ok(
        Instance::new(costs, RewardFunction::additive(values)?)?.with_metadata(Metadata {
            family: Some("partition".into()),
            ..Metadata::default()
        }),
    )
}

/// `W / 4`, the optimum exactly when the weights split evenly.
pub fn partition_target(weights: &[u64]) -> Rational {
    let total: u64 = weights.iter().sum();
    Rational::new(BigInt::from(total), BigInt::from(4))
}
