//! One entry point for every algorithm.

use std::time::Instant;

use crate::additive::fptas_additive;
use crate::agents::AgentSet;
use crate::approx::{approx_contract_submodular, approx_contract_xos, MainParams};
use crate::contract::{utility_via, Instance};
use crate::error::Result;
use crate::report::{Algorithm, SolveReport};
use crate::scalar::{Scalar, Utility};
use crate::setfn::{Oracle, QueryCounter};
use crate::verify::brute_force_opt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// FPTAS accuracy.
    pub epsilon: f64,
    /// Grid ratio of the constant-factor algorithms.
    pub xi: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            epsilon: 0.1,
            xi: MainParams::DEFAULT_XI,
        }
    }
}

/// Runs `alg` on `inst`. Brute force reports the number of sets it evaluated
/// as value queries.
pub fn solve<T: Scalar>(inst: &Instance<T>, alg: Algorithm, opts: &SolveOptions) -> Result<SolveReport<T>> {
    match alg {
        Algorithm::Brute => {
            let start = Instant::now();
            let opt = brute_force_opt(inst)?;
            let queries = QueryCounter {
                value_queries: opt.evaluations,
                ..QueryCounter::default()
            };
            let mut report = SolveReport::new(inst, alg, &opt.set, queries);
            report.wall_time = start.elapsed();
            Ok(report)
        }
        Algorithm::Fptas => fptas_additive(inst, opts.epsilon),
        Algorithm::Xos => approx_contract_xos(inst, &MainParams::exact_demand(opts.xi)),
        Algorithm::Submod => approx_contract_submodular(inst, &MainParams::value_queries(opts.xi)),
        Algorithm::Single => {
            let start = Instant::now();
            let n = inst.n();
            let oracle = Oracle::new(&inst.reward);
            let mut best = (AgentSet::empty(n), Utility::zero());
            for i in 0..n {
                let s = AgentSet::singleton(n, i);
                let g = utility_via(&oracle, &inst.costs, &s);
                if g.beats(&best.1) {
                    best = (s, g);
                }
            }
            let mut report = SolveReport::new(inst, alg, &best.0, oracle.counter());
            report.wall_time = start.elapsed();
            Ok(report)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::RewardFunction;

    #[test]
    fn every_algorithm_on_the_example() {
        let inst = Instance::new(
            vec![1.0, 0.2, 0.2],
            RewardFunction::additive(vec![2.0, 1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let opts = SolveOptions::default();
        let brute = solve(&inst, Algorithm::Brute, &opts).unwrap();
        assert!((brute.g.to_f64() - 1.2).abs() < 1e-12);
        for alg in Algorithm::ALL {
            let r = solve(&inst, alg, &opts);
            if alg == Algorithm::Submod {
                assert!(r.is_ok());
                continue;
            }
            let r = r.unwrap();
            assert!(r.g.to_f64() <= brute.g.to_f64() + 1e-12, "{alg}");
        }
        let single = solve(&inst, Algorithm::Single, &opts).unwrap();
        assert_eq!(single.set().to_vec(), vec![0]);
        assert_eq!(single.queries.value_queries, 6);
    }
}
