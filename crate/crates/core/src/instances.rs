//! Instance generators: the two lower-bound families and seeded random
//! additive, coverage and XOS-clause instances.
//!
//! Every generator is deterministic in its seed (ChaCha8).

use num_bigint::BigInt;
use num_integer::Roots;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agents::AgentSet;
use crate::contract::{Instance, Metadata};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};
use crate::setfn::RewardFunction;

/// Family name recorded in the metadata of subadditive lower-bound instances.
pub const SUBADDITIVE_LB: &str = "subadditive-lb";
/// Family name recorded in the metadata of XOS lower-bound instances.
pub const XOS_LB: &str = "xos-lb";

/// The separation claims of the subadditive family are asymptotic.
const SUBADDITIVE_ASYMPTOTIC_N: usize = 4096;

/// How the distinguished set `T` of a lower-bound instance is chosen.
#[derive(Clone, Debug)]
pub enum BumpChoice {
    Given(AgentSet),
    Seed(u64),
}

fn q(a: i64, b: i64) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

fn pick_bump_set(n: usize, size: usize, choice: &BumpChoice) -> Result<(AgentSet, Option<u64>)> {
    match choice {
        BumpChoice::Given(t) => {
            if t.universe() != n || t.len() != size {
                return Err(Error::Parameter(format!(
                    "distinguished set must have {size} of {n} agents, got {t}"
                )));
            }
            Ok((t.clone(), None))
        }
        BumpChoice::Seed(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let picked = index::sample(&mut rng, n, size);
            Ok((AgentSet::from_indices(n, picked.iter())?, Some(*seed)))
        }
    }
}

/// `√n` when `n` is an even perfect square.
pub fn even_square_root(n: usize) -> Option<usize> {
    let r = n.sqrt();
    (n >= 4 && n % 2 == 0 && r * r == n).then_some(r)
}

/// The symmetric submodular `f'(k) = min(3 + 2k/√n, 3 + √n)` for `k ≥ 1`,
/// `f'(0) = 0`, which sandwiches the subadditive family.
pub fn subadditive_lb_envelope(n: usize) -> Result<Vec<Rational>> {
    let r = even_square_root(n)
        .ok_or_else(|| Error::Parameter(format!("n = {n} must be an even perfect square")))?;
    let (ni, ri) = (n as i64, r as i64);
    Ok((0..=ni)
        .map(|k| match k {
            0 => q(0, 1),
            k if 2 * k <= ni => q(3, 1) + q(2 * k, ri),
            _ => q(3 + ri, 1),
        })
        .collect())
}

/// Subadditive lower-bound instance on `n` agents (`n` an even perfect square).
///
/// `f(S)` is `3 + 2|S|/√n` up to `n/2` agents, then `4+√n`, `5+√n` and
/// `6+√n`; the set `T` of size `n/2 + 1` gets one extra unit. Costs are `2/n`.
pub fn gen_subadditive_lb(n: usize, choice: &BumpChoice) -> Result<Instance<Rational>> {
    let r = even_square_root(n)
        .ok_or_else(|| Error::Parameter(format!("n = {n} must be an even perfect square")))?;
    let (ni, ri) = (n as i64, r as i64);
    let half = ni / 2;
    let table: Vec<Rational> = (0..=ni)
        .map(|k| match k {
            0 => q(0, 1),
            k if k <= half => q(3, 1) + q(2 * k, ri),
            k if k == half + 1 => q(4 + ri, 1),
            k if k == half + 2 => q(5 + ri, 1),
            _ => q(6 + ri, 1),
        })
        .collect();
    let (t, seed) = pick_bump_set(n, n / 2 + 1, choice)?;
    let mut warnings = Vec::new();
    if n <= SUBADDITIVE_ASYMPTOTIC_N {
        warnings.push(format!(
            "n = {n} ≤ {SUBADDITIVE_ASYMPTOTIC_N}: the √n/20 separation is asymptotic and need not show here"
        ));
    }
    let reward = RewardFunction::bumped(table, t.clone(), q(1, 1))?;
    let inst = Instance::new(vec![q(2, ni); n], reward)?;
    Ok(inst.with_metadata(Metadata {
        family: Some(SUBADDITIVE_LB.into()),
        seed,
        t_star: Some(t.to_vec()),
        warnings,
    }))
}

/// XOS lower-bound instance on an even number `n` of agents.
///
/// `f(S)` is `1 + 3|S|/n` up to `n/2` agents and `1/2 + 4|S|/n` beyond; the set
/// `T` of size `n/2 + 1` gets `1/n` extra. Costs are `5/(n(n+2))`.
pub fn gen_xos_lb(n: usize, choice: &BumpChoice) -> Result<Instance<Rational>> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::Parameter(format!("n = {n} must be even and at least 2")));
    }
    let ni = n as i64;
    let table: Vec<Rational> = (0..=ni)
        .map(|k| match k {
            0 => q(0, 1),
            k if 2 * k <= ni => q(1, 1) + q(3 * k, ni),
            k => q(1, 2) + q(4 * k, ni),
        })
        .collect();
    let (t, seed) = pick_bump_set(n, n / 2 + 1, choice)?;
    let reward = RewardFunction::bumped(table, t.clone(), q(1, ni))?;
    let inst = Instance::new(vec![q(5, ni * (ni + 2)); n], reward)?;
    Ok(inst.with_metadata(Metadata {
        family: Some(XOS_LB.into()),
        seed,
        t_star: Some(t.to_vec()),
        warnings: vec![
            "the bound g(S) ≤ 11/10 for S ≠ T is asymptotic; per-cardinality maxima are reported instead".into(),
        ],
    }))
}

/// The same XOS family with the reward written as its explicit clause list.
pub fn gen_xos_lb_clauses(n: usize, choice: &BumpChoice) -> Result<Instance<Rational>> {
    let inst = gen_xos_lb(n, choice)?;
    let clauses = inst
        .reward
        .xos_clauses()
        .expect("generated family has a clause form");
    let reward = RewardFunction::xos(n, clauses)?;
    Ok(Instance::new(inst.costs, reward)?.with_metadata(inst.metadata))
}

/// Which lower-bound family an instance belongs to, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerBoundFamily {
    Subadditive,
    Xos,
}

impl LowerBoundFamily {
    pub fn name(self) -> &'static str {
        match self {
            LowerBoundFamily::Subadditive => SUBADDITIVE_LB,
            LowerBoundFamily::Xos => XOS_LB,
        }
    }

    /// Recognizes an instance by regenerating the family around its bump set.
    pub fn detect(inst: &Instance<Rational>) -> Option<Self> {
        let RewardFunction::BumpedSymmetric { bump_set, .. } = &inst.reward else {
            return None;
        };
        let n = inst.n();
        let choice = BumpChoice::Given(bump_set.clone());
        let same = |g: Result<Instance<Rational>>| {
            g.is_ok_and(|g| g.reward == inst.reward && g.costs == inst.costs)
        };
        if same(gen_subadditive_lb(n, &choice)) {
            Some(LowerBoundFamily::Subadditive)
        } else if same(gen_xos_lb(n, &choice)) {
            Some(LowerBoundFamily::Xos)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomKind {
    Additive,
    Coverage,
    XosClauses,
}

impl RandomKind {
    pub fn name(self) -> &'static str {
        match self {
            RandomKind::Additive => "additive",
            RandomKind::Coverage => "coverage",
            RandomKind::XosClauses => "xos-clauses",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [RandomKind::Additive, RandomKind::Coverage, RandomKind::XosClauses]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown random family {s:?}")))
    }
}

/// Shape parameters for random instances.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    /// Coverage universe size `m`.
    pub universe: usize,
    /// Probability that an agent covers a given element.
    pub cover_prob: f64,
    /// Number of XOS clauses `k`.
    pub clauses: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            universe: 20,
            cover_prob: 0.25,
            clauses: 4,
        }
    }
}

/// Random numbers are multiples of `1/RESOLUTION`, so instances stay exact.
const RESOLUTION: i64 = 1000;

/// Uniform on `{1, …, RESOLUTION}/RESOLUTION`, i.e. on `(0, 1]`.
fn unit_positive(rng: &mut ChaCha8Rng) -> Rational {
    q(rng.gen_range(1..=RESOLUTION), RESOLUTION)
}

/// Uniform on `{0, …, RESOLUTION}/RESOLUTION`, i.e. on `[0, 1]`.
fn unit_nonnegative(rng: &mut ChaCha8Rng) -> Rational {
    q(rng.gen_range(0..=RESOLUTION), RESOLUTION)
}

/// A seeded random instance; costs are uniform on `(0, f({i})]`.
pub fn gen_random(
    kind: RandomKind,
    n: usize,
    seed: u64,
    params: &RandomParams,
) -> Result<Instance<Rational>> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reward = match kind {
        RandomKind::Additive => {
            RewardFunction::additive((0..n).map(|_| unit_positive(&mut rng)).collect())?
        }
        RandomKind::Coverage => {
            let m = params.universe;
            if m == 0 {
                return Err(Error::Parameter("coverage universe must be nonempty".into()));
            }
            if !(0.0..=1.0).contains(&params.cover_prob) {
                return Err(Error::Parameter(format!(
                    "cover probability {} outside [0, 1]",
                    params.cover_prob
                )));
            }
            let weights = (0..m).map(|_| unit_positive(&mut rng)).collect();
            let covers = (0..n)
                .map(|_| (0..m).filter(|_| rng.gen_bool(params.cover_prob)).collect())
                .collect();
            RewardFunction::coverage(covers, weights)?
        }
        RandomKind::XosClauses => {
            if params.clauses == 0 {
                return Err(Error::Parameter("need at least one XOS clause".into()));
            }
            let clauses = (0..params.clauses)
                .map(|_| (0..n).map(|_| unit_nonnegative(&mut rng)).collect())
                .collect();
            RewardFunction::xos(n, clauses)?
        }
    };
    let costs = (0..n)
        .map(|i| reward.singleton_value(i) * unit_positive(&mut rng))
        .collect();
    Ok(Instance::new(costs, reward)?.with_metadata(Metadata {
        family: Some(kind.name().into()),
        seed: Some(seed),
        ..Metadata::default()
    }))
}

/// Converts an exact instance for the float pipeline.
pub fn to_float(inst: &Instance<Rational>) -> Instance<f64> {
    inst.map(Scalar::to_f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::principal_utility;
    use crate::scalar::Utility;

    fn t_of(inst: &Instance<Rational>) -> AgentSet {
        AgentSet::from_indices(inst.n(), inst.metadata.t_star.clone().unwrap()).unwrap()
    }

    #[test]
    fn subadditive_family_values_at_16() {
        let inst = gen_subadditive_lb(16, &BumpChoice::Seed(7)).unwrap();
        let t = t_of(&inst);
        assert_eq!(t.len(), 9);
        assert_eq!(inst.reward.value(&t), q(9, 1));
        assert_eq!(principal_utility(&inst, &t), Utility::Finite(q(63, 16)));
        let single = AgentSet::singleton(16, 0);
        assert_eq!(principal_utility(&inst, &single), Utility::Finite(q(27, 8)));
        assert!(!inst.metadata.warnings.is_empty());
    }

    #[test]
    fn subadditive_rejects_bad_n() {
        for n in [0, 2, 9, 15, 18] {
            assert!(matches!(
                gen_subadditive_lb(n, &BumpChoice::Seed(0)),
                Err(Error::Parameter(_))
            ));
        }
        assert!(gen_subadditive_lb(4, &BumpChoice::Seed(0)).is_ok());
        assert!(gen_subadditive_lb(36, &BumpChoice::Seed(0)).is_ok());
    }

    #[test]
    fn given_bump_set_is_checked() {
        let t = AgentSet::from_indices(16, 0..9).unwrap();
        let inst = gen_subadditive_lb(16, &BumpChoice::Given(t.clone())).unwrap();
        assert_eq!(t_of(&inst), t);
        assert_eq!(inst.metadata.seed, None);
        let short = AgentSet::from_indices(16, 0..8).unwrap();
        assert!(gen_subadditive_lb(16, &BumpChoice::Given(short)).is_err());
    }

    #[test]
    fn xos_family_value_at_100() {
        let inst = gen_xos_lb(100, &BumpChoice::Seed(3)).unwrap();
        let t = t_of(&inst);
        assert_eq!(principal_utility(&inst, &t), Utility::Finite(q(51, 40)));
        assert!(gen_xos_lb(7, &BumpChoice::Seed(3)).is_err());
        assert!(gen_xos_lb(0, &BumpChoice::Seed(3)).is_err());
    }

    #[test]
    fn xos_clause_form_agrees_on_cardinality_classes() {
        let n = 10;
        let sym = gen_xos_lb(n, &BumpChoice::Seed(11)).unwrap();
        let clauses = gen_xos_lb_clauses(n, &BumpChoice::Seed(11)).unwrap();
        let t = t_of(&sym);
        let mut probes = vec![t.clone(), AgentSet::empty(n), AgentSet::full(n)];
        for k in 1..n {
            probes.push(AgentSet::from_indices(n, 0..k).unwrap());
            probes.push(AgentSet::from_indices(n, n - k..n).unwrap());
        }
        for s in &probes {
            assert_eq!(sym.reward.value(s), clauses.reward.value(s), "on {s}");
        }
    }

    #[test]
    fn family_detection() {
        let sub = gen_subadditive_lb(16, &BumpChoice::Seed(1)).unwrap();
        let xos = gen_xos_lb(16, &BumpChoice::Seed(1)).unwrap();
        assert_eq!(LowerBoundFamily::detect(&sub), Some(LowerBoundFamily::Subadditive));
        assert_eq!(LowerBoundFamily::detect(&xos), Some(LowerBoundFamily::Xos));
        let other = gen_random(RandomKind::Additive, 5, 1, &RandomParams::default()).unwrap();
        assert_eq!(LowerBoundFamily::detect(&other), None);
    }

    #[test]
    fn random_instances_are_seeded() {
        let p = RandomParams::default();
        for kind in [RandomKind::Additive, RandomKind::Coverage, RandomKind::XosClauses] {
            let a = gen_random(kind, 8, 42, &p).unwrap();
            let b = gen_random(kind, 8, 42, &p).unwrap();
            let c = gen_random(kind, 8, 43, &p).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
            for i in 0..8 {
                let v = a.reward.singleton_value(i);
                assert!(a.costs[i] <= v);
                assert!(a.costs[i] > q(0, 1) || v == q(0, 1));
            }
        }
    }

    #[test]
    fn random_parameter_errors() {
        let p = RandomParams::default();
        assert!(gen_random(RandomKind::Additive, 0, 1, &p).is_err());
        let no_universe = RandomParams { universe: 0, ..p.clone() };
        assert!(gen_random(RandomKind::Coverage, 4, 1, &no_universe).is_err());
        let no_clauses = RandomParams { clauses: 0, ..p };
        assert!(gen_random(RandomKind::XosClauses, 4, 1, &no_clauses).is_err());
        assert!(RandomKind::parse("matroid").is_err());
    }
}
