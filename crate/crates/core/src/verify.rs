//! Exact optima and independent checks of the structural claims the solvers
//! rely on: function classes, the marginal and cost lemmas, the scaling
//! bounds and the lower-bound families.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agents::{AgentSet, Combinations};
use crate::approx::ScalingParams;
use crate::contract::{principal_utility, utility_from_parts, Instance};
use crate::error::{Error, Result};
use crate::instances::{even_square_root, subadditive_lb_envelope, LowerBoundFamily};
use crate::scalar::{format_scalar, Rational, Scalar, Utility, REL_TOL};
use crate::setfn::{RewardFunction, EXHAUSTIVE_DEMAND_CAP};

/// Largest `n` for full subset enumeration.
pub const BRUTE_FORCE_CAP: usize = EXHAUSTIVE_DEMAND_CAP;
/// Largest `n` for exhaustive class checks.
pub const EXHAUSTIVE_CLASS_CAP: usize = 16;
/// Largest `n` for exhaustive lemma checks over all pairs `S ⊆ T`.
pub const EXHAUSTIVE_LEMMA_CAP: usize = 12;
const VALUE_TABLE_CAP: usize = 20;
const SAMPLES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BruteMethod {
    /// All `2^n` subsets via a precomputed value table.
    ValueTable,
    /// All `2^n` subsets, evaluating `g` directly.
    Direct,
    /// One representative per symmetry class (symmetric rewards, uniform costs).
    Structured,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult<T> {
    pub set: AgentSet,
    pub g: Utility<T>,
    /// Number of sets whose `g` was computed.
    pub evaluations: u64,
    pub method: BruteMethod,
}

/// Keeps the better of two candidates; equal values go to the tie-order-smaller set.
fn consider<T: Scalar>(best: &mut Option<(AgentSet, Utility<T>)>, s: AgentSet, g: Utility<T>) {
    let better = match best {
        None => true,
        Some((bs, bg)) => {
            g.beats(bg) || (!bg.beats(&g) && s.tie_cmp(bs) == std::cmp::Ordering::Less)
        }
    };
    if better {
        *best = Some((s, g));
    }
}

/// The exact maximizer of `g`, ties broken by the global tie order.
///
/// Symmetric rewards with uniform costs are solved at any `n` by evaluating
/// one set per class; everything else is enumerated up to [`BRUTE_FORCE_CAP`].
pub fn brute_force_opt<T: Scalar>(inst: &Instance<T>) -> Result<OptResult<T>> {
    if inst.reward.is_symmetric_kind() && inst.has_uniform_costs() {
        let bump = bump_set_of(&inst.reward);
        let reps = class_representatives(inst.n(), bump.as_ref());
        let mut best = None;
        let evaluations = reps.len() as u64;
        for s in reps {
            let g = principal_utility(inst, &s);
            consider(&mut best, s, g);
        }
        let (set, g) = best.expect("∅ is always a representative");
        return Ok(OptResult {
            set,
            g,
            evaluations,
            method: BruteMethod::Structured,
        });
    }
    brute_force_enumerate(inst)
}

/// Full enumeration, whatever the representation.
pub fn brute_force_enumerate<T: Scalar>(inst: &Instance<T>) -> Result<OptResult<T>> {
    let n = inst.n();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::Unsupported(format!(
            "brute force needs n ≤ {BRUTE_FORCE_CAP} unless the reward is symmetric with uniform costs; got n = {n}"
        )));
    }
    let mut best = None;
    let method = if n <= VALUE_TABLE_CAP {
        let tab = value_table(&inst.reward);
        for mask in 0..1usize << n {
            let s = AgentSet::from_mask(n, mask as u64);
            let g = if mask == 0 {
                Utility::zero()
            } else {
                let fs = tab[mask].clone();
                let parts = s
                    .iter()
                    .map(|i| (&inst.costs[i], fs.clone() - tab[mask ^ 1 << i].clone()));
                utility_from_parts(fs.clone(), parts)
            };
            consider(&mut best, s, g);
        }
        BruteMethod::ValueTable
    } else {
        for mask in 0..1u64 << n {
            let s = AgentSet::from_mask(n, mask);
            let g = principal_utility(inst, &s);
            consider(&mut best, s, g);
        }
        BruteMethod::Direct
    };
    let (set, g) = best.expect("at least ∅ is enumerated");
    Ok(OptResult {
        set,
        g,
        evaluations: 1u64 << n,
        method,
    })
}

/// `f` on every subset, indexed by bitmask.
pub fn value_table<T: Scalar>(f: &RewardFunction<T>) -> Vec<T> {
    if let RewardFunction::Table { values, .. } = f {
        return values.clone();
    }
    let n = f.n();
    (0..1u64 << n)
        .map(|mask| f.value(&AgentSet::from_mask(n, mask)))
        .collect()
}

fn bump_set_of<T>(f: &RewardFunction<T>) -> Option<AgentSet> {
    match f {
        RewardFunction::BumpedSymmetric { bump_set, .. } => Some(bump_set.clone()),
        _ => None,
    }
}

fn is_bump_plus_one(s: &AgentSet, t: &AgentSet) -> bool {
    s.len() == t.len() + 1 && t.is_subset(s)
}

/// The tie-order-first set of size `k` that is neither `t` nor `t ∪ {j}`.
fn generic_set(n: usize, k: usize, t: Option<&AgentSet>) -> Option<AgentSet> {
    Combinations::new(n, k)
        .map(|c| AgentSet::from_indices(n, c).expect("in range"))
        .find(|s| t.is_none_or(|t| s != t && !is_bump_plus_one(s, t)))
}

/// One set per class of equal `(f, g)` under a symmetric reward with uniform
/// costs, each the tie-order-first member of its class: per cardinality a
/// generic set, plus `T` and `T ∪ {min j ∉ T}` when there is a bump set `T`.
pub fn class_representatives(n: usize, t: Option<&AgentSet>) -> Vec<AgentSet> {
    let mut reps: Vec<AgentSet> = (0..=n).filter_map(|k| generic_set(n, k, t)).collect();
    if let Some(t) = t {
        reps.push(t.clone());
        if let Some(j) = (0..n).find(|&j| !t.contains(j)) {
            reps.push(t.with(j));
        }
    }
    reps
}

/// `g` at the bump set against every other set, per cardinality.
#[derive(Clone, Debug, PartialEq)]
pub struct LbReport<T> {
    pub bump_set: AgentSet,
    pub g_bump_set: Utility<T>,
    /// Best set other than the bump set.
    pub best_other: AgentSet,
    pub g_best_other: Utility<T>,
    /// `per_cardinality[k]`: max of `g(S)` over `S ≠ T` with `|S| = k`.
    pub per_cardinality: Vec<Utility<T>>,
}

pub fn lb_family_report<T: Scalar>(inst: &Instance<T>) -> Result<LbReport<T>> {
    let t = bump_set_of(&inst.reward).ok_or_else(|| {
        Error::Unsupported("lower-bound report needs a bumped symmetric reward".into())
    })?;
    if !inst.has_uniform_costs() {
        return Err(Error::Unsupported(
            "lower-bound report needs uniform costs".into(),
        ));
    }
    let n = inst.n();
    let mut per_cardinality = vec![Utility::NegInfinity; n + 1];
    let mut best = None;
    for s in class_representatives(n, Some(&t)) {
        if s == t {
            continue;
        }
        let g = principal_utility(inst, &s);
        let k = s.len();
        if g > per_cardinality[k] {
            per_cardinality[k] = g.clone();
        }
        consider(&mut best, s, g);
    }
    let (best_other, g_best_other) =
        best.unwrap_or_else(|| (AgentSet::empty(n), Utility::zero()));
    Ok(LbReport {
        g_bump_set: principal_utility(inst, &t),
        bump_set: t,
        best_other,
        g_best_other,
        per_cardinality,
    })
}

// ---------------------------------------------------------------------------
// Function classes

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionClass {
    Monotone,
    Subadditive,
    Submodular,
    XosSupported,
}

impl FunctionClass {
    pub const ALL: [FunctionClass; 4] = [
        FunctionClass::Monotone,
        FunctionClass::Subadditive,
        FunctionClass::Submodular,
        FunctionClass::XosSupported,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionClass::Monotone => "monotone",
            FunctionClass::Subadditive => "subadditive",
            FunctionClass::Submodular => "submodular",
            FunctionClass::XosSupported => "xos-supported",
        }
    }
}

/// A concrete violation.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassWitness {
    /// `f(subset) > f(superset)`.
    Monotone { subset: AgentSet, superset: AgentSet },
    /// `f(left) + f(right) < f(left ∪ right)` for disjoint sets.
    Subadditive { left: AgentSet, right: AgentSet },
    /// `f(agent | smaller) < f(agent | larger)` with `smaller ⊂ larger`.
    Submodular {
        agent: usize,
        smaller: AgentSet,
        larger: AgentSet,
    },
    /// A clause exceeding `f(set)` (`Some`), or no clause reaching it (`None`).
    XosSupport { set: AgentSet, clause: Option<usize> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMethod {
    Exhaustive,
    /// Complete, by symmetry classes.
    Structured,
    Sampled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassReport {
    pub class: FunctionClass,
    pub method: CheckMethod,
    pub checked: u64,
    pub witness: Option<ClassWitness>,
}

impl ClassReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Arithmetic for the class checks: exact on integers and rationals, relative
/// tolerance on floats.
trait Num: Clone {
    fn plus(&self, o: &Self) -> Self;
    fn at_most(&self, o: &Self) -> bool;
    fn zero() -> Self;
}

impl Num for i128 {
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn at_most(&self, o: &Self) -> bool {
        self <= o
    }
    fn zero() -> Self {
        0
    }
}

impl Num for f64 {
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn at_most(&self, o: &Self) -> bool {
        self.le_rel(o, REL_TOL)
    }
    fn zero() -> Self {
        0.0
    }
}

impl Num for Rational {
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn at_most(&self, o: &Self) -> bool {
        self <= o
    }
    fn zero() -> Self {
        Zero::zero()
    }
}

enum Domain {
    Int(Vec<i128>),
    Float(Vec<f64>),
    Exact(Vec<Rational>),
}

/// Exact values go to a common-denominator `i128` scale when they fit with
/// plenty of headroom for sums.
fn domain<T: Scalar>(xs: &[T]) -> Domain {
    if !T::EXACT {
        return Domain::Float(xs.iter().map(Scalar::to_f64).collect());
    }
    let qs: Vec<Rational> = xs.iter().map(Scalar::to_rational).collect();
    let lcm = qs
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let limit: BigInt = BigInt::one() << 100;
    let ints: Option<Vec<i128>> = qs
        .iter()
        .map(|q| {
            let v = q.numer() * (&lcm / q.denom());
            if v.magnitude() < limit.magnitude() {
                v.to_i128()
            } else {
                None
            }
        })
        .collect();
    match ints {
        Some(v) => Domain::Int(v),
        None => Domain::Exact(qs),
    }
}

macro_rules! in_domain {
    ($xs:expr, |$v:ident| $body:expr) => {
        match domain($xs) {
            Domain::Int($v) => $body,
            Domain::Float($v) => $body,
            Domain::Exact($v) => $body,
        }
    };
}

fn mask_set(n: usize, mask: usize) -> AgentSet {
    AgentSet::from_mask(n, mask as u64)
}

fn exhaustive_monotone<V: Num>(n: usize, tab: &[V]) -> (u64, Option<ClassWitness>) {
    let mut checked = 0;
    for mask in 0..tab.len() {
        for i in (0..n).filter(|i| mask >> i & 1 == 0) {
            checked += 1;
            if !tab[mask].at_most(&tab[mask | 1 << i]) {
                return (
                    checked,
                    Some(ClassWitness::Monotone {
                        subset: mask_set(n, mask),
                        superset: mask_set(n, mask | 1 << i),
                    }),
                );
            }
        }
    }
    (checked, None)
}

fn exhaustive_subadditive<V: Num>(n: usize, tab: &[V]) -> (u64, Option<ClassWitness>) {
    let mut checked = 0;
    for union in 1..tab.len() {
        // Proper nonempty submasks `left`; each unordered pair once.
        let mut left = (union - 1) & union;
        while left > 0 {
            let right = union ^ left;
            if left < right {
                checked += 1;
                if !tab[union].at_most(&tab[left].plus(&tab[right])) {
                    return (
                        checked,
                        Some(ClassWitness::Subadditive {
                            left: mask_set(n, left),
                            right: mask_set(n, right),
                        }),
                    );
                }
            }
            left = (left - 1) & union;
        }
    }
    (checked, None)
}

fn exhaustive_submodular<V: Num>(n: usize, tab: &[V]) -> (u64, Option<ClassWitness>) {
    let mut checked = 0;
    for mask in 0..tab.len() {
        for i in (0..n).filter(|i| mask >> i & 1 == 0) {
            for j in (0..n).filter(|&j| j != i && mask >> j & 1 == 0) {
                checked += 1;
                let (s, sj) = (mask, mask | 1 << j);
                // f(S+i) + f(S+j) ≥ f(S+i+j) + f(S)
                let lhs = tab[s | 1 << i].plus(&tab[sj]);
                let rhs = tab[sj | 1 << i].plus(&tab[s]);
                if !rhs.at_most(&lhs) {
                    return (
                        checked,
                        Some(ClassWitness::Submodular {
                            agent: i,
                            smaller: mask_set(n, s),
                            larger: mask_set(n, sj),
                        }),
                    );
                }
            }
        }
    }
    (checked, None)
}

/// `values[s]` is `f(sets[s])`; `weights` holds the clauses row by row.
fn xos_support<V: Num>(
    n: usize,
    sets: &[AgentSet],
    values: &[V],
    weights: &[V],
) -> (u64, Option<ClassWitness>) {
    let k = if n == 0 { 0 } else { weights.len() / n };
    for (idx, s) in sets.iter().enumerate() {
        let mut reached = values[idx].at_most(&V::zero());
        for c in 0..k {
            let row = &weights[c * n..(c + 1) * n];
            let total = s.iter().fold(V::zero(), |acc, i| acc.plus(&row[i]));
            if !total.at_most(&values[idx]) {
                return (
                    idx as u64 + 1,
                    Some(ClassWitness::XosSupport {
                        set: s.clone(),
                        clause: Some(c),
                    }),
                );
            }
            reached = reached || values[idx].at_most(&total);
        }
        if !reached {
            return (
                idx as u64 + 1,
                Some(ClassWitness::XosSupport {
                    set: s.clone(),
                    clause: None,
                }),
            );
        }
    }
    (sets.len() as u64, None)
}

fn random_set(rng: &mut ChaCha8Rng, n: usize) -> AgentSet {
    let mut s = AgentSet::empty(n);
    for i in 0..n {
        if rng.gen_bool(0.5) {
            s.insert(i);
        }
    }
    s
}

fn random_subset(rng: &mut ChaCha8Rng, t: &AgentSet) -> AgentSet {
    let mut s = t.clone();
    for i in t.iter() {
        if rng.gen_bool(0.5) {
            s.remove(i);
        }
    }
    s
}

/// A disjoint pair of sizes `a` and `b` avoiding the bump set `t` on both
/// sides and on the union.
fn generic_pair(n: usize, a: usize, b: usize, t: &AgentSet) -> Option<(AgentSet, AgentSet)> {
    for left in Combinations::new(n, a).take(n + 2) {
        let left = AgentSet::from_indices(n, left).expect("in range");
        if left == *t {
            continue;
        }
        let rest = left.complement().to_vec();
        for right in Combinations::new(rest.len(), b).take(n + 2) {
            let right = AgentSet::from_indices(n, right.into_iter().map(|p| rest[p]))
                .expect("in range");
            if right != *t && left.union(&right) != *t {
                return Some((left, right));
            }
        }
    }
    None
}

/// Class checks for symmetric rewards at any `n`: the listed pairs attain the
/// extreme case of every inequality, so the check is complete.
fn structured_class<T: Scalar>(f: &RewardFunction<T>, class: FunctionClass) -> Option<ClassReport> {
    let n = f.n();
    let t = bump_set_of(f).unwrap_or_else(|| AgentSet::full(n));
    // Agents outside `t` first, so no prefix equals `t` unless it is everything.
    let order: Vec<usize> = t.complement().iter().chain(t.iter()).collect();
    let prefix = |k: usize| AgentSet::from_indices(n, order[..k].iter().copied()).expect("in range");
    let mut checked = 0;
    let witness = match class {
        FunctionClass::Monotone => {
            let mut pairs: Vec<(AgentSet, AgentSet)> =
                (0..n).map(|k| (prefix(k), prefix(k + 1))).collect();
            if let Some(j) = t.complement().iter().next() {
                pairs.push((t.clone(), t.with(j)));
            }
            if let Some(i) = t.iter().next() {
                pairs.push((t.without(i), t.clone()));
            }
            pairs.into_iter().find_map(|(a, b)| {
                checked += 1;
                (!f.value(&a).le_rel(&f.value(&b), REL_TOL)).then_some(ClassWitness::Monotone {
                    subset: a,
                    superset: b,
                })
            })
        }
        FunctionClass::Subadditive => {
            let mut found = None;
            'outer: for a in 1..n {
                for b in 1..=a.min(n - a) {
                    let pair = if a + b == t.len() {
                        let members = t.to_vec();
                        let left = AgentSet::from_indices(n, members[..a].iter().copied());
                        let right = AgentSet::from_indices(n, members[a..].iter().copied());
                        Some((left.expect("in range"), right.expect("in range")))
                    } else {
                        generic_pair(n, a, b, &t)
                    };
                    let Some((left, right)) = pair else { continue };
                    checked += 1;
                    let lhs = f.value(&left) + f.value(&right);
                    if !f.value(&left.union(&right)).le_rel(&lhs, REL_TOL) {
                        found = Some(ClassWitness::Subadditive { left, right });
                        break 'outer;
                    }
                }
            }
            found
        }
        _ => return None,
    };
    Some(ClassReport {
        class,
        method: CheckMethod::Structured,
        checked,
        witness,
    })
}

/// Checks `f` against `class`.
///
/// Up to [`EXHAUSTIVE_CLASS_CAP`] agents every inequality is checked. Beyond
/// that, symmetric rewards get a complete class-wise check (monotone,
/// subadditive, and XOS support of the clause-materialized family); other
/// representations are sampled.
pub fn check_class<T: Scalar>(f: &RewardFunction<T>, class: FunctionClass) -> Result<ClassReport> {
    let n = f.n();
    if class == FunctionClass::XosSupported {
        return check_xos_support(f);
    }
    if n <= EXHAUSTIVE_CLASS_CAP {
        let tab = value_table(f);
        let (checked, witness) = in_domain!(&tab, |v| match class {
            FunctionClass::Monotone => exhaustive_monotone(n, &v),
            FunctionClass::Subadditive => exhaustive_subadditive(n, &v),
            _ => exhaustive_submodular(n, &v),
        });
        return Ok(ClassReport {
            class,
            method: CheckMethod::Exhaustive,
            checked,
            witness,
        });
    }
    if f.is_symmetric_kind() {
        if let Some(report) = structured_class(f, class) {
            return Ok(report);
        }
    }
    Ok(sampled_class(f, class, 0))
}

fn sampled_class<T: Scalar>(f: &RewardFunction<T>, class: FunctionClass, seed: u64) -> ClassReport {
    let n = f.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let le = |a: &T, b: &T| a.le_rel(b, REL_TOL);
    let mut witness = None;
    let mut checked = 0;
    for _ in 0..SAMPLES {
        checked += 1;
        let big = random_set(&mut rng, n);
        let small = random_subset(&mut rng, &big);
        witness = match class {
            FunctionClass::Monotone => (!le(&f.value(&small), &f.value(&big))).then(|| {
                ClassWitness::Monotone {
                    subset: small,
                    superset: big,
                }
            }),
            FunctionClass::Subadditive => {
                let other = big.difference(&small);
                (!le(&f.value(&big), &(f.value(&small) + f.value(&other)))).then(|| {
                    ClassWitness::Subadditive {
                        left: small,
                        right: other,
                    }
                })
            }
            _ => {
                let outside = big.complement().to_vec();
                if outside.is_empty() {
                    None
                } else {
                    let i = outside[rng.gen_range(0..outside.len())];
                    (!le(&f.marginal(i, &big), &f.marginal(i, &small))).then(|| {
                        ClassWitness::Submodular {
                            agent: i,
                            smaller: small,
                            larger: big,
                        }
                    })
                }
            }
        };
        if witness.is_some() {
            break;
        }
    }
    ClassReport {
        class,
        method: CheckMethod::Sampled,
        checked,
        witness,
    }
}

/// Every clause is dominated by `f` and some clause attains `f`, on every set
/// checked. Bumped symmetric rewards are checked per `(|S|, |S ∩ T|)` class,
/// which determines every clause sum of the materialized family.
fn check_xos_support<T: Scalar>(f: &RewardFunction<T>) -> Result<ClassReport> {
    let n = f.n();
    let clauses = f.xos_clauses().ok_or_else(|| {
        Error::Unsupported(format!(
            "{} reward has no explicit XOS clause list",
            f.kind_name()
        ))
    })?;
    let (sets, method) = if n <= EXHAUSTIVE_CLASS_CAP {
        let sets = (0..1usize << n).map(|m| mask_set(n, m)).collect();
        (sets, CheckMethod::Exhaustive)
    } else if let Some(t) = bump_set_of(f) {
        let inside = t.to_vec();
        let outside = t.complement().to_vec();
        let mut sets = Vec::new();
        for k in 0..=n {
            let lo = k.saturating_sub(outside.len());
            for m in lo..=k.min(inside.len()) {
                let members = inside[..m].iter().chain(&outside[..k - m]).copied();
                sets.push(AgentSet::from_indices(n, members)?);
            }
        }
        (sets, CheckMethod::Structured)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sets = (0..SAMPLES).map(|_| random_set(&mut rng, n)).collect();
        (sets, CheckMethod::Sampled)
    };
    let mut numbers: Vec<T> = sets.iter().map(|s| f.value(s)).collect();
    let count = numbers.len();
    for c in &clauses {
        numbers.extend(c.iter().cloned());
    }
    let (checked, witness) = in_domain!(&numbers, |v| {
        let (values, weights) = v.split_at(count);
        xos_support(n, &sets, values, weights)
    });
    Ok(ClassReport {
        class: FunctionClass::XosSupported,
        method,
        checked,
        witness,
    })
}

// ---------------------------------------------------------------------------
// Lemmas

/// Outcome of checking an inequality over many sets.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    pub checked: u64,
    /// Sets satisfying the lemma's hypothesis, when it has one.
    pub hypothesis_met: u64,
    pub exhaustive: bool,
    /// The sets of the first violation, in the order the lemma names them.
    pub violation: Option<Vec<AgentSet>>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

fn marginal_sum_ok<T: Scalar>(f: &RewardFunction<T>, s: &AgentSet, t: &AgentSet, ft: &T) -> bool {
    let total = s
        .iter()
        .fold(T::zero(), |acc, i| acc + ft.clone() - f.value(&t.without(i)));
    total.le_rel(&f.value(s), REL_TOL)
}

/// `Σ_{i∈S} f(i | T∖{i}) ≤ f(S)` for `S ⊆ T`, which holds for XOS `f`.
///
/// Exhaustive over all pairs up to [`EXHAUSTIVE_LEMMA_CAP`] agents,
/// otherwise `trials` random pairs.
pub fn check_marginal_lemma<T: Scalar>(
    f: &RewardFunction<T>,
    trials: usize,
    seed: u64,
) -> LemmaReport {
    let n = f.n();
    let mut checked = 0;
    if n <= EXHAUSTIVE_LEMMA_CAP {
        let tab = value_table(f);
        for t in 0..tab.len() {
            let marginals: Vec<(usize, T)> = (0..n)
                .filter(|i| t >> i & 1 == 1)
                .map(|i| (i, tab[t].clone() - tab[t ^ 1 << i].clone()))
                .collect();
            let mut s = t;
            loop {
                checked += 1;
                let total = marginals
                    .iter()
                    .filter(|(i, _)| s >> i & 1 == 1)
                    .fold(T::zero(), |acc, (_, m)| acc + m.clone());
                if !total.le_rel(&tab[s], REL_TOL) {
                    return LemmaReport {
                        checked,
                        hypothesis_met: checked,
                        exhaustive: true,
                        violation: Some(vec![mask_set(n, s), mask_set(n, t)]),
                    };
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & t;
            }
        }
        return LemmaReport {
            checked,
            hypothesis_met: checked,
            exhaustive: true,
            violation: None,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        checked += 1;
        let t = random_set(&mut rng, n);
        let s = random_subset(&mut rng, &t);
        if !marginal_sum_ok(f, &s, &t, &f.value(&t)) {
            return LemmaReport {
                checked,
                hypothesis_met: checked,
                exhaustive: false,
                violation: Some(vec![s, t]),
            };
        }
    }
    LemmaReport {
        checked,
        hypothesis_met: checked,
        exhaustive: false,
        violation: None,
    }
}

fn subsets_of(s: &AgentSet, limit: usize, seed: u64) -> (Vec<AgentSet>, bool) {
    let members = s.to_vec();
    let n = s.universe();
    if members.len() <= limit {
        let subsets = (0..1usize << members.len())
            .map(|m| {
                AgentSet::from_indices(
                    n,
                    members.iter().enumerate().filter(|(k, _)| m >> k & 1 == 1).map(|(_, &i)| i),
                )
                .expect("in range")
            })
            .collect();
        (subsets, true)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ((0..SAMPLES).map(|_| random_subset(&mut rng, s)).collect(), false)
    }
}

/// For an optimal `S*`: `Σ_{i∈S} √c_i ≤ √f(S)` for every `S ⊆ S*`.
pub fn check_sqrt_cost_lemma<T: Scalar>(inst: &Instance<T>, s_star: &AgentSet) -> LemmaReport {
    let (subsets, exhaustive) = subsets_of(s_star, EXHAUSTIVE_CLASS_CAP, 0);
    let mut checked = 0;
    for s in subsets {
        checked += 1;
        let lhs: f64 = s.iter().map(|i| inst.costs[i].to_f64().sqrt()).sum();
        let rhs = inst.reward.value(&s).to_f64().sqrt();
        if !lhs.le_rel(&rhs, REL_TOL) {
            return LemmaReport {
                checked,
                hypothesis_met: checked,
                exhaustive,
                violation: Some(vec![s, s_star.clone()]),
            };
        }
    }
    LemmaReport {
        checked,
        hypothesis_met: checked,
        exhaustive,
        violation: None,
    }
}

/// If `f(i | S∖{i}) ≥ √(2 c_i f(S))` for all `i ∈ S`, then `g(S) ≥ f(S)/2`.
/// The hypothesis is tested in squared form, so it is exact on rationals.
pub fn check_half_value_lemma<T: Scalar>(inst: &Instance<T>, trials: usize, seed: u64) -> LemmaReport {
    let n = inst.n();
    let f = &inst.reward;
    let sets: Vec<AgentSet> = if n <= EXHAUSTIVE_LEMMA_CAP {
        (0..1usize << n).map(|m| mask_set(n, m)).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..trials).map(|_| random_set(&mut rng, n)).collect()
    };
    let exhaustive = n <= EXHAUSTIVE_LEMMA_CAP;
    let (mut checked, mut met) = (0, 0);
    for s in sets {
        checked += 1;
        let fs = f.value(&s);
        let two = T::from_int(2);
        let hypothesis = s.iter().all(|i| {
            let m = f.marginal(i, &s.without(i));
            m >= T::zero() && (two.clone() * inst.costs[i].clone() * fs.clone()).le_rel(&(m.clone() * m), REL_TOL)
        });
        if !hypothesis {
            continue;
        }
        met += 1;
        let half = Utility::Finite(fs / two);
        let g = principal_utility(inst, &s);
        let ok = match (&g, &half) {
            (Utility::Finite(a), Utility::Finite(b)) => b.le_rel(a, REL_TOL),
            _ => false,
        };
        if !ok {
            return LemmaReport {
                checked,
                hypothesis_met: met,
                exhaustive,
                violation: Some(vec![s]),
            };
        }
    }
    LemmaReport {
        checked,
        hypothesis_met: met,
        exhaustive,
        violation: None,
    }
}

/// `g(S*) ≤ f(S* ∩ A') + max(0, max_i g({i}))`, with `A'` the agents whose
/// cost is at most half their value.
pub fn check_decomposition_lemma<T: Scalar>(inst: &Instance<T>, opt: &OptResult<T>) -> bool {
    let oracle = crate::setfn::Oracle::new(&inst.reward);
    let a_prime = crate::approx::cheap_agents(&oracle, &inst.costs);
    let (_, best_single) = crate::contract::best_single_agent(inst);
    let single = best_single.finite().cloned().unwrap_or_else(T::zero);
    let bound = inst.reward.value(&opt.set.intersection(&a_prime)) + single;
    match &opt.g {
        Utility::NegInfinity => true,
        Utility::Finite(g) => g.le_rel(&bound, REL_TOL),
    }
}

/// A failed bound of the scaling step.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalingViolation {
    NotSubset,
    BelowTarget { value: f64, bound: f64 },
    AboveTarget { value: f64, bound: f64 },
    WeakMarginal { agent: usize },
}

/// Checks `(1−δ)Ψ ≤ f(U) ≤ Ψ + max_{i∈T} f({i})` and
/// `f(i | U∖{i}) ≥ δ·f(i | T∖{i})` for `i ∈ U`.
pub fn check_scaling_output<T: Scalar>(
    f: &RewardFunction<T>,
    input: &AgentSet,
    params: &ScalingParams<T>,
    output: &AgentSet,
) -> Option<ScalingViolation> {
    if !output.is_subset(input) {
        return Some(ScalingViolation::NotSubset);
    }
    let fu = f.value(output);
    let lower = (T::one() - params.delta.clone()) * params.psi.clone();
    if !lower.le_rel(&fu, REL_TOL) {
        return Some(ScalingViolation::BelowTarget {
            value: fu.to_f64(),
            bound: lower.to_f64(),
        });
    }
    let max_single = input
        .iter()
        .map(|i| f.singleton_value(i))
        .fold(T::zero(), T::max_of);
    let upper = params.psi.clone() + max_single;
    if !fu.le_rel(&upper, REL_TOL) {
        return Some(ScalingViolation::AboveTarget {
            value: fu.to_f64(),
            bound: upper.to_f64(),
        });
    }
    output
        .iter()
        .find(|&i| {
            let need = params.delta.clone() * f.marginal(i, &input.without(i));
            !need.le_rel(&f.marginal(i, &output.without(i)), REL_TOL)
        })
        .map(|agent| ScalingViolation::WeakMarginal { agent })
}

// ---------------------------------------------------------------------------
// Lower-bound families

/// One checked statement about a lower-bound instance. Non-binding claims
/// are asymptotic and reported for information only.
#[derive(Clone, Debug, PartialEq)]
pub struct Claim {
    pub statement: String,
    pub holds: bool,
    pub binding: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LbFamilyCheck {
    pub family: LowerBoundFamily,
    pub report: LbReport<Rational>,
    pub claims: Vec<Claim>,
}

impl LbFamilyCheck {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.holds || !c.binding)
    }
}

fn q(a: i64, b: i64) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

fn at_least(g: &Utility<Rational>, bound: &Rational) -> bool {
    g.finite().is_some_and(|v| v >= bound)
}

fn at_most(g: &Utility<Rational>, bound: &Rational) -> bool {
    g.finite().is_none_or(|v| v <= bound)
}

/// `f' ≤ f ≤ (1 + 3/(3+√n))·f'` on every class of the subadditive family.
pub fn check_sandwich(inst: &Instance<Rational>) -> Result<Option<AgentSet>> {
    let n = inst.n();
    let envelope = subadditive_lb_envelope(n)?;
    let r = even_square_root(n).expect("envelope checked n") as i64;
    let factor = q(1, 1) + q(3, 3 + r);
    let t = bump_set_of(&inst.reward);
    Ok(class_representatives(n, t.as_ref()).into_iter().find(|s| {
        let low = &envelope[s.len()];
        let v = inst.reward.value(s);
        !(*low <= v && v <= &factor * low)
    }))
}

/// Recognizes the family, evaluates its claims and reports the per-cardinality
/// maxima of `g` off the distinguished set.
pub fn verify_lb_family(inst: &Instance<Rational>) -> Result<LbFamilyCheck> {
    let family = LowerBoundFamily::detect(inst).ok_or_else(|| {
        Error::Unsupported("instance is not a member of a lower-bound family".into())
    })?;
    let report = lb_family_report(inst)?;
    let n = inst.n();
    let g_t = &report.g_bump_set;
    let g_o = &report.g_best_other;
    let mut claims = Vec::new();
    let mut claim = |statement: String, holds: bool, binding: bool, detail: String| {
        claims.push(Claim {
            statement,
            holds,
            binding,
            detail,
        })
    };
    let unique = match (g_t, g_o) {
        (Utility::Finite(a), Utility::Finite(b)) => a > b,
        (Utility::Finite(_), Utility::NegInfinity) => true,
        _ => false,
    };
    match family {
        LowerBoundFamily::Subadditive => {
            let r = even_square_root(n).expect("family members have square n") as i64;
            claim(
                "g(T) ≥ √n/4".into(),
                at_least(g_t, &q(r, 4)),
                true,
                format!("g(T) = {g_t}, √n/4 = {}", format_scalar(&q(r, 4))),
            );
            claim(
                "g(S) ≤ 5 for all S ≠ T".into(),
                at_most(g_o, &q(5, 1)),
                true,
                format!("max = {g_o} at {}", report.best_other),
            );
            let sub = check_class(&inst.reward, FunctionClass::Subadditive)?;
            claim(
                "f is subadditive".into(),
                sub.passed(),
                true,
                format!("{:?}, {} pairs", sub.method, sub.checked),
            );
            let sandwich = check_sandwich(inst)?;
            claim(
                "f' ≤ f ≤ (1 + 3/(3+√n))·f'".into(),
                sandwich.is_none(),
                true,
                sandwich.map_or_else(|| "all classes".into(), |s| format!("fails at {s}")),
            );
        }
        LowerBoundFamily::Xos => {
            claim(
                "g(T) ≥ 5/4".into(),
                at_least(g_t, &q(5, 4)),
                true,
                format!("g(T) = {g_t}"),
            );
            claim(
                "g(S) ≤ 11/10 for all S ≠ T (for large n)".into(),
                at_most(g_o, &q(11, 10)),
                false,
                format!("max = {g_o} at {}", report.best_other),
            );
            let xos = check_class(&inst.reward, FunctionClass::XosSupported)?;
            claim(
                "f is XOS with the listed clauses".into(),
                xos.passed(),
                true,
                format!("{:?}, {} sets", xos.method, xos.checked),
            );
        }
    }
    claim(
        "T is the unique optimum".into(),
        unique,
        false,
        format!("g(T) = {g_t}, best other = {g_o}"),
    );
    Ok(LbFamilyCheck {
        family,
        report,
        claims,
    })
}
