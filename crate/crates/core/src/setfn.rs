//! Set-function representations and the oracle primitives over them.
//!
//! A [`RewardFunction`] answers value queries directly. Counting access goes
//! through an [`Oracle`], which wraps a shared function with per-solve
//! [`QueryCounter`] state and exposes value, exact demand and approximate
//! demand queries.

use std::cell::Cell;
use std::cmp::Ordering;

use crate::agents::AgentSet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest finite-price support for which demand is answered by enumeration.
pub const EXHAUSTIVE_DEMAND_CAP: usize = 24;

/// Largest `n` accepted by the explicit [`RewardFunction::Table`] kind.
pub const TABLE_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub enum RewardFunction<T> {
    /// `f(S) = Σ_{i∈S} values[i]`.
    Additive { values: Vec<T> },
    /// `f(S) = max_k Σ_{i∈S} clauses[k][i]`; every clause has length `n`.
    XosClauses { n: usize, clauses: Vec<Vec<T>> },
    /// Weighted coverage: `f(S)` is the weight of `∪_{i∈S} covers[i]`.
    Coverage {
        covers: Vec<Vec<usize>>,
        weights: Vec<T>,
    },
    /// `f(S) = table[|S|]`.
    SymmetricTable { table: Vec<T> },
    /// `f(S) = table[|S|] + [S = bump_set] · bump`.
    BumpedSymmetric {
        table: Vec<T>,
        bump_set: AgentSet,
        bump: T,
    },
    /// Explicit value per subset, indexed by bitmask.
    Table { n: usize, values: Vec<T> },
}

impl<T: Scalar> RewardFunction<T> {
    pub fn additive(values: Vec<T>) -> Result<Self> {
        Self::validated(RewardFunction::Additive { values })
    }

    pub fn xos(n: usize, clauses: Vec<Vec<T>>) -> Result<Self> {
        Self::validated(RewardFunction::XosClauses { n, clauses })
    }

    pub fn coverage(covers: Vec<Vec<usize>>, weights: Vec<T>) -> Result<Self> {
        Self::validated(RewardFunction::Coverage { covers, weights })
    }

    pub fn symmetric(table: Vec<T>) -> Result<Self> {
        Self::validated(RewardFunction::SymmetricTable { table })
    }

    pub fn bumped(table: Vec<T>, bump_set: AgentSet, bump: T) -> Result<Self> {
        Self::validated(RewardFunction::BumpedSymmetric {
            table,
            bump_set,
            bump,
        })
    }

    pub fn table(n: usize, values: Vec<T>) -> Result<Self> {
        Self::validated(RewardFunction::Table { n, values })
    }

    fn validated(f: Self) -> Result<Self> {
        f.validate()?;
        Ok(f)
    }

    /// Checks the representation invariants: nonnegative weights,
    /// normalization, and monotonicity for the table kinds.
    pub fn validate(&self) -> Result<()> {
        let negative = |what: &str, idx: String| {
            Error::MalformedInput(format!("negative {what} at {idx}"))
        };
        match self {
            RewardFunction::Additive { values } => {
                if let Some(i) = values.iter().position(|v| *v < T::zero()) {
                    return Err(negative("value", format!("agent {i}")));
                }
            }
            RewardFunction::XosClauses { n, clauses } => {
                for (k, clause) in clauses.iter().enumerate() {
                    if clause.len() != *n {
                        return Err(Error::MalformedInput(format!(
                            "clause {k} has {} weights, expected {n}",
                            clause.len()
                        )));
                    }
                    if let Some(i) = clause.iter().position(|w| *w < T::zero()) {
                        return Err(negative("clause weight", format!("clause {k}, agent {i}")));
                    }
                }
            }
            RewardFunction::Coverage { covers, weights } => {
                if let Some(e) = weights.iter().position(|w| *w < T::zero()) {
                    return Err(negative("element weight", format!("element {e}")));
                }
                for (i, cover) in covers.iter().enumerate() {
                    if let Some(&e) = cover.iter().find(|&&e| e >= weights.len()) {
                        return Err(Error::MalformedInput(format!(
                            "agent {i} covers element {e} outside universe of {}",
                            weights.len()
                        )));
                    }
                }
            }
            RewardFunction::SymmetricTable { table } => check_cardinality_table(table)?,
            RewardFunction::BumpedSymmetric {
                table,
                bump_set,
                bump,
            } => {
                check_cardinality_table(table)?;
                let n = table.len() - 1;
                if bump_set.universe() != n {
                    return Err(Error::MalformedInput(format!(
                        "bump set over {} agents, table over {n}",
                        bump_set.universe()
                    )));
                }
                if *bump < T::zero() {
                    return Err(negative("bump", "bump".into()));
                }
                let k = bump_set.len();
                if k == 0 && !bump.is_zero() {
                    return Err(Error::MalformedInput("not normalized: f(∅) ≠ 0".into()));
                }
                if k < n && table[k].clone() + bump.clone() > table[k + 1] {
                    return Err(Error::MalformedInput(format!(
                        "not monotone: bumped value at cardinality {k} exceeds table[{}]",
                        k + 1
                    )));
                }
            }
            RewardFunction::Table { n, values } => {
                if *n > TABLE_CAP {
                    return Err(Error::MalformedInput(format!(
                        "explicit table limited to n ≤ {TABLE_CAP}, got {n}"
                    )));
                }
                if values.len() != 1 << n {
                    return Err(Error::MalformedInput(format!(
                        "table has {} entries, expected 2^{n}",
                        values.len()
                    )));
                }
                if !values[0].is_zero() {
                    return Err(Error::MalformedInput("not normalized: f(∅) ≠ 0".into()));
                }
                for mask in 0..values.len() {
                    for i in 0..*n {
                        let sup = mask | 1 << i;
                        if values[sup] < values[mask] {
                            return Err(Error::MalformedInput(format!(
                                "not monotone: f({}) > f({})",
                                AgentSet::from_mask(*n, mask as u64),
                                AgentSet::from_mask(*n, sup as u64)
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        match self {
            RewardFunction::Additive { values } => values.len(),
            RewardFunction::XosClauses { n, .. } => *n,
            RewardFunction::Coverage { covers, .. } => covers.len(),
            RewardFunction::SymmetricTable { table } => table.len() - 1,
            RewardFunction::BumpedSymmetric { table, .. } => table.len() - 1,
            RewardFunction::Table { n, .. } => *n,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            RewardFunction::Additive { .. } => "additive",
            RewardFunction::XosClauses { .. } => "xos-clauses",
            RewardFunction::Coverage { .. } => "coverage",
            RewardFunction::SymmetricTable { .. } => "symmetric-table",
            RewardFunction::BumpedSymmetric { .. } => "bumped-symmetric",
            RewardFunction::Table { .. } => "table",
        }
    }

    /// Whether `f` is submodular by construction of its representation.
    pub fn is_submodular_kind(&self) -> bool {
        matches!(
            self,
            RewardFunction::Additive { .. } | RewardFunction::Coverage { .. }
        )
    }

    pub fn is_symmetric_kind(&self) -> bool {
        matches!(
            self,
            RewardFunction::SymmetricTable { .. } | RewardFunction::BumpedSymmetric { .. }
        )
    }

    /// Checked value query.
    pub fn eval(&self, s: &AgentSet) -> Result<T> {
        if s.universe() != self.n() {
            return Err(Error::MalformedInput(format!(
                "set over {} agents queried on a function over {}",
                s.universe(),
                self.n()
            )));
        }
        Ok(self.value(s))
    }

    /// Unchecked value query; `s` must live in the ground set of `f`.
    pub fn value(&self, s: &AgentSet) -> T {
        debug_assert_eq!(s.universe(), self.n());
        match self {
            RewardFunction::Additive { values } => sum(s.iter().map(|i| values[i].clone())),
            RewardFunction::XosClauses { clauses, .. } => clauses
                .iter()
                .map(|clause| sum(s.iter().map(|i| clause[i].clone())))
                .fold(T::zero(), T::max_of),
            RewardFunction::Coverage { covers, weights } => {
                let mut covered = vec![false; weights.len()];
                for i in s.iter() {
                    for &e in &covers[i] {
                        covered[e] = true;
                    }
                }
                sum(covered
                    .iter()
                    .zip(weights)
                    .filter(|(c, _)| **c)
                    .map(|(_, w)| w.clone()))
            }
            RewardFunction::SymmetricTable { table } => table[s.len()].clone(),
            RewardFunction::BumpedSymmetric {
                table,
                bump_set,
                bump,
            } => {
                let base = table[s.len()].clone();
                if s == bump_set {
                    base + bump.clone()
                } else {
                    base
                }
            }
            RewardFunction::Table { values, .. } => {
                values[s.to_mask().expect("table kind has n ≤ 24") as usize].clone()
            }
        }
    }

    /// `f(i | S∖{i})` when `i ∈ S`, else `f(i | S)`.
    pub fn marginal(&self, i: usize, s: &AgentSet) -> T {
        if s.contains(i) {
            self.value(s) - self.value(&s.without(i))
        } else {
            self.value(&s.with(i)) - self.value(s)
        }
    }

    pub fn singleton_value(&self, i: usize) -> T {
        self.value(&AgentSet::singleton(self.n(), i))
    }

    /// Converts every coefficient to another scalar type.
    pub fn map<U: Scalar>(&self, conv: impl Fn(&T) -> U) -> RewardFunction<U> {
        let all = |v: &[T]| v.iter().map(&conv).collect::<Vec<U>>();
        match self {
            RewardFunction::Additive { values } => RewardFunction::Additive {
                values: all(values),
            },
            RewardFunction::XosClauses { n, clauses } => RewardFunction::XosClauses {
                n: *n,
                clauses: clauses.iter().map(|c| all(c)).collect(),
            },
            RewardFunction::Coverage { covers, weights } => RewardFunction::Coverage {
                covers: covers.clone(),
                weights: all(weights),
            },
            RewardFunction::SymmetricTable { table } => {
                RewardFunction::SymmetricTable { table: all(table) }
            }
            RewardFunction::BumpedSymmetric {
                table,
                bump_set,
                bump,
            } => RewardFunction::BumpedSymmetric {
                table: all(table),
                bump_set: bump_set.clone(),
                bump: conv(bump),
            },
            RewardFunction::Table { n, values } => RewardFunction::Table {
                n: *n,
                values: all(values),
            },
        }
    }

    /// An explicit XOS clause list for `f`, when the representation has one.
    ///
    /// Additive functions are a single clause. A bumped symmetric function is
    /// materialized only when it is exactly the hard XOS family: per agent `i`
    /// the clauses `a_i` (`1+3/n` on `i`, `3/n` elsewhere) and `a_i'`
    /// (`1/2+4/n` on `i`, `4/n` elsewhere), followed by `a_T` (`5/n` on the
    /// bump set).
    pub fn xos_clauses(&self) -> Option<Vec<Vec<T>>> {
        match self {
            RewardFunction::Additive { values } => Some(vec![values.clone()]),
            RewardFunction::XosClauses { clauses, .. } => Some(clauses.clone()),
            RewardFunction::BumpedSymmetric {
                table,
                bump_set,
                bump,
            } => {
                let n = table.len() - 1;
                if n < 2 || n % 2 == 1 || bump_set.len() != n / 2 + 1 {
                    return None;
                }
                let frac = |a: i64, b: i64| T::from_ratio(a, b);
                let ni = n as i64;
                if *bump != frac(1, ni) {
                    return None;
                }
                let matches = table.iter().enumerate().skip(1).all(|(k, v)| {
                    let k = k as i64;
                    let expect = if 2 * k <= ni {
                        T::one() + frac(3 * k, ni)
                    } else {
                        frac(1, 2) + frac(4 * k, ni)
                    };
                    *v == expect
                });
                if !matches {
                    return None;
                }
                let mut clauses = Vec::with_capacity(2 * n + 1);
                for i in 0..n {
                    let mut a = vec![frac(3, ni); n];
                    a[i] = T::one() + frac(3, ni);
                    let mut a_prime = vec![frac(4, ni); n];
                    a_prime[i] = frac(1, 2) + frac(4, ni);
                    clauses.push(a);
                    clauses.push(a_prime);
                }
                clauses.push(
                    (0..n)
                        .map(|i| {
                            if bump_set.contains(i) {
                                frac(5, ni)
                            } else {
                                T::zero()
                            }
                        })
                        .collect(),
                );
                Some(clauses)
            }
            _ => None,
        }
    }

    /// The additive supporting clause of `f` on `s`: `a(S) = f(S)` and
    /// `a ≤ f` pointwise on all sets.
    pub fn xos_supporting_additive(&self, s: &AgentSet) -> Result<Vec<T>> {
        let clauses = self.xos_clauses().ok_or_else(|| {
            Error::Unsupported(format!(
                "{} reward has no explicit XOS clause list",
                self.kind_name()
            ))
        })?;
        let target = self.eval(s)?;
        let mut best: Option<(usize, T)> = None;
        for (k, clause) in clauses.iter().enumerate() {
            let v = sum(s.iter().map(|i| clause[i].clone()));
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((k, v));
            }
        }
        match best {
            Some((k, v)) if v.eq_rel(&target, 1e-12) => Ok(clauses[k].clone()),
            Some((_, v)) => Err(Error::CorruptRepresentation(format!(
                "best clause gives {v} on {s}, but f = {target}"
            ))),
            None if target.is_zero() => Ok(vec![T::zero(); self.n()]),
            None => Err(Error::CorruptRepresentation(
                "empty clause list for a nonzero function".into(),
            )),
        }
    }
}

fn check_cardinality_table<T: Scalar>(table: &[T]) -> Result<()> {
    if table.is_empty() {
        return Err(Error::MalformedInput("empty cardinality table".into()));
    }
    if !table[0].is_zero() {
        return Err(Error::MalformedInput("not normalized: f(∅) ≠ 0".into()));
    }
    for k in 1..table.len() {
        if table[k] < table[k - 1] {
            return Err(Error::MalformedInput(format!(
                "not monotone: table[{k}] < table[{}]",
                k - 1
            )));
        }
    }
    Ok(())
}

pub(crate) fn sum<T: Scalar>(items: impl Iterator<Item = T>) -> T {
    items.fold(T::zero(), |acc, x| acc + x)
}

/// Per-agent prices; `None` is the infinite price excluding an agent.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceVector<T> {
    prices: Vec<Option<T>>,
}

impl<T: Scalar> PriceVector<T> {
    pub fn new(prices: Vec<Option<T>>) -> Result<Self> {
        if let Some(i) = prices
            .iter()
            .position(|p| p.as_ref().is_some_and(|p| *p < T::zero()))
        {
            return Err(Error::MalformedInput(format!("negative price for agent {i}")));
        }
        Ok(PriceVector { prices })
    }

    pub fn finite(prices: Vec<T>) -> Result<Self> {
        Self::new(prices.into_iter().map(Some).collect())
    }

    pub fn uniform(n: usize, price: T) -> Result<Self> {
        Self::finite(vec![price; n])
    }

    pub fn all_infinite(n: usize) -> Self {
        PriceVector {
            prices: vec![None; n],
        }
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&T> {
        self.prices[i].as_ref()
    }

    /// Agents with a finite price.
    pub fn support(&self) -> AgentSet {
        let n = self.prices.len();
        let mut s = AgentSet::empty(n);
        for (i, p) in self.prices.iter().enumerate() {
            if p.is_some() {
                s.insert(i);
            }
        }
        s
    }

    /// `Σ_{i∈S} p_i`, or `None` when `S` holds an infinitely priced agent.
    pub fn total(&self, s: &AgentSet) -> Option<T> {
        s.iter()
            .map(|i| self.prices[i].clone())
            .try_fold(T::zero(), |acc, p| p.map(|p| acc + p))
    }
}

/// Oracle access counts for one solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryCounter {
    pub value_queries: u64,
    pub demand_queries: u64,
    pub approx_demand_queries: u64,
}

/// Counting access to a shared reward function.
pub struct Oracle<'a, T> {
    f: &'a RewardFunction<T>,
    value_queries: Cell<u64>,
    demand_queries: Cell<u64>,
    approx_demand_queries: Cell<u64>,
}

impl<'a, T: Scalar> Oracle<'a, T> {
    pub fn new(f: &'a RewardFunction<T>) -> Self {
        Oracle {
            f,
            value_queries: Cell::new(0),
            demand_queries: Cell::new(0),
            approx_demand_queries: Cell::new(0),
        }
    }

    pub fn function(&self) -> &'a RewardFunction<T> {
        self.f
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    pub fn counter(&self) -> QueryCounter {
        QueryCounter {
            value_queries: self.value_queries.get(),
            demand_queries: self.demand_queries.get(),
            approx_demand_queries: self.approx_demand_queries.get(),
        }
    }

    pub fn reset(&self) {
        self.value_queries.set(0);
        self.demand_queries.set(0);
        self.approx_demand_queries.set(0);
    }

    pub fn value(&self, s: &AgentSet) -> T {
        self.value_queries.set(self.value_queries.get() + 1);
        self.f.value(s)
    }

    pub fn eval(&self, s: &AgentSet) -> Result<T> {
        let v = self.f.eval(s)?;
        self.value_queries.set(self.value_queries.get() + 1);
        Ok(v)
    }

    /// Marginal of `i` with respect to `S` (or `S∖{i}` when `i ∈ S`); two value queries.
    pub fn marginal(&self, i: usize, s: &AgentSet) -> T {
        if s.contains(i) {
            self.value(s) - self.value(&s.without(i))
        } else {
            self.value(&s.with(i)) - self.value(s)
        }
    }

    pub fn singleton(&self, i: usize) -> T {
        self.value(&AgentSet::singleton(self.n(), i))
    }

    pub fn demand(&self, prices: &PriceVector<T>) -> Result<AgentSet> {
        self.demand_queries.set(self.demand_queries.get() + 1);
        exact_demand(self.f, prices)
    }

    pub fn approx_demand(&self, prices: &PriceVector<T>) -> AgentSet {
        self.approx_demand_queries
            .set(self.approx_demand_queries.get() + 1);
        distorted_greedy(self, prices)
    }
}

/// Keeps `(value, set)` maximal under value, then the global tie order.
fn better<T: Scalar>(value: &T, set: &AgentSet, best: &Option<(T, AgentSet)>) -> bool {
    match best {
        None => true,
        Some((bv, bs)) => match value.partial_cmp(bv) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Equal) => set.tie_cmp(bs) == Ordering::Less,
            _ => false,
        },
    }
}

/// A set maximizing `f(S) − p(S)` over the finite-price agents, with ties
/// broken by [`AgentSet::tie_cmp`].
pub fn exact_demand<T: Scalar>(f: &RewardFunction<T>, prices: &PriceVector<T>) -> Result<AgentSet> {
    let n = f.n();
    if prices.len() != n {
        return Err(Error::MalformedInput(format!(
            "{} prices for {n} agents",
            prices.len()
        )));
    }
    let support = prices.support();
    match f {
        RewardFunction::Additive { values } => {
            let mut s = AgentSet::empty(n);
            for i in support.iter() {
                if values[i] > prices.get(i).cloned().unwrap() {
                    s.insert(i);
                }
            }
            Ok(s)
        }
        RewardFunction::XosClauses { clauses, .. } => {
            // max_S max_k a_k(S) − p(S) = max_k Σ_i (a_ki − p_i)^+, and the
            // tie-order minimal maximizer is the positive part of some optimal clause.
            let mut best: Option<(T, AgentSet)> = None;
            for clause in clauses {
                let mut s = AgentSet::empty(n);
                let mut net = T::zero();
                for i in support.iter() {
                    let gain = clause[i].clone() - prices.get(i).cloned().unwrap();
                    if gain > T::zero() {
                        s.insert(i);
                        net = net + gain;
                    }
                }
                if better(&net, &s, &best) {
                    best = Some((net, s));
                }
            }
            Ok(best.map_or_else(|| AgentSet::empty(n), |(_, s)| s))
        }
        RewardFunction::SymmetricTable { table } => {
            Ok(symmetric_demand(table, None, prices, &support))
        }
        RewardFunction::BumpedSymmetric {
            table,
            bump_set,
            bump,
        } => Ok(symmetric_demand(
            table,
            Some((bump_set, bump)),
            prices,
            &support,
        )),
        RewardFunction::Coverage { .. } | RewardFunction::Table { .. } => {
            let members = support.to_vec();
            if members.len() > EXHAUSTIVE_DEMAND_CAP {
                return Err(Error::Unsupported(format!(
                    "exact demand for {} reward over {} priced agents exceeds the enumeration cap of {EXHAUSTIVE_DEMAND_CAP}",
                    f.kind_name(),
                    members.len()
                )));
            }
            let mut best: Option<(T, AgentSet)> = None;
            for mask in 0u64..1 << members.len() {
                let mut s = AgentSet::empty(n);
                let mut price = T::zero();
                for (bit, &i) in members.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        s.insert(i);
                        price = price + prices.get(i).cloned().unwrap();
                    }
                }
                let net = f.value(&s) - price;
                if better(&net, &s, &best) {
                    best = Some((net, s));
                }
            }
            Ok(best.map(|(_, s)| s).unwrap())
        }
    }
}

fn symmetric_demand<T: Scalar>(
    table: &[T],
    bump: Option<(&AgentSet, &T)>,
    prices: &PriceVector<T>,
    support: &AgentSet,
) -> AgentSet {
    let n = table.len() - 1;
    let mut order = support.to_vec();
    order.sort_by(|&a, &b| {
        prices
            .get(a)
            .partial_cmp(&prices.get(b))
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let bonus = |s: &AgentSet| match bump {
        Some((t, b)) if s == t => b.clone(),
        _ => T::zero(),
    };
    let mut best: Option<(T, AgentSet)> = None;
    let mut s = AgentSet::empty(n);
    let mut price = T::zero();
    for k in 0..=order.len() {
        if k > 0 {
            let i = order[k - 1];
            s.insert(i);
            price = price + prices.get(i).cloned().unwrap();
        }
        let net = table[k].clone() + bonus(&s) - price.clone();
        if better(&net, &s, &best) {
            best = Some((net, s.clone()));
        }
    }
    if let Some((t, b)) = bump {
        if let Some(pt) = prices.total(t) {
            let net = table[t.len()].clone() + b.clone() - pt;
            if better(&net, t, &best) {
                best = Some((net, t.clone()));
            }
        }
    }
    best.map(|(_, s)| s).unwrap()
}

/// Distorted greedy for `max f(S) − p(S)` with monotone submodular `f`:
/// returns `S` with `f(S) − p(S) ≥ (1 − 1/e) f(T) − p(T)` for every `T`
/// over the finite-price agents, using value queries only.
fn distorted_greedy<T: Scalar>(oracle: &Oracle<'_, T>, prices: &PriceVector<T>) -> AgentSet {
    let n = oracle.n();
    let ground = prices.support().to_vec();
    let m = ground.len();
    let mut s = AgentSet::empty(n);
    if m == 0 {
        return s;
    }
    // (1 − 1/m)^(m − (step+1)), computed exactly for rational scalars.
    let shrink = T::from_ratio(m as i64 - 1, m as i64);
    let mut weights = vec![T::one(); m];
    for step in (0..m.saturating_sub(1)).rev() {
        weights[step] = weights[step + 1].clone() * shrink.clone();
    }
    let mut current = T::zero();
    for weight in weights {
        let mut pick: Option<(T, usize, T)> = None;
        for &e in &ground {
            if s.contains(e) {
                continue;
            }
            let with = oracle.value(&s.with(e));
            let score = weight.clone() * (with.clone() - current.clone())
                - prices.get(e).cloned().unwrap();
            if pick.as_ref().is_none_or(|(best, _, _)| score > *best) {
                pick = Some((score, e, with));
            }
        }
        if let Some((score, e, with)) = pick {
            if score > T::zero() {
                s.insert(e);
                current = with;
            }
        }
    }
    s
}
