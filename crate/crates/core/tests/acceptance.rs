//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lincon::additive::{fptas_additive, partition_instance, partition_target};
use lincon::approx::{
    approx_contract_submodular, approx_contract_xos, scale_set, MainParams, ScalingParams,
};
use lincon::bench::{run_bench, BenchConfig, BenchFamily};
use lincon::contract::Instance;
use lincon::instances::{
    gen_random, gen_subadditive_lb, gen_xos_lb, subadditive_lb_envelope, BumpChoice, RandomKind,
    RandomParams,
};
use lincon::scalar::{format_rational, Rational, Scalar, Utility};
use lincon::setfn::{Oracle, PriceVector};
use lincon::verify::{
    brute_force_enumerate, brute_force_opt, check_class, check_decomposition_lemma,
    check_half_value_lemma, check_marginal_lemma, check_scaling_output, check_sqrt_cost_lemma,
    lb_family_report, value_table, CheckMethod, FunctionClass,
};
use lincon::{AgentSet, Algorithm, SolveOptions};

type Outcome = Result<String, String>;

fn q(a: i64, b: i64) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn float(inst: &Instance<Rational>) -> Instance<f64> {
    inst.map(Scalar::to_f64)
}

fn g_of(u: &Utility<f64>) -> f64 {
    u.to_f64()
}

fn fptas_guarantee() -> Outcome {
    let params = RandomParams::default();
    let epsilons = [0.3, 0.1, 0.03];
    let mut runs = 0;
    let mut tightest = f64::INFINITY;
    for seed in 0..200u64 {
        let n = 6 + (seed as usize % 11);
        let inst = float(&gen_random(RandomKind::Additive, n, seed, &params).unwrap());
        let opt = g_of(&brute_force_opt(&inst).unwrap().g);
        for &eps in &epsilons {
            let got = g_of(&fptas_additive(&inst, eps).unwrap().g);
            runs += 1;
            ensure(got >= (1.0 - eps) * opt - 1e-12, || {
                format!("seed {seed}, n {n}, ε {eps}: g = {got} < (1−ε)·{opt}")
            })?;
            if opt > 0.0 {
                tightest = tightest.min(got / opt);
            }
        }
    }
    Ok(format!("{runs} runs, worst g/g* = {tightest:.6}"))
}

fn partition_reduction() -> Outcome {
    let mut notes = Vec::new();
    for (w, yes) in [(vec![1u64, 1, 2], true), (vec![1, 1, 1], false), (vec![2], false)] {
        let inst = partition_instance(&w).unwrap();
        let opt = brute_force_opt(&inst).unwrap();
        let target = partition_target(&w);
        let g = opt.g.finite().cloned().ok_or("g* = -inf")?;
        if yes {
            ensure(g == target, || format!("w = {w:?}: g* = {g} ≠ W/4 = {target}"))?;
        } else {
            ensure(g < target, || format!("w = {w:?}: g* = {g} not below W/4 = {target}"))?;
        }
        notes.push(format!("{w:?}: g* = {}", format_rational(&g)));
    }
    Ok(notes.join("; "))
}

fn scaling_lemma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let mut trials = 0;
    let mut seed = 0u64;
    while trials < 1000 {
        seed += 1;
        let n = rng.gen_range(2..=14);
        let params = RandomParams {
            clauses: rng.gen_range(1..=5),
            ..RandomParams::default()
        };
        let inst = gen_random(RandomKind::XosClauses, n, seed, &params).unwrap();
        let f = &inst.reward;
        let mut t = AgentSet::empty(n);
        for i in 0..n {
            if rng.gen_bool(0.6) {
                t.insert(i);
            }
        }
        let ft = f.value(&t);
        if ft <= q(0, 1) {
            continue;
        }
        let psi = ft * q(rng.gen_range(0..1000), 1000);
        let delta = q(rng.gen_range(1..=100), 100);
        let params = ScalingParams { psi, delta };
        let u = scale_set(&Oracle::new(f), &t, &params).map_err(|e| e.to_string())?;
        if let Some(v) = check_scaling_output(f, &t, &params, &u) {
            return Err(format!("trial {trials} (seed {seed}): {v:?}"));
        }
        trials += 1;
    }
    Ok(format!("{trials} exact trials, n ≤ 14, zero failures"))
}

/// Random XOS-clause and coverage instances with `n ≤ 14`.
fn xos_corpus() -> Vec<(String, Instance<f64>)> {
    let params = RandomParams::default();
    let mut corpus = Vec::new();
    for seed in 0..100u64 {
        let n = 4 + (seed as usize % 11);
        for kind in [RandomKind::XosClauses, RandomKind::Coverage] {
            let inst = gen_random(kind, n, seed, &params).unwrap();
            corpus.push((format!("{} n={n} seed={seed}", kind.name()), float(&inst)));
        }
    }
    corpus
}

fn xos_guarantee() -> Outcome {
    let params = MainParams::exact_demand(1.01);
    let bound = 1.0 / (256.0 * 1.01 + 2.0);
    let mut worst = f64::INFINITY;
    let mut counted = 0;
    let corpus = xos_corpus();
    for (name, inst) in &corpus {
        let opt = g_of(&brute_force_opt(inst).unwrap().g);
        let got = g_of(&approx_contract_xos(inst, &params).map_err(|e| e.to_string())?.g);
        ensure(got <= opt + 1e-9, || format!("{name}: g = {got} exceeds g* = {opt}"))?;
        if opt > 0.0 {
            counted += 1;
            let ratio = got / opt;
            ensure(ratio >= bound, || format!("{name}: ratio {ratio} < {bound}"))?;
            worst = worst.min(ratio);
        }
    }
    Ok(format!(
        "{} instances ({counted} with g* > 0), worst ratio {worst:.4} vs bound {bound:.6}",
        corpus.len()
    ))
}

fn submodular_guarantee() -> Outcome {
    let params = MainParams::value_queries(1.01);
    let beta = params.beta;
    let bound = params.guarantee();
    let mut worst = f64::INFINITY;
    let mut runs = 0;
    for (name, inst) in xos_corpus().iter().filter(|(_, i)| i.reward.is_submodular_kind()) {
        let opt = g_of(&brute_force_opt(inst).unwrap().g);
        let got = g_of(&approx_contract_submodular(inst, &params).map_err(|e| e.to_string())?.g);
        runs += 1;
        if opt > 0.0 {
            let ratio = got / opt;
            ensure(ratio >= bound, || format!("{name}: ratio {ratio} < {bound}"))?;
            worst = worst.min(ratio);
        }
    }

    // f(S) − p(S) ≥ β·f(T) − p(T) against every T, exhaustively.
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let mut demand_checks = 0;
    for seed in 0..60u64 {
        let n = 4 + (seed as usize % 9);
        let kind = if seed % 2 == 0 { RandomKind::Coverage } else { RandomKind::Additive };
        let inst = float(&gen_random(kind, n, seed, &RandomParams::default()).unwrap());
        let f = &inst.reward;
        let prices: Vec<Option<f64>> = (0..n)
            .map(|i| (!rng.gen_bool(0.15)).then(|| f.singleton_value(i) * rng.gen_range(0.0..1.2)))
            .collect();
        let prices = PriceVector::new(prices).unwrap();
        let oracle = Oracle::new(f);
        let s = oracle.approx_demand(&prices);
        let net = |t: &AgentSet| prices.total(t).map(|p| f.value(t) - p);
        let got = net(&s).ok_or("approximate demand used an infinite price")?;
        let support = prices.support();
        for mask in 0..1u64 << n {
            let t = AgentSet::from_mask(n, mask);
            if !t.is_subset(&support) {
                continue;
            }
            demand_checks += 1;
            let rhs = beta * f.value(&t) - prices.total(&t).unwrap();
            ensure(got >= rhs - 1e-9, || {
                format!("{} seed {seed}: demand {s} nets {got} < {rhs} against {t}", kind.name())
            })?;
        }
    }
    Ok(format!(
        "{runs} submodular instances, worst ratio {worst:.4} vs bound {bound:.6}; \
         approximate demand checked against {demand_checks} sets"
    ))
}

fn supporting_lemmas() -> Outcome {
    let params = RandomParams::default();
    let (mut pairs, mut optima, mut filtered, mut decompositions) = (0, 0, 0, 0);
    let mut xos_kinds: Vec<(String, Instance<Rational>)> = Vec::new();
    for seed in 0..12u64 {
        let n = 6 + (seed as usize % 7);
        for kind in [RandomKind::Additive, RandomKind::Coverage, RandomKind::XosClauses] {
            let inst = gen_random(kind, n, seed, &params).unwrap();
            xos_kinds.push((format!("{} n={n} seed={seed}", kind.name()), inst));
        }
    }
    xos_kinds.push(("xos-lb n=10".into(), gen_xos_lb(10, &BumpChoice::Seed(1)).unwrap()));
    xos_kinds.push(("xos-lb n=12".into(), gen_xos_lb(12, &BumpChoice::Seed(2)).unwrap()));

    for (name, inst) in &xos_kinds {
        let l21 = check_marginal_lemma(&inst.reward, 0, 0);
        ensure(l21.exhaustive && l21.passed(), || format!("marginal lemma, {name}: {:?}", l21.violation))?;
        pairs += l21.checked;

        let opt = brute_force_opt(inst).unwrap();
        let l32 = check_sqrt_cost_lemma(inst, &opt.set);
        ensure(l32.passed(), || format!("sqrt-cost lemma, {name}: {:?}", l32.violation))?;
        optima += 1;

        let l33 = check_half_value_lemma(inst, 0, 0);
        ensure(l33.exhaustive && l33.passed(), || format!("half-value lemma, {name}: {:?}", l33.violation))?;
        filtered += l33.hypothesis_met;
    }

    // Decomposition on subadditive kinds, including the subadditive family.
    let mut subadditive = xos_kinds;
    subadditive.push(("subadditive-lb n=4".into(), gen_subadditive_lb(4, &BumpChoice::Seed(3)).unwrap()));
    for (name, inst) in &subadditive {
        let opt = brute_force_opt(inst).unwrap();
        ensure(check_decomposition_lemma(inst, &opt), || format!("decomposition, {name}"))?;
        decompositions += 1;
    }
    Ok(format!(
        "marginal sums on {pairs} pairs; sqrt-cost at {optima} optima; \
         half-value on {filtered} sets meeting the hypothesis; decomposition on {decompositions} instances"
    ))
}

/// `g` of every subset from a value table, exact.
fn all_utilities(inst: &Instance<Rational>) -> Vec<Utility<Rational>> {
    let n = inst.n();
    let tab = value_table(&inst.reward);
    (0..tab.len())
        .map(|mask| {
            if mask == 0 {
                return Utility::zero();
            }
            let mut share = q(0, 1);
            for i in (0..n).filter(|i| mask >> i & 1 == 1) {
                let m = &tab[mask] - &tab[mask ^ 1 << i];
                if inst.costs[i] == q(0, 1) {
                    continue;
                }
                if m <= q(0, 1) {
                    return Utility::NegInfinity;
                }
                share += &inst.costs[i] / m;
            }
            Utility::Finite((q(1, 1) - share) * &tab[mask])
        })
        .collect()
}

fn subadditive_family() -> Outcome {
    let n = 16;
    let inst = gen_subadditive_lb(n, &BumpChoice::Seed(16)).unwrap();
    let t = AgentSet::from_indices(n, inst.metadata.t_star.clone().unwrap()).unwrap();
    let t_mask = t.to_mask().unwrap() as usize;

    let sub = check_class(&inst.reward, FunctionClass::Subadditive).unwrap();
    ensure(sub.method == CheckMethod::Exhaustive && sub.passed(), || format!("subadditivity: {:?}", sub.witness))?;

    let g = all_utilities(&inst);
    let g_t = g[t_mask].clone();
    let best_other = g
        .iter()
        .enumerate()
        .filter(|(m, _)| *m != t_mask)
        .map(|(_, u)| u.clone())
        .fold(Utility::NegInfinity, |a, b| if b > a { b } else { a });
    ensure(g_t == Utility::Finite(q(63, 16)), || format!("g_T(T) = {g_t}"))?;
    ensure(best_other == Utility::Finite(q(27, 8)), || format!("max over S ≠ T = {best_other}"))?;
    ensure(best_other <= Utility::Finite(q(5, 1)), || "max over S ≠ T exceeds 5".into())?;

    // The structured solver agrees with enumeration.
    let fast = brute_force_opt(&inst).unwrap();
    let slow = brute_force_enumerate(&inst).unwrap();
    ensure(fast.set == slow.set && fast.g == slow.g && fast.set == t, || {
        format!("structured optimum {} vs enumerated {}", fast.set, slow.set)
    })?;

    let envelope = subadditive_lb_envelope(n).unwrap();
    let factor = q(1, 1) + q(3, 7);
    let tab = value_table(&inst.reward);
    for (mask, v) in tab.iter().enumerate() {
        let low = &envelope[mask.count_ones() as usize];
        ensure(low <= v && *v <= &factor * low, || {
            format!("sandwich fails at {}", AgentSet::from_mask(n, mask as u64))
        })?;
    }
    Ok(format!(
        "{} disjoint pairs subadditive; g_T(T) = 63/16, max over S ≠ T = 27/8 over 2^16 sets; sandwich with factor 10/7 on all sets",
        sub.checked
    ))
}

fn xos_family() -> Outcome {
    let small = gen_xos_lb(10, &BumpChoice::Seed(10)).unwrap();
    let rep = check_class(&small.reward, FunctionClass::XosSupported).unwrap();
    ensure(rep.method == CheckMethod::Exhaustive && rep.passed(), || format!("n = 10 clause support: {:?}", rep.witness))?;
    let small_report = lb_family_report(&small).unwrap();

    let n = 100;
    let inst = gen_xos_lb(n, &BumpChoice::Seed(100)).unwrap();
    let rep = check_class(&inst.reward, FunctionClass::XosSupported).unwrap();
    ensure(rep.method == CheckMethod::Structured && rep.passed(), || format!("n = 100 clause support: {:?}", rep.witness))?;

    let report = lb_family_report(&inst).unwrap();
    let expected = (q(5, 2) + q(5, n as i64)) / q(2, 1);
    ensure(report.g_bump_set == Utility::Finite(expected.clone()), || format!("g_T(T) = {}", report.g_bump_set))?;
    ensure(expected >= q(5, 4), || "g_T(T) < 5/4".into())?;
    let cap = Utility::Finite(q(11, 10));
    if let Some((k, g)) = report.per_cardinality.iter().enumerate().find(|(_, g)| **g > cap) {
        return Err(format!("n = 100: cardinality {k} reaches {g} > 11/10"));
    }
    let peak = |r: &lincon::verify::LbReport<Rational>| {
        r.per_cardinality
            .iter()
            .enumerate()
            .skip(2)
            .filter_map(|(k, g)| g.finite().map(|v| (k, v.to_f64())))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
    };
    let (k100, g100) = peak(&report);
    let (k10, g10) = peak(&small_report);
    Ok(format!(
        "clause support exhaustive at n = 10 and by class at n = 100; g_T(T) = {} at n = 100; \
         max over S ≠ T, |S| ≥ 2: {g100:.4} at |S| = {k100} (n = 100), {g10:.4} at |S| = {k10} (n = 10)",
        format_rational(&expected)
    ))
}

fn determinism() -> Outcome {
    let config = |workers| BenchConfig {
        families: vec![
            BenchFamily::Random(RandomKind::Coverage),
            BenchFamily::Random(RandomKind::XosClauses),
            BenchFamily::XosLb,
        ],
        sizes: vec![8],
        seeds: (0..6).collect(),
        algorithms: vec![Algorithm::Brute, Algorithm::Xos, Algorithm::Single],
        options: SolveOptions::default(),
        random: RandomParams::default(),
        workers: Some(workers),
    };
    let first = run_bench(&config(4)).map_err(|e| e.to_string())?.to_structured();
    let second = run_bench(&config(4)).map_err(|e| e.to_string())?.to_structured();
    let serial = run_bench(&config(1)).map_err(|e| e.to_string())?.to_structured();
    ensure(first == second, || "two identical runs differ".into())?;
    ensure(first == serial, || "output depends on the worker count".into())?;
    Ok(format!("{} bytes, identical across runs and worker counts", first.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("FPTAS guarantee", fptas_guarantee),
        ("PARTITION reduction", partition_reduction),
        ("scaling lemma", scaling_lemma),
        ("XOS main guarantee", xos_guarantee),
        ("submodular value-query guarantee", submodular_guarantee),
        ("supporting lemmas", supporting_lemmas),
        ("subadditive lower-bound family", subadditive_family),
        ("XOS lower-bound family", xos_family),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.1}s] {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1}s] {detail}", k + 1);
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
