//! Acceptance suite. Runs each criterion once and prints one PASS/FAIL line
//! per criterion; exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::Rng;

use common::{
    r, random_comparable_instance, random_instance, random_knapsack, random_restricted_knapsack,
    random_unrestricted_knapsack, rng, weighted_mean_size, TreeOracle,
};
use stosched::evaluator::{expected_cost, EvalOptions, PairTable};
use stosched::model::{JobId, ObjectiveKind, Rational, SchedInstance};
use stosched::optimal::{binary_search_optimum, optimal_expected_cost, optimal_value, DpOptions};
use stosched::policy::{priority_order, PriorityRule};
use stosched::reduction::{
    build_sept_pair, build_wsept_pair, count_knapsack_bruteforce, count_via_optimal, count_via_policy, optimal_mode_q,
    restrict_knapsack, KnapsackInstance, PairLayout, ReductionMode, Route,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(res: Result<T, E>, ctx: impl std::fmt::Debug) -> Result<T, String> {
    res.map_err(|e| format!("{ctx:?}: {e}"))
}

fn criterion_one_instances() -> Vec<KnapsackInstance> {
    let mut g = rng(1);
    (0..200).map(|_| random_knapsack(&mut g, 2..=6, 2..=12)).collect()
}

/// Restricted instances with at most six items once transformed: restricted
/// draws with up to six items and unrestricted draws with up to four.
fn criterion_three_instances() -> Vec<KnapsackInstance> {
    let mut g = rng(3);
    (0..50)
        .map(|i| {
            if i % 2 == 0 {
                random_restricted_knapsack(&mut g, 2..=6, 2..=12)
            } else {
                random_unrestricted_knapsack(&mut g, 2..=4, 2..=12)
            }
        })
        .collect()
}

/// Every three-item instance with `B ≤ 6` satisfying `B + 1 < Σ s_i ≤ 3B/2`.
fn criterion_four_instances() -> Vec<KnapsackInstance> {
    let mut out = Vec::new();
    for b in 2..=6u64 {
        for s0 in 1..=b {
            for s1 in 1..=b {
                for s2 in 1..=b {
                    let kp = KnapsackInstance::new(vec![s0, s1, s2], b);
                    if kp.is_restricted() {
                        out.push(kp);
                    }
                }
            }
        }
    }
    out
}

fn criterion1() -> Outcome {
    let instances = criterion_one_instances();
    for kp in &instances {
        let brute = ok(count_knapsack_bruteforce(kp), kp)?;
        let rep = ok(count_via_policy(kp, ReductionMode::Wsept), kp)?;
        ensure(rep.feasible == brute, || format!("{kp:?}: wsept {} vs brute force {brute}", rep.feasible))?;
    }
    Ok(format!("{} instances, wsept count equals brute force", instances.len()))
}

fn criterion2() -> Outcome {
    let mut checked = 0usize;
    let mut rows = 0usize;
    for kp in criterion_one_instances().iter().filter(|kp| kp.total() > kp.bound + 1) {
        let (a, b) = ok(build_wsept_pair(kp), kp)?;
        let table =
            ok(PairTable::build(&a, &b, &PriorityRule::Wsept, ObjectiveKind::StartTimes, &EvalOptions::default()), kp)?;
        let one_over_n = Rational::new(1, kp.n() as i64);
        let knapsack_ids: Vec<JobId> = (0..kp.n() as JobId).collect();
        ensure(table.two_point_ids == knapsack_ids, || format!("{kp:?}: unexpected two-point jobs"))?;
        for row in &table.rows {
            let expect = if kp.fits(row.index) { Rational::zero() } else { one_over_n.clone() };
            ensure(row.difference == expect, || {
                format!("{kp:?}: realization {} differs by {}, expected {expect}", row.bitmask, row.difference)
            })?;
            rows += 1;
        }
        checked += 1;
    }
    Ok(format!("{checked} instances, {rows} realizations: YES contribute 0, NO contribute 1/n"))
}

fn criterion3() -> Outcome {
    let instances = criterion_three_instances();
    let mut transformed = 0usize;
    for kp in &instances {
        let rep = ok(count_via_policy(kp, ReductionMode::Sept), kp)?;
        ensure(rep.route == Route::Construction, || format!("{kp:?}: route {:?}", rep.route))?;
        let effective = if rep.transform_applied { restrict_knapsack(kp).unwrap().0 } else { kp.clone() };
        ensure(effective.n() <= 6, || format!("{kp:?}: {} items after transform", effective.n()))?;
        let q = rep.q.clone().ok_or("missing q")?;
        ensure(q == Rational::new(1, 3 * effective.bound as i64), || format!("{kp:?}: q = {q}"))?;
        let (Some(delta), Some(c1), Some(c2)) = (&rep.delta, &rep.conditional_e1, &rep.conditional_e2) else {
            return Err(format!("{kp:?}: report lacks delta or conditional costs"));
        };
        let scaled = q.pow(effective.n() as u32 - 1) * (c2 - c1);
        ensure(delta == &scaled, || format!("{kp:?}: delta {delta} vs q^(m-1)(E2'-E1') {scaled}"))?;
        let brute = ok(count_knapsack_bruteforce(kp), kp)?;
        ensure(rep.feasible == brute, || format!("{kp:?}: sept {} vs brute force {brute}", rep.feasible))?;
        transformed += usize::from(rep.transform_applied);
    }
    Ok(format!("{} instances ({transformed} transformed), delta factorizes and count matches", instances.len()))
}

fn criterion4() -> Outcome {
    let instances = criterion_four_instances();
    let layout = PairLayout::for_items(3);
    for kp in &instances {
        let q = optimal_mode_q(kp);
        let (i1, i2, _) = ok(build_sept_pair(kp, Some(q)), kp)?;
        for (label, inst) in [("instance 1", &i1), ("instance 2", &i2)] {
            let (opt, tree) = ok(optimal_expected_cost(inst, ObjectiveKind::StartTimes), kp)?;
            let sept = ok(expected_cost(inst, &PriorityRule::Sept, ObjectiveKind::StartTimes), kp)?.total;
            ensure(opt == sept, || format!("{kp:?} {label}: optimum {opt} vs sept {sept}"))?;
            ensure(layout.blockers.iter().all(|b| tree.root.start.contains(b)), || {
                format!("{kp:?} {label}: root starts {:?}", tree.root.start)
            })?;
        }
        let brute = ok(count_knapsack_bruteforce(kp), kp)?;
        let rep = ok(count_via_optimal(kp), kp)?;
        ensure(rep.feasible == brute, || format!("{kp:?}: optimal {} vs brute force {brute}", rep.feasible))?;
    }
    Ok(format!("{} instances: optimum equals sept, blockers start at 0, count matches", instances.len()))
}

fn criterion5() -> Outcome {
    let mut g = rng(5);
    for i in 0..100 {
        let inst = random_instance(&mut g, 6, 3, 3);
        let obj = if i % 2 == 0 { ObjectiveKind::StartTimes } else { ObjectiveKind::CompletionTimes };
        let dp = ok(optimal_value(&inst, obj, &DpOptions::default()), i)?;
        let oracle = TreeOracle::new(&inst, obj).optimum();
        ensure(dp == oracle, || format!("instance {i}: dp {dp} vs decision trees {oracle}"))?;
    }
    Ok("100 instances, memoized DP equals decision-tree enumeration".into())
}

fn criterion6() -> Outcome {
    let mut g = rng(6);
    for i in 0..50 {
        let inst = random_comparable_instance(&mut g, 6, 3);
        let dp = ok(optimal_value(&inst, ObjectiveKind::StartTimes, &DpOptions::default()), i)?;
        let sept = ok(expected_cost(&inst, &PriorityRule::Sept, ObjectiveKind::StartTimes), i)?.total;
        ensure(dp == sept, || format!("instance {i}: dp {dp} vs sept {sept}"))?;
    }
    Ok("50 comparable instances, optimum equals sept".into())
}

fn criterion7() -> Outcome {
    let instances = criterion_four_instances();
    let mut max_calls = 0usize;
    for kp in &instances {
        let q = optimal_mode_q(kp);
        let n = kp.n();
        let (i1, i2, _) = ok(build_sept_pair(kp, Some(q.clone())), kp)?;
        let g = q.pow(n as u32 - 1) * Rational::new(1, 1i64 << n) * Rational::new(1, n as i64);
        for inst in [&i1, &i2] {
            let lo = Rational::zero();
            let hi = upper_cost_bound(inst);
            let out = ok(binary_search_optimum(inst, ObjectiveKind::StartTimes, &lo, &hi, &g), kp)?;
            let opt = ok(optimal_value(inst, ObjectiveKind::StartTimes, &DpOptions::default()), kp)?;
            ensure(out.value == opt, || format!("{kp:?}: search {} vs optimum {opt}", out.value))?;
            let bound = ceil_log2(&((&hi - &lo) / &g)) + 2;
            ensure(out.oracle_calls <= bound, || format!("{kp:?}: {} calls, bound {bound}", out.oracle_calls))?;
            max_calls = max_calls.max(out.oracle_calls);
        }
    }
    Ok(format!("{} pairs, search recovers the optimum, at most {max_calls} oracle calls", instances.len()))
}

fn criterion8() -> Outcome {
    let mut g = rng(8);
    for _ in 0..50 {
        let kp = random_unrestricted_knapsack(&mut g, 2..=8, 2..=12);
        let (out, adj) = ok(restrict_knapsack(&kp), &kp)?;
        ensure(adj == 3u64 << kp.n(), || format!("{kp:?}: adjustment {adj}"))?;
        let before = ok(count_knapsack_bruteforce(&kp), &kp)?;
        let after = ok(count_knapsack_bruteforce(&out), &out)?;
        ensure(after - adj == before, || format!("{kp:?}: {after} - {adj} vs {before}"))?;
    }
    Ok("50 unrestricted instances, transformed count minus 3*2^n equals original".into())
}

fn criterion9() -> Outcome {
    let mut instances: Vec<SchedInstance> = Vec::new();
    for kp in criterion_one_instances().iter().filter(|kp| kp.total() > kp.bound + 1).take(40) {
        let (a, b) = build_wsept_pair(kp).unwrap();
        instances.extend([a, b]);
    }
    for kp in criterion_three_instances().iter().take(10) {
        let eff = if kp.is_restricted() { kp.clone() } else { restrict_knapsack(kp).unwrap().0 };
        let (a, b, _) = build_sept_pair(&eff, None).unwrap();
        instances.extend([a, b]);
    }
    let mut g = rng(9);
    for _ in 0..60 {
        instances.push(random_instance(&mut g, 7, 4, 3));
    }
    let mut evaluations = 0usize;
    for (i, inst) in instances.iter().enumerate() {
        let mut ids: Vec<JobId> = inst.jobs.iter().map(|j| j.id).collect();
        let k = g.gen_range(0..ids.len());
        ids.rotate_left(k);
        let mut rules = vec![PriorityRule::Sept, PriorityRule::Custom(ids)];
        if priority_order(inst, &PriorityRule::Wsept).is_ok() {
            rules.push(PriorityRule::Wsept);
        }
        if inst.jobs.iter().all(|j| !j.size.is_two_point()) {
            rules.push(PriorityRule::Spt);
        }
        let mean = weighted_mean_size(inst);
        for rule in rules {
            let s = ok(expected_cost(inst, &rule, ObjectiveKind::StartTimes), i)?.total;
            let c = ok(expected_cost(inst, &rule, ObjectiveKind::CompletionTimes), i)?.total;
            ensure(&c - &s == mean, || format!("instance {i} {rule:?}: C - S = {} vs {mean}", &c - &s))?;
            evaluations += 1;
        }
        if inst.jobs.len() <= 6 && inst.two_point_count() <= 4 {
            let s = ok(optimal_value(inst, ObjectiveKind::StartTimes, &DpOptions::default()), i)?;
            let c = ok(optimal_value(inst, ObjectiveKind::CompletionTimes, &DpOptions::default()), i)?;
            ensure(&c - &s == mean, || format!("instance {i} optimal: C - S = {} vs {mean}", &c - &s))?;
            evaluations += 1;
        }
    }
    Ok(format!("{} instances, {evaluations} policy evaluations satisfy C - S = sum w E[X]", instances.len()))
}

/// `Σ w_j · Σ max X_j`, an upper bound on any non-idling policy's cost.
fn upper_cost_bound(inst: &SchedInstance) -> Rational {
    let longest: Rational = inst.jobs.iter().map(|j| j.size.support().into_iter().max().unwrap().clone()).sum();
    inst.total_weight() * longest
}

fn ceil_log2(x: &Rational) -> usize {
    let mut k = 0usize;
    let mut p = Rational::one();
    while &p < x {
        p = p * r(2, 1);
        k += 1;
    }
    k
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 wsept count recovery", criterion1),
        ("2 per-realization contributions", criterion2),
        ("3 sept pipeline", criterion3),
        ("4 optimal-policy pipeline", criterion4),
        ("5 dp oracle equivalence", criterion5),
        ("6 comparable jobs", criterion6),
        ("7 binary search", criterion7),
        ("8 restriction transform", criterion8),
        ("9 objective identity", criterion9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0usize;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({secs:.1}s) {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
