//! Numerical verification of the structural claims behind the reductions.
//!
//! Every check is evaluated over the exact realization enumeration of the
//! constructed pair; failures are recorded as report entries together with
//! the offending realizations.

use std::fmt::Write as _;

use serde::Serialize;

use super::construct::{build_sept_pair, build_wsept_pair, optimal_mode_q, PairLayout};
use super::knapsack::{count_knapsack_bruteforce, KnapsackInstance};
use super::pipeline::{all_blockers_long, prepared, recover_infeasible, PipelineOptions, ReductionMode};
use crate::error::Result;
use crate::evaluator::{bitmask_string, conditional_expected_cost_with, EvalOptions, PairTable};
use crate::model::{enumerate_realizations, JobId, ObjectiveKind, Rational, SchedInstance};
use crate::optimal::{optimal_expected_cost_with, root_decisions};
use crate::policy::{priority_order, simulate_list_schedule_with, MachineTieBreak, PriorityRule};

const MAX_OFFENDERS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Bitmasks (most significant bit first) of failing realizations.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub offending: Vec<String>,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.to_string(), passed, detail, offending: Vec::new() }
    }

    fn over(name: &str, detail: String, offending: Vec<String>) -> Self {
        Check {
            name: name.to_string(),
            passed: offending.is_empty(),
            detail,
            offending: offending.into_iter().take(MAX_OFFENDERS).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub mode: ReductionMode,
    pub knapsack: KnapsackInstance,
    pub transform_applied: bool,
    pub effective_n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Rational>,
    /// Order of the two-point job ids behind each realization bitmask, least
    /// significant bit first.
    pub two_point_ids: Vec<JobId>,
    pub checks: Vec<Check>,
    pub caveats: Vec<String>,
    pub all_passed: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "verification ({:?}) sizes={:?} B={} effective_n={}{}",
            self.mode,
            self.knapsack.sizes,
            self.knapsack.bound,
            self.effective_n,
            if self.transform_applied { " (transformed)" } else { "" }
        );
        for c in &self.checks {
            let _ = writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            for o in &c.offending {
                let _ = writeln!(out, "    offending realization {o}");
            }
        }
        for c in &self.caveats {
            let _ = writeln!(out, "note: {c}");
        }
        let _ = writeln!(out, "{}", if self.all_passed { "all checks passed" } else { "some checks failed" });
        out
    }
}

/// Start-time schedule facts for one realization of one instance.
struct Realized {
    mask: u64,
    start: Vec<Rational>,
    machine: Vec<usize>,
    sizes: Vec<Rational>,
}

fn realize(inst: &SchedInstance, rule: &PriorityRule, max_enum: usize) -> Result<Vec<Realized>> {
    let order = priority_order(inst, rule)?;
    let real = enumerate_realizations(inst, max_enum)?;
    Ok((0..real.total())
        .map(|mask| {
            let r = real.get(mask);
            let s = simulate_list_schedule_with(inst, &order, &r.sizes, MachineTieBreak::LowestIndex);
            Realized { mask, start: s.start, machine: s.machine, sizes: r.sizes }
        })
        .collect())
}

/// Everything the checks need about one constructed pair.
struct Pair {
    kp: KnapsackInstance,
    layout: PairLayout,
    inst1: SchedInstance,
    inst2: SchedInstance,
    rule: PriorityRule,
    q: Option<Rational>,
}

impl Pair {
    fn n(&self) -> usize {
        self.kp.n()
    }

    fn knapsack_bits(&self, mask: u64) -> u64 {
        mask & ((1u64 << self.n()) - 1)
    }

    fn blockers_all_long(&self, mask: u64) -> bool {
        match self.q {
            None => true,
            Some(_) => {
                let b = self.n() - 1;
                mask >> self.n() & ((1u64 << b) - 1) == (1u64 << b) - 1
            }
        }
    }

    fn is_yes(&self, mask: u64) -> bool {
        self.kp.fits(self.knapsack_bits(mask))
    }

    fn label(&self, mask: u64) -> String {
        let bits = if self.q.is_some() { 2 * self.n() - 1 } else { self.n() };
        bitmask_string(mask, bits)
    }
}

pub fn verify_lemmas(kp: &KnapsackInstance, mode: ReductionMode) -> Result<VerificationReport> {
    verify_lemmas_with(kp, mode, &PipelineOptions::default())
}

/// Runs every check applicable to `mode`. Errors only on invalid input or
/// exceeded caps; failing checks are report entries.
pub fn verify_lemmas_with(
    kp: &KnapsackInstance,
    mode: ReductionMode,
    opts: &PipelineOptions,
) -> Result<VerificationReport> {
    kp.validate()?;
    let mut caveats = Vec::new();
    if kp.total() <= kp.bound + 1 {
        caveats.push(format!(
            "total size {} is at most B+1 = {}; the count is settled directly and no pair is built",
            kp.total(),
            kp.bound + 1
        ));
        let expected = count_knapsack_bruteforce(kp)?;
        let direct = if kp.total() <= kp.bound { 1u64 << kp.n() } else { (1u64 << kp.n()) - 1 };
        let checks = vec![Check::new(
            "trivial_count",
            direct == expected,
            format!("direct count {direct}, brute force {expected}"),
        )];
        return Ok(VerificationReport {
            mode,
            knapsack: kp.clone(),
            transform_applied: false,
            effective_n: kp.n(),
            q: None,
            two_point_ids: Vec::new(),
            all_passed: checks.iter().all(|c| c.passed),
            checks,
            caveats,
        });
    }

    let (eff, adjustment) = prepared(kp, mode)?;
    if adjustment > 0 {
        caveats.push(format!(
            "total size exceeds 3B/2; checks run on the padded instance sizes={:?} B={} (count adjustment {adjustment})",
            eff.sizes, eff.bound
        ));
    }
    let layout = PairLayout::for_items(eff.n());
    let (inst1, inst2, q) = match mode {
        ReductionMode::Wsept => {
            let (a, b) = build_wsept_pair(&eff)?;
            (a, b, None)
        }
        ReductionMode::Sept => {
            let (a, b, q) = build_sept_pair(&eff, None)?;
            (a, b, Some(q))
        }
        ReductionMode::Optimal => {
            let q = optimal_mode_q(&eff);
            let (a, b, q) = build_sept_pair(&eff, Some(q))?;
            (a, b, Some(q))
        }
    };
    let pair = Pair { kp: eff.clone(), layout, inst1, inst2, rule: mode.rule(), q };

    let eval = EvalOptions { per_realization: false, tie_break: MachineTieBreak::LowestIndex, ..opts.eval.clone() };
    let table = PairTable::build(&pair.inst1, &pair.inst2, &pair.rule, ObjectiveKind::StartTimes, &eval)?;
    let delta = table.delta();

    let mut checks = vec![
        order_check(&pair)?,
        yes_zero_check(&pair, &table),
        no_one_over_n_check(&pair, &table),
        prefix_bound_check(&pair, eval.max_enum)?,
    ];
    if pair.q.is_some() {
        checks.push(short_blocker_check(&pair, &table));
        checks.push(factorization_check(&pair, &delta, &eval)?);
    }
    checks.push(count_identity_check(&pair, &delta, adjustment)?);
    checks.push(tie_break_check(&pair, &table, &eval)?);
    if mode == ReductionMode::Optimal {
        checks.extend(optimal_checks(&pair, opts)?);
    }

    Ok(VerificationReport {
        mode,
        knapsack: kp.clone(),
        transform_applied: adjustment > 0,
        effective_n: eff.n(),
        q: pair.q.clone(),
        two_point_ids: table.two_point_ids.clone(),
        all_passed: checks.iter().all(|c| c.passed),
        checks,
        caveats,
    })
}

/// The list order starts every blocker, then every knapsack job, then the
/// dummy, on both instances.
fn order_check(pair: &Pair) -> Result<Check> {
    let mut expected: Vec<JobId> = pair.layout.blockers.clone();
    let mut problems = Vec::new();
    for (i, inst) in [(1, &pair.inst1), (2, &pair.inst2)] {
        let order = priority_order(inst, &pair.rule)?;
        let n = pair.n();
        let blockers_first = order[..n - 1].iter().all(|id| pair.layout.blockers.contains(id));
        let knapsack_next = order[n - 1..2 * n - 1].iter().all(|id| pair.layout.knapsack.contains(id));
        let dummy_last = order[2 * n - 1] == pair.layout.dummy;
        if !(blockers_first && knapsack_next && dummy_last) {
            problems.push(format!("instance {i} order {order:?}"));
        }
        if i == 1 {
            expected = order;
        }
    }
    let detail =
        if problems.is_empty() { format!("order {expected:?} on both instances") } else { problems.join("; ") };
    Ok(Check::new("blockers_then_knapsack_then_dummy", problems.is_empty(), detail))
}

fn considered<'a>(pair: &'a Pair, table: &'a PairTable) -> impl Iterator<Item = &'a crate::evaluator::PairRow> + 'a {
    table.rows.iter().filter(|r| pair.blockers_all_long(r.index))
}

fn condition_note(pair: &Pair) -> &'static str {
    if pair.q.is_some() {
        " with every blocker long"
    } else {
        ""
    }
}

fn yes_zero_check(pair: &Pair, table: &PairTable) -> Check {
    let mut count = 0;
    let offending: Vec<String> = considered(pair, table)
        .filter(|r| pair.is_yes(r.index))
        .inspect(|_| count += 1)
        .filter(|r| !r.difference.is_zero())
        .map(|r| pair.label(r.index))
        .collect();
    Check::over(
        "yes_realizations_contribute_zero",
        format!("{count} YES realizations{}; cost difference 0 required", condition_note(pair)),
        offending,
    )
}

fn no_one_over_n_check(pair: &Pair, table: &PairTable) -> Check {
    let target = Rational::new(1, pair.n() as i64);
    let mut count = 0;
    let offending: Vec<String> = considered(pair, table)
        .filter(|r| !pair.is_yes(r.index))
        .inspect(|_| count += 1)
        .filter(|r| r.difference != target)
        .map(|r| pair.label(r.index))
        .collect();
    Check::over(
        "no_realizations_contribute_one_over_n",
        format!("{count} NO realizations{}; cost difference {target} required", condition_note(pair)),
        offending,
    )
}

/// In each NO realization of the second instance, the knapsack jobs started
/// on the blocker-free machine no later than `B + 1` have total realized size
/// at least `B + 1 + 1/n`.
fn prefix_bound_check(pair: &Pair, max_enum: usize) -> Result<Check> {
    let inst = &pair.inst2;
    let n = pair.n();
    let b1 = Rational::from(pair.kp.bound + 1);
    let bound = &b1 + Rational::new(1, n as i64);
    let blocker_pos: Vec<usize> = pair.layout.blockers.iter().map(|&id| inst.index_of(id).unwrap()).collect();
    let knapsack_pos: Vec<usize> = pair.layout.knapsack.iter().map(|&id| inst.index_of(id).unwrap()).collect();
    let mut offending = Vec::new();
    let mut tight = 0;
    let mut measured = 0;
    for r in realize(inst, &pair.rule, max_enum)? {
        if !pair.blockers_all_long(r.mask) || pair.is_yes(r.mask) {
            continue;
        }
        let used: Vec<usize> = blocker_pos.iter().map(|&p| r.machine[p]).collect();
        let Some(free) = (0..inst.machines).find(|m| !used.contains(m)) else {
            offending.push(pair.label(r.mask));
            continue;
        };
        let volume: Rational = knapsack_pos
            .iter()
            .filter(|&&p| r.machine[p] == free && r.start[p] <= b1)
            .map(|&p| r.sizes[p].clone())
            .sum();
        measured += 1;
        if volume < bound {
            offending.push(pair.label(r.mask));
        } else if volume == bound {
            tight += 1;
        }
    }
    Ok(Check::over(
        "no_realization_prefix_reaches_bound",
        format!("{measured} NO realizations measured; prefix volume >= {bound}; {tight} attain equality"),
        offending,
    ))
}

fn short_blocker_check(pair: &Pair, table: &PairTable) -> Check {
    let mut count = 0;
    let offending: Vec<String> = table
        .rows
        .iter()
        .filter(|r| !pair.blockers_all_long(r.index))
        .inspect(|_| count += 1)
        .filter(|r| !r.contribution.is_zero())
        .map(|r| pair.label(r.index))
        .collect();
    Check::over(
        "short_blocker_realizations_contribute_zero",
        format!("{count} joint realizations with a short blocker"),
        offending,
    )
}

fn factorization_check(pair: &Pair, delta: &Rational, eval: &EvalOptions) -> Result<Check> {
    let q = pair.q.as_ref().expect("Bernoulli pair");
    let cond = all_blockers_long(pair.n());
    let c =
        |inst: &SchedInstance| conditional_expected_cost_with(inst, &pair.rule, ObjectiveKind::StartTimes, &cond, eval);
    let (c1, c2) = (c(&pair.inst1)?, c(&pair.inst2)?);
    let rhs = q.pow(pair.n() as u32 - 1) * (&c2 - &c1);
    Ok(Check::new(
        "delta_factorizes_over_all_long_blockers",
        &rhs == delta,
        format!("delta {delta}; q^(m-1)(E2'-E1') = {rhs} with E1' = {c1}, E2' = {c2}"),
    ))
}

fn count_identity_check(pair: &Pair, delta: &Rational, adjustment: u64) -> Result<Check> {
    let brute = count_knapsack_bruteforce(&pair.kp)?;
    let expected_k = (1u64 << pair.n()) - brute;
    let (passed, detail) = match recover_infeasible(pair.n(), delta, pair.q.as_ref()) {
        Ok(k) => (
            k == expected_k,
            format!(
                "recovered k = {k}, brute-force k = {expected_k}, feasible = {}",
                (1u64 << pair.n()) - k - adjustment
            ),
        ),
        Err(e) => (false, e.to_string()),
    };
    Ok(Check::new("recovered_count_matches_brute_force", passed, detail))
}

/// Per-realization differences do not depend on which idle machine a job
/// is assigned to.
fn tie_break_check(pair: &Pair, table: &PairTable, eval: &EvalOptions) -> Result<Check> {
    let other = EvalOptions { tie_break: MachineTieBreak::HighestIndex, ..eval.clone() };
    let alt = PairTable::build(&pair.inst1, &pair.inst2, &pair.rule, ObjectiveKind::StartTimes, &other)?;
    let offending = table
        .rows
        .iter()
        .zip(&alt.rows)
        .filter(|(a, b)| a.difference != b.difference)
        .map(|(a, _)| pair.label(a.index))
        .collect();
    Ok(Check::over(
        "machine_tie_break_independent",
        format!("highest-index assignment gives delta {}", alt.delta()),
        offending,
    ))
}

fn optimal_checks(pair: &Pair, opts: &PipelineOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let blockers = &pair.layout.blockers;
    let mut equal = Vec::new();
    let mut root_ok = Vec::new();
    let mut strict = Vec::new();
    let eval = EvalOptions { per_realization: false, ..opts.eval.clone() };
    for (i, inst) in [(1, &pair.inst1), (2, &pair.inst2)] {
        let (opt, tree) = optimal_expected_cost_with(inst, ObjectiveKind::StartTimes, &opts.dp)?;
        let sept =
            crate::evaluator::expected_cost_with(inst, &PriorityRule::Sept, ObjectiveKind::StartTimes, &eval)?.total;
        equal.push((i, opt == sept, format!("instance {i}: optimum {opt}, SEPT {sept}")));
        let starts_all = blockers.iter().all(|b| tree.root.start.contains(b));
        root_ok.push((i, starts_all, format!("instance {i}: root starts {:?}", tree.root.start)));
        let decisions = root_decisions(inst, ObjectiveKind::StartTimes, &opts.dp)?;
        let rivals: Vec<_> = decisions.iter().filter(|(set, _)| !blockers.iter().all(|b| set.contains(b))).collect();
        let worst_gap = rivals.iter().map(|(_, v)| v - &opt).min();
        let ok = rivals.iter().all(|(_, v)| v > &opt);
        strict.push((
            i,
            ok,
            match worst_gap {
                Some(g) => format!("instance {i}: {} rival root decisions, smallest excess {g}", rivals.len()),
                None => format!("instance {i}: no rival root decisions"),
            },
        ));
    }
    let fold = |name: &str, parts: Vec<(i32, bool, String)>| {
        let passed = parts.iter().all(|p| p.1);
        let detail = parts.into_iter().map(|p| p.2).collect::<Vec<_>>().join("; ");
        Check::new(name, passed, detail)
    };
    checks.push(fold("optimum_equals_sept", equal));
    checks.push(fold("optimal_root_starts_all_blockers", root_ok));
    checks.push(fold("root_without_all_blockers_is_strictly_worse", strict));
    Ok(checks)
}
