//! Knapsack counting through scheduling-cost differences.

use num_bigint::BigInt;
use serde::Serialize;

use super::construct::{build_sept_pair, build_wsept_pair, optimal_mode_q, PairLayout};
use super::knapsack::{restrict_knapsack, KnapsackInstance};
use crate::error::{Error, Result};
use crate::evaluator::{conditional_expected_cost_with, expected_cost_with, EvalOptions, OutcomeCondition};
use crate::model::{Branch, ObjectiveKind, Rational, SchedInstance};
use crate::optimal::{optimal_value, DpOptions};
use crate::policy::PriorityRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMode {
    /// WSEPT evaluated on the weighted pair.
    Wsept,
    /// SEPT evaluated on the Bernoulli-blocker pair.
    Sept,
    /// Optimal policy value on the Bernoulli-blocker pair.
    Optimal,
}

impl ReductionMode {
    pub fn rule(self) -> PriorityRule {
        match self {
            ReductionMode::Wsept => PriorityRule::Wsept,
            ReductionMode::Sept | ReductionMode::Optimal => PriorityRule::Sept,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// `Σ s_i ≤ B`: every subset fits.
    AllFit,
    /// `Σ s_i = B + 1`: only the full set fails.
    OnlyFullSetFails,
    Construction,
}

/// Outcome of one counting pipeline. `feasible` and `infeasible` refer to
/// the input instance; the infeasible count is the same before and after the
/// restriction transform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub mode: ReductionMode,
    pub route: Route,
    pub n: usize,
    pub feasible: u64,
    pub infeasible: u64,
    pub transform_applied: bool,
    /// Items after the transform; the pair uses this many machines.
    pub effective_n: usize,
    /// Feasible count of the transformed instance minus this equals `feasible`.
    pub adjustment: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e1: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e2: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Rational>,
    /// Costs conditioned on every blocker being long.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditional_e1: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditional_e2: Option<Rational>,
}

impl ReductionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn trivial(kp: &KnapsackInstance, mode: ReductionMode) -> Option<Self> {
        let total = kp.total();
        let route = if total <= kp.bound {
            Route::AllFit
        } else if total == kp.bound + 1 {
            Route::OnlyFullSetFails
        } else {
            return None;
        };
        let infeasible = u64::from(route == Route::OnlyFullSetFails);
        Some(ReductionReport {
            mode,
            route,
            n: kp.n(),
            feasible: (1u64 << kp.n()) - infeasible,
            infeasible,
            transform_applied: false,
            effective_n: kp.n(),
            adjustment: 0,
            e1: None,
            e2: None,
            delta: None,
            q: None,
            conditional_e1: None,
            conditional_e2: None,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    pub eval: EvalOptions,
    pub dp: DpOptions,
}

/// The instance the pair is built from and the adjustment back to the input.
pub(crate) fn prepared(kp: &KnapsackInstance, mode: ReductionMode) -> Result<(KnapsackInstance, u64)> {
    match mode {
        ReductionMode::Wsept => Ok((kp.clone(), 0)),
        ReductionMode::Sept | ReductionMode::Optimal => restrict_knapsack(kp),
    }
}

/// Condition fixing every blocker of a pair built from `n` items to long.
pub fn all_blockers_long(n: usize) -> OutcomeCondition {
    OutcomeCondition::new(PairLayout::for_items(n).blockers.into_iter().map(|id| (id, Branch::Hi)))
}

/// `k = n·2ⁿ·Δ / q^{m−1}` (with `q = 1` for deterministic blockers), checked
/// to be an integer in `0..=2ⁿ`.
pub fn recover_infeasible(n: usize, delta: &Rational, q: Option<&Rational>) -> Result<u64> {
    let scale = Rational::from(n as u64) * Rational::from_integer(BigInt::from(1u8) << n);
    let mut k = scale * delta;
    if let Some(q) = q {
        k = k / q.pow(n as u32 - 1);
    }
    let limit = BigInt::from(1u8) << n;
    match k.to_integer() {
        Some(v) if v >= BigInt::from(0u8) && v <= limit => Ok(u64::try_from(v).expect("count fits in u64")),
        _ => Err(Error::NonIntegerCount(k.to_string())),
    }
}

fn both<T: Send>(a: impl FnOnce() -> T + Send, b: impl FnOnce() -> T + Send) -> (T, T) {
    rayon::join(a, b)
}

fn list_costs(
    pair: (&SchedInstance, &SchedInstance),
    rule: &PriorityRule,
    opts: &EvalOptions,
) -> Result<(Rational, Rational)> {
    let plain = EvalOptions { per_realization: false, ..opts.clone() };
    let cost =
        |inst: &SchedInstance| expected_cost_with(inst, rule, ObjectiveKind::StartTimes, &plain).map(|b| b.total);
    let (e1, e2) = both(|| cost(pair.0), || cost(pair.1));
    Ok((e1?, e2?))
}

pub fn count_via_policy(kp: &KnapsackInstance, mode: ReductionMode) -> Result<ReductionReport> {
    count_via_policy_with(kp, mode, &PipelineOptions::default())
}

/// Counts feasible subsets from the WSEPT or SEPT cost difference of the
/// constructed pair. `ReductionMode::Optimal` is forwarded to
/// [`count_via_optimal_with`].
pub fn count_via_policy_with(
    kp: &KnapsackInstance,
    mode: ReductionMode,
    opts: &PipelineOptions,
) -> Result<ReductionReport> {
    kp.validate()?;
    if mode == ReductionMode::Optimal {
        return count_via_optimal_with(kp, opts);
    }
    if let Some(r) = ReductionReport::trivial(kp, mode) {
        return Ok(r);
    }
    let (eff, adjustment) = prepared(kp, mode)?;
    let n = eff.n();
    let rule = mode.rule();
    let (inst1, inst2, q) = match mode {
        ReductionMode::Wsept => {
            let (a, b) = build_wsept_pair(&eff)?;
            (a, b, None)
        }
        _ => {
            let (a, b, q) = build_sept_pair(&eff, None)?;
            (a, b, Some(q))
        }
    };
    let (e1, e2) = list_costs((&inst1, &inst2), &rule, &opts.eval)?;
    let delta = &e2 - &e1;
    let infeasible = recover_infeasible(n, &delta, q.as_ref())?;

    let (conditional_e1, conditional_e2) = if q.is_some() {
        let cond = all_blockers_long(n);
        let plain = EvalOptions { per_realization: false, ..opts.eval.clone() };
        let c = |inst: &SchedInstance| {
            conditional_expected_cost_with(inst, &rule, ObjectiveKind::StartTimes, &cond, &plain)
        };
        let (c1, c2) = both(|| c(&inst1), || c(&inst2));
        (Some(c1?), Some(c2?))
    } else {
        (None, None)
    };

    Ok(ReductionReport {
        mode,
        route: Route::Construction,
        n: kp.n(),
        feasible: (1u64 << kp.n()) - infeasible,
        infeasible,
        transform_applied: adjustment > 0,
        effective_n: n,
        adjustment,
        e1: Some(e1),
        e2: Some(e2),
        delta: Some(delta),
        q,
        conditional_e1,
        conditional_e2,
    })
}

pub fn count_via_optimal(kp: &KnapsackInstance) -> Result<ReductionReport> {
    count_via_optimal_with(kp, &PipelineOptions::default())
}

/// Counts feasible subsets from the optimal-policy cost difference of the
/// Bernoulli-blocker pair at `q = 1/(2n²B)`. Fails if the optimum differs from
/// the SEPT cost on either instance.
pub fn count_via_optimal_with(kp: &KnapsackInstance, opts: &PipelineOptions) -> Result<ReductionReport> {
    kp.validate()?;
    if let Some(r) = ReductionReport::trivial(kp, ReductionMode::Optimal) {
        return Ok(r);
    }
    let (eff, adjustment) = prepared(kp, ReductionMode::Optimal)?;
    let n = eff.n();
    let q = optimal_mode_q(&eff);
    let (inst1, inst2, q) = build_sept_pair(&eff, Some(q))?;
    let dp = |inst: &SchedInstance| optimal_value(inst, ObjectiveKind::StartTimes, &opts.dp);
    let (o1, o2) = both(|| dp(&inst1), || dp(&inst2));
    let (o1, o2) = (o1?, o2?);
    let (s1, s2) = list_costs((&inst1, &inst2), &PriorityRule::Sept, &opts.eval)?;
    for (instance, (opt, sept)) in [(1, (&o1, &s1)), (2, (&o2, &s2))] {
        if opt != sept {
            return Err(Error::OptimalDiffersFromSept { instance, optimal: opt.to_string(), sept: sept.to_string() });
        }
    }
    let delta = &o2 - &o1;
    let infeasible = recover_infeasible(n, &delta, Some(&q))?;
    Ok(ReductionReport {
        mode: ReductionMode::Optimal,
        route: Route::Construction,
        n: kp.n(),
        feasible: (1u64 << kp.n()) - infeasible,
        infeasible,
        transform_applied: adjustment > 0,
        effective_n: n,
        adjustment,
        e1: Some(o1),
        e2: Some(o2),
        delta: Some(delta),
        q: Some(q),
        conditional_e1: None,
        conditional_e2: None,
    })
}
