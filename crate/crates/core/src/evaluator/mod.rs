//! Exact expected costs of list policies.
//!
//! Costs are expectations over the full realization enumeration of an
//! instance. Summation may run in parallel; exact rational addition makes the
//! result independent of the reduction order.

mod monte_carlo;
mod table;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    enumerate_realizations, Branch, JobId, ObjectiveKind, Rational, Realizations, SchedInstance, DEFAULT_ENUM_CAP,
};
use crate::policy::{order_positions, priority_order, simulate_positions, MachineTieBreak, PriorityRule};

pub use monte_carlo::{monte_carlo_cost, MonteCarloEstimate, SplitMix64};
pub use table::{PairRow, PairTable};

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub max_enum: usize,
    /// Keep the per-realization cost table.
    pub per_realization: bool,
    pub tie_break: MachineTieBreak,
    pub parallel: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_enum: DEFAULT_ENUM_CAP,
            per_realization: false,
            tie_break: MachineTieBreak::LowestIndex,
            parallel: true,
        }
    }
}

impl EvalOptions {
    pub fn with_table(mut self) -> Self {
        self.per_realization = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealizationCost {
    pub index: u64,
    pub bitmask: String,
    pub probability: Rational,
    pub cost: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostBreakdown {
    pub total: Rational,
    pub per_job: BTreeMap<JobId, Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_realization: Option<Vec<RealizationCost>>,
}

impl CostBreakdown {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("breakdown serializes")
    }
}

/// Fixes some two-point jobs to one branch.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutcomeCondition {
    pub fixed: BTreeMap<JobId, Branch>,
}

impl OutcomeCondition {
    pub fn new(fixed: impl IntoIterator<Item = (JobId, Branch)>) -> Self {
        OutcomeCondition { fixed: fixed.into_iter().collect() }
    }

    /// `(care, want)` masks over the instance's realization bits.
    fn masks(&self, inst: &SchedInstance, two_point: &[usize]) -> Result<(u64, u64)> {
        let (mut care, mut want) = (0u64, 0u64);
        for (&id, &branch) in &self.fixed {
            let pos = inst.index_of(id).ok_or(Error::UnknownJobId(id))?;
            let bit = two_point.iter().position(|&p| p == pos).ok_or(Error::ConditionOnDeterministicJob(id))?;
            care |= 1 << bit;
            if branch == Branch::Hi {
                want |= 1 << bit;
            }
        }
        Ok((care, want))
    }
}

pub(crate) fn bitmask_string(mask: u64, bits: usize) -> String {
    (0..bits).rev().map(|b| if mask >> b & 1 == 1 { '1' } else { '0' }).collect()
}

/// Evaluates one list order over the realization enumeration.
pub(crate) struct ListEvaluator<'a> {
    inst: &'a SchedInstance,
    order: Vec<usize>,
    real: Realizations<'a>,
    obj: ObjectiveKind,
    tie: MachineTieBreak,
}

impl<'a> ListEvaluator<'a> {
    pub(crate) fn new(
        inst: &'a SchedInstance,
        rule: &PriorityRule,
        obj: ObjectiveKind,
        opts: &EvalOptions,
    ) -> Result<Self> {
        inst.validate()?;
        let order = priority_order(inst, rule)?;
        let real = enumerate_realizations(inst, opts.max_enum)?;
        Ok(ListEvaluator { inst, order: order_positions(inst, &order), real, obj, tie: opts.tie_break })
    }

    pub(crate) fn bits(&self) -> usize {
        self.real.two_point_positions().len()
    }

    pub(crate) fn count(&self) -> u64 {
        self.real.total()
    }

    pub(crate) fn two_point_positions(&self) -> &[usize] {
        self.real.two_point_positions()
    }

    /// Probability and per-job costs of realization `mask`.
    pub(crate) fn job_costs(&self, mask: u64) -> (Rational, Vec<Rational>) {
        let r = self.real.get(mask);
        let sched = simulate_positions(self.inst, &self.order, &r.sizes, self.tie);
        let costs = (0..self.inst.jobs.len()).map(|p| sched.job_cost(self.inst, p, self.obj)).collect();
        (r.probability, costs)
    }

    pub(crate) fn cost(&self, mask: u64) -> (Rational, Rational) {
        let (p, costs) = self.job_costs(mask);
        (p, costs.into_iter().sum())
    }
}

fn add_weighted(acc: &mut [Rational], p: &Rational, costs: &[Rational]) {
    for (a, c) in acc.iter_mut().zip(costs) {
        *a += p * c;
    }
}

fn add_into(mut a: Vec<Rational>, b: Vec<Rational>) -> Vec<Rational> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

pub fn expected_cost(inst: &SchedInstance, rule: &PriorityRule, obj: ObjectiveKind) -> Result<CostBreakdown> {
    expected_cost_with(inst, rule, obj, &EvalOptions::default())
}

pub fn expected_cost_with(
    inst: &SchedInstance,
    rule: &PriorityRule,
    obj: ObjectiveKind,
    opts: &EvalOptions,
) -> Result<CostBreakdown> {
    let ev = ListEvaluator::new(inst, rule, obj, opts)?;
    let n = inst.jobs.len();
    let count = ev.count();
    let bits = ev.bits();

    let (per_job, table) = if opts.per_realization {
        let rows: Vec<(Rational, Vec<Rational>)> = if opts.parallel {
            (0..count).into_par_iter().map(|m| ev.job_costs(m)).collect()
        } else {
            (0..count).map(|m| ev.job_costs(m)).collect()
        };
        let mut per_job = vec![Rational::zero(); n];
        let mut table = Vec::with_capacity(rows.len());
        for (mask, (p, costs)) in rows.into_iter().enumerate() {
            add_weighted(&mut per_job, &p, &costs);
            let mask = mask as u64;
            table.push(RealizationCost {
                index: mask,
                bitmask: bitmask_string(mask, bits),
                probability: p,
                cost: costs.into_iter().sum(),
            });
        }
        (per_job, Some(table))
    } else if opts.parallel {
        let per_job = (0..count)
            .into_par_iter()
            .fold(
                || vec![Rational::zero(); n],
                |mut acc, m| {
                    let (p, costs) = ev.job_costs(m);
                    add_weighted(&mut acc, &p, &costs);
                    acc
                },
            )
            .reduce(|| vec![Rational::zero(); n], add_into);
        (per_job, None)
    } else {
        let mut per_job = vec![Rational::zero(); n];
        for m in 0..count {
            let (p, costs) = ev.job_costs(m);
            add_weighted(&mut per_job, &p, &costs);
        }
        (per_job, None)
    };

    let total = per_job.iter().sum();
    Ok(CostBreakdown { total, per_job: inst.jobs.iter().map(|j| j.id).zip(per_job).collect(), per_realization: table })
}

/// Expected cost conditioned on the branches fixed by `cond`.
pub fn conditional_expected_cost(
    inst: &SchedInstance,
    rule: &PriorityRule,
    obj: ObjectiveKind,
    cond: &OutcomeCondition,
) -> Result<Rational> {
    conditional_expected_cost_with(inst, rule, obj, cond, &EvalOptions::default())
}

pub fn conditional_expected_cost_with(
    inst: &SchedInstance,
    rule: &PriorityRule,
    obj: ObjectiveKind,
    cond: &OutcomeCondition,
    opts: &EvalOptions,
) -> Result<Rational> {
    let ev = ListEvaluator::new(inst, rule, obj, opts)?;
    let (care, want) = cond.masks(inst, ev.two_point_positions())?;
    let term = |m: u64| {
        let (p, c) = ev.cost(m);
        (&p * &c, p)
    };
    let matching = (0..ev.count()).filter(|m| m & care == want);
    let (mass_cost, mass) = if opts.parallel {
        matching
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(term)
            .reduce(|| (Rational::zero(), Rational::zero()), |a, b| (a.0 + b.0, a.1 + b.1))
    } else {
        matching.map(term).fold((Rational::zero(), Rational::zero()), |a, b| (a.0 + b.0, a.1 + b.1))
    };
    Ok(mass_cost / mass)
}

/// `cost(inst_b) − cost(inst_a)` under the same rule, objective and condition.
pub fn delta_between(
    inst_a: &SchedInstance,
    inst_b: &SchedInstance,
    rule: &PriorityRule,
    obj: ObjectiveKind,
    cond: Option<&OutcomeCondition>,
) -> Result<Rational> {
    delta_between_with(inst_a, inst_b, rule, obj, cond, &EvalOptions::default())
}

pub fn delta_between_with(
    inst_a: &SchedInstance,
    inst_b: &SchedInstance,
    rule: &PriorityRule,
    obj: ObjectiveKind,
    cond: Option<&OutcomeCondition>,
    opts: &EvalOptions,
) -> Result<Rational> {
    let plain = EvalOptions { per_realization: false, ..opts.clone() };
    let cost = |inst: &SchedInstance| match cond {
        Some(c) => conditional_expected_cost_with(inst, rule, obj, c, &plain),
        None => expected_cost_with(inst, rule, obj, &plain).map(|b| b.total),
    };
    Ok(cost(inst_b)? - cost(inst_a)?)
}
