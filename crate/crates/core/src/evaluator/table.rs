use rayon::prelude::*;
use serde::Serialize;

use super::{bitmask_string, CostBreakdown, EvalOptions, ListEvaluator};
use crate::error::{Error, Result};
use crate::model::{JobId, ObjectiveKind, Rational, SchedInstance};
use crate::policy::PriorityRule;

const CSV_HEADER: [&str; 5] = ["index", "bitmask", "probability", "cost", "contribution_to_delta"];

/// One realization of a pair of instances sharing their two-point job set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairRow {
    pub index: u64,
    pub bitmask: String,
    pub probability_a: Rational,
    pub probability_b: Rational,
    pub cost_a: Rational,
    pub cost_b: Rational,
    /// `cost_b − cost_a`.
    pub difference: Rational,
    /// `p_b·cost_b − p_a·cost_a`; sums to the delta over all rows.
    pub contribution: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairTable {
    pub two_point_ids: Vec<JobId>,
    pub rows: Vec<PairRow>,
}

impl PairTable {
    /// Row-by-row cost tables of two instances whose two-point jobs carry the
    /// same ids, so that realization masks line up.
    pub fn build(
        inst_a: &SchedInstance,
        inst_b: &SchedInstance,
        rule: &PriorityRule,
        obj: ObjectiveKind,
        opts: &EvalOptions,
    ) -> Result<PairTable> {
        let ev_a = ListEvaluator::new(inst_a, rule, obj, opts)?;
        let ev_b = ListEvaluator::new(inst_b, rule, obj, opts)?;
        let ids = |inst: &SchedInstance, ev: &ListEvaluator| -> Vec<JobId> {
            ev.two_point_positions().iter().map(|&p| inst.jobs[p].id).collect()
        };
        let two_point_ids = ids(inst_a, &ev_a);
        if two_point_ids != ids(inst_b, &ev_b) {
            return Err(Error::MismatchedPair);
        }
        let bits = ev_a.bits();
        let row = |mask: u64| {
            let (pa, ca) = ev_a.cost(mask);
            let (pb, cb) = ev_b.cost(mask);
            PairRow {
                index: mask,
                bitmask: bitmask_string(mask, bits),
                difference: &cb - &ca,
                contribution: &pb * &cb - &pa * &ca,
                probability_a: pa,
                probability_b: pb,
                cost_a: ca,
                cost_b: cb,
            }
        };
        let rows = if opts.parallel {
            (0..ev_a.count()).into_par_iter().map(row).collect()
        } else {
            (0..ev_a.count()).map(row).collect()
        };
        Ok(PairTable { two_point_ids, rows })
    }

    pub fn delta(&self) -> Rational {
        self.rows.iter().map(|r| &r.contribution).sum()
    }

    /// CSV with the difference in the `cost` column.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.index.to_string(),
                r.bitmask.clone(),
                r.probability_b.to_string(),
                r.difference.to_string(),
                r.contribution.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

impl CostBreakdown {
    /// Per-realization CSV. For a single instance the delta is taken against
    /// the zero-cost baseline, so `contribution_to_delta = probability × cost`.
    /// Empty when the table was not requested.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in self.per_realization.iter().flatten() {
            w.write_record([
                r.index.to_string(),
                r.bitmask.clone(),
                r.probability.to_string(),
                r.cost.to_string(),
                (&r.probability * &r.cost).to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}
