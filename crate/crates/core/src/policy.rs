//! Priority rules and greedy list scheduling of a single realization.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{JobId, ObjectiveKind, Rational, SchedInstance, SizeDistribution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PriorityRule {
    Sept,
    Wsept,
    Spt,
    Custom(Vec<JobId>),
}

/// Which idle machine receives the next job when several are idle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MachineTieBreak {
    #[default]
    LowestIndex,
    HighestIndex,
}

/// Jobs in priority order. Ties go to the lower job id.
pub fn priority_order(inst: &SchedInstance, rule: &PriorityRule) -> Result<Vec<JobId>> {
    match rule {
        PriorityRule::Custom(order) => {
            let ids: HashSet<JobId> = inst.jobs.iter().map(|j| j.id).collect();
            let given: HashSet<JobId> = order.iter().copied().collect();
            if order.len() != inst.jobs.len() || given != ids {
                return Err(Error::InvalidCustomOrder);
            }
            Ok(order.clone())
        }
        PriorityRule::Sept => Ok(sorted_ids(inst.jobs.iter().map(|j| (j.size.expectation(), j.id)).collect())),
        PriorityRule::Spt => {
            if let Some(job) = inst.jobs.iter().find(|j| j.size.is_two_point()) {
                return Err(Error::SptOnStochastic(job.id));
            }
            Ok(sorted_ids(inst.jobs.iter().map(|j| (j.size.expectation(), j.id)).collect()))
        }
        PriorityRule::Wsept => {
            let mut keyed = Vec::with_capacity(inst.jobs.len());
            for job in &inst.jobs {
                let mean = job.size.expectation();
                if mean.is_zero() {
                    return Err(Error::ZeroExpectationWsept(job.id));
                }
                // negate so that ascending order means descending ratio
                keyed.push((-(&job.weight / &mean), job.id));
            }
            Ok(sorted_ids(keyed))
        }
    }
}

fn sorted_ids(mut keyed: Vec<(Rational, JobId)>) -> Vec<JobId> {
    keyed.sort();
    keyed.into_iter().map(|(_, id)| id).collect()
}

/// Per-job start, completion and machine for one realization. Vectors are
/// aligned with `SchedInstance::jobs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub ids: Vec<JobId>,
    pub start: Vec<Rational>,
    pub completion: Vec<Rational>,
    pub machine: Vec<usize>,
}

impl Schedule {
    fn position(&self, id: JobId) -> usize {
        self.ids.iter().position(|&j| j == id).unwrap_or_else(|| panic!("job {id} not in schedule"))
    }

    pub fn start_of(&self, id: JobId) -> &Rational {
        &self.start[self.position(id)]
    }

    pub fn completion_of(&self, id: JobId) -> &Rational {
        &self.completion[self.position(id)]
    }

    pub fn machine_of(&self, id: JobId) -> usize {
        self.machine[self.position(id)]
    }

    /// `w_j · S_j` (or `w_j · C_j`) for job position `pos`.
    pub fn job_cost(&self, inst: &SchedInstance, pos: usize, obj: ObjectiveKind) -> Rational {
        let time = match obj {
            ObjectiveKind::StartTimes => &self.start[pos],
            ObjectiveKind::CompletionTimes => &self.completion[pos],
        };
        &inst.jobs[pos].weight * time
    }

    pub fn cost(&self, inst: &SchedInstance, obj: ObjectiveKind) -> Rational {
        (0..self.ids.len()).map(|p| self.job_cost(inst, p, obj)).sum()
    }
}

/// Translates an id order into job positions. Panics if `order` is not a
/// permutation of the instance's ids.
pub fn order_positions(inst: &SchedInstance, order: &[JobId]) -> Vec<usize> {
    assert_eq!(order.len(), inst.jobs.len(), "order must list every job");
    let mut seen = vec![false; inst.jobs.len()];
    order
        .iter()
        .map(|&id| {
            let pos = inst.index_of(id).unwrap_or_else(|| panic!("unknown job id {id} in order"));
            assert!(!seen[pos], "job {id} listed twice");
            seen[pos] = true;
            pos
        })
        .collect()
}

/// Greedy list scheduling of one realization with the default tie-break.
pub fn simulate_list_schedule(inst: &SchedInstance, order: &[JobId], sizes: &[Rational]) -> Schedule {
    simulate_positions(inst, &order_positions(inst, order), sizes, MachineTieBreak::LowestIndex)
}

pub fn simulate_list_schedule_with(
    inst: &SchedInstance,
    order: &[JobId],
    sizes: &[Rational],
    tie: MachineTieBreak,
) -> Schedule {
    simulate_positions(inst, &order_positions(inst, order), sizes, tie)
}

/// Event-driven list scheduling over job positions. At each event instant
/// every machine that is idle receives the next job in `order`; zero-size
/// jobs free their machine within the same instant.
pub(crate) fn simulate_positions(
    inst: &SchedInstance,
    order: &[usize],
    sizes: &[Rational],
    tie: MachineTieBreak,
) -> Schedule {
    let n = inst.jobs.len();
    let m = inst.machines;
    let mut free_at = vec![Rational::zero(); m];
    let mut start = vec![Rational::zero(); n];
    let mut completion = vec![Rational::zero(); n];
    let mut machine = vec![0usize; n];
    let mut now = Rational::zero();
    let mut next = 0;

    while next < n {
        loop {
            let idle = match tie {
                MachineTieBreak::LowestIndex => (0..m).find(|&i| free_at[i] <= now),
                MachineTieBreak::HighestIndex => (0..m).rev().find(|&i| free_at[i] <= now),
            };
            let Some(i) = idle else { break };
            let pos = order[next];
            let done = &now + &sizes[pos];
            start[pos] = now.clone();
            completion[pos] = done.clone();
            machine[pos] = i;
            free_at[i] = done;
            next += 1;
            if next == n {
                break;
            }
        }
        if next == n {
            break;
        }
        now = free_at.iter().filter(|t| **t > now).min().cloned().expect("some machine is busy when none is idle");
    }

    Schedule { ids: inst.jobs.iter().map(|j| j.id).collect(), start, completion, machine }
}

/// Realized sizes when every two-point job takes its `lo` (`false`) or `hi`
/// (`true`) value according to `long`, indexed by job position.
pub fn sizes_from_branches(inst: &SchedInstance, long: impl Fn(usize) -> bool) -> Vec<Rational> {
    inst.jobs
        .iter()
        .enumerate()
        .map(|(pos, j)| match &j.size {
            SizeDistribution::Deterministic { value } => value.clone(),
            SizeDistribution::TwoPoint { lo, hi, .. } => {
                if long(pos) {
                    hi.clone()
                } else {
                    lo.clone()
                }
            }
        })
        .collect()
}
