use serde::Serialize;

use super::{Busy, EpochState, Solver};
use crate::model::{JobId, Rational};

/// Decision taken at one epoch of an optimal policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolicyNode {
    pub state: String,
    /// Absolute time of the epoch.
    pub time: Rational,
    pub start: Vec<JobId>,
    pub branches: Vec<PolicyBranch>,
}

/// What nature reveals between a decision and the next epoch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolicyBranch {
    /// Probability conditional on reaching the parent node.
    pub probability: Rational,
    pub revealed_short: Vec<JobId>,
    pub revealed_long: Vec<JobId>,
    /// `None` once every job has been started.
    pub node: Option<Box<PolicyNode>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolicyTree {
    pub value: Rational,
    pub scope: &'static str,
    pub root: PolicyNode,
}

impl PolicyTree {
    pub(crate) fn extract(solver: &mut Solver<'_>, value: Rational) -> PolicyTree {
        let n = solver.inst.jobs.len();
        let root = node(solver, EpochState::initial(n), Rational::zero());
        PolicyTree { value, scope: "optimal among non-idling policies", root }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    /// Number of decision nodes.
    pub fn size(&self) -> usize {
        fn count(n: &PolicyNode) -> usize {
            1 + n.branches.iter().filter_map(|b| b.node.as_deref()).map(count).sum::<usize>()
        }
        count(&self.root)
    }
}

fn node(solver: &mut Solver<'_>, state: EpochState, time: Rational) -> PolicyNode {
    let decision = solver.best_decision(&state);
    let (_, raw) = solver.start_jobs(&state, decision);
    let mut branches = Vec::new();
    walk(solver, state.remaining & !decision, raw, &time, Rational::one(), (Vec::new(), Vec::new()), &mut branches);
    PolicyNode { state: state.key(solver.inst), time, start: solver.ids(decision), branches }
}

fn walk(
    solver: &mut Solver<'_>,
    remaining: u32,
    raw: Vec<Busy>,
    time: &Rational,
    probability: Rational,
    revealed: (Vec<usize>, Vec<usize>),
    out: &mut Vec<PolicyBranch>,
) {
    for o in solver.settle(remaining, raw) {
        let p = &probability * &o.probability;
        let mut short = revealed.0.clone();
        short.extend(&o.short);
        let mut long = revealed.1.clone();
        long.extend(&o.long);
        if o.state.remaining == 0 {
            out.push(branch(solver, p, &short, &long, None));
        } else if solver.is_decision_epoch(&o.state) {
            let child = node(solver, o.state, time.clone());
            out.push(branch(solver, p, &short, &long, Some(child)));
        } else {
            let (delta, shifted) = solver.advance(&o.state);
            walk(solver, remaining, shifted, &(time + &delta), p, (short, long), out);
        }
    }
}

fn branch(
    solver: &Solver<'_>,
    probability: Rational,
    short: &[usize],
    long: &[usize],
    node: Option<PolicyNode>,
) -> PolicyBranch {
    PolicyBranch {
        probability,
        revealed_short: solver.id_list(short),
        revealed_long: solver.id_list(long),
        node: node.map(Box::new),
    }
}
