//! Optimal non-idling adaptive policies by memoized expectimax.
//!
//! A policy acts at decision epochs: time 0 and every completion instant.
//! At an epoch with idle machines it starts `min(#idle, #unstarted)` jobs.
//! Between epochs nature reveals two-point jobs: a job started with
//! `(lo, hi, p_hi)` finishes at `lo` with probability `1 − p_hi`; if it is still
//! running at `lo` it is known to be long and becomes a deterministic
//! remainder of `hi − lo`.
//!
//! States are stored relative to the current epoch (the epoch is time 0). A
//! time advance of `δ` with unstarted weight `W` costs `δ·W`, since every
//! unstarted job's start is pushed back by `δ`.

mod search;
mod tree;

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::model::{JobId, ObjectiveKind, Rational, SchedInstance, SizeDistribution};

pub use search::{
    binary_search_optimum, binary_search_optimum_with, cost_denominator_bound, search_with_oracle, threshold_decide,
    SearchOutcome, ThresholdOracle,
};
pub use tree::{PolicyBranch, PolicyNode, PolicyTree};

pub const DEFAULT_DP_CAP: usize = 12;

#[derive(Debug, Clone)]
pub struct DpOptions {
    pub max_jobs: usize,
    pub memo: bool,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions { max_jobs: DEFAULT_DP_CAP, memo: true }
    }
}

/// A busy machine, relative to the current epoch.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Busy {
    /// Free after a known remaining time.
    Resolved { frees_in: Rational },
    /// A two-point job that has run for `elapsed < lo` and whose size is not
    /// yet known. `job` is a position in the instance's job list.
    Unresolved { elapsed: Rational, job: usize },
}

/// Canonical memo key: unstarted jobs plus sorted busy entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EpochState {
    pub remaining: u32,
    pub busy: Vec<Busy>,
}

impl EpochState {
    fn canonical(remaining: u32, mut busy: Vec<Busy>) -> Self {
        busy.sort();
        EpochState { remaining, busy }
    }

    pub fn initial(jobs: usize) -> Self {
        EpochState { remaining: if jobs == 32 { u32::MAX } else { (1u32 << jobs) - 1 }, busy: Vec::new() }
    }

    /// Human-readable key using job ids.
    pub fn key(&self, inst: &SchedInstance) -> String {
        let rem = (0..inst.jobs.len())
            .filter(|p| self.remaining >> p & 1 == 1)
            .map(|p| inst.jobs[p].id.to_string())
            .join(",");
        let busy = self
            .busy
            .iter()
            .map(|b| match b {
                Busy::Resolved { frees_in } => format!("R({frees_in})"),
                Busy::Unresolved { elapsed, job } => format!("U({}@{elapsed})", inst.jobs[*job].id),
            })
            .join(",");
        format!("remaining={{{rem}}};busy=[{busy}]")
    }
}

#[derive(Clone)]
struct TwoPoint {
    lo: Rational,
    hi: Rational,
    p_hi: Rational,
    p_lo: Rational,
}

#[derive(Clone)]
enum Size {
    Det(Rational),
    Two(TwoPoint),
}

/// One chance outcome after settling: probability, resulting state, and the
/// jobs revealed short (completed) or long (promoted).
pub(crate) struct Outcome {
    pub probability: Rational,
    pub state: EpochState,
    pub short: Vec<usize>,
    pub long: Vec<usize>,
}

pub(crate) struct Solver<'a> {
    inst: &'a SchedInstance,
    machines: usize,
    weights: Vec<Rational>,
    sizes: Vec<Size>,
    /// Cost charged when a job starts at relative time 0.
    start_charge: Vec<Rational>,
    memo: HashMap<EpochState, (Rational, u32)>,
    use_memo: bool,
    evaluations: u64,
}

impl fmt::Debug for Solver<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Solver").field("states", &self.memo.len()).field("evaluations", &self.evaluations).finish()
    }
}

impl<'a> Solver<'a> {
    pub(crate) fn new(inst: &'a SchedInstance, obj: ObjectiveKind, opts: &DpOptions) -> Result<Self> {
        inst.validate()?;
        let n = inst.jobs.len();
        if n > opts.max_jobs || n > 32 {
            return Err(Error::DpCapExceeded { jobs: n, cap: opts.max_jobs.min(32) });
        }
        let sizes = inst
            .jobs
            .iter()
            .map(|j| match &j.size {
                SizeDistribution::Deterministic { value } => Size::Det(value.clone()),
                SizeDistribution::TwoPoint { lo, hi, p_hi } => Size::Two(TwoPoint {
                    lo: lo.clone(),
                    hi: hi.clone(),
                    p_hi: p_hi.clone(),
                    p_lo: Rational::one() - p_hi,
                }),
            })
            .collect();
        let start_charge = inst
            .jobs
            .iter()
            .map(|j| match obj {
                ObjectiveKind::StartTimes => Rational::zero(),
                // non-anticipative start: E[w C] = w S + w E[X]
                ObjectiveKind::CompletionTimes => &j.weight * j.size.expectation(),
            })
            .collect();
        Ok(Solver {
            inst,
            machines: inst.machines,
            weights: inst.jobs.iter().map(|j| j.weight.clone()).collect(),
            sizes,
            start_charge,
            memo: HashMap::new(),
            use_memo: opts.memo,
            evaluations: 0,
        })
    }

    fn remaining_weight(&self, remaining: u32) -> Rational {
        (0..self.weights.len()).filter(|p| remaining >> p & 1 == 1).map(|p| &self.weights[p]).sum()
    }

    fn positions(remaining: u32) -> Vec<usize> {
        (0..32).filter(|p| remaining >> p & 1 == 1).collect()
    }

    /// Start decisions available in `state`, as masks over job positions.
    pub(crate) fn decisions(&self, state: &EpochState) -> Vec<u32> {
        let idle = self.machines - state.busy.len();
        let rem = Self::positions(state.remaining);
        let k = idle.min(rem.len());
        rem.into_iter().combinations(k).map(|c| c.into_iter().fold(0u32, |m, p| m | 1 << p)).collect()
    }

    pub(crate) fn is_decision_epoch(&self, state: &EpochState) -> bool {
        state.remaining != 0 && state.busy.len() < self.machines
    }

    /// Busy entries right after starting `decision`, before settling.
    fn start_jobs(&self, state: &EpochState, decision: u32) -> (Rational, Vec<Busy>) {
        let mut busy = state.busy.clone();
        let mut charge = Rational::zero();
        for p in Self::positions(decision) {
            charge += &self.start_charge[p];
            busy.push(match &self.sizes[p] {
                Size::Det(v) => Busy::Resolved { frees_in: v.clone() },
                Size::Two(_) => Busy::Unresolved { elapsed: Rational::zero(), job: p },
            });
        }
        (charge, busy)
    }

    /// Resolves everything that happens at the current instant: zero
    /// remainders free their machine, and two-point jobs at `elapsed == lo`
    /// either complete or are revealed long.
    pub(crate) fn settle(&self, remaining: u32, raw: Vec<Busy>) -> Vec<Outcome> {
        let mut fixed = Vec::with_capacity(raw.len());
        let mut pending = Vec::new();
        for entry in raw {
            match entry {
                Busy::Resolved { frees_in } if frees_in.is_zero() => {}
                Busy::Unresolved { elapsed, job } => match &self.sizes[job] {
                    Size::Two(tp) if elapsed == tp.lo => pending.push(job),
                    _ => fixed.push(Busy::Unresolved { elapsed, job }),
                },
                other => fixed.push(other),
            }
        }
        let mut out = Vec::with_capacity(1 << pending.len());
        for bits in 0u32..(1 << pending.len()) {
            let mut busy = fixed.clone();
            let mut probability = Rational::one();
            let (mut short, mut long) = (Vec::new(), Vec::new());
            for (i, &job) in pending.iter().enumerate() {
                let Size::Two(tp) = &self.sizes[job] else { unreachable!() };
                if bits >> i & 1 == 1 {
                    probability *= &tp.p_hi;
                    busy.push(Busy::Resolved { frees_in: &tp.hi - &tp.lo });
                    long.push(job);
                } else {
                    probability *= &tp.p_lo;
                    short.push(job);
                }
            }
            out.push(Outcome { probability, state: EpochState::canonical(remaining, busy), short, long });
        }
        out
    }

    /// Time to the next event and the busy entries shifted past it.
    pub(crate) fn advance(&self, state: &EpochState) -> (Rational, Vec<Busy>) {
        let delta = state
            .busy
            .iter()
            .map(|b| match b {
                Busy::Resolved { frees_in } => frees_in.clone(),
                Busy::Unresolved { elapsed, job } => match &self.sizes[*job] {
                    Size::Two(tp) => &tp.lo - elapsed,
                    Size::Det(_) => unreachable!("deterministic jobs are always resolved"),
                },
            })
            .min()
            .expect("advance needs a busy machine");
        let shifted = state
            .busy
            .iter()
            .map(|b| match b {
                Busy::Resolved { frees_in } => Busy::Resolved { frees_in: frees_in - &delta },
                Busy::Unresolved { elapsed, job } => Busy::Unresolved { elapsed: elapsed + &delta, job: *job },
            })
            .collect();
        (delta, shifted)
    }

    fn expected_settled(&mut self, remaining: u32, raw: Vec<Busy>) -> Rational {
        let outcomes = self.settle(remaining, raw);
        let mut acc = Rational::zero();
        for o in outcomes {
            let v = self.value(&o.state);
            acc += o.probability * v;
        }
        acc
    }

    /// Value of a start decision at a decision epoch, relative to the epoch.
    pub(crate) fn decision_value(&mut self, state: &EpochState, decision: u32) -> Rational {
        let (charge, raw) = self.start_jobs(state, decision);
        charge + self.expected_settled(state.remaining & !decision, raw)
    }

    /// Minimum expected cost-to-go of `state`, relative to its epoch.
    pub(crate) fn value(&mut self, state: &EpochState) -> Rational {
        if state.remaining == 0 {
            return Rational::zero();
        }
        if self.use_memo {
            if let Some((v, _)) = self.memo.get(state) {
                return v.clone();
            }
        }
        self.evaluations += 1;
        let (value, decision) = if self.is_decision_epoch(state) {
            let mut best: Option<(Rational, u32)> = None;
            for d in self.decisions(state) {
                let v = self.decision_value(state, d);
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, d));
                }
            }
            best.expect("at least one decision")
        } else {
            let (delta, raw) = self.advance(state);
            let wait = &delta * self.remaining_weight(state.remaining);
            (wait + self.expected_settled(state.remaining, raw), 0)
        };
        if self.use_memo {
            self.memo.insert(state.clone(), (value.clone(), decision));
        }
        value
    }

    /// Optimal decision at a decision epoch (memoized).
    pub(crate) fn best_decision(&mut self, state: &EpochState) -> u32 {
        self.value(state);
        match self.memo.get(state) {
            Some((_, d)) => *d,
            None => {
                // memo disabled: recompute by scanning
                let mut best: Option<(Rational, u32)> = None;
                for d in self.decisions(state) {
                    let v = self.decision_value(state, d);
                    if best.as_ref().is_none_or(|(b, _)| v < *b) {
                        best = Some((v, d));
                    }
                }
                best.expect("at least one decision").1
            }
        }
    }

    pub(crate) fn ids(&self, mask: u32) -> Vec<JobId> {
        Self::positions(mask).into_iter().map(|p| self.inst.jobs[p].id).collect()
    }

    pub(crate) fn id_list(&self, positions: &[usize]) -> Vec<JobId> {
        positions.iter().map(|&p| self.inst.jobs[p].id).collect()
    }
}

/// Minimum expected cost over non-idling adaptive policies, with one
/// optimal policy tree.
pub fn optimal_expected_cost(inst: &SchedInstance, obj: ObjectiveKind) -> Result<(Rational, PolicyTree)> {
    optimal_expected_cost_with(inst, obj, &DpOptions::default())
}

pub fn optimal_expected_cost_with(
    inst: &SchedInstance,
    obj: ObjectiveKind,
    opts: &DpOptions,
) -> Result<(Rational, PolicyTree)> {
    let opts = DpOptions { memo: true, ..opts.clone() };
    let mut solver = Solver::new(inst, obj, &opts)?;
    let root = EpochState::initial(inst.jobs.len());
    let value = solver.value(&root);
    let tree = PolicyTree::extract(&mut solver, value.clone());
    Ok((value, tree))
}

/// Optimal value only. With `opts.memo == false` every state is recomputed
/// from scratch.
pub fn optimal_value(inst: &SchedInstance, obj: ObjectiveKind, opts: &DpOptions) -> Result<Rational> {
    let mut solver = Solver::new(inst, obj, opts)?;
    Ok(solver.value(&EpochState::initial(inst.jobs.len())))
}

/// Every start decision available at time 0 with its optimal expected cost.
pub fn root_decisions(
    inst: &SchedInstance,
    obj: ObjectiveKind,
    opts: &DpOptions,
) -> Result<Vec<(Vec<JobId>, Rational)>> {
    let mut solver = Solver::new(inst, obj, opts)?;
    let root = EpochState::initial(inst.jobs.len());
    let decisions = solver.decisions(&root);
    Ok(decisions
        .into_iter()
        .map(|d| {
            let v = solver.decision_value(&root, d);
            (solver.ids(d), v)
        })
        .collect())
}
