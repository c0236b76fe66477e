//! Paired scheduling instances whose cost difference encodes a knapsack count.
//!
//! Job ids: knapsack jobs `0..n` (item order), blockers `n..2n−1` with the
//! distinguished blocker first, dummy `2n−1`. Both instances use `m = n`
//! machines and differ only in the distinguished blocker.

use super::knapsack::KnapsackInstance;
use crate::error::{Error, Result};
use crate::model::{Job, JobId, JobTag, Rational, SchedInstance, SizeDistribution};

/// Ids of the job roles in a constructed pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairLayout {
    pub knapsack: Vec<JobId>,
    pub blockers: Vec<JobId>,
    pub dummy: JobId,
}

impl PairLayout {
    pub fn for_items(n: usize) -> Self {
        let n = n as JobId;
        PairLayout { knapsack: (0..n).collect(), blockers: (n..2 * n - 1).collect(), dummy: 2 * n - 1 }
    }
}

fn knapsack_jobs(kp: &KnapsackInstance) -> Vec<Job> {
    let short = Rational::new(1, kp.n() as i64);
    kp.sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            Job::new(
                i as JobId,
                1i64,
                SizeDistribution::two_point(short.clone(), Rational::from(s), Rational::new(1, 2)),
            )
            .tagged(JobTag::Knapsack)
        })
        .collect()
}

/// `B + 1` and `B + 1 + 1/n`.
fn blocker_lengths(kp: &KnapsackInstance) -> (Rational, Rational) {
    let b1 = Rational::from(kp.bound + 1);
    let b2 = &b1 + Rational::new(1, kp.n() as i64);
    (b1, b2)
}

fn assemble(kp: &KnapsackInstance, blockers: [Vec<Job>; 2], dummy: Job) -> (SchedInstance, SchedInstance) {
    let [first, second] = blockers;
    let build = |blockers: Vec<Job>| {
        let mut jobs = knapsack_jobs(kp);
        jobs.extend(blockers);
        jobs.push(dummy.clone());
        SchedInstance::new(kp.n(), jobs)
    };
    (build(first), build(second))
}

/// Weighted pair for list-policy evaluation under WSEPT: deterministic
/// blockers of weight `6B`, dummy of size `B`.
pub fn build_wsept_pair(kp: &KnapsackInstance) -> Result<(SchedInstance, SchedInstance)> {
    kp.validate()?;
    if kp.total() <= kp.bound + 1 {
        return Err(Error::TotalSizeTooSmall);
    }
    let n = kp.n();
    let layout = PairLayout::for_items(n);
    let weight = Rational::from(6 * kp.bound);
    let (b1, b2) = blocker_lengths(kp);
    let blockers = |first: &Rational| -> Vec<Job> {
        layout
            .blockers
            .iter()
            .enumerate()
            .map(|(i, &id)| {
                let len = if i == 0 { first.clone() } else { b2.clone() };
                Job::new(id, weight.clone(), SizeDistribution::deterministic(len)).tagged(JobTag::Blocker)
            })
            .collect()
    };
    let dummy = Job::new(layout.dummy, 1i64, SizeDistribution::deterministic(kp.bound)).tagged(JobTag::Dummy);
    Ok(assemble(kp, [blockers(&b1), blockers(&b2)], dummy))
}

/// Default blocker probability when the pair is evaluated under SEPT: `1/(3B)`.
pub fn evaluation_q(kp: &KnapsackInstance) -> Rational {
    Rational::new(1, 3 * kp.bound as i64)
}

/// Blocker probability small enough that every optimal policy starts all
/// blockers first: `1/(2n²B)`.
pub fn optimal_mode_q(kp: &KnapsackInstance) -> Rational {
    let n = kp.n() as i64;
    Rational::new(1, 2 * n * n * kp.bound as i64)
}

/// Unit-weight pair with Bernoulli blockers (`0` or long, long w.p. `q`) and
/// a deterministic dummy of size `B + 1`. Requires a restricted instance.
pub fn build_sept_pair(kp: &KnapsackInstance, q: Option<Rational>) -> Result<(SchedInstance, SchedInstance, Rational)> {
    kp.validate()?;
    if kp.total() <= kp.bound + 1 {
        return Err(Error::TotalSizeTooSmall);
    }
    if 2 * kp.total() > 3 * kp.bound {
        return Err(Error::NotRestricted);
    }
    let q = q.unwrap_or_else(|| evaluation_q(kp));
    if !q.is_positive() || q >= Rational::one() {
        return Err(Error::InvalidQ);
    }
    let layout = PairLayout::for_items(kp.n());
    let (b1, b2) = blocker_lengths(kp);
    let blockers = |first: &Rational| -> Vec<Job> {
        layout
            .blockers
            .iter()
            .enumerate()
            .map(|(i, &id)| {
                let len = if i == 0 { first.clone() } else { b2.clone() };
                Job::new(id, 1i64, SizeDistribution::two_point(0i64, len, q.clone())).tagged(JobTag::Blocker)
            })
            .collect()
    };
    let dummy = Job::new(layout.dummy, 1i64, SizeDistribution::deterministic(kp.bound + 1)).tagged(JobTag::Dummy);
    let (a, b) = assemble(kp, [blockers(&b1), blockers(&b2)], dummy);
    Ok((a, b, q))
}
