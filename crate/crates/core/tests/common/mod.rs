//! Independent oracles and random generators shared by the integration tests.
//!
//! The oracles deliberately share no code with the library beyond the
//! instance types and `Rational`.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stosched::model::{Job, JobId, ObjectiveKind, Rational, SchedInstance, SizeDistribution};
use stosched::reduction::KnapsackInstance;

/// Probability and realized sizes of one joint outcome.
type Outcome = (Rational, Vec<Rational>);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// Every joint outcome as (probability, sizes by job position), by direct
/// product over jobs.
pub fn joint_outcomes(inst: &SchedInstance) -> Vec<(Rational, Vec<Rational>)> {
    let mut out = vec![(Rational::one(), Vec::new())];
    for job in &inst.jobs {
        let branches: Vec<(Rational, Rational)> = match &job.size {
            SizeDistribution::Deterministic { value } => vec![(Rational::one(), value.clone())],
            SizeDistribution::TwoPoint { lo, hi, p_hi } => {
                vec![(Rational::one() - p_hi, lo.clone()), (p_hi.clone(), hi.clone())]
            }
        };
        out = out
            .into_iter()
            .flat_map(|(p, sizes)| {
                branches.iter().map(move |(q, s)| {
                    let mut next = sizes.clone();
                    next.push(s.clone());
                    (&p * q, next)
                })
            })
            .collect();
    }
    out
}

/// List scheduling by the closed form: the k-th listed job starts at the
/// later of the previous start and the earliest machine release.
pub fn list_start_times(machines: usize, order: &[usize], sizes: &[Rational]) -> Vec<Rational> {
    let mut free = vec![Rational::zero(); machines];
    let mut start = vec![Rational::zero(); sizes.len()];
    let mut last = Rational::zero();
    for &pos in order {
        let (i, t) = free
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)))
            .map(|(i, t)| (i, t.clone()))
            .unwrap();
        let s = if t > last { t } else { last.clone() };
        free[i] = &s + &sizes[pos];
        start[pos] = s.clone();
        last = s;
    }
    start
}

pub fn positions(inst: &SchedInstance, order: &[JobId]) -> Vec<usize> {
    order.iter().map(|id| inst.jobs.iter().position(|j| j.id == *id).unwrap()).collect()
}

fn realized_cost(inst: &SchedInstance, start: &[Rational], sizes: &[Rational], obj: ObjectiveKind) -> Rational {
    inst.jobs
        .iter()
        .enumerate()
        .map(|(p, j)| match obj {
            ObjectiveKind::StartTimes => &j.weight * &start[p],
            ObjectiveKind::CompletionTimes => &j.weight * (&start[p] + &sizes[p]),
        })
        .sum()
}

/// Expected cost of a list order by the closed-form schedule.
pub fn list_cost_oracle(inst: &SchedInstance, order: &[JobId], obj: ObjectiveKind) -> Rational {
    let pos = positions(inst, order);
    joint_outcomes(inst)
        .into_iter()
        .map(|(p, sizes)| {
            let start = list_start_times(inst.machines, &pos, &sizes);
            p * realized_cost(inst, &start, &sizes, obj)
        })
        .sum()
}

/// SEPT order by expectations (ties by id), computed independently.
pub fn sept_order_oracle(inst: &SchedInstance) -> Vec<JobId> {
    let mut ids: Vec<(Rational, JobId)> = inst.jobs.iter().map(|j| (j.size.expectation(), j.id)).collect();
    ids.sort();
    ids.into_iter().map(|(_, id)| id).collect()
}

/// Cost values of non-idling adaptive policies: the least one and the
/// least one strictly above it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoBest {
    pub best: Rational,
    pub second: Option<Rational>,
}

impl TwoBest {
    fn single(v: Rational) -> Self {
        TwoBest { best: v, second: None }
    }

    fn add(self, other: TwoBest) -> TwoBest {
        let best = &self.best + &other.best;
        let gaps = [self.second.map(|s| s - &self.best), other.second.map(|s| s - &other.best)];
        let second = gaps.into_iter().flatten().min().map(|g| &best + g);
        TwoBest { best, second }
    }

    fn union(self, other: TwoBest) -> TwoBest {
        let mut vals: Vec<Rational> =
            [Some(self.best), self.second, Some(other.best), other.second].into_iter().flatten().collect();
        vals.sort();
        vals.dedup();
        TwoBest { best: vals[0].clone(), second: vals.get(1).cloned() }
    }
}

/// Exhaustive search over all non-idling decision trees on the belief state
/// (set of joint outcomes consistent with what has been observed). Each
/// value is probability-weighted, unnormalized.
pub struct TreeOracle<'a> {
    inst: &'a SchedInstance,
    obj: ObjectiveKind,
}

struct Belief {
    time: Rational,
    start: Vec<Option<Rational>>,
    outcomes: Vec<(Rational, Vec<Rational>)>,
}

impl<'a> TreeOracle<'a> {
    pub fn new(inst: &'a SchedInstance, obj: ObjectiveKind) -> Self {
        TreeOracle { inst, obj }
    }

    pub fn optimum(&self) -> Rational {
        self.two_best().best
    }

    pub fn two_best(&self) -> TwoBest {
        let belief = Belief {
            time: Rational::zero(),
            start: vec![None; self.inst.jobs.len()],
            outcomes: joint_outcomes(self.inst),
        };
        self.decide(&belief)
    }

    fn running(&self, b: &Belief, sizes: &[Rational]) -> usize {
        b.start.iter().zip(sizes).filter(|(s, x)| matches!(s, Some(s) if (s + *x) > b.time)).count()
    }

    fn decide(&self, b: &Belief) -> TwoBest {
        let unstarted: Vec<usize> = (0..b.start.len()).filter(|&p| b.start[p].is_none()).collect();
        if unstarted.is_empty() {
            return TwoBest::single(
                b.outcomes
                    .iter()
                    .map(|(p, sizes)| {
                        let start: Vec<Rational> = b.start.iter().map(|s| s.clone().unwrap()).collect();
                        p * realized_cost(self.inst, &start, sizes, self.obj)
                    })
                    .sum(),
            );
        }
        let busy = self.running(b, &b.outcomes[0].1);
        debug_assert!(b.outcomes.iter().all(|(_, s)| self.running(b, s) == busy));
        let idle = self.inst.machines - busy;
        if idle == 0 {
            return self.advance(b);
        }
        let k = idle.min(unstarted.len());
        let mut acc: Option<TwoBest> = None;
        for set in combinations(&unstarted, k) {
            let mut start = b.start.clone();
            for &p in &set {
                start[p] = Some(b.time.clone());
            }
            let next = Belief { time: b.time.clone(), start, outcomes: b.outcomes.clone() };
            let v = self.observe_now(&next);
            acc = Some(match acc {
                None => v,
                Some(a) => a.union(v),
            });
        }
        acc.unwrap()
    }

    /// Splits the belief by which jobs have finished by the current time and
    /// continues in each part.
    fn observe_now(&self, b: &Belief) -> TwoBest {
        let done = |sizes: &[Rational]| -> Vec<bool> {
            b.start.iter().zip(sizes).map(|(s, x)| matches!(s, Some(s) if (s + x) <= b.time)).collect()
        };
        let mut groups: Vec<(Vec<bool>, Vec<Outcome>)> = Vec::new();
        for o in &b.outcomes {
            let key = done(&o.1);
            match groups.iter_mut().find(|g| g.0 == key) {
                Some(g) => g.1.push(o.clone()),
                None => groups.push((key, vec![o.clone()])),
            }
        }
        groups
            .into_iter()
            .map(|(_, outcomes)| self.decide(&Belief { time: b.time.clone(), start: b.start.clone(), outcomes }))
            .reduce(TwoBest::add)
            .unwrap()
    }

    /// Moves to the next completion instant, splitting the belief by when it
    /// happens.
    fn advance(&self, b: &Belief) -> TwoBest {
        let next_event = |sizes: &[Rational]| -> Rational {
            b.start
                .iter()
                .zip(sizes)
                .filter_map(|(s, x)| s.as_ref().map(|s| s + x))
                .filter(|t| t > &b.time)
                .min()
                .unwrap()
        };
        let mut groups: Vec<(Rational, Vec<Outcome>)> = Vec::new();
        for o in &b.outcomes {
            let t = next_event(&o.1);
            match groups.iter_mut().find(|g| g.0 == t) {
                Some(g) => g.1.push(o.clone()),
                None => groups.push((t, vec![o.clone()])),
            }
        }
        groups
            .into_iter()
            .map(|(time, outcomes)| self.observe_now(&Belief { time, start: b.start.clone(), outcomes }))
            .reduce(TwoBest::add)
            .unwrap()
    }
}

pub fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut with: Vec<Vec<usize>> = combinations(&items[1..], k - 1)
        .into_iter()
        .map(|mut c| {
            c.insert(0, items[0]);
            c
        })
        .collect();
    with.extend(combinations(&items[1..], k));
    with
}

/// Brute-force knapsack count by bitmask enumeration.
pub fn knapsack_count_oracle(kp: &KnapsackInstance) -> u64 {
    (0u64..1 << kp.sizes.len())
        .filter(|mask| {
            kp.sizes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, s)| *s).sum::<u64>() <= kp.bound
        })
        .count() as u64
}

pub fn random_knapsack(
    rng: &mut impl Rng,
    n: std::ops::RangeInclusive<usize>,
    b: std::ops::RangeInclusive<u64>,
) -> KnapsackInstance {
    let n = rng.gen_range(n);
    let bound = rng.gen_range(b);
    let sizes = (0..n).map(|_| rng.gen_range(1..=bound)).collect();
    KnapsackInstance::new(sizes, bound)
}

/// Knapsack instance with `B + 1 < Σ s_i ≤ 3B/2`, by rejection.
pub fn random_restricted_knapsack(
    rng: &mut impl Rng,
    n: std::ops::RangeInclusive<usize>,
    b: std::ops::RangeInclusive<u64>,
) -> KnapsackInstance {
    loop {
        let kp = random_knapsack(rng, n.clone(), b.clone());
        if kp.is_restricted() {
            return kp;
        }
    }
}

/// Knapsack instance with `Σ s_i > 3B/2`, by rejection.
pub fn random_unrestricted_knapsack(
    rng: &mut impl Rng,
    n: std::ops::RangeInclusive<usize>,
    b: std::ops::RangeInclusive<u64>,
) -> KnapsackInstance {
    loop {
        let kp = random_knapsack(rng, n.clone(), b.clone());
        if 2 * kp.total() > 3 * kp.bound {
            return kp;
        }
    }
}

fn small_value(rng: &mut impl Rng, allow_zero: bool) -> Rational {
    let den = *[1i64, 2, 3].choose(rng).unwrap();
    let lo = if allow_zero { 0 } else { 1 };
    r(rng.gen_range(lo..=3 * den), den)
}

fn small_probability(rng: &mut impl Rng) -> Rational {
    let (n, d) = *[(1, 4), (1, 3), (1, 2), (2, 3), (3, 4)].choose(rng).unwrap();
    r(n, d)
}

pub fn random_two_point(rng: &mut impl Rng) -> SizeDistribution {
    loop {
        let lo = small_value(rng, true);
        let hi = small_value(rng, false);
        if lo < hi {
            return SizeDistribution::two_point(lo, hi, small_probability(rng));
        }
    }
}

/// Small random instance: at most `max_jobs` jobs, at most `max_two_point`
/// of them two-point, between 1 and `max_machines` machines, random ids and
/// weights.
pub fn random_instance(
    rng: &mut impl Rng,
    max_jobs: usize,
    max_two_point: usize,
    max_machines: usize,
) -> SchedInstance {
    let jobs = rng.gen_range(1..=max_jobs);
    let two_point = rng.gen_range(0..=max_two_point.min(jobs));
    let mut ids: Vec<JobId> = (0..jobs as JobId * 3).collect();
    ids.shuffle(rng);
    let mut kinds: Vec<bool> = (0..jobs).map(|i| i < two_point).collect();
    kinds.shuffle(rng);
    let jobs = kinds
        .into_iter()
        .zip(ids)
        .map(|(tp, id)| {
            let size = if tp { random_two_point(rng) } else { SizeDistribution::deterministic(small_value(rng, true)) };
            let weight = r(rng.gen_range(1..=4), *[1i64, 2].choose(rng).unwrap());
            Job::new(id, weight, size)
        })
        .collect();
    SchedInstance::new(rng.gen_range(1..=max_machines), jobs)
}

/// Unit-weight instance whose size distributions are pairwise stochastically
/// ordered, by rejection.
pub fn random_comparable_instance(rng: &mut impl Rng, max_jobs: usize, max_machines: usize) -> SchedInstance {
    loop {
        let mut inst = random_instance(rng, max_jobs, 3, max_machines);
        for j in &mut inst.jobs {
            j.weight = Rational::one();
        }
        let ok = inst
            .jobs
            .iter()
            .all(|a| inst.jobs.iter().all(|b| a.size.stochastically_le(&b.size) || b.size.stochastically_le(&a.size)));
        if ok {
            return inst;
        }
    }
}

/// Σ w_j E[X_j], computed directly.
pub fn weighted_mean_size(inst: &SchedInstance) -> Rational {
    inst.jobs.iter().map(|j| &j.weight * j.size.expectation()).sum()
}
