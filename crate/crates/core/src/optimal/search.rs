//! Threshold decisions and exact recovery of the optimum by bisection.

use std::cell::{Cell, OnceCell};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;

use super::{optimal_value, DpOptions};
use crate::error::{Error, Result};
use crate::model::{denominator_lcm, ObjectiveKind, Rational, SchedInstance, SizeDistribution};

/// "Is there a non-idling policy with expected cost at most `x`?"
pub fn threshold_decide(inst: &SchedInstance, x: &Rational, obj: ObjectiveKind) -> Result<bool> {
    ThresholdOracle::new(inst, obj, DpOptions::default()).decide(x)
}

/// Threshold oracle that solves the instance once and answers every query
/// against the cached optimum. Counts its calls.
#[derive(Debug)]
pub struct ThresholdOracle<'a> {
    inst: &'a SchedInstance,
    obj: ObjectiveKind,
    opts: DpOptions,
    optimum: OnceCell<Rational>,
    calls: Cell<usize>,
}

impl<'a> ThresholdOracle<'a> {
    pub fn new(inst: &'a SchedInstance, obj: ObjectiveKind, opts: DpOptions) -> Self {
        ThresholdOracle { inst, obj, opts, optimum: OnceCell::new(), calls: Cell::new(0) }
    }

    pub fn decide(&self, x: &Rational) -> Result<bool> {
        self.calls.set(self.calls.get() + 1);
        let opt = match self.optimum.get() {
            Some(v) => v,
            None => {
                let v = optimal_value(self.inst, self.obj, &self.opts)?;
                self.optimum.get_or_init(|| v)
            }
        };
        Ok(opt <= x)
    }

    pub fn calls(&self) -> usize {
        self.calls.get()
    }
}

/// Bound `D` such that every attainable expected cost is a multiple of `1/D`:
/// the product of the branch-probability denominators of all two-point jobs
/// times the lcm of all size denominators times the lcm of all weight
/// denominators.
pub fn cost_denominator_bound(inst: &SchedInstance) -> BigInt {
    let mut prob = BigInt::one();
    let mut sizes = Vec::new();
    for job in &inst.jobs {
        match &job.size {
            SizeDistribution::Deterministic { value } => sizes.push(value),
            SizeDistribution::TwoPoint { lo, hi, p_hi } => {
                prob *= p_hi.denom();
                sizes.push(lo);
                sizes.push(hi);
            }
        }
    }
    let size_lcm = denominator_lcm(sizes);
    let weight_lcm = denominator_lcm(inst.jobs.iter().map(|j| &j.weight));
    prob * size_lcm.lcm(&weight_lcm)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub value: Rational,
    pub oracle_calls: usize,
    /// Bisection steps on the continuous interval.
    pub iterations: usize,
    /// Extra steps on the `1/D` grid when the final interval held several
    /// grid points.
    pub refinement_steps: usize,
}

pub fn binary_search_optimum(
    inst: &SchedInstance,
    obj: ObjectiveKind,
    lo: &Rational,
    hi: &Rational,
    granularity: &Rational,
) -> Result<SearchOutcome> {
    binary_search_optimum_with(inst, obj, lo, hi, granularity, &DpOptions::default())
}

pub fn binary_search_optimum_with(
    inst: &SchedInstance,
    obj: ObjectiveKind,
    lo: &Rational,
    hi: &Rational,
    granularity: &Rational,
    opts: &DpOptions,
) -> Result<SearchOutcome> {
    let oracle = ThresholdOracle::new(inst, obj, opts.clone());
    let bound = cost_denominator_bound(inst);
    search_with_oracle(|x| oracle.decide(x), lo, hi, granularity, &bound)
}

/// Recovers the least `x` with `decide(x)` true, given that it lies in
/// `[lo, hi]` and is a multiple of `1/denom_bound`.
///
/// Keeps `decide(a) = false`, `decide(b) = true` and halves `(a, b]` until it
/// is no wider than `granularity`, starting from `a = lo − granularity`. The
/// lower end is only checked explicitly if no query ever answered false.
/// The answer is then the unique multiple of `1/denom_bound` left in `(a, b]`,
/// bisecting over grid points if more than one remains.
pub fn search_with_oracle(
    mut decide: impl FnMut(&Rational) -> Result<bool>,
    lo: &Rational,
    hi: &Rational,
    granularity: &Rational,
    denom_bound: &BigInt,
) -> Result<SearchOutcome> {
    if !granularity.is_positive() {
        return Err(Error::NonPositiveGranularity);
    }
    if lo > hi {
        return Err(Error::BoundsDoNotBracket(format!("lo {lo} exceeds hi {hi}")));
    }
    let mut calls = 0usize;
    let mut ask = |x: &Rational, calls: &mut usize| {
        *calls += 1;
        decide(x)
    };
    if !ask(hi, &mut calls)? {
        return Err(Error::BoundsDoNotBracket(format!("optimum exceeds hi = {hi}")));
    }
    let below_lo = lo - granularity;
    let lower_fails = |calls: &mut usize, ask: &mut dyn FnMut(&Rational, &mut usize) -> Result<bool>| -> Result<()> {
        if ask(&below_lo, calls)? {
            return Err(Error::BoundsDoNotBracket(format!("optimum is at most lo − granularity = {below_lo}")));
        }
        Ok(())
    };
    if lo == hi {
        lower_fails(&mut calls, &mut ask)?;
        return Ok(SearchOutcome { value: lo.clone(), oracle_calls: calls, iterations: 0, refinement_steps: 0 });
    }

    let two = Rational::from(2i64);
    let mut a = below_lo.clone();
    let mut b = hi.clone();
    let mut seen_false = false;
    let mut iterations = 0;
    while &b - &a > *granularity {
        let mid = (&a + &b) / &two;
        if ask(&mid, &mut calls)? {
            b = mid;
        } else {
            a = mid;
            seen_false = true;
        }
        iterations += 1;
    }
    if !seen_false {
        lower_fails(&mut calls, &mut ask)?;
    }

    // grid points k/D with a < k/D <= b
    let d = Rational::from_integer(denom_bound.clone());
    let mut k_lo = (&a * &d).floor() + 1;
    let mut k_hi = (&b * &d).floor();
    if k_lo > k_hi {
        return Err(Error::BoundsDoNotBracket(format!(
            "no cost with denominator dividing {denom_bound} in ({a}, {b}]"
        )));
    }
    let mut refinement_steps = 0;
    while k_lo < k_hi {
        let k_mid: BigInt = Integer::div_floor(&(&k_lo + &k_hi), &BigInt::from(2));
        if ask(&Rational::new(k_mid.clone(), denom_bound.clone()), &mut calls)? {
            k_hi = k_mid;
        } else {
            k_lo = k_mid + 1;
        }
        refinement_steps += 1;
    }
    Ok(SearchOutcome {
        value: Rational::new(k_lo, denom_bound.clone()),
        oracle_calls: calls,
        iterations,
        refinement_steps,
    })
}
