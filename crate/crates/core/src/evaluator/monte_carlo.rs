//! Sampling-based cost estimates for instances beyond the enumeration cap.
//!
//! Estimates are returned as [`MonteCarloEstimate`], which is deliberately not
//! convertible into the exact cost types the reduction pipelines consume.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ObjectiveKind, Rational, SchedInstance, SizeDistribution};
use crate::policy::{order_positions, priority_order, simulate_positions, MachineTieBreak, PriorityRule};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const JOB_GAMMA: u64 = 0xD1B5_4A32_D192_ED03;

/// The SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Independent stream for one (sample, job) pair.
    pub fn stream(seed: u64, sample: u64, job: u32) -> Self {
        let base = SplitMix64::new(seed ^ sample.wrapping_mul(GOLDEN_GAMMA)).next_u64();
        SplitMix64::new(base ^ (u64::from(job) + 1).wrapping_mul(JOB_GAMMA))
    }

    /// Bernoulli draw with exact rational success probability `p`, using
    /// 53 random bits: success iff `u / 2^53 < p`.
    pub fn bernoulli(&mut self, p: &Rational) -> bool {
        let u = BigInt::from(self.next_u64() >> 11);
        u * p.denom() < p.numer() * (BigInt::from(1u64) << 53)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub approximate: bool,
    pub samples: u64,
    pub seed: u64,
    /// Sample mean of the exact per-sample costs.
    pub mean: Rational,
    pub mean_f64: f64,
    /// Standard error of the mean; 0 for a single sample.
    pub std_error: f64,
}

pub fn monte_carlo_cost(
    inst: &SchedInstance,
    rule: &PriorityRule,
    obj: ObjectiveKind,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    inst.validate()?;
    let order = order_positions(inst, &priority_order(inst, rule)?);

    let sample_cost = |i: u64| -> Rational {
        let sizes: Vec<Rational> = inst
            .jobs
            .iter()
            .map(|job| match &job.size {
                SizeDistribution::Deterministic { value } => value.clone(),
                SizeDistribution::TwoPoint { lo, hi, p_hi } => {
                    if SplitMix64::stream(seed, i, job.id).bernoulli(p_hi) {
                        hi.clone()
                    } else {
                        lo.clone()
                    }
                }
            })
            .collect();
        simulate_positions(inst, &order, &sizes, MachineTieBreak::LowestIndex).cost(inst, obj)
    };

    let zero = || (Rational::zero(), Rational::zero());
    let (sum, sum_sq) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let c = sample_cost(i);
            let sq = &c * &c;
            (c, sq)
        })
        .reduce(zero, |a, b| (a.0 + b.0, a.1 + b.1));

    let n = Rational::from(samples);
    let mean = &sum / &n;
    let std_error = if samples > 1 {
        let var = (sum_sq - &mean * &sum) / (&n - Rational::one());
        (var.to_f64().max(0.0) / samples as f64).sqrt()
    } else {
        0.0
    };
    Ok(MonteCarloEstimate { approximate: true, samples, seed, mean_f64: mean.to_f64(), mean, std_error })
}
