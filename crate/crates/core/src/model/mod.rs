//! Instances, size distributions and realizations.
//!
//! Every quantity is an exact [`Rational`]. Instances are plain values; call
//! [`SchedInstance::validate`] after constructing or deserializing one.

mod enumerate;
mod rational;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use enumerate::{enumerate_realizations, Branch, Realization, Realizations, DEFAULT_ENUM_CAP};
pub use rational::{denominator_lcm, ratio, ParseRationalError, Rational};

pub type JobId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SizeDistribution {
    Deterministic { value: Rational },
    TwoPoint { lo: Rational, hi: Rational, p_hi: Rational },
}

impl SizeDistribution {
    pub fn deterministic(value: impl Into<Rational>) -> Self {
        SizeDistribution::Deterministic { value: value.into() }
    }

    pub fn two_point(lo: impl Into<Rational>, hi: impl Into<Rational>, p_hi: Rational) -> Self {
        SizeDistribution::TwoPoint { lo: lo.into(), hi: hi.into(), p_hi }
    }

    pub fn expectation(&self) -> Rational {
        match self {
            SizeDistribution::Deterministic { value } => value.clone(),
            SizeDistribution::TwoPoint { lo, hi, p_hi } => lo * (Rational::one() - p_hi) + hi * p_hi,
        }
    }

    pub fn is_two_point(&self) -> bool {
        matches!(self, SizeDistribution::TwoPoint { .. })
    }

    /// Support points, lo branch first.
    pub fn support(&self) -> Vec<&Rational> {
        match self {
            SizeDistribution::Deterministic { value } => vec![value],
            SizeDistribution::TwoPoint { lo, hi, .. } => vec![lo, hi],
        }
    }

    /// `P(X > t)`.
    pub fn tail(&self, t: &Rational) -> Rational {
        match self {
            SizeDistribution::Deterministic { value } => {
                if value > t {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            SizeDistribution::TwoPoint { lo, hi, p_hi } => {
                if lo > t {
                    Rational::one()
                } else if hi > t {
                    p_hi.clone()
                } else {
                    Rational::zero()
                }
            }
        }
    }

    /// True if `self` is stochastically no larger than `other`.
    pub fn stochastically_le(&self, other: &SizeDistribution) -> bool {
        // Tails are step functions; comparing at every support point suffices.
        self.support().into_iter().chain(other.support()).all(|t| self.tail(t) <= other.tail(t))
    }

    fn validate(&self, id: JobId) -> Result<()> {
        match self {
            SizeDistribution::Deterministic { value } => {
                if value.is_negative() {
                    return Err(Error::NegativeSize(id));
                }
            }
            SizeDistribution::TwoPoint { lo, hi, p_hi } => {
                if lo.is_negative() || hi.is_negative() {
                    return Err(Error::NegativeSize(id));
                }
                if lo >= hi {
                    return Err(Error::TwoPointOrderViolation(id));
                }
                if !p_hi.is_positive() || *p_hi >= Rational::one() {
                    return Err(Error::ProbabilityOutOfRange(id));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JobTag {
    Knapsack,
    Blocker,
    Dummy,
    #[default]
    Plain,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub weight: Rational,
    #[serde(default)]
    pub tag: JobTag,
    pub size: SizeDistribution,
}

impl Job {
    pub fn new(id: JobId, weight: impl Into<Rational>, size: SizeDistribution) -> Self {
        Job { id, weight: weight.into(), tag: JobTag::Plain, size }
    }

    pub fn tagged(mut self, tag: JobTag) -> Self {
        self.tag = tag;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchedInstance {
    pub machines: usize,
    pub jobs: Vec<Job>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    StartTimes,
    CompletionTimes,
}

impl SchedInstance {
    pub fn new(machines: usize, jobs: Vec<Job>) -> Self {
        SchedInstance { machines, jobs }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Checks every invariant; returns the first violation found, scanning
    /// jobs in list order.
    pub fn validate(&self) -> Result<()> {
        if self.machines == 0 {
            return Err(Error::NoMachines);
        }
        if self.jobs.is_empty() {
            return Err(Error::NoJobs);
        }
        let mut seen = HashSet::with_capacity(self.jobs.len());
        for job in &self.jobs {
            if !seen.insert(job.id) {
                return Err(Error::DuplicateJobId(job.id));
            }
            if !job.weight.is_positive() {
                return Err(Error::NonPositiveWeight(job.id));
            }
            job.size.validate(job.id)?;
        }
        Ok(())
    }

    pub fn index_of(&self, id: JobId) -> Option<usize> {
        self.jobs.iter().position(|j| j.id == id)
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    /// Positions (into `jobs`) of the two-point jobs, sorted by job id.
    /// Bit `b` of a realization mask refers to the `b`-th entry.
    pub fn two_point_positions(&self) -> Vec<usize> {
        let mut pos: Vec<usize> = (0..self.jobs.len()).filter(|&i| self.jobs[i].size.is_two_point()).collect();
        pos.sort_by_key(|&i| self.jobs[i].id);
        pos
    }

    pub fn two_point_count(&self) -> usize {
        self.jobs.iter().filter(|j| j.size.is_two_point()).count()
    }

    pub fn total_weight(&self) -> Rational {
        self.jobs.iter().map(|j| &j.weight).sum()
    }

    /// `Σ w_j E[X_j]`: the gap between the completion-time and start-time objectives.
    pub fn weighted_expected_size(&self) -> Rational {
        self.jobs.iter().map(|j| &j.weight * j.size.expectation()).sum()
    }

    pub fn scale_weights(&self, factor: &Rational) -> SchedInstance {
        let mut out = self.clone();
        for job in &mut out.jobs {
            job.weight = &job.weight * factor;
        }
        out
    }
}
