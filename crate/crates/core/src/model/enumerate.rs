use serde::{Deserialize, Serialize};

use super::{Rational, SchedInstance, SizeDistribution};
use crate::error::{Error, Result};

/// Default cap on the number of two-point jobs for exact enumeration.
pub const DEFAULT_ENUM_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Lo,
    Hi,
}

/// One joint outcome of all job sizes.
///
/// `sizes` is aligned with `SchedInstance::jobs`. Bit `b` of `mask` is set when
/// the `b`-th two-point job (in id order) takes its `hi` value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    pub mask: u64,
    pub sizes: Vec<Rational>,
    pub probability: Rational,
}

/// Deterministic, random-access enumeration of all realizations of an
/// instance: a binary counter over the two-point jobs in id order.
#[derive(Debug, Clone)]
pub struct Realizations<'a> {
    inst: &'a SchedInstance,
    two_point: Vec<usize>,
    next: u64,
}

pub fn enumerate_realizations(inst: &SchedInstance, cap: usize) -> Result<Realizations<'_>> {
    let two_point = inst.two_point_positions();
    if two_point.len() > cap || two_point.len() >= 64 {
        return Err(Error::EnumerationCapExceeded { two_point: two_point.len(), cap });
    }
    Ok(Realizations { inst, two_point, next: 0 })
}

impl<'a> Realizations<'a> {
    pub fn total(&self) -> u64 {
        1u64 << self.two_point.len()
    }

    /// Positions of the two-point jobs, in bit order.
    pub fn two_point_positions(&self) -> &[usize] {
        &self.two_point
    }

    pub fn branch_of(&self, mask: u64, bit: usize) -> Branch {
        if mask >> bit & 1 == 1 {
            Branch::Hi
        } else {
            Branch::Lo
        }
    }

    pub fn get(&self, mask: u64) -> Realization {
        assert!(mask < self.total(), "realization index out of range");
        let mut sizes: Vec<Rational> = Vec::with_capacity(self.inst.jobs.len());
        for job in &self.inst.jobs {
            sizes.push(match &job.size {
                SizeDistribution::Deterministic { value } => value.clone(),
                SizeDistribution::TwoPoint { lo, .. } => lo.clone(),
            });
        }
        let mut probability = Rational::one();
        for (bit, &pos) in self.two_point.iter().enumerate() {
            if let SizeDistribution::TwoPoint { hi, p_hi, .. } = &self.inst.jobs[pos].size {
                if mask >> bit & 1 == 1 {
                    sizes[pos] = hi.clone();
                    probability *= p_hi;
                } else {
                    probability *= &(Rational::one() - p_hi);
                }
            }
        }
        Realization { mask, sizes, probability }
    }
}

impl Iterator for Realizations<'_> {
    type Item = Realization;

    fn next(&mut self) -> Option<Realization> {
        if self.next >= self.total() {
            return None;
        }
        let r = self.get(self.next);
        self.next += 1;
        Some(r)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total() - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Realizations<'_> {}
