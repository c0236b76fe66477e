use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Items with integer sizes and an integer bound; a feasible solution is a
/// subset with total size at most the bound.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KnapsackInstance {
    pub sizes: Vec<u64>,
    #[serde(rename = "B")]
    pub bound: u64,
}

pub const BRUTE_FORCE_LIMIT: usize = 30;

impl KnapsackInstance {
    pub fn new(sizes: Vec<u64>, bound: u64) -> Self {
        KnapsackInstance { sizes, bound }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("knapsack serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() < 2 {
            return Err(Error::TooFewItems);
        }
        if self.bound < 2 {
            return Err(Error::BoundTooSmall);
        }
        for (index, &size) in self.sizes.iter().enumerate() {
            if size == 0 || size > self.bound {
                return Err(Error::ItemSizeOutOfRange { index, size, bound: self.bound });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> u64 {
        self.sizes.iter().sum()
    }

    /// Total size of the items selected by `mask` (bit i = item i).
    pub fn subset_size(&self, mask: u64) -> u64 {
        self.sizes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, s)| s).sum()
    }

    pub fn fits(&self, mask: u64) -> bool {
        self.subset_size(mask) <= self.bound
    }

    /// `B + 1 < Σ s_i ≤ 3B/2`.
    pub fn is_restricted(&self) -> bool {
        let total = self.total();
        total > self.bound + 1 && 2 * total <= 3 * self.bound
    }
}

/// Number of feasible subsets, by depth-first subset enumeration.
pub fn count_knapsack_bruteforce(kp: &KnapsackInstance) -> Result<u64> {
    kp.validate()?;
    if kp.n() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyItems(kp.n()));
    }
    fn go(sizes: &[u64], room: u64) -> u64 {
        match sizes.split_first() {
            None => 1,
            Some((&s, rest)) => {
                let without = go(rest, room);
                if s <= room {
                    without + go(rest, room - s)
                } else {
                    without
                }
            }
        }
    }
    Ok(go(&kp.sizes, kp.bound))
}

/// Pads an instance whose total exceeds `3B/2` with two items of size
/// `S = Σ s_i` and bound `2S + B`. Every subset missing a pad item fits, so
/// the padded count is `3·2ⁿ` plus the original count; that `3·2ⁿ` is
/// returned as the adjustment. Other instances come back unchanged with
/// adjustment 0.
pub fn restrict_knapsack(kp: &KnapsackInstance) -> Result<(KnapsackInstance, u64)> {
    kp.validate()?;
    let total = kp.total();
    if 2 * total <= 3 * kp.bound {
        return Ok((kp.clone(), 0));
    }
    let mut sizes = kp.sizes.clone();
    sizes.extend([total, total]);
    let out = KnapsackInstance::new(sizes, 2 * total + kp.bound);
    out.validate()?;
    debug_assert!(out.is_restricted());
    Ok((out, 3u64 << kp.n()))
}
