//! Knapsack counting, the restriction transform, the paired scheduling
//! instances and count recovery from their cost differences.

mod construct;
mod knapsack;
mod pipeline;
mod verify;

pub use construct::{build_sept_pair, build_wsept_pair, evaluation_q, optimal_mode_q, PairLayout};
pub use knapsack::{count_knapsack_bruteforce, restrict_knapsack, KnapsackInstance, BRUTE_FORCE_LIMIT};
pub use pipeline::{
    all_blockers_long, count_via_optimal, count_via_optimal_with, count_via_policy, count_via_policy_with,
    recover_infeasible, PipelineOptions, ReductionMode, ReductionReport, Route,
};
pub use verify::{verify_lemmas, verify_lemmas_with, Check, VerificationReport};
