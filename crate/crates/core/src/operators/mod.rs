//! Destroy and repair operators for both objectives, plus the adaptive operator bank.

mod bank;
mod destroy;
mod repair;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

pub use bank::{OperatorBank, OperatorList, OperatorStats};
pub use destroy::{
    destroy_random, destroy_related, destroy_worst_duration, destroy_worst_min, worst_duration_ranking,
    worst_min_ranking,
};
pub use repair::{
    repair_cheapest, repair_k_regret, repair_leximin, repair_maxmin, repair_with, select_cheapest, select_k_regret,
    select_leximin, select_maxmin, MaxMinTieBreak,
};

use crate::instance::Instance;
use crate::solution::Solution;

/// Index into a ranked list for a draw `y ∈ [0, 1)`: `floor(y^p · len)`.
pub fn randomized_index(y: f64, p: f64, len: usize) -> usize {
    debug_assert!(len > 0);
    ((y.powf(p) * len as f64).floor() as usize).min(len - 1)
}

/// Removal quantity: uniform in `[1, max(1, floor(fraction · visited))]`, or 0 for an empty solution.
pub fn draw_q<R: Rng + ?Sized>(visited: usize, fraction: f64, rng: &mut R) -> usize {
    if visited == 0 {
        return 0;
    }
    let upper = ((fraction * visited as f64 + 1e-9).floor() as usize).clamp(1, visited);
    rng.random_range(1..=upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DestroyOp {
    Random,
    WorstDuration,
    Related,
    WorstMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RepairOp {
    Cheapest,
    Regret2,
    Regret3,
    MaxMinRandom,
    MaxMinDuration,
    Leximin,
}

/// Randomisation exponents shared by the ranked destroy operators.
#[derive(Debug, Clone, Copy)]
pub struct DestroyParams {
    pub p_worst: f64,
    pub p_related: f64,
}

impl Default for DestroyParams {
    fn default() -> Self {
        Self { p_worst: 3.0, p_related: 5.0 }
    }
}

impl DestroyOp {
    pub const ALL: [DestroyOp; 4] =
        [DestroyOp::Random, DestroyOp::WorstDuration, DestroyOp::Related, DestroyOp::WorstMin];

    pub fn name(&self) -> &'static str {
        match self {
            DestroyOp::Random => "rand_rm",
            DestroyOp::WorstDuration => "worst_dur_rm",
            DestroyOp::Related => "related_rm",
            DestroyOp::WorstMin => "worst_min_rm",
        }
    }

    pub fn apply<R: Rng + ?Sized>(
        &self,
        sol: &mut Solution,
        inst: &Instance,
        q: usize,
        params: &DestroyParams,
        rng: &mut R,
    ) {
        match self {
            DestroyOp::Random => destroy_random(sol, inst, q, rng),
            DestroyOp::WorstDuration => destroy_worst_duration(sol, inst, q, params.p_worst, rng),
            DestroyOp::Related => destroy_related(sol, inst, q, params.p_related, rng),
            DestroyOp::WorstMin => destroy_worst_min(sol, inst, q, params.p_worst, rng),
        }
    }
}

impl RepairOp {
    pub const ALL: [RepairOp; 6] = [
        RepairOp::Cheapest,
        RepairOp::Regret2,
        RepairOp::Regret3,
        RepairOp::MaxMinRandom,
        RepairOp::MaxMinDuration,
        RepairOp::Leximin,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RepairOp::Cheapest => "cheapest_ins",
            RepairOp::Regret2 => "regret2_ins",
            RepairOp::Regret3 => "regret3_ins",
            RepairOp::MaxMinRandom => "maxmin_rand_ins",
            RepairOp::MaxMinDuration => "maxmin_dur_ins",
            RepairOp::Leximin => "leximin_ins",
        }
    }

    /// Repairs `sol`, calling `on_insert` after every insertion.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        sol: &mut Solution,
        inst: &Instance,
        rng: &mut R,
        on_insert: &mut dyn FnMut(&Solution),
    ) {
        match self {
            RepairOp::Cheapest => repair_with(sol, inst, on_insert, |s| select_cheapest(s, inst)),
            RepairOp::Regret2 => repair_with(sol, inst, on_insert, |s| select_k_regret(s, inst, 2)),
            RepairOp::Regret3 => repair_with(sol, inst, on_insert, |s| select_k_regret(s, inst, 3)),
            RepairOp::MaxMinRandom => {
                repair_with(sol, inst, on_insert, |s| select_maxmin(s, inst, MaxMinTieBreak::Random, rng))
            }
            RepairOp::MaxMinDuration => {
                repair_with(sol, inst, on_insert, |s| select_maxmin(s, inst, MaxMinTieBreak::Duration, rng))
            }
            RepairOp::Leximin => repair_with(sol, inst, on_insert, |s| select_leximin(s, inst)),
        }
    }
}

impl fmt::Display for DestroyOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for RepairOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DestroyOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|op| op.name() == s).ok_or_else(|| format!("unknown destroy operator {s:?}"))
    }
}

impl FromStr for RepairOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|op| op.name() == s).ok_or_else(|| format!("unknown repair operator {s:?}"))
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use rand::rand_core::impls;
    use rand::RngCore;

    /// An RNG that always yields zero: every `y` draw is 0 and every range draw
    /// returns its lower bound.
    pub struct ZeroRng;

    impl RngCore for ZeroRng {
        fn next_u32(&mut self) -> u32 {
            0
        }

        fn next_u64(&mut self) -> u64 {
            0
        }

        fn fill_bytes(&mut self, dst: &mut [u8]) {
            impls::fill_bytes_via_next(self, dst)
        }
    }
}
