//! Adaptive operator weights with roulette-wheel selection.

use rand::Rng;

use super::{DestroyOp, RepairOp};
use crate::mdls::{Configuration, Objective};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorStats {
    pub weight: f64,
    pub score: f64,
    pub attempts: u64,
}

impl Default for OperatorStats {
    fn default() -> Self {
        Self { weight: 1.0, score: 0.0, attempts: 0 }
    }
}

impl OperatorStats {
    /// Segment update `ω ← ω(1−r) + r·π/θ`, written as `ω + r(π/θ − ω)`;
    /// operators never attempted keep their weight.
    pub fn end_segment(&mut self, reaction: f64) {
        if self.attempts > 0 {
            let rate = self.score / self.attempts as f64;
            self.weight = (self.weight + reaction * (rate - self.weight)).max(f64::MIN_POSITIVE);
        }
        self.score = 0.0;
        self.attempts = 0;
    }
}

/// One roulette wheel: a list of operators with their statistics.
#[derive(Debug, Clone)]
pub struct OperatorList<Op> {
    ops: Vec<Op>,
    stats: Vec<OperatorStats>,
}

impl<Op: Copy> OperatorList<Op> {
    pub fn new(ops: Vec<Op>) -> Self {
        assert!(!ops.is_empty(), "operator list must not be empty");
        let stats = vec![OperatorStats::default(); ops.len()];
        Self { ops, stats }
    }

    pub fn with_weights(ops: Vec<Op>, weights: &[f64]) -> Self {
        assert_eq!(ops.len(), weights.len());
        assert!(weights.iter().all(|&w| w > 0.0), "weights must be positive");
        let stats = weights.iter().map(|&weight| OperatorStats { weight, ..Default::default() }).collect();
        Self { ops, stats }
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn stats(&self) -> &[OperatorStats] {
        &self.stats
    }

    pub fn stats_mut(&mut self) -> &mut [OperatorStats] {
        &mut self.stats
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Roulette-wheel pick proportional to weight; counts an attempt.
    pub fn select<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let total: f64 = self.stats.iter().map(|s| s.weight).sum();
        let mut x = rng.random::<f64>() * total;
        let mut chosen = self.ops.len() - 1;
        for (i, s) in self.stats.iter().enumerate() {
            if x < s.weight {
                chosen = i;
                break;
            }
            x -= s.weight;
        }
        self.stats[chosen].attempts += 1;
        chosen
    }

    pub fn reward(&mut self, index: usize, amount: f64) {
        self.stats[index].score += amount;
    }

    pub fn end_segment(&mut self, reaction: f64) {
        for s in &mut self.stats {
            s.end_segment(reaction);
        }
    }
}

/// Destroy and repair wheels for each objective.
#[derive(Debug, Clone)]
pub struct OperatorBank {
    pub duration_destroy: OperatorList<DestroyOp>,
    pub duration_repair: OperatorList<RepairOp>,
    pub leximin_destroy: OperatorList<DestroyOp>,
    pub leximin_repair: OperatorList<RepairOp>,
    pub reaction: f64,
}

impl OperatorBank {
    pub fn new(configuration: Configuration, reaction: f64) -> Self {
        let leximin_repairs = match configuration {
            Configuration::All => vec![RepairOp::MaxMinRandom, RepairOp::MaxMinDuration, RepairOp::Leximin],
            Configuration::Leximin => vec![RepairOp::Leximin],
            Configuration::MaxMin => vec![RepairOp::MaxMinRandom, RepairOp::MaxMinDuration],
        };
        Self {
            duration_destroy: OperatorList::new(vec![DestroyOp::Random, DestroyOp::WorstDuration, DestroyOp::Related]),
            duration_repair: OperatorList::new(vec![RepairOp::Cheapest, RepairOp::Regret2, RepairOp::Regret3]),
            leximin_destroy: OperatorList::new(vec![DestroyOp::Random, DestroyOp::WorstMin]),
            leximin_repair: OperatorList::new(leximin_repairs),
            reaction,
        }
    }

    pub fn destroy_list(&mut self, objective: Objective) -> &mut OperatorList<DestroyOp> {
        match objective {
            Objective::Duration => &mut self.duration_destroy,
            Objective::Leximin => &mut self.leximin_destroy,
        }
    }

    pub fn repair_list(&mut self, objective: Objective) -> &mut OperatorList<RepairOp> {
        match objective {
            Objective::Duration => &mut self.duration_repair,
            Objective::Leximin => &mut self.leximin_repair,
        }
    }

    pub fn select_destroy<R: Rng + ?Sized>(&mut self, objective: Objective, rng: &mut R) -> usize {
        self.destroy_list(objective).select(rng)
    }

    pub fn select_repair<R: Rng + ?Sized>(&mut self, objective: Objective, rng: &mut R) -> usize {
        self.repair_list(objective).select(rng)
    }

    /// Credits the destroy/repair pair used in a successful step.
    pub fn reward(&mut self, objective: Objective, destroy: usize, repair: usize) {
        self.destroy_list(objective).reward(destroy, 1.0);
        self.repair_list(objective).reward(repair, 1.0);
    }

    pub fn end_segment(&mut self) {
        let r = self.reaction;
        self.duration_destroy.end_segment(r);
        self.duration_repair.end_segment(r);
        self.leximin_destroy.end_segment(r);
        self.leximin_repair.end_segment(r);
    }

    /// `(objective/kind/name, weight)` for every wheel slot, in a fixed order.
    pub fn weights(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        let mut push = |prefix: &str, names: Vec<&'static str>, stats: &[OperatorStats]| {
            for (n, s) in names.into_iter().zip(stats) {
                out.push((format!("{prefix}/{n}"), s.weight));
            }
        };
        push(
            "duration/destroy",
            self.duration_destroy.ops().iter().map(|o| o.name()).collect(),
            self.duration_destroy.stats(),
        );
        push(
            "duration/repair",
            self.duration_repair.ops().iter().map(|o| o.name()).collect(),
            self.duration_repair.stats(),
        );
        push(
            "leximin/destroy",
            self.leximin_destroy.ops().iter().map(|o| o.name()).collect(),
            self.leximin_destroy.stats(),
        );
        push(
            "leximin/repair",
            self.leximin_repair.ops().iter().map(|o| o.name()).collect(),
            self.leximin_repair.stats(),
        );
        out
    }
}
