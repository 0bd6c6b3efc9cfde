//! Multi-directional local search: per-objective ALNS steps from archived
//! solutions, merged into the archive by non-dominated union.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::archive::{InsertOutcome, ParetoArchive};
use crate::coverage::{compare_sorted, CoverageRatio};
use crate::instance::Instance;
use crate::operators::{draw_q, repair_cheapest, DestroyParams, OperatorBank};
use crate::solution::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Configuration {
    /// Both highest max-min insertions and highest leximin insertion.
    All,
    /// Highest leximin insertion only.
    Leximin,
    /// Highest max-min insertions only.
    MaxMin,
}

impl Configuration {
    pub fn name(&self) -> &'static str {
        match self {
            Configuration::All => "all",
            Configuration::Leximin => "leximin",
            Configuration::MaxMin => "max-min",
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Configuration {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Configuration::All),
            "leximin" => Ok(Configuration::Leximin),
            "max-min" | "max_min" | "maxmin" => Ok(Configuration::MaxMin),
            other => Err(format!("unknown configuration {other:?} (expected all, leximin or max-min)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Duration,
    Leximin,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Wall-clock budget.
    pub time_limit: Option<Duration>,
    /// Iteration budget; the deterministic stopping rule.
    pub max_iterations: Option<u64>,
    pub configuration: Configuration,
    pub seed: u64,
    pub p_worst: f64,
    pub p_related: f64,
    pub reaction: f64,
    pub segment_length: u64,
    pub q_fraction: f64,
    /// Offer every intermediate state of a step (after destroy and after each
    /// insertion) to the archive, not only the repaired solution.
    pub archive_intermediate: bool,
    /// Audit archive and solutions after every iteration.
    pub audit: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            time_limit: None,
            max_iterations: None,
            configuration: Configuration::All,
            seed: 0,
            p_worst: 3.0,
            p_related: 5.0,
            reaction: 0.1,
            segment_length: 100,
            q_fraction: 0.30,
            archive_intermediate: true,
            audit: false,
        }
    }
}

impl SearchConfig {
    pub fn with_iterations(configuration: Configuration, iterations: u64, seed: u64) -> Self {
        Self { max_iterations: Some(iterations), configuration, seed, ..Default::default() }
    }

    pub fn with_time_limit(configuration: Configuration, limit: Duration, seed: u64) -> Self {
        Self { time_limit: Some(limit), configuration, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.time_limit.is_none() && self.max_iterations.is_none() {
            return Err("a time limit or an iteration limit is required".into());
        }
        if !(self.p_worst > 0.0 && self.p_related > 0.0) {
            return Err("randomisation exponents must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.reaction) {
            return Err("reaction factor must lie in [0, 1]".into());
        }
        if self.segment_length == 0 {
            return Err("segment length must be positive".into());
        }
        if !(self.q_fraction > 0.0 && self.q_fraction <= 1.0) {
            return Err("removal fraction must lie in (0, 1]".into());
        }
        Ok(())
    }

    fn destroy_params(&self) -> DestroyParams {
        DestroyParams { p_worst: self.p_worst, p_related: self.p_related }
    }
}

/// Cheapest insertion from the empty solution.
pub fn initial_solution(inst: &Instance) -> Solution {
    let mut sol = Solution::empty(inst);
    repair_cheapest(&mut sol, inst);
    sol
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub solution: Solution,
    pub destroy: usize,
    pub repair: usize,
}

/// One destroy and one repair on a copy of `x`, with operators drawn from the
/// objective's wheels. `on_state` sees the destroyed solution and every
/// intermediate repair state.
pub fn alns_step<R: Rng + ?Sized>(
    objective: Objective,
    x: &Solution,
    inst: &Instance,
    bank: &mut OperatorBank,
    cfg: &SearchConfig,
    rng: &mut R,
    on_state: &mut dyn FnMut(&Solution),
) -> StepOutcome {
    let destroy = bank.select_destroy(objective, rng);
    let repair = bank.select_repair(objective, rng);
    let destroy_op = bank.destroy_list(objective).ops()[destroy];
    let repair_op = bank.repair_list(objective).ops()[repair];

    let mut sol = x.clone();
    let q = draw_q(sol.visited_count(), cfg.q_fraction, rng);
    if q > 0 {
        destroy_op.apply(&mut sol, inst, q, &cfg.destroy_params(), rng);
        debug_assert_eq!(sol.audit(inst), Ok(()));
        on_state(&sol);
    }
    repair_op.apply(&mut sol, inst, rng, on_state);
    debug_assert_eq!(sol.audit(inst), Ok(()));
    StepOutcome { solution: sol, destroy, repair }
}

/// Archive state recorded at the end of each weight segment and at the end of the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentLog {
    pub iteration: u64,
    pub archive_size: usize,
    pub best_duration: f64,
    /// Sorted coverage of the leximin-best archive entry, as `[covered, total]`.
    pub leximin_best: Vec<[u32; 2]>,
    pub weights: BTreeMap<String, f64>,
}

impl SegmentLog {
    pub fn leximin_best_ratios(&self) -> Vec<CoverageRatio> {
        self.leximin_best.iter().map(|&[c, t]| CoverageRatio::new(c, t)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub archive: ParetoArchive<Solution>,
    pub iterations: u64,
    pub elapsed: Duration,
    pub segments: Vec<SegmentLog>,
    /// Invariant violations found by per-iteration audits (empty unless auditing).
    pub violations: Vec<String>,
}

fn segment_log(iteration: u64, archive: &ParetoArchive<Solution>, bank: &OperatorBank) -> SegmentLog {
    SegmentLog {
        iteration,
        archive_size: archive.len(),
        best_duration: archive.best_duration().unwrap_or(0.0),
        leximin_best: archive
            .leximin_best()
            .map(|e| e.objectives.sorted().iter().map(CoverageRatio::pair).collect())
            .unwrap_or_default(),
        weights: bank.weights().into_iter().collect(),
    }
}

/// Checks that the per-iteration trace keeps best duration non-increasing and
/// the leximin-best vector non-decreasing.
pub fn check_monotone(logs: &[SegmentLog]) -> Result<(), String> {
    for pair in logs.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.best_duration > a.best_duration + crate::coverage::DURATION_EPS {
            return Err(format!(
                "best duration rose from {} to {} between iterations {} and {}",
                a.best_duration, b.best_duration, a.iteration, b.iteration
            ));
        }
        if compare_sorted(&b.leximin_best_ratios(), &a.leximin_best_ratios()).is_lt() {
            return Err(format!("leximin-best vector fell between iterations {} and {}", a.iteration, b.iteration));
        }
    }
    Ok(())
}

const MAX_RECORDED_VIOLATIONS: usize = 100;

pub fn mdls_run(inst: &Instance, cfg: &SearchConfig) -> RunOutcome {
    if let Err(e) = cfg.validate() {
        panic!("invalid search configuration: {e}");
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut bank = OperatorBank::new(cfg.configuration, cfg.reaction);
    let mut archive = ParetoArchive::new();
    let init = initial_solution(inst);
    archive.try_insert(init.objectives(inst), init);

    let mut segments = Vec::new();
    let mut violations = Vec::new();
    let mut iterations = 0u64;
    let mut previous = segment_log(0, &archive, &bank);

    let out_of_budget = |iterations: u64| {
        cfg.max_iterations.is_some_and(|n| iterations >= n) || cfg.time_limit.is_some_and(|t| start.elapsed() >= t)
    };

    while !out_of_budget(iterations) {
        let x = archive.select_uniform(&mut rng).item.clone();
        for objective in [Objective::Duration, Objective::Leximin] {
            let mut updated = false;
            let step = {
                let archive = &mut archive;
                let updated = &mut updated;
                let mut offer = |s: &Solution| {
                    if cfg.archive_intermediate {
                        *updated |= archive.try_insert(s.objectives(inst), s.clone()) == InsertOutcome::Inserted;
                    }
                };
                alns_step(objective, &x, inst, &mut bank, cfg, &mut rng, &mut offer)
            };
            if !cfg.archive_intermediate {
                updated = archive.try_insert(step.solution.objectives(inst), step.solution) == InsertOutcome::Inserted;
            }
            if updated {
                bank.reward(objective, step.destroy, step.repair);
            }
        }
        iterations += 1;

        if cfg.audit && violations.len() < MAX_RECORDED_VIOLATIONS {
            if let Err(e) = archive.audit() {
                violations.push(format!("iteration {iterations}: archive: {e}"));
            }
            for entry in archive.iter() {
                if let Err(e) = entry.item.audit(inst) {
                    violations.push(format!("iteration {iterations}: solution: {e}"));
                }
            }
            let current = segment_log(iterations, &archive, &bank);
            if let Err(e) = check_monotone(&[previous, current.clone()]) {
                violations.push(e);
            }
            previous = current;
        }

        if iterations.is_multiple_of(cfg.segment_length) {
            bank.end_segment();
            segments.push(segment_log(iterations, &archive, &bank));
        }
    }
    if segments.last().is_none_or(|s| s.iteration != iterations) {
        segments.push(segment_log(iterations, &archive, &bank));
    }

    RunOutcome { archive, iterations, elapsed: start.elapsed(), segments, violations }
}
