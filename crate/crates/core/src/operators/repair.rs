//! Greedy repair operators.
//!
//! Each operator is a selection rule that picks the next insertion; the shared
//! driver applies insertions until the rule finds no feasible one.

use std::cmp::Ordering;

use rand::Rng;

use crate::coverage::CoverageRatio;
use crate::instance::Instance;
use crate::solution::{Insertion, Solution};

/// Applies `select` until it returns `None`, reporting each intermediate state.
pub fn repair_with(
    sol: &mut Solution,
    inst: &Instance,
    on_insert: &mut dyn FnMut(&Solution),
    mut select: impl FnMut(&Solution) -> Option<Insertion>,
) {
    while let Some(ins) = select(sol) {
        sol.apply(inst, &ins);
        on_insert(sol);
    }
}

fn candidates<'a>(sol: &'a Solution, inst: &'a Instance) -> impl Iterator<Item = Insertion> + 'a {
    sol.unassigned().iter().filter_map(move |&s| sol.cheapest_insertion(inst, s))
}

/// The globally cheapest feasible insertion; ties go to the smaller site id.
pub fn select_cheapest(sol: &Solution, inst: &Instance) -> Option<Insertion> {
    let mut best: Option<Insertion> = None;
    for ins in candidates(sol, inst) {
        if best.is_none_or(|b| ins.delta < b.delta) {
            best = Some(ins);
        }
    }
    best
}

pub fn repair_cheapest(sol: &mut Solution, inst: &Instance) {
    repair_with(sol, inst, &mut |_| {}, |s| select_cheapest(s, inst));
}

/// Regret of a site: finite sum of gaps to the k−1 next-best routes, or
/// infinite when fewer than k routes can take it.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Regret {
    Finite(f64),
    Infinite,
}

impl Regret {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Regret::Infinite, Regret::Infinite) => Ordering::Equal,
            (Regret::Infinite, _) => Ordering::Greater,
            (_, Regret::Infinite) => Ordering::Less,
            (Regret::Finite(a), Regret::Finite(b)) => a.total_cmp(b),
        }
    }
}

/// k-regret selection over per-route best insertion costs.
pub fn select_k_regret(sol: &Solution, inst: &Instance, k: usize) -> Option<Insertion> {
    assert!(k >= 2, "regret needs k >= 2");
    let mut best: Option<(Regret, Insertion)> = None;
    for &site in sol.unassigned() {
        let mut per_route: Vec<Insertion> =
            (0..sol.routes().len()).filter_map(|r| sol.best_insertion_in_route(inst, site, r)).collect();
        if per_route.is_empty() {
            continue;
        }
        per_route.sort_by(|a, b| a.delta.total_cmp(&b.delta).then(a.route.cmp(&b.route)));
        let cheapest = per_route[0];
        let regret = if per_route.len() < k {
            Regret::Infinite
        } else {
            Regret::Finite(per_route[1..k].iter().map(|i| i.delta - cheapest.delta).sum())
        };
        let better = match &best {
            None => true,
            Some((r, b)) => match regret.cmp(r) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => cheapest.delta < b.delta,
            },
        };
        if better {
            best = Some((regret, cheapest));
        }
    }
    best.map(|(_, ins)| ins)
}

pub fn repair_k_regret(sol: &mut Solution, inst: &Instance, k: usize) {
    repair_with(sol, inst, &mut |_| {}, |s| select_k_regret(s, inst, k));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxMinTieBreak {
    /// Uniformly among the sites with the best max-min value.
    Random,
    /// Smallest duration increase among them.
    Duration,
}

/// Minimum coverage ratio after adding `site`.
fn min_ratio_with(sol: &Solution, inst: &Instance, site: usize) -> CoverageRatio {
    let counts = sol.coverage_counts();
    let totals = inst.characteristic_totals();
    let carried = inst.characteristics_of(site);
    (0..counts.len())
        .map(|c| CoverageRatio::new(counts[c] + u32::from(carried.contains(&c)), totals[c]))
        .min()
        .expect("instances have at least one characteristic")
}

/// Sorted coverage ratios after adding `site`.
fn sorted_ratios_with(sol: &Solution, inst: &Instance, site: usize) -> Vec<CoverageRatio> {
    let mut counts = sol.coverage_counts().to_vec();
    for &c in inst.characteristics_of(site) {
        counts[c] += 1;
    }
    let mut ratios: Vec<CoverageRatio> =
        counts.iter().zip(inst.characteristic_totals()).map(|(&c, &t)| CoverageRatio::new(c, t)).collect();
    ratios.sort();
    ratios
}

/// Highest max-min insertion: the site whose insertion yields the largest
/// minimum coverage ratio, placed at its cheapest feasible position.
pub fn select_maxmin<R: Rng + ?Sized>(
    sol: &Solution,
    inst: &Instance,
    tie_break: MaxMinTieBreak,
    rng: &mut R,
) -> Option<Insertion> {
    let mut best_value: Option<CoverageRatio> = None;
    let mut tied: Vec<Insertion> = Vec::new();
    for ins in candidates(sol, inst) {
        let value = min_ratio_with(sol, inst, ins.site);
        match best_value.map(|b| value.cmp(&b)) {
            None | Some(Ordering::Greater) => {
                best_value = Some(value);
                tied.clear();
                tied.push(ins);
            }
            Some(Ordering::Equal) => tied.push(ins),
            Some(Ordering::Less) => {}
        }
    }
    if tied.is_empty() {
        return None;
    }
    match tie_break {
        MaxMinTieBreak::Random => Some(tied[rng.random_range(0..tied.len())]),
        MaxMinTieBreak::Duration => tied.into_iter().reduce(|a, b| if b.delta < a.delta { b } else { a }),
    }
}

pub fn repair_maxmin<R: Rng + ?Sized>(sol: &mut Solution, inst: &Instance, tie_break: MaxMinTieBreak, rng: &mut R) {
    repair_with(sol, inst, &mut |_| {}, |s| select_maxmin(s, inst, tie_break, rng));
}

/// Highest leximin insertion: the site whose insertion yields the
/// leximin-greatest coverage vector; ties by smaller duration increase.
pub fn select_leximin(sol: &Solution, inst: &Instance) -> Option<Insertion> {
    let mut best: Option<(Vec<CoverageRatio>, Insertion)> = None;
    for ins in candidates(sol, inst) {
        let sorted = sorted_ratios_with(sol, inst, ins.site);
        let better = match &best {
            None => true,
            Some((bs, b)) => match sorted.cmp(bs) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => ins.delta < b.delta,
            },
        };
        if better {
            best = Some((sorted, ins));
        }
    }
    best.map(|(_, ins)| ins)
}

pub fn repair_leximin(sol: &mut Solution, inst: &Instance) {
    repair_with(sol, inst, &mut |_| {}, |s| select_leximin(s, inst));
}
