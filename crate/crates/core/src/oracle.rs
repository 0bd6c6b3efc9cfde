//! Exhaustive Pareto-front enumeration for tiny instances.
//!
//! Every set of at most K routes over every subset of sites is visited once:
//! a route is kept only in the direction whose first site id is smaller than
//! its last, and routes are listed by increasing first site, so reversed or
//! permuted copies of the same plan never appear. Only the shortest plan per
//! visited subset can be Pareto optimal, so the search keeps one per subset
//! and filters those pairwise at the end.

use thiserror::Error;

use crate::archive::ParetoArchive;
use crate::coverage::{dominates, Objectives, DURATION_EPS};
use crate::instance::Instance;
use crate::solution::{Solution, FEASIBILITY_EPS};

/// Duration tolerance when matching front points.
pub const FRONT_MATCH_EPS: f64 = 1e-6;

const HARD_SITE_CAP: usize = 20;

#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_sites: usize,
    pub max_teams: usize,
    pub node_budget: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_sites: 10, max_teams: 2, node_budget: 200_000_000 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance exceeds oracle limit on {dimension}: {value} > {limit}")]
    LimitExceeded { dimension: &'static str, value: u64, limit: u64 },
}

#[derive(Debug, Clone)]
pub struct ExactFront {
    pub archive: ParetoArchive<Solution>,
    /// Number of distinct feasible route plans visited.
    pub plans: u64,
    /// Search-tree nodes expanded.
    pub nodes: u64,
}

struct Search<'a> {
    inst: &'a Instance,
    n: usize,
    t_max: f64,
    budget: u64,
    nodes: u64,
    plans: u64,
    closed: Vec<Vec<usize>>,
    closed_duration: f64,
    best: Vec<Option<(f64, Vec<Vec<usize>>)>>,
}

impl Search<'_> {
    fn record(&mut self, mask: usize) {
        self.plans += 1;
        let better = match &self.best[mask] {
            None => true,
            Some((d, _)) => self.closed_duration < *d,
        };
        if better {
            self.best[mask] = Some((self.closed_duration, self.closed.clone()));
        }
    }

    fn tick(&mut self) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(OracleError::LimitExceeded { dimension: "node_budget", value: self.nodes, limit: self.budget });
        }
        Ok(())
    }

    /// Open a new route whose first site exceeds `min_first`, or stop here.
    fn open_route(&mut self, used: usize, min_first: usize) -> Result<(), OracleError> {
        self.tick()?;
        self.record(used);
        if self.closed.len() == self.inst.num_teams() {
            return Ok(());
        }
        for first in (min_first + 1)..=self.n {
            if used & (1 << first) != 0 {
                continue;
            }
            let path = self.inst.travel_time(0, first) + self.inst.service_time(first);
            if path > self.t_max + FEASIBILITY_EPS {
                continue;
            }
            let mut route = vec![first];
            self.extend(used | (1 << first), &mut route, path)?;
        }
        Ok(())
    }

    /// Either close the route (when its orientation is canonical) or append a site.
    fn extend(&mut self, used: usize, route: &mut Vec<usize>, path: f64) -> Result<(), OracleError> {
        self.tick()?;
        let first = route[0];
        let last = *route.last().unwrap();
        if route.len() == 1 || last > first {
            let duration = self.inst.route_duration(route);
            if duration <= self.t_max + FEASIBILITY_EPS {
                self.closed.push(route.clone());
                self.closed_duration += duration;
                self.open_route(used, first)?;
                self.closed_duration -= duration;
                self.closed.pop();
            }
        }
        for next in 1..=self.n {
            if used & (1 << next) != 0 || next == first {
                continue;
            }
            let extended = path + self.inst.travel_time(last, next) + self.inst.service_time(next);
            if extended > self.t_max + FEASIBILITY_EPS {
                continue;
            }
            route.push(next);
            self.extend(used | (1 << next), route, extended)?;
            route.pop();
        }
        Ok(())
    }
}

pub fn check_limits(inst: &Instance, limits: &OracleLimits) -> Result<(), OracleError> {
    let max_sites = limits.max_sites.min(HARD_SITE_CAP);
    if inst.num_sites() > max_sites {
        return Err(OracleError::LimitExceeded {
            dimension: "sites",
            value: inst.num_sites() as u64,
            limit: max_sites as u64,
        });
    }
    if inst.num_teams() > limits.max_teams {
        return Err(OracleError::LimitExceeded {
            dimension: "teams",
            value: inst.num_teams() as u64,
            limit: limits.max_teams as u64,
        });
    }
    Ok(())
}

/// Keeps the points no other point dominates; among key-equal points the first wins.
pub fn pairwise_filter<T: Clone>(points: &[(Objectives, T)]) -> Vec<(Objectives, T)> {
    let mut kept: Vec<(Objectives, T)> = Vec::new();
    for (i, (p, item)) in points.iter().enumerate() {
        let dominated = points.iter().any(|(o, _)| dominates(o, p));
        let earlier_twin = points[..i].iter().any(|(o, _)| o.key_equal(p, DURATION_EPS));
        if !dominated && !earlier_twin {
            kept.push((p.clone(), item.clone()));
        }
    }
    kept
}

pub fn enumerate_pareto(inst: &Instance, limits: &OracleLimits) -> Result<ExactFront, OracleError> {
    check_limits(inst, limits)?;
    let n = inst.num_sites();
    let mut search = Search {
        inst,
        n,
        t_max: inst.t_max(),
        budget: limits.node_budget,
        nodes: 0,
        plans: 0,
        closed: Vec::new(),
        closed_duration: 0.0,
        best: vec![None; 1 << (n + 1)],
    };
    search.open_route(0, 0)?;

    let mut points = Vec::new();
    for (_, routes) in search.best.iter().flatten() {
        let mut routes = routes.clone();
        routes.resize(inst.num_teams(), Vec::new());
        let sol = Solution::from_routes(inst, routes).expect("enumerated plans are feasible");
        points.push((sol.objectives(inst), sol));
    }
    let mut archive = ParetoArchive::new();
    for (objectives, sol) in pairwise_filter(&points) {
        archive.try_insert(objectives, sol);
    }
    Ok(ExactFront { archive, plans: search.plans, nodes: search.nodes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrontReport {
    /// Exact points with no key-equal candidate.
    pub missing: usize,
    /// Candidate points dominated by some exact point.
    pub extra_dominated: usize,
    /// Exact points matched by a candidate.
    pub matched: usize,
}

impl FrontReport {
    pub fn is_exact(&self) -> bool {
        self.missing == 0 && self.extra_dominated == 0
    }
}

pub fn verify_front<A, B>(candidate: &ParetoArchive<A>, exact: &ParetoArchive<B>) -> FrontReport {
    verify_points(
        &candidate.iter().map(|e| e.objectives.clone()).collect::<Vec<_>>(),
        &exact.iter().map(|e| e.objectives.clone()).collect::<Vec<_>>(),
    )
}

pub fn verify_points(candidate: &[Objectives], exact: &[Objectives]) -> FrontReport {
    let matched = exact.iter().filter(|e| candidate.iter().any(|c| c.key_equal(e, FRONT_MATCH_EPS))).count();
    let extra_dominated = candidate.iter().filter(|c| exact.iter().any(|e| dominates(e, c))).count();
    FrontReport { missing: exact.len() - matched, extra_dominated, matched }
}
