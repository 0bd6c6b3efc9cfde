//! Team routes with cached durations and coverage counts.

use std::collections::BTreeSet;

use crate::coverage::{CoverageVector, Objectives};
use crate::instance::Instance;

/// Slack allowed when checking a route against `t_max`.
pub const FEASIBILITY_EPS: f64 = 1e-9;

/// A candidate insertion of a site into a route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Insertion {
    pub site: usize,
    pub route: usize,
    pub position: usize,
    pub delta: f64,
}

/// K ordered routes (each implicitly starting and ending at the depot) plus
/// the set of unvisited sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    routes: Vec<Vec<usize>>,
    route_of: Vec<Option<usize>>,
    unassigned: BTreeSet<usize>,
    route_durations: Vec<f64>,
    coverage_counts: Vec<u32>,
}

impl Solution {
    /// All teams stay at the depot.
    pub fn empty(inst: &Instance) -> Self {
        Self {
            routes: vec![Vec::new(); inst.num_teams()],
            route_of: vec![None; inst.num_nodes()],
            unassigned: inst.site_ids().collect(),
            route_durations: vec![0.0; inst.num_teams()],
            coverage_counts: vec![0; inst.num_characteristics()],
        }
    }

    /// Builds a solution from explicit routes, checking ids, uniqueness and `t_max`.
    pub fn from_routes(inst: &Instance, routes: Vec<Vec<usize>>) -> Result<Self, String> {
        if routes.len() != inst.num_teams() {
            return Err(format!("expected {} routes, got {}", inst.num_teams(), routes.len()));
        }
        let mut sol = Self::empty(inst);
        for (r, route) in routes.iter().enumerate() {
            for &site in route {
                if site == 0 || site > inst.num_sites() {
                    return Err(format!("unknown site id {site}"));
                }
                if sol.route_of[site].is_some() {
                    return Err(format!("site {site} visited twice"));
                }
                sol.route_of[site] = Some(r);
                sol.unassigned.remove(&site);
                for &c in inst.characteristics_of(site) {
                    sol.coverage_counts[c] += 1;
                }
            }
        }
        sol.routes = routes;
        for r in 0..sol.routes.len() {
            sol.route_durations[r] = inst.route_duration(&sol.routes[r]);
            if sol.route_durations[r] > inst.t_max() + FEASIBILITY_EPS {
                return Err(format!("route {r} lasts {} which exceeds Tmax {}", sol.route_durations[r], inst.t_max()));
            }
        }
        Ok(sol)
    }

    pub fn routes(&self) -> &[Vec<usize>] {
        &self.routes
    }

    pub fn unassigned(&self) -> &BTreeSet<usize> {
        &self.unassigned
    }

    pub fn route_durations(&self) -> &[f64] {
        &self.route_durations
    }

    pub fn coverage_counts(&self) -> &[u32] {
        &self.coverage_counts
    }

    pub fn is_visited(&self, site: usize) -> bool {
        self.route_of[site].is_some()
    }

    pub fn route_of(&self, site: usize) -> Option<usize> {
        self.route_of[site]
    }

    pub fn visited_count(&self) -> usize {
        self.routes.iter().map(Vec::len).sum()
    }

    /// Visited sites in route order.
    pub fn visited(&self) -> Vec<usize> {
        self.routes.iter().flatten().copied().collect()
    }

    pub fn total_duration(&self) -> f64 {
        self.route_durations.iter().sum()
    }

    pub fn coverage_vector(&self, inst: &Instance) -> CoverageVector {
        CoverageVector::from_counts(&self.coverage_counts, inst.characteristic_totals())
    }

    pub fn objectives(&self, inst: &Instance) -> Objectives {
        Objectives { duration: self.total_duration(), coverage: self.coverage_vector(inst) }
    }

    fn neighbours(&self, route: usize, position: usize) -> (usize, usize) {
        let r = &self.routes[route];
        let prev = if position == 0 { 0 } else { r[position - 1] };
        let next = if position == r.len() { 0 } else { r[position] };
        (prev, next)
    }

    /// Duration increase from inserting `site` before index `position` of `route`.
    pub fn insertion_delta(&self, inst: &Instance, site: usize, route: usize, position: usize) -> f64 {
        debug_assert!(position <= self.routes[route].len());
        let (prev, next) = self.neighbours(route, position);
        inst.travel_time(prev, site) + inst.travel_time(site, next) - inst.travel_time(prev, next)
            + inst.service_time(site)
    }

    pub fn fits(&self, inst: &Instance, route: usize, delta: f64) -> bool {
        self.route_durations[route] + delta <= inst.t_max() + FEASIBILITY_EPS
    }

    /// Cheapest feasible position of `site` within one route.
    pub fn best_insertion_in_route(&self, inst: &Instance, site: usize, route: usize) -> Option<Insertion> {
        let mut best: Option<Insertion> = None;
        for position in 0..=self.routes[route].len() {
            let delta = self.insertion_delta(inst, site, route, position);
            if self.fits(inst, route, delta) && best.is_none_or(|b| delta < b.delta) {
                best = Some(Insertion { site, route, position, delta });
            }
        }
        best
    }

    /// Cheapest feasible insertion of `site` over all routes; earliest route/position wins ties.
    pub fn cheapest_insertion(&self, inst: &Instance, site: usize) -> Option<Insertion> {
        let mut best: Option<Insertion> = None;
        for route in 0..self.routes.len() {
            if let Some(ins) = self.best_insertion_in_route(inst, site, route) {
                if best.is_none_or(|b| ins.delta < b.delta) {
                    best = Some(ins);
                }
            }
        }
        best
    }

    pub fn insert(&mut self, inst: &Instance, site: usize, route: usize, position: usize) {
        assert!(self.unassigned.remove(&site), "site {site} is already routed");
        self.routes[route].insert(position, site);
        self.route_of[site] = Some(route);
        for &c in inst.characteristics_of(site) {
            self.coverage_counts[c] += 1;
        }
        self.route_durations[route] = inst.route_duration(&self.routes[route]);
    }

    pub fn apply(&mut self, inst: &Instance, ins: &Insertion) {
        self.insert(inst, ins.site, ins.route, ins.position);
    }

    /// Duration saved by removing a visited site from its route.
    pub fn removal_gain(&self, inst: &Instance, site: usize) -> f64 {
        let route = self.route_of[site].expect("site not visited");
        let position = self.routes[route].iter().position(|&s| s == site).unwrap();
        let r = &self.routes[route];
        let prev = if position == 0 { 0 } else { r[position - 1] };
        let next = if position + 1 == r.len() { 0 } else { r[position + 1] };
        inst.travel_time(prev, site) + inst.travel_time(site, next) - inst.travel_time(prev, next)
            + inst.service_time(site)
    }

    pub fn remove(&mut self, inst: &Instance, site: usize) {
        let route = self.route_of[site].take().expect("site not visited");
        let position = self.routes[route].iter().position(|&s| s == site).unwrap();
        self.routes[route].remove(position);
        self.unassigned.insert(site);
        for &c in inst.characteristics_of(site) {
            self.coverage_counts[c] -= 1;
        }
        self.route_durations[route] = inst.route_duration(&self.routes[route]);
    }

    /// Checks every structural invariant against a from-scratch recomputation.
    pub fn audit(&self, inst: &Instance) -> Result<(), String> {
        if self.routes.len() != inst.num_teams() {
            return Err(format!("{} routes for {} teams", self.routes.len(), inst.num_teams()));
        }
        let mut seen = vec![false; inst.num_nodes()];
        for (r, route) in self.routes.iter().enumerate() {
            for &s in route {
                if s == 0 || s > inst.num_sites() {
                    return Err(format!("unknown site {s}"));
                }
                if std::mem::replace(&mut seen[s], true) {
                    return Err(format!("site {s} appears twice"));
                }
                if self.route_of[s] != Some(r) {
                    return Err(format!("site {s} index points to {:?}, found in route {r}", self.route_of[s]));
                }
            }
            let fresh = inst.route_duration(route);
            if (fresh - self.route_durations[r]).abs() > 1e-9 {
                return Err(format!("route {r} cached duration {} != {}", self.route_durations[r], fresh));
            }
            if fresh > inst.t_max() + FEASIBILITY_EPS {
                return Err(format!("route {r} lasts {fresh} > Tmax {}", inst.t_max()));
            }
        }
        for s in inst.site_ids() {
            let listed = self.unassigned.contains(&s);
            if listed == seen[s] {
                return Err(format!("site {s} breaks the routed/unassigned partition"));
            }
            if !seen[s] && self.route_of[s].is_some() {
                return Err(format!("unrouted site {s} has a route index"));
            }
        }
        let mut counts = vec![0u32; inst.num_characteristics()];
        for s in self.routes.iter().flatten() {
            for &c in inst.characteristics_of(*s) {
                counts[c] += 1;
            }
        }
        if counts != self.coverage_counts {
            return Err(format!("coverage counts {:?} != recomputed {:?}", self.coverage_counts, counts));
        }
        Ok(())
    }
}
