use std::cmp::Ordering;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::randomized_index;
use crate::coverage::CoverageRatio;
use crate::instance::Instance;
use crate::solution::Solution;

/// Removes `q` visited sites chosen uniformly at random.
pub fn destroy_random<R: Rng + ?Sized>(sol: &mut Solution, inst: &Instance, q: usize, rng: &mut R) {
    let mut visited = sol.visited();
    visited.sort_unstable();
    let q = q.min(visited.len());
    for site in visited.partial_shuffle(rng, q).0.to_vec() {
        sol.remove(inst, site);
    }
}

/// Visited sites by descending duration contribution; ties by site id.
pub fn worst_duration_ranking(sol: &Solution, inst: &Instance) -> Vec<usize> {
    let mut ranked: Vec<(usize, f64)> = sol.visited().into_iter().map(|s| (s, sol.removal_gain(inst, s))).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.into_iter().map(|(s, _)| s).collect()
}

/// Removes `q` sites one at a time, each drawn from the contribution ranking
/// with bias `y^p_worst`; contributions are recomputed after each removal.
pub fn destroy_worst_duration<R: Rng + ?Sized>(
    sol: &mut Solution,
    inst: &Instance,
    q: usize,
    p_worst: f64,
    rng: &mut R,
) {
    for _ in 0..q {
        let ranked = worst_duration_ranking(sol, inst);
        if ranked.is_empty() {
            break;
        }
        let y: f64 = rng.random();
        sol.remove(inst, ranked[randomized_index(y, p_worst, ranked.len())]);
    }
}

/// Shaw-style removal with relatedness equal to travel time: a random seed
/// site, then repeatedly a site close to a random already-removed one.
pub fn destroy_related<R: Rng + ?Sized>(sol: &mut Solution, inst: &Instance, q: usize, p_related: f64, rng: &mut R) {
    let mut visited = sol.visited();
    if q == 0 || visited.is_empty() {
        return;
    }
    visited.sort_unstable();
    let seed = *visited.choose(rng).unwrap();
    sol.remove(inst, seed);
    let mut removed = vec![seed];
    while removed.len() < q {
        let mut remaining = sol.visited();
        if remaining.is_empty() {
            break;
        }
        let anchor = *removed.choose(rng).unwrap();
        remaining.sort_by(|&a, &b| inst.travel_time(anchor, a).total_cmp(&inst.travel_time(anchor, b)).then(a.cmp(&b)));
        let y: f64 = rng.random();
        let site = remaining[randomized_index(y, p_related, remaining.len())];
        sol.remove(inst, site);
        removed.push(site);
    }
}

/// Minimum coverage ratio after removing `site` from the solution.
fn min_ratio_without(sol: &Solution, inst: &Instance, site: usize) -> CoverageRatio {
    let counts = sol.coverage_counts();
    let totals = inst.characteristic_totals();
    let carried = inst.characteristics_of(site);
    (0..counts.len())
        .map(|c| {
            let drop = u32::from(carried.contains(&c));
            CoverageRatio::new(counts[c] - drop, totals[c])
        })
        .min()
        .expect("instances have at least one characteristic")
}

/// Visited sites ordered so that those whose removal lowers the minimum
/// coverage ratio least come first; ties by smaller duration contribution, then id.
pub fn worst_min_ranking(sol: &Solution, inst: &Instance) -> Vec<usize> {
    let mut ranked: Vec<(usize, CoverageRatio, f64)> =
        sol.visited().into_iter().map(|s| (s, min_ratio_without(sol, inst, s), sol.removal_gain(inst, s))).collect();
    ranked.sort_by(|a, b| {
        b.1.cmp(&a.1).then_with(|| a.2.partial_cmp(&b.2).unwrap_or(Ordering::Equal)).then(a.0.cmp(&b.0))
    });
    ranked.into_iter().map(|(s, _, _)| s).collect()
}

pub fn destroy_worst_min<R: Rng + ?Sized>(sol: &mut Solution, inst: &Instance, q: usize, p_worst: f64, rng: &mut R) {
    for _ in 0..q {
        let ranked = worst_min_ranking(sol, inst);
        if ranked.is_empty() {
            break;
        }
        let y: f64 = rng.random();
        sol.remove(inst, ranked[randomized_index(y, p_worst, ranked.len())]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, GeneratorParams, Layout, Point, Site};
    use crate::operators::testing::ZeroRng;
    use crate::operators::{repair_cheapest, DestroyOp, DestroyParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn site(id: usize, x: f64, y: f64, bits: &[u8]) -> Site {
        Site {
            id,
            position: Point::new(x, y),
            characteristics: bits.iter().map(|&b| b == 1).collect(),
            service_time: None,
        }
    }

    fn full_solution(inst: &Instance) -> Solution {
        let mut sol = Solution::empty(inst);
        repair_cheapest(&mut sol, inst);
        sol
    }

    fn line_instance() -> Instance {
        // Three characteristics; characteristic 2 is carried by site 3 only.
        let sites = vec![
            site(1, 1.0, 0.0, &[1, 0, 0]),
            site(2, 2.0, 0.0, &[1, 1, 0]),
            site(3, 3.0, 0.0, &[0, 0, 1]),
            site(4, 4.0, 0.0, &[1, 1, 0]),
            site(5, 0.0, 5.0, &[0, 1, 0]),
        ];
        Instance::new("line", Point::new(0.0, 0.0), sites, 2, 100.0, 1.0).unwrap()
    }

    #[test]
    fn random_removal_counts() {
        let inst = line_instance();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let full = full_solution(&inst);
        assert_eq!(full.visited_count(), 5);

        let mut sol = full.clone();
        destroy_random(&mut sol, &inst, 0, &mut rng);
        assert_eq!(sol, full);

        destroy_random(&mut sol, &inst, 2, &mut rng);
        assert_eq!(sol.visited_count(), 3);
        sol.audit(&inst).unwrap();

        destroy_random(&mut sol, &inst, 99, &mut rng);
        assert_eq!(sol.visited_count(), 0);
        assert!(sol.routes().iter().all(Vec::is_empty));
        assert_eq!(sol.total_duration(), 0.0);
    }

    #[test]
    fn removal_duration_matches_recompute() {
        let inst = generate_instance(&GeneratorParams::new(12, 4, 2, 8.0, Layout::Random, 9)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let mut sol = full_solution(&inst);
            let before = sol.visited();
            destroy_random(&mut sol, &inst, 1, &mut rng);
            let expected: f64 = sol.routes().iter().map(|r| inst.route_duration(r)).sum();
            assert!((sol.total_duration() - expected).abs() < 1e-9);
            assert_eq!(sol.visited_count() + 1, before.len());
        }
    }

    #[test]
    fn worst_duration_zero_draw_removes_worst() {
        let inst = line_instance();
        let sol = full_solution(&inst);
        let ranked = worst_duration_ranking(&sol, &inst);
        let mut brute: Vec<(usize, f64)> = sol
            .visited()
            .into_iter()
            .map(|s| {
                let mut without = sol.clone();
                without.remove(&inst, s);
                (s, sol.total_duration() - without.total_duration())
            })
            .collect();
        brute.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        assert_eq!(ranked, brute.iter().map(|p| p.0).collect::<Vec<_>>());

        let mut destroyed = sol.clone();
        destroy_worst_duration(&mut destroyed, &inst, 1, 3.0, &mut ZeroRng);
        assert!(!destroyed.is_visited(ranked[0]));
        assert_eq!(destroyed.visited_count(), 4);
    }

    #[test]
    fn related_zero_draw_removes_nearest_neighbour() {
        let inst = line_instance();
        let sol = full_solution(&inst);
        let mut destroyed = sol.clone();
        destroy_related(&mut destroyed, &inst, 1, 5.0, &mut ZeroRng);
        assert_eq!(destroyed.visited_count(), 4);
        // ZeroRng picks the smallest visited id as seed, then its nearest visited site.
        assert!(!destroyed.is_visited(1));
        let mut destroyed = sol.clone();
        destroy_related(&mut destroyed, &inst, 2, 5.0, &mut ZeroRng);
        assert!(!destroyed.is_visited(1) && !destroyed.is_visited(2));
        assert_eq!(destroyed.visited_count(), 3);
    }

    #[test]
    fn related_removal_stays_in_cluster() {
        // Two tight clusters far apart.
        let mut sites = Vec::new();
        for i in 0..5 {
            sites.push(site(i + 1, 10.0 + i as f64 * 0.5, 10.0, &[1]));
        }
        for i in 0..5 {
            sites.push(site(i + 6, 90.0 + i as f64 * 0.5, 90.0, &[1]));
        }
        let inst = Instance::new("clusters", Point::new(50.0, 50.0), sites, 2, 1e6, 1.0).unwrap();
        let sol = full_solution(&inst);
        assert_eq!(sol.visited_count(), 10);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let mut destroyed = sol.clone();
            // a huge exponent sends every y^p to 0: each pick is the anchor's nearest site
            destroy_related(&mut destroyed, &inst, 4, 1e6, &mut rng);
            let removed: Vec<usize> = inst.site_ids().filter(|&s| !destroyed.is_visited(s)).collect();
            assert_eq!(removed.len(), 4);
            let left = removed.iter().all(|&s| s <= 5);
            let right = removed.iter().all(|&s| s >= 6);
            assert!(left || right, "removed {removed:?}");
        }
    }

    #[test]
    fn worst_min_prefers_slack_sites() {
        let inst = line_instance();
        let sol = full_solution(&inst);
        let ranked = worst_min_ranking(&sol, &inst);
        // Site 3 alone carries characteristic 2; removing it drops the minimum to 0.
        assert_eq!(*ranked.last().unwrap(), 3);

        let brute: Vec<(usize, CoverageRatio)> = sol
            .visited()
            .into_iter()
            .map(|s| {
                let mut without = sol.clone();
                without.remove(&inst, s);
                (s, without.coverage_vector(&inst).min_ratio().unwrap())
            })
            .collect();
        for w in ranked.windows(2) {
            let a = brute.iter().find(|p| p.0 == w[0]).unwrap().1;
            let b = brute.iter().find(|p| p.0 == w[1]).unwrap().1;
            assert!(a >= b);
        }
    }

    #[test]
    fn worst_min_full_removal_empties() {
        let inst = line_instance();
        let mut sol = full_solution(&inst);
        destroy_worst_min(&mut sol, &inst, 5, 3.0, &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(sol.visited_count(), 0);
        sol.audit(&inst).unwrap();
    }

    #[test]
    fn every_destroy_removes_exactly_q() {
        let inst = generate_instance(&GeneratorParams::new(15, 5, 3, 6.0, Layout::RandomClustered, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let full = full_solution(&inst);
        let v = full.visited_count();
        assert!(v >= 4);
        for op in DestroyOp::ALL {
            for q in [0, 1, 3, v, v + 2] {
                let mut sol = full.clone();
                op.apply(&mut sol, &inst, q, &DestroyParams::default(), &mut rng);
                assert_eq!(sol.visited_count(), v - q.min(v), "{op} q={q}");
                sol.audit(&inst).unwrap();
            }
        }
    }
}
