use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_pcg::Pcg64Mcg;

use super::permutations::{factorial, HeapPermutations, LexPermutations};
use super::{Method, SearchFraction, SequencerError};
use crate::geometry::Point2;
use crate::scalar::Real;

/// Largest number of free intermediates the exhaustive searches will enumerate.
pub const DEFAULT_ENUMERATION_CAP: usize = 10;

/// Outcome of one next-waypoint decision.
#[derive(Debug, Clone, PartialEq)]
pub struct SequencerResult<T> {
    pub chosen: Point2<T>,
    /// Index of `chosen` in the pending list it was drawn from.
    pub chosen_index: usize,
    /// Cost of the best ordering found; for greedy, the distance to `chosen`.
    pub tour_cost: T,
    pub permutations_evaluated: u64,
    pub elapsed_s: f64,
}

pub fn euclidean_dist<T: Real>(a: Point2<T>, b: Point2<T>) -> T {
    a.distance(&b)
}

/// Sum of consecutive leg lengths; zero for fewer than two points.
pub fn dist_metric<T: Real>(tour: &[Point2<T>]) -> T {
    tour.windows(2)
        .fold(T::zero(), |acc, w| acc + euclidean_dist(w[0], w[1]))
}

/// Cost of `current → pending[order[0]] → … → goal`, summed in the same left-to-right
/// order as [`dist_metric`] so both give bit-identical values.
fn ordering_cost<T: Real>(
    current: Point2<T>,
    pending: &[Point2<T>],
    order: &[usize],
    goal: Point2<T>,
) -> T {
    let mut total = T::zero();
    let mut at = current;
    for &i in order {
        total = total + euclidean_dist(at, pending[i]);
        at = pending[i];
    }
    total + euclidean_dist(at, goal)
}

/// Nearest pending waypoint; the earliest one wins ties.
pub fn greedy_next<T: Real>(
    current: Point2<T>,
    pending: &[Point2<T>],
) -> Result<SequencerResult<T>, SequencerError> {
    let started = Instant::now();
    let (chosen_index, tour_cost) = pending
        .iter()
        .map(|p| euclidean_dist(current, *p))
        .enumerate()
        .fold(None, |best: Option<(usize, T)>, (i, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((i, d)),
        })
        .ok_or(SequencerError::EmptyPending)?;
    Ok(SequencerResult {
        chosen: pending[chosen_index],
        chosen_index,
        tour_cost,
        permutations_evaluated: pending.len() as u64,
        elapsed_s: started.elapsed().as_secs_f64(),
    })
}

fn check_enumerable(m: usize, cap: usize) -> Result<(), SequencerError> {
    if m == 0 {
        return Err(SequencerError::EmptyPending);
    }
    if m > cap {
        return Err(SequencerError::EnumerationBudgetExceeded { m, cap });
    }
    Ok(())
}

fn bcp_with_cap<T: Real>(
    current: Point2<T>,
    pending: &[Point2<T>],
    goal: Point2<T>,
    cap: usize,
) -> Result<SequencerResult<T>, SequencerError> {
    check_enumerable(pending.len(), cap)?;
    let started = Instant::now();
    let mut stream = LexPermutations::new(pending.len());
    let mut best: Option<(usize, T)> = None;
    let mut evaluated = 0u64;
    while let Some(order) = stream.advance() {
        evaluated += 1;
        let cost = ordering_cost(current, pending, order, goal);
        if best.map_or(true, |(_, c)| cost < c) {
            best = Some((order[0], cost));
        }
    }
    let (chosen_index, tour_cost) = best.expect("at least one ordering");
    Ok(SequencerResult {
        chosen: pending[chosen_index],
        chosen_index,
        tour_cost,
        permutations_evaluated: evaluated,
        elapsed_s: started.elapsed().as_secs_f64(),
    })
}

/// Exhaustive best-cost ordering with `current` fixed first and `goal` fixed last.
///
/// Orderings are scanned lexicographically by pending index and the first strict
/// minimum is kept.
pub fn bcp_next<T: Real>(
    current: Point2<T>,
    pending: &[Point2<T>],
    goal: Point2<T>,
) -> Result<SequencerResult<T>, SequencerError> {
    bcp_with_cap(current, pending, goal, DEFAULT_ENUMERATION_CAP)
}

/// Visits a uniformly random subset of exactly `gamma.retained(m!)` orderings by
/// selection sampling over the ordering stream: each ordering is kept with probability
/// `still_needed / still_remaining`. The stream runs in Heap's order; a uniform subset
/// does not care about the order, and ties go to the first retained ordering visited.
///
/// One uniform draw is consumed per ordering whatever `gamma` is, so for a fixed seed the
/// retained set for a larger `gamma` contains the one for a smaller `gamma`.
fn scan_shuffled<T: Real>(
    current: Point2<T>,
    pending: &[Point2<T>],
    goal: Point2<T>,
    gamma: SearchFraction,
    seed: u64,
    mut visit: impl FnMut(&[usize], T),
) -> u64 {
    let m = pending.len();
    debug_assert!(m <= 12);
    let total = factorial(m);
    let keep = gamma.retained(total);
    let mut rng = Pcg64Mcg::seed_from_u64(seed);
    let mut stream = HeapPermutations::new(m);
    let mut needed = keep;
    let mut remaining = total;
    while let Some(order) = stream.advance() {
        // `u / 2^32 < needed / remaining`, exact in integers.
        let u = u64::from(rng.next_u32());
        if u * remaining < needed << 32 {
            visit(order, ordering_cost(current, pending, order, goal));
            needed -= 1;
            if needed == 0 {
                break;
            }
        }
        remaining -= 1;
    }
    keep
}

fn probabilistic_with_cap<T: Real>(
    current: Point2<T>,
    pending: &[Point2<T>],
    goal: Point2<T>,
    gamma: SearchFraction,
    seed: u64,
    cap: usize,
) -> Result<SequencerResult<T>, SequencerError> {
    // the sampler's integer coin test needs m! < 2^32
    check_enumerable(pending.len(), cap.min(12))?;
    let started = Instant::now();
    let mut best: Option<(usize, T)> = None;
    let evaluated = scan_shuffled(current, pending, goal, gamma, seed, |order, cost| {
        if best.map_or(true, |(_, c)| cost < c) {
            best = Some((order[0], cost));
        }
    });
    let (chosen_index, tour_cost) = best.expect("at least one retained ordering");
    Ok(SequencerResult {
        chosen: pending[chosen_index],
        chosen_index,
        tour_cost,
        permutations_evaluated: evaluated,
        elapsed_s: started.elapsed().as_secs_f64(),
    })
}

/// Best ordering within a seeded random `gamma` fraction of the BCP ordering space.
pub fn probabilistic_next<T: Real>(
    current: Point2<T>,
    pending: &[Point2<T>],
    goal: Point2<T>,
    gamma: SearchFraction,
    seed: u64,
) -> Result<SequencerResult<T>, SequencerError> {
    probabilistic_with_cap(current, pending, goal, gamma, seed, DEFAULT_ENUMERATION_CAP)
}

/// Number of orderings the probabilistic search would retain for `m` intermediates.
pub fn retained_count(m: usize, gamma: SearchFraction) -> u64 {
    gamma.retained(factorial(m))
}

/// How many of the orderings retained by [`probabilistic_next`] (same inputs and seed)
/// cost `best_cost` to within `tolerance`.
pub fn retained_optimal_count<T: Real>(
    current: Point2<T>,
    pending: &[Point2<T>],
    goal: Point2<T>,
    gamma: SearchFraction,
    seed: u64,
    best_cost: T,
    tolerance: T,
) -> Result<u64, SequencerError> {
    check_enumerable(pending.len(), DEFAULT_ENUMERATION_CAP)?;
    let mut hits = 0u64;
    scan_shuffled(current, pending, goal, gamma, seed, |_, cost| {
        if (cost - best_cost).abs() <= tolerance {
            hits += 1;
        }
    });
    Ok(hits)
}

/// A configured sequencing strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sequencer {
    pub method: Method,
    pub gamma: SearchFraction,
    pub enumeration_cap: usize,
}

impl Sequencer {
    pub fn new(method: Method, gamma: SearchFraction) -> Self {
        Self {
            method,
            gamma,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    /// Picks the next target among `pending` intermediates; `goal` closes every ordering
    /// but is never chosen itself.
    pub fn next<T: Real>(
        &self,
        current: Point2<T>,
        pending: &[Point2<T>],
        goal: Point2<T>,
        seed: u64,
    ) -> Result<SequencerResult<T>, SequencerError> {
        match self.method {
            Method::Greedy => greedy_next(current, pending),
            Method::Bcp => bcp_with_cap(current, pending, goal, self.enumeration_cap),
            Method::Probabilistic => probabilistic_with_cap(
                current,
                pending,
                goal,
                self.gamma,
                seed,
                self.enumeration_cap,
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean_dist(p(0.0, 0.0), p(3.0, 4.0)), 5.0);
        assert_eq!(euclidean_dist(p(2.5, 2.5), p(2.5, 2.5)), 0.0);
        assert!((euclidean_dist(p(1.0, 1.0), p(2.0, 2.0)) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dist_metric_examples() {
        assert_eq!(dist_metric(&[p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)]), 2.0);
        assert_eq!(dist_metric(&[p(0.0, 0.0)]), 0.0);
        assert_eq!(dist_metric::<f64>(&[]), 0.0);
        assert_eq!(dist_metric(&[p(0.0, 0.0), p(3.0, 4.0), p(3.0, 0.0)]), 9.0);
    }

    #[test]
    fn greedy_examples() {
        let r = greedy_next(p(0.5, 0.5), &[p(1.5, 0.5), p(5.5, 5.5)]).unwrap();
        assert_eq!(r.chosen, p(1.5, 0.5));
        assert_eq!(r.permutations_evaluated, 2);
        let r = greedy_next(p(0.5, 0.5), &[p(7.0, 7.0)]).unwrap();
        assert_eq!(r.chosen, p(7.0, 7.0));
        let r = greedy_next(p(0.0, 0.0), &[p(1.0, 0.0), p(0.0, 1.0)]).unwrap();
        assert_eq!(r.chosen, p(1.0, 0.0));
        assert_eq!(r.chosen_index, 0);
        assert_eq!(greedy_next::<f64>(p(0.0, 0.0), &[]), Err(SequencerError::EmptyPending));
    }

    #[test]
    fn bcp_two_intermediate_example() {
        let r = bcp_next(p(0.0, 0.0), &[p(1.0, 0.0), p(0.0, 1.0)], p(2.0, 0.0)).unwrap();
        assert_eq!(r.chosen, p(0.0, 1.0));
        assert!((r.tour_cost - (2.0 + 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(r.permutations_evaluated, 2);
    }

    #[test]
    fn bcp_single_intermediate_and_errors() {
        let r = bcp_next(p(0.0, 0.0), &[p(4.0, 4.0)], p(9.0, 0.0)).unwrap();
        assert_eq!(r.chosen, p(4.0, 4.0));
        assert_eq!(r.permutations_evaluated, 1);
        assert_eq!(
            bcp_next::<f64>(p(0.0, 0.0), &[], p(1.0, 1.0)),
            Err(SequencerError::EmptyPending)
        );
        let many: Vec<_> = (0..11).map(|i| p(i as f64, 0.0)).collect();
        assert_eq!(
            bcp_next(p(0.0, 0.0), &many, p(1.0, 1.0)),
            Err(SequencerError::EnumerationBudgetExceeded { m: 11, cap: 10 })
        );
    }

    /// Independent oracle: itertools permutations summed through `dist_metric`.
    fn brute_force_best(current: Point2<f64>, pending: &[Point2<f64>], goal: Point2<f64>) -> f64 {
        pending
            .iter()
            .copied()
            .permutations(pending.len())
            .map(|perm| {
                let mut tour = vec![current];
                tour.extend(perm);
                tour.push(goal);
                dist_metric(&tour)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn bcp_three_random_intermediates_matches_brute_force() {
        let pending = [p(3.5, 1.5), p(0.5, 6.5), p(7.5, 4.5)];
        let (current, goal) = (p(0.5, 0.5), p(9.5, 9.5));
        let r = bcp_next(current, &pending, goal).unwrap();
        assert_eq!(r.permutations_evaluated, 6);
        assert!((r.tour_cost - brute_force_best(current, &pending, goal)).abs() < 1e-12);
    }

    #[test]
    fn ordering_cost_is_bit_identical_to_dist_metric() {
        let pending = [p(3.5, 1.5), p(0.5, 6.5), p(7.5, 4.5)];
        let tour = [p(0.1, 0.2), pending[2], pending[0], pending[1], p(9.5, 9.5)];
        assert_eq!(
            ordering_cost(p(0.1, 0.2), &pending, &[2, 0, 1], p(9.5, 9.5)),
            dist_metric(&tour)
        );
    }

    #[test]
    fn probabilistic_examples() {
        let pending: Vec<_> = (0..5).map(|i| p(i as f64 * 1.3, (i * i) as f64 * 0.4)).collect();
        let half = SearchFraction::new(0.5).unwrap();
        let r = probabilistic_next(p(0.0, 0.0), &pending, p(9.0, 9.0), half, 3).unwrap();
        assert_eq!(r.permutations_evaluated, 60);

        let full = probabilistic_next(p(0.0, 0.0), &pending, p(9.0, 9.0), SearchFraction::FULL, 3)
            .unwrap();
        let exhaustive = bcp_next(p(0.0, 0.0), &pending, p(9.0, 9.0)).unwrap();
        assert_eq!(full.tour_cost, exhaustive.tour_cost);

        let one = probabilistic_next(p(0.0, 0.0), &[p(2.0, 2.0)], p(9.0, 9.0), half, 11).unwrap();
        assert_eq!(one.chosen, p(2.0, 2.0));
    }

    #[test]
    fn probabilistic_is_seed_deterministic() {
        let pending: Vec<_> = (0..6).map(|i| p((i * 7 % 10) as f64, (i * 3 % 10) as f64)).collect();
        let g = SearchFraction::new(0.2).unwrap();
        let a = probabilistic_next(p(0.0, 0.0), &pending, p(9.0, 9.0), g, 42).unwrap();
        let b = probabilistic_next(p(0.0, 0.0), &pending, p(9.0, 9.0), g, 42).unwrap();
        assert_eq!((a.chosen, a.tour_cost), (b.chosen, b.tour_cost));
    }

    fn retained_set(m: usize, gamma: f64, seed: u64) -> Vec<Vec<usize>> {
        let pending: Vec<_> = (0..m).map(|i| p(i as f64, 0.0)).collect();
        let mut kept = Vec::new();
        let g = SearchFraction::new(gamma).unwrap();
        scan_shuffled(p(0.0, 0.0), &pending, p(9.0, 9.0), g, seed, |o, _| kept.push(o.to_vec()));
        kept
    }

    #[test]
    fn retained_sets_are_exact_distinct_and_nested() {
        for seed in 0..20 {
            let mut previous: Vec<Vec<usize>> = Vec::new();
            for gamma in [0.1, 0.25, 0.5, 0.75, 1.0] {
                let kept = retained_set(5, gamma, seed);
                assert_eq!(kept.len() as u64, SearchFraction::new(gamma).unwrap().retained(120));
                assert_eq!(kept.iter().unique().count(), kept.len());
                assert!(previous.iter().all(|o| kept.contains(o)), "seed {seed}, gamma {gamma}");
                previous = kept;
            }
        }
    }

    #[test]
    fn every_ordering_is_equally_likely_to_be_retained() {
        let seeds = 6000;
        let mut hits = std::collections::HashMap::<Vec<usize>, usize>::new();
        for seed in 0..seeds {
            for o in retained_set(3, 0.5, seed) {
                *hits.entry(o).or_default() += 1;
            }
        }
        assert_eq!(hits.len(), 6);
        // Each of the six orderings is kept with probability 1/2.
        for (o, n) in hits {
            let freq = n as f64 / seeds as f64;
            assert!((freq - 0.5).abs() < 0.03, "{o:?}: {freq}");
        }
    }

    #[test]
    fn retained_optimal_count_at_full_fraction_counts_all_optima() {
        // Symmetric square: both orientations of the loop tie.
        let pending = [p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        let (current, goal) = (p(0.0, 0.0), p(0.0, 0.0));
        let best = brute_force_best(current, &pending, goal);
        let exhaustive = pending
            .iter()
            .copied()
            .permutations(3)
            .filter(|perm| {
                let mut t = vec![current];
                t.extend(perm.iter().copied());
                t.push(goal);
                (dist_metric(&t) - best).abs() <= 1e-9
            })
            .count() as u64;
        let counted = retained_optimal_count(
            current, &pending, goal, SearchFraction::FULL, 5, best, 1e-9,
        )
        .unwrap();
        assert_eq!(exhaustive, 2);
        assert_eq!(counted, exhaustive);
    }

    #[test]
    fn works_in_single_precision() {
        let pending = [Point2::new(1.0f32, 0.0), Point2::new(0.0, 1.0)];
        let r = bcp_next(Point2::new(0.0f32, 0.0), &pending, Point2::new(2.0, 0.0)).unwrap();
        assert_eq!(r.chosen_index, 1);
    }

    fn points(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Point2<f64>>> {
        proptest::collection::vec((0.0f64..10.0, 0.0f64..10.0), n)
            .prop_map(|v| v.into_iter().map(|(x, y)| p(x, y)).collect())
    }

    proptest! {
        #[test]
        fn greedy_chooses_a_minimum(current in points(1..2), pending in points(1..9)) {
            let r = greedy_next(current[0], &pending).unwrap();
            let min = pending.iter().map(|q| euclidean_dist(current[0], *q)).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(euclidean_dist(current[0], r.chosen), min);
        }

        #[test]
        fn probabilistic_never_beats_bcp(ends in points(2..3), pending in points(1..6), gamma in 0.05f64..1.0, seed: u64) {
            let g = SearchFraction::new(gamma).unwrap();
            let pr = probabilistic_next(ends[0], &pending, ends[1], g, seed).unwrap();
            let bcp = bcp_next(ends[0], &pending, ends[1]).unwrap();
            prop_assert!(pr.tour_cost >= bcp.tour_cost);
            prop_assert_eq!(pr.permutations_evaluated, g.retained(factorial(pending.len())));
        }

        #[test]
        fn bcp_matches_brute_force(ends in points(2..3), pending in points(1..6)) {
            let r = bcp_next(ends[0], &pending, ends[1]).unwrap();
            prop_assert!((r.tour_cost - brute_force_best(ends[0], &pending, ends[1])).abs() < 1e-9);
        }
    }
}
