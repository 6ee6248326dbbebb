use std::collections::{BTreeSet, VecDeque};
use std::ops::RangeInclusive;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::WorldError;
use crate::geometry::Point2;
use crate::scalar::Real;

const GENERATION_ATTEMPTS: usize = 10_000;

/// A unit grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct GridCell {
    pub row: usize,
    pub col: usize,
}

impl GridCell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn center<T: Real>(&self) -> Point2<T> {
        let half = T::lit(0.5);
        Point2::new(T::from_count(self.col) + half, T::from_count(self.row) + half)
    }

    /// The cell containing a planar point, if it lies on the grid.
    pub fn containing<T: Real>(p: Point2<T>, width: usize, height: usize) -> Option<Self> {
        if !(p.x >= T::zero() && p.y >= T::zero()) {
            return None;
        }
        let col = p.x.floor().to_usize()?;
        let row = p.y.floor().to_usize()?;
        (col < width && row < height).then_some(Self { row, col })
    }

    pub fn manhattan(&self, other: &Self) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    /// Orthogonal neighbours inside a `width`×`height` grid, in East, North, West, South order.
    pub fn neighbours(&self, width: usize, height: usize) -> impl Iterator<Item = GridCell> {
        let Self { row, col } = *self;
        [
            (col + 1 < width).then(|| GridCell::new(row, col + 1)),
            (row + 1 < height).then(|| GridCell::new(row + 1, col)),
            col.checked_sub(1).map(|c| GridCell::new(row, c)),
            row.checked_sub(1).map(|r| GridCell::new(r, col)),
        ]
        .into_iter()
        .flatten()
    }
}

impl From<[usize; 2]> for GridCell {
    fn from([row, col]: [usize; 2]) -> Self {
        Self { row, col }
    }
}

impl From<GridCell> for [usize; 2] {
    fn from(c: GridCell) -> Self {
        [c.row, c.col]
    }
}

/// Grid geometry, true obstacle layout, and the waypoints to visit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldMap {
    pub width: usize,
    pub height: usize,
    pub obstacles: BTreeSet<GridCell>,
    /// Intermediate waypoints, excluding start and goal.
    pub waypoints: Vec<GridCell>,
    pub start: GridCell,
    pub goal: GridCell,
    pub seed: u64,
}

impl WorldMap {
    pub fn contains(&self, cell: &GridCell) -> bool {
        cell.row < self.height && cell.col < self.width
    }

    /// Checks bounds and obstacle disjointness. Connectivity is checked separately by
    /// [`is_traversable`].
    pub fn validate(&self) -> Result<(), WorldError> {
        if self.width == 0 || self.height == 0 {
            return Err(WorldError::InvariantViolation("grid has zero extent".into()));
        }
        for cell in &self.obstacles {
            if !self.contains(cell) {
                return Err(WorldError::InvariantViolation(format!(
                    "obstacle [{}, {}] outside {}x{} grid",
                    cell.row, cell.col, self.height, self.width
                )));
            }
        }
        let named = std::iter::once(("start", &self.start))
            .chain(std::iter::once(("goal", &self.goal)))
            .chain(self.waypoints.iter().map(|w| ("waypoint", w)));
        for (what, cell) in named {
            if !self.contains(cell) {
                return Err(WorldError::InvariantViolation(format!(
                    "{what} [{}, {}] outside grid",
                    cell.row, cell.col
                )));
            }
            if self.obstacles.contains(cell) {
                return Err(WorldError::InvariantViolation(format!(
                    "{what} [{}, {}] coincides with an obstacle",
                    cell.row, cell.col
                )));
            }
        }
        Ok(())
    }
}

/// Parameters of a random scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub width: usize,
    pub height: usize,
    /// Inclusive `[min, max]` obstacle count.
    pub n_obstacles: [usize; 2],
    /// Number of intermediate waypoints.
    pub n_waypoints: usize,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            width: 10,
            height: 10,
            n_obstacles: [25, 35],
            n_waypoints: 6,
        }
    }
}

impl ScenarioSpec {
    pub fn generate(&self, seed: u64) -> Result<WorldMap, WorldError> {
        generate_scenario(
            seed,
            self.width,
            self.height,
            self.n_obstacles[0]..=self.n_obstacles[1],
            self.n_waypoints,
        )
    }
}

/// Draws a random traversable map. Start is cell `(0, 0)`, goal is the opposite corner.
pub fn generate_scenario(
    seed: u64,
    width: usize,
    height: usize,
    n_obstacles: RangeInclusive<usize>,
    n_waypoints: usize,
) -> Result<WorldMap, WorldError> {
    if width < 2 || height < 2 {
        return Err(WorldError::InvalidParameters(format!(
            "grid must be at least 2x2, got {height}x{width}"
        )));
    }
    if n_obstacles.is_empty() {
        return Err(WorldError::InvalidParameters("empty obstacle range".into()));
    }
    if n_waypoints + n_obstacles.end() + 2 > width * height {
        return Err(WorldError::InvalidParameters(format!(
            "{} waypoints and up to {} obstacles do not fit a {height}x{width} grid",
            n_waypoints,
            n_obstacles.end()
        )));
    }

    let start = GridCell::new(0, 0);
    let goal = GridCell::new(height - 1, width - 1);
    let interior: Vec<GridCell> = (0..height)
        .flat_map(|row| (0..width).map(move |col| GridCell::new(row, col)))
        .filter(|c| *c != start && *c != goal)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GENERATION_ATTEMPTS {
        let count = rng.gen_range(n_obstacles.clone());
        let picked = index::sample(&mut rng, interior.len(), count + n_waypoints);
        let mut picked = picked.into_iter().map(|i| interior[i]);
        let obstacles: BTreeSet<GridCell> = picked.by_ref().take(count).collect();
        let waypoints: Vec<GridCell> = picked.collect();
        let map = WorldMap {
            width,
            height,
            obstacles,
            waypoints,
            start,
            goal,
            seed,
        };
        if is_traversable(&map) {
            return Ok(map);
        }
    }
    Err(WorldError::GenerationFailed {
        attempts: GENERATION_ATTEMPTS,
    })
}

/// Cells reachable from `from` through 4-connected cells not rejected by `blocked`.
pub(crate) fn flood_fill(
    width: usize,
    height: usize,
    from: GridCell,
    blocked: impl Fn(&GridCell) -> bool,
) -> BTreeSet<GridCell> {
    let mut seen = BTreeSet::new();
    if blocked(&from) || from.row >= height || from.col >= width {
        return seen;
    }
    let mut queue = VecDeque::from([from]);
    seen.insert(from);
    while let Some(cell) = queue.pop_front() {
        for next in cell.neighbours(width, height) {
            if !blocked(&next) && seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen
}

/// True iff start, goal and every waypoint share one 4-connected free component.
pub fn is_traversable(map: &WorldMap) -> bool {
    let reach = flood_fill(map.width, map.height, map.start, |c| {
        map.obstacles.contains(c)
    });
    reach.contains(&map.goal) && map.waypoints.iter().all(|w| reach.contains(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_map() -> WorldMap {
        WorldMap {
            width: 3,
            height: 1,
            obstacles: BTreeSet::from([GridCell::new(0, 1)]),
            waypoints: vec![],
            start: GridCell::new(0, 0),
            goal: GridCell::new(0, 2),
            seed: 0,
        }
    }

    #[test]
    fn default_scenario_has_fixed_corners() {
        let map = generate_scenario(7, 10, 10, 25..=35, 8).unwrap();
        assert_eq!(map.start, GridCell::new(0, 0));
        assert_eq!(map.goal, GridCell::new(9, 9));
        assert_eq!(map.waypoints.len(), 8);
        assert!((25..=35).contains(&map.obstacles.len()));
        assert!(is_traversable(&map));
        map.validate().unwrap();
    }

    #[test]
    fn empty_obstacle_range_on_smallest_grid() {
        let map = generate_scenario(99, 2, 2, 0..=0, 0).unwrap();
        assert!(map.obstacles.is_empty());
        assert_eq!(map.goal, GridCell::new(1, 1));
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a = generate_scenario(7, 10, 10, 25..=35, 8).unwrap();
        let b = generate_scenario(7, 10, 10, 25..=35, 8).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario(8, 10, 10, 25..=35, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_overfull_parameters() {
        assert!(matches!(
            generate_scenario(1, 3, 3, 5..=8, 2),
            Err(WorldError::InvalidParameters(_))
        ));
        assert!(matches!(
            generate_scenario(1, 1, 5, 0..=0, 0),
            Err(WorldError::InvalidParameters(_))
        ));
    }

    #[test]
    fn infeasible_density_exhausts_retry_budget() {
        // 2x3 grid with 3 obstacles among the 4 interior cells never connects the corners.
        assert!(matches!(
            generate_scenario(3, 3, 2, 3..=3, 1),
            Err(WorldError::GenerationFailed { .. })
        ));
    }

    #[test]
    fn traversability_cases() {
        let open = WorldMap {
            width: 3,
            height: 3,
            obstacles: BTreeSet::new(),
            waypoints: vec![GridCell::new(1, 1), GridCell::new(2, 0)],
            start: GridCell::new(0, 0),
            goal: GridCell::new(2, 2),
            seed: 0,
        };
        assert!(is_traversable(&open));
        assert!(!is_traversable(&line_map()));
    }

    #[test]
    fn walled_off_waypoint_is_not_traversable() {
        let mut map = generate_scenario(7, 10, 10, 25..=35, 8).unwrap();
        // Enclose waypoint 0 by its four neighbours.
        let w = map.waypoints[0];
        let ring: Vec<GridCell> = w.neighbours(10, 10).collect();
        map.waypoints.retain(|c| !ring.contains(c));
        map.obstacles.extend(ring.iter().filter(|c| **c != map.start && **c != map.goal));
        if ring.contains(&map.start) || ring.contains(&map.goal) {
            return;
        }
        // Independent check: count reachable cells by brute-force relaxation.
        let mut reach = vec![vec![false; 10]; 10];
        reach[0][0] = true;
        loop {
            let mut changed = false;
            for r in 0..10 {
                for c in 0..10 {
                    if reach[r][c] || map.obstacles.contains(&GridCell::new(r, c)) {
                        continue;
                    }
                    let adj = (r > 0 && reach[r - 1][c])
                        || (r < 9 && reach[r + 1][c])
                        || (c > 0 && reach[r][c - 1])
                        || (c < 9 && reach[r][c + 1]);
                    if adj {
                        reach[r][c] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        assert!(!reach[w.row][w.col]);
        assert!(!is_traversable(&map));
    }

    #[test]
    fn containing_cell_of_points() {
        assert_eq!(
            GridCell::containing(Point2::new(2.7, 0.1), 3, 1),
            Some(GridCell::new(0, 2))
        );
        assert_eq!(GridCell::containing(Point2::new(3.2, 0.1), 3, 1), None);
        assert_eq!(GridCell::containing(Point2::new(-0.1, 0.1), 3, 1), None);
    }
}
