use std::collections::BTreeSet;

use super::{GridCell, WorldMap};

/// Free-cell graph with orthogonal adjacency. Edges are implied by vertex adjacency, so
/// removing a vertex drops its incident edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NavGraph {
    width: usize,
    height: usize,
    vertices: BTreeSet<GridCell>,
}

impl NavGraph {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn contains(&self, cell: &GridCell) -> bool {
        self.vertices.contains(cell)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &GridCell> {
        self.vertices.iter()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Graph neighbours in East, North, West, South order.
    pub fn neighbours<'a>(&'a self, cell: &GridCell) -> impl Iterator<Item = GridCell> + 'a {
        cell.neighbours(self.width, self.height)
            .filter(move |n| self.vertices.contains(n))
    }

    /// Undirected edges, each listed once with the smaller cell first.
    pub fn edges(&self) -> impl Iterator<Item = (GridCell, GridCell)> + '_ {
        self.vertices.iter().flat_map(move |v| {
            self.neighbours(v)
                .filter(move |n| v < n)
                .map(move |n| (*v, n))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// In-place form of [`remove_vertex`]; returns whether the vertex was present.
    pub fn remove(&mut self, cell: &GridCell) -> bool {
        self.vertices.remove(cell)
    }
}

/// Graph over every grid cell not in `known_obstacles`.
pub fn build_graph(map: &WorldMap, known_obstacles: &BTreeSet<GridCell>) -> NavGraph {
    let vertices = (0..map.height)
        .flat_map(|row| (0..map.width).map(move |col| GridCell::new(row, col)))
        .filter(|c| !known_obstacles.contains(c))
        .collect();
    NavGraph {
        width: map.width,
        height: map.height,
        vertices,
    }
}

/// Returns `graph` without `cell`. Removing an absent vertex is a no-op.
pub fn remove_vertex(graph: &NavGraph, cell: &GridCell) -> NavGraph {
    let mut out = graph.clone();
    out.remove(cell);
    out
}
