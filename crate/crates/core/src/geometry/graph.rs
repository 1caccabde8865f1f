use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::FeatureGrid;

/// Undirected graph on grid points: `p` and `q` are joined when either lies
/// in the other's patch, with weight `d(p, q)`.
#[derive(Debug, Clone)]
pub struct PatchGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl PatchGraph {
    /// Tests all pairs. `in_patch(q, p0)` says whether `q` lies in the patch
    /// of `p0`; `dist` must be nonnegative. Each edge weight is evaluated once
    /// with the smaller index first, so the graph is exactly symmetric.
    pub fn build<P, D>(n: usize, in_patch: P, dist: D) -> Self
    where
        P: Fn(usize, usize) -> bool + Sync,
        D: Fn(usize, usize) -> f64 + Sync,
    {
        let upper: Vec<Vec<(usize, f64)>> = (0..n)
            .into_par_iter()
            .map(|p| {
                ((p + 1)..n)
                    .filter(|&q| in_patch(q, p) || in_patch(p, q))
                    .map(|q| (q, dist(p, q).max(0.0)))
                    .collect()
            })
            .collect();
        let mut adjacency = vec![Vec::new(); n];
        for (p, row) in upper.into_iter().enumerate() {
            for (q, w) in row {
                adjacency[p].push((q, w));
                adjacency[q].push((p, w));
            }
        }
        for row in &mut adjacency {
            row.sort_by_key(|e| e.0);
        }
        PatchGraph { adjacency }
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, p: usize) -> &[(usize, f64)] {
        &self.adjacency[p]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Outcome of a glued-distance query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reach {
    /// Length of a shortest chain and its number of edges.
    Reachable { distance: f64, hops: usize },
    Unreachable,
}

impl Reach {
    pub fn distance(&self) -> Option<f64> {
        match *self {
            Reach::Reachable { distance, .. } => Some(distance),
            Reach::Unreachable => None,
        }
    }
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    hops: usize,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap; fewer hops win ties
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.hops.cmp(&self.hops))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest chain lengths from `source` to every node (Dijkstra).
pub fn glued_distances_from(pg: &PatchGraph, source: usize) -> Vec<Reach> {
    let n = pg.len();
    let mut best: Vec<Option<(f64, usize)>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[source] = Some((0.0, 0));
    heap.push(Entry { dist: 0.0, hops: 0, node: source });
    while let Some(Entry { dist, hops, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        for &(next, w) in pg.neighbors(node) {
            if done[next] {
                continue;
            }
            let cand = (dist + w, hops + 1);
            let better = match best[next] {
                None => true,
                Some((d, h)) => cand.0 < d || (cand.0 == d && cand.1 < h),
            };
            if better {
                best[next] = Some(cand);
                heap.push(Entry { dist: cand.0, hops: cand.1, node: next });
            }
        }
    }
    best.into_iter()
        .map(|b| match b {
            Some((distance, hops)) => Reach::Reachable { distance, hops },
            None => Reach::Unreachable,
        })
        .collect()
}

/// Length of the shortest patch-compatible chain from `p0` to `p`.
pub fn glued_distance(pg: &PatchGraph, p: usize, p0: usize) -> Reach {
    if p == p0 {
        return Reach::Reachable { distance: 0.0, hops: 0 };
    }
    glued_distances_from(pg, p0)[p]
}

/// μ-measure of the open ball `{p : d(p, center) < eps}`.
pub fn ball_measure<D>(grid: &FeatureGrid, center: usize, eps: f64, d: D) -> f64
where
    D: Fn(usize, usize) -> f64,
{
    (0..grid.len()).filter(|&p| d(p, center) < eps).map(|p| grid.weight(p)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Axis, Measure};

    fn line_graph() -> PatchGraph {
        // points 0..5 on a line, patch = neighbours within 1.5
        let x = [0.0f64, 1.0, 2.0, 3.0, 10.0];
        PatchGraph::build(5, |q, p| (x[q] - x[p]).abs() < 1.5, |p, q| (x[p] - x[q]).abs())
    }

    #[test]
    fn chains_accumulate_along_the_line() {
        let g = line_graph();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(glued_distance(&g, 3, 0), Reach::Reachable { distance: 3.0, hops: 3 });
        assert_eq!(glued_distance(&g, 0, 0), Reach::Reachable { distance: 0.0, hops: 0 });
        assert_eq!(glued_distance(&g, 4, 0), Reach::Unreachable);
        assert_eq!(glued_distance(&g, 4, 0).distance(), None);
    }

    #[test]
    fn one_sided_patch_membership_is_symmetrised() {
        let g = PatchGraph::build(2, |q, p| q == 1 && p == 0, |_, _| 2.0);
        assert_eq!(glued_distance(&g, 0, 1).distance(), Some(2.0));
        assert_eq!(glued_distance(&g, 1, 0).distance(), Some(2.0));
    }

    #[test]
    fn ball_measure_counts_weights_inside() {
        let grid = FeatureGrid::new(vec![Axis::new("f", 0.0, 1.0, 5).unwrap()], Measure::Counting).unwrap();
        let d = |p: usize, q: usize| (p as f64 - q as f64).abs();
        assert_eq!(ball_measure(&grid, 2, 0.5, d), 1.0);
        assert_eq!(ball_measure(&grid, 2, 1.5, d), 3.0);
        assert_eq!(ball_measure(&grid, 2, 10.0, d), 5.0);
    }
}
