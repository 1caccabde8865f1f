mod common;

use common::gp;
use cortexk::filterbank::FeaturePoint;
use cortexk::geometry::{glued_distance, Axis, FeatureGrid, Measure, PatchGraph, Reach};
use cortexk::kernel::{kernel_distance, kernel_gabor_shifted, patch_contains, PatchSpec};

fn small_graph() -> (PatchGraph, usize) {
    let gp = gp();
    let eta = gp.norm_sq();
    let ps = PatchSpec::new(gp.lambda).unwrap();
    let grid = FeatureGrid::new(
        vec![Axis::symmetric("x", 0.6, 0.6).unwrap(), Axis::symmetric("y", 0.6, 0.6).unwrap(), Axis::circle("theta", 3).unwrap()],
        Measure::Counting,
    )
    .unwrap();
    let pts: Vec<FeaturePoint> =
        (0..grid.len()).map(|i| FeaturePoint::new(grid.coord(i, 0), grid.coord(i, 1), grid.coord(i, 2))).collect();
    let pg = PatchGraph::build(
        grid.len(),
        |q, p0| patch_contains(&ps, &pts[q], &pts[p0]),
        |p, q| kernel_distance(eta, kernel_gabor_shifted(&gp, &pts[p], &pts[q])).unwrap(),
    );
    (pg, grid.len())
}

/// Minimum over every simple chain, by depth-first search with pruning.
fn brute_force(pg: &PatchGraph, from: usize, to: usize) -> Option<f64> {
    fn walk(pg: &PatchGraph, at: usize, to: usize, seen: &mut Vec<bool>, cost: f64, best: &mut Option<f64>) {
        // weights are nonnegative, so a chain already over the best cannot win
        if best.is_some_and(|b| cost >= b) {
            return;
        }
        if at == to {
            *best = Some(best.map_or(cost, |b| b.min(cost)));
            return;
        }
        for &(next, w) in pg.neighbors(at) {
            if !seen[next] {
                seen[next] = true;
                walk(pg, next, to, seen, cost + w, best);
                seen[next] = false;
            }
        }
    }
    let mut seen = vec![false; pg.len()];
    seen[from] = true;
    let mut best = None;
    walk(pg, from, to, &mut seen, 0.0, &mut best);
    best
}

#[test]
fn matches_exhaustive_chain_search() {
    let (pg, n) = small_graph();
    for p in 0..n {
        for q in 0..n {
            let fast = glued_distance(&pg, p, q);
            match (fast, brute_force(&pg, p, q)) {
                (Reach::Reachable { distance, .. }, Some(b)) => assert!((distance - b).abs() < 1e-12, "{p}->{q}: {distance} vs {b}"),
                (Reach::Unreachable, None) => {}
                (f, b) => panic!("{p}->{q}: {f:?} vs {b:?}"),
            }
        }
    }
}

#[test]
fn is_a_pseudometric_on_reachable_pairs() {
    let (pg, n) = small_graph();
    let d = |p, q| glued_distance(&pg, p, q).distance();
    for p in 0..n {
        assert_eq!(d(p, p), Some(0.0));
        for q in 0..n {
            if let (Some(a), Some(b)) = (d(p, q), d(q, p)) {
                assert!((a - b).abs() < 1e-12);
            }
            for r in 0..n {
                if let (Some(pq), Some(qr), Some(pr)) = (d(p, q), d(q, r), d(p, r)) {
                    assert!(pr <= pq + qr + 1e-12);
                }
            }
        }
    }
}
