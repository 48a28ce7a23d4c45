use crate::geometry::Point2;

/// Uniform bucket grid over a square, stored in compressed rows. Queries
/// scan square rings of buckets outward and stop once no unvisited bucket
/// can beat the current answer.
#[derive(Debug, Clone)]
pub(crate) struct BucketGrid {
    min_x: f64,
    min_y: f64,
    cell: f64,
    n: usize,
    start: Vec<u32>,
    pts: Vec<Point2>,
    ids: Vec<u32>,
}

impl BucketGrid {
    /// Grid over `[c - half, c + half]²` with buckets of side about `cell`.
    pub fn new(points: &[Point2], center: Point2, half: f64, cell: f64) -> Self {
        let n = ((2.0 * half / cell).ceil() as usize).clamp(1, 4096);
        let cell = 2.0 * half / n as f64;
        let mut grid = Self {
            min_x: center.x - half,
            min_y: center.y - half,
            cell,
            n,
            start: vec![0; n * n + 1],
            pts: Vec::with_capacity(points.len()),
            ids: Vec::with_capacity(points.len()),
        };
        let keys: Vec<usize> = points.iter().map(|&p| grid.key(p)).collect();
        for &k in &keys {
            grid.start[k + 1] += 1;
        }
        for i in 0..n * n {
            grid.start[i + 1] += grid.start[i];
        }
        let mut fill = grid.start.clone();
        grid.pts.resize(points.len(), Point2::ORIGIN);
        grid.ids.resize(points.len(), 0);
        for (i, (&p, &k)) in points.iter().zip(&keys).enumerate() {
            let slot = fill[k] as usize;
            grid.pts[slot] = p;
            grid.ids[slot] = i as u32;
            fill[k] += 1;
        }
        grid
    }

    fn coord(&self, v: f64, min: f64) -> usize {
        (((v - min) / self.cell).floor().max(0.0) as usize).min(self.n - 1)
    }

    fn key(&self, p: Point2) -> usize {
        self.coord(p.y, self.min_y) * self.n + self.coord(p.x, self.min_x)
    }

    /// Distance from `p` to the outside of the block of rings `<= k`
    /// around bucket `(bx, by)`; sides on the grid border never bound.
    fn reach(&self, p: Point2, bx: usize, by: usize, k: usize) -> f64 {
        let mut d = f64::INFINITY;
        if bx > k {
            d = d.min(p.x - (self.min_x + (bx - k) as f64 * self.cell));
        }
        if bx + k + 1 < self.n {
            d = d.min(self.min_x + (bx + k + 1) as f64 * self.cell - p.x);
        }
        if by > k {
            d = d.min(p.y - (self.min_y + (by - k) as f64 * self.cell));
        }
        if by + k + 1 < self.n {
            d = d.min(self.min_y + (by + k + 1) as f64 * self.cell - p.y);
        }
        d
    }

    /// Visits every point in ring `k` until `f` returns true.
    fn scan_ring<F: FnMut(Point2, u32) -> bool>(&self, bx: usize, by: usize, k: usize, f: &mut F) -> bool {
        let (bx, by, k) = (bx as isize, by as isize, k as isize);
        let n = self.n as isize;
        let y0 = (by - k).max(0);
        let y1 = (by + k).min(n - 1);
        for y in y0..=y1 {
            let edge_row = (y - by).abs() == k;
            let xs: &[isize] = if edge_row { &[] } else { &[bx - k, bx + k] };
            let mut visit = |x: isize| -> bool {
                if x < 0 || x >= n {
                    return false;
                }
                let key = (y * n + x) as usize;
                let (s, e) = (self.start[key] as usize, self.start[key + 1] as usize);
                (s..e).any(|i| f(self.pts[i], self.ids[i]))
            };
            if edge_row {
                for x in (bx - k).max(0)..=(bx + k).min(n - 1) {
                    if visit(x) {
                        return true;
                    }
                }
            } else {
                for &x in xs {
                    if visit(x) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Index and squared distance of the nearest stored point.
    #[cfg(test)]
    pub fn nearest(&self, p: Point2) -> Option<(usize, f64)> {
        if self.pts.is_empty() {
            return None;
        }
        let (bx, by) = (self.coord(p.x, self.min_x), self.coord(p.y, self.min_y));
        let mut best = (usize::MAX, f64::INFINITY);
        for k in 0..self.n {
            self.scan_ring(bx, by, k, &mut |q, id| {
                let d = q.dist_sq(p);
                if d < best.1 || (d == best.1 && (id as usize) < best.0) {
                    best = (id as usize, d);
                }
                false
            });
            let r = self.reach(p, bx, by, k);
            if best.1 <= r * r {
                break;
            }
        }
        Some(best)
    }

    pub fn side(&self) -> usize {
        self.n
    }

    /// Lower-left corner and side length of bucket `(bx, by)`.
    pub fn bucket_square(&self, bx: usize, by: usize) -> (Point2, f64) {
        (
            Point2::new(self.min_x + bx as f64 * self.cell, self.min_y + by as f64 * self.cell),
            self.cell,
        )
    }

    /// Every stored point that is the nearest one for some location in
    /// bucket `(bx, by)` (plus a few that are not), in scan order.
    pub fn bucket_candidates(&self, bx: usize, by: usize, out: &mut Vec<(Point2, u32)>) {
        out.clear();
        let (lo, c) = self.bucket_square(bx, by);
        let hi = Point2::new(lo.x + c, lo.y + c);
        let far = |q: Point2| {
            let dx = (q.x - lo.x).abs().max((q.x - hi.x).abs());
            let dy = (q.y - lo.y).abs().max((q.y - hi.y).abs());
            dx * dx + dy * dy
        };
        let near = |q: Point2| {
            let dx = (lo.x - q.x).max(0.0).max(q.x - hi.x);
            let dy = (lo.y - q.y).max(0.0).max(q.y - hi.y);
            dx * dx + dy * dy
        };
        // fast path: the 5x5 block settles it whenever every point of the
        // bucket has a stored point within two bucket widths
        const R: usize = 2;
        let (x0, x1) = (bx.saturating_sub(R), (bx + R).min(self.n - 1));
        let (y0, y1) = (by.saturating_sub(R), (by + R).min(self.n - 1));
        let mut u = f64::INFINITY;
        for y in y0..=y1 {
            let (s, e) = (self.start[y * self.n + x0] as usize, self.start[y * self.n + x1 + 1] as usize);
            for q in &self.pts[s..e] {
                u = u.min(far(*q));
            }
        }
        let reach = R as f64 * c;
        if u <= reach * reach {
            for y in y0..=y1 {
                let (s, e) = (self.start[y * self.n + x0] as usize, self.start[y * self.n + x1 + 1] as usize);
                for i in s..e {
                    if near(self.pts[i]) <= u {
                        out.push((self.pts[i], self.ids[i]));
                    }
                }
            }
            return;
        }
        for k in 0..self.n {
            self.scan_ring(bx, by, k, &mut |q, _| {
                u = u.min(far(q));
                false
            });
            let gap = k as f64 * self.cell;
            if u <= gap * gap {
                break;
            }
        }
        if !u.is_finite() {
            return;
        }
        for k in 0..self.n {
            // ring k lies at least (k - 1) buckets away from this one
            let gap = k.saturating_sub(1) as f64 * self.cell;
            if gap * gap > u {
                break;
            }
            self.scan_ring(bx, by, k, &mut |q, id| {
                if near(q) <= u {
                    out.push((q, id));
                }
                false
            });
        }
    }

    /// True if some stored point lies at squared distance strictly below `d2`.
    pub fn any_closer(&self, p: Point2, d2: f64) -> bool {
        let (bx, by) = (self.coord(p.x, self.min_x), self.coord(p.y, self.min_y));
        for k in 0..self.n {
            if self.scan_ring(bx, by, k, &mut |q, _| q.dist_sq(p) < d2) {
                return true;
            }
            let r = self.reach(p, bx, by, k);
            if r > 0.0 && r * r >= d2 {
                return false;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::engine::{SimWindow, TrialPlan};
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};
    use rand::Rng;

    fn brute_nearest(pts: &[Point2], p: Point2) -> (usize, f64) {
        pts.iter()
            .enumerate()
            .map(|(i, q)| (i, q.dist_sq(p)))
            .fold((usize::MAX, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
    }

    #[test]
    fn agrees_with_brute_force() {
        let w = SimWindow::disk(Point2::ORIGIN, 10.0).unwrap();
        let mut rng = TrialPlan::new(5, 1).rng(0);
        let pts: Vec<Point2> = (0..400).map(|_| w.sample_point(&mut rng)).collect();
        let grid = BucketGrid::new(&pts, Point2::ORIGIN, 10.0, 1.0);
        for _ in 0..2000 {
            let q = w.scaled(1.2).sample_point(&mut rng);
            let (i, d) = grid.nearest(q).unwrap();
            let (j, e) = brute_nearest(&pts, q);
            assert_eq!(d, e);
            assert_eq!(i, j);
            let r2 = e * 1.0001;
            assert!(grid.any_closer(q, r2));
            assert!(!grid.any_closer(q, e));
        }
    }

    #[test]
    fn bucket_candidates_contain_every_nearest_point() {
        let w = SimWindow::disk(Point2::ORIGIN, 6.0).unwrap();
        let mut rng = TrialPlan::new(6, 1).rng(0);
        let pts: Vec<Point2> = (0..90).map(|_| w.sample_point(&mut rng)).collect();
        let grid = BucketGrid::new(&pts, Point2::ORIGIN, 6.0, 1.0);
        let mut list = Vec::new();
        for by in 0..grid.side() {
            for bx in 0..grid.side() {
                grid.bucket_candidates(bx, by, &mut list);
                assert!(list.len() < 40);
                let (lo, c) = grid.bucket_square(bx, by);
                for _ in 0..50 {
                    let q = Point2::new(lo.x + c * rng.random::<f64>(), lo.y + c * rng.random::<f64>());
                    let (j, _) = brute_nearest(&pts, q);
                    assert!(list.iter().any(|e| e.1 as usize == j));
                }
            }
        }
    }

    #[test]
    fn empty_and_single_point() {
        let g = BucketGrid::new(&[], Point2::ORIGIN, 1.0, 0.1);
        assert!(g.nearest(Point2::ORIGIN).is_none());
        assert!(!g.any_closer(Point2::ORIGIN, 1e9));
        let g = BucketGrid::new(&[Point2::new(0.9, 0.9)], Point2::ORIGIN, 1.0, 0.1);
        assert_eq!(g.nearest(Point2::new(-0.9, -0.9)).unwrap().0, 0);
    }

    proptest! {
        #[test]
        fn sparse_grids_match_brute_force(
            raw in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..40),
            qx in -6.0f64..6.0, qy in -6.0f64..6.0, cell in 0.2f64..3.0,
        ) {
            let pts: Vec<Point2> = raw.iter().map(|&(x, y)| Point2::new(x, y)).collect();
            let grid = BucketGrid::new(&pts, Point2::ORIGIN, 5.0, cell);
            let q = Point2::new(qx, qy);
            let (_, d) = grid.nearest(q).unwrap();
            prop_assert_eq!(d, brute_nearest(&pts, q).1);
            prop_assert!(!grid.any_closer(q, d));
            prop_assert!(grid.any_closer(q, d * 1.001 + 1e-12));
        }
    }
}
