//! Minimal 2D kd-tree for bounded range/nearest queries over scan
//! positions.

/// Balanced kd-tree over (x, y) points; indices refer to the original
/// point slice.
pub struct KdTree2 {
    points: Vec<(f64, f64)>,
    // nodes[i] = (point index, split axis); laid out as an implicit
    // median-split tree over `order`.
    order: Vec<usize>,
}

impl KdTree2 {
    pub fn build(points: &[(f64, f64)]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut tree = Self { points: points.to_vec(), order: Vec::new() };
        Self::build_rec(&tree.points, &mut order, 0);
        tree.order = order;
        tree
    }

    fn build_rec(points: &[(f64, f64)], idx: &mut [usize], depth: usize) {
        if idx.len() <= 1 {
            return;
        }
        let axis = depth % 2;
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| {
            let ka = if axis == 0 { points[a].0 } else { points[a].1 };
            let kb = if axis == 0 { points[b].0 } else { points[b].1 };
            ka.partial_cmp(&kb).unwrap()
        });
        let (lo, rest) = idx.split_at_mut(mid);
        let (_, hi) = rest.split_at_mut(1);
        Self::build_rec(points, lo, depth + 1);
        Self::build_rec(points, hi, depth + 1);
    }

    /// Up to `top_n` nearest points with distance in [d_min, d_max]
    /// (inclusive), excluding `exclude`, sorted by ascending distance.
    /// Ties in distance break by ascending index so results are
    /// deterministic.
    pub fn neighbors_in_range(
        &self,
        query: (f64, f64),
        d_min: f64,
        d_max: f64,
        top_n: usize,
        exclude: usize,
    ) -> Vec<(usize, f64)> {
        let mut heap: Vec<(usize, f64)> = Vec::with_capacity(top_n + 1);
        self.search(&self.order, 0, query, d_min, d_max, top_n, exclude, &mut heap);
        heap.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        heap
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        idx: &[usize],
        depth: usize,
        query: (f64, f64),
        d_min: f64,
        d_max: f64,
        top_n: usize,
        exclude: usize,
        best: &mut Vec<(usize, f64)>,
    ) {
        if idx.is_empty() {
            return;
        }
        let mid = idx.len() / 2;
        let node = idx[mid];
        let p = self.points[node];
        let dist = ((p.0 - query.0).powi(2) + (p.1 - query.1).powi(2)).sqrt();
        if node != exclude && dist >= d_min && dist <= d_max {
            best.push((node, dist));
            if best.len() > top_n {
                // Drop the current worst; ties keep the smaller index.
                let worst = best
                    .iter()
                    .enumerate()
                    .max_by(|(_, a), (_, b)| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
                    .map(|(i, _)| i)
                    .unwrap();
                best.swap_remove(worst);
            }
        }
        let axis = depth % 2;
        let (qk, pk) = if axis == 0 { (query.0, p.0) } else { (query.1, p.1) };
        let delta = qk - pk;
        let (near, far) = if delta < 0.0 {
            (&idx[..mid], &idx[mid + 1..])
        } else {
            (&idx[mid + 1..], &idx[..mid])
        };
        self.search(near, depth + 1, query, d_min, d_max, top_n, exclude, best);
        // Prune the far side only when the splitting plane is beyond the
        // current search radius.
        let radius = if best.len() < top_n {
            d_max
        } else {
            best.iter().map(|v| v.1).fold(0.0, f64::max).min(d_max)
        };
        if delta.abs() <= radius {
            self.search(far, depth + 1, query, d_min, d_max, top_n, exclude, best);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn brute_force(
        points: &[(f64, f64)],
        q: (f64, f64),
        d_min: f64,
        d_max: f64,
        top_n: usize,
        exclude: usize,
    ) -> Vec<(usize, f64)> {
        let mut all: Vec<(usize, f64)> = points
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != exclude)
            .map(|(i, p)| (i, ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()))
            .filter(|&(_, d)| d >= d_min && d <= d_max)
            .collect();
        all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        all.truncate(top_n);
        all
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let points: Vec<(f64, f64)> =
            (0..400).map(|_| (rng.gen::<f64>() * 100.0, rng.gen::<f64>() * 100.0)).collect();
        let tree = KdTree2::build(&points);
        for i in (0..points.len()).step_by(13) {
            let got = tree.neighbors_in_range(points[i], 2.0, 15.0, 8, i);
            let want = brute_force(&points, points[i], 2.0, 15.0, 8, i);
            assert_eq!(got, want, "mismatch at query {i}");
        }
    }

    #[test]
    fn empty_result_when_range_excludes_all() {
        let points = vec![(0.0, 0.0), (1.0, 0.0)];
        let tree = KdTree2::build(&points);
        assert!(tree.neighbors_in_range((0.0, 0.0), 5.0, 10.0, 4, 0).is_empty());
    }
}
