//! Uniform grid hashing over point sets of any dimension.

use std::collections::HashMap;

use crate::numerics::Vector;

/// Buckets points into cubes of side `cell`. Radius queries visit the
/// 3^d neighbouring cells, so `cell` should be at least the query radius.
#[derive(Debug, Clone)]
pub struct SpatialHash {
    cell: f64,
    dim: usize,
    points: Vec<Vector>,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl SpatialHash {
    pub fn new(points: Vec<Vector>, cell: f64) -> Self {
        assert!(cell > 0.0, "cell size must be positive");
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(key(p, cell)).or_default().push(i);
        }
        Self {
            cell,
            dim,
            points,
            buckets,
        }
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    /// Indices of all points within `radius` of `q`, in increasing index order.
    pub fn within(&self, q: &Vector, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit(q, radius, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    /// Closest point within `radius`, as (index, distance). Ties resolve to
    /// the lowest index.
    pub fn nearest_within(&self, q: &Vector, radius: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.visit(q, radius, |i, d| match best {
            Some((bi, bd)) if bd < d || (bd == d && bi < i) => {}
            _ => best = Some((i, d)),
        });
        best
    }

    fn visit<F: FnMut(usize, f64)>(&self, q: &Vector, radius: f64, mut f: F) {
        if self.points.is_empty() {
            return;
        }
        let reach = (radius / self.cell).ceil() as i64;
        let base = key(q, self.cell);
        let mut offset = vec![-reach; self.dim];
        loop {
            let k: Vec<i64> = base.iter().zip(&offset).map(|(b, o)| b + o).collect();
            if let Some(ids) = self.buckets.get(&k) {
                for &i in ids {
                    let d = (&self.points[i] - q).norm();
                    if d <= radius {
                        f(i, d);
                    }
                }
            }
            // odometer increment over the neighbour cube
            let mut axis = 0;
            loop {
                if axis == self.dim {
                    return;
                }
                offset[axis] += 1;
                if offset[axis] > reach {
                    offset[axis] = -reach;
                    axis += 1;
                } else {
                    break;
                }
            }
        }
    }
}

fn key(p: &Vector, cell: f64) -> Vec<i64> {
    p.iter().map(|x| (x / cell).floor() as i64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts() -> Vec<Vector> {
        (0..50)
            .map(|i| {
                let t = i as f64 * 0.37;
                Vector::from_vec(vec![t.cos() * 2.0, (1.3 * t).sin(), 0.1 * t])
            })
            .collect()
    }

    #[test]
    fn within_matches_brute_force() {
        let points = pts();
        let hash = SpatialHash::new(points.clone(), 0.3);
        let q = Vector::from_vec(vec![0.5, 0.2, 0.7]);
        for r in [0.1, 0.3, 0.8] {
            let brute: Vec<usize> = (0..points.len())
                .filter(|&i| (&points[i] - &q).norm() <= r)
                .collect();
            assert_eq!(hash.within(&q, r), brute);
        }
    }

    #[test]
    fn nearest_matches_brute_force() {
        let points = pts();
        let hash = SpatialHash::new(points.clone(), 0.25);
        let q = Vector::from_vec(vec![-1.0, 0.4, 2.0]);
        let (bi, bd) = (0..points.len())
            .map(|i| (i, (&points[i] - &q).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(hash.nearest_within(&q, 5.0), Some((bi, bd)));
        assert_eq!(hash.nearest_within(&q, bd * 0.5), None);
    }

    #[test]
    fn empty_hash() {
        let hash = SpatialHash::new(Vec::new(), 1.0);
        assert!(hash.within(&Vector::zeros(2), 1.0).is_empty());
    }
}
