//! Static 3-d tree over a borrowed point slice. Exact k-nearest and radius
//! queries; used by the statistical filter, DBSCAN and gap measurement.

use std::cmp::Ordering;

use super::Vec3;
use crate::scalar::Real;

const LEAF_SIZE: usize = 16;

#[derive(Debug)]
enum Node<T> {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: T,
        left: usize,
        right: usize,
    },
}

#[derive(Debug)]
pub struct KdTree<'a, T> {
    points: &'a [Vec3<T>],
    /// Tree position → original index.
    order: Vec<usize>,
    /// Points copied in tree order so leaves scan contiguous memory.
    sorted: Vec<Vec3<T>>,
    nodes: Vec<Node<T>>,
}

/// Bounded candidate list kept sorted by `(distance², index)`.
struct Knn<T> {
    k: usize,
    items: Vec<(T, usize)>,
}

impl<T: Real> Knn<T> {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    #[inline]
    fn worst(&self) -> T {
        if self.items.len() < self.k {
            T::infinity()
        } else {
            self.items[self.k - 1].0
        }
    }

    #[inline]
    fn offer(&mut self, d2: T, index: usize) {
        let full = self.items.len() == self.k;
        if full {
            let (wd, wi) = self.items[self.k - 1];
            if d2 > wd || (d2 == wd && index > wi) {
                return;
            }
        }
        let pos = self.items.partition_point(|&(d, i)| d < d2 || (d == d2 && i < index));
        if full {
            self.items.pop();
        }
        self.items.insert(pos, (d2, index));
    }
}

impl<'a, T: Real> KdTree<'a, T> {
    pub fn build(points: &'a [Vec3<T>]) -> Self {
        let mut tree = Self {
            points,
            order: (0..points.len()).collect(),
            sorted: Vec::new(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build_node(0, points.len());
        }
        tree.sorted = tree.order.iter().map(|&i| points[i]).collect();
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let (lo, hi) = self.order[start..end].iter().fold(
            (self.points[self.order[start]], self.points[self.order[start]]),
            |(lo, hi), &i| (lo.component_min(self.points[i]), hi.component_max(self.points[i])),
        );
        let extent = hi - lo;
        let axis = if extent.x >= extent.y && extent.x >= extent.z {
            0
        } else if extent.y >= extent.z {
            1
        } else {
            2
        };
        let mid = start + (end - start) / 2;
        let points = self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis]
                .partial_cmp(&points[b][axis])
                .unwrap_or(Ordering::Equal)
        });
        let value = points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// The `k` nearest points to `query` as `(index, squared distance)`,
    /// nearest first; ties go to the lower index. `exclude` skips one index
    /// (the query point itself).
    pub fn nearest(&self, query: Vec3<T>, k: usize, exclude: Option<usize>) -> Vec<(usize, T)> {
        if k == 0 || self.nodes.is_empty() {
            return Vec::new();
        }
        let mut knn = Knn::new(k);
        let mut off = [T::zero(); 3];
        self.nearest_rec(0, query, T::zero(), &mut off, exclude, &mut knn);
        knn.items.into_iter().map(|(d, i)| (i, d)).collect()
    }

    /// Mean distance from every point to its `k` nearest other points,
    /// indexed like the input.
    ///
    /// Queries run in tree order. The previous query's `k` neighbors plus
    /// the previous query itself lie within `r_prev + |q - prev|` of the
    /// current query `q`, which bounds its k-th neighbor distance; the search
    /// is then a radius gather plus a selection.
    pub fn mean_knn_distances(&self, k: usize) -> Vec<T> {
        let n = self.points.len();
        let mut out = vec![T::zero(); n];
        if k == 0 || n <= k {
            for (i, o) in out.iter_mut().enumerate() {
                let nb = self.nearest(self.points[i], k, Some(i));
                if !nb.is_empty() {
                    *o = nb.iter().map(|&(_, d2)| d2.sqrt()).sum::<T>() / T::from_count(nb.len());
                }
            }
            return out;
        }
        let kf = T::from_count(k);
        let mut found: Vec<T> = Vec::new();
        let mut prev: Option<(Vec3<T>, T)> = None;
        for (pos, &orig) in self.order.iter().enumerate() {
            let q = self.sorted[pos];
            let kth = match prev {
                None => {
                    let nb = self.nearest(q, k, Some(orig));
                    out[orig] = nb.iter().map(|&(_, d2)| d2.sqrt()).sum::<T>() / kf;
                    nb[k - 1].1.sqrt()
                }
                Some((p, r)) => {
                    let bound = r + (q - p).norm();
                    // widen by a hair so rounding cannot drop the k-th neighbor
                    let r2 = bound * bound * (T::one() + T::epsilon() * T::lit(16.0));
                    found.clear();
                    let mut off = [T::zero(); 3];
                    self.gather_rec(0, q, r2, T::zero(), &mut off, orig, &mut found);
                    let (_, kth, _) = found.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
                    let kth = *kth;
                    out[orig] = found[..k].iter().map(|d2| d2.sqrt()).sum::<T>() / kf;
                    kth.sqrt()
                }
            };
            prev = Some((q, kth));
        }
        out
    }

    fn gather_rec(&self, node: usize, query: Vec3<T>, r2: T, rd: T, off: &mut [T; 3], exclude: usize, found: &mut Vec<T>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for pos in start..end {
                    let d2 = self.sorted[pos].distance_squared(query);
                    if d2 <= r2 && self.order[pos] != exclude {
                        found.push(d2);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < T::zero() {
                    (left, right)
                } else {
                    (right, left)
                };
                self.gather_rec(near, query, r2, rd, off, exclude, found);
                let old = off[axis];
                let far_rd = rd - old * old + diff * diff;
                if far_rd <= r2 {
                    off[axis] = diff;
                    self.gather_rec(far, query, r2, far_rd, off, exclude, found);
                    off[axis] = old;
                }
            }
        }
    }

    fn nearest_rec(&self, node: usize, query: Vec3<T>, rd: T, off: &mut [T; 3], exclude: Option<usize>, knn: &mut Knn<T>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for pos in start..end {
                    let i = self.order[pos];
                    if Some(i) != exclude {
                        knn.offer(self.sorted[pos].distance_squared(query), i);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < T::zero() {
                    (left, right)
                } else {
                    (right, left)
                };
                self.nearest_rec(near, query, rd, off, exclude, knn);
                // incremental lower bound on the squared distance to the far cell
                let old = off[axis];
                let far_rd = rd - old * old + diff * diff;
                if far_rd <= knn.worst() {
                    off[axis] = diff;
                    self.nearest_rec(far, query, far_rd, off, exclude, knn);
                    off[axis] = old;
                }
            }
        }
    }

    /// Indices of all points with `|p − query| ≤ radius`, ascending.
    pub fn within(&self, query: Vec3<T>, radius: T) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.nodes.is_empty() {
            self.within_rec(0, query, radius * radius, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn within_rec(&self, node: usize, query: Vec3<T>, r2: T, out: &mut Vec<usize>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                out.extend(
                    (start..end)
                        .filter(|&pos| self.sorted[pos].distance_squared(query) <= r2)
                        .map(|pos| self.order[pos]),
                );
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < T::zero() {
                    (left, right)
                } else {
                    (right, left)
                };
                self.within_rec(near, query, r2, out);
                if diff * diff <= r2 {
                    self.within_rec(far, query, r2, out);
                }
            }
        }
    }

    /// Squared distance from `query` to the nearest stored point.
    pub fn nearest_distance_squared(&self, query: Vec3<T>) -> Option<T> {
        self.nearest(query, 1, None).first().map(|&(_, d)| d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(n: usize, seed: u64) -> Vec<Vec3<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Vec3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>() * 0.1))
            .collect()
    }

    #[test]
    fn knn_matches_brute_force() {
        let pts = random_cloud(700, 3);
        let tree = KdTree::build(&pts);
        for q in 0..50 {
            let got = tree.nearest(pts[q], 12, Some(q));
            let mut brute: Vec<(usize, f64)> = (0..pts.len())
                .filter(|&i| i != q)
                .map(|i| (i, pts[i].distance_squared(pts[q])))
                .collect();
            brute.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
            brute.truncate(12);
            assert_eq!(got, brute);
        }
    }

    #[test]
    fn mean_knn_matches_brute_force() {
        let mut pts = random_cloud(600, 5);
        // duplicates and a far straggler stress the carried bound
        pts.extend_from_slice(&pts[..40].to_vec());
        pts.push(Vec3::new(50.0, 0.0, 0.0));
        let tree = KdTree::build(&pts);
        for k in [1, 7, 50] {
            let got = tree.mean_knn_distances(k);
            for (q, &g) in got.iter().enumerate() {
                let mut d: Vec<f64> = (0..pts.len()).filter(|&i| i != q).map(|i| pts[i].distance(pts[q])).collect();
                d.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let want = d[..k].iter().sum::<f64>() / k as f64;
                assert!((g - want).abs() <= 1e-12 * want.max(1.0), "k {k} q {q}: {g} vs {want}");
            }
        }
    }

    #[test]
    fn radius_matches_brute_force() {
        let pts = random_cloud(500, 9);
        let tree = KdTree::build(&pts);
        for q in 0..40 {
            let got = tree.within(pts[q], 0.08);
            let brute: Vec<usize> = (0..pts.len())
                .filter(|&i| pts[i].distance(pts[q]) <= 0.08)
                .collect();
            assert_eq!(got, brute);
        }
    }

    #[test]
    fn empty_tree_answers_nothing() {
        let pts: Vec<Vec3<f32>> = Vec::new();
        let tree = KdTree::build(&pts);
        assert!(tree.nearest(Vec3::zero(), 3, None).is_empty());
        assert!(tree.within(Vec3::zero(), 1.0).is_empty());
    }
}

