//! Density-based clustering.
//!
//! A point is *core* when at least `min_points` points (itself included) lie
//! within `eps`. Clusters are the connected components of core points under
//! the `eps` relation, numbered by their lowest core index. A non-core point
//! within `eps` of a core point is a border point and takes the smallest
//! label among its core neighbors; everything else is noise.

use std::collections::VecDeque;

use super::kdtree::KdTree;
use super::PointCloud;
use crate::scalar::Real;

pub const NOISE: i32 = -1;

pub fn dbscan<T: Real>(cloud: &PointCloud<T>, eps: T, min_points: usize) -> Vec<i32> {
    assert!(eps > T::zero(), "eps must be positive");
    assert!(min_points >= 1, "min_points must be at least 1");
    let n = cloud.len();
    let tree = KdTree::build(&cloud.points);
    let neighbors: Vec<Vec<usize>> = cloud.points.iter().map(|&p| tree.within(p, eps)).collect();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_points).collect();

    let mut labels = vec![NOISE; n];
    let mut next = 0i32;
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if !core[seed] || labels[seed] != NOISE {
            continue;
        }
        labels[seed] = next;
        queue.push_back(seed);
        while let Some(p) = queue.pop_front() {
            for &q in &neighbors[p] {
                if core[q] && labels[q] == NOISE {
                    labels[q] = next;
                    queue.push_back(q);
                }
            }
        }
        next += 1;
    }
    for i in 0..n {
        if core[i] {
            continue;
        }
        labels[i] = neighbors[i]
            .iter()
            .filter(|&&q| core[q])
            .map(|&q| labels[q])
            .min()
            .unwrap_or(NOISE);
    }
    labels
}
