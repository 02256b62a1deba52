//! kd-tree for exact nearest-neighbor queries over 3D points.
//!
//! Ties on distance resolve to the lowest point index, matching a linear
//! scan, so accelerated queries are interchangeable with brute force.

use crate::cloud::Point3;

#[derive(Debug, Clone)]
struct Node {
    /// Index into the original point array.
    point: usize,
    axis: usize,
    left: Option<usize>,
    right: Option<usize>,
}

/// Static kd-tree over a borrowed point set.
#[derive(Debug, Clone)]
pub struct KdTree3 {
    points: Vec<Point3>,
    nodes: Vec<Node>,
    root: Option<usize>,
}

pub fn squared_distance(a: Point3, b: Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

impl KdTree3 {
    pub fn build(points: &[Point3]) -> Self {
        let mut indices: Vec<usize> = (0..points.len()).collect();
        let mut tree = Self {
            points: points.to_vec(),
            nodes: Vec::with_capacity(points.len()),
            root: None,
        };
        tree.root = tree.build_recursive(&mut indices, 0);
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build_recursive(&mut self, indices: &mut [usize], depth: usize) -> Option<usize> {
        if indices.is_empty() {
            return None;
        }
        let axis = depth % 3;
        let median = indices.len() / 2;
        // Tie-break on index keeps the build deterministic for duplicate
        // coordinates.
        indices.select_nth_unstable_by(median, |&a, &b| {
            self.points[a][axis]
                .partial_cmp(&self.points[b][axis])
                .unwrap()
                .then(a.cmp(&b))
        });
        let point = indices[median];
        let node_index = self.nodes.len();
        self.nodes.push(Node {
            point,
            axis,
            left: None,
            right: None,
        });
        let (left_slice, rest) = indices.split_at_mut(median);
        let right_slice = &mut rest[1..];
        let left = self.build_recursive(left_slice, depth + 1);
        let right = self.build_recursive(right_slice, depth + 1);
        self.nodes[node_index].left = left;
        self.nodes[node_index].right = right;
        Some(node_index)
    }

    /// Index of and squared distance to the nearest point. Empty tree
    /// returns `None`.
    pub fn nearest(&self, query: Point3) -> Option<(usize, f64)> {
        let root = self.root?;
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(root, query, &mut best);
        Some(best)
    }

    fn search(&self, node_index: usize, query: Point3, best: &mut (usize, f64)) {
        let node = &self.nodes[node_index];
        let p = self.points[node.point];
        let d2 = squared_distance(p, query);
        if d2 < best.1 || (d2 == best.1 && node.point < best.0) {
            *best = (node.point, d2);
        }
        let delta = query[node.axis] - p[node.axis];
        let (near, far) = if delta < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        if let Some(near) = near {
            self.search(near, query, best);
        }
        if let Some(far) = far {
            // The far side can still hold an equal-distance lower index, so
            // descend on exact equality too.
            if delta * delta <= best.1 {
                self.search(far, query, best);
            }
        }
    }

    /// Indices of the `k` nearest points (excluding exact `skip` index when
    /// given), ordered by ascending distance with index tie-break.
    pub fn k_nearest(&self, query: Point3, k: usize, skip: Option<usize>) -> Vec<(usize, f64)> {
        if k == 0 || self.root.is_none() {
            return Vec::new();
        }
        // Max-heap behavior on a small sorted vec; k is small in practice.
        let mut heap: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        self.knn_search(self.root.unwrap(), query, k, skip, &mut heap);
        heap.into_iter().map(|(d2, i)| (i, d2)).collect()
    }

    fn knn_search(
        &self,
        node_index: usize,
        query: Point3,
        k: usize,
        skip: Option<usize>,
        heap: &mut Vec<(f64, usize)>,
    ) {
        let node = &self.nodes[node_index];
        if skip != Some(node.point) {
            let d2 = squared_distance(self.points[node.point], query);
            let entry = (d2, node.point);
            let at = heap.partition_point(|&e| e < entry);
            if at < k {
                heap.insert(at, entry);
                heap.truncate(k);
            }
        }
        let p = self.points[node.point];
        let delta = query[node.axis] - p[node.axis];
        let (near, far) = if delta < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        if let Some(near) = near {
            self.knn_search(near, query, k, skip, heap);
        }
        if let Some(far) = far {
            let worst = if heap.len() < k {
                f64::INFINITY
            } else {
                heap[heap.len() - 1].0
            };
            if delta * delta <= worst {
                self.knn_search(far, query, k, skip, heap);
            }
        }
    }
}
