//! 2D Delaunay triangulation via incremental Bowyer-Watson insertion.
//!
//! Exact duplicate points are merged before triangulation (keeping the first
//! occurrence). Collinear inputs yield an empty triangulation. The
//! implementation uses a large enclosing triangle whose vertices are removed
//! at the end; triangle and edge lists are emitted in sorted index order so
//! downstream processing is deterministic.

use std::collections::{BTreeSet, HashMap};

use crate::error::{FsuError, Result};

/// Triangulation of deduplicated planar points.
#[derive(Debug, Clone)]
pub struct Triangulation2D {
    /// Deduplicated input points, in first-occurrence order.
    pub vertices: Vec<[f64; 2]>,
    /// Vertex index triples, each sorted ascending; the list itself sorted.
    pub triangles: Vec<[usize; 3]>,
    /// Deduplicated undirected edges as ascending index pairs, sorted.
    pub edges: Vec<[usize; 2]>,
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Strictly-inside circumcircle test for the triangle `(a, b, c)` (any
/// orientation) against point `p`.
fn in_circumcircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], p: [f64; 2]) -> bool {
    let (adx, ady) = (a[0] - p[0], a[1] - p[1]);
    let (bdx, bdy) = (b[0] - p[0], b[1] - p[1]);
    let (cdx, cdy) = (c[0] - p[0], c[1] - p[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    let det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx)
        + ad * (bdx * cdy - bdy * cdx);
    // det > 0 when p is inside for counterclockwise (a, b, c); flip the sign
    // for clockwise triangles.
    if orient(a, b, c) >= 0.0 {
        det > 0.0
    } else {
        det < 0.0
    }
}

/// Builds the Delaunay triangulation of `points`.
///
/// Errors with [`FsuError::UntriangulatableBlock`] when fewer than 3 distinct
/// points remain after exact-duplicate removal.
pub fn delaunay2d(points: &[[f64; 2]]) -> Result<Triangulation2D> {
    // Exact-duplicate removal, first occurrence wins.
    let mut seen: HashMap<(u64, u64), ()> = HashMap::with_capacity(points.len());
    let mut vertices: Vec<[f64; 2]> = Vec::with_capacity(points.len());
    for &p in points {
        let key = (p[0].to_bits(), p[1].to_bits());
        if seen.insert(key, ()).is_none() {
            vertices.push(p);
        }
    }
    if vertices.len() < 3 {
        return Err(FsuError::UntriangulatableBlock);
    }

    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in &vertices {
        min_x = min_x.min(v[0]);
        max_x = max_x.max(v[0]);
        min_y = min_y.min(v[1]);
        max_y = max_y.max(v[1]);
    }
    let cx = 0.5 * (min_x + max_x);
    let cy = 0.5 * (min_y + max_y);
    let span = (max_x - min_x).max(max_y - min_y).max(1e-12);
    // Enclosing triangle far outside the data, with generic (non-axis-
    // aligned) edge slopes so grid-aligned inputs cannot become collinear
    // with its vertices.
    let big = 1024.0 * span;
    let s0 = [cx - 2.5 * big, cy - 1.75 * big];
    let s1 = [cx + 3.25 * big, cy - 1.5 * big];
    let s2 = [cx - 0.375 * big, cy + 3.125 * big];

    let n = vertices.len();
    let coord = |i: usize| -> [f64; 2] {
        match i {
            _ if i < n => vertices[i],
            _ if i == n => s0,
            _ if i == n + 1 => s1,
            _ => s2,
        }
    };

    let mut triangles: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    let mut bad: Vec<usize> = Vec::new();
    let mut boundary: HashMap<(usize, usize), (usize, usize, i32)> = HashMap::new();

    for p_idx in 0..n {
        let p = vertices[p_idx];

        bad.clear();
        for (t_idx, t) in triangles.iter().enumerate() {
            if in_circumcircle(coord(t[0]), coord(t[1]), coord(t[2]), p) {
                bad.push(t_idx);
            }
        }
        if bad.is_empty() {
            // The containing triangle's circumcircle always covers interior
            // points, so this only happens for a duplicate-after-rounding
            // degeneracy; skip the point rather than corrupting the mesh.
            continue;
        }

        // Cavity boundary: edges of bad triangles not shared by two of them.
        boundary.clear();
        for &t_idx in &bad {
            let t = triangles[t_idx];
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = (a.min(b), a.max(b));
                boundary
                    .entry(key)
                    .and_modify(|e| e.2 += 1)
                    .or_insert((a, b, 1));
            }
        }

        // Remove bad triangles (descending order keeps indices valid).
        for &t_idx in bad.iter().rev() {
            triangles.swap_remove(t_idx);
        }

        for &(a, b, count) in boundary.values() {
            if count == 1 {
                triangles.push([a, b, p_idx]);
            }
        }
    }

    let mut final_triangles: Vec<[usize; 3]> = triangles
        .into_iter()
        .filter(|t| t.iter().all(|&v| v < n))
        .map(|mut t| {
            t.sort_unstable();
            t
        })
        .collect();
    final_triangles.sort_unstable();
    final_triangles.dedup();

    let mut edge_set: BTreeSet<[usize; 2]> = BTreeSet::new();
    for t in &final_triangles {
        edge_set.insert([t[0], t[1]]);
        edge_set.insert([t[1], t[2]]);
        edge_set.insert([t[0], t[2]]);
    }

    Ok(Triangulation2D {
        vertices,
        triangles: final_triangles,
        edges: edge_set.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent empty-circumcircle check via explicit circumcenter
    /// computation.
    pub(crate) fn circumcircle_violations(tri: &Triangulation2D, tolerance: f64) -> usize {
        let mut violations = 0;
        for t in &tri.triangles {
            let a = tri.vertices[t[0]];
            let b = tri.vertices[t[1]];
            let c = tri.vertices[t[2]];
            let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
            if d.abs() < 1e-300 {
                violations += 1;
                continue;
            }
            let a2 = a[0] * a[0] + a[1] * a[1];
            let b2 = b[0] * b[0] + b[1] * b[1];
            let c2 = c[0] * c[0] + c[1] * c[1];
            let ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d;
            let uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d;
            let radius = ((a[0] - ux).powi(2) + (a[1] - uy).powi(2)).sqrt();
            for (i, v) in tri.vertices.iter().enumerate() {
                if t.contains(&i) {
                    continue;
                }
                let dist = ((v[0] - ux).powi(2) + (v[1] - uy).powi(2)).sqrt();
                if dist < radius - tolerance {
                    violations += 1;
                }
            }
        }
        violations
    }

    #[test]
    fn three_points_make_one_triangle() {
        let tri = delaunay2d(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(tri.triangles, vec![[0, 1, 2]]);
        assert_eq!(tri.edges.len(), 3);
    }

    #[test]
    fn unit_square_splits_into_two_triangles() {
        let tri = delaunay2d(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_eq!(tri.triangles.len(), 2);
        assert_eq!(tri.edges.len(), 5);
        assert_eq!(circumcircle_violations(&tri, 1e-9), 0);
    }

    #[test]
    fn random_points_satisfy_empty_circumcircle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let points: Vec<[f64; 2]> = (0..100).map(|_| [rng.gen(), rng.gen()]).collect();
        let tri = delaunay2d(&points).unwrap();
        assert_eq!(tri.vertices.len(), 100);
        assert!(tri.triangles.len() > 150);
        assert_eq!(circumcircle_violations(&tri, 1e-9), 0);
        // Every edge belongs to at least one triangle by construction; check
        // the inverse: triangle edges are all present.
        let edge_set: std::collections::BTreeSet<[usize; 2]> =
            tri.edges.iter().copied().collect();
        for t in &tri.triangles {
            assert!(edge_set.contains(&[t[0], t[1]]));
            assert!(edge_set.contains(&[t[1], t[2]]));
            assert!(edge_set.contains(&[t[0], t[2]]));
        }
    }

    #[test]
    fn grid_points_triangulate_cleanly() {
        let mut points = Vec::new();
        for i in 0..8 {
            for j in 0..8 {
                points.push([i as f64 * 0.125, j as f64 * 0.125]);
            }
        }
        let tri = delaunay2d(&points).unwrap();
        // 7x7 cells, two triangles each.
        assert_eq!(tri.triangles.len(), 98);
        assert_eq!(circumcircle_violations(&tri, 1e-9), 0);
    }

    #[test]
    fn collinear_points_yield_empty_triangulation() {
        let points: Vec<[f64; 2]> = (0..10).map(|i| [i as f64 * 0.1, 0.5]).collect();
        let tri = delaunay2d(&points).unwrap();
        assert!(tri.triangles.is_empty());
        assert!(tri.edges.is_empty());
    }

    #[test]
    fn duplicates_are_merged_keeping_first() {
        let tri = delaunay2d(&[
            [0.0, 0.0],
            [1.0, 0.0],
            [0.0, 0.0],
            [0.0, 1.0],
            [1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(tri.vertices, vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(tri.triangles.len(), 1);
    }

    #[test]
    fn too_few_distinct_points_error() {
        assert!(matches!(
            delaunay2d(&[[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]]),
            Err(FsuError::UntriangulatableBlock)
        ));
    }
}
