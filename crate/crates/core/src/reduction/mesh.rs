//! Closed triangulated surfaces for quadrature.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt::Write as _;

/// How triangles are mapped onto the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    /// Flat triangles between the vertices.
    Polyhedral,
    /// Triangles projected radially onto the sphere of this radius.
    Sphere { radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    pub level: u32,
    pub surface: Surface,
}

fn normalize(v: [f64; 3], r: f64) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [r * v[0] / n, r * v[1] / n, r * v[2] / n]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl SurfaceMesh {
    /// Unit icosphere: the icosahedron subdivided `level` times, with new
    /// vertices pushed to the sphere. Triangles are counterclockwise seen
    /// from outside; level `L` has `20 · 4^L` triangles.
    pub fn icosphere(level: u32) -> SurfaceMesh {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let raw = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ];
        let mut vertices: Vec<[f64; 3]> = raw.iter().map(|v| normalize(*v, 1.0)).collect();
        let mut triangles: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..level {
            let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
            let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>| -> usize {
                let key = (a.min(b), a.max(b));
                *midpoints.entry(key).or_insert_with(|| {
                    let (p, q) = (vertices[a], vertices[b]);
                    vertices.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]], 1.0));
                    vertices.len() - 1
                })
            };
            let mut next = Vec::with_capacity(triangles.len() * 4);
            for [a, b, c] in triangles {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            triangles = next;
        }
        SurfaceMesh {
            vertices,
            triangles,
            level,
            surface: Surface::Sphere { radius: 1.0 },
        }
    }

    /// The same surface with every triangle's orientation flipped.
    pub fn reversed(&self) -> SurfaceMesh {
        SurfaceMesh {
            triangles: self.triangles.iter().map(|[a, b, c]| [*a, *c, *b]).collect(),
            ..self.clone()
        }
    }

    /// Every edge is shared by exactly two triangles, traversed oppositely.
    pub fn check_closed_oriented(&self) -> Result<()> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, t) in self.triangles.iter().enumerate() {
            for e in 0..3 {
                let edge = (t[e], t[(e + 1) % 3]);
                if directed.insert(edge, k).is_some() {
                    return Err(Error::Invariant(format!("edge {edge:?} traversed twice in the same direction")));
                }
            }
        }
        for (a, b) in directed.keys() {
            if !directed.contains_key(&(*b, *a)) {
                return Err(Error::Invariant(format!("edge ({a}, {b}) has no opposite")));
            }
        }
        Ok(())
    }

    /// `+1` when triangles face away from the origin, `-1` when all face
    /// toward it, `0` when mixed.
    pub fn outward_sign(&self) -> i32 {
        let signs: Vec<f64> = self
            .triangles
            .iter()
            .map(|[a, b, c]| {
                let (p, q, r) = (self.vertices[*a], self.vertices[*b], self.vertices[*c]);
                dot(cross(sub(q, p), sub(r, p)), p).signum()
            })
            .collect();
        if signs.iter().all(|s| *s > 0.0) {
            1
        } else if signs.iter().all(|s| *s < 0.0) {
            -1
        } else {
            0
        }
    }

    /// Surface point and its two tangent vectors at barycentric-style
    /// parameters `(u, v)` of triangle `k`: `Φ(u, v) = π(A + u(B-A) + v(C-A))`.
    pub fn chart_point(&self, k: usize, u: f64, v: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let [a, b, c] = self.triangles[k];
        let (a, b, c) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let e1 = sub(b, a);
        let e2 = sub(c, a);
        let p = [
            a[0] + u * e1[0] + v * e2[0],
            a[1] + u * e1[1] + v * e2[1],
            a[2] + u * e1[2] + v * e2[2],
        ];
        match self.surface {
            Surface::Polyhedral => (p, e1, e2),
            Surface::Sphere { radius } => {
                let n = dot(p, p).sqrt();
                let x = normalize(p, 1.0);
                // derivative of r·p/|p| along w: r (w - x (x·w)) / |p|
                let d = |w: [f64; 3]| {
                    let c = dot(x, w);
                    [
                        radius * (w[0] - x[0] * c) / n,
                        radius * (w[1] - x[1] * c) / n,
                        radius * (w[2] - x[2] * c) / n,
                    ]
                };
                ([radius * x[0], radius * x[1], radius * x[2]], d(e1), d(e2))
            }
        }
    }

    /// Object File Format text.
    pub fn to_off(&self) -> String {
        let mut out = format!("OFF\n{} {} 0\n", self.vertices.len(), self.triangles.len());
        for v in &self.vertices {
            let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", v[0], v[1], v[2]);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts_and_topology() {
        for level in 0..4 {
            let m = SurfaceMesh::icosphere(level);
            assert_eq!(m.triangles.len(), 20 * 4usize.pow(level));
            // Euler characteristic of the sphere
            let edges = 3 * m.triangles.len() / 2;
            assert_eq!(m.vertices.len() as i64 - edges as i64 + m.triangles.len() as i64, 2);
            m.check_closed_oriented().unwrap();
            assert_eq!(m.outward_sign(), 1);
            assert_eq!(m.reversed().outward_sign(), -1);
        }
    }

    #[test]
    fn broken_orientation_detected() {
        let mut m = SurfaceMesh::icosphere(0);
        m.triangles[3].swap(0, 1);
        assert!(m.check_closed_oriented().is_err());
    }

    #[test]
    fn off_header() {
        let m = SurfaceMesh::icosphere(1);
        assert!(m.to_off().starts_with("OFF\n42 80 0\n"));
    }
}
