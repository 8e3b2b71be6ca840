//! Planar polytope norms: the Minkowski gauge of a centrally symmetric
//! polygon and checks that a family acts on it as a Barabanov norm.

use std::f64::consts::TAU;
use std::fmt;

use crate::error::{invalid, Result};
use crate::growth::{MatrixFamily, ProductNorm};
use crate::matlib::Matrix;

/// Centrally symmetric convex polygon containing the origin in its interior.
#[derive(Clone, Debug, PartialEq)]
pub struct PolytopeNorm {
    /// Hull vertices in counter-clockwise order.
    vertices: Vec<[f64; 2]>,
    /// One functional per edge, equal to 1 on that edge.
    facets: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl PolytopeNorm {
    /// Convex hull of the given points. The point set must be symmetric under
    /// negation (to `1e-12` relative) and span the plane.
    pub fn from_vertices(points: &[[f64; 2]]) -> Result<Self> {
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return invalid("polytope vertices must be finite");
        }
        let scale = points
            .iter()
            .map(|p| p[0].abs().max(p[1].abs()))
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return invalid("polytope needs a nonzero vertex");
        }
        let tol = 1e-12 * scale;
        for p in points {
            let mirrored = points
                .iter()
                .any(|q| (p[0] + q[0]).abs() <= tol && (p[1] + q[1]).abs() <= tol);
            if !mirrored {
                return invalid(format!("vertex ({}, {}) has no mirror image", p[0], p[1]));
            }
        }

        // Andrew's monotone chain, dropping collinear points
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol);
        let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
                Box::new(pts.iter())
            } else {
                Box::new(pts.iter().rev())
            };
            for &p in iter {
                while hull.len() >= start + 2
                    && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= tol * scale
                {
                    hull.pop();
                }
                hull.push(p);
            }
            hull.pop();
        }
        if hull.len() < 3 {
            return invalid("polytope is degenerate (vertices are collinear)");
        }

        let mut facets = Vec::with_capacity(hull.len());
        for i in 0..hull.len() {
            let (u, v) = (hull[i], hull[(i + 1) % hull.len()]);
            // outward normal of a counter-clockwise edge
            let nrm = [v[1] - u[1], u[0] - v[0]];
            let c = nrm[0] * u[0] + nrm[1] * u[1];
            if c <= tol * scale {
                return invalid("origin is not interior to the polytope");
            }
            facets.push([nrm[0] / c, nrm[1] / c]);
        }
        Ok(Self {
            vertices: hull,
            facets,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn facet_functionals(&self) -> &[[f64; 2]] {
        &self.facets
    }

    /// Points on the unit sphere of the gauge: an angular grid of `samples`
    /// directions followed by every vertex.
    pub fn boundary_samples(&self, samples: usize) -> Vec<[f64; 2]> {
        let mut out: Vec<[f64; 2]> = (0..samples)
            .map(|j| {
                let (s, c) = (TAU * j as f64 / samples as f64).sin_cos();
                let g = gauge(self, [c, s]);
                [c / g, s / g]
            })
            .collect();
        out.extend_from_slice(&self.vertices);
        out
    }

    /// Induced operator norm of a 2x2 matrix, exact: the maximum over
    /// vertices of `gauge(m v)`.
    pub fn operator_gauge_norm(&self, m: &Matrix) -> Result<f64> {
        if m.rows() != 2 || m.cols() != 2 {
            return invalid("polytope norms act on 2x2 matrices only");
        }
        Ok(self
            .vertices
            .iter()
            .map(|v| gauge(self, apply(m, *v)))
            .fold(0.0, f64::max))
    }
}

impl ProductNorm for PolytopeNorm {
    fn norm(&self, m: &Matrix) -> f64 {
        self.operator_gauge_norm(m).unwrap_or(f64::NAN)
    }
}

fn apply(m: &Matrix, x: [f64; 2]) -> [f64; 2] {
    [
        m[(0, 0)] * x[0] + m[(0, 1)] * x[1],
        m[(1, 0)] * x[0] + m[(1, 1)] * x[1],
    ]
}

/// Parallelogram with vertices `+-(1, 0)` and `+-(1, -2/a)`, the unit ball
/// on which `[[1, a], [0, -1]]` is an isometry. Its gauge is
/// `max(|x|, |x + a y|)`.
pub fn build_parallelotope(a: f64) -> Result<PolytopeNorm> {
    if !(a > 0.0) || !a.is_finite() {
        return invalid(format!("parallelotope parameter must be positive, got {a}"));
    }
    let u2 = [1.0, -2.0 / a];
    PolytopeNorm::from_vertices(&[[1.0, 0.0], u2, [-1.0, 0.0], [-u2[0], -u2[1]]])
}

/// Minkowski gauge `min { t > 0 : x / t in P }`.
pub fn gauge(p: &PolytopeNorm, x: [f64; 2]) -> f64 {
    p.facets
        .iter()
        .map(|f| f[0] * x[0] + f[1] * x[1])
        .fold(0.0, f64::max)
}

/// Outcome of a sampled norm-identity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormCheck {
    pub holds: bool,
    /// Largest `|lhs - rhs|` over the sampled unit vectors.
    pub max_deviation: f64,
    pub points: usize,
}

impl fmt::Display for NormCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "holds: {}", self.holds)?;
        writeln!(f, "max_deviation: {:e}", self.max_deviation)?;
        write!(f, "points: {}", self.points)
    }
}

fn sampled_check(
    p: &PolytopeNorm,
    samples: usize,
    tol: f64,
    image: impl Fn([f64; 2]) -> f64,
) -> NormCheck {
    let pts = p.boundary_samples(samples);
    let max_deviation = pts
        .iter()
        .map(|&x| (image(x) - gauge(p, x)).abs())
        .fold(0.0, f64::max);
    NormCheck {
        holds: max_deviation <= tol,
        max_deviation,
        points: pts.len(),
    }
}

/// Does `gauge(m x) = gauge(x)` on sampled boundary points and all vertices?
pub fn is_invariant_isometry(
    p: &PolytopeNorm,
    m: &Matrix,
    samples: usize,
    tol: f64,
) -> Result<NormCheck> {
    if m.rows() != 2 || m.cols() != 2 {
        return invalid("polytope norms act on 2x2 matrices only");
    }
    Ok(sampled_check(p, samples, tol, |x| gauge(p, apply(m, x))))
}

/// Does `max_A gauge(A x) = gauge(x)` on sampled boundary points and all vertices?
pub fn is_barabanov(
    p: &PolytopeNorm,
    fam: &MatrixFamily,
    samples: usize,
    tol: f64,
) -> Result<NormCheck> {
    if fam.dim() != 2 {
        return invalid("polytope norms act on 2x2 matrices only");
    }
    Ok(sampled_check(p, samples, tol, |x| {
        fam.matrices()
            .iter()
            .map(|a| gauge(p, apply(a, x)))
            .fold(0.0, f64::max)
    }))
}
