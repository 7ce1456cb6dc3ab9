//! Two-dimensional rate regions: convex polytopes over `(R1, R2)` with
//! per-user and sum-rate constraints, convex hulls, unions, and the
//! Minkowski extension by a relay-link simplex.

use crate::error::{Error, Result};

/// A linear constraint `a1*R1 + a2*R2 <= bound` with `a1, a2 in {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub a1: u8,
    pub a2: u8,
    pub bound: f64,
}

impl Constraint {
    pub fn user1(bound: f64) -> Self {
        Constraint { a1: 1, a2: 0, bound }
    }
    pub fn user2(bound: f64) -> Self {
        Constraint { a1: 0, a2: 1, bound }
    }
    pub fn sum(bound: f64) -> Self {
        Constraint { a1: 1, a2: 1, bound }
    }

    pub fn holds(&self, p: [f64; 2], tol: f64) -> bool {
        self.a1 as f64 * p[0] + self.a2 as f64 * p[1] <= self.bound + tol
    }
}

/// A convex rate region in the nonnegative quadrant.
///
/// The vertex list (counter-clockwise hull, lexicographically smallest
/// vertex first) is the authoritative geometry; the constraint list is the
/// {0,1}-coefficient envelope, exact for pentagon-shaped regions and a
/// valid outer envelope otherwise.
#[derive(Debug, Clone)]
pub struct RateRegion {
    constraints: Vec<Constraint>,
    vertices: Vec<[f64; 2]>,
}

impl RateRegion {
    /// Region cut out by `R1 <= r1`, `R2 <= r2`, `R1 + R2 <= sum` in the
    /// nonnegative quadrant. Negative bounds collapse to the origin.
    pub fn from_pentagon(r1: f64, r2: f64, sum: f64) -> Result<Self> {
        for (name, v) in [("r1", r1), ("r2", r2), ("sum", sum)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "bound must be finite"));
            }
        }
        let s = sum.max(0.0);
        let a = r1.max(0.0).min(s);
        let b = r2.max(0.0).min(s);
        let mut pts = vec![[0.0, 0.0], [a, 0.0], [0.0, b]];
        if a + b > s {
            pts.push([a, s - a]);
            pts.push([s - b, b]);
        } else {
            pts.push([a, b]);
        }
        Ok(Self::assemble(
            vec![
                Constraint::user1(r1),
                Constraint::user2(r2),
                Constraint::sum(sum),
            ],
            pts,
        ))
    }

    /// Convex hull of the given points (the origin is always included so
    /// the region is nonempty).
    pub fn from_points(points: &[[f64; 2]]) -> Self {
        let mut pts: Vec<[f64; 2]> = points
            .iter()
            .filter(|p| p[0].is_finite() && p[1].is_finite())
            .copied()
            .collect();
        pts.push([0.0, 0.0]);
        let hull = convex_hull(pts);
        let r1 = hull.iter().map(|p| p[0]).fold(0.0_f64, f64::max);
        let r2 = hull.iter().map(|p| p[1]).fold(0.0_f64, f64::max);
        let s = hull.iter().map(|p| p[0] + p[1]).fold(0.0_f64, f64::max);
        Self::assemble(
            vec![
                Constraint::user1(r1),
                Constraint::user2(r2),
                Constraint::sum(s),
            ],
            hull,
        )
    }

    fn assemble(constraints: Vec<Constraint>, points: Vec<[f64; 2]>) -> Self {
        RateRegion {
            constraints,
            vertices: convex_hull(points),
        }
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Hull vertices, counter-clockwise, starting at the lexicographically
    /// smallest vertex.
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn max_r1(&self) -> f64 {
        self.vertices.iter().map(|p| p[0]).fold(0.0, f64::max)
    }

    pub fn max_r2(&self) -> f64 {
        self.vertices.iter().map(|p| p[1]).fold(0.0, f64::max)
    }

    pub fn max_sum(&self) -> f64 {
        self.vertices
            .iter()
            .map(|p| p[0] + p[1])
            .fold(0.0, f64::max)
    }

    /// Point-in-convex-polygon test with an absolute tolerance.
    pub fn contains_point(&self, p: [f64; 2], tol: f64) -> bool {
        let v = &self.vertices;
        if v.is_empty() {
            return false;
        }
        if v.len() == 1 {
            return (p[0] - v[0][0]).abs() <= tol && (p[1] - v[0][1]).abs() <= tol;
        }
        if v.len() == 2 {
            // Degenerate segment: distance to the segment within tol.
            return segment_distance(v[0], v[1], p) <= tol;
        }
        for i in 0..v.len() {
            let a = v[i];
            let b = v[(i + 1) % v.len()];
            if cross(a, b, p) < -tol * (1.0 + a[0].abs() + a[1].abs() + b[0].abs() + b[1].abs()) {
                return false;
            }
        }
        true
    }

    pub fn contains_region(&self, other: &RateRegion, tol: f64) -> bool {
        other.vertices.iter().all(|&p| self.contains_point(p, tol))
    }

    pub fn union(&self, other: &RateRegion) -> RateRegion {
        let pts: Vec<[f64; 2]> = self
            .vertices
            .iter()
            .chain(other.vertices.iter())
            .copied()
            .collect();
        RateRegion::from_points(&pts)
    }

    /// Minkowski sum with the simplex `{(d1, d2) : d1, d2 >= 0, d1 + d2 <= r0}`.
    pub fn minkowski_extend(&self, r0: f64) -> RateRegion {
        if r0 <= 0.0 {
            return self.clone();
        }
        let mut pts = Vec::with_capacity(self.vertices.len() * 3);
        for &v in &self.vertices {
            pts.push(v);
            pts.push([v[0] + r0, v[1]]);
            pts.push([v[0], v[1] + r0]);
        }
        RateRegion::from_points(&pts)
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segment_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a[0] + t * dx, a[1] + t * dy);
    ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt()
}

/// Andrew monotone chain. Collinear points are dropped, so the vertex list
/// is minimal. Output is counter-clockwise starting at the lexicographic
/// minimum.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    pts.dedup();
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-12
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-12
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
