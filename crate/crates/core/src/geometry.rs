//! Elementary planar primitives shared by the whole pipeline: points and
//! vectors, axis-parallel squares under the sup-norm, triangles with Menger
//! curvature, affine interpolation, and line projections.
//!
//! Norm conventions follow the rest of the crate: diameters and distances of
//! squares and point sets are sup-norm; curvature, divided differences and
//! gradient-space quantities are Euclidean. Both are exposed explicitly.

use serde::Serialize;
use thiserror::Error;

/// Scale-invariant collinearity tolerance: a triple is degenerate iff twice
/// its signed area is at most `EPS_COL` times the squared sup-diameter of the
/// triple.
pub const EPS_COL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("two triangle vertices coincide")]
    DuplicateVertex,
    #[error("triangle is degenerate (collinear vertices)")]
    DegenerateTriangle,
    #[error("points are not collinear")]
    NotCollinear,
}

/// A point of the plane. Coordinates are expected finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite(), "non-finite coordinate");
        Point { x, y }
    }

    /// Lexicographic order (x, then y). Total on finite coordinates.
    pub fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        self.x
            .partial_cmp(&other.x)
            .unwrap()
            .then(self.y.partial_cmp(&other.y).unwrap())
    }
}

impl std::ops::Sub for Point {
    type Output = Vec2;
    fn sub(self, rhs: Point) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add<Vec2> for Point {
    type Output = Point;
    fn add(self, rhs: Vec2) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

/// A plane vector; used for gradients, normals and displacements.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Euclidean norm.
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Sup-norm.
    pub fn norm_sup(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    /// z-component of the cross product `self × other`.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Sup-norm distance between two points.
pub fn sup_dist(a: Point, b: Point) -> f64 {
    (a.x - b.x).abs().max((a.y - b.y).abs())
}

/// Euclidean distance between two points.
pub fn euclid_dist(a: Point, b: Point) -> f64 {
    (a - b).norm()
}

/// Closed axis-parallel square `Q(center, half_side)`. Under the sup-norm,
/// `diam Q = 2·half_side` and `λQ` keeps the center and scales the half-side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Square {
    pub center: Point,
    pub half_side: f64,
}

impl Square {
    pub fn new(center: Point, half_side: f64) -> Self {
        debug_assert!(half_side > 0.0, "half_side must be positive");
        Square { center, half_side }
    }

    /// Sup-norm diameter, i.e. the side length.
    pub fn diam(&self) -> f64 {
        2.0 * self.half_side
    }

    pub fn area(&self) -> f64 {
        let s = self.diam();
        s * s
    }

    /// The dilation `λQ` about the center.
    pub fn dilate(&self, lambda: f64) -> Square {
        Square::new(self.center, self.half_side * lambda)
    }

    /// Closed-square membership with a relative boundary slack so points on
    /// the boundary count as inside.
    pub fn contains(&self, p: Point, rel_slack: f64) -> bool {
        let slack = rel_slack * self.diam();
        sup_dist(self.center, p) <= self.half_side + slack
    }

    /// Sup-norm distance from a point to the (closed) square.
    pub fn dist_to_point(&self, p: Point) -> f64 {
        let dx = ((p.x - self.center.x).abs() - self.half_side).max(0.0);
        let dy = ((p.y - self.center.y).abs() - self.half_side).max(0.0);
        dx.max(dy)
    }

    /// Sup-norm distance between two closed squares (0 if they intersect).
    pub fn dist_to_square(&self, other: &Square) -> f64 {
        let dx = ((self.center.x - other.center.x).abs() - self.half_side - other.half_side)
            .max(0.0);
        let dy = ((self.center.y - other.center.y).abs() - self.half_side - other.half_side)
            .max(0.0);
        dx.max(dy)
    }

    /// Whether two closed squares intersect, with a relative slack.
    pub fn touches(&self, other: &Square, rel_slack: f64) -> bool {
        let slack = rel_slack * (self.diam() + other.diam());
        self.dist_to_square(other) <= slack
    }
}

/// Sup-norm diameter of a point set.
pub fn sup_diam(points: &[Point]) -> f64 {
    let mut d = 0.0_f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            d = d.max(sup_dist(points[i], points[j]));
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TriangleKind {
    True,
    Degenerate,
}

/// Three pairwise distinct points; `Degenerate` iff collinear within the
/// scale-invariant tolerance.
#[derive(Debug, Clone, Copy)]
pub struct Triangle {
    pub vertices: [Point; 3],
    pub kind: TriangleKind,
}

impl Triangle {
    pub fn new(vertices: [Point; 3]) -> Result<Self, GeometryError> {
        let [a, b, c] = vertices;
        if a == b || b == c || a == c {
            return Err(GeometryError::DuplicateVertex);
        }
        let kind = if is_collinear(a, b, c) {
            TriangleKind::Degenerate
        } else {
            TriangleKind::True
        };
        Ok(Triangle { vertices, kind })
    }

    /// Twice the signed area of the vertex triple.
    pub fn twice_signed_area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        (b - a).cross(c - a)
    }
}

/// Collinearity test: twice the signed area against `EPS_COL · diam²`.
pub fn is_collinear(a: Point, b: Point, c: Point) -> bool {
    let area2 = (b - a).cross(c - a).abs();
    let d = sup_diam(&[a, b, c]);
    area2 <= EPS_COL * d * d
}

/// Euclidean circumradius; `f64::INFINITY` for degenerate triangles.
///
/// Computed from `R = |ab|·|bc|·|ca| / (2·|cross|)`, which stays stable near
/// degeneracy where a circumcenter solve would not.
pub fn circumradius(t: &Triangle) -> f64 {
    if t.kind == TriangleKind::Degenerate {
        return f64::INFINITY;
    }
    let [a, b, c] = t.vertices;
    let la = euclid_dist(a, b);
    let lb = euclid_dist(b, c);
    let lc = euclid_dist(c, a);
    let cross = (b - a).cross(c - a).abs();
    la * lb * lc / (2.0 * cross)
}

/// Menger curvature `κ_Δ = 1/R_Δ`; 0 for degenerate triangles.
pub fn menger_curvature(t: &Triangle) -> f64 {
    if t.kind == TriangleKind::Degenerate {
        return 0.0;
    }
    let r = circumradius(t);
    1.0 / r
}

/// Affine polynomial `P(x) = value_at_origin + ⟨gradient, x⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffinePoly {
    pub value_at_origin: f64,
    pub gradient: Vec2,
}

impl AffinePoly {
    pub const ZERO: AffinePoly = AffinePoly {
        value_at_origin: 0.0,
        gradient: Vec2::ZERO,
    };

    pub fn new(value_at_origin: f64, gradient: Vec2) -> Self {
        AffinePoly {
            value_at_origin,
            gradient,
        }
    }

    /// The affine polynomial with value `v` and gradient `g` at anchor `at`.
    pub fn from_anchor(at: Point, v: f64, g: Vec2) -> Self {
        AffinePoly {
            value_at_origin: v - g.dot(Vec2::new(at.x, at.y)),
            gradient: g,
        }
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.value_at_origin + self.gradient.dot(Vec2::new(p.x, p.y))
    }
}

/// The affine polynomial interpolating `values` at the vertices of a true
/// triangle. Linear in `values`.
pub fn interpolating_affine(t: &Triangle, values: [f64; 3]) -> Result<AffinePoly, GeometryError> {
    if t.kind == TriangleKind::Degenerate {
        return Err(GeometryError::DegenerateTriangle);
    }
    let [a, b, c] = t.vertices;
    let u = b - a;
    let v = c - a;
    let det = u.cross(v);
    let du = values[1] - values[0];
    let dv = values[2] - values[0];
    let gx = (du * v.y - dv * u.y) / det;
    let gy = (dv * u.x - du * v.x) / det;
    let g = Vec2::new(gx, gy);
    Ok(AffinePoly::from_anchor(a, values[0], g))
}

/// Straight line `{z : ⟨z, unit_normal⟩ = offset}` with a Euclidean unit
/// normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Line {
    pub unit_normal: Vec2,
    pub offset: f64,
}

impl Line {
    pub fn new(normal: Vec2, offset: f64) -> Self {
        let n = normal.norm();
        debug_assert!(n > 0.0, "zero normal");
        Line {
            unit_normal: normal * (1.0 / n),
            offset: offset / n,
        }
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        (self.unit_normal.dot(Vec2::new(p.x, p.y)) - self.offset).abs() <= tol
    }
}

/// Orthogonal (Euclidean) projection of `x` onto `ℓ`.
pub fn project_to_line(x: Point, line: &Line) -> Point {
    let n = line.unit_normal;
    let excess = n.dot(Vec2::new(x.x, x.y)) - line.offset;
    x + n * (-excess)
}

/// Orthogonal projection of a vector onto `ℓ` viewed as a set of vectors.
/// Used for gradient selections where points of the line are gradients.
pub fn project_vec_to_line(v: Vec2, line: &Line) -> Vec2 {
    let n = line.unit_normal;
    let excess = n.dot(v) - line.offset;
    v - n * excess
}

/// Whether `z2` lies strictly inside the open segment `(z1, z3)` of a
/// collinear triple.
pub fn collinear_sidedness(z1: Point, z2: Point, z3: Point) -> Result<bool, GeometryError> {
    if z1 == z2 || z2 == z3 || z1 == z3 {
        return Err(GeometryError::DuplicateVertex);
    }
    if !is_collinear(z1, z2, z3) {
        return Err(GeometryError::NotCollinear);
    }
    let d = z3 - z1;
    let t = (z2 - z1).dot(d) / d.dot(d);
    Ok(t > 0.0 && t < 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn sup_dist_definition() {
        assert_eq!(sup_dist(pt(0.0, 0.0), pt(3.0, -4.0)), 4.0);
        assert_eq!(sup_dist(pt(1.0, 1.0), pt(1.0, 1.0)), 0.0);
        assert_eq!(sup_dist(pt(0.0, 0.0), pt(2.0, 2.0)), 2.0);
    }

    #[test]
    fn sup_dist_triangle_inequality() {
        let mut s: u64 = 0x9e3779b97f4a7c15;
        let mut rnd = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 10.0 - 5.0
        };
        for _ in 0..500 {
            let a = pt(rnd(), rnd());
            let b = pt(rnd(), rnd());
            let c = pt(rnd(), rnd());
            assert!(sup_dist(a, c) <= sup_dist(a, b) + sup_dist(b, c) + 1e-15);
            assert_eq!(sup_dist(a, b), sup_dist(b, a));
            // norm comparison: ‖·‖∞ ≤ ‖·‖₂ ≤ √2‖·‖∞
            let s2 = euclid_dist(a, b);
            let si = sup_dist(a, b);
            assert!(si <= s2 + 1e-15);
            assert!(s2 <= 2f64.sqrt() * si + 1e-12);
        }
    }

    // Independent oracle for the circumradius: solve the 2x2 linear system for
    // the circumcenter (perpendicular bisector intersection).
    fn circumradius_oracle(a: Point, b: Point, c: Point) -> Option<f64> {
        let ax = a.x - c.x;
        let ay = a.y - c.y;
        let bx = b.x - c.x;
        let by = b.y - c.y;
        let d = 2.0 * (ax * by - ay * bx);
        if d.abs() < 1e-30 {
            return None;
        }
        let a_sq = ax * ax + ay * ay;
        let b_sq = bx * bx + by * by;
        let cx = (a_sq * by - b_sq * ay) / d + c.x;
        let cy = (b_sq * ax - a_sq * bx) / d + c.y;
        Some(euclid_dist(pt(cx, cy), a))
    }

    #[test]
    fn circumradius_right_triangle() {
        let t = Triangle::new([pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0)]).unwrap();
        let r = circumradius(&t);
        assert!((r - 2f64.sqrt() / 2.0).abs() < 1e-14);
        let oracle = circumradius_oracle(pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0)).unwrap();
        assert!((r - oracle).abs() < 1e-14);
    }

    #[test]
    fn circumradius_collinear_is_infinite() {
        let t = Triangle::new([pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)]).unwrap();
        assert_eq!(t.kind, TriangleKind::Degenerate);
        assert!(circumradius(&t).is_infinite());
        assert_eq!(menger_curvature(&t), 0.0);
    }

    #[test]
    fn circumradius_equilateral() {
        let h = 3f64.sqrt() / 2.0;
        let t = Triangle::new([pt(0.0, 0.0), pt(1.0, 0.0), pt(0.5, h)]).unwrap();
        let r = circumradius(&t);
        assert!((r - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn duplicate_vertex_rejected() {
        assert_eq!(
            Triangle::new([pt(0.0, 0.0), pt(0.0, 0.0), pt(1.0, 0.0)]).unwrap_err(),
            GeometryError::DuplicateVertex
        );
    }

    #[test]
    fn menger_vs_circumradius_random() {
        let mut s: u64 = 42;
        let mut rnd = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 8.0 - 4.0
        };
        let mut checked = 0;
        while checked < 1000 {
            let a = pt(rnd(), rnd());
            let b = pt(rnd(), rnd());
            let c = pt(rnd(), rnd());
            let Ok(t) = Triangle::new([a, b, c]) else { continue };
            if t.kind == TriangleKind::Degenerate {
                continue;
            }
            let k = menger_curvature(&t);
            let oracle = circumradius_oracle(a, b, c).unwrap();
            assert!(
                (k - 1.0 / oracle).abs() <= 1e-9 * k.max(1.0 / oracle),
                "curvature mismatch: {k} vs 1/{oracle}"
            );
            checked += 1;
        }
    }

    #[test]
    fn menger_scaling_homogeneity() {
        let t = Triangle::new([pt(0.1, 0.2), pt(1.3, 0.4), pt(0.5, 2.0)]).unwrap();
        let k = menger_curvature(&t);
        for s in [0.5, 2.0, 7.0] {
            let ts = Triangle::new([
                pt(0.1 * s, 0.2 * s),
                pt(1.3 * s, 0.4 * s),
                pt(0.5 * s, 2.0 * s),
            ])
            .unwrap();
            let ks = menger_curvature(&ts);
            assert!((ks - k / s).abs() < 1e-12 * k);
        }
    }

    #[test]
    fn interpolation_exact_and_linear() {
        let t = Triangle::new([pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0)]).unwrap();
        let p = interpolating_affine(&t, [0.0, 1.0, 0.0]).unwrap();
        // coordinate functional x
        assert!((p.eval(pt(0.7, 0.2)) - 0.7).abs() < 1e-14);

        let z = interpolating_affine(&t, [0.0, 0.0, 0.0]).unwrap();
        assert_eq!(z.eval(pt(3.0, -1.0)), 0.0);

        // reproduction of affine data on a generic triangle
        let t2 = Triangle::new([pt(0.3, -0.2), pt(2.1, 0.9), pt(-1.0, 1.7)]).unwrap();
        let a = AffinePoly::new(0.7, Vec2::new(-1.2, 2.5));
        let vals = [
            a.eval(t2.vertices[0]),
            a.eval(t2.vertices[1]),
            a.eval(t2.vertices[2]),
        ];
        let p2 = interpolating_affine(&t2, vals).unwrap();
        assert!((p2.value_at_origin - a.value_at_origin).abs() < 1e-12);
        assert!((p2.gradient - a.gradient).norm() < 1e-12);

        // linearity in the value vector
        let u = [1.0, -2.0, 0.5];
        let v = [0.3, 0.4, -1.1];
        let (al, be) = (1.7, -0.6);
        let pu = interpolating_affine(&t2, u).unwrap();
        let pv = interpolating_affine(&t2, v).unwrap();
        let mixed = [
            al * u[0] + be * v[0],
            al * u[1] + be * v[1],
            al * u[2] + be * v[2],
        ];
        let pm = interpolating_affine(&t2, mixed).unwrap();
        assert!(
            (pm.value_at_origin - (al * pu.value_at_origin + be * pv.value_at_origin)).abs()
                < 1e-12
        );
        assert!((pm.gradient - (pu.gradient * al + pv.gradient * be)).norm() < 1e-12);
    }

    #[test]
    fn interpolation_degenerate_rejected() {
        let t = Triangle::new([pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)]).unwrap();
        assert_eq!(
            interpolating_affine(&t, [0.0, 1.0, 2.0]).unwrap_err(),
            GeometryError::DegenerateTriangle
        );
    }

    #[test]
    fn projection_axis_and_idempotent() {
        let l = Line::new(Vec2::new(0.0, 1.0), 0.0); // {y = 0}
        let p = project_to_line(pt(1.0, 1.0), &l);
        assert_eq!(p, pt(1.0, 0.0));
        let q = project_to_line(p, &l);
        assert_eq!(q, p);
    }

    #[test]
    fn projection_minimizes_distance() {
        // dense line-search oracle on a handful of random configurations
        let mut s: u64 = 7;
        let mut rnd = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for _ in 0..50 {
            let n = Vec2::new(rnd(), rnd());
            if n.norm() < 1e-3 {
                continue;
            }
            let line = Line::new(n, rnd());
            let x = pt(rnd(), rnd());
            let p = project_to_line(x, &line);
            assert!(line.contains(p, 1e-12));
            // tangent direction
            let t = Vec2::new(-line.unit_normal.y, line.unit_normal.x);
            let d0 = euclid_dist(x, p);
            let mut best = f64::INFINITY;
            for k in -2000..=2000 {
                let cand = p + t * (k as f64 * 1e-3);
                best = best.min(euclid_dist(x, cand));
            }
            assert!(d0 <= best + 1e-12);
        }
    }

    #[test]
    fn sidedness() {
        assert!(collinear_sidedness(pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)).unwrap());
        assert!(!collinear_sidedness(pt(0.0, 0.0), pt(2.0, 0.0), pt(1.0, 0.0)).unwrap());
        assert_eq!(
            collinear_sidedness(pt(0.0, 0.0), pt(0.0, 0.0), pt(1.0, 0.0)).unwrap_err(),
            GeometryError::DuplicateVertex
        );
        assert_eq!(
            collinear_sidedness(pt(0.0, 0.0), pt(1.0, 1.0), pt(2.0, 0.0)).unwrap_err(),
            GeometryError::NotCollinear
        );
    }
}
