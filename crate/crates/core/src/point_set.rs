//! Finite point sets `E ⊂ R²` with optional attached sample values.

use crate::geometry::{sup_dist, Point};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PointSetError {
    #[error("point set is empty")]
    Empty,
    #[error("duplicate point at index {0} and {1}")]
    DuplicatePoint(usize, usize),
    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),
    #[error("value count {values} does not match point count {points}")]
    CountMismatch { points: usize, values: usize },
}

/// A finite set of distinct points. Indices are stable and used as identities
/// throughout the pipeline (bridge ends, V_L membership, sample values).
#[derive(Debug, Clone)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    /// Builds a point set, rejecting duplicates (exact coordinate match) and
    /// non-finite coordinates.
    pub fn new(points: Vec<Point>) -> Result<Self, PointSetError> {
        if points.is_empty() {
            return Err(PointSetError::Empty);
        }
        for (i, p) in points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(PointSetError::NonFinite(i));
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&i, &j| points[i].lex_cmp(&points[j]));
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                return Err(PointSetError::DuplicatePoint(
                    w[0].min(w[1]),
                    w[0].max(w[1]),
                ));
            }
        }
        Ok(PointSet { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    /// Sup-norm diameter of the set; 0 for a singleton.
    pub fn diam(&self) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                d = d.max(sup_dist(self.points[i], self.points[j]));
            }
        }
        d
    }

    /// Smallest sup-norm gap between distinct points; `None` for a singleton.
    pub fn min_gap(&self) -> Option<f64> {
        if self.points.len() < 2 {
            return None;
        }
        let mut g = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                g = g.min(sup_dist(self.points[i], self.points[j]));
            }
        }
        Some(g)
    }

    pub fn barycenter(&self) -> Point {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point::new(sx / n, sy / n)
    }

    /// Lower-left corner of the bounding box; the dyadic grid anchor.
    pub fn bbox_corner(&self) -> Point {
        let x = self.points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let y = self.points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        Point::new(x, y)
    }

    /// Index of the nearest point to `x` in the sup-norm (ties: smaller index).
    pub fn nearest(&self, x: Point) -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = sup_dist(*p, x);
            if d < bd {
                bd = d;
                best = i;
            }
        }
        best
    }

    /// Sup-norm distance from `x` to the set.
    pub fn dist(&self, x: Point) -> f64 {
        self.points
            .iter()
            .map(|p| sup_dist(*p, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of `x` if it coincides exactly with a set point.
    pub fn index_of(&self, x: Point) -> Option<usize> {
        self.points.iter().position(|p| *p == x)
    }
}

/// Sample values attached to a point set, aligned by index.
#[derive(Debug, Clone)]
pub struct SampleValues(pub Vec<f64>);

impl SampleValues {
    pub fn for_set(values: Vec<f64>, set: &PointSet) -> Result<Self, PointSetError> {
        if values.len() != set.len() {
            return Err(PointSetError::CountMismatch {
                points: set.len(),
                values: values.len(),
            });
        }
        Ok(SampleValues(values))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}
