//! The Menger-curvature measure `μ_E`, the gradient field `T(f)`, critical
//! radii `R_K` with inflated squares `K̃`, the greedy important-square filter,
//! averages `T̃` on important squares, and the lacunary Whitney re-extension
//! giving the Sobolev component `T₁(f)`.

use crate::bridges::{BridgeAtlas, EndsShape};
use crate::geometry::{interpolating_affine, Point, Square, Triangle, Vec2};
use crate::lacunae::{build_lacunae, LacunaStructure};
use crate::point_set::PointSet;
use crate::whitney::{decompose, Coverage, WhitneyDecomposition};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CurvatureError {
    #[error("measure is identically zero")]
    ZeroMeasure,
    #[error("important square {0} carries zero mass")]
    ZeroMassSquare(usize),
    #[error("empty center set")]
    EmptyCenterSet,
}

/// One atom of `μ_E`: location `c_K`, mass `κ_{Δ(K)}^p · |K|`.
#[derive(Debug, Clone, Copy)]
pub struct Atom {
    pub location: Point,
    pub mass: f64,
}

/// The discrete Menger curvature measure. Atom order follows `K_E`.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Atom>,
    pub p: f64,
    /// Normalization constant: smallest `η ≥ 1` with `μ_E(K) ≤ η·r_K^{2−p}`
    /// on this instance.
    pub eta: f64,
    pub total_mass: f64,
}

/// Builds `μ_E` from squares with their assigned curvatures.
pub fn build_measure_from(parts: &[(Square, f64)], p: f64) -> DiscreteMeasure {
    assert!(p > 2.0, "p must exceed 2");
    let atoms: Vec<Atom> = parts
        .iter()
        .map(|(sq, kappa)| Atom {
            location: sq.center,
            mass: kappa.powf(p) * sq.area(),
        })
        .collect();
    let total_mass: f64 = atoms.iter().map(|a| a.mass).sum();
    let mut eta = 1.0_f64;
    for (sq, _) in parts {
        let mu_k: f64 = atoms
            .iter()
            .filter(|a| sq.contains(a.location, 1e-12))
            .map(|a| a.mass)
            .sum();
        eta = eta.max(mu_k * sq.half_side.powf(p - 2.0));
    }
    DiscreteMeasure {
        atoms,
        p,
        eta,
        total_mass,
    }
}

pub fn build_measure(atlas: &BridgeAtlas, p: f64) -> DiscreteMeasure {
    let parts: Vec<(Square, f64)> = atlas
        .squares
        .iter()
        .map(|k| (k.square, k.curvature))
        .collect();
    build_measure_from(&parts, p)
}

impl DiscreteMeasure {
    /// `μ_E(S)` for a closed square `S` (atoms on the boundary counted in).
    pub fn measure_of(&self, s: &Square) -> f64 {
        self.atoms
            .iter()
            .filter(|a| s.contains(a.location, 1e-12))
            .map(|a| a.mass)
            .sum()
    }
}

/// The gradient field `T(f)` on atom locations: `∇P_{Δ(K)}[f]` for true
/// triangles, zero for degenerate triangles and segments. Linear in `f`.
pub fn gradient_field(atlas: &BridgeAtlas, e: &PointSet, f: &[f64]) -> Vec<Vec2> {
    atlas
        .squares
        .iter()
        .map(|k| match k.shape {
            EndsShape::Triangle { a, b, common, degenerate: false } => {
                let t = Triangle::new([e.point(a), e.point(b), e.point(common)]).unwrap();
                interpolating_affine(&t, [f[a], f[b], f[common]])
                    .unwrap()
                    .gradient
            }
            _ => Vec2::ZERO,
        })
        .collect()
}

/// The critical radius: the unique crossing of the non-decreasing step
/// function `S(r) = μ(Q(c,r))` with the strictly decreasing `η·r^{2−p}`.
/// Within a step of constant mass `m` the crossing solves `m = η·r^{2−p}`.
pub fn critical_radius(measure: &DiscreteMeasure, center: Point) -> Result<f64, CurvatureError> {
    if measure.total_mass <= 0.0 {
        return Err(CurvatureError::ZeroMeasure);
    }
    let p = measure.p;
    let eta = measure.eta;
    let mut dists: Vec<(f64, f64)> = measure
        .atoms
        .iter()
        .filter(|a| a.mass > 0.0)
        .map(|a| (crate::geometry::sup_dist(a.location, center), a.mass))
        .collect();
    dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // merge equal distances into cumulative steps
    let mut steps: Vec<(f64, f64)> = Vec::new(); // (distance, cumulative mass)
    let mut cum = 0.0;
    for (d, m) in dists {
        cum += m;
        match steps.last_mut() {
            Some(last) if last.0 == d => last.1 = cum,
            _ => steps.push((d, cum)),
        }
    }
    for (i, &(lo, m)) in steps.iter().enumerate() {
        let hi = steps.get(i + 1).map(|s| s.0).unwrap_or(f64::INFINITY);
        let r = (eta / m).powf(1.0 / (p - 2.0));
        if r < lo {
            return Ok(lo); // the jump at `lo` crosses the curve
        }
        if r < hi {
            return Ok(r);
        }
    }
    unreachable!("total mass positive, last step extends to infinity")
}

/// An important square: a kept member of the inflated family
/// `K̃_E = {Q(c_K, R_K)}`.
#[derive(Debug, Clone, Copy)]
pub struct ImportantSquare {
    /// Index into `K_E` (and the atom list).
    pub ke_index: usize,
    pub square: Square,
}

/// Greedy filter on `6·K̃_E`: repeatedly keep the square of minimal diameter
/// and discard everything intersecting it; the kept squares, shrunk back by
/// 1/6, have pairwise disjoint 6-dilations and 12-net the inflated family.
pub fn select_important(inflated: &[Square]) -> Vec<ImportantSquare> {
    let mut alive: Vec<bool> = vec![true; inflated.len()];
    let mut kept: Vec<usize> = Vec::new();
    loop {
        let mut pick: Option<usize> = None;
        for (i, sq) in inflated.iter().enumerate() {
            if !alive[i] {
                continue;
            }
            let better = match pick {
                None => true,
                Some(j) => {
                    sq.half_side < inflated[j].half_side
                        || (sq.half_side == inflated[j].half_side && i < j)
                }
            };
            if better {
                pick = Some(i);
            }
        }
        let Some(i) = pick else { break };
        kept.push(i);
        let six_i = inflated[i].dilate(6.0);
        for (j, sq) in inflated.iter().enumerate() {
            if alive[j] && six_i.touches(&sq.dilate(6.0), 1e-12) {
                alive[j] = false;
            }
        }
    }
    kept.sort_unstable();
    kept.into_iter()
        .map(|i| ImportantSquare {
            ke_index: i,
            square: inflated[i],
        })
        .collect()
}

/// Averages of the gradient field over important squares:
/// `T̃(c_Q) = (1/μ(Q)) Σ_{c_K ∈ Q} T(c_K)·mass_K`. Linear in `f`.
pub fn average_field(
    t_values: &[Vec2],
    measure: &DiscreteMeasure,
    important: &[ImportantSquare],
) -> Result<Vec<Vec2>, CurvatureError> {
    let mut out = Vec::with_capacity(important.len());
    for (qi, q) in important.iter().enumerate() {
        let mut num = Vec2::ZERO;
        let mut den = 0.0;
        for (a, t) in measure.atoms.iter().zip(t_values.iter()) {
            if q.square.contains(a.location, 1e-12) {
                num = num + *t * a.mass;
                den += a.mass;
            }
        }
        if den <= 0.0 {
            return Err(CurvatureError::ZeroMassSquare(qi));
        }
        out.push(num * (1.0 / den));
    }
    Ok(out)
}

/// Geometry of the lacunary Whitney extension over the center set `C` of the
/// important squares. Built once; reused for every `f`.
#[derive(Debug, Clone)]
pub struct WhitneyField {
    pub centers: PointSet,
    pub w: WhitneyDecomposition,
    pub lac: LacunaStructure,
    /// Per Whitney-over-C square: the node index `A_Q ∈ C` (the projection of
    /// the square's lacuna).
    pub assignment: Vec<usize>,
    /// Node index used beyond the guaranteed radius (projection of the
    /// unbounded lacuna).
    pub far_node: usize,
}

impl WhitneyField {
    pub fn build(centers: Vec<Point>) -> Result<Self, CurvatureError> {
        if centers.is_empty() {
            return Err(CurvatureError::EmptyCenterSet);
        }
        let centers = PointSet::new(centers).expect("important-square centers are distinct");
        let w = decompose(&centers, 16.0).expect("non-empty center set");
        let lac = build_lacunae(&w, &centers).expect("lacunae over centers");
        let assignment: Vec<usize> = (0..w.len())
            .map(|q| lac.projection[lac.square_to_lacuna[q]])
            .collect();
        let far_node = lac.projection[lac.unbounded_id];
        Ok(WhitneyField {
            centers,
            w,
            lac,
            assignment,
            far_node,
        })
    }

    /// `T₁(x)` for node values on `C`.
    pub fn value(&self, nodes: &[Vec2], x: Point) -> Vec2 {
        if let Some(i) = self.centers.index_of(x) {
            return nodes[i];
        }
        match self.w.coverage(x) {
            Coverage::FarField => nodes[self.far_node],
            Coverage::InnerHole(i) => nodes[i],
            Coverage::Covered => {
                let parts = self.w.partition_at(x).expect("covered point");
                let mut v = Vec2::ZERO;
                for b in parts {
                    v = v + nodes[self.assignment[b.id]] * b.phi;
                }
                v
            }
        }
    }

    /// Jacobian of `T₁` as `(∂T₁/∂x, ∂T₁/∂y)`; zero in holes and far field.
    pub fn jacobian(&self, nodes: &[Vec2], x: Point) -> (Vec2, Vec2) {
        match self.w.coverage(x) {
            Coverage::FarField | Coverage::InnerHole(_) => (Vec2::ZERO, Vec2::ZERO),
            Coverage::Covered => {
                if self.centers.index_of(x).is_some() {
                    return (Vec2::ZERO, Vec2::ZERO);
                }
                let parts = self.w.partition_at(x).expect("covered point");
                let mut dx = Vec2::ZERO;
                let mut dy = Vec2::ZERO;
                for b in parts {
                    let v = nodes[self.assignment[b.id]];
                    dx = dx + v * b.grad.x;
                    dy = dy + v * b.grad.y;
                }
                (dx, dy)
            }
        }
    }
}
