//! Lacunae of Whitney squares: the partition of `W_E` into equivalence
//! classes by their near-set `(10Q)∩E = (90Q)∩E`, the associated sets `V_L`,
//! minimal/maximal squares, interior bridges, the lacuna contact graph, the
//! ε-net hierarchy, and the projection `π : lacunae → E`.

use crate::geometry::{sup_dist, Point};
use crate::point_set::PointSet;
use crate::whitney::WhitneyDecomposition;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LacunaeError {
    #[error("lacuna is unbounded; maximal square does not exist")]
    Unbounded,
    #[error("minimal square not attained (point lacuna)")]
    MinNotAttained,
    #[error("point set has a single point; no bridge partner exists")]
    SinglePointSet,
    #[error("whitney square {0} sees no point of E in 90Q")]
    EmptyNearSet(usize),
}

pub const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum LacunaKind {
    True,
    Elementary,
}

#[derive(Debug, Clone)]
pub struct Lacuna {
    pub id: usize,
    pub kind: LacunaKind,
    /// Member Whitney square ids, sorted.
    pub members: Vec<usize>,
    /// `V_L` as sorted indices into `E`.
    pub v: Vec<usize>,
    pub unbounded: bool,
    /// `Q_L`: minimal-diameter member; absent iff `diam V_L = 0` (the
    /// infimum 0 is not attained; the generalized minimal square is the point).
    pub min_square: Option<usize>,
    /// `Q^L`: maximal-diameter member; absent iff the lacuna is unbounded.
    pub max_square: Option<usize>,
    /// Interior bridge `(A_L, B_L)` as indices into `E`; absent iff `#E = 1`.
    pub bridge: Option<(usize, usize)>,
}

impl Lacuna {
    pub fn diam_v(&self, e: &PointSet) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..self.v.len() {
            for j in (i + 1)..self.v.len() {
                d = d.max(sup_dist(e.point(self.v[i]), e.point(self.v[j])));
            }
        }
        d
    }
}

/// Contact graph: vertices are lacuna ids, edges are contacting pairs
/// (`U_L ∩ U_{L'} ≠ ∅`).
#[derive(Debug, Clone)]
pub struct LacunaGraph {
    pub edges: Vec<(usize, usize)>,
    pub adjacency: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct LacunaStructure {
    pub lacunae: Vec<Lacuna>,
    /// Lacuna id of each Whitney square.
    pub square_to_lacuna: Vec<usize>,
    pub unbounded_id: usize,
    pub graph: LacunaGraph,
    /// `π(L)` as an index into `E` per lacuna.
    pub projection: Vec<usize>,
    pub net: NetHierarchy,
}

/// Builds the lacuna partition with all derived structure over a
/// decomposition of `R²∖E`.
pub fn build_lacunae(
    w: &WhitneyDecomposition,
    e: &PointSet,
) -> Result<LacunaStructure, LacunaeError> {
    let n_points = e.len();
    let all: Vec<usize> = (0..n_points).collect();

    // per-square near sets
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    let mut elementary: Vec<(usize, Vec<usize>)> = Vec::new();
    for sq in &w.squares {
        let q10 = sq.square.dilate(10.0);
        let q90 = sq.square.dilate(90.0);
        let mut e10 = Vec::new();
        let mut e90 = Vec::new();
        for (i, p) in e.points().iter().enumerate() {
            if q90.contains(*p, BOUNDARY_SLACK) {
                e90.push(i);
                if q10.contains(*p, BOUNDARY_SLACK) {
                    e10.push(i);
                }
            }
        }
        if e90.is_empty() {
            return Err(LacunaeError::EmptyNearSet(sq.id));
        }
        if e10 == e90 {
            groups.entry(e90).or_default().push(sq.id);
        } else {
            elementary.push((sq.id, e90));
        }
    }

    // deterministic lacuna order: by smallest member square id
    let mut raw: Vec<(usize, LacunaKind, Vec<usize>, Vec<usize>)> = Vec::new();
    for (v, mut members) in groups {
        members.sort_unstable();
        raw.push((members[0], LacunaKind::True, members, v));
    }
    for (sq, v) in elementary {
        raw.push((sq, LacunaKind::Elementary, vec![sq], v));
    }
    raw.sort_by_key(|r| r.0);

    let mut lacunae = Vec::with_capacity(raw.len());
    let mut square_to_lacuna = vec![usize::MAX; w.len()];
    let mut unbounded_id = usize::MAX;
    for (id, (_, kind, members, v)) in raw.into_iter().enumerate() {
        let unbounded = kind == LacunaKind::True && v == all;
        if unbounded {
            unbounded_id = id;
        }
        for &m in &members {
            square_to_lacuna[m] = id;
        }
        let diam_v = {
            let mut d = 0.0_f64;
            for i in 0..v.len() {
                for j in (i + 1)..v.len() {
                    d = d.max(sup_dist(e.point(v[i]), e.point(v[j])));
                }
            }
            d
        };
        let min_square = if diam_v > 0.0 {
            members
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    w.squares[a]
                        .square
                        .half_side
                        .partial_cmp(&w.squares[b].square.half_side)
                        .unwrap()
                        .then(a.cmp(&b))
                })
        } else {
            None
        };
        let max_square = if unbounded {
            None
        } else {
            members
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    w.squares[a]
                        .square
                        .half_side
                        .partial_cmp(&w.squares[b].square.half_side)
                        .unwrap()
                        .then(b.cmp(&a))
                })
        };
        let bridge = interior_bridge_of(&v, e);
        lacunae.push(Lacuna {
            id,
            kind,
            members,
            v,
            unbounded,
            min_square,
            max_square,
            bridge,
        });
    }
    assert!(unbounded_id != usize::MAX, "no lacuna with V = E found");
    assert!(
        square_to_lacuna.iter().all(|&l| l != usize::MAX),
        "partition property violated"
    );

    let graph = contact_graph_impl(&lacunae, &square_to_lacuna, w);
    let net = net_hierarchy(e.points());
    let projection = project_lacunae_impl(&lacunae, e, w, &net);

    Ok(LacunaStructure {
        lacunae,
        square_to_lacuna,
        unbounded_id,
        graph,
        projection,
        net,
    })
}

/// Interior bridge of a lacuna per its defining rule: the (lex-smallest)
/// diameter-realizing pair of `V_L` when `diam V_L > 0`, else the point of
/// `V_L` paired with its nearest neighbor in `E ∖ V_L`.
fn interior_bridge_of(v: &[usize], e: &PointSet) -> Option<(usize, usize)> {
    if e.len() < 2 {
        return None;
    }
    let lex = |i: usize, j: usize| e.point(i).lex_cmp(&e.point(j));
    if v.len() >= 2 {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..v.len() {
            for b in (a + 1)..v.len() {
                let (mut i, mut j) = (v[a], v[b]);
                if lex(i, j) == std::cmp::Ordering::Greater {
                    std::mem::swap(&mut i, &mut j);
                }
                let d = sup_dist(e.point(i), e.point(j));
                let better = match best {
                    None => true,
                    Some((bi, bj, bd)) => {
                        d > bd
                            || (d == bd
                                && (lex(i, bi) == std::cmp::Ordering::Less
                                    || (i == bi && lex(j, bj) == std::cmp::Ordering::Less)))
                    }
                };
                if better {
                    best = Some((i, j, d));
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    } else {
        let a = v[0];
        let mut best: Option<(usize, f64)> = None;
        for i in 0..e.len() {
            if i == a {
                continue;
            }
            let d = sup_dist(e.point(a), e.point(i));
            let better = match best {
                None => true,
                Some((bi, bd)) => d < bd || (d == bd && lex(i, bi) == std::cmp::Ordering::Less),
            };
            if better {
                best = Some((i, d));
            }
        }
        best.map(|(b, _)| (a, b))
    }
}

fn contact_graph_impl(
    lacunae: &[Lacuna],
    square_to_lacuna: &[usize],
    w: &WhitneyDecomposition,
) -> LacunaGraph {
    let adj = w.neighbor_graph();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (q, list) in adj.iter().enumerate() {
        for &k in list {
            let (la, lb) = (square_to_lacuna[q], square_to_lacuna[k]);
            if la != lb {
                edges.push((la.min(lb), la.max(lb)));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut adjacency = vec![Vec::new(); lacunae.len()];
    for &(a, b) in &edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    LacunaGraph { edges, adjacency }
}

impl LacunaStructure {
    pub fn min_square<'a>(
        &self,
        w: &'a WhitneyDecomposition,
        lacuna: usize,
    ) -> Result<&'a crate::whitney::WhitneySquare, LacunaeError> {
        match self.lacunae[lacuna].min_square {
            Some(id) => Ok(w.square(id)),
            None => Err(LacunaeError::MinNotAttained),
        }
    }

    pub fn max_square<'a>(
        &self,
        w: &'a WhitneyDecomposition,
        lacuna: usize,
    ) -> Result<&'a crate::whitney::WhitneySquare, LacunaeError> {
        match self.lacunae[lacuna].max_square {
            Some(id) => Ok(w.square(id)),
            None => Err(LacunaeError::Unbounded),
        }
    }

    /// Interior bridge ends as points.
    pub fn bridge_points(&self, e: &PointSet, lacuna: usize) -> Result<(Point, Point), LacunaeError> {
        match self.lacunae[lacuna].bridge {
            Some((a, b)) => Ok((e.point(a), e.point(b))),
            None => Err(LacunaeError::SinglePointSet),
        }
    }

    /// Per-point multiplicity of the projection map.
    pub fn projection_multiplicity(&self, n_points: usize) -> Vec<usize> {
        let mut mult = vec![0usize; n_points];
        for &p in &self.projection {
            mult[p] += 1;
        }
        mult
    }
}

/// Hierarchy of nested `2^i`-separated `2^{i+1}`-nets `S_i ⊆ S` (sup-norm),
/// built greedily in lexicographic order.
#[derive(Debug, Clone)]
pub struct NetHierarchy {
    pub points: Vec<Point>,
    pub i_lo: i32,
    pub i_hi: i32,
    /// `levels[k]` holds the sorted point indices of `S_{i_lo + k}`.
    pub levels: Vec<Vec<usize>>,
}

pub fn net_hierarchy(points: &[Point]) -> NetHierarchy {
    assert!(!points.is_empty());
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].lex_cmp(&points[j]));

    let mut diam = 0.0_f64;
    let mut min_gap = f64::INFINITY;
    for a in 0..points.len() {
        for b in (a + 1)..points.len() {
            let d = sup_dist(points[a], points[b]);
            diam = diam.max(d);
            min_gap = min_gap.min(d);
        }
    }
    let (i_lo, i_hi) = if points.len() < 2 {
        (0, 0)
    } else {
        (
            (min_gap.log2().floor() as i32) - 3,
            (diam.log2().ceil() as i32) + 3,
        )
    };

    let greedy = |base: &[usize], sep: f64| -> Vec<usize> {
        let mut kept: Vec<usize> = Vec::new();
        for &i in base {
            if kept
                .iter()
                .all(|&j| sup_dist(points[i], points[j]) >= sep)
            {
                kept.push(i);
            }
        }
        kept
    };

    let mut levels = Vec::with_capacity((i_hi - i_lo + 1) as usize);
    let mut current = greedy(&order, (i_lo as f64).exp2());
    levels.push({
        let mut v = current.clone();
        v.sort_unstable();
        v
    });
    for i in (i_lo + 1)..=i_hi {
        current = greedy(&current, (i as f64).exp2());
        levels.push({
            let mut v = current.clone();
            v.sort_unstable();
            v
        });
    }
    // keep greedy order internally consistent: the per-level stored sets are
    // sorted by index; nesting holds because greedy subsets preserve members
    NetHierarchy {
        points: points.to_vec(),
        i_lo,
        i_hi,
        levels,
    }
}

impl NetHierarchy {
    /// The set `S_i`, clamped: below the materialized range it is all of `S`,
    /// above it is the top level (a single point once `2^i > diam S`).
    pub fn level(&self, i: i32) -> &[usize] {
        if i <= self.i_lo {
            &self.levels[0]
        } else if i >= self.i_hi {
            self.levels.last().unwrap()
        } else {
            &self.levels[(i - self.i_lo) as usize]
        }
    }
}

/// Exponent `i` with `2^i < d ≤ 2^{i+1}`.
fn net_exponent(d: f64) -> i32 {
    debug_assert!(d > 0.0);
    let mut i = d.log2().floor() as i32;
    while (i as f64).exp2() >= d {
        i -= 1;
    }
    while ((i + 1) as f64).exp2() < d {
        i += 1;
    }
    i
}

/// The projection `π : lacunae → E`. Point lacunae project to their point;
/// others through the net hierarchy following the `w_Q` construction with
/// `θ = 90`, so `π(L) ∈ (180·Q_L) ∩ E`.
fn project_lacunae_impl(
    lacunae: &[Lacuna],
    e: &PointSet,
    _w: &WhitneyDecomposition,
    net: &NetHierarchy,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(lacunae.len());
    for lac in lacunae {
        if lac.v.len() == 1 {
            out.push(lac.v[0]);
            continue;
        }
        let (ai, bi) = lac.bridge.expect("multi-point V always has a bridge");
        let (a, b) = (e.point(ai), e.point(bi));
        let d = sup_dist(a, b); // = diam V_L = diam(90·Q_L ∩ E)
        let iq = net_exponent(d);
        let radius = ((iq - 1) as f64).exp2();
        let find = |target: Point| -> usize {
            net.level(iq - 2)
                .iter()
                .copied()
                .filter(|&j| sup_dist(e.point(j), target) <= radius)
                .min_by(|&x, &y| e.point(x).lex_cmp(&e.point(y)))
                .expect("net level must contain a nearby point")
        };
        let aq = find(a);
        let bq = find(b);
        let high = net.level(iq + 2);
        let w = if !high.contains(&aq) {
            aq
        } else {
            debug_assert!(!high.contains(&bq), "both candidates in high-level net");
            bq
        };
        out.push(w);
    }
    out
}
