//! Bridges between contacting lacunae and the well-separated square family
//! `K_E`: interior bridges, the case analysis producing exterior bridges, the
//! connected-bridge relation, and the one-to-one map from connected pairs to
//! subsquares of lacuna host squares with the triangle assignment `Δ(K)`.

use crate::geometry::{
    euclid_dist, menger_curvature, sup_dist, Point, Square, Triangle, TriangleKind,
};
use crate::lacunae::LacunaStructure;
use crate::point_set::PointSet;
use crate::whitney::WhitneyDecomposition;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BridgeError {
    #[error("lacunae {0} and {1} are not contacting")]
    NotContacting(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum BridgeKind {
    Interior { lacuna: usize },
    Exterior { la: usize, lb: usize },
}

/// A bridge: a pair of distinct `E`-points. Interior bridges are ordered
/// `(A_L, B_L)`; exterior bridges are stored with `a` lexicographically
/// smaller, and `a` serves as the end `A^[T]`.
#[derive(Debug, Clone)]
pub struct Bridge {
    pub id: usize,
    pub kind: BridgeKind,
    pub a: usize,
    pub b: usize,
    /// For exterior bridges: which end each of the two lacunae contributed,
    /// as `(lacuna, point index)`.
    pub contributed: Option<[(usize, usize); 2]>,
}

impl Bridge {
    pub fn ends(&self) -> [usize; 2] {
        [self.a, self.b]
    }

    pub fn end_set(&self) -> [usize; 2] {
        let mut s = [self.a, self.b];
        s.sort_unstable();
        s
    }
}

/// An unordered pair of connected bridges (`t1 < t2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ConnectedPair {
    pub t1: usize,
    pub t2: usize,
}

/// The set of ends of a connected pair: three distinct points form a triangle
/// (true or degenerate) with the common end distinguished; two distinct
/// points form a segment.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub enum EndsShape {
    Triangle {
        a: usize,
        b: usize,
        common: usize,
        degenerate: bool,
    },
    Segment {
        a: usize,
        b: usize,
    },
}

/// A square of the family `K_E`, owned by one connected pair.
#[derive(Debug, Clone)]
pub struct BridgeSquare {
    pub id: usize,
    pub square: Square,
    pub pair: usize,
    /// The Whitney host square (`Q_L` or `Q^L`) it was carved from.
    pub host: usize,
    /// Number of grid cells per side in the host partition it came from.
    pub cells: usize,
    pub shape: EndsShape,
    /// `κ_{Δ(K)}`; 0 for segments and degenerate triangles.
    pub curvature: f64,
}

#[derive(Debug, Clone)]
pub struct BridgeAtlas {
    pub bridges: Vec<Bridge>,
    /// Interior bridge id of each lacuna (same indexing as lacuna ids).
    pub interior_of: Vec<usize>,
    pub pairs: Vec<ConnectedPair>,
    pub squares: Vec<BridgeSquare>,
    /// `pair index → K_E square id` (the bijection).
    pub pair_square: Vec<usize>,
}

/// Outcome of the bridge case analysis for one contacting pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOutcome {
    /// Disjoint end sets: exterior bridge with the chosen end of each side
    /// (0 = A, 1 = B of the respective interior bridge).
    ExteriorDisjoint { end_l: usize, end_lp: usize },
    /// One shared end and the opposite side is strictly smallest: exterior
    /// bridge between the two non-shared ends.
    ExteriorShared,
    /// Interior bridges connected directly (identical ends, or shared-end
    /// case with the smallest-side test failing).
    InteriorsConnected,
}

/// Whether `[p, q]` is the strict smallest side of the triangle `{p, q, r}`,
/// with a relative tolerance; ties count as not smallest.
pub fn is_strict_smallest_side(p: Point, q: Point, r: Point) -> bool {
    let d_pq = euclid_dist(p, q);
    let d_pr = euclid_dist(p, r);
    let d_qr = euclid_dist(q, r);
    let tol = 1e-12 * d_pq.max(d_pr).max(d_qr);
    d_pq + tol < d_pr.min(d_qr)
}

/// The defining conditions of an exterior bridge for candidate ends
/// `c_l ∈ {a_l, b_l}` and `c_lp ∈ {a_lp, b_lp}`: in the triangle
/// `{a_l, b_l, c_lp}` the side opposite `c_l` is not the smallest side, and
/// symmetrically.
pub fn exterior_bridge_conditions(
    a_l: Point,
    b_l: Point,
    a_lp: Point,
    b_lp: Point,
    c_l: Point,
    c_lp: Point,
) -> bool {
    let other_l = if c_l == a_l { b_l } else { a_l };
    let other_lp = if c_lp == a_lp { b_lp } else { a_lp };
    // side opposite c_l in {a_l, b_l, c_lp} is [other_l, c_lp]
    let cond_l = !is_strict_smallest_side(other_l, c_lp, c_l);
    let cond_lp = !is_strict_smallest_side(other_lp, c_l, c_lp);
    cond_l && cond_lp
}

/// The three-case construction for contacting lacunae with disjoint bridge-end
/// sets, with first/second/third case precedence and lexicographic tie rules.
fn disjoint_case(ends_l: [Point; 2], ends_lp: [Point; 2]) -> (usize, usize) {
    let d = |p: Point, q: Point| euclid_dist(p, q);
    let mut global_min = f64::INFINITY;
    for &p in &ends_l {
        for &q in &ends_lp {
            global_min = global_min.min(d(p, q));
        }
    }
    let d_l = d(ends_l[0], ends_l[1]);
    let d_lp = d(ends_lp[0], ends_lp[1]);
    global_min = global_min.min(d_l).min(d_lp);

    let nearest = |target: Point, cands: [Point; 2]| -> usize {
        let d0 = d(cands[0], target);
        let d1 = d(cands[1], target);
        if d0 < d1 {
            0
        } else if d1 < d0 {
            1
        } else if cands[0].lex_cmp(&cands[1]) == std::cmp::Ordering::Less {
            0
        } else {
            1
        }
    };

    if d_l <= global_min {
        // the interior side of L is minimal: take A_L and the nearest end of L'
        (0, nearest(ends_l[0], ends_lp))
    } else if d_lp <= global_min {
        (nearest(ends_lp[0], ends_l), 0)
    } else {
        // a cross pair is strictly minimal
        let mut best: Option<(usize, usize)> = None;
        for i in 0..2 {
            for j in 0..2 {
                let dij = d(ends_l[i], ends_lp[j]);
                let better = match best {
                    None => dij <= global_min,
                    Some((bi, bj)) => {
                        let dbest = d(ends_l[bi], ends_lp[bj]);
                        dij < dbest
                            || (dij == dbest
                                && (ends_l[i].lex_cmp(&ends_l[bi]) == std::cmp::Ordering::Less
                                    || (i == bi
                                        && ends_lp[j].lex_cmp(&ends_lp[bj])
                                            == std::cmp::Ordering::Less)))
                    }
                };
                if better {
                    best = Some((i, j));
                }
            }
        }
        best.expect("cross pair must realize the minimum")
    }
}

/// Case analysis for one contacting pair of lacunae given their interior
/// bridge ends (as indices into `E`).
pub fn classify_pair(
    e: &PointSet,
    bridge_l: (usize, usize),
    bridge_lp: (usize, usize),
) -> PairOutcome {
    let set_l = {
        let mut s = [bridge_l.0, bridge_l.1];
        s.sort_unstable();
        s
    };
    let set_lp = {
        let mut s = [bridge_lp.0, bridge_lp.1];
        s.sort_unstable();
        s
    };
    if set_l == set_lp {
        return PairOutcome::InteriorsConnected;
    }
    let common: Vec<usize> = set_l.iter().copied().filter(|i| set_lp.contains(i)).collect();
    match common.len() {
        0 => {
            let ends_l = [e.point(bridge_l.0), e.point(bridge_l.1)];
            let ends_lp = [e.point(bridge_lp.0), e.point(bridge_lp.1)];
            let (i, j) = disjoint_case(ends_l, ends_lp);
            PairOutcome::ExteriorDisjoint { end_l: i, end_lp: j }
        }
        1 => {
            let dcommon = common[0];
            let el = if bridge_l.0 == dcommon { bridge_l.1 } else { bridge_l.0 };
            let elp = if bridge_lp.0 == dcommon { bridge_lp.1 } else { bridge_lp.0 };
            if is_strict_smallest_side(e.point(el), e.point(elp), e.point(dcommon)) {
                PairOutcome::ExteriorShared
            } else {
                PairOutcome::InteriorsConnected
            }
        }
        _ => unreachable!("sets differ but share both points"),
    }
}

/// Standalone exterior-bridge query between two lacunae: the pair of end
/// indices, or `None` when the interior bridges connect directly.
pub fn exterior_bridge(
    e: &PointSet,
    lac: &LacunaStructure,
    la: usize,
    lb: usize,
) -> Result<Option<(usize, usize)>, BridgeError> {
    if !lac.graph.adjacency[la].contains(&lb) {
        return Err(BridgeError::NotContacting(la, lb));
    }
    let bl = lac.lacunae[la].bridge.expect("contacting lacunae imply #E ≥ 2");
    let blp = lac.lacunae[lb].bridge.unwrap();
    Ok(match classify_pair(e, bl, blp) {
        PairOutcome::InteriorsConnected => None,
        PairOutcome::ExteriorDisjoint { end_l, end_lp } => {
            let cl = [bl.0, bl.1][end_l];
            let clp = [blp.0, blp.1][end_lp];
            Some((cl, clp))
        }
        PairOutcome::ExteriorShared => {
            let set_l = [bl.0, bl.1];
            let common = if [blp.0, blp.1].contains(&set_l[0]) { set_l[0] } else { set_l[1] };
            let el = if bl.0 == common { bl.1 } else { bl.0 };
            let elp = if blp.0 == common { blp.1 } else { blp.0 };
            Some((el, elp))
        }
    })
}

/// Builds all bridges, the connected-pair relation, and the family `K_E`.
pub fn build_bridges(
    w: &WhitneyDecomposition,
    lac: &LacunaStructure,
    e: &PointSet,
) -> BridgeAtlas {
    let n_lac = lac.lacunae.len();
    let mut bridges: Vec<Bridge> = Vec::new();
    let mut interior_of = Vec::with_capacity(n_lac);

    if e.len() < 2 {
        return BridgeAtlas {
            bridges,
            interior_of,
            pairs: Vec::new(),
            squares: Vec::new(),
            pair_square: Vec::new(),
        };
    }

    for l in &lac.lacunae {
        let (a, b) = l.bridge.expect("#E ≥ 2 gives every lacuna a bridge");
        interior_of.push(bridges.len());
        bridges.push(Bridge {
            id: bridges.len(),
            kind: BridgeKind::Interior { lacuna: l.id },
            a,
            b,
            contributed: None,
        });
    }

    let mut pairs: Vec<ConnectedPair> = Vec::new();
    for &(la, lb) in &lac.graph.edges {
        let bl = lac.lacunae[la].bridge.unwrap();
        let blp = lac.lacunae[lb].bridge.unwrap();
        match classify_pair(e, bl, blp) {
            PairOutcome::InteriorsConnected => {
                pairs.push(ConnectedPair {
                    t1: interior_of[la].min(interior_of[lb]),
                    t2: interior_of[la].max(interior_of[lb]),
                });
            }
            outcome => {
                let (cl, clp) = match outcome {
                    PairOutcome::ExteriorDisjoint { end_l, end_lp } => {
                        ([bl.0, bl.1][end_l], [blp.0, blp.1][end_lp])
                    }
                    PairOutcome::ExteriorShared => {
                        let common = if [blp.0, blp.1].contains(&bl.0) { bl.0 } else { bl.1 };
                        let el = if bl.0 == common { bl.1 } else { bl.0 };
                        let elp = if blp.0 == common { blp.1 } else { blp.0 };
                        (el, elp)
                    }
                    PairOutcome::InteriorsConnected => unreachable!(),
                };
                let (a, b) = if e.point(cl).lex_cmp(&e.point(clp)) == std::cmp::Ordering::Less {
                    (cl, clp)
                } else {
                    (clp, cl)
                };
                let x = bridges.len();
                bridges.push(Bridge {
                    id: x,
                    kind: BridgeKind::Exterior { la, lb },
                    a,
                    b,
                    contributed: Some([(la, cl), (lb, clp)]),
                });
                pairs.push(ConnectedPair {
                    t1: interior_of[la].min(x),
                    t2: interior_of[la].max(x),
                });
                pairs.push(ConnectedPair {
                    t1: interior_of[lb].min(x),
                    t2: interior_of[lb].max(x),
                });
            }
        }
    }
    pairs.sort_by_key(|p| (p.t1, p.t2));
    pairs.dedup();

    let (squares, pair_square) = assign_squares(w, lac, e, &bridges, &interior_of, &pairs);

    BridgeAtlas {
        bridges,
        interior_of,
        pairs,
        squares,
        pair_square,
    }
}

/// Host square of the pair `(T_L, partner)` seen from lacuna `L`: `Q_L` or
/// `Q^L` per the proof's case split.
fn host_square_for(
    w: &WhitneyDecomposition,
    lac: &LacunaStructure,
    adj: &[Vec<usize>],
    l: usize,
    partner: &Bridge,
) -> usize {
    let lacuna = &lac.lacunae[l];
    match partner.kind {
        BridgeKind::Exterior { .. } => {
            let contributed = partner.contributed.unwrap();
            let other_end = if contributed[0].0 == l { contributed[1].1 } else { contributed[0].1 };
            match lacuna.min_square {
                Some(minid) if lacuna.v.contains(&other_end) => minid,
                _ => lacuna
                    .max_square
                    .expect("bounded side required when min square rule fails"),
            }
        }
        BridgeKind::Interior { lacuna: lp } => {
            match (lacuna.min_square, lacuna.max_square) {
                (None, Some(maxid)) => maxid,
                (Some(minid), None) => minid,
                (Some(minid), Some(maxid)) => {
                    let q = contact_square(w, lac, adj, l, lp);
                    let dq = w.squares[q].square.diam();
                    let geo = (w.squares[minid].square.diam()
                        * w.squares[maxid].square.diam())
                    .sqrt();
                    if dq <= geo {
                        minid
                    } else {
                        maxid
                    }
                }
                (None, None) => unreachable!("lacuna with neither extreme square"),
            }
        }
    }
}

/// The minimal member square of `L` touching a member of `L'`.
fn contact_square(
    w: &WhitneyDecomposition,
    lac: &LacunaStructure,
    adj: &[Vec<usize>],
    l: usize,
    lp: usize,
) -> usize {
    let mut best: Option<(f64, usize)> = None;
    for &q in &lac.lacunae[l].members {
        if adj[q].iter().any(|&k| lac.square_to_lacuna[k] == lp) {
            let h = w.squares[q].square.half_side;
            let better = match best {
                None => true,
                Some((bh, bq)) => h < bh || (h == bh && q < bq),
            };
            if better {
                best = Some((h, q));
            }
        }
    }
    best.expect("contact edge implies touching members").1
}

fn assign_squares(
    w: &WhitneyDecomposition,
    lac: &LacunaStructure,
    e: &PointSet,
    bridges: &[Bridge],
    _interior_of: &[usize],
    pairs: &[ConnectedPair],
) -> (Vec<BridgeSquare>, Vec<usize>) {
    let adj = w.neighbor_graph();
    // pairs attached to each lacuna's interior bridge
    let mut attached: Vec<Vec<usize>> = vec![Vec::new(); lac.lacunae.len()];
    for (pi, p) in pairs.iter().enumerate() {
        for t in [p.t1, p.t2] {
            if let BridgeKind::Interior { lacuna } = bridges[t].kind {
                attached[lacuna].push(pi);
            }
        }
    }

    let mut assigned: Vec<Option<usize>> = vec![None; pairs.len()];
    let mut squares: Vec<BridgeSquare> = Vec::new();

    for l in 0..lac.lacunae.len() {
        if attached[l].is_empty() {
            continue;
        }
        // group by host square; partner bridge id orders the cells
        let mut groups: std::collections::BTreeMap<usize, Vec<(usize, usize)>> = Default::default();
        for &pi in &attached[l] {
            let p = &pairs[pi];
            let partner = if bridges[p.t1].kind == (BridgeKind::Interior { lacuna: l }) {
                p.t2
            } else {
                p.t1
            };
            let host = host_square_for(w, lac, &adj, l, &bridges[partner]);
            groups.entry(host).or_default().push((partner, pi));
        }
        for (host, mut members) in groups {
            members.sort_unstable();
            let m = members.len();
            let hostsq = w.squares[host].square;
            let cell_side = hostsq.diam() / m as f64;
            for (slot, &(_, pi)) in members.iter().enumerate() {
                if assigned[pi].is_some() {
                    continue; // interior–interior pair already carved from the other side
                }
                let col = slot % m;
                let row = slot / m;
                let cx = hostsq.center.x - hostsq.half_side + (col as f64 + 0.5) * cell_side;
                let cy = hostsq.center.y - hostsq.half_side + (row as f64 + 0.5) * cell_side;
                let k = Square::new(Point::new(cx, cy), cell_side / 16.0);
                let id = squares.len();
                let shape = shape_of_pair(e, bridges, &pairs[pi]);
                let curvature = curvature_of_shape(e, &shape);
                assigned[pi] = Some(id);
                squares.push(BridgeSquare {
                    id,
                    square: k,
                    pair: pi,
                    host,
                    cells: m,
                    shape,
                    curvature,
                });
            }
        }
    }

    let pair_square: Vec<usize> = assigned
        .into_iter()
        .map(|a| a.expect("every connected pair owns a square"))
        .collect();
    (squares, pair_square)
}

/// The set of ends of a connected pair, shaped as triangle-with-common-end or
/// segment.
pub fn shape_of_pair(e: &PointSet, bridges: &[Bridge], pair: &ConnectedPair) -> EndsShape {
    let s1 = bridges[pair.t1].end_set();
    let s2 = bridges[pair.t2].end_set();
    if s1 == s2 {
        EndsShape::Segment { a: s1[0], b: s1[1] }
    } else {
        let common = *s1
            .iter()
            .find(|i| s2.contains(i))
            .expect("connected bridges share an end");
        let mut rest: Vec<usize> = s1
            .iter()
            .chain(s2.iter())
            .copied()
            .filter(|&i| i != common)
            .collect();
        rest.sort_unstable();
        rest.dedup();
        debug_assert_eq!(rest.len(), 2);
        let (a, b) = if e.point(rest[0]).lex_cmp(&e.point(rest[1])) == std::cmp::Ordering::Less {
            (rest[0], rest[1])
        } else {
            (rest[1], rest[0])
        };
        let t = Triangle::new([e.point(a), e.point(b), e.point(common)])
            .expect("distinct E-points");
        EndsShape::Triangle {
            a,
            b,
            common,
            degenerate: t.kind == TriangleKind::Degenerate,
        }
    }
}

pub fn curvature_of_shape(e: &PointSet, shape: &EndsShape) -> f64 {
    match shape {
        EndsShape::Segment { .. } => 0.0,
        EndsShape::Triangle { a, b, common, .. } => {
            let t = Triangle::new([e.point(*a), e.point(*b), e.point(*common)]).unwrap();
            menger_curvature(&t)
        }
    }
}

impl BridgeAtlas {
    pub fn pair_end_points(&self, e: &PointSet, pair: usize) -> Vec<Point> {
        let p = &self.pairs[pair];
        let mut idx: Vec<usize> = self.bridges[p.t1]
            .ends()
            .into_iter()
            .chain(self.bridges[p.t2].ends())
            .collect();
        idx.sort_unstable();
        idx.dedup();
        idx.into_iter().map(|i| e.point(i)).collect()
    }

    /// Sup-norm diameter of a pair's end set.
    pub fn pair_ends_diam(&self, e: &PointSet, pair: usize) -> f64 {
        crate::geometry::sup_diam(&self.pair_end_points(e, pair))
    }

    /// Checks pairwise well-separation `diam K + diam K' ≤ dist(K, K')`.
    pub fn well_separated(&self) -> bool {
        for i in 0..self.squares.len() {
            for j in (i + 1)..self.squares.len() {
                let a = &self.squares[i].square;
                let b = &self.squares[j].square;
                if a.diam() + b.diam() > a.dist_to_square(b) {
                    return false;
                }
            }
        }
        true
    }

    /// Smallest dilation factor γ with all pair ends inside γ·K, over all
    /// squares; an instance statistic.
    pub fn ends_containment_factor(&self, e: &PointSet) -> f64 {
        let mut gamma = 0.0_f64;
        for sq in &self.squares {
            for p in self.pair_end_points(e, sq.pair) {
                let need = sup_dist(p, sq.square.center) / sq.square.half_side;
                gamma = gamma.max(need);
            }
        }
        gamma
    }
}
