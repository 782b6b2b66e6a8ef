//! Wedges, the three assumptions on a polygon, and the combinatorial check
//! that wedge groups generate the full deck group of the boundary labelling.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{AffineMap, LatticePoint, LatticePolygon};
use crate::obstruction::{psi_boundary, psi_on, ClassLabel, FiberPartition};
use crate::permgroup::{PermGroup, Permutation};

/// Consecutive lattice points `b_0..b_ℓ` of edge `edge` plus an apex off that edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wedge {
    pub edge: usize,
    pub points: Vec<LatticePoint>,
    pub apex: LatticePoint,
}

impl Wedge {
    pub fn new(poly: &LatticePolygon, edge: usize, points: Vec<LatticePoint>, apex: LatticePoint) -> Result<Self> {
        let e = poly.edge(edge);
        if points.len() < 2 {
            return Err(Error::InvalidInput("a wedge needs at least two edge points".into()));
        }
        for (i, &b) in points.iter().enumerate() {
            if !e.contains(b) || (i > 0 && b - points[i - 1] != e.primitive) {
                return Err(Error::InvalidInput(format!("wedge points must be consecutive on edge {edge}")));
            }
        }
        if e.contains(apex) || !poly.on_boundary(apex) {
            return Err(Error::InvalidInput("apex must be a boundary point off the edge".into()));
        }
        Ok(Wedge { edge: e.index, points, apex })
    }

    /// The wedge using every lattice point of edge `edge`.
    pub fn full_edge(poly: &LatticePolygon, edge: usize, apex: LatticePoint) -> Result<Self> {
        let e = poly.edge(edge);
        Wedge::new(poly, edge, e.lattice_points(), apex)
    }

    pub fn ell(&self) -> i64 {
        self.points.len() as i64 - 1
    }

    pub fn all_points(&self) -> Vec<LatticePoint> {
        let mut v = self.points.clone();
        v.push(self.apex);
        v
    }

    pub fn triangle(&self) -> Result<LatticePolygon> {
        LatticePolygon::convex_hull(&[self.points[0], *self.points.last().unwrap(), self.apex])
    }

    /// Interior lattice points of the triangle, in the polygon's coordinates.
    pub fn interior_points(&self) -> Vec<LatticePoint> {
        match self.triangle() {
            Ok(t) => t.interior_points().into_iter().map(|p| t.to_original(p)).collect(),
            Err(_) => Vec::new(),
        }
    }
}

/// Full-edge wedges `w(j, v)` for every edge `j` and every boundary point `v ∉ Δ_j`.
pub fn enumerate_wedges(poly: &LatticePolygon) -> Vec<Wedge> {
    let bp = poly.boundary_points();
    let mut out = Vec::new();
    for e in poly.edges() {
        for &v in &bp {
            if !e.contains(v) {
                out.push(Wedge { edge: e.index, points: e.lattice_points(), apex: v });
            }
        }
    }
    out
}

/// `w_j = w(j, Δ_{j−2,j−1})`: the apex is the vertex where edge `j − 1` starts.
pub fn distinguished_wedge(poly: &LatticePolygon, j: usize) -> Wedge {
    let n = poly.num_vertices();
    let e = poly.edge(j);
    Wedge { edge: j, points: e.lattice_points(), apex: poly.vertex((j + n - 1) % n) }
}

fn common_interior(a: &Wedge, b: &Wedge) -> Vec<LatticePoint> {
    let pb = b.interior_points();
    a.interior_points().into_iter().filter(|p| pb.contains(p)).collect()
}

fn edge_pair_points(poly: &LatticePolygon, j: usize, k: usize) -> Vec<LatticePoint> {
    let mut pts = poly.edge(j).lattice_points();
    pts.extend(poly.edge(k).lattice_points());
    pts
}

/// Classes of the target hit fewer than `at_least` times; class zero is skipped when `nonzero`.
fn thin_classes(f: &FiberPartition, at_least: usize, nonzero: bool) -> Vec<ClassLabel> {
    let sizes = f.fiber_sizes();
    f.quotient
        .classes()
        .iter()
        .filter(|c| !(nonzero && **c == ClassLabel::ZERO))
        .filter(|c| sizes.get(c).copied().unwrap_or(0) < at_least)
        .copied()
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AFailure {
    pub j: usize,
    /// `j` or `j + 1`: which of the two labellings is too thin.
    pub side: usize,
    pub thin_classes: Vec<ClassLabel>,
    pub common_points: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AReport {
    pub holds: bool,
    pub failures: Vec<AFailure>,
    /// Same check with the targets `Q_{w_j}` themselves.
    pub literal: bool,
    pub literal_failures: Vec<AFailure>,
}

/// Assumption (A). The labelling attached to `w_j` has target the quotient by the
/// lattice of `(Δ_{j−1} ∪ Δ_j) ∩ M`; every class must be hit at least twice on
/// `itr(T_j ∩ T_{j+1})`.
pub fn check_a(poly: &LatticePolygon) -> Result<AReport> {
    let n = poly.num_vertices();
    let mut failures = Vec::new();
    let mut literal_failures = Vec::new();
    for j in 0..n {
        let k = (j + 1) % n;
        let (wj, wk) = (distinguished_wedge(poly, j), distinguished_wedge(poly, k));
        let common = common_interior(&wj, &wk);
        for (side, w) in [(j, &wj), (k, &wk)] {
            let prev = (side + n - 1) % n;
            let f = psi_on(&edge_pair_points(poly, prev, side), &common)?;
            let thin = thin_classes(&f, 2, false);
            if !thin.is_empty() {
                failures.push(AFailure { j, side, thin_classes: thin, common_points: common.len() });
            }
            let lit = psi_on(&w.all_points(), &common)?;
            let thin = thin_classes(&lit, 2, true);
            if !thin.is_empty() {
                literal_failures.push(AFailure { j, side, thin_classes: thin, common_points: common.len() });
            }
        }
    }
    Ok(AReport { holds: failures.is_empty(), literal: literal_failures.is_empty(), failures, literal_failures })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BReport {
    pub holds: bool,
    /// `q_j = |det(v_j, v_{j+1})|`, the index of the lattice of `(Δ_j ∪ Δ_{j+1}) ∩ M`.
    pub q_list: Vec<i64>,
    pub q: i64,
    pub edge_lengths: Vec<i64>,
    pub required_length: i64,
    /// Edges shorter than the requirement.
    pub short_edges: Vec<usize>,
}

pub fn check_b(poly: &LatticePolygon) -> BReport {
    let edges = poly.edges();
    let n = edges.len();
    let q_list: Vec<i64> = (0..n).map(|j| edges[j].primitive.cross(edges[(j + 1) % n].primitive).abs()).collect();
    let q = q_list.iter().copied().min().unwrap_or(1);
    let required_length = if q == 1 { 4 } else { 3 * q - 2 };
    let edge_lengths: Vec<i64> = edges.iter().map(|e| e.length).collect();
    let short_edges: Vec<usize> = (0..n).filter(|&j| edge_lengths[j] < required_length).collect();
    BReport { holds: short_edges.is_empty(), q_list, q, edge_lengths, required_length, short_edges }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CFailure {
    pub j: usize,
    pub v: LatticePoint,
    pub v_next: LatticePoint,
    pub missing: Vec<ClassLabel>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CReport {
    pub holds: bool,
    pub pairs_checked: usize,
    pub failures: Vec<CFailure>,
    /// Same check over every consecutive pair of apexes off `Δ_j`.
    pub literal: bool,
    pub literal_failures: Vec<CFailure>,
}

fn c_failures_for(poly: &LatticePolygon, j: usize, restrict: bool) -> Result<(usize, Vec<CFailure>)> {
    let n = poly.num_vertices();
    let bp = poly.boundary_points();
    let (e, prev, next) = (poly.edge(j), poly.edge((j + n - 1) % n), poly.edge((j + 1) % n));
    let allowed = |v: LatticePoint| {
        !e.contains(v) && !(restrict && (prev.contains_in_relative_interior(v) || next.contains_in_relative_interior(v)))
    };
    let mut checked = 0;
    let mut failures = Vec::new();
    for i in 0..bp.len() {
        let (v, v2) = (bp[i], bp[(i + 1) % bp.len()]);
        if !allowed(v) || !allowed(v2) {
            continue;
        }
        checked += 1;
        let (w, w2) = (Wedge::full_edge(poly, j, v)?, Wedge::full_edge(poly, j, v2)?);
        let common = common_interior(&w, &w2);
        let mut missing = Vec::new();
        for wedge in [&w, &w2] {
            missing.extend(thin_classes(&psi_on(&wedge.all_points(), &common)?, 1, true));
        }
        if !missing.is_empty() {
            failures.push(CFailure { j, v, v_next: v2, missing });
        }
    }
    Ok((checked, failures))
}

/// Assumption (C), over consecutive apexes lying off `Δ_j` and off the relative
/// interiors of the neighbouring edges. Surjective means every nonzero class is hit.
pub fn check_c(poly: &LatticePolygon) -> Result<CReport> {
    let n = poly.num_vertices();
    let per_edge: Vec<Result<((usize, Vec<CFailure>), (usize, Vec<CFailure>))>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..n)
            .map(|j| scope.spawn(move || Ok((c_failures_for(poly, j, true)?, c_failures_for(poly, j, false)?))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut pairs_checked = 0;
    let mut failures = Vec::new();
    let mut literal_failures = Vec::new();
    for r in per_edge {
        let ((c, f), (_, lf)) = r?;
        pairs_checked += c;
        failures.extend(f);
        literal_failures.extend(lf);
    }
    Ok(CReport { holds: failures.is_empty(), pairs_checked, literal: literal_failures.is_empty(), failures, literal_failures })
}

/// `5 · max_j |v_j|²` over the primitive edge directions.
pub fn ell_constant(poly: &LatticePolygon) -> i64 {
    5 * poly.edges().iter().map(|e| e.primitive.norm_sq()).max().unwrap_or(0)
}

/// Smallest `ell_constant` over unimodular changes of coordinates with entries in `[−bound, bound]`.
pub fn ell_min(poly: &LatticePolygon, bound: i64) -> (i64, [[i64; 2]; 2]) {
    let dirs: Vec<LatticePoint> = poly.edges().iter().map(|e| e.primitive).collect();
    let mut best = (ell_constant(poly), [[1, 0], [0, 1]]);
    for a in -bound..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                for d in -bound..=bound {
                    if (a * d - b * c).abs() != 1 {
                        continue;
                    }
                    let m = AffineMap::linear([[a, b], [c, d]]);
                    let v = 5 * dirs.iter().map(|&x| m.apply_linear(x).norm_sq()).max().unwrap_or(0);
                    if v < best.0 {
                        best = (v, [[a, b], [c, d]]);
                    }
                }
            }
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub a: AReport,
    pub b: BReport,
    pub c: CReport,
    pub ell_constant: i64,
}

impl HypothesisReport {
    pub fn all_hold(&self) -> bool {
        self.a.holds && self.b.holds && self.c.holds
    }
}

pub fn check_hypotheses(poly: &LatticePolygon) -> Result<HypothesisReport> {
    Ok(HypothesisReport { a: check_a(poly)?, b: check_b(poly), c: check_c(poly)?, ell_constant: ell_constant(poly) })
}

type P2 = [f64; 2];

fn sub2(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross2(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dist(a: P2, b: P2) -> f64 {
    let d = sub2(a, b);
    d[0].hypot(d[1])
}

/// Unsigned angle at `o` between the rays towards `a` and `b`.
fn angle(o: P2, a: P2, b: P2) -> f64 {
    let (u, v) = (sub2(a, o), sub2(b, o));
    cross2(u, v).abs().atan2(u[0] * v[0] + u[1] * v[1])
}

/// Index of a vertex where `q` fails to turn consistently, if any.
fn nonconvex_vertex(q: [P2; 4]) -> Option<usize> {
    let turn = |i: usize| cross2(sub2(q[i], q[(i + 3) % 4]), sub2(q[(i + 1) % 4], q[i]));
    let sign = turn(0).signum();
    (0..4).find(|&i| turn(i) == 0.0 || turn(i).signum() != sign)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadriRatio {
    /// `AO/AC` from the general formula.
    pub general: f64,
    /// `AO/AC` from the formula through the angle at `P = (AB) ∩ (CD)`, when it applies.
    pub through_p: Option<f64>,
    /// `AO/AC` from intersecting the diagonals directly.
    pub direct: f64,
}

/// The ratio `AO/AC` where `O` is the intersection of the diagonals of `ABCD`.
pub fn quadri_ratio(a: P2, b: P2, c: P2, d: P2) -> Result<QuadriRatio> {
    if let Some(i) = nonconvex_vertex([a, b, c, d]) {
        return Err(Error::NonConvex(i));
    }
    let (ab, ad, bc, cd) = (dist(a, b), dist(a, d), dist(b, c), dist(c, d));
    let (ta, tb) = (angle(a, b, d), angle(b, a, c));
    let num = ab * ad * ta.sin();
    let general = num / (num + ab * bc * tb.sin() - ad * bc * (ta + tb).sin());

    let (u, w) = (sub2(b, a), sub2(d, c));
    let denom = cross2(u, w);
    let scale = u[0].hypot(u[1]) * w[0].hypot(w[1]);
    let theta = if denom.abs() <= 1e-14 * scale {
        Some(0.0)
    } else {
        // P = A + s (B − A) on both lines; A ∈ PB means s ≤ 0.
        let s = cross2(sub2(c, a), w) / denom;
        (s <= 0.0).then(|| {
            let p = [a[0] + s * u[0], a[1] + s * u[1]];
            if s == 0.0 { ta } else { angle(p, b, d) }
        })
    };
    let through_p = theta.map(|t| num / (num + cd * (ad * (ta - t).sin() + ab * t.sin())));

    let ac = sub2(c, a);
    let bd = sub2(d, b);
    let direct = cross2(sub2(b, a), bd) / cross2(ac, bd);
    Ok(QuadriRatio { general, through_p, direct })
}

/// Transpositions of interior points of `T = conv(w)` sharing a fiber of `Ψ_w`,
/// as permutations of the interior points of `poly` in their listed order.
pub fn wedge_group_generators(poly: &LatticePolygon, w: &Wedge) -> Result<Vec<Permutation>> {
    let domain = poly.interior_points();
    let f = psi_on(&w.all_points(), &w.interior_points())?;
    let mut out = Vec::new();
    for fiber in f.fibers().values() {
        let idx: Vec<usize> = fiber.iter().map(|p| domain.iter().position(|q| q == p).expect("T lies in the polygon")).collect();
        for i in 0..idx.len() {
            for j in i + 1..idx.len() {
                out.push(Permutation::transposition(domain.len(), idx[i], idx[j]));
            }
        }
    }
    Ok(out)
}

pub const DEFAULT_MAX_DOMAIN: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub hypotheses: HypothesisReport,
    pub hypotheses_met: bool,
    pub domain_size: usize,
    pub wedge_count: usize,
    pub generator_count: usize,
    /// Decimal strings, since the orders overflow machine integers.
    pub generated_order: String,
    pub deck_order: String,
    pub equal: bool,
    /// The generated group contains every transposition of two points of
    /// `itr(T_j)` in a common fiber of `Ψ_∂Δ`, for each `j`.
    pub strict_transpositions: bool,
}

pub fn verify_theorem_combinatorics(poly: &LatticePolygon, max_domain: usize) -> Result<TheoremCheck> {
    let domain = poly.interior_points();
    if domain.len() > max_domain {
        return Err(Error::DomainTooLarge { size: domain.len(), limit: max_domain });
    }
    let hypotheses = check_hypotheses(poly)?;
    let wedges = enumerate_wedges(poly);
    let per_wedge: Vec<Result<Vec<Permutation>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = wedges.iter().map(|w| scope.spawn(move || wedge_group_generators(poly, w))).collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut gens = BTreeSet::new();
    for g in per_wedge {
        gens.extend(g?);
    }
    let gens: Vec<Permutation> = gens.into_iter().collect();
    let group = PermGroup::generated_by(domain.len(), &gens)?;
    let generated = group.order();
    let boundary = psi_boundary(poly)?;
    let deck = boundary.aut_order();

    let mut strict = true;
    for j in 0..poly.num_vertices() {
        let inside = distinguished_wedge(poly, j).interior_points();
        let fibers = boundary.restrict(&inside).fibers();
        for fiber in fibers.values() {
            for (i, x) in fiber.iter().enumerate() {
                for y in &fiber[i + 1..] {
                    let (a, b) = (domain.iter().position(|p| p == x).unwrap(), domain.iter().position(|p| p == y).unwrap());
                    strict &= group.contains(&Permutation::transposition(domain.len(), a, b));
                }
            }
        }
    }
    Ok(TheoremCheck {
        hypotheses_met: hypotheses.all_hold(),
        hypotheses,
        domain_size: domain.len(),
        wedge_count: wedges.len(),
        generator_count: gens.len(),
        equal: generated == deck,
        generated_order: generated.to_string(),
        deck_order: deck.to_string(),
        strict_transpositions: strict,
    })
}
