//! Degeneration of a rational curve along the subdivision induced by a wedge.
//!
//! In normalized coordinates the wedge triangle is `T = conv{(0,0), (ℓ,0), (p,q)}`
//! with its base edge `ε` on the boundary. The family
//! `φ_z(t) = (∏_{J′}(t − z a)^α ∏_{J″}(1 − z t/a)^α, ∏_{J′}(t − z a)^β ∏_{J_T}(t − a) ∏_{J″}(1 − z t/a)^β)`
//! breaks as `z → 0` into curves over `Δ′`, `T` and `Δ″`.

use std::collections::BTreeMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::curves::{newton_node, self_intersections, triangle_nodes, Factor, FactoredCurve, NodePair, TriangleParam};
use crate::error::{Error, Result};
use crate::hungarian::min_cost_assignment;
use crate::hypotheses::Wedge;
use crate::lattice::{AffineMap, LatticePoint, LatticePolygon};
use crate::monodromy::{track_all, ParamLoop};
use crate::permgroup::Permutation;
use crate::poly::C64;

/// The three linear pieces of the Viro function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViroFunction {
    pub ell: i64,
    pub p: i64,
    pub q: i64,
}

impl ViroFunction {
    pub fn prime(&self, x: LatticePoint) -> i64 {
        self.p * x.y - self.q * x.x
    }

    pub fn second(&self, x: LatticePoint) -> i64 {
        self.q * (x.x - self.ell) + (self.ell - self.p) * x.y
    }

    /// `ν = max(0, ν′, ν″)`, which is the piecewise definition on the polygon.
    pub fn value(&self, x: LatticePoint) -> i64 {
        0.max(self.prime(x)).max(self.second(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Prime,
    Triangle,
    Second,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WedgeSubdivision {
    pub wedge: Wedge,
    /// Unimodular map from working coordinates to normalized coordinates.
    pub map: AffineMap,
    pub nu: ViroFunction,
    /// `1 + max ν` over the polygon.
    pub m: i64,
    /// Lattice points of `Δ` in normalized coordinates.
    pub points: Vec<LatticePoint>,
    pub triangle: LatticePolygon,
    pub delta_prime: Option<LatticePolygon>,
    pub delta_second: Option<LatticePolygon>,
    /// Interior points of each part, plus interior points of `Δ` on `ε′` and `ε″`.
    pub interior_prime: usize,
    pub interior_triangle: usize,
    pub interior_second: usize,
    pub edge_prime: usize,
    pub edge_second: usize,
    /// Part owning each primitive boundary segment, in slot order.
    pub slot_parts: Vec<Part>,
    /// Primitive inner normal of each slot in normalized coordinates.
    pub slot_normals: Vec<LatticePoint>,
}

impl WedgeSubdivision {
    pub fn ell(&self) -> i64 {
        self.nu.ell
    }

    pub fn total_interior(&self) -> usize {
        self.interior_prime + self.interior_triangle + self.interior_second + self.edge_prime + self.edge_second
    }

    /// Slot indices of one part, in boundary order.
    pub fn slots_of(&self, part: Part) -> Vec<usize> {
        (0..self.slot_parts.len()).filter(|&i| self.slot_parts[i] == part).collect()
    }
}

fn hull_of(points: &[LatticePoint]) -> Option<LatticePolygon> {
    LatticePolygon::convex_hull(points).ok()
}

/// Normalizing map and the subdivision `Δ = Δ′ ∪ T ∪ Δ″`.
pub fn subdivide(poly: &LatticePolygon, wedge: &Wedge) -> Result<WedgeSubdivision> {
    let e = poly.edge(wedge.edge);
    let u = e.primitive;
    let b0 = wedge.points[0];
    let ell = wedge.ell();
    let q = u.cross(wedge.apex - b0);
    if q <= 0 {
        return Err(Error::DegeneratePolygon("wedge triangle is degenerate".into()));
    }
    // Columns (u, w) with det 1; its inverse sends u to (1, 0).
    let g = u.x.extended_gcd(&u.y);
    let (wx, wy) = (-g.y * g.gcd, g.x * g.gcd);
    let lin = [[wy, -wx], [-u.y, u.x]];
    let apex0 = AffineMap::linear(lin).apply_linear(wedge.apex - b0);
    let s = apex0.x.div_euclid(q);
    let shear = AffineMap::linear([[1, -s], [0, 1]]);
    let linear = shear.compose(&AffineMap::linear(lin));
    let map = AffineMap { m: linear.m, b: -linear.apply_linear(b0) };
    debug_assert!(map.is_unimodular());
    let apex = map.apply(wedge.apex);
    debug_assert_eq!(map.apply(*wedge.points.last().unwrap()), LatticePoint::new(ell, 0));
    let nu = ViroFunction { ell, p: apex.x, q: apex.y };

    let points: Vec<LatticePoint> = poly.lattice_points().into_iter().map(|x| map.apply(x)).collect();
    let m = 1 + points.iter().map(|&x| nu.value(x)).max().unwrap_or(0);
    let triangle = LatticePolygon::convex_hull(&[LatticePoint::new(0, 0), LatticePoint::new(ell, 0), apex])?;
    let prime_pts: Vec<LatticePoint> = points.iter().copied().filter(|&x| nu.prime(x) >= 0).collect();
    let second_pts: Vec<LatticePoint> = points.iter().copied().filter(|&x| nu.second(x) >= 0).collect();
    let delta_prime = hull_of(&prime_pts);
    let delta_second = hull_of(&second_pts);
    let inside = |x: LatticePoint| poly.contains_strictly(map.inverse().unwrap().apply(x));
    let interior_prime = delta_prime.as_ref().map_or(0, |d| d.node_count());
    let interior_second = delta_second.as_ref().map_or(0, |d| d.node_count());
    let interior_triangle = triangle.node_count();
    let edge_prime = points.iter().filter(|&&x| nu.prime(x) == 0 && nu.second(x) < 0 && x.y > 0 && x != apex && inside(x)).count();
    let edge_second = points.iter().filter(|&&x| nu.second(x) == 0 && nu.prime(x) < 0 && x.y > 0 && x != apex && inside(x)).count();

    // Walk the boundary counterclockwise from the apex: J′, then ε, then J″.
    let bp = poly.boundary_points();
    let n = bp.len();
    let pos = |x: LatticePoint| bp.iter().position(|&y| y == x).expect("wedge points lie on the boundary");
    let (iv, ib0, ibl) = (pos(wedge.apex), pos(b0), pos(*wedge.points.last().unwrap()));
    let mut slot_parts = vec![Part::Second; n];
    let mut i = iv;
    while i != ib0 {
        slot_parts[i] = Part::Prime;
        i = (i + 1) % n;
    }
    while i != ibl {
        slot_parts[i] = Part::Triangle;
        i = (i + 1) % n;
    }
    let slot_normals = (0..n).map(|i| map.apply_linear(bp[(i + 1) % n] - bp[i]).rotate()).collect();

    let sub = WedgeSubdivision {
        wedge: wedge.clone(),
        map,
        nu,
        m,
        points,
        triangle,
        delta_prime,
        delta_second,
        interior_prime,
        interior_triangle,
        interior_second,
        edge_prime,
        edge_second,
        slot_parts,
        slot_normals,
    };
    debug_assert_eq!(sub.total_interior(), poly.node_count());
    Ok(sub)
}

/// Parameters of the degenerating family, one per boundary slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerationFamily {
    pub subdivision: WedgeSubdivision,
    pub params: Vec<C64>,
}

/// The curves over `Δ′`, `T` and `Δ″` in the limit `z → 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitComponents {
    pub prime: FactoredCurve,
    pub triangle: TriangleParam,
    pub second: FactoredCurve,
}

impl DegenerationFamily {
    pub fn new(subdivision: WedgeSubdivision, params: Vec<C64>) -> Result<Self> {
        if params.len() != subdivision.slot_parts.len() {
            return Err(Error::InvalidInput(format!("expected {} parameters", subdivision.slot_parts.len())));
        }
        if params.iter().any(|a| a.norm() == 0.0 || !a.is_finite()) {
            return Err(Error::InvalidInput("parameters must be finite and nonzero".into()));
        }
        for i in 0..params.len() {
            for j in 0..params.len() {
                if subdivision.slot_parts[i] != subdivision.slot_parts[j] && (params[i] - params[j]).norm() == 0.0 {
                    return Err(Error::InvalidInput("parameter groups must be disjoint".into()));
                }
            }
        }
        Ok(DegenerationFamily { subdivision, params })
    }

    /// Real parameters `spacing · 1, 2, …` read counterclockwise from the apex,
    /// so that `J′ < J_T < J″`.
    pub fn harnack(poly: &LatticePolygon, wedge: &Wedge, spacing: f64) -> Result<Self> {
        let sub = subdivide(poly, wedge)?;
        let n = sub.slot_parts.len();
        let start = poly.boundary_points().iter().position(|&x| x == wedge.apex).unwrap();
        let mut params = vec![C64::new(0.0, 0.0); n];
        for r in 0..n {
            params[(start + r) % n] = C64::new(spacing * (r + 1) as f64, 0.0);
        }
        DegenerationFamily::new(sub, params)
    }

    pub fn triangle_params(&self) -> Vec<C64> {
        self.subdivision.slots_of(Part::Triangle).iter().map(|&i| self.params[i]).collect()
    }

    pub fn with_triangle_params(&self, a: &[C64]) -> DegenerationFamily {
        let mut out = self.clone();
        for (k, i) in self.subdivision.slots_of(Part::Triangle).into_iter().enumerate() {
            out.params[i] = a[k];
        }
        out
    }

    /// The curve `φ_z` in normalized coordinates.
    pub fn curve(&self, z: f64) -> FactoredCurve {
        let one = C64::new(1.0, 0.0);
        let factors = self
            .params
            .iter()
            .zip(&self.subdivision.slot_parts)
            .zip(&self.subdivision.slot_normals)
            .map(|((&a, part), n)| match part {
                Part::Prime => Factor { u: -a * z, v: one, alpha: n.x, beta: n.y },
                Part::Triangle => Factor { u: -a, v: one, alpha: n.x, beta: n.y },
                Part::Second => Factor { u: one, v: -z / a, alpha: n.x, beta: n.y },
            })
            .collect();
        FactoredCurve { z0: one, w0: one, factors }
    }

    /// `(x, y, z)` on the degenerating family; `None` at zeros and poles.
    pub fn eval(&self, z: f64, t: C64) -> Option<(C64, C64, C64)> {
        if z == 0.0 {
            return None;
        }
        self.curve(z).evaluate(t).map(|(x, y)| (x, y, C64::new(z, 0.0)))
    }

    pub fn limit_components(&self) -> LimitComponents {
        let one = C64::new(1.0, 0.0);
        let sub = &self.subdivision;
        let ViroFunction { ell, p, q } = sub.nu;
        let mut prime = Vec::new();
        let mut second = vec![Factor { u: C64::new(0.0, 0.0), v: one, alpha: q, beta: ell - p }];
        let mut w0 = one;
        for ((&a, part), n) in self.params.iter().zip(&sub.slot_parts).zip(&sub.slot_normals) {
            match part {
                Part::Prime => prime.push(Factor::root(a, n.x, n.y)),
                Part::Triangle => w0 *= -a,
                Part::Second => second.push(Factor { u: one, v: -one / a, alpha: n.x, beta: n.y }),
            }
        }
        LimitComponents {
            prime: FactoredCurve { z0: one, w0, factors: prime },
            triangle: TriangleParam { ell, p, q, a: self.triangle_params() },
            second: FactoredCurve { z0: one, w0: one, factors: second },
        }
    }

    /// `sup_t |π∘φ_z(t) − φ^T(t)|` over sample points on a circle of radius `radius`.
    pub fn limit_distance(&self, z: f64, radius: f64, samples: usize) -> f64 {
        let tri = self.limit_components().triangle;
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let t = C64::from_polar(radius, std::f64::consts::TAU * (i as f64 + 0.25) / samples as f64);
            if let (Some((x, y, _)), Some((xt, yt))) = (self.eval(z, t), tri.evaluate(t)) {
                worst = worst.max((x - xt).norm()).max((y - yt).norm());
            }
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Prime,
    Triangle,
    Second,
    EdgePrime,
    EdgeSecond,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeTrajectory {
    pub start: NodePair,
    pub end: NodePair,
    pub kind: NodeKind,
    /// Relative distance to the matched limit node, in that component's chart.
    pub limit_distance: Option<f64>,
    /// Index of the matched limit node within its component.
    pub limit_index: Option<usize>,
    /// `log |t s|^{1/2} / log z` at the end of the schedule.
    pub scale_exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerationReport {
    pub z_min: f64,
    pub trajectories: Vec<NodeTrajectory>,
    pub counts: BTreeMap<NodeKind, usize>,
    pub expected: BTreeMap<NodeKind, usize>,
    pub consistent: bool,
    pub steps_used: usize,
}

/// Nodes of each limit component, as parameter pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitNodes {
    pub prime: Vec<(C64, C64)>,
    /// Triangle node pairs in `(k, root index)` order.
    pub triangle: Vec<(C64, C64)>,
    pub triangle_labels: Vec<(i64, usize)>,
    pub second: Vec<(C64, C64)>,
}

pub fn limit_nodes(fam: &DegenerationFamily, tol: f64) -> Result<LimitNodes> {
    let lim = fam.limit_components();
    let sub = &fam.subdivision;
    let pairs = |c: &FactoredCurve, n: usize| -> Result<Vec<(C64, C64)>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        Ok(self_intersections(c, Some(n), tol)?.into_iter().map(|p| (p.t, p.s)).collect())
    };
    let tn = triangle_nodes(&lim.triangle, tol)?;
    let mut triangle = Vec::new();
    let mut triangle_labels = Vec::new();
    for (k, c) in &tn.classes {
        for (i, &pr) in c.pairs.iter().enumerate() {
            triangle.push(pr);
            triangle_labels.push((*k, i));
        }
    }
    Ok(LimitNodes {
        prime: pairs(&lim.prime, sub.interior_prime)?,
        triangle,
        triangle_labels,
        second: pairs(&lim.second, sub.interior_second)?,
    })
}

fn log_dist(a: C64, b: C64) -> f64 {
    (a / b).ln().norm()
}

fn log_separation(nodes: &[NodePair]) -> f64 {
    let pts: Vec<C64> = nodes.iter().flat_map(|n| [n.t, n.s]).collect();
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.min(log_dist(pts[i], pts[j]));
        }
    }
    best
}

fn pair_log_dist(a: &NodePair, b: &NodePair) -> f64 {
    let direct = log_dist(a.t, b.t).max(log_dist(a.s, b.s));
    let swapped = log_dist(a.t, b.s).max(log_dist(a.s, b.t));
    direct.min(swapped)
}

/// One continuation step for all nodes; `None` when the step must be refined.
fn corrector(curve: &FactoredCurve, current: &[NodePair], predicted: &[(C64, C64)], tol: f64) -> Option<Vec<NodePair>> {
    let sep = log_separation(current);
    let mut out = Vec::with_capacity(current.len());
    for (n, &(t, s)) in current.iter().zip(predicted) {
        let m = newton_node(curve, t, s, tol).ok()?;
        if pair_log_dist(n, &m) > (sep / 3.0).min(0.5) {
            return None;
        }
        out.push(m);
    }
    if out.len() > 1 && log_separation(&out) == 0.0 {
        return None;
    }
    Some(out)
}

/// Continues nodes of `φ_z` from `z_from` to `z_to` in geometric steps.
pub fn continue_in_z(
    fam: &DegenerationFamily,
    nodes: &[NodePair],
    z_from: f64,
    z_to: f64,
    steps_per_decade: usize,
    tol: f64,
) -> Result<(Vec<NodePair>, usize)> {
    let newton_tol = tol.max(1e-12);
    let total = (z_to / z_from).ln();
    let full = (std::f64::consts::LN_10 / steps_per_decade as f64) / total.abs();
    let mut current = nodes.to_vec();
    let mut previous: Option<(Vec<NodePair>, f64)> = None;
    let (mut theta, mut h) = (0.0f64, full.min(1.0));
    let mut steps = 0;
    while theta < 1.0 {
        let next = (theta + h).min(1.0);
        let z = z_from * (total * next).exp();
        let predicted: Vec<(C64, C64)> = match &previous {
            Some((prev, dprev)) => {
                let r = (next - theta) / dprev;
                current.iter().zip(prev).map(|(c, p)| (c.t * (c.t / p.t).powf(r), c.s * (c.s / p.s).powf(r))).collect()
            }
            None => current.iter().map(|c| (c.t, c.s)).collect(),
        };
        match corrector(&fam.curve(z), &current, &predicted, newton_tol) {
            Some(moved) => {
                previous = Some((std::mem::replace(&mut current, moved), next - theta));
                theta = next;
                steps += 1;
                h = (h * 2.0).min(full);
            }
            None => {
                h /= 2.0;
                if h < 1e-9 {
                    return Err(Error::TrackingFailure { theta, reason: format!("z-continuation stalled near z = {z:.3e}") });
                }
            }
        }
    }
    Ok((current, steps))
}

/// Continues nodes at fixed `z` while the triangle parameters run along `lp`.
pub fn continue_in_params(fam: &DegenerationFamily, nodes: &[NodePair], z: f64, lp: &ParamLoop, tol: f64) -> Result<(Vec<NodePair>, usize)> {
    let newton_tol = tol.max(1e-12);
    let full = 1.0 / lp.settings.steps as f64;
    let mut current = nodes.to_vec();
    let (mut theta, mut h) = (0.0f64, full);
    let mut steps = 0;
    while theta < 1.0 {
        let next = (theta + h).min(1.0);
        let curve = fam.with_triangle_params(&lp.at(next)).curve(z);
        let predicted: Vec<(C64, C64)> = current.iter().map(|c| (c.t, c.s)).collect();
        match corrector(&curve, &current, &predicted, newton_tol) {
            Some(moved) => {
                current = moved;
                theta = next;
                steps += 1;
                h = (h * 2.0).min(full);
            }
            None => {
                h /= 2.0;
                if h < lp.settings.min_step {
                    return Err(Error::TrackingFailure { theta, reason: "parameter continuation step underflow".into() });
                }
            }
        }
    }
    Ok((current, steps))
}

fn chart_match(t: C64, s: C64, pairs: &[(C64, C64)]) -> Option<(usize, f64)> {
    let rel = |a: C64, b: C64| (a - b).norm() / b.norm().max(1.0);
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| (i, rel(t, a).max(rel(s, b)).min(rel(t, b).max(rel(s, a)))))
        .min_by(|x, y| x.1.total_cmp(&y.1))
}

/// Threshold on the relative chart distance for matching a limit node.
pub const MATCH_FACTOR: f64 = 10.0;

fn classify(end: &NodePair, z: f64, lim: &LimitNodes, scale: f64) -> (NodeKind, Option<f64>, Option<usize>) {
    let threshold = MATCH_FACTOR * z * scale;
    let candidates = [
        (NodeKind::Triangle, chart_match(end.t, end.s, &lim.triangle)),
        (NodeKind::Prime, chart_match(end.t / z, end.s / z, &lim.prime)),
        (NodeKind::Second, chart_match(end.t * z, end.s * z, &lim.second)),
    ];
    let best = candidates
        .iter()
        .filter_map(|(k, m)| m.map(|(i, d)| (*k, i, d)))
        .min_by(|a, b| a.2.total_cmp(&b.2));
    if let Some((kind, i, d)) = best {
        if d < threshold {
            return (kind, Some(d), Some(i));
        }
    }
    let gm = (end.t.norm() * end.s.norm()).sqrt();
    (if gm < 1.0 { NodeKind::EdgePrime } else { NodeKind::EdgeSecond }, None, None)
}

/// Scale of the parameters, used to make the matching threshold dimensionless.
fn param_scale(fam: &DegenerationFamily) -> f64 {
    fam.params.iter().map(|a| a.norm()).fold(1.0, f64::max)
}

/// Tracks all nodes of `φ_1` down to `z_min` and classifies their limits.
pub fn track_degeneration_nodes(fam: &DegenerationFamily, z_min: f64, tol: f64) -> Result<DegenerationReport> {
    if !(z_min > 0.0 && z_min < 1.0) {
        return Err(Error::InvalidInput("z_min must lie in (0, 1)".into()));
    }
    let sub = &fam.subdivision;
    let start = self_intersections(&fam.curve(1.0), Some(sub.total_interior()), tol)?;
    let (end, steps_used) = continue_in_z(fam, &start, 1.0, z_min, 16, tol)?;
    let lim = limit_nodes(fam, tol)?;
    let scale = param_scale(fam);
    let mut trajectories = Vec::new();
    let mut counts = BTreeMap::new();
    for (s, e) in start.iter().zip(&end) {
        let (kind, d, idx) = classify(e, z_min, &lim, scale);
        *counts.entry(kind).or_insert(0) += 1;
        let gm = (e.t.norm() * e.s.norm()).sqrt();
        trajectories.push(NodeTrajectory {
            start: *s,
            end: *e,
            kind,
            limit_distance: d,
            limit_index: idx,
            scale_exponent: gm.ln() / z_min.ln(),
        });
    }
    let expected: BTreeMap<NodeKind, usize> = [
        (NodeKind::Prime, sub.interior_prime),
        (NodeKind::Triangle, sub.interior_triangle),
        (NodeKind::Second, sub.interior_second),
        (NodeKind::EdgePrime, sub.edge_prime),
        (NodeKind::EdgeSecond, sub.edge_second),
    ]
    .into_iter()
    .filter(|(_, n)| *n > 0)
    .collect();
    let consistent = counts == expected;
    Ok(DegenerationReport { z_min, trajectories, counts, expected, consistent, steps_used })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchLoopReport {
    /// Permutation of the nodes of `φ_1` in the order of the degeneration report.
    pub permutation: Permutation,
    /// The inner loop's monodromy on triangle nodes, labelled `(k, index)`.
    pub triangle_permutation: Permutation,
    pub classification: Vec<NodeKind>,
    /// Fixes non-triangle nodes and acts on triangle nodes as the inner loop does.
    pub consistent: bool,
    pub residual: f64,
}

/// Degenerate to `z_min`, run `inner` on the triangle parameters, come back.
pub fn patch_loop(fam: &DegenerationFamily, inner: &ParamLoop, z_min: f64, tol: f64) -> Result<PatchLoopReport> {
    let base_t = fam.triangle_params();
    if inner.base.len() != base_t.len() || inner.base.iter().zip(&base_t).any(|(a, b)| (a - b).norm() > 0.0) {
        return Err(Error::InvalidInput("inner loop must be based at the triangle parameters".into()));
    }
    let report = track_degeneration_nodes(fam, z_min, tol)?;
    let ends: Vec<NodePair> = report.trajectories.iter().map(|t| t.end).collect();
    let (after, _) = continue_in_params(fam, &ends, z_min, inner, tol)?;
    let (back, _) = continue_in_z(fam, &after, z_min, 1.0, 16, tol)?;
    let starts: Vec<NodePair> = report.trajectories.iter().map(|t| t.start).collect();
    let cost: Vec<Vec<f64>> = back.iter().map(|a| starts.iter().map(|b| pair_log_dist(a, b)).collect()).collect();
    let assign = min_cost_assignment(&cost);
    let residual = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).fold(0.0, f64::max);
    let permutation = Permutation::from_images(assign)?;

    let lim = fam.limit_components();
    let tracked = track_all(&lim.triangle, inner, tol)?;
    let triangle_permutation = tracked.combined();
    let classification: Vec<NodeKind> = report.trajectories.iter().map(|t| t.kind).collect();
    let mut consistent = true;
    for (i, t) in report.trajectories.iter().enumerate() {
        let image = permutation.apply(i);
        match (t.kind, t.limit_index) {
            (NodeKind::Triangle, Some(label)) => {
                let target = triangle_permutation.apply(label);
                let j = report.trajectories.iter().position(|u| u.kind == NodeKind::Triangle && u.limit_index == Some(target));
                consistent &= j == Some(image);
            }
            _ => consistent &= image == i,
        }
    }
    Ok(PatchLoopReport { permutation, triangle_permutation, classification, consistent, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monodromy::discriminant_loop;

    fn pt(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    fn square_wedge(d: i64, ell: i64, apex: LatticePoint) -> (LatticePolygon, Wedge) {
        let sq = LatticePolygon::square(d).unwrap();
        let w = Wedge::new(&sq, 0, (0..=ell).map(|i| pt(i, 0)).collect(), apex).unwrap();
        (sq, w)
    }

    #[test]
    fn triangle_wedge_has_empty_parts() {
        let tri = LatticePolygon::triangle(5, 7, 6).unwrap();
        let w = Wedge::full_edge(&tri, 0, pt(7, 6)).unwrap();
        let sub = subdivide(&tri, &w).unwrap();
        assert!(sub.delta_prime.is_none() && sub.delta_second.is_none());
        assert_eq!(sub.interior_triangle, 12);
        assert_eq!((sub.nu.ell, sub.nu.q), (5, 6));
    }

    #[test]
    fn square_subdivision_counts_and_convexity() {
        let (sq, w) = square_wedge(5, 3, pt(0, 4));
        let sub = subdivide(&sq, &w).unwrap();
        assert_eq!((sub.interior_prime, sub.interior_triangle, sub.interior_second), (0, 3, 13));
        assert_eq!((sub.edge_prime, sub.edge_second), (0, 0));
        // Exact check of the piecewise definition against the maximum of the pieces.
        for &x in &sub.points {
            let in_t = sub.triangle.contains(sub.triangle.from_original(x));
            let v = sub.nu.value(x);
            if in_t {
                assert_eq!(v, 0);
            } else {
                assert!(v > 0);
            }
            if sub.nu.prime(x) >= 0 && sub.nu.second(x) <= 0 {
                assert_eq!(v, sub.nu.prime(x));
            }
            if sub.nu.second(x) >= 0 && sub.nu.prime(x) <= 0 {
                assert_eq!(v, sub.nu.second(x));
            }
        }
        // Midpoint convexity on all pairs of lattice points with lattice midpoints.
        for &a in &sub.points {
            for &b in &sub.points {
                let s = a + b;
                if s.x % 2 == 0 && s.y % 2 == 0 {
                    let mid = LatticePoint::new(s.x / 2, s.y / 2);
                    assert!(2 * sub.nu.value(mid) <= sub.nu.value(a) + sub.nu.value(b));
                }
            }
        }
        assert_eq!(sub.m, 1 + sub.points.iter().map(|&x| sub.nu.value(x)).max().unwrap());
    }

    #[test]
    fn boundary_node_counts() {
        let (sq, w) = square_wedge(4, 4, pt(2, 4));
        let sub = subdivide(&sq, &w).unwrap();
        assert_eq!(
            (sub.interior_prime, sub.interior_triangle, sub.interior_second, sub.edge_prime, sub.edge_second),
            (1, 5, 1, 1, 1)
        );
    }

    #[test]
    fn family_at_one_is_the_curve() {
        let (sq, w) = square_wedge(5, 3, pt(0, 4));
        let fam = DegenerationFamily::harnack(&sq, &w, 1.0).unwrap();
        let sub = &fam.subdivision;
        let c = fam.curve(1.0);
        let direct = FactoredCurve {
            z0: C64::new(1.0, 0.0),
            w0: C64::new(1.0, 0.0),
            factors: fam.params.iter().zip(&sub.slot_normals).map(|(&a, n)| Factor::root(a, n.x, n.y)).collect(),
        };
        let t0 = C64::new(0.3, 0.7);
        let (x0, y0) = c.evaluate(t0).unwrap();
        let (dx0, dy0) = direct.evaluate(t0).unwrap();
        for t in [C64::new(2.5, -1.0), C64::new(-4.0, 3.0), C64::new(11.0, 0.2)] {
            let (x, y) = c.evaluate(t).unwrap();
            let (dx, dy) = direct.evaluate(t).unwrap();
            assert!(((x / dx) / (x0 / dx0) - 1.0).norm() < 1e-10);
            assert!(((y / dy) / (y0 / dy0) - 1.0).norm() < 1e-10);
        }
        assert_eq!(fam.eval(0.25, t0).unwrap().2, C64::new(0.25, 0.0));
        let (x, y, _) = fam.eval(0.1, t0).unwrap();
        let (xc, yc, _) = fam.eval(0.1, t0.conj()).unwrap();
        assert!((x.conj() - xc).norm() < 1e-12 * x.norm() && (y.conj() - yc).norm() < 1e-12 * y.norm());
    }

    #[test]
    fn limits_are_linear_in_z() {
        let (sq, w) = square_wedge(5, 3, pt(0, 4));
        let fam = DegenerationFamily::harnack(&sq, &w, 1.0).unwrap();
        let r = fam.limit_distance(1e-3, 6.0, 20) / fam.limit_distance(1e-4, 6.0, 20);
        assert!((5.0..=20.0).contains(&r), "{r}");
        // The Δ″ chart: t = t″/z and π″ = (x z^q, y z^{ℓ−p}).
        let lim = fam.limit_components();
        let ViroFunction { ell, p, q } = fam.subdivision.nu;
        let dist = |z: f64| {
            let t2 = C64::new(0.8, 0.9);
            let (x, y, _) = fam.eval(z, t2 / z).unwrap();
            let (xl, yl) = lim.second.evaluate(t2).unwrap();
            (x * z.powi(q as i32) - xl).norm().max((y * z.powi((ell - p) as i32) - yl).norm())
        };
        let r2 = dist(1e-3) / dist(1e-4);
        assert!((5.0..=20.0).contains(&r2), "{r2}");
    }

    #[test]
    fn degeneration_classifies_square_nodes() {
        let (sq, w) = square_wedge(5, 3, pt(0, 4));
        let fam = DegenerationFamily::harnack(&sq, &w, 1.0).unwrap();
        let rep = track_degeneration_nodes(&fam, 1e-4, 1e-10).unwrap();
        assert_eq!(rep.trajectories.len(), 16);
        assert!(rep.consistent, "{:?} vs {:?}", rep.counts, rep.expected);
    }

    #[test]
    fn degeneration_with_edge_nodes() {
        let (sq, w) = square_wedge(4, 4, pt(2, 4));
        let fam = DegenerationFamily::harnack(&sq, &w, 1.0).unwrap();
        let rep = track_degeneration_nodes(&fam, 1e-4, 1e-10).unwrap();
        assert!(rep.consistent, "{:?} vs {:?}", rep.counts, rep.expected);
    }

    #[test]
    fn patch_loops() {
        let (sq, w) = square_wedge(5, 3, pt(0, 4));
        let fam = DegenerationFamily::harnack(&sq, &w, 1.0).unwrap();
        let trivial = ParamLoop::constant(fam.triangle_params());
        let r = patch_loop(&fam, &trivial, 1e-4, 1e-10).unwrap();
        assert!(r.permutation.is_identity() && r.consistent);
        let tri = fam.limit_components().triangle;
        let inner = discriminant_loop(&tri, 1).unwrap();
        let r = patch_loop(&fam, &inner, 1e-4, 1e-10).unwrap();
        assert!(r.consistent, "{} vs {}", r.permutation, r.triangle_permutation);
        assert!(r.permutation.is_transposition());
    }
}
