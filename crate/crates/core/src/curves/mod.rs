//! Rational curves with prescribed Newton polygon.
//!
//! A curve is given by `t ↦ (z0 ∏(t−a)^α, w0 ∏(t−a)^β)` where `(α, β)` is the
//! primitive inner normal of the edge owning the slot `a`. Triangles
//! `(0,0), (ℓ,0), (p,q)` use the normal form `t ↦ (t^q, t^{-p} ∏(t − a_j))`,
//! whose nodes are the roots of explicit polynomials `P_k`.

mod nodes;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, LatticePolygon};
use crate::obstruction::{psi, ClassLabel};
use crate::poly::{self, C64};

pub use nodes::{newton_node, self_intersections, NodePair};

/// A slot parameter on CP¹.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamValue {
    Finite(C64),
    Infinity,
}

impl ParamValue {
    pub fn real(x: f64) -> Self {
        ParamValue::Finite(C64::new(x, 0.0))
    }

    pub fn finite(&self) -> Option<C64> {
        match self {
            ParamValue::Finite(a) => Some(*a),
            ParamValue::Infinity => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub edge: usize,
    pub a: ParamValue,
    pub alpha: i64,
    pub beta: i64,
}

/// A factor `(u + v t)^(α, β)` of a curve parametrization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub u: C64,
    pub v: C64,
    pub alpha: i64,
    pub beta: i64,
}

impl Factor {
    /// The factor `(t − a)^(α, β)`.
    pub fn root(a: C64, alpha: i64, beta: i64) -> Self {
        Factor { u: -a, v: C64::new(1.0, 0.0), alpha, beta }
    }

    pub fn value(&self, t: C64) -> C64 {
        self.u + self.v * t
    }
}

/// A rational map `t ↦ (z0 ∏ L_i(t)^α_i, w0 ∏ L_i(t)^β_i)` with linear `L_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactoredCurve {
    pub z0: C64,
    pub w0: C64,
    pub factors: Vec<Factor>,
}

impl FactoredCurve {
    /// `φ(t)`, or `None` when `t` is a zero or pole of a coordinate.
    pub fn evaluate(&self, t: C64) -> Option<(C64, C64)> {
        let mut z = self.z0;
        let mut w = self.w0;
        for f in &self.factors {
            let l = f.value(t);
            if l.norm() == 0.0 && (f.alpha != 0 || f.beta != 0) {
                return None;
            }
            z *= l.powi(f.alpha as i32);
            w *= l.powi(f.beta as i32);
        }
        if z.is_finite() && w.is_finite() && z.norm() > 0.0 && w.norm() > 0.0 {
            Some((z, w))
        } else {
            None
        }
    }

    /// Logarithmic derivatives `(z'/z, w'/w)` at `t`.
    pub fn log_derivative(&self, t: C64) -> (C64, C64) {
        let mut dz = C64::new(0.0, 0.0);
        let mut dw = C64::new(0.0, 0.0);
        for f in &self.factors {
            let r = f.v / f.value(t);
            dz += r * f.alpha as f64;
            dw += r * f.beta as f64;
        }
        (dz, dw)
    }

    /// Values of `t` where some coordinate has a zero or a pole.
    pub fn special_points(&self) -> Vec<C64> {
        self.factors
            .iter()
            .filter(|f| (f.alpha != 0 || f.beta != 0) && f.v.norm() > 0.0)
            .map(|f| -f.u / f.v)
            .collect()
    }

    /// Same curve after the monomial change of coordinates with exponent matrix `m`:
    /// new exponents are `m · (α, β)`, new scales `(z0^m00 w0^m01, z0^m10 w0^m11)`.
    pub fn transform_exponents(&self, m: [[i64; 2]; 2]) -> FactoredCurve {
        let pw = |x: C64, e: i64| x.powi(e as i32);
        FactoredCurve {
            z0: pw(self.z0, m[0][0]) * pw(self.w0, m[0][1]),
            w0: pw(self.z0, m[1][0]) * pw(self.w0, m[1][1]),
            factors: self
                .factors
                .iter()
                .map(|f| Factor {
                    alpha: m[0][0] * f.alpha + m[0][1] * f.beta,
                    beta: m[1][0] * f.alpha + m[1][1] * f.beta,
                    ..*f
                })
                .collect(),
        }
    }
}

/// Parametrization of a rational curve with Newton polygon `polygon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveParam {
    pub z0: C64,
    pub w0: C64,
    pub slots: Vec<Slot>,
    pub polygon: LatticePolygon,
}

impl CurveParam {
    /// `params[j]` lists the `ℓ_j` slot parameters of edge `j`.
    pub fn new(polygon: &LatticePolygon, params: Vec<Vec<ParamValue>>, z0: C64, w0: C64) -> Result<Self> {
        let edges = polygon.edges();
        if params.len() != edges.len() {
            return Err(Error::InvalidInput(format!("{} edges but {} parameter groups", edges.len(), params.len())));
        }
        let mut slots = Vec::new();
        for (e, group) in edges.iter().zip(params) {
            if group.len() as i64 != e.length {
                return Err(Error::InvalidInput(format!("edge {} has length {} but {} parameters", e.index, e.length, group.len())));
            }
            let n = e.inner_normal();
            for a in group {
                if let ParamValue::Finite(x) = a {
                    if !x.is_finite() {
                        return Err(Error::InvalidInput("non-finite parameter".into()));
                    }
                }
                slots.push(Slot { edge: e.index, a, alpha: n.x, beta: n.y });
            }
        }
        if z0.norm() == 0.0 || w0.norm() == 0.0 {
            return Err(Error::InvalidInput("scale factors must be nonzero".into()));
        }
        Ok(CurveParam { z0, w0, slots, polygon: polygon.clone() })
    }

    /// Parameters from a flat list in slot order.
    pub fn from_flat(polygon: &LatticePolygon, flat: &[ParamValue], z0: C64, w0: C64) -> Result<Self> {
        let mut groups = Vec::new();
        let mut i = 0;
        for e in polygon.edges() {
            let l = e.length as usize;
            if i + l > flat.len() {
                return Err(Error::InvalidInput("too few parameters".into()));
            }
            groups.push(flat[i..i + l].to_vec());
            i += l;
        }
        if i != flat.len() {
            return Err(Error::InvalidInput("too many parameters".into()));
        }
        CurveParam::new(polygon, groups, z0, w0)
    }

    pub fn params(&self) -> Vec<ParamValue> {
        self.slots.iter().map(|s| s.a).collect()
    }

    pub fn with_params(&self, params: &[ParamValue]) -> CurveParam {
        let mut out = self.clone();
        for (s, &a) in out.slots.iter_mut().zip(params) {
            s.a = a;
        }
        out
    }

    pub fn factored(&self) -> FactoredCurve {
        FactoredCurve {
            z0: self.z0,
            w0: self.w0,
            factors: self
                .slots
                .iter()
                .filter_map(|s| s.a.finite().map(|a| Factor::root(a, s.alpha, s.beta)))
                .collect(),
        }
    }

    /// `φ(t)`; `None` when `t` hits a zero or pole.
    pub fn evaluate(&self, t: C64) -> Option<(C64, C64)> {
        self.factored().evaluate(t)
    }

    /// All nodes, expected to number `|itr_Z(Δ)|`.
    pub fn self_intersections(&self, tol: f64) -> Result<Vec<NodePair>> {
        self_intersections(&self.factored(), Some(self.polygon.node_count()), tol)
    }
}

/// Real parameters `spacing · 1, spacing · 2, …` in slot order, with `z0 = w0 = 1`.
/// Any increasing assignment respects the cyclic order of the edges.
pub fn harnack_params(poly: &LatticePolygon, spacing: f64) -> Result<CurveParam> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidInput("spacing must be positive".into()));
    }
    let n = poly.boundary_count() as usize;
    let flat: Vec<ParamValue> = (1..=n).map(|i| ParamValue::real(spacing * i as f64)).collect();
    CurveParam::from_flat(poly, &flat, C64::new(1.0, 0.0), C64::new(1.0, 0.0))
}

/// Normal form `t ↦ (t^q, t^{-p} ∏(t − a_j))` for the triangle `(0,0), (ℓ,0), (p,q)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleParam {
    pub ell: i64,
    pub p: i64,
    pub q: i64,
    pub a: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Generic,
    Halved,
}

/// The polynomial whose roots in C* parametrize the nodes of class `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodePolynomial {
    pub k: i64,
    pub regime: Regime,
    /// Ascending coefficients; index is the exponent.
    pub coefficients: Vec<C64>,
    /// Exponents with nonzero multiplier.
    pub support: Vec<i64>,
    /// Multiplier of each monomial before the symmetric-function factor.
    pub multiplier: Vec<C64>,
}

/// Roots of a node polynomial in C*.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<C64>,
    pub residual_max: f64,
    pub min_separation: f64,
    pub ill_conditioned: bool,
}

impl TriangleParam {
    pub fn new(ell: i64, p: i64, q: i64, a: Vec<C64>) -> Result<Self> {
        if q < 1 || ell < 1 {
            return Err(Error::InvalidInput("need q >= 1 and ell >= 1".into()));
        }
        if a.len() as i64 != ell {
            return Err(Error::InvalidInput(format!("expected {ell} parameters, got {}", a.len())));
        }
        if a.iter().any(|x| !x.is_finite() || x.norm() == 0.0) {
            return Err(Error::InvalidInput("parameters must be finite and nonzero".into()));
        }
        Ok(TriangleParam { ell, p, q, a })
    }

    pub fn polygon(&self) -> LatticePolygon {
        LatticePolygon::triangle(self.ell, self.p, self.q).expect("triangle with q >= 1 is nondegenerate")
    }

    pub fn with_a(&self, a: Vec<C64>) -> TriangleParam {
        TriangleParam { a, ..self.clone() }
    }

    pub fn factored(&self) -> FactoredCurve {
        let mut factors = vec![Factor { u: C64::new(0.0, 0.0), v: C64::new(1.0, 0.0), alpha: self.q, beta: -self.p }];
        factors.extend(self.a.iter().map(|&a| Factor::root(a, 0, 1)));
        FactoredCurve { z0: C64::new(1.0, 0.0), w0: C64::new(1.0, 0.0), factors }
    }

    pub fn evaluate(&self, t: C64) -> Option<(C64, C64)> {
        self.factored().evaluate(t)
    }

    pub fn max_k(&self) -> i64 {
        self.q / 2
    }

    pub fn regime(&self, k: i64) -> Regime {
        if self.q == 2 * k {
            Regime::Halved
        } else {
            Regime::Generic
        }
    }

    /// `|Ψ_{Δ,1}^{-1}(k)|` for `k = 1..⌊q/2⌋`, from the lattice labelling.
    pub fn fiber_sizes(&self) -> BTreeMap<i64, usize> {
        let poly = self.polygon();
        let mut s: Vec<LatticePoint> = (0..=self.ell).map(|u| poly.from_original(LatticePoint::new(u, 0))).collect();
        s.push(poly.from_original(LatticePoint::new(self.p, self.q)));
        let part = psi(&s, &poly).expect("triangle base spans a full-rank lattice");
        let sizes = part.fiber_sizes();
        (1..=self.max_k()).map(|k| (k, sizes.get(&ClassLabel(0, k)).copied().unwrap_or(0))).collect()
    }

    pub fn node_polynomial(&self, k: i64) -> Result<NodePolynomial> {
        if k < 1 || k > self.max_k() {
            return Err(Error::InvalidInput(format!("k = {k} outside 1..={}", self.max_k())));
        }
        let (ell, p, q) = (self.ell, self.p, self.q);
        let sigma = poly::elementary_symmetric(&self.a);
        let sign = |j: i64| if (ell - j) % 2 == 0 { 1.0 } else { -1.0 };
        let regime = self.regime(k);
        match regime {
            Regime::Generic => {
                let mut coefficients = vec![C64::new(0.0, 0.0); ell as usize + 1];
                let mut multiplier = coefficients.clone();
                let mut support = Vec::new();
                for j in 0..=ell {
                    if (k * (p - j)).rem_euclid(q) == 0 {
                        continue;
                    }
                    let s = (k as f64 * PI * (p - j) as f64 / q as f64).sin();
                    let lambda = C64::from_polar(s, PI * (j * k) as f64 / q as f64);
                    multiplier[j as usize] = lambda;
                    coefficients[j as usize] = lambda * sigma[(ell - j) as usize] * sign(j);
                    support.push(j);
                }
                Ok(NodePolynomial { k, regime, coefficients, support, multiplier })
            }
            Regime::Halved => {
                let eps = |j: i64| if p % 2 == 0 { (j - 1) / 2 } else { j / 2 };
                let top = (0..=ell).filter(|j| (p - j).rem_euclid(2) == 1).map(eps).max().unwrap_or(0);
                let mut coefficients = vec![C64::new(0.0, 0.0); top as usize + 1];
                let mut multiplier = coefficients.clone();
                let mut support = Vec::new();
                for j in 0..=ell {
                    if (p - j).rem_euclid(2) == 0 {
                        continue;
                    }
                    // sin(π(p−j)/2) = ±1 exactly when p − j is odd.
                    let s = if (p - j - 1).div_euclid(2) % 2 == 0 { 1.0 } else { -1.0 };
                    let e = eps(j);
                    let lambda = C64::from_polar(s, PI * (e * k) as f64 / q as f64);
                    multiplier[e as usize] = lambda;
                    coefficients[e as usize] = lambda * sigma[(ell - j) as usize] * sign(j);
                    support.push(e);
                }
                Ok(NodePolynomial { k, regime, coefficients, support, multiplier })
            }
        }
    }

    /// The pair of parameters glued by the node attached to a root `t` of `P_k`.
    pub fn node_parameters(&self, k: i64, t: C64) -> (C64, C64) {
        match self.regime(k) {
            Regime::Generic => (t, t * C64::from_polar(1.0, 2.0 * PI * k as f64 / self.q as f64)),
            Regime::Halved => {
                // The polynomial variable is rotated by e^{iπk/q} against the square
                // of the curve parameter.
                let s = (t * C64::from_polar(1.0, -PI * k as f64 / self.q as f64)).sqrt();
                (s, -s)
            }
        }
    }
}

/// Roots in C* of a node polynomial, sorted by argument then modulus.
pub fn roots_in_cstar(np: &NodePolynomial, tol: f64) -> Result<RootSet> {
    let (trimmed, _) = poly::trim_zeros(&np.coefficients);
    let roots = if trimmed.len() <= 1 { Vec::new() } else { poly::roots(trimmed)? };
    let mut roots = roots;
    poly::sort_by_arg_then_modulus(&mut roots);
    let residual_max = roots.iter().map(|&t| poly::backward_error(trimmed, t)).fold(0.0, f64::max);
    let min_separation = poly::min_pairwise_distance(&roots);
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    Ok(RootSet { ill_conditioned: residual_max > tol || min_separation < 1e3 * tol * scale, roots, residual_max, min_separation })
}

/// Nodes of class `k`, with the verification data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassNodes {
    pub roots: Vec<C64>,
    pub expected: usize,
    pub found: usize,
    pub residual_max: f64,
    /// Largest `|φ(t) − φ(t')|` over the node pairs, relative to `max(1, |φ(t)|)`.
    pub node_residual_max: f64,
    pub min_separation: f64,
    pub pairs: Vec<(C64, C64)>,
    /// Roots on the two rays of `e^{−iπkp/q}R*`, when every root lies on that line.
    pub ray_counts: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleNodes {
    pub classes: BTreeMap<i64, ClassNodes>,
    pub total: usize,
}

fn point_distance(a: (C64, C64), b: (C64, C64)) -> f64 {
    let scale = 1f64.max(a.0.norm()).max(a.1.norm());
    ((a.0 - b.0).norm()).max((a.1 - b.1).norm()) / scale
}

/// All nodes of a triangle curve through the polynomials `P_k`.
pub fn triangle_nodes(tri: &TriangleParam, tol: f64) -> Result<TriangleNodes> {
    let fibers = tri.fiber_sizes();
    let mut classes = BTreeMap::new();
    let mut total = 0;
    for k in 1..=tri.max_k() {
        let np = tri.node_polynomial(k)?;
        let rs = roots_in_cstar(&np, tol)?;
        let scale = rs.roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
        if rs.roots.len() > 1 && rs.min_separation < 1e3 * tol * scale {
            return Err(Error::NonGeneric(format!("class {k}: roots {:.3e} apart", rs.min_separation)));
        }
        let mut pairs = Vec::new();
        let mut node_residual_max: f64 = 0.0;
        for &t in &rs.roots {
            let (t1, t2) = tri.node_parameters(k, t);
            let (Some(a), Some(b)) = (tri.evaluate(t1), tri.evaluate(t2)) else {
                return Err(Error::NonGeneric(format!("class {k}: node parameter at a pole")));
            };
            node_residual_max = node_residual_max.max(point_distance(a, b));
            pairs.push((t1, t2));
        }
        total += rs.roots.len();
        let dir = C64::from_polar(1.0, -PI * (k * tri.p) as f64 / tri.q as f64);
        let on_line = rs.roots.iter().all(|r| (r * dir.conj()).im.abs() <= 1e-8 * r.norm().max(1.0));
        let ray_counts = on_line.then(|| {
            let pos = rs.roots.iter().filter(|r| (*r * dir.conj()).re > 0.0).count();
            (pos, rs.roots.len() - pos)
        });
        classes.insert(
            k,
            ClassNodes {
                expected: fibers[&k],
                found: rs.roots.len(),
                residual_max: rs.residual_max,
                node_residual_max,
                min_separation: rs.min_separation,
                roots: rs.roots,
                pairs,
                ray_counts,
            },
        );
    }
    Ok(TriangleNodes { classes, total })
}

/// True iff two roots of `P_k` are closer than `tol`.
pub fn near_discriminant(tri: &TriangleParam, k: i64, tol: f64) -> Result<bool> {
    let rs = roots_in_cstar(&tri.node_polynomial(k)?, tol)?;
    Ok(rs.roots.len() > 1 && rs.min_separation < tol)
}

/// Exponents `j` with `k(p − j) ≢ 0 mod q`, i.e. `j ≢ p mod q/gcd(q,k)`.
pub fn generic_support(ell: i64, p: i64, q: i64, k: i64) -> Vec<i64> {
    let m = q / q.gcd(&k);
    (0..=ell).filter(|j| (p - j).rem_euclid(m) != 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure() -> TriangleParam {
        TriangleParam::new(5, 7, 6, vec![C64::new(1.0, 0.0); 5]).unwrap()
    }

    #[test]
    fn figure_curve_value() {
        let (z, w) = figure().evaluate(C64::new(2.0, 0.0)).unwrap();
        assert!((z - C64::new(64.0, 0.0)).norm() < 1e-12);
        assert!((w - C64::new(1.0 / 128.0, 0.0)).norm() < 1e-15);
        assert!(figure().evaluate(C64::new(1.0, 0.0)).is_none());
        assert!(figure().evaluate(C64::new(0.0, 0.0)).is_none());
    }

    #[test]
    fn conjugation_symmetry() {
        let poly = LatticePolygon::triangle(5, 7, 6).unwrap();
        let c = harnack_params(&poly, 1.0).unwrap();
        for t in [C64::new(0.3, 0.8), C64::new(-2.0, 1.5), C64::new(9.0, -0.1)] {
            let (z, w) = c.evaluate(t).unwrap();
            let (zc, wc) = c.evaluate(t.conj()).unwrap();
            assert!((z.conj() - zc).norm() <= 1e-12 * z.norm().max(1.0));
            assert!((w.conj() - wc).norm() <= 1e-12 * w.norm().max(1.0));
        }
    }

    #[test]
    fn harnack_slots_follow_edges() {
        let poly = LatticePolygon::triangle(5, 7, 6).unwrap();
        let c = harnack_params(&poly, 1.0).unwrap();
        assert_eq!(c.slots.len(), 8);
        assert_eq!((c.slots[0].alpha, c.slots[0].beta), (0, 1));
        assert_eq!((c.slots[5].alpha, c.slots[5].beta), (-3, 1));
        assert_eq!((c.slots[7].alpha, c.slots[7].beta), (6, -7));
        let vals: Vec<f64> = c.params().iter().map(|p| p.finite().unwrap().re).collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(harnack_params(&LatticePolygon::square(5).unwrap(), 0.5).unwrap().slots.len(), 20);
    }

    #[test]
    fn triangle_normal_form_matches_general_form() {
        // Slots: base edge at a_j, apex edge at ∞, closing edge at 0.
        let tri = figure();
        let poly = tri.polygon();
        let mut params = vec![tri.a.iter().map(|&a| ParamValue::Finite(a)).collect::<Vec<_>>()];
        params.push(vec![ParamValue::Infinity; 2]);
        params.push(vec![ParamValue::Finite(C64::new(0.0, 0.0))]);
        let c = CurveParam::new(&poly, params, C64::new(1.0, 0.0), C64::new(1.0, 0.0)).unwrap();
        for t in [C64::new(2.0, 0.0), C64::new(0.4, -1.1)] {
            let a = c.evaluate(t).unwrap();
            let b = tri.evaluate(t).unwrap();
            assert!(point_distance(a, b) < 1e-12);
        }
    }

    #[test]
    fn support_examples() {
        let np = figure().node_polynomial(2).unwrap();
        assert_eq!(np.support, vec![0, 2, 3, 5]);
        let np3 = figure().node_polynomial(3).unwrap();
        assert_eq!(np3.regime, Regime::Halved);
        assert_eq!(np3.support, vec![0, 1, 2]);
        assert!(figure().node_polynomial(4).is_err());
    }

    #[test]
    fn support_criterion_agrees_with_sine_scan() {
        for q in 1..=12i64 {
            for ell in 1..=8i64 {
                for p in 0..q.max(1) + 3 {
                    for k in 1..=q / 2 {
                        if 2 * k == q {
                            continue;
                        }
                        let scan: Vec<i64> = (0..=ell)
                            .filter(|&j| (k as f64 * PI * (p - j) as f64 / q as f64).sin().abs() > 1e-9)
                            .collect();
                        assert_eq!(generic_support(ell, p, q, k), scan, "ell={ell} p={p} q={q} k={k}");
                        let tri = TriangleParam::new(ell, p, q, vec![C64::new(1.3, 0.2); ell as usize]).unwrap();
                        assert_eq!(tri.node_polynomial(k).unwrap().support, scan);
                    }
                }
            }
        }
    }

    #[test]
    fn halved_support_ranges() {
        for ell in 1..=8i64 {
            for p in 0..6i64 {
                let tri = TriangleParam::new(ell, p, 6, vec![C64::new(0.7, 0.1); ell as usize]).unwrap();
                let s = tri.node_polynomial(3).unwrap().support;
                let top = if p % 2 == 0 { (ell - 1).div_euclid(2) } else { ell / 2 };
                if p % 2 == 0 && ell == 0 {
                    continue;
                }
                assert_eq!(s, (0..=top).collect::<Vec<_>>(), "ell={ell} p={p}");
            }
        }
    }

    #[test]
    fn halved_quadratic_has_imaginary_roots() {
        let np = figure().node_polynomial(3).unwrap();
        // Direct expansion: 1 − 10 i t − 5 t².
        let expect = [C64::new(1.0, 0.0), C64::new(0.0, -10.0), C64::new(-5.0, 0.0)];
        for (a, b) in np.coefficients.iter().zip(expect) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
        let rs = roots_in_cstar(&np, 1e-9).unwrap();
        assert_eq!(rs.roots.len(), 2);
        // Quadratic formula: t = i(−10 ± √80)/10.
        let oracle = [(-10.0 + 80f64.sqrt()) / 10.0, (-10.0 - 80f64.sqrt()) / 10.0];
        for r in &rs.roots {
            assert!(r.re.abs() < 1e-9);
            assert!(oracle.iter().any(|o| (r.im - o).abs() < 1e-9));
        }
    }

    #[test]
    fn figure_nodes() {
        let nodes = triangle_nodes(&figure(), 1e-9).unwrap();
        let counts: Vec<usize> = nodes.classes.values().map(|c| c.found).collect();
        assert_eq!(counts, vec![5, 5, 2]);
        assert_eq!(nodes.total, 12);
        for c in nodes.classes.values() {
            assert_eq!(c.found, c.expected);
            assert!(c.node_residual_max < 1e-8, "{}", c.node_residual_max);
        }
        // Class 1 roots lie on e^{-7iπ/6} R*.
        let dir = C64::from_polar(1.0, -7.0 * PI / 6.0);
        for r in &nodes.classes[&1].roots {
            assert!((r / dir).im.abs() < 1e-8 * r.norm());
        }
    }

    #[test]
    fn empty_triangle_has_no_nodes() {
        let tri = TriangleParam::new(1, 0, 1, vec![C64::new(2.0, 0.0)]).unwrap();
        assert_eq!(triangle_nodes(&tri, 1e-9).unwrap().total, 0);
        let tri2 = TriangleParam::new(1, 1, 2, vec![C64::new(2.0, 0.0)]).unwrap();
        assert_eq!(triangle_nodes(&tri2, 1e-9).unwrap().total, 0);
    }

    #[test]
    fn figure_is_not_near_discriminant() {
        for k in 1..=3 {
            assert!(!near_discriminant(&figure(), k, 1e-6).unwrap());
        }
    }
}
