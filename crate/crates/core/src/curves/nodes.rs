//! Nodes of a factored rational curve.
//!
//! Seeds come from the resultant in `s` of the two divided differences
//! `(N(t)D(s) − N(s)D(t)) / (t − s)`, sampled on a circle and interpolated;
//! every seed is then refined by Newton's method on the ratio equations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FactoredCurve;
use crate::error::{Error, Result};
use crate::poly::{self, C64};

/// A node `φ(t) = φ(s)` with `t ≠ s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodePair {
    pub t: C64,
    pub s: C64,
    pub point: (C64, C64),
    pub residual: f64,
}

impl NodePair {
    pub fn same_node(&self, other: &NodePair, tol: f64) -> bool {
        let close = |a: C64, b: C64| (a - b).norm() <= tol * a.norm().max(1.0);
        (close(self.t, other.t) && close(self.s, other.s)) || (close(self.t, other.s) && close(self.s, other.t))
    }
}

/// `x(t)/x(s)` and `y(t)/y(s)`, computed factor by factor.
fn ratios(c: &FactoredCurve, t: C64, s: C64) -> (C64, C64) {
    let mut rx = C64::new(1.0, 0.0);
    let mut ry = C64::new(1.0, 0.0);
    for f in &c.factors {
        let q = f.value(t) / f.value(s);
        if f.alpha != 0 {
            rx *= q.powi(f.alpha as i32);
        }
        if f.beta != 0 {
            ry *= q.powi(f.beta as i32);
        }
    }
    (rx, ry)
}

fn node_residual(c: &FactoredCurve, t: C64, s: C64) -> f64 {
    let (rx, ry) = ratios(c, t, s);
    (rx - 1.0).norm().max((ry - 1.0).norm())
}

/// Newton refinement of an approximate node `(t, s)`.
pub fn newton_node(c: &FactoredCurve, t0: C64, s0: C64, tol: f64) -> Result<NodePair> {
    let (mut t, mut s) = (t0, s0);
    let mut res = f64::INFINITY;
    for _ in 0..80 {
        let (rx, ry) = ratios(c, t, s);
        let g = [rx - 1.0, ry - 1.0];
        res = g[0].norm().max(g[1].norm());
        if !res.is_finite() {
            break;
        }
        let (lxt, lyt) = c.log_derivative(t);
        let (lxs, lys) = c.log_derivative(s);
        let j = [[rx * lxt, -rx * lxs], [ry * lyt, -ry * lys]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.norm() == 0.0 || !det.is_finite() {
            break;
        }
        let dt = (j[1][1] * g[0] - j[0][1] * g[1]) / det;
        let ds = (j[0][0] * g[1] - j[1][0] * g[0]) / det;
        t -= dt;
        s -= ds;
        let step = dt.norm().max(ds.norm());
        if step <= 1e-15 * t.norm().max(s.norm()).max(1.0) {
            res = node_residual(c, t, s);
            break;
        }
    }
    if !(res <= tol) || !t.is_finite() || !s.is_finite() {
        return Err(Error::Numerical(format!("node refinement stalled at residual {res:.3e}")));
    }
    if (t - s).norm() <= 1e-6 * t.norm().max(1.0) {
        return Err(Error::Numerical("refinement collapsed onto the diagonal".into()));
    }
    let point = c.evaluate(t).ok_or_else(|| Error::Numerical("node at a special point".into()))?;
    Ok(NodePair { t, s, point, residual: res })
}

/// Bivariate polynomial as `coef[i][j]` for `t^i s^j`.
type Bivariate = Vec<Vec<C64>>;

/// `(N(t)D(s) − N(s)D(t)) / (t − s)`.
fn divided_difference(n: &[C64], d: &[C64]) -> Bivariate {
    let deg = n.len().max(d.len()).max(1) - 1;
    let get = |v: &[C64], i: usize| v.get(i).copied().unwrap_or_default();
    let mut out = vec![vec![C64::new(0.0, 0.0); deg.max(1)]; deg.max(1)];
    for i in 0..=deg {
        for j in 0..i {
            // n_i d_j − n_j d_i multiplies (t^i s^j − t^j s^i).
            let c = get(n, i) * get(d, j) - get(n, j) * get(d, i);
            if c.norm() == 0.0 {
                continue;
            }
            let m = i - j;
            for k in 0..m {
                out[j + k][j + m - 1 - k] += c;
            }
        }
    }
    out
}

fn eval_in_t(b: &Bivariate, t: C64) -> Vec<C64> {
    let ds = b.first().map_or(0, |r| r.len());
    let mut out = vec![C64::new(0.0, 0.0); ds];
    let mut tp = C64::new(1.0, 0.0);
    for row in b {
        for (o, c) in out.iter_mut().zip(row) {
            *o += c * tp;
        }
        tp *= t;
    }
    out
}

fn determinant(mut m: Vec<Vec<C64>>) -> C64 {
    let n = m.len();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm())).unwrap();
        if m[piv][col].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for r in col + 1..n {
            let f = m[r][col] / p;
            if f.norm() == 0.0 {
                continue;
            }
            for c in col..n {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
        }
    }
    det
}

/// Sylvester determinant of two ascending coefficient vectors of formal degree `len − 1`.
fn sylvester(f: &[C64], g: &[C64]) -> C64 {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    if size == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut mat = vec![vec![C64::new(0.0, 0.0); size]; size];
    for r in 0..n {
        for (k, c) in f.iter().rev().enumerate() {
            mat[r][r + k] = *c;
        }
    }
    for r in 0..m {
        for (k, c) in g.iter().rev().enumerate() {
            mat[n + r][r + k] = *c;
        }
    }
    determinant(mat)
}

fn expand(factors: &[(C64, C64, i64)]) -> Vec<C64> {
    let mut p = vec![C64::new(1.0, 0.0)];
    for &(u, v, e) in factors {
        for _ in 0..e {
            p = poly::mul(&p, &[u, v]);
        }
    }
    p
}

/// Numerator and denominator of one coordinate, ignoring the constant factor.
fn coordinate_polys(c: &FactoredCurve, rho: f64, first: bool) -> (Vec<C64>, Vec<C64>) {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for f in &c.factors {
        let e = if first { f.alpha } else { f.beta };
        let (u, v) = (f.u, f.v * rho);
        let scale = u.norm().max(v.norm());
        if e == 0 || scale == 0.0 {
            continue;
        }
        let item = (u / scale, v / scale, e.abs());
        if e > 0 {
            num.push(item);
        } else {
            den.push(item);
        }
    }
    (expand(&num), expand(&den))
}

fn seeds_from_resultant(c: &FactoredCurve) -> Vec<(C64, C64)> {
    let specials: Vec<f64> = c.special_points().iter().map(|a| a.norm()).filter(|&r| r > 0.0).collect();
    let rho = if specials.is_empty() {
        1.0
    } else {
        (specials.iter().map(|r| r.ln()).sum::<f64>() / specials.len() as f64).exp()
    };
    let (nx, dx) = coordinate_polys(c, rho, true);
    let (ny, dy) = coordinate_polys(c, rho, false);
    let f1 = divided_difference(&nx, &dx);
    let f2 = divided_difference(&ny, &dy);
    let (dt1, ds1) = (f1.len() - 1, f1[0].len() - 1);
    let (dt2, ds2) = (f2.len() - 1, f2[0].len() - 1);
    let bound = ds2 * dt1 + ds1 * dt2;
    if bound == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for radius in [0.25, 0.5, 1.0, 2.0, 4.0] {
        for tau in resultant_roots(&f1, &f2, bound, radius) {
            seeds_at(&f1, &f2, tau, rho, &mut out);
        }
    }
    out
}

/// Roots of `Res_s(F1, F2)(t)` interpolated from samples on `|t| = radius`.
fn resultant_roots(f1: &Bivariate, f2: &Bivariate, bound: usize, radius: f64) -> Vec<C64> {
    let m = bound + 1;
    let samples: Vec<C64> = (0..m)
        .map(|k| {
            let w = C64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
            sylvester(&eval_in_t(f1, w), &eval_in_t(f2, w))
        })
        .collect();
    let mut coeffs: Vec<C64> = (0..m)
        .map(|j| {
            let mut acc = C64::new(0.0, 0.0);
            for (k, v) in samples.iter().enumerate() {
                acc += v * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k % m) as f64 / m as f64);
            }
            acc / m as f64
        })
        .collect();
    let big = coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if big == 0.0 {
        return Vec::new();
    }
    for x in coeffs.iter_mut() {
        if x.norm() < 1e-13 * big {
            *x = C64::new(0.0, 0.0);
        }
    }
    while coeffs.len() > 1 && coeffs.last().unwrap().norm() == 0.0 {
        coeffs.pop();
    }
    let (trimmed, _) = poly::trim_zeros(&coeffs);
    if trimmed.len() < 2 {
        return Vec::new();
    }
    poly::roots(trimmed).map(|r| r.into_iter().map(|x| x * radius).collect()).unwrap_or_default()
}

fn seeds_at(f1: &Bivariate, f2: &Bivariate, tau: C64, rho: f64, out: &mut Vec<(C64, C64)>) {
    {
        let g1 = eval_in_t(f1, tau);
        let (g1t, _) = poly::trim_zeros(&g1);
        let mut g1t = g1t.to_vec();
        while g1t.len() > 1 && g1t.last().unwrap().norm() < 1e-14 * g1t.iter().map(|x| x.norm()).fold(0.0, f64::max) {
            g1t.pop();
        }
        if g1t.len() < 2 {
            return;
        }
        let Ok(ss) = poly::roots(&g1t) else { return };
        for s in ss {
            if let Some((t1, s1)) = polynomial_newton(f1, f2, tau, s) {
                out.push((t1 * rho, s1 * rho));
            }
        }
    }
}

/// Value and partial derivatives of a bivariate polynomial, with the sum of
/// absolute terms for scaling.
fn eval_bivariate(b: &Bivariate, t: C64, s: C64) -> (C64, C64, C64, f64) {
    let (mut v, mut dt, mut ds, mut abs) = (C64::default(), C64::default(), C64::default(), 0.0);
    let mut tp = C64::new(1.0, 0.0);
    let mut tpm = C64::new(0.0, 0.0);
    for (i, row) in b.iter().enumerate() {
        let (rv, rd) = poly::eval_with_derivative(row, s);
        v += rv * tp;
        ds += rd * tp;
        dt += rv * tpm * i as f64;
        abs += row.iter().enumerate().map(|(j, c)| c.norm() * s.norm().powi(j as i32)).sum::<f64>() * tp.norm();
        tpm = tp;
        tp *= t;
    }
    (v, dt, ds, abs)
}

fn polynomial_newton(f1: &Bivariate, f2: &Bivariate, t0: C64, s0: C64) -> Option<(C64, C64)> {
    let (mut t, mut s) = (t0, s0);
    for _ in 0..60 {
        let (v1, a, b, n1) = eval_bivariate(f1, t, s);
        let (v2, c, d, n2) = eval_bivariate(f2, t, s);
        if v1.norm() <= 1e-14 * n1 && v2.norm() <= 1e-14 * n2 {
            return Some((t, s));
        }
        let det = a * d - b * c;
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let dt = (d * v1 - b * v2) / det;
        let ds = (a * v2 - c * v1) / det;
        t -= dt;
        s -= ds;
        if !t.is_finite() || !s.is_finite() || t.norm() > 1e8 || s.norm() > 1e8 {
            return None;
        }
        if dt.norm().max(ds.norm()) <= 1e-14 * t.norm().max(s.norm()).max(1.0) {
            return Some((t, s));
        }
    }
    None
}

fn push_unique(nodes: &mut Vec<NodePair>, n: NodePair) {
    if !nodes.iter().any(|m| m.same_node(&n, 1e-7)) {
        nodes.push(n);
    }
}

/// All nodes of `c`. With `expected` set, a count mismatch is an error.
pub fn self_intersections(c: &FactoredCurve, expected: Option<usize>, tol: f64) -> Result<Vec<NodePair>> {
    let newton_tol = tol.max(1e-12);
    let radii: Vec<f64> = c.special_points().iter().map(|a| a.norm()).filter(|&r| r > 0.0).collect();
    let rmin = radii.iter().copied().fold(1.0, f64::min);
    let rmax = radii.iter().copied().fold(1.0, f64::max);
    // Solutions escaping to 0 or ∞ are limits of the ratio equations, not nodes.
    let in_range = |t: C64| t.norm() > 1e-6 * rmin && t.norm() < 1e6 * rmax;
    let mut nodes = Vec::new();
    for (t, s) in seeds_from_resultant(c) {
        if let Ok(n) = newton_node(c, t, s, newton_tol) {
            if in_range(n.t) && in_range(n.s) {
                push_unique(&mut nodes, n);
            }
        }
    }
    if let Some(e) = expected {
        if nodes.len() < e {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..4000 {
                if nodes.len() >= e {
                    break;
                }
                let mut draw = || C64::from_polar(rmax * rng.gen::<f64>().powi(2) * 2.0, rng.gen::<f64>() * std::f64::consts::TAU);
                let (t, s) = (draw(), draw());
                if let Ok(n) = newton_node(c, t, s, newton_tol) {
                    if in_range(n.t) && in_range(n.s) {
                        push_unique(&mut nodes, n);
                    }
                }
            }
        }
        if nodes.len() != e {
            return Err(Error::DegenerateParameters(format!("found {} nodes, expected {e}", nodes.len())));
        }
    }
    nodes.sort_by(|a, b| {
        let ka = (a.point.0.re, a.point.0.im, a.point.1.re);
        let kb = (b.point.0.re, b.point.0.im, b.point.1.re);
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{harnack_params, triangle_nodes, TriangleParam};
    use crate::lattice::LatticePolygon;

    #[test]
    fn divided_difference_matches_direct_quotient() {
        let n = [C64::new(1.0, 0.5), C64::new(-2.0, 0.0), C64::new(0.3, 0.1), C64::new(1.0, 0.0)];
        let d = [C64::new(0.2, 0.0), C64::new(1.0, -1.0)];
        let f = divided_difference(&n, &d);
        let (t, s) = (C64::new(0.7, 0.2), C64::new(-0.4, 1.1));
        let direct = (poly::eval(&n, t) * poly::eval(&d, s) - poly::eval(&n, s) * poly::eval(&d, t)) / (t - s);
        let via = poly::eval(&eval_in_t(&f, t), s);
        assert!((direct - via).norm() < 1e-12);
    }

    #[test]
    fn sylvester_detects_common_root() {
        let f = poly::from_roots(&[C64::new(1.0, 0.0), C64::new(2.0, 0.0)]);
        let g = poly::from_roots(&[C64::new(2.0, 0.0), C64::new(-3.0, 0.0), C64::new(0.5, 0.0)]);
        assert!(sylvester(&f, &g).norm() < 1e-12);
        let h = poly::from_roots(&[C64::new(4.0, 0.0)]);
        // Res(f, t − 4) = f(4) up to sign.
        assert!((sylvester(&f, &h).norm() - poly::eval(&f, C64::new(4.0, 0.0)).norm()).abs() < 1e-12);
    }

    #[test]
    fn figure_triangle_nodes_agree() {
        let tri = TriangleParam::new(5, 7, 6, vec![C64::new(1.0, 0.0); 5]).unwrap();
        let nodes = self_intersections(&tri.factored(), Some(12), 1e-10).unwrap();
        let by_poly = triangle_nodes(&tri, 1e-9).unwrap();
        for c in by_poly.classes.values() {
            for &(t1, _) in &c.pairs {
                let p = tri.evaluate(t1).unwrap();
                assert!(nodes.iter().any(|n| (n.point.0 - p.0).norm() < 1e-7 * p.0.norm().max(1.0)));
            }
        }
    }

    #[test]
    fn square_harnack_nodes() {
        let sq = LatticePolygon::square(5).unwrap();
        let c = harnack_params(&sq, 1.0).unwrap();
        let nodes = c.self_intersections(1e-10).unwrap();
        assert_eq!(nodes.len(), 16);
        for n in &nodes {
            let a = c.evaluate(n.t).unwrap();
            let b = c.evaluate(n.s).unwrap();
            assert!((a.0 - b.0).norm() < 1e-8 * a.0.norm().max(1.0));
            assert!((a.1 - b.1).norm() < 1e-8 * a.1.norm().max(1.0));
        }
    }

    #[test]
    fn wrong_expectation_is_reported() {
        let tri = TriangleParam::new(5, 7, 6, vec![C64::new(1.0, 0.0); 5]).unwrap();
        assert!(matches!(self_intersections(&tri.factored(), Some(13), 1e-10), Err(Error::DegenerateParameters(_))));
    }
}
