//! Lattice points, convex lattice polygons and affine sublattices of Z².

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        LatticePoint { x, y }
    }

    /// Determinant of the 2x2 matrix with columns `self`, `other`.
    pub fn cross(self, other: LatticePoint) -> i64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: LatticePoint) -> i64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> i64 {
        self.dot(self)
    }

    /// Quarter turn counter-clockwise: (a, b) -> (-b, a).
    pub fn rotate(self) -> LatticePoint {
        LatticePoint::new(-self.y, self.x)
    }

    /// Integer length: gcd of the coordinates.
    pub fn content(self) -> i64 {
        self.x.gcd(&self.y)
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }
}

impl From<[i64; 2]> for LatticePoint {
    fn from(a: [i64; 2]) -> Self {
        LatticePoint::new(a[0], a[1])
    }
}

impl From<LatticePoint> for [i64; 2] {
    fn from(p: LatticePoint) -> Self {
        [p.x, p.y]
    }
}

impl From<(i64, i64)> for LatticePoint {
    fn from(a: (i64, i64)) -> Self {
        LatticePoint::new(a.0, a.1)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, o: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(self, o: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint::new(-self.x, -self.y)
    }
}

impl Mul<LatticePoint> for i64 {
    type Output = LatticePoint;
    fn mul(self, p: LatticePoint) -> LatticePoint {
        LatticePoint::new(self * p.x, self * p.y)
    }
}

/// Affine map `p -> m p + b` with integer entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineMap {
    pub m: [[i64; 2]; 2],
    pub b: LatticePoint,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap { m: [[1, 0], [0, 1]], b: LatticePoint::ORIGIN };

    pub fn linear(m: [[i64; 2]; 2]) -> Self {
        AffineMap { m, b: LatticePoint::ORIGIN }
    }

    pub fn det(&self) -> i64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs() == 1
    }

    pub fn apply_linear(&self, p: LatticePoint) -> LatticePoint {
        LatticePoint::new(
            self.m[0][0] * p.x + self.m[0][1] * p.y,
            self.m[1][0] * p.x + self.m[1][1] * p.y,
        )
    }

    pub fn apply(&self, p: LatticePoint) -> LatticePoint {
        self.apply_linear(p) + self.b
    }

    /// Inverse of a unimodular map.
    pub fn inverse(&self) -> Option<AffineMap> {
        let d = self.det();
        if d.abs() != 1 {
            return None;
        }
        let m = [
            [self.m[1][1] * d, -self.m[0][1] * d],
            [-self.m[1][0] * d, self.m[0][0] * d],
        ];
        let lin = AffineMap::linear(m);
        Some(AffineMap { m, b: -lin.apply_linear(self.b) })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let a = &self.m;
        let c = &other.m;
        let m = [
            [a[0][0] * c[0][0] + a[0][1] * c[1][0], a[0][0] * c[0][1] + a[0][1] * c[1][1]],
            [a[1][0] * c[0][0] + a[1][1] * c[1][0], a[1][0] * c[0][1] + a[1][1] * c[1][1]],
        ];
        AffineMap { m, b: self.apply(other.b) }
    }

    /// Matrix acting on exponent vectors of a torus parametrization so that
    /// characters transform compatibly with `self`: the inverse transpose.
    pub fn dual_linear(&self) -> Option<[[i64; 2]; 2]> {
        let inv = self.inverse()?;
        Some([[inv.m[0][0], inv.m[1][0]], [inv.m[0][1], inv.m[1][1]]])
    }
}

/// A boundary edge: from `start` to `end = start + length * primitive`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub index: usize,
    pub start: LatticePoint,
    pub end: LatticePoint,
    pub primitive: LatticePoint,
    pub length: i64,
}

impl Edge {
    /// Primitive inner normal (quarter turn of the direction for a counter-clockwise boundary).
    pub fn inner_normal(&self) -> LatticePoint {
        self.primitive.rotate()
    }

    /// Lattice points on the closed edge, in boundary order.
    pub fn lattice_points(&self) -> Vec<LatticePoint> {
        (0..=self.length).map(|i| self.start + i * self.primitive).collect()
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        let d = p - self.start;
        d.cross(self.primitive) == 0 && {
            let t = d.dot(self.primitive);
            t >= 0 && t <= self.length * self.primitive.norm_sq()
        }
    }

    /// True if `p` lies on the edge but is not one of its endpoints.
    pub fn contains_in_relative_interior(&self, p: LatticePoint) -> bool {
        self.contains(p) && p != self.start && p != self.end
    }
}

/// Convex lattice polygon with counter-clockwise vertices.
///
/// Vertices are stored translated so that vertex 0, the lexicographically
/// smallest input vertex, is the origin; `offset` recovers input coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePolygon {
    vertices: Vec<LatticePoint>,
    offset: LatticePoint,
}

fn segments_intersect(p1: LatticePoint, p2: LatticePoint, q1: LatticePoint, q2: LatticePoint) -> bool {
    let orient = |a: LatticePoint, b: LatticePoint, c: LatticePoint| (b - a).cross(c - a).signum();
    let on_seg = |a: LatticePoint, b: LatticePoint, c: LatticePoint| {
        c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_seg(q1, q2, p1))
        || (d2 == 0 && on_seg(q1, q2, p2))
        || (d3 == 0 && on_seg(p1, p2, q1))
        || (d4 == 0 && on_seg(p1, p2, q2))
}

impl LatticePolygon {
    /// Builds a polygon from a closed vertex list.
    ///
    /// Clockwise input is reversed, collinear vertices are dropped with a
    /// warning, and the result is translated so that vertex 0 is the origin.
    pub fn new(input: Vec<LatticePoint>) -> Result<Self> {
        let mut pts: Vec<LatticePoint> = Vec::with_capacity(input.len());
        for p in input {
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        while pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        if pts.len() < 3 {
            return Err(Error::DegeneratePolygon(format!("{} distinct vertices", pts.len())));
        }
        let n = pts.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                    return Err(Error::SelfIntersecting(i, j));
                }
            }
        }
        let area2: i64 = (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum();
        if area2 == 0 {
            return Err(Error::DegeneratePolygon("zero area".into()));
        }
        if area2 < 0 {
            log::info!("reorienting clockwise vertex list");
            pts.reverse();
        }
        // Drop collinear vertices; a reversal (spike) is a self-overlap.
        loop {
            let n = pts.len();
            let mut removed = false;
            for i in 0..n {
                let prev = pts[(i + n - 1) % n];
                let next = pts[(i + 1) % n];
                let a = pts[i] - prev;
                let b = next - pts[i];
                if a.cross(b) == 0 {
                    if a.dot(b) < 0 {
                        return Err(Error::SelfIntersecting((i + n - 1) % n, i));
                    }
                    log::warn!("merging collinear vertex {}", pts[i]);
                    pts.remove(i);
                    removed = true;
                    break;
                }
            }
            if !removed {
                break;
            }
            if pts.len() < 3 {
                return Err(Error::DegeneratePolygon("all vertices collinear".into()));
            }
        }
        let n = pts.len();
        for i in 0..n {
            let a = pts[i] - pts[(i + n - 1) % n];
            let b = pts[(i + 1) % n] - pts[i];
            if a.cross(b) < 0 {
                return Err(Error::NonConvex(i));
            }
        }
        let start = (0..n).min_by_key(|&i| pts[i]).unwrap();
        pts.rotate_left(start);
        let offset = pts[0];
        let vertices = pts.into_iter().map(|p| p - offset).collect();
        Ok(LatticePolygon { vertices, offset })
    }

    /// Convex hull of a point set (monotone chain), then [`LatticePolygon::new`].
    pub fn convex_hull(points: &[LatticePoint]) -> Result<Self> {
        let mut pts = points.to_vec();
        pts.sort();
        pts.dedup();
        if pts.len() < 3 {
            return Err(Error::DegeneratePolygon(format!("{} distinct points", pts.len())));
        }
        let mut lower: Vec<LatticePoint> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && (lower[lower.len() - 1] - lower[lower.len() - 2]).cross(p - lower[lower.len() - 1]) <= 0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<LatticePoint> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && (upper[upper.len() - 1] - upper[upper.len() - 2]).cross(p - upper[upper.len() - 1]) <= 0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        LatticePolygon::new(lower)
    }

    pub fn from_coords(coords: &[(i64, i64)]) -> Result<Self> {
        LatticePolygon::new(coords.iter().map(|&c| c.into()).collect())
    }

    /// Axis-parallel square `[0, d]²`.
    pub fn square(d: i64) -> Result<Self> {
        LatticePolygon::from_coords(&[(0, 0), (d, 0), (d, d), (0, d)])
    }

    /// Triangle with vertices (0,0), (ell,0), (p,q).
    pub fn triangle(ell: i64, p: i64, q: i64) -> Result<Self> {
        LatticePolygon::from_coords(&[(0, 0), (ell, 0), (p, q)])
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn offset(&self) -> LatticePoint {
        self.offset
    }

    pub fn to_original(&self, p: LatticePoint) -> LatticePoint {
        p + self.offset
    }

    pub fn from_original(&self, p: LatticePoint) -> LatticePoint {
        p - self.offset
    }

    pub fn original_vertices(&self) -> Vec<LatticePoint> {
        self.vertices.iter().map(|&v| v + self.offset).collect()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, i: usize) -> LatticePoint {
        let n = self.vertices.len();
        self.vertices[i.rem_euclid(n)]
    }

    pub fn edges(&self) -> Vec<Edge> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let start = self.vertices[i];
                let end = self.vertices[(i + 1) % n];
                let d = end - start;
                let length = d.content();
                Edge { index: i, start, end, primitive: LatticePoint::new(d.x / length, d.y / length), length }
            })
            .collect()
    }

    pub fn edge(&self, j: usize) -> Edge {
        let n = self.vertices.len();
        self.edges()[j % n]
    }

    /// Twice the Euclidean area.
    pub fn area2(&self) -> i64 {
        let n = self.vertices.len();
        (0..n).map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n])).sum()
    }

    fn bounding_box(&self) -> (LatticePoint, LatticePoint) {
        let xs = self.vertices.iter().map(|v| v.x);
        let ys = self.vertices.iter().map(|v| v.y);
        (
            LatticePoint::new(xs.clone().min().unwrap(), ys.clone().min().unwrap()),
            LatticePoint::new(xs.max().unwrap(), ys.max().unwrap()),
        )
    }

    /// Minimum over edges of the half-plane value; positive means strictly inside.
    fn edge_slack(&self, p: LatticePoint) -> i64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| (self.vertices[(i + 1) % n] - self.vertices[i]).cross(p - self.vertices[i]))
            .min()
            .unwrap()
    }

    pub fn contains_strictly(&self, p: LatticePoint) -> bool {
        self.edge_slack(p) > 0
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        self.edge_slack(p) >= 0
    }

    pub fn on_boundary(&self, p: LatticePoint) -> bool {
        self.edge_slack(p) == 0
    }

    /// Interior lattice points sorted lexicographically.
    pub fn interior_points(&self) -> Vec<LatticePoint> {
        let (lo, hi) = self.bounding_box();
        let mut out = Vec::new();
        for x in lo.x..=hi.x {
            for y in lo.y..=hi.y {
                let p = LatticePoint::new(x, y);
                if self.contains_strictly(p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Boundary lattice points in counter-clockwise order starting at vertex 0.
    pub fn boundary_points(&self) -> Vec<LatticePoint> {
        let mut out = Vec::new();
        for e in self.edges() {
            for i in 0..e.length {
                out.push(e.start + i * e.primitive);
            }
        }
        out
    }

    /// All lattice points sorted lexicographically.
    pub fn lattice_points(&self) -> Vec<LatticePoint> {
        let (lo, hi) = self.bounding_box();
        let mut out = Vec::new();
        for x in lo.x..=hi.x {
            for y in lo.y..=hi.y {
                let p = LatticePoint::new(x, y);
                if self.contains(p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Number of nodes of a generic curve with this Newton polygon.
    pub fn node_count(&self) -> usize {
        self.interior_points().len()
    }

    pub fn boundary_count(&self) -> i64 {
        self.edges().iter().map(|e| e.length).sum()
    }

    /// Image under an affine map with determinant ±1.
    pub fn transform(&self, map: &AffineMap) -> Result<Self> {
        if !map.is_unimodular() {
            return Err(Error::InvalidInput("map is not unimodular".into()));
        }
        LatticePolygon::new(self.vertices.iter().map(|&v| map.apply(v)).collect())
    }

    pub fn dilate(&self, k: i64) -> Result<Self> {
        LatticePolygon::new(self.vertices.iter().map(|&v| k * v).collect())
    }

    /// Index of the lattice generated by the boundary lattice points.
    pub fn boundary_index(&self) -> SublatticeIndex {
        AffineLattice::generated_by(&self.boundary_points()).index()
    }
}

/// Index of an affine sublattice in Z².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SublatticeIndex {
    Finite(u64),
    Infinite,
}

impl SublatticeIndex {
    pub fn finite(self) -> Option<u64> {
        match self {
            SublatticeIndex::Finite(m) => Some(m),
            SublatticeIndex::Infinite => None,
        }
    }
}

impl fmt::Display for SublatticeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SublatticeIndex::Finite(m) => write!(f, "{m}"),
            SublatticeIndex::Infinite => write!(f, "infinite"),
        }
    }
}

/// Affine sublattice `base + L` of Z², with `L` stored in Hermite normal form:
/// `L` is spanned by rows `(h11, h12)` and `(0, h22)` with `0 <= h12 < h22`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineLattice {
    pub base: LatticePoint,
    pub h11: i64,
    pub h12: i64,
    pub h22: i64,
}

impl AffineLattice {
    /// Smallest affine lattice containing `points`. The first point is the base.
    pub fn generated_by(points: &[LatticePoint]) -> Self {
        let base = points.first().copied().unwrap_or(LatticePoint::ORIGIN);
        let mut lat = AffineLattice { base, h11: 0, h12: 0, h22: 0 };
        for &p in points.iter().skip(1) {
            lat.add_vector(p - base);
        }
        lat
    }

    /// Lattice through the origin spanned by `vectors`.
    pub fn spanned_by(vectors: &[LatticePoint]) -> Self {
        let mut lat = AffineLattice { base: LatticePoint::ORIGIN, h11: 0, h12: 0, h22: 0 };
        for &v in vectors {
            lat.add_vector(v);
        }
        lat
    }

    fn add_vector(&mut self, v: LatticePoint) {
        if v.is_zero() {
            return;
        }
        if self.h11 == 0 && v.x == 0 {
            self.h22 = self.h22.gcd(&v.y);
        } else {
            let eg = self.h11.extended_gcd(&v.x);
            let (mut g, mut s, mut t) = (eg.gcd, eg.x, eg.y);
            if g < 0 {
                g = -g;
                s = -s;
                t = -t;
            }
            let new_h12 = s * self.h12 + t * v.y;
            let w = (v.x / g) * self.h12 - (self.h11 / g) * v.y;
            self.h22 = self.h22.gcd(&w);
            self.h11 = g;
            self.h12 = new_h12;
        }
        if self.h22 != 0 {
            self.h12 = self.h12.rem_euclid(self.h22);
        }
    }

    pub fn rank(&self) -> usize {
        (self.h11 != 0) as usize + (self.h22 != 0) as usize
    }

    pub fn index(&self) -> SublatticeIndex {
        if self.rank() < 2 {
            SublatticeIndex::Infinite
        } else {
            SublatticeIndex::Finite((self.h11 * self.h22) as u64)
        }
    }

    /// Canonical coordinates of `p` modulo the lattice, in `[0,h11) × [0,h22)`.
    /// Requires full rank.
    pub fn reduce(&self, p: LatticePoint) -> (i64, i64) {
        debug_assert!(self.rank() == 2);
        let d = p - self.base;
        let r1 = d.x.rem_euclid(self.h11);
        let k = (d.x - r1) / self.h11;
        let r2 = (d.y - k * self.h12).rem_euclid(self.h22);
        (r1, r2)
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        self.reduce(p) == (0, 0)
    }

    /// Invariant factors `d1 | d2` of the quotient Z²/L.
    pub fn invariant_factors(&self) -> Option<(u64, u64)> {
        let m = self.index().finite()?;
        let d1 = self.h11.gcd(&self.h12).gcd(&self.h22) as u64;
        Some((d1, m / d1))
    }
}

/// Index of the affine lattice generated by `points`.
pub fn affine_sublattice_index(points: &[LatticePoint]) -> SublatticeIndex {
    AffineLattice::generated_by(points).index()
}

/// Data exhibiting a polygon as a kite: an affine unimodular map sending
/// every lattice point but two onto the vertical axis and those two to (∓1, 0).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KiteNormalization {
    /// Map from the polygon's working coordinates to kite coordinates.
    pub map: AffineMap,
    /// The two off-axis lattice points in working coordinates, sent to (-1,0) and (1,0).
    pub off_axis: [LatticePoint; 2],
    /// A point of the axis and its primitive direction, in working coordinates.
    pub axis_point: LatticePoint,
    pub axis_direction: LatticePoint,
    /// Number of interior lattice points, all on the axis.
    pub k: usize,
}

impl KiteNormalization {
    /// Range `(c_min, c_max)` of second coordinates of axis points of the polygon, in kite coordinates.
    pub fn axis_range(&self, poly: &LatticePolygon) -> (i64, i64) {
        let cs: Vec<i64> = poly
            .lattice_points()
            .into_iter()
            .map(|p| self.map.apply(p))
            .filter(|q| q.x == 0)
            .map(|q| q.y)
            .collect();
        (*cs.iter().min().unwrap(), *cs.iter().max().unwrap())
    }
}

/// Recognizes kites: all lattice points lie on one line except two, which lie
/// on opposite sides and whose connecting segment meets the line in a lattice point.
pub fn detect_kite(poly: &LatticePolygon) -> Option<KiteNormalization> {
    let verts = poly.vertices();
    if verts.len() > 4 {
        return None;
    }
    let all = poly.lattice_points();
    for i in 0..verts.len() {
        for j in (i + 1)..verts.len() {
            let (p, q) = (verts[i], verts[j]);
            let d = q - p;
            if d.x % 2 != 0 || d.y % 2 != 0 {
                continue;
            }
            let u = LatticePoint::new(d.x / 2, d.y / 2);
            if u.content() != 1 {
                continue;
            }
            let mid = p + u;
            let rest: Vec<LatticePoint> = all.iter().copied().filter(|&r| r != p && r != q).collect();
            let Some(&other) = rest.iter().find(|&&r| r != mid) else { continue };
            let dir = other - mid;
            let c = dir.content();
            let dir = LatticePoint::new(dir.x / c, dir.y / c);
            if rest.iter().any(|&r| (r - mid).cross(dir) != 0) {
                continue;
            }
            let det = u.cross(dir);
            if det.abs() != 1 {
                continue;
            }
            // Inverse of the matrix with columns u, dir.
            let m = [[dir.y * det, -dir.x * det], [-u.y * det, u.x * det]];
            let lin = AffineMap::linear(m);
            let map = AffineMap { m, b: -lin.apply_linear(mid) };
            debug_assert_eq!(map.apply(p), LatticePoint::new(-1, 0));
            debug_assert_eq!(map.apply(q), LatticePoint::new(1, 0));
            let k = poly.interior_points().len();
            return Some(KiteNormalization { map, off_axis: [p, q], axis_point: mid, axis_direction: dir, k });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    fn gcd_of_minors(points: &[LatticePoint]) -> i64 {
        let d: Vec<LatticePoint> = points.iter().map(|&p| p - points[0]).collect();
        let mut g = 0i64;
        for a in &d {
            for b in &d {
                g = g.gcd(&a.cross(*b));
            }
        }
        g
    }

    #[test]
    fn figure_triangle_edges() {
        let t = LatticePolygon::triangle(5, 7, 6).unwrap();
        let e = t.edges();
        assert_eq!(e.iter().map(|e| e.length).collect::<Vec<_>>(), vec![5, 2, 1]);
        assert_eq!(e.iter().map(|e| e.primitive).collect::<Vec<_>>(), vec![pt(1, 0), pt(1, 3), pt(-7, -6)]);
        let sum = e.iter().fold(LatticePoint::ORIGIN, |acc, e| acc + e.length * e.primitive);
        assert!(sum.is_zero());
    }

    #[test]
    fn figure_triangle_interior_rows() {
        let t = LatticePolygon::triangle(5, 7, 6).unwrap();
        let pts = t.interior_points();
        assert_eq!(pts.len(), 12);
        let rows: Vec<usize> = (1..=5).map(|v| pts.iter().filter(|p| p.y == v).count()).collect();
        assert_eq!(rows, vec![4, 3, 2, 2, 1]);
    }

    #[test]
    fn picks_formula() {
        for poly in [
            LatticePolygon::triangle(5, 7, 6).unwrap(),
            LatticePolygon::square(5).unwrap(),
            LatticePolygon::from_coords(&[(0, 0), (4, 1), (6, 5), (1, 7), (-2, 3)]).unwrap(),
        ] {
            let i = poly.interior_points().len() as i64;
            let b = poly.boundary_count();
            assert_eq!(poly.area2(), 2 * i + b - 2);
            assert_eq!(poly.boundary_points().len() as i64, b);
        }
    }

    #[test]
    fn unit_triangle_has_no_interior() {
        let t = LatticePolygon::from_coords(&[(0, 0), (1, 0), (0, 1)]).unwrap();
        assert!(t.interior_points().is_empty());
    }

    #[test]
    fn orientation_and_translation() {
        let cw = LatticePolygon::from_coords(&[(3, 2), (3, 7), (8, 7), (8, 2)]).unwrap();
        assert!(cw.area2() > 0);
        assert_eq!(cw.vertex(0), LatticePoint::ORIGIN);
        assert_eq!(cw.offset(), pt(3, 2));
        assert_eq!(cw.original_vertices()[2], pt(8, 7));
    }

    #[test]
    fn collinear_vertices_are_merged() {
        let p = LatticePolygon::from_coords(&[(0, 0), (2, 0), (4, 0), (4, 4), (0, 4)]).unwrap();
        assert_eq!(p.num_vertices(), 4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            LatticePolygon::from_coords(&[(0, 0), (2, 2), (2, 0), (0, 2)]),
            Err(Error::SelfIntersecting(_, _))
        ));
        assert!(matches!(
            LatticePolygon::from_coords(&[(0, 0), (4, 0), (1, 1), (0, 4)]),
            Err(Error::NonConvex(_))
        ));
        assert!(matches!(
            LatticePolygon::from_coords(&[(0, 0), (1, 1), (2, 2)]),
            Err(Error::DegeneratePolygon(_))
        ));
    }

    #[test]
    fn index_examples() {
        let t = LatticePolygon::triangle(5, 7, 6).unwrap();
        assert_eq!(t.boundary_index(), SublatticeIndex::Finite(3));
        assert_eq!(LatticePolygon::square(5).unwrap().boundary_index(), SublatticeIndex::Finite(1));
        assert_eq!(affine_sublattice_index(&[pt(1, 1), pt(3, 3), pt(5, 5)]), SublatticeIndex::Infinite);
        assert_eq!(affine_sublattice_index(&[pt(2, 2)]), SublatticeIndex::Infinite);
    }

    #[test]
    fn hermite_form_matches_minors() {
        let sets = [
            vec![pt(0, 0), pt(4, 6), pt(6, 4)],
            vec![pt(1, 1), pt(7, 3), pt(-2, 9), pt(5, 5)],
            vec![pt(0, 0), pt(3, 0), pt(0, 5), pt(6, 10)],
            vec![pt(2, -1), pt(2, 5), pt(8, -1)],
        ];
        for s in sets {
            let lat = AffineLattice::generated_by(&s);
            assert_eq!(lat.index(), SublatticeIndex::Finite(gcd_of_minors(&s) as u64));
            for &p in &s {
                assert!(lat.contains(p));
            }
            let (d1, d2) = lat.invariant_factors().unwrap();
            assert_eq!(d2 % d1, 0);
        }
    }

    #[test]
    fn affine_map_inverse() {
        let m = AffineMap { m: [[2, 1], [1, 1]], b: pt(3, -4) };
        let inv = m.inverse().unwrap();
        for p in [pt(0, 0), pt(5, -2), pt(-7, 11)] {
            assert_eq!(inv.apply(m.apply(p)), p);
        }
        assert_eq!(m.compose(&inv), AffineMap::IDENTITY);
    }

    #[test]
    fn kites_are_recognized() {
        let k3 = LatticePolygon::from_coords(&[(-1, 0), (0, -2), (1, 0), (0, 2)]).unwrap();
        let n = detect_kite(&k3).expect("kite");
        assert_eq!(n.k, 3);
        // The axis is the vertical line through the original origin.
        let axis = k3.to_original(n.axis_point);
        assert_eq!(axis.x, 0);
        assert_eq!(n.axis_direction.x, 0);
        let k4 = LatticePolygon::from_coords(&[(-1, 0), (0, -2), (1, 0), (0, 3)]).unwrap();
        let n4 = detect_kite(&k4).expect("kite");
        assert_eq!(n4.k, 4);
        for p in k4.lattice_points() {
            let q = n4.map.apply(p);
            assert!(q.x == 0 || q == pt(-1, 0) || q == pt(1, 0));
        }
        let r = n4.axis_range(&k4);
        assert!(r == (-2, 3) || r == (-3, 2));
        assert!(detect_kite(&LatticePolygon::square(5).unwrap()).is_none());
        assert!(detect_kite(&LatticePolygon::triangle(5, 7, 6).unwrap()).is_none());
    }

    #[test]
    fn sheared_kite() {
        let base = LatticePolygon::from_coords(&[(-1, 0), (0, -2), (1, 0), (0, 3)]).unwrap();
        let shear = AffineMap { m: [[1, 3], [1, 4]], b: pt(2, 5) };
        let moved = base.transform(&shear).unwrap();
        let n = detect_kite(&moved).expect("kite");
        assert_eq!(n.k, 4);
    }
}
