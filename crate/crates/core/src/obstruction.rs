//! Quotients of Z² by affine sublattices modulo ±id, the induced labelling of
//! interior points, and finite-map pushouts.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{AffineLattice, LatticePoint, LatticePolygon};

/// Class of a point in `(Z²/L)/±id`: the lexicographically smaller of the
/// reduced coordinates of `r` and `-r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassLabel(pub i64, pub i64);

impl ClassLabel {
    pub const ZERO: ClassLabel = ClassLabel(0, 0);
}

/// The quotient `Q_S = (Z²/⟨S⟩)/±id`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientStructure {
    pub lattice: AffineLattice,
    pub index: u64,
    pub invariant_factors: (u64, u64),
    classes: Vec<ClassLabel>,
}

impl QuotientStructure {
    pub fn new(lattice: AffineLattice) -> Result<Self> {
        let index = lattice
            .index()
            .finite()
            .ok_or_else(|| Error::InvalidInput("generating set spans a sublattice of infinite index".into()))?;
        let invariant_factors = lattice.invariant_factors().unwrap();
        let mut q = QuotientStructure { lattice, index, invariant_factors, classes: Vec::new() };
        let mut classes = Vec::new();
        for r1 in 0..lattice.h11 {
            for r2 in 0..lattice.h22 {
                classes.push(q.class_of_vector(LatticePoint::new(r1, r2)));
            }
        }
        classes.sort();
        classes.dedup();
        q.classes = classes;
        Ok(q)
    }

    pub fn from_points(points: &[LatticePoint]) -> Result<Self> {
        QuotientStructure::new(AffineLattice::generated_by(points))
    }

    fn class_of_vector(&self, d: LatticePoint) -> ClassLabel {
        let lat = AffineLattice { base: LatticePoint::ORIGIN, ..self.lattice };
        let a = lat.reduce(d);
        let b = lat.reduce(-d);
        let m = a.min(b);
        ClassLabel(m.0, m.1)
    }

    /// Label of a lattice point.
    pub fn class_of(&self, p: LatticePoint) -> ClassLabel {
        self.class_of_vector(p - self.lattice.base)
    }

    /// All classes of the quotient, sorted.
    pub fn classes(&self) -> &[ClassLabel] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn is_cyclic(&self) -> bool {
        self.lattice.h11 == 1
    }

    /// Human-readable label: a single integer for cyclic quotients.
    pub fn label_name(&self, c: ClassLabel) -> String {
        if self.is_cyclic() {
            c.1.to_string()
        } else {
            format!("({},{})", c.0, c.1)
        }
    }
}

/// A labelling of a finite domain of lattice points by classes of a quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberPartition {
    pub quotient: QuotientStructure,
    pub domain: Vec<LatticePoint>,
    pub labels: Vec<ClassLabel>,
}

impl FiberPartition {
    pub fn fibers(&self) -> BTreeMap<ClassLabel, Vec<LatticePoint>> {
        let mut out: BTreeMap<ClassLabel, Vec<LatticePoint>> = BTreeMap::new();
        for (p, l) in self.domain.iter().zip(&self.labels) {
            out.entry(*l).or_default().push(*p);
        }
        out
    }

    pub fn fiber_sizes(&self) -> BTreeMap<ClassLabel, usize> {
        self.fibers().into_iter().map(|(k, v)| (k, v.len())).collect()
    }

    pub fn label_of(&self, p: LatticePoint) -> Option<ClassLabel> {
        self.domain.iter().position(|&q| q == p).map(|i| self.labels[i])
    }

    /// True if every class of the target is hit.
    pub fn is_surjective(&self) -> bool {
        let hit = self.fibers();
        self.quotient.classes().iter().all(|c| hit.contains_key(c))
    }

    /// True if every nonzero class of the target is hit.
    pub fn hits_all_nonzero_classes(&self) -> bool {
        let hit = self.fibers();
        self.quotient.classes().iter().filter(|c| **c != ClassLabel::ZERO).all(|c| hit.contains_key(c))
    }

    /// Order of the group of permutations of the domain preserving labels.
    pub fn aut_order(&self) -> BigUint {
        self.fiber_sizes().values().map(|&n| factorial(n)).product()
    }

    pub fn restrict(&self, subset: &[LatticePoint]) -> FiberPartition {
        let mut domain = Vec::new();
        let mut labels = Vec::new();
        for (p, l) in self.domain.iter().zip(&self.labels) {
            if subset.contains(p) {
                domain.push(*p);
                labels.push(*l);
            }
        }
        FiberPartition { quotient: self.quotient.clone(), domain, labels }
    }

    /// The labelling as a map to `0..class_count`, classes numbered in sorted order.
    pub fn to_finmap(&self) -> FinMap {
        let classes = self.quotient.classes();
        let assignment = self.labels.iter().map(|l| classes.binary_search(l).unwrap()).collect();
        FinMap { assignment, codomain: classes.len() }
    }

    /// Same partition of the same domain.
    pub fn same_fibers(&self, other: &FiberPartition) -> bool {
        self.domain == other.domain && self.to_finmap().same_partition(&other.to_finmap())
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// The labelling `Ψ_S` of the interior points of `poly`.
pub fn psi(s: &[LatticePoint], poly: &LatticePolygon) -> Result<FiberPartition> {
    psi_on(s, &poly.interior_points())
}

/// The labelling `Ψ_S` on an arbitrary domain.
pub fn psi_on(s: &[LatticePoint], domain: &[LatticePoint]) -> Result<FiberPartition> {
    if s.is_empty() {
        return Err(Error::InvalidInput("empty generating set".into()));
    }
    let quotient = QuotientStructure::from_points(s)?;
    let labels = domain.iter().map(|&p| quotient.class_of(p)).collect();
    Ok(FiberPartition { quotient, domain: domain.to_vec(), labels })
}

/// `Ψ_∂Δ`: the labelling by the lattice generated by boundary points.
pub fn psi_boundary(poly: &LatticePolygon) -> Result<FiberPartition> {
    psi(&poly.boundary_points(), poly)
}

/// Labelling of interior points by the quotient of the rotated boundary lattice.
///
/// An interior point `x` is labelled by the class of its quarter-turn preimage
/// `(x.y, -x.x)` modulo the lattice spanned by the rotated primitive edge vectors.
pub fn psi_x_view(poly: &LatticePolygon) -> Result<FiberPartition> {
    let rotated: Vec<LatticePoint> = poly.edges().iter().map(|e| e.primitive.rotate()).collect();
    let quotient = QuotientStructure::new(AffineLattice::spanned_by(&rotated))?;
    let domain = poly.interior_points();
    let labels = domain.iter().map(|&x| quotient.class_of(LatticePoint::new(x.y, -x.x))).collect();
    Ok(FiberPartition { quotient, domain, labels })
}

/// Evidence that `Ψ_∂Δ` misses part of its target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonSurjectivityCertificate {
    pub index: u64,
    /// An interior point in the boundary lattice, when the index is 2 or 3.
    pub witness: Option<LatticePoint>,
}

pub fn nonsurjectivity_certificate(poly: &LatticePolygon) -> Result<Option<NonSurjectivityCertificate>> {
    let lat = AffineLattice::generated_by(&poly.boundary_points());
    let index = lat
        .index()
        .finite()
        .ok_or_else(|| Error::DegeneratePolygon("boundary lattice has infinite index".into()))?;
    if index >= 4 {
        return Ok(Some(NonSurjectivityCertificate { index, witness: None }));
    }
    if index >= 2 {
        if let Some(p) = poly.interior_points().into_iter().find(|&p| lat.contains(p)) {
            return Ok(Some(NonSurjectivityCertificate { index, witness: Some(p) }));
        }
    }
    Ok(None)
}

/// A map `{0..n} -> {0..codomain}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinMap {
    pub assignment: Vec<usize>,
    pub codomain: usize,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

impl FinMap {
    pub fn new(assignment: Vec<usize>, codomain: usize) -> Result<Self> {
        if assignment.iter().any(|&a| a >= codomain) {
            return Err(Error::InvalidInput("assignment exceeds codomain".into()));
        }
        Ok(FinMap { assignment, codomain })
    }

    pub fn domain_size(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.codomain];
        for &a in &self.assignment {
            hit[a] = true;
        }
        hit.into_iter().all(|h| h)
    }

    /// Fibers over the image, ordered by first element.
    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut by_target: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (x, &a) in self.assignment.iter().enumerate() {
            by_target.entry(a).or_default().push(x);
        }
        let mut out: Vec<Vec<usize>> = by_target.into_values().collect();
        out.sort();
        out
    }

    pub fn same_partition(&self, other: &FinMap) -> bool {
        self.domain_size() == other.domain_size() && self.fibers() == other.fibers()
    }

    pub fn aut_order(&self) -> BigUint {
        self.fibers().iter().map(|f| factorial(f.len())).product()
    }
}

/// The pushout `f ⋆ g` of two maps with a common domain: its fibers form the
/// finest partition coarser than the fibers of both. The codomain is the
/// quotient of the disjoint union of both codomains, so unused targets survive.
pub fn pushout(f: &FinMap, g: &FinMap) -> Result<FinMap> {
    if f.domain_size() != g.domain_size() {
        return Err(Error::DomainMismatch(format!("{} vs {}", f.domain_size(), g.domain_size())));
    }
    let total = f.codomain + g.codomain;
    let mut uf = UnionFind::new(total);
    for (&a, &b) in f.assignment.iter().zip(&g.assignment) {
        uf.union(a, f.codomain + b);
    }
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut assignment = Vec::with_capacity(f.domain_size());
    for &a in &f.assignment {
        let r = uf.find(a);
        let next = ids.len();
        assignment.push(*ids.entry(r).or_insert(next));
    }
    for x in 0..total {
        let r = uf.find(x);
        let next = ids.len();
        ids.entry(r).or_insert(next);
    }
    Ok(FinMap { assignment, codomain: ids.len() })
}

/// Checks that `Ψ_S ⋆ Ψ_S'` and `Ψ_{S∪S'}` have the same fibers on the interior points.
/// Requires `S ∩ S' ≠ ∅` and both labellings to be surjective, class zero included.
pub fn verify_push_lemma(poly: &LatticePolygon, s: &[LatticePoint], s2: &[LatticePoint]) -> Result<bool> {
    if !s.iter().any(|p| s2.contains(p)) {
        return Err(Error::HypothesisViolated("generating sets are disjoint".into()));
    }
    let f = psi(s, poly)?;
    let g = psi(s2, poly)?;
    if !f.is_surjective() || !g.is_surjective() {
        return Err(Error::HypothesisViolated("labelling is not surjective".into()));
    }
    let mut union: Vec<LatticePoint> = s.to_vec();
    union.extend(s2.iter().copied().filter(|p| !s.contains(p)));
    let h = psi(&union, poly)?;
    let push = pushout(&f.to_finmap(), &g.to_finmap())?;
    Ok(push.same_partition(&h.to_finmap()))
}

impl fmt::Display for FiberPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, pts) in self.fibers() {
            let list: Vec<String> = pts.iter().map(|p| p.to_string()).collect();
            writeln!(f, "{}: {}", self.quotient.label_name(label), list.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SublatticeIndex;

    fn pt(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    fn figure() -> LatticePolygon {
        LatticePolygon::triangle(5, 7, 6).unwrap()
    }

    fn base_and_apex(ell: i64, p: i64, q: i64) -> Vec<LatticePoint> {
        let mut s: Vec<LatticePoint> = (0..=ell).map(|u| pt(u, 0)).collect();
        s.push(pt(p, q));
        s
    }

    #[test]
    fn boundary_fibers_of_figure_triangle() {
        let f = psi_boundary(&figure()).unwrap();
        assert_eq!(f.quotient.index, 3);
        let sizes = f.fiber_sizes();
        assert_eq!(sizes[&ClassLabel(0, 0)], 2);
        assert_eq!(sizes[&ClassLabel(0, 1)], 10);
        assert_eq!(f.quotient.class_count(), 2);
    }

    #[test]
    fn triangle_labels_are_distance_to_height_lattice() {
        let t = figure();
        let f = psi(&base_and_apex(5, 7, 6), &t).unwrap();
        for (p, l) in f.domain.iter().zip(&f.labels) {
            let r = p.y.rem_euclid(6);
            assert_eq!(*l, ClassLabel(0, r.min(6 - r)));
        }
        let sizes: Vec<usize> = f.fiber_sizes().values().copied().collect();
        assert_eq!(sizes, vec![5, 5, 2]);
        assert_eq!(f.aut_order(), BigUint::from(28800u32));
        assert!(!f.fibers().contains_key(&ClassLabel::ZERO));
    }

    #[test]
    fn cyclic_class_count() {
        for m in 1..12 {
            let q = QuotientStructure::from_points(&[pt(0, 0), pt(1, 0), pt(3, m)]).unwrap();
            assert_eq!(q.class_count(), (m / 2 + 1) as usize);
        }
        let q = QuotientStructure::from_points(&[pt(0, 0), pt(2, 0), pt(0, 2)]).unwrap();
        assert_eq!(q.invariant_factors, (2, 2));
        assert_eq!(q.class_count(), 4);
    }

    #[test]
    fn certificate_examples() {
        let c = nonsurjectivity_certificate(&figure()).unwrap().unwrap();
        assert_eq!(c, NonSurjectivityCertificate { index: 3, witness: Some(pt(4, 3)) });
        assert!(nonsurjectivity_certificate(&LatticePolygon::square(5).unwrap()).unwrap().is_none());
        let big = LatticePolygon::triangle(1, 2, 5).unwrap();
        assert_eq!(big.boundary_index(), SublatticeIndex::Finite(5));
        assert_eq!(nonsurjectivity_certificate(&big).unwrap().unwrap().witness, None);
    }

    #[test]
    fn certificate_means_several_fibers() {
        for poly in [figure(), LatticePolygon::triangle(1, 2, 5).unwrap(), LatticePolygon::triangle(3, 1, 4).unwrap()] {
            if nonsurjectivity_certificate(&poly).unwrap().is_some() {
                let f = psi_boundary(&poly).unwrap();
                assert!(f.fibers().len() >= 2);
                assert!(f.aut_order() < factorial(f.domain.len()));
            }
        }
    }

    #[test]
    fn rotated_view_has_same_fibers() {
        for poly in [
            figure(),
            LatticePolygon::square(5).unwrap(),
            LatticePolygon::triangle(2, 5, 8).unwrap(),
            LatticePolygon::from_coords(&[(0, 0), (6, 2), (4, 8), (-2, 6)]).unwrap(),
        ] {
            let a = psi_boundary(&poly).unwrap();
            let b = psi_x_view(&poly).unwrap();
            assert_eq!(a.quotient.class_count(), b.quotient.class_count());
            assert!(a.same_fibers(&b));
        }
    }

    #[test]
    fn pushout_example() {
        let f = FinMap::new(vec![0, 0, 1, 2], 3).unwrap();
        let g = FinMap::new(vec![0, 1, 1, 2], 3).unwrap();
        let h = pushout(&f, &g).unwrap();
        assert_eq!(h.fibers(), vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(h.aut_order(), BigUint::from(6u32));
    }

    #[test]
    fn pushout_domain_mismatch() {
        let f = FinMap::new(vec![0, 0], 1).unwrap();
        let g = FinMap::new(vec![0, 1, 1], 2).unwrap();
        assert!(matches!(pushout(&f, &g), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn pushout_keeps_unused_targets() {
        let f = FinMap::new(vec![0, 0], 3).unwrap();
        let g = FinMap::new(vec![1, 1], 2).unwrap();
        let h = pushout(&f, &g).unwrap();
        assert_eq!(h.codomain, 4);
        assert!(!h.is_surjective());
    }

    #[test]
    fn push_lemma_on_consecutive_wedges() {
        let sq = LatticePolygon::square(5).unwrap();
        let bottom: Vec<LatticePoint> = (0..=5).map(|i| pt(i, 0)).collect();
        let (mut w1, mut w2) = (bottom.clone(), bottom);
        w1.push(pt(5, 1));
        w2.push(pt(5, 2));
        assert!(psi(&w1, &sq).unwrap().is_surjective() && psi(&w2, &sq).unwrap().is_surjective());
        assert!(verify_push_lemma(&sq, &w1, &w2).unwrap());
    }

    #[test]
    fn push_lemma_needs_the_zero_class() {
        // Both labellings reach every nonzero class but miss zero, and the
        // pushout on the interior points is coarser than nothing links.
        let t = figure();
        let edge = vec![pt(5, 0), pt(6, 3), pt(7, 6)];
        let (mut s, mut s2) = (edge.clone(), edge);
        s.push(pt(0, 0));
        s2.push(pt(1, 0));
        let (f, g) = (psi(&s, &t).unwrap(), psi(&s2, &t).unwrap());
        assert!(f.hits_all_nonzero_classes() && g.hits_all_nonzero_classes());
        assert!(!f.is_surjective());
        assert!(matches!(verify_push_lemma(&t, &s, &s2), Err(Error::HypothesisViolated(_))));
        let mut union = s.clone();
        union.push(pt(1, 0));
        let h = psi(&union, &t).unwrap();
        let push = pushout(&f.to_finmap(), &g.to_finmap()).unwrap();
        assert!(!push.same_partition(&h.to_finmap()));
    }

    #[test]
    fn push_lemma_requires_overlap() {
        let t = figure();
        let r = verify_push_lemma(&t, &[pt(0, 0), pt(1, 0)], &[pt(7, 6), pt(6, 3)]);
        assert!(matches!(r, Err(Error::HypothesisViolated(_))));
    }
}
