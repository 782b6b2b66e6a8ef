use proptest::prelude::*;
use toricmono::lattice::{AffineLattice, AffineMap};
use toricmono::permgroup::Permutation;
use toricmono::{LatticePoint, LatticePolygon};

fn triangle_coords() -> impl Strategy<Value = [(i64, i64); 3]> {
    prop::array::uniform3((-6i64..=6, -6i64..=6))
        .prop_filter("nondegenerate", |[a, b, c]| (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0) != 0)
}

proptest! {
    #[test]
    fn pick_formula(t in triangle_coords()) {
        let poly = LatticePolygon::convex_hull(&t.map(LatticePoint::from)).unwrap();
        let i = poly.interior_points().len() as i64;
        let b = poly.boundary_points().len() as i64;
        prop_assert_eq!(poly.area2(), 2 * i + b - 2);
    }

    #[test]
    fn shears_preserve_counts(t in triangle_coords(), s in -3i64..=3) {
        let poly = LatticePolygon::convex_hull(&t.map(LatticePoint::from)).unwrap();
        let img = poly.transform(&AffineMap::linear([[1, s], [0, 1]])).unwrap();
        prop_assert_eq!(img.interior_points().len(), poly.interior_points().len());
        prop_assert_eq!(img.boundary_points().len(), poly.boundary_points().len());
    }

    #[test]
    fn span_index_is_det(a in (-9i64..=9, -9i64..=9), b in (-9i64..=9, -9i64..=9)) {
        let (u, v) = (LatticePoint::from(a), LatticePoint::from(b));
        prop_assume!(u.cross(v) != 0);
        let lat = AffineLattice::spanned_by(&[u, v]);
        prop_assert!(lat.contains(u) && lat.contains(v) && lat.contains(u + v));
        prop_assert_eq!(lat.index().finite(), Some(u.cross(v).unsigned_abs()));
    }

    #[test]
    fn inverse_cancels(images in Just((0..7usize).collect::<Vec<_>>()).prop_shuffle()) {
        let p = Permutation::from_images(images).unwrap();
        prop_assert!(p.compose(&p.inverse()).is_identity());
    }
}
