//! Randomized metric-space properties across all four space kinds, plus
//! cross-checks of the closed-form hyperbolic distance against a numeric
//! arc-length integral and of tree distances against Dijkstra on an
//! explicit subdivided graph.

mod common;

use common::*;
use hsplit::spaces::{Point, Space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn test_spaces() -> Vec<Space> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    vec![
        Space::euclidean(1).unwrap(),
        Space::euclidean(3).unwrap(),
        Space::poincare(2).unwrap(),
        Space::poincare(3).unwrap(),
        Space::Tree(y_tree()),
        Space::Tree(random_tree(&mut rng, 9)),
        Space::product(Space::euclidean(2).unwrap(), Space::poincare(2).unwrap()),
        Space::product(
            Space::Tree(random_tree(&mut rng, 5)),
            Space::euclidean(1).unwrap(),
        ),
    ]
}

#[test]
fn metric_axioms_hold_under_random_sampling() {
    for space in test_spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
        for round in 0..2500 {
            let x = random_point(&space, &mut rng);
            let y = random_point(&space, &mut rng);
            let z = random_point(&space, &mut rng);

            let dxy = space.distance(&x, &y).unwrap();
            let dyx = space.distance(&y, &x).unwrap();
            let dxz = space.distance(&x, &z).unwrap();
            let dyz = space.distance(&y, &z).unwrap();
            assert!(dxy.is_finite() && dxy >= 0.0);
            assert!(
                (dxy - dyx).abs() <= 1e-12 * (1.0 + dxy),
                "{}: asymmetry {dxy} vs {dyx} in round {round}",
                space.kind_name()
            );
            assert_eq!(space.distance(&x, &x).unwrap(), 0.0);
            assert!(
                dxz <= dxy + dyz + 1e-9 * (1.0 + dxz),
                "{}: triangle violation in round {round}",
                space.kind_name()
            );
        }
    }
}

#[test]
fn geodesics_have_exact_endpoints_and_constant_speed() {
    for space in test_spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        for round in 0..2500 {
            let x = random_point(&space, &mut rng);
            let y = random_point(&space, &mut rng);
            let lam: f64 = rng.gen();

            assert_eq!(space.geodesic_point(&x, &y, 0.0).unwrap(), x);
            assert_eq!(space.geodesic_point(&x, &y, 1.0).unwrap(), y);

            let d = space.distance(&x, &y).unwrap();
            let m = space.geodesic_point(&x, &y, lam).unwrap();
            space.check_point(&m).unwrap();
            let front = space.distance(&x, &m).unwrap();
            let back = space.distance(&m, &y).unwrap();
            let tol = 1e-9 * (1.0 + d);
            assert!(
                (front - lam * d).abs() <= tol,
                "{}: speed mismatch {front} vs {} in round {round}",
                space.kind_name(),
                lam * d
            );
            assert!(
                (front + back - d).abs() <= tol,
                "{}: betweenness broken in round {round}",
                space.kind_name()
            );
        }
    }
}

#[test]
fn curvature_inequalities_hold_under_random_sampling() {
    for space in test_spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        for round in 0..2500 {
            let x = random_point(&space, &mut rng);
            let y = random_point(&space, &mut rng);
            let z = random_point(&space, &mut rng);
            let w = random_point(&space, &mut rng);
            let lam: f64 = rng.gen();

            let scale = space
                .distance(&z, &x)
                .unwrap()
                .max(space.distance(&z, &y).unwrap())
                .max(space.distance(&x, &y).unwrap());
            let floor = -1e-9 * (1.0 + scale * scale);

            let conv = space.geodesic_convexity_residual(&z, &x, &y, lam).unwrap();
            assert!(
                conv >= floor,
                "{}: convexity residual {conv} below {floor} in round {round}",
                space.kind_name()
            );
            let mid = space.midpoint_residual(&z, &x, &y).unwrap();
            assert!(mid >= floor, "{}: midpoint residual {mid} in round {round}", space.kind_name());

            let qscale = scale
                .max(space.distance(&z, &w).unwrap())
                .max(space.distance(&x, &w).unwrap())
                .max(space.distance(&y, &w).unwrap());
            let qfloor = -1e-9 * (1.0 + qscale * qscale);
            let quad = space.quadrilateral_residual(&x, &y, &z, &w).unwrap();
            assert!(
                quad >= qfloor,
                "{}: quadrilateral residual {quad} below {qfloor} in round {round}",
                space.kind_name()
            );
        }
    }
}

#[test]
fn euclidean_convexity_residual_vanishes() {
    let space = Space::euclidean(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..2000 {
        let x = random_point(&space, &mut rng);
        let y = random_point(&space, &mut rng);
        let z = random_point(&space, &mut rng);
        let lam: f64 = rng.gen();
        let res = space.geodesic_convexity_residual(&z, &x, &y, lam).unwrap();
        let scale = space.distance(&z, &x).unwrap().max(space.distance(&z, &y).unwrap());
        assert!(res.abs() <= 1e-9 * (1.0 + scale * scale), "flat residual {res}");
    }
}

#[test]
fn poincare_distance_matches_arc_length_integral() {
    for dim in [2usize, 3] {
        let space = Space::poincare(dim).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42 + dim as u64);
        for _ in 0..40 {
            let x = random_point(&space, &mut rng);
            let y = random_point(&space, &mut rng);
            let closed = space.distance(&x, &y).unwrap();
            let numeric = poincare_arc_length(&space, &x, &y, 12_000);
            assert!(
                (closed - numeric).abs() <= 1e-6 * (1.0 + closed),
                "dim {dim}: closed {closed} vs arc length {numeric}"
            );
        }
    }
}

#[test]
fn poincare_radial_distance_closed_form() {
    // From the origin the distance must be 2 atanh(|x|).
    let space = Space::poincare(2).unwrap();
    let origin = Point::vector([0.0, 0.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..5000 {
        let x = random_point(&space, &mut rng);
        let r = x.as_vector().unwrap().iter().map(|c| c * c).sum::<f64>().sqrt();
        let expect = 2.0 * r.atanh();
        let got = space.distance(&origin, &x).unwrap();
        assert!((got - expect).abs() <= 1e-12 * (1.0 + expect), "{got} vs {expect}");
    }
}

#[test]
fn tree_distances_match_dijkstra_on_subdivided_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7EE);
    for _ in 0..30 {
        let tree = random_tree(&mut rng, 9);
        let space = Space::Tree(tree.clone());
        for _ in 0..60 {
            let p = random_point(&space, &mut rng);
            let q = random_point(&space, &mut rng);
            let (tp, tq) = (p.as_tree().unwrap(), q.as_tree().unwrap());
            let got = space.distance(&p, &q).unwrap();
            let want = tree_distance_dijkstra(&tree, tp, tq, 3);
            assert!(
                (got - want).abs() <= 1e-9 * (1.0 + want),
                "tree distance {got} vs dijkstra {want}"
            );
        }
    }
}

#[test]
fn tree_geodesic_points_sit_between_endpoints_by_dijkstra() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1D);
    for _ in 0..20 {
        let tree = random_tree(&mut rng, 7);
        let space = Space::Tree(tree.clone());
        for _ in 0..40 {
            let p = random_point(&space, &mut rng);
            let q = random_point(&space, &mut rng);
            let lam: f64 = rng.gen();
            let m = space.geodesic_point(&p, &q, lam).unwrap();
            let d = tree_distance_dijkstra(&tree, p.as_tree().unwrap(), q.as_tree().unwrap(), 2);
            let front =
                tree_distance_dijkstra(&tree, p.as_tree().unwrap(), m.as_tree().unwrap(), 2);
            let back =
                tree_distance_dijkstra(&tree, m.as_tree().unwrap(), q.as_tree().unwrap(), 2);
            let tol = 1e-9 * (1.0 + d);
            assert!((front - lam * d).abs() <= tol, "front {front} vs {}", lam * d);
            assert!((front + back - d).abs() <= tol);
        }
    }
}

#[test]
fn product_distance_squared_is_the_component_sum() {
    let left = Space::poincare(2).unwrap();
    let right = Space::euclidean(2).unwrap();
    let space = Space::product(left.clone(), right.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(0xAB);
    for _ in 0..2000 {
        let a = random_point(&space, &mut rng);
        let b = random_point(&space, &mut rng);
        let (al, ar) = a.as_product().unwrap();
        let (bl, br) = b.as_product().unwrap();
        let sum = left.distance_squared(al, bl).unwrap() + right.distance_squared(ar, br).unwrap();
        let whole = space.distance_squared(&a, &b).unwrap();
        assert_eq!(whole.to_bits(), sum.to_bits());
    }
}
