//! Search-oracle behavior on whole problems: segment minimizers recover
//! the closed-form prox parameter, grid minima improve monotonically
//! under refinement, and reference solving certifies its own output.

mod common;

use std::sync::Arc;

use common::*;
use hsplit::functions::{half_squared_distance, indicator, ConvexSet, ProxFunction};
use hsplit::oracle::{golden_section_on_geodesic, grid_minimize, SamplingRegion};
use hsplit::spaces::{Point, Space};
use hsplit::splitting::SplitProblem;
use hsplit::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The quadratic-prox step length is gamma/(1+gamma) of the way toward
/// the anchor on every space; the segment search must find it blind.
#[test]
fn segment_search_recovers_the_quadratic_prox_parameter() {
    let spaces = [
        Space::euclidean(3).unwrap(),
        Space::poincare(2).unwrap(),
        Space::Tree(y_tree()),
        Space::product(Space::euclidean(1).unwrap(), Space::poincare(2).unwrap()),
    ];
    for space in &spaces {
        let mut rng = ChaCha8Rng::seed_from_u64(0x60D5);
        for k in 0..20 {
            let x = random_point(space, &mut rng);
            let a = random_point(space, &mut rng);
            let d = space.distance(&x, &a).unwrap();
            if d < 1e-3 {
                continue;
            }
            let gamma = 0.3 + 0.2 * k as f64;
            let f = half_squared_distance(a.clone());
            let mut obj = |z: &Point| {
                Ok(gamma * f.evaluate(space, z)? + 0.5 * space.distance_squared(&x, z)?)
            };
            let (lambda, _, _) =
                golden_section_on_geodesic(space, &mut obj, &x, &a, 1e-9).unwrap();
            let want = gamma / (1.0 + gamma);
            assert!(
                (lambda - want).abs() <= 1e-6,
                "{}: step fraction {lambda} vs {want}",
                space.kind_name()
            );
        }
    }
}

#[test]
fn segment_endpoint_minimum_is_found_exactly() {
    let space = Space::euclidean(2).unwrap();
    let x = Point::vector([0.4, -1.0]);
    let y = Point::vector([2.0, 3.0]);
    let mut obj = |z: &Point| space.distance_squared(z, &x);
    let (lambda, p, v) = golden_section_on_geodesic(&space, &mut obj, &x, &y, 1e-9).unwrap();
    assert!(lambda.abs() <= 1e-8);
    assert!(space.distance(&p, &x).unwrap() <= 1e-7);
    assert!(v <= 1e-12);
}

#[test]
fn grid_minimum_never_rises_when_resolution_doubles() {
    // A convex quadratic over each region kind, plus the coupled
    // feasibility objective over a product region.
    let e2 = Space::euclidean(2).unwrap();
    let p2 = Space::poincare(2).unwrap();
    let cases: Vec<(Space, SamplingRegion, Point)> = vec![
        (
            e2.clone(),
            SamplingRegion::Box { center: vec![0.0, 0.0], half_widths: vec![3.0, 3.0] },
            Point::vector([0.7, -1.2]),
        ),
        (
            p2.clone(),
            SamplingRegion::BallCap { cap: 0.8 },
            Point::vector([0.3, 0.25]),
        ),
        (
            Space::Tree(y_tree()),
            SamplingRegion::WholeTree,
            Point::Tree(hsplit::spaces::TreePosition::OnEdge { edge: 2, offset: 0.35 }),
        ),
    ];
    for (space, region, target) in cases {
        let mut prev: Option<f64> = None;
        for resolution in [2usize, 4, 8, 16, 32] {
            let mut obj = |z: &Point| space.distance_squared(z, &target);
            let (_, v) = grid_minimize(&space, &mut obj, &region, resolution).unwrap();
            if let Some(p) = prev {
                assert!(
                    v <= p + 1e-9 * (1.0 + p.abs()),
                    "{}: minimum rose from {p} to {v} at resolution {resolution}",
                    space.kind_name()
                );
            }
            assert!(v <= 1e-8, "{}: residual minimum {v}", space.kind_name());
            prev = Some(v);
        }
    }

    // Coupled two-block objective: distance-squared between the blocks
    // plus interval constraints, optimum 2.
    let e1 = Space::euclidean(1).unwrap();
    let prod = Space::product(e1.clone(), e1);
    let left = ConvexSet::Box { lower: vec![-10.0], upper: vec![0.0] };
    let right = ConvexSet::Box { lower: vec![2.0], upper: vec![10.0] };
    let reg1 = SamplingRegion::Box { center: vec![0.0], half_widths: vec![10.0] };
    let region = SamplingRegion::Product(Box::new(reg1.clone()), Box::new(reg1));
    let mut prev: Option<f64> = None;
    for resolution in [2usize, 4, 8, 16, 32, 64] {
        let mut obj = |p: &Point| {
            let (x, y) = p.as_product().unwrap();
            let line = match &prod {
                Space::Product(a, _) => a.as_ref(),
                _ => unreachable!(),
            };
            if !left.contains(line, x)? || !right.contains(line, y)? {
                return Ok(f64::INFINITY);
            }
            Ok(0.5 * line.distance_squared(x, y)?)
        };
        let (_, v) = grid_minimize(&prod, &mut obj, &region, resolution).unwrap();
        if let Some(p) = prev {
            assert!(v <= p + 1e-9 * (1.0 + p.abs()), "minimum rose from {p} to {v}");
        }
        assert!((v - 2.0).abs() <= 1e-6, "feasibility optimum {v}");
        prev = Some(v);
    }
}

#[test]
fn tiny_resolutions_are_rejected() {
    let space = Space::euclidean(1).unwrap();
    let region = SamplingRegion::Box { center: vec![0.0], half_widths: vec![1.0] };
    for resolution in [0usize, 1] {
        let err = grid_minimize(&space, &mut |z| space.distance_squared(z, z), &region, resolution)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }
}

/// The full coupled objective on the Y tree: the grid search alone must
/// land near the known optimum 1/4 before any fixed-point polish.
#[test]
fn tree_grid_search_approaches_the_known_optimum() {
    let space = Space::Tree(y_tree());
    let problem = SplitProblem::new(
        space.clone(),
        Arc::new(indicator(ConvexSet::Subtree { vertices: vec![0, 1] })),
        Arc::new(half_squared_distance(Point::Tree(
            hsplit::spaces::TreePosition::Vertex(2),
        ))),
        1.0,
    )
    .unwrap();
    let prod = Space::product(space.clone(), space.clone());
    let region =
        SamplingRegion::Product(Box::new(SamplingRegion::WholeTree), Box::new(SamplingRegion::WholeTree));
    let mut obj = |p: &Point| {
        let (x, y) = p.as_product().unwrap();
        problem.phi(x, y)
    };
    let (pair, v) = grid_minimize(&prod, &mut obj, &region, 16).unwrap();
    assert!((v - 0.25).abs() <= 1e-6, "tree optimum came out {v}");
    let (x, y) = pair.as_product().unwrap();
    assert!(space.distance(x, &Point::Tree(hsplit::spaces::TreePosition::Vertex(0))).unwrap() <= 1e-4);
    assert!(
        space
            .distance(y, &Point::Tree(hsplit::spaces::TreePosition::OnEdge { edge: 1, offset: 0.5 }))
            .unwrap()
            <= 1e-4
    );
}
