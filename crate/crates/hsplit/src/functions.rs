//! Proper convex functions with computable proximal maps.
//!
//! The catalog covers indicator functions of convex sets, half squared
//! distance to an anchor, plain distance to an anchor, and the zero
//! function. Values live in (-inf, +inf]; +inf marks points outside a
//! domain, minus infinity and NaN are contract violations.
//!
//! Each closed-form prox here is provably the global minimizer of
//! gamma*f(.) + d(x,.)^2/2 in every space of nonpositive curvature (via
//! comparison with the flat case), and the residual helpers at the bottom
//! let test suites certify that claim numerically instead of trusting it.

use rand::Rng;

use crate::error::{Error, Result};
use crate::spaces::{poincare, Point, Space, TreePosition};

/// Membership slack for sets whose boundary is reached by projection
/// arithmetic; keeps indicator(project(x)) finite under roundoff.
const SET_MEMBERSHIP_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub enum ConvexSet {
    /// Axis-aligned box in Euclidean space.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Euclidean norm ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Geodesic ball in the Poincaré model; the radius is hyperbolic.
    GeodesicBall { center: Vec<f64>, radius: f64 },
    /// Subtree induced by a vertex subset of a metric tree.
    Subtree { vertices: Vec<usize> },
    Product(Box<ConvexSet>, Box<ConvexSet>),
}

impl ConvexSet {
    pub fn product(left: ConvexSet, right: ConvexSet) -> Self {
        ConvexSet::Product(Box::new(left), Box::new(right))
    }

    pub fn validate(&self, space: &Space) -> Result<()> {
        match (self, space) {
            (ConvexSet::Box { lower, upper }, Space::Euclidean { dim }) => {
                if lower.len() != *dim || upper.len() != *dim {
                    return Err(Error::InvalidInput(format!(
                        "box bounds must have {dim} coordinates"
                    )));
                }
                for (lo, hi) in lower.iter().zip(upper) {
                    if !lo.is_finite() || !hi.is_finite() || lo > hi {
                        return Err(Error::InvalidInput(format!(
                            "empty or malformed box axis [{lo}, {hi}]"
                        )));
                    }
                }
                Ok(())
            }
            (ConvexSet::Ball { center, radius }, Space::Euclidean { .. }) => {
                space.check_point(&Point::Vector(center.clone()))?;
                if !radius.is_finite() || *radius < 0.0 {
                    return Err(Error::InvalidInput(format!("ball radius {radius} < 0")));
                }
                Ok(())
            }
            (ConvexSet::GeodesicBall { center, radius }, Space::Poincare { .. }) => {
                space.check_point(&Point::Vector(center.clone()))?;
                if !radius.is_finite() || *radius < 0.0 {
                    return Err(Error::InvalidInput(format!("ball radius {radius} < 0")));
                }
                Ok(())
            }
            (ConvexSet::Subtree { vertices }, Space::Tree(tree)) => {
                if vertices.is_empty() {
                    return Err(Error::InvalidInput("subtree needs at least one vertex".into()));
                }
                for &v in vertices {
                    if v >= tree.vertex_count() {
                        return Err(Error::InvalidInput(format!("subtree vertex id {v} out of range")));
                    }
                }
                let mut sorted = vertices.clone();
                sorted.sort_unstable();
                sorted.dedup();
                // Connectivity of the induced subgraph.
                let inside = |v: usize| sorted.binary_search(&v).is_ok();
                let mut seen = vec![false; tree.vertex_count()];
                let mut stack = vec![sorted[0]];
                seen[sorted[0]] = true;
                let mut count = 1;
                while let Some(cur) = stack.pop() {
                    for &(nbr, _) in tree.neighbors(cur) {
                        if inside(nbr) && !seen[nbr] {
                            seen[nbr] = true;
                            count += 1;
                            stack.push(nbr);
                        }
                    }
                }
                if count != sorted.len() {
                    return Err(Error::InvalidInput(
                        "subtree vertex set induces a disconnected subgraph".into(),
                    ));
                }
                Ok(())
            }
            (ConvexSet::Product(l, r), Space::Product(ls, rs)) => {
                l.validate(ls)?;
                r.validate(rs)
            }
            _ => Err(Error::InvalidInput(format!(
                "set kind does not apply to a {} space",
                space.kind_name()
            ))),
        }
    }

    pub fn contains(&self, space: &Space, p: &Point) -> Result<bool> {
        space.check_point(p)?;
        match (self, p) {
            (ConvexSet::Box { lower, upper }, Point::Vector(v)) => Ok(v
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)),
            (ConvexSet::Ball { center, radius }, Point::Vector(v)) => {
                let d2: f64 = v
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                Ok(d2.sqrt() <= radius + SET_MEMBERSHIP_SLACK * (1.0 + radius))
            }
            (ConvexSet::GeodesicBall { center, radius }, Point::Vector(v)) => {
                let d = poincare::distance(v, center);
                Ok(d <= radius + SET_MEMBERSHIP_SLACK * (1.0 + radius))
            }
            (ConvexSet::Subtree { vertices }, Point::Tree(pos)) => {
                let tree = match space {
                    Space::Tree(t) => t,
                    _ => unreachable!("validated pairing"),
                };
                Ok(match *pos {
                    TreePosition::Vertex(v) => vertices.contains(&v),
                    TreePosition::OnEdge { edge, .. } => {
                        let e = tree.edge(edge);
                        vertices.contains(&e.u) && vertices.contains(&e.v)
                    }
                })
            }
            (ConvexSet::Product(l, r), Point::Product(lp, rp)) => {
                let (ls, rs) = match space {
                    Space::Product(a, b) => (a, b),
                    _ => unreachable!("validated pairing"),
                };
                Ok(l.contains(ls, lp)? && r.contains(rs, rp)?)
            }
            _ => Err(Error::InvalidInput("set kind does not match point shape".into())),
        }
    }

    /// Metric projection: the nearest point of the set.
    pub fn project(&self, space: &Space, p: &Point) -> Result<Point> {
        space.check_point(p)?;
        match (self, p) {
            (ConvexSet::Box { lower, upper }, Point::Vector(v)) => Ok(Point::Vector(
                v.iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(x, (lo, hi))| x.max(*lo).min(*hi))
                    .collect(),
            )),
            (ConvexSet::Ball { center, radius }, Point::Vector(v)) => {
                let d2: f64 = v
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let d = d2.sqrt();
                if d <= *radius {
                    return Ok(p.clone());
                }
                let t = radius / d;
                Ok(Point::Vector(
                    v.iter().zip(center).map(|(x, c)| c + t * (x - c)).collect(),
                ))
            }
            (ConvexSet::GeodesicBall { center, radius }, Point::Vector(_)) => {
                // The nearest point of a geodesic ball lies on the radial
                // geodesic from the center: it meets the lower bound
                // d(x, z) >= d(x, c) - r for every z in the ball.
                let c = Point::Vector(center.clone());
                let d = space.distance(&c, p)?;
                if d <= *radius {
                    return Ok(p.clone());
                }
                space.geodesic_point(&c, p, radius / d)
            }
            (ConvexSet::Subtree { vertices }, Point::Tree(pos)) => {
                if self.contains(space, p)? {
                    return Ok(p.clone());
                }
                let tree = match space {
                    Space::Tree(t) => t,
                    _ => unreachable!("validated pairing"),
                };
                // The path from p enters the subtree through a unique gate
                // vertex, which is the nearest subtree vertex.
                let mut best = (f64::INFINITY, usize::MAX);
                for &v in vertices {
                    let d = tree.distance(pos, &TreePosition::Vertex(v));
                    if d < best.0 {
                        best = (d, v);
                    }
                }
                Ok(Point::Tree(TreePosition::Vertex(best.1)))
            }
            (ConvexSet::Product(l, r), Point::Product(lp, rp)) => {
                let (ls, rs) = match space {
                    Space::Product(a, b) => (a, b),
                    _ => unreachable!("validated pairing"),
                };
                Ok(Point::product(l.project(ls, lp)?, r.project(rs, rp)?))
            }
            _ => Err(Error::InvalidInput("set kind does not match point shape".into())),
        }
    }

    /// Draws a point of the set, roughly uniformly (Lebesgue on boxes and
    /// balls, length measure on subtrees). Used by search oracles; only
    /// coverage matters, not exact uniformity.
    pub fn sample<R: Rng>(&self, space: &Space, rng: &mut R) -> Result<Point> {
        match (self, space) {
            (ConvexSet::Box { lower, upper }, Space::Euclidean { .. }) => Ok(Point::Vector(
                lower
                    .iter()
                    .zip(upper)
                    .map(|(lo, hi)| if lo == hi { *lo } else { rng.gen_range(*lo..=*hi) })
                    .collect(),
            )),
            (ConvexSet::Ball { center, radius }, Space::Euclidean { .. }) => {
                if *radius == 0.0 {
                    return Ok(Point::Vector(center.clone()));
                }
                for _ in 0..10_000 {
                    let v: Vec<f64> = center
                        .iter()
                        .map(|c| rng.gen_range(c - radius..=c + radius))
                        .collect();
                    let d2: f64 = v
                        .iter()
                        .zip(center)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    if d2 <= radius * radius {
                        return Ok(Point::Vector(v));
                    }
                }
                Err(Error::NoFeasiblePoint("ball sampling failed to accept".into()))
            }
            (ConvexSet::GeodesicBall { center, radius }, Space::Poincare { .. }) => {
                let c = Point::Vector(center.clone());
                let center_norm = poincare::norm2(center).sqrt();
                // The farthest ball point from the origin sits on the ray
                // through the center, at hyperbolic distance d(0,c) + r.
                let reach_hyp = 2.0 * center_norm.atanh() + radius;
                let enc = (reach_hyp / 2.0).tanh().min(1.0 - 1e-12);
                for _ in 0..100_000 {
                    let v: Vec<f64> = center.iter().map(|_| rng.gen_range(-enc..=enc)).collect();
                    if poincare::norm2(&v) >= enc * enc {
                        continue;
                    }
                    let p = Point::Vector(v);
                    if space.distance(&c, &p)? <= *radius {
                        return Ok(p);
                    }
                }
                Err(Error::NoFeasiblePoint("geodesic ball sampling failed to accept".into()))
            }
            (ConvexSet::Subtree { vertices }, Space::Tree(tree)) => {
                let edges: Vec<usize> = (0..tree.edge_count())
                    .filter(|&e| {
                        let te = tree.edge(e);
                        vertices.contains(&te.u) && vertices.contains(&te.v)
                    })
                    .collect();
                if edges.is_empty() {
                    return Ok(Point::Tree(TreePosition::Vertex(vertices[0])));
                }
                let total: f64 = edges.iter().map(|&e| tree.edge(e).len).sum();
                let mut t = rng.gen_range(0.0..total);
                for &e in &edges {
                    let len = tree.edge(e).len;
                    if t <= len {
                        let pos = tree.canonical(&TreePosition::OnEdge { edge: e, offset: t })?;
                        return Ok(Point::Tree(pos));
                    }
                    t -= len;
                }
                Ok(Point::Tree(TreePosition::Vertex(vertices[0])))
            }
            (ConvexSet::Product(l, r), Space::Product(ls, rs)) => {
                Ok(Point::product(l.sample(ls, rng)?, r.sample(rs, rng)?))
            }
            _ => Err(Error::InvalidInput(format!(
                "set kind does not apply to a {} space",
                space.kind_name()
            ))),
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "prox step size gamma must be finite and > 0, got {gamma}"
        )));
    }
    Ok(())
}

/// A proper convex lower semicontinuous function with an exact prox.
///
/// Contract for implementors:
/// - `evaluate` returns a value in (-inf, +inf]; never NaN or -inf;
/// - `prox(gamma, x)` returns the unique global minimizer of
///   gamma * f(.) + d(x, .)^2 / 2 for every gamma > 0;
/// - `convexity_modulus` returns phi with
///   f(geo(x,y,l)) <= (1-l) f(x) + l f(y) - l(1-l) phi(d(x,y)) when such a
///   modulus exists.
pub trait ProxFunction: Send + Sync {
    fn name(&self) -> &'static str;

    fn evaluate(&self, space: &Space, x: &Point) -> Result<f64>;

    fn prox(&self, space: &Space, gamma: f64, x: &Point) -> Result<Point>;

    /// Uniform convexity modulus, if the function has one.
    fn convexity_modulus(&self) -> Option<fn(f64) -> f64> {
        None
    }

    /// Checks the function's own data against a space. Called once when a
    /// problem is assembled.
    fn validate(&self, space: &Space) -> Result<()>;
}

/// Indicator of a convex set: 0 inside, +inf outside. Its prox is the
/// metric projection, for every step size.
pub struct Indicator {
    pub set: ConvexSet,
}

pub fn indicator(set: ConvexSet) -> Indicator {
    Indicator { set }
}

impl ProxFunction for Indicator {
    fn name(&self) -> &'static str {
        "indicator"
    }

    fn evaluate(&self, space: &Space, x: &Point) -> Result<f64> {
        Ok(if self.set.contains(space, x)? { 0.0 } else { f64::INFINITY })
    }

    fn prox(&self, space: &Space, gamma: f64, x: &Point) -> Result<Point> {
        check_gamma(gamma)?;
        self.set.project(space, x)
    }

    fn validate(&self, space: &Space) -> Result<()> {
        self.set.validate(space)
    }
}

/// f(x) = d(x, anchor)^2 / 2. Uniformly convex with modulus t^2 / 2; the
/// prox slides toward the anchor by the fraction gamma / (1 + gamma).
pub struct HalfSquaredDistance {
    pub anchor: Point,
}

pub fn half_squared_distance(anchor: Point) -> HalfSquaredDistance {
    HalfSquaredDistance { anchor }
}

impl ProxFunction for HalfSquaredDistance {
    fn name(&self) -> &'static str {
        "half_squared_distance"
    }

    fn evaluate(&self, space: &Space, x: &Point) -> Result<f64> {
        Ok(0.5 * space.distance_squared(x, &self.anchor)?)
    }

    fn prox(&self, space: &Space, gamma: f64, x: &Point) -> Result<Point> {
        check_gamma(gamma)?;
        space.geodesic_point(x, &self.anchor, gamma / (1.0 + gamma))
    }

    fn convexity_modulus(&self) -> Option<fn(f64) -> f64> {
        Some(|t| 0.5 * t * t)
    }

    fn validate(&self, space: &Space) -> Result<()> {
        space.check_point(&self.anchor)
    }
}

/// f(x) = d(x, anchor). The prox moves toward the anchor by arc length
/// gamma, stopping at the anchor itself.
pub struct DistanceTo {
    pub anchor: Point,
}

pub fn distance_to_point(anchor: Point) -> DistanceTo {
    DistanceTo { anchor }
}

impl ProxFunction for DistanceTo {
    fn name(&self) -> &'static str {
        "distance_to_point"
    }

    fn evaluate(&self, space: &Space, x: &Point) -> Result<f64> {
        space.distance(x, &self.anchor)
    }

    fn prox(&self, space: &Space, gamma: f64, x: &Point) -> Result<Point> {
        check_gamma(gamma)?;
        let d = space.distance(x, &self.anchor)?;
        if d <= gamma {
            return Ok(self.anchor.clone());
        }
        space.geodesic_point(x, &self.anchor, gamma / d)
    }

    fn validate(&self, space: &Space) -> Result<()> {
        space.check_point(&self.anchor)
    }
}

/// The zero function; its prox is the identity.
pub struct Zero;

pub fn zero_function() -> Zero {
    Zero
}

impl ProxFunction for Zero {
    fn name(&self) -> &'static str {
        "zero"
    }

    fn evaluate(&self, _space: &Space, _x: &Point) -> Result<f64> {
        Ok(0.0)
    }

    fn prox(&self, _space: &Space, gamma: f64, x: &Point) -> Result<Point> {
        check_gamma(gamma)?;
        Ok(x.clone())
    }

    fn validate(&self, _space: &Space) -> Result<()> {
        Ok(())
    }
}

/// Residual of the prox variational characterization at a probe point `z`,
/// with y = prox(gamma, x):
///
/// gamma f(z) + d(x,z)^2/2 - gamma f(y) - d(x,y)^2/2 - d(y,z)^2/2.
///
/// Nonnegative for a correct prox; +inf when z is outside the domain.
pub fn prox_characterization_residual(
    space: &Space,
    f: &dyn ProxFunction,
    gamma: f64,
    x: &Point,
    z: &Point,
) -> Result<f64> {
    check_gamma(gamma)?;
    let y = f.prox(space, gamma, x)?;
    let fz = f.evaluate(space, z)?;
    if fz == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let fy = f.evaluate(space, &y)?;
    let xz = space.distance_squared(x, z)?;
    let xy = space.distance_squared(x, &y)?;
    let yz = space.distance_squared(&y, z)?;
    Ok(gamma * fz + 0.5 * xz - gamma * fy - 0.5 * xy - 0.5 * yz)
}

/// Residual of firm nonexpansiveness for the prox of `f` at two inputs,
/// with y_i = prox(gamma, x_i):
///
/// (d(x1,y2)^2 + d(x2,y1)^2 - d(x1,y1)^2 - d(x2,y2)^2) / 2 - d(y1,y2)^2.
///
/// Nonnegative for a correct prox; it implies d(y1,y2) <= d(x1,x2).
pub fn firm_nonexpansiveness_residual(
    space: &Space,
    f: &dyn ProxFunction,
    gamma: f64,
    x1: &Point,
    x2: &Point,
) -> Result<f64> {
    check_gamma(gamma)?;
    let y1 = f.prox(space, gamma, x1)?;
    let y2 = f.prox(space, gamma, x2)?;
    let a = space.distance_squared(x1, &y2)?;
    let b = space.distance_squared(x2, &y1)?;
    let c = space.distance_squared(x1, &y1)?;
    let d = space.distance_squared(x2, &y2)?;
    let e = space.distance_squared(&y1, &y2)?;
    Ok(0.5 * (a + b - c - d) - e)
}

/// Residual of the sharpened prox inequality for a uniformly convex `f`
/// with modulus phi, with y = prox(gamma, x):
///
/// gamma f(z) - gamma phi(d(y,z)) + (d(x,z)^2 - d(x,y)^2 - d(y,z)^2)/2
///   - gamma f(y).
///
/// Errors when the function exposes no modulus.
pub fn uniform_convexity_residual(
    space: &Space,
    f: &dyn ProxFunction,
    gamma: f64,
    x: &Point,
    z: &Point,
) -> Result<f64> {
    check_gamma(gamma)?;
    let phi = f
        .convexity_modulus()
        .ok_or_else(|| Error::InvalidInput(format!("{} exposes no convexity modulus", f.name())))?;
    let y = f.prox(space, gamma, x)?;
    let fz = f.evaluate(space, z)?;
    if fz == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let fy = f.evaluate(space, &y)?;
    let xz = space.distance_squared(x, z)?;
    let xy = space.distance_squared(x, &y)?;
    let yz = space.distance_squared(&y, z)?;
    Ok(gamma * fz - gamma * phi(yz.sqrt()) + 0.5 * (xz - xy - yz) - gamma * fy)
}
