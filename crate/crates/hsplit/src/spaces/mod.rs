//! Geodesic metric spaces of nonpositive curvature.
//!
//! Four concrete models share one interface: Euclidean space, the Poincaré
//! ball, finite weighted metric trees, and binary products of any two of
//! them. Each provides exact distances and constant-speed geodesics, which
//! is all the splitting iteration needs.
//!
//! The module also exposes residual forms of the curvature inequalities
//! (geodesic convexity of the squared distance and the four-point
//! quadrilateral inequality). A correct model keeps these residuals
//! nonnegative up to floating-point noise, so randomized suites can certify
//! an implementation without trusting it.

pub mod poincare;
pub mod tree;

use crate::error::{Error, Result};
pub use tree::{MetricTree, TreePosition};

/// Absolute part of the point-identity tolerance: points closer than
/// 1e-9 * (1 + distance scale) are treated as the same.
pub const POINT_EQ_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum Space {
    Euclidean { dim: usize },
    Poincare { dim: usize },
    Tree(MetricTree),
    Product(Box<Space>, Box<Space>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    /// Coordinates in Euclidean space or in the Poincaré ball.
    Vector(Vec<f64>),
    Tree(TreePosition),
    Product(Box<Point>, Box<Point>),
}

impl Point {
    pub fn vector(coords: impl Into<Vec<f64>>) -> Self {
        Point::Vector(coords.into())
    }

    pub fn product(left: Point, right: Point) -> Self {
        Point::Product(Box::new(left), Box::new(right))
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Point::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_tree(&self) -> Option<&TreePosition> {
        match self {
            Point::Tree(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_product(&self) -> Option<(&Point, &Point)> {
        match self {
            Point::Product(l, r) => Some((l, r)),
            _ => None,
        }
    }
}

impl Space {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("euclidean dimension must be positive".into()));
        }
        Ok(Space::Euclidean { dim })
    }

    pub fn poincare(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("poincare dimension must be positive".into()));
        }
        Ok(Space::Poincare { dim })
    }

    pub fn product(left: Space, right: Space) -> Self {
        Space::Product(Box::new(left), Box::new(right))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Space::Euclidean { .. } => "euclidean",
            Space::Poincare { .. } => "poincare",
            Space::Tree(_) => "tree",
            Space::Product(..) => "product",
        }
    }

    /// Validates membership. Tree positions must be canonical: interior
    /// offsets strictly between 0 and the edge length, endpoints stored as
    /// vertices (see [`MetricTree::canonical`]).
    pub fn check_point(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (Space::Euclidean { dim }, Point::Vector(v)) => {
                if v.len() != *dim {
                    return Err(Error::NotInSpace(format!(
                        "expected {dim} coordinates, got {}",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NotInSpace("non-finite coordinate".into()));
                }
                Ok(())
            }
            (Space::Poincare { dim }, Point::Vector(v)) => {
                if v.len() != *dim {
                    return Err(Error::NotInSpace(format!(
                        "expected {dim} coordinates, got {}",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NotInSpace("non-finite coordinate".into()));
                }
                let n2 = poincare::norm2(v);
                if n2 >= 1.0 {
                    return Err(Error::NotInSpace(format!(
                        "norm {} is not inside the open unit ball",
                        n2.sqrt()
                    )));
                }
                Ok(())
            }
            (Space::Tree(t), Point::Tree(pos)) => {
                match *pos {
                    TreePosition::Vertex(v) => {
                        if v >= t.vertex_count() {
                            return Err(Error::NotInSpace(format!("vertex id {v} out of range")));
                        }
                    }
                    TreePosition::OnEdge { edge, offset } => {
                        if edge >= t.edge_count() {
                            return Err(Error::NotInSpace(format!("edge id {edge} out of range")));
                        }
                        let len = t.edge(edge).len;
                        if !offset.is_finite() || offset <= 0.0 || offset >= len {
                            return Err(Error::NotInSpace(format!(
                                "offset {offset} is not interior to an edge of length {len} \
                                 (endpoints must be stored as vertices)"
                            )));
                        }
                    }
                }
                Ok(())
            }
            (Space::Product(ls, rs), Point::Product(lp, rp)) => {
                ls.check_point(lp)?;
                rs.check_point(rp)
            }
            _ => Err(Error::NotInSpace(format!(
                "point shape does not match a {} space",
                self.kind_name()
            ))),
        }
    }

    fn distance_squared_unchecked(&self, a: &Point, b: &Point) -> f64 {
        match (self, a, b) {
            (Space::Euclidean { .. }, Point::Vector(x), Point::Vector(y)) => {
                x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum()
            }
            (Space::Poincare { .. }, Point::Vector(x), Point::Vector(y)) => {
                let d = poincare::distance(x, y);
                d * d
            }
            (Space::Tree(t), Point::Tree(p), Point::Tree(q)) => {
                let d = t.distance(p, q);
                d * d
            }
            (Space::Product(ls, rs), Point::Product(la, ra), Point::Product(lb, rb)) => {
                ls.distance_squared_unchecked(la, lb) + rs.distance_squared_unchecked(ra, rb)
            }
            _ => unreachable!("points validated before dispatch"),
        }
    }

    fn geodesic_unchecked(&self, a: &Point, b: &Point, lambda: f64) -> Result<Point> {
        if lambda == 0.0 {
            return Ok(a.clone());
        }
        if lambda == 1.0 {
            return Ok(b.clone());
        }
        match (self, a, b) {
            (Space::Euclidean { .. }, Point::Vector(x), Point::Vector(y)) => Ok(Point::Vector(
                x.iter().zip(y).map(|(p, q)| p + lambda * (q - p)).collect(),
            )),
            (Space::Poincare { .. }, Point::Vector(x), Point::Vector(y)) => {
                Ok(Point::Vector(poincare::geodesic(x, y, lambda)))
            }
            (Space::Tree(t), Point::Tree(p), Point::Tree(q)) => {
                Ok(Point::Tree(t.geodesic(p, q, lambda)?))
            }
            (Space::Product(ls, rs), Point::Product(la, ra), Point::Product(lb, rb)) => {
                Ok(Point::product(
                    ls.geodesic_unchecked(la, lb, lambda)?,
                    rs.geodesic_unchecked(ra, rb, lambda)?,
                ))
            }
            _ => unreachable!("points validated before dispatch"),
        }
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        Ok(self.distance_squared(a, b)?.sqrt())
    }

    /// Squared distance computed without an intermediate square root where
    /// possible; on products this makes the decomposition
    /// d((a,b),(c,d))^2 = d(a,c)^2 + d(b,d)^2 bit-exact.
    pub fn distance_squared(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check_point(a)?;
        self.check_point(b)?;
        Ok(self.distance_squared_unchecked(a, b))
    }

    /// Constant-speed geodesic point: lambda = 0 gives `a` exactly, 1 gives
    /// `b` exactly, and d(geodesic(l1), geodesic(l2)) = |l1 - l2| d(a, b).
    pub fn geodesic_point(&self, a: &Point, b: &Point, lambda: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&lambda) || lambda.is_nan() {
            return Err(Error::InvalidInput(format!(
                "geodesic parameter {lambda} outside [0, 1]"
            )));
        }
        self.check_point(a)?;
        self.check_point(b)?;
        self.geodesic_unchecked(a, b, lambda)
    }

    /// Residual of the convexity inequality for the squared distance along
    /// a geodesic:
    ///
    /// (1-l) d(z,x)^2 + l d(z,y)^2 - l(1-l) d(x,y)^2 - d(z, geo(x,y,l))^2.
    ///
    /// Nonnegative in spaces of nonpositive curvature; identically zero in
    /// Euclidean space.
    pub fn geodesic_convexity_residual(
        &self,
        z: &Point,
        x: &Point,
        y: &Point,
        lambda: f64,
    ) -> Result<f64> {
        let m = self.geodesic_point(x, y, lambda)?;
        self.check_point(z)?;
        let zx = self.distance_squared_unchecked(z, x);
        let zy = self.distance_squared_unchecked(z, y);
        let xy = self.distance_squared_unchecked(x, y);
        let zm = self.distance_squared_unchecked(z, &m);
        Ok((1.0 - lambda) * zx + lambda * zy - lambda * (1.0 - lambda) * xy - zm)
    }

    /// Midpoint form of the convexity residual (lambda = 1/2).
    pub fn midpoint_residual(&self, z: &Point, x: &Point, y: &Point) -> Result<f64> {
        self.geodesic_convexity_residual(z, x, y, 0.5)
    }

    /// Residual of the four-point quadrilateral inequality:
    ///
    /// d(x,z)^2 + d(x,w)^2 + d(y,z)^2 + d(y,w)^2 - d(x,y)^2 - d(z,w)^2.
    ///
    /// Nonnegative in spaces of nonpositive curvature.
    pub fn quadrilateral_residual(&self, x: &Point, y: &Point, z: &Point, w: &Point) -> Result<f64> {
        for p in [x, y, z, w] {
            self.check_point(p)?;
        }
        let xz = self.distance_squared_unchecked(x, z);
        let xw = self.distance_squared_unchecked(x, w);
        let yz = self.distance_squared_unchecked(y, z);
        let yw = self.distance_squared_unchecked(y, w);
        let xy = self.distance_squared_unchecked(x, y);
        let zw = self.distance_squared_unchecked(z, w);
        Ok(xz + xw + yz + yw - xy - zw)
    }

    /// A fixed reference point, used to scale tolerances.
    pub fn base_point(&self) -> Point {
        match self {
            Space::Euclidean { dim } | Space::Poincare { dim } => Point::Vector(vec![0.0; *dim]),
            Space::Tree(_) => Point::Tree(TreePosition::Vertex(0)),
            Space::Product(l, r) => Point::product(l.base_point(), r.base_point()),
        }
    }

    /// Identity up to tolerance: d(a,b) <= 1e-9 * (1 + max distance from the
    /// base point).
    pub fn points_equal(&self, a: &Point, b: &Point) -> Result<bool> {
        let d = self.distance(a, b)?;
        let base = self.base_point();
        let scale = self
            .distance_squared_unchecked(a, &base)
            .max(self.distance_squared_unchecked(b, &base))
            .sqrt();
        Ok(d <= POINT_EQ_TOL * (1.0 + scale))
    }

    /// Number of columns a point occupies when flattened for serialization.
    pub fn flat_len(&self) -> usize {
        match self {
            Space::Euclidean { dim } | Space::Poincare { dim } => *dim,
            Space::Tree(_) => 3,
            Space::Product(l, r) => l.flat_len() + r.flat_len(),
        }
    }

    /// Flattens a point to numbers for trace output. Vectors emit their
    /// coordinates; a tree position emits (vertex id or -1, edge id or -1,
    /// offset); products concatenate.
    pub fn flatten_point(&self, p: &Point, out: &mut Vec<f64>) {
        match (self, p) {
            (Space::Euclidean { .. }, Point::Vector(v))
            | (Space::Poincare { .. }, Point::Vector(v)) => out.extend_from_slice(v),
            (Space::Tree(_), Point::Tree(pos)) => match *pos {
                TreePosition::Vertex(v) => out.extend_from_slice(&[v as f64, -1.0, 0.0]),
                TreePosition::OnEdge { edge, offset } => {
                    out.extend_from_slice(&[-1.0, edge as f64, offset])
                }
            },
            (Space::Product(ls, rs), Point::Product(lp, rp)) => {
                ls.flatten_point(lp, out);
                rs.flatten_point(rp, out);
            }
            _ => unreachable!("points validated before flattening"),
        }
    }
}
