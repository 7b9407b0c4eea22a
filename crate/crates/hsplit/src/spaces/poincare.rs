//! Poincaré ball model of hyperbolic space at curvature -1.
//!
//! Points are vectors of Euclidean norm strictly below one. Distance has a
//! closed form in the chord length, and geodesics are computed through
//! Möbius addition, which keeps the constant-speed property exact.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Möbius addition on the open unit ball. The denominator is bounded below
/// by (1 - |a||b|)^2 > 0, so the operation is well defined for interior points.
pub fn mobius_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let ab = dot(a, b);
    let na2 = norm2(a);
    let nb2 = norm2(b);
    let denom = 1.0 + 2.0 * ab + na2 * nb2;
    let ca = (1.0 + 2.0 * ab + nb2) / denom;
    let cb = (1.0 - na2) / denom;
    a.iter().zip(b).map(|(x, y)| ca * x + cb * y).collect()
}

/// Hyperbolic distance. Evaluated as ln1p of the arcosh argument rewritten
/// so that nearby points lose no precision.
pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    let diff2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if diff2 == 0.0 {
        return 0.0;
    }
    let u = diff2 / ((1.0 - norm2(x)) * (1.0 - norm2(y)));
    (2.0 * u + 2.0 * (u * (1.0 + u)).sqrt()).ln_1p()
}

/// Constant-speed geodesic from `x` (lambda = 0) to `y` (lambda = 1).
/// Computed as x (+) scale(lambda, (-x) (+) y) in Möbius arithmetic.
pub fn geodesic(x: &[f64], y: &[f64], lambda: f64) -> Vec<f64> {
    if lambda == 0.0 {
        return x.to_vec();
    }
    if lambda == 1.0 {
        return y.to_vec();
    }
    let neg_x: Vec<f64> = x.iter().map(|v| -v).collect();
    let u = mobius_add(&neg_x, y);
    let r = norm2(&u).sqrt();
    if r < 1e-15 {
        return x.to_vec();
    }
    let s = r.atanh();
    let scale = (lambda * s).tanh() / r;
    let w: Vec<f64> = u.iter().map(|v| scale * v).collect();
    mobius_add(x, &w)
}

/// Conformal factor of the metric at `x`; the local length element is
/// `conformal_factor(x) * |dx|`.
pub fn conformal_factor(x: &[f64]) -> f64 {
    2.0 / (1.0 - norm2(x))
}
