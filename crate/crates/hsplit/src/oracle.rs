//! Derivative-free minimization used to produce reference solutions and to
//! cross-check closed-form prox maps. The searches only evaluate
//! objectives; no step in here trusts a prox implementation except the
//! final polish of `solve_reference`, whose output is re-certified by an
//! explicit fixed-point residual.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spaces::{Point, Space, TreePosition};
use crate::splitting::{SolutionPair, SplitProblem};

/// Where sampled auxiliary points and search grids live. Each variant
/// matches one space kind.
#[derive(Clone, Debug)]
pub enum SamplingRegion {
    /// Axis-aligned box in a Euclidean component.
    Box { center: Vec<f64>, half_widths: Vec<f64> },
    /// Euclidean-coordinate ball of radius `cap` < 1 in a Poincare disc
    /// component; keeps samples away from the ideal boundary.
    BallCap { cap: f64 },
    /// The whole metric tree.
    WholeTree,
    Product(Box<SamplingRegion>, Box<SamplingRegion>),
}

impl SamplingRegion {
    pub fn default_for(space: &Space) -> Self {
        match space {
            Space::Euclidean { dim } => SamplingRegion::Box {
                center: vec![0.0; *dim],
                half_widths: vec![10.0; *dim],
            },
            Space::Poincare { .. } => SamplingRegion::BallCap { cap: 0.9 },
            Space::Tree(_) => SamplingRegion::WholeTree,
            Space::Product(l, r) => SamplingRegion::Product(
                Box::new(Self::default_for(l)),
                Box::new(Self::default_for(r)),
            ),
        }
    }

    pub fn validate(&self, space: &Space) -> Result<()> {
        match (self, space) {
            (SamplingRegion::Box { center, half_widths }, Space::Euclidean { dim }) => {
                if center.len() != *dim || half_widths.len() != *dim {
                    return Err(Error::InvalidInput(format!(
                        "box region has {} axes for a {}-dimensional space",
                        center.len().max(half_widths.len()),
                        dim
                    )));
                }
                for (c, h) in center.iter().zip(half_widths) {
                    if !c.is_finite() || !h.is_finite() || *h <= 0.0 {
                        return Err(Error::InvalidInput(format!(
                            "box region needs finite centers and positive half-widths, got ({c}, {h})"
                        )));
                    }
                }
                Ok(())
            }
            (SamplingRegion::BallCap { cap }, Space::Poincare { .. }) => {
                if !(*cap > 0.0 && *cap < 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "ball cap must lie in (0, 1), got {cap}"
                    )));
                }
                Ok(())
            }
            (SamplingRegion::WholeTree, Space::Tree(_)) => Ok(()),
            (SamplingRegion::Product(rl, rr), Space::Product(sl, sr)) => {
                rl.validate(sl)?;
                rr.validate(sr)
            }
            _ => Err(Error::InvalidInput(format!(
                "sampling region does not match space kind {}",
                space.kind_name()
            ))),
        }
    }

    pub fn contains(&self, space: &Space, p: &Point) -> Result<bool> {
        space.check_point(p)?;
        match (self, p) {
            (SamplingRegion::Box { center, half_widths }, Point::Vector(v)) => Ok(v
                .iter()
                .zip(center)
                .zip(half_widths)
                .all(|((x, c), h)| (x - c).abs() <= *h)),
            (SamplingRegion::BallCap { cap }, Point::Vector(v)) => {
                Ok(v.iter().map(|x| x * x).sum::<f64>() <= cap * cap)
            }
            (SamplingRegion::WholeTree, Point::Tree(_)) => Ok(true),
            (SamplingRegion::Product(rl, rr), Point::Product(pl, pr)) => {
                let (sl, sr) = match space {
                    Space::Product(sl, sr) => (sl, sr),
                    _ => unreachable!("check_point verified the shapes"),
                };
                Ok(rl.contains(sl, pl)? && rr.contains(sr, pr)?)
            }
            _ => Err(Error::InvalidInput(
                "sampling region does not match the point's shape".into(),
            )),
        }
    }

    /// Strict containment with a relative safety margin, used to decide
    /// whether a computed minimizer might be clipped by the region.
    pub fn strictly_inside(&self, space: &Space, p: &Point) -> Result<bool> {
        space.check_point(p)?;
        match (self, p) {
            (SamplingRegion::Box { center, half_widths }, Point::Vector(v)) => Ok(v
                .iter()
                .zip(center)
                .zip(half_widths)
                .all(|((x, c), h)| (x - c).abs() < h * (1.0 - 1e-9))),
            (SamplingRegion::BallCap { cap }, Point::Vector(v)) => {
                let n2 = v.iter().map(|x| x * x).sum::<f64>();
                Ok(n2.sqrt() < cap * (1.0 - 1e-9))
            }
            (SamplingRegion::WholeTree, Point::Tree(_)) => Ok(true),
            (SamplingRegion::Product(rl, rr), Point::Product(pl, pr)) => {
                let (sl, sr) = match space {
                    Space::Product(sl, sr) => (sl, sr),
                    _ => unreachable!("check_point verified the shapes"),
                };
                Ok(rl.strictly_inside(sl, pl)? && rr.strictly_inside(sr, pr)?)
            }
            _ => Err(Error::InvalidInput(
                "sampling region does not match the point's shape".into(),
            )),
        }
    }

    pub fn sample<R: Rng>(&self, space: &Space, rng: &mut R) -> Result<Point> {
        match (self, space) {
            (SamplingRegion::Box { center, half_widths }, Space::Euclidean { .. }) => {
                let coords = center
                    .iter()
                    .zip(half_widths)
                    .map(|(c, h)| c + h * (2.0 * rng.gen::<f64>() - 1.0))
                    .collect::<Vec<_>>();
                Ok(Point::Vector(coords))
            }
            (SamplingRegion::BallCap { cap }, Space::Poincare { dim }) => {
                // Uniform in the coordinate ball: gaussian direction scaled
                // by U^(1/d). Works in any dimension without rejection.
                let mut z = Vec::with_capacity(*dim);
                while z.len() < *dim {
                    let u1: f64 = 1.0 - rng.gen::<f64>();
                    let u2: f64 = rng.gen();
                    let r = (-2.0 * u1.ln()).sqrt();
                    z.push(r * (std::f64::consts::TAU * u2).cos());
                    if z.len() < *dim {
                        z.push(r * (std::f64::consts::TAU * u2).sin());
                    }
                }
                let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Ok(Point::Vector(vec![0.0; *dim]));
                }
                let radius = cap * rng.gen::<f64>().powf(1.0 / *dim as f64);
                Ok(Point::Vector(z.into_iter().map(|x| x / norm * radius).collect()))
            }
            (SamplingRegion::WholeTree, Space::Tree(tree)) => {
                if tree.edge_count() == 0 {
                    return Ok(Point::Tree(TreePosition::Vertex(0)));
                }
                // Length-uniform over the union of edges.
                let mut t = rng.gen::<f64>() * tree.total_length();
                for idx in 0..tree.edge_count() {
                    let len = tree.edge(idx).len;
                    if t <= len || idx + 1 == tree.edge_count() {
                        let pos = TreePosition::OnEdge { edge: idx, offset: t.min(len) };
                        return Ok(Point::Tree(tree.canonical(&pos)?));
                    }
                    t -= len;
                }
                unreachable!("loop returns on the final edge")
            }
            (SamplingRegion::Product(rl, rr), Space::Product(sl, sr)) => Ok(Point::product(
                rl.sample(sl, rng)?,
                rr.sample(sr, rng)?,
            )),
            _ => Err(Error::InvalidInput(format!(
                "sampling region does not match space kind {}",
                space.kind_name()
            ))),
        }
    }

    /// Deterministic search grid with roughly `resolution` nodes per axis.
    pub fn grid(&self, space: &Space, resolution: usize) -> Result<Vec<Point>> {
        if resolution == 0 {
            return Err(Error::InvalidInput("grid resolution must be at least 1".into()));
        }
        let axis = |lo: f64, hi: f64| -> Vec<f64> {
            if resolution == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..resolution)
                    .map(|k| lo + (hi - lo) * k as f64 / (resolution - 1) as f64)
                    .collect()
            }
        };
        let cartesian = |axes: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            let mut out = vec![Vec::new()];
            for ax in axes {
                let mut next = Vec::with_capacity(out.len() * ax.len());
                for prefix in &out {
                    for &v in &ax {
                        let mut row = prefix.clone();
                        row.push(v);
                        next.push(row);
                    }
                }
                out = next;
            }
            out
        };
        match (self, space) {
            (SamplingRegion::Box { center, half_widths }, Space::Euclidean { .. }) => {
                let axes = center
                    .iter()
                    .zip(half_widths)
                    .map(|(c, h)| axis(c - h, c + h))
                    .collect::<Vec<_>>();
                Ok(cartesian(axes).into_iter().map(Point::Vector).collect())
            }
            (SamplingRegion::BallCap { cap }, Space::Poincare { dim }) => {
                let axes = vec![axis(-cap, *cap); *dim];
                let mut pts = cartesian(axes)
                    .into_iter()
                    .filter(|v| v.iter().map(|x| x * x).sum::<f64>() <= cap * cap)
                    .map(Point::Vector)
                    .collect::<Vec<_>>();
                if pts.is_empty() {
                    pts.push(Point::Vector(vec![0.0; *dim]));
                }
                Ok(pts)
            }
            (SamplingRegion::WholeTree, Space::Tree(tree)) => {
                let mut pts = (0..tree.vertex_count())
                    .map(|v| Point::Tree(TreePosition::Vertex(v)))
                    .collect::<Vec<_>>();
                for idx in 0..tree.edge_count() {
                    let len = tree.edge(idx).len;
                    for k in 1..=resolution {
                        let offset = len * k as f64 / (resolution + 1) as f64;
                        pts.push(Point::Tree(TreePosition::OnEdge { edge: idx, offset }));
                    }
                }
                Ok(pts)
            }
            (SamplingRegion::Product(rl, rr), Space::Product(sl, sr)) => {
                let left = rl.grid(sl, resolution)?;
                let right = rr.grid(sr, resolution)?;
                let mut out = Vec::with_capacity(left.len() * right.len());
                for l in &left {
                    for r in &right {
                        out.push(Point::product(l.clone(), r.clone()));
                    }
                }
                Ok(out)
            }
            _ => Err(Error::InvalidInput(format!(
                "sampling region does not match space kind {}",
                space.kind_name()
            ))),
        }
    }

    /// A strictly larger region of the same shape, for retrying searches
    /// whose minimizer landed on the boundary.
    pub fn enlarge(&self) -> SamplingRegion {
        match self {
            SamplingRegion::Box { center, half_widths } => SamplingRegion::Box {
                center: center.clone(),
                half_widths: half_widths.iter().map(|h| h * 1.5).collect(),
            },
            SamplingRegion::BallCap { cap } => {
                SamplingRegion::BallCap { cap: cap + 0.5 * (0.99 - cap) }
            }
            SamplingRegion::WholeTree => SamplingRegion::WholeTree,
            SamplingRegion::Product(l, r) => {
                SamplingRegion::Product(Box::new(l.enlarge()), Box::new(r.enlarge()))
            }
        }
    }
}

/// Minimizes `obj` along the geodesic from `a` to `b`. A 65-point scan
/// locates a finite bracket (so indicator-style objectives with infinite
/// plateaus are handled), then golden-section narrows it to `lambda_tol`.
/// Returns the best (lambda, point, value) seen across all evaluations.
pub fn golden_section_on_geodesic(
    space: &Space,
    obj: &mut dyn FnMut(&Point) -> Result<f64>,
    a: &Point,
    b: &Point,
    lambda_tol: f64,
) -> Result<(f64, Point, f64)> {
    if !(lambda_tol > 0.0 && lambda_tol < 1.0) {
        return Err(Error::InvalidInput(format!(
            "golden-section tolerance must lie in (0, 1), got {lambda_tol}"
        )));
    }
    let mut best: Option<(f64, f64)> = None;
    let mut eval = |lam: f64, best: &mut Option<(f64, f64)>| -> Result<f64> {
        let p = space.geodesic_point(a, b, lam)?;
        let v = obj(&p)?;
        if v.is_nan() {
            return Err(Error::InvalidInput(format!("objective returned NaN at lambda {lam}")));
        }
        if v.is_finite() && best.map_or(true, |(_, bv)| v < bv) {
            *best = Some((lam, v));
        }
        Ok(v)
    };

    const SCAN: usize = 65;
    for i in 0..SCAN {
        eval(i as f64 / (SCAN - 1) as f64, &mut best)?;
    }
    let (scan_best, _) = best.ok_or_else(|| {
        Error::NoMinimum("objective is infinite at every scanned point of the segment".into())
    })?;
    let step = 1.0 / (SCAN - 1) as f64;
    let mut lo = (scan_best - step).max(0.0);
    let mut hi = (scan_best + step).min(1.0);

    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - invphi * (hi - lo);
    let mut d = lo + invphi * (hi - lo);
    let mut fc = eval(c, &mut best)?;
    let mut fd = eval(d, &mut best)?;
    let mut rounds = 0;
    while hi - lo > lambda_tol && rounds < 300 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - invphi * (hi - lo);
            fc = eval(c, &mut best)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + invphi * (hi - lo);
            fd = eval(d, &mut best)?;
        }
        rounds += 1;
    }
    eval(0.5 * (lo + hi), &mut best)?;

    let (lam, val) = best.expect("a finite value was recorded above");
    Ok((lam, space.geodesic_point(a, b, lam)?, val))
}

/// Targets obtained by copying one product component of `q` into `inc`.
/// Moving one factor at a time restores per-factor line searches, which
/// full-space samples cannot provide near a corner of a product domain:
/// there the cone of jointly improving directions collapses while single
/// factors still improve linearly.
fn component_mixes(inc: &Point, q: &Point) -> Vec<Point> {
    let mut out = Vec::new();
    if let (Point::Product(al, ar), Point::Product(bl, br)) = (inc, q) {
        out.push(Point::product((**bl).clone(), (**ar).clone()));
        out.push(Point::product((**al).clone(), (**br).clone()));
        for m in component_mixes(al, bl) {
            out.push(Point::product(m, (**ar).clone()));
        }
        for m in component_mixes(ar, br) {
            out.push(Point::product((**al).clone(), m));
        }
    }
    out
}

/// Targets one trust radius away from `inc` along each coordinate axis of
/// every vector component, and toward every vertex of a tree component.
/// The probed segments deliberately overshoot any nearby constraint
/// boundary; the line search then lands on the constrained
/// one-dimensional minimum, which uniform samples approach only with
/// vanishing probability near a face of a box-like domain or an endpoint
/// of a feasible branch.
fn axis_probes(space: &Space, inc: &Point, r: f64, out: &mut Vec<Point>) {
    match (space, inc) {
        (Space::Euclidean { .. }, Point::Vector(v)) => {
            for i in 0..v.len() {
                for sgn in [1.0, -1.0] {
                    let mut m = v.clone();
                    m[i] += sgn * r;
                    out.push(Point::Vector(m));
                }
            }
        }
        (Space::Poincare { .. }, Point::Vector(v)) => {
            // Clip the coordinate offset so the target stays well inside
            // the unit ball.
            let n2: f64 = v.iter().map(|c| c * c).sum();
            for i in 0..v.len() {
                let rest = n2 - v[i] * v[i];
                let margin = 0.995f64 * 0.995 - rest;
                if margin <= 0.0 {
                    continue;
                }
                let reach = margin.sqrt();
                for sgn in [1.0, -1.0] {
                    let clipped = (v[i] + sgn * r).clamp(-reach, reach);
                    if clipped != v[i] {
                        let mut m = v.clone();
                        m[i] = clipped;
                        out.push(Point::Vector(m));
                    }
                }
            }
        }
        (Space::Tree(t), _) => {
            // Every direction out of a point eventually heads toward some
            // vertex, so vertex targets cover all branches at a junction.
            // The caller clips the searched segment to the trust radius.
            for v in 0..t.vertex_count() {
                let target = Point::Tree(crate::spaces::TreePosition::Vertex(v));
                if let Ok(d) = space.distance(inc, &target) {
                    if d > 0.0 {
                        out.push(target);
                    }
                }
            }
        }
        (Space::Product(sl, sr), Point::Product(pl, pr)) => {
            let mut side = Vec::new();
            axis_probes(sl, pl, r, &mut side);
            for m in side.drain(..) {
                out.push(Point::product(m, (**pr).clone()));
            }
            axis_probes(sr, pr, r, &mut side);
            for m in side.drain(..) {
                out.push(Point::product((**pl).clone(), m));
            }
        }
        _ => {}
    }
}

/// Multiscale probe descent: from `start`, repeatedly line-search toward
/// sampled auxiliary points (and their coordinate mixes with the
/// incumbent) within a shrinking trust radius, stopping once the radius
/// falls below `min_radius`. Deterministic for a fixed seed. The sampler
/// supplies candidate directions; passing a feasible-set sampler keeps
/// every probed segment inside the domain of an indicator term.
pub fn refine_minimize(
    space: &Space,
    obj: &mut dyn FnMut(&Point) -> Result<f64>,
    sample: &mut dyn FnMut(&mut ChaCha8Rng) -> Result<Point>,
    start: &Point,
    start_radius: f64,
    min_radius: f64,
    seed: u64,
) -> Result<(Point, f64)> {
    if min_radius.is_nan() || min_radius <= 0.0 || !min_radius.is_finite() {
        return Err(Error::InvalidInput(format!(
            "minimum trust radius must be finite and > 0, got {min_radius}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inc = start.clone();
    let mut val = obj(start)?;
    let mut radius = start_radius.max(min_radius);
    let floor = min_radius;
    let mut level = 0;
    while radius > floor && level < 400 {
        let mut moved = 0.0;
        let visit = |t: Point,
                         inc: &mut Point,
                         val: &mut f64,
                         moved: &mut f64,
                         obj: &mut dyn FnMut(&Point) -> Result<f64>|
         -> Result<()> {
            let dq = space.distance(inc, &t)?;
            if dq <= 0.0 {
                return Ok(());
            }
            let end = space.geodesic_point(inc, &t, (radius / dq).min(1.0))?;
            let (_, p, v) = golden_section_on_geodesic(space, obj, inc, &end, 0.05)?;
            if v < *val {
                *moved += space.distance(inc, &p)?;
                *inc = p;
                *val = v;
            }
            Ok(())
        };
        for _ in 0..8 {
            let q = sample(&mut rng)?;
            let mixes = component_mixes(&inc, &q);
            visit(q, &mut inc, &mut val, &mut moved, obj)?;
            for m in mixes {
                if space.check_point(&m).is_ok() {
                    visit(m, &mut inc, &mut val, &mut moved, obj)?;
                }
            }
        }
        let mut axes = Vec::new();
        axis_probes(space, &inc, radius, &mut axes);
        for t in axes {
            visit(t, &mut inc, &mut val, &mut moved, obj)?;
        }
        if moved < 0.3 * radius {
            radius *= 0.6;
        }
        level += 1;
    }
    Ok((inc, val))
}

/// Global grid scan over a region followed by probe-descent refinement.
/// Ties on the grid break toward the earliest point, so results are
/// deterministic. Errors with `NoFeasiblePoint` when the objective is
/// infinite on the whole grid.
pub fn grid_minimize(
    space: &Space,
    obj: &mut dyn FnMut(&Point) -> Result<f64>,
    region: &SamplingRegion,
    resolution: usize,
) -> Result<(Point, f64)> {
    if resolution < 2 {
        return Err(Error::InvalidInput(format!(
            "grid resolution must be at least 2, got {resolution}"
        )));
    }
    region.validate(space)?;
    let pts = region.grid(space, resolution)?;
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in pts.iter().enumerate() {
        let v = obj(p)?;
        if v.is_nan() {
            return Err(Error::InvalidInput("objective returned NaN on the grid".into()));
        }
        if best.map_or(true, |(_, bv)| v < bv) {
            best = Some((i, v));
        }
    }
    let (bi, bv) = best.expect("grids are never empty");
    if !bv.is_finite() {
        return Err(Error::NoFeasiblePoint(
            "objective is infinite at every grid point of the region".into(),
        ));
    }
    let mut radius: f64 = 0.0;
    for p in &pts {
        radius = radius.max(space.distance(&pts[bi], p)?);
    }
    if radius == 0.0 {
        radius = 1.0;
    }
    let start = pts[bi].clone();
    let mut sampler = |rng: &mut ChaCha8Rng| region.sample(space, rng);
    let floor = 1e-10 * (1.0 + radius);
    refine_minimize(space, obj, &mut sampler, &start, radius, floor, 0x517c_c1b7_2722_0a95)
}

/// Searches the product of `region` with itself for the minimizer of the
/// coupled objective, polishes the grid candidate with alternating exact
/// proxes until the pair stops moving, and certifies the outcome: the
/// polished value may not exceed the searched value, the fixed-point
/// residual must vanish, and the pair must sit strictly inside the search
/// region (else the region is enlarged and the search repeated).
pub fn solve_reference(
    problem: &SplitProblem,
    region: &SamplingRegion,
    resolution: usize,
) -> Result<SolutionPair> {
    let space = &problem.space;
    region.validate(space)?;
    let prod_space = Space::product(space.clone(), space.clone());
    let mut reg = SamplingRegion::Product(Box::new(region.clone()), Box::new(region.clone()));

    for attempt in 0..4 {
        let mut obj = |p: &Point| -> Result<f64> {
            let (l, r) = p
                .as_product()
                .ok_or_else(|| Error::InvalidInput("expected a product point".into()))?;
            problem.phi(l, r)
        };
        let searched = match grid_minimize(&prod_space, &mut obj, &reg, resolution) {
            Ok(found) => found,
            Err(Error::NoFeasiblePoint(_)) if attempt < 3 => {
                reg = reg.enlarge();
                continue;
            }
            Err(e) => return Err(e),
        };
        let (pair, v_grid) = searched;
        let (_, y0) = pair.as_product().expect("searched over the product space");

        let mut x = problem.f.prox(space, problem.gamma, y0)?;
        let mut y = problem.g.prox(space, problem.gamma, &x)?;
        let mut rounds = 0usize;
        loop {
            let x_new = problem.f.prox(space, problem.gamma, &y)?;
            let y_new = problem.g.prox(space, problem.gamma, &x_new)?;
            let step = space.distance(&x_new, &x)? + space.distance(&y_new, &y)?;
            x = x_new;
            y = y_new;
            if step < 1e-12 {
                break;
            }
            rounds += 1;
            if rounds >= 200_000 {
                return Err(Error::NoMinimum(
                    "alternating prox polish did not reach a fixed point".into(),
                ));
            }
        }

        let value = problem.phi(&x, &y)?;
        if value > v_grid + 1e-9 * (1.0 + v_grid.abs()) {
            return Err(Error::Inconsistency(format!(
                "polished value {value} exceeds the searched value {v_grid}"
            )));
        }
        let residual = space.distance(&x, &problem.f.prox(space, problem.gamma, &y)?)?
            + space.distance(&y, &problem.g.prox(space, problem.gamma, &x)?)?;
        if residual > 1e-8 {
            return Err(Error::Inconsistency(format!(
                "polished pair has fixed-point residual {residual:e}"
            )));
        }

        let joint = Point::product(x.clone(), y.clone());
        if reg.strictly_inside(&prod_space, &joint)? {
            return Ok(SolutionPair { x, y, value });
        }
        reg = reg.enlarge();
    }
    Err(Error::NoMinimum(
        "minimizer keeps escaping the search region after repeated enlargement".into(),
    ))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::functions::{half_squared_distance, indicator, ConvexSet};
    use crate::spaces::MetricTree;

    #[test]
    fn default_regions_match_spaces() {
        let e = Space::euclidean(3).unwrap();
        let r = SamplingRegion::default_for(&e);
        r.validate(&e).unwrap();
        let p = Space::poincare(2).unwrap();
        SamplingRegion::default_for(&p).validate(&p).unwrap();
        assert!(SamplingRegion::default_for(&p).validate(&e).is_err());
    }

    #[test]
    fn samples_stay_in_region_and_space() {
        let tree = MetricTree::new(
            &["O", "A", "B", "C"],
            &[("O", "A", 1.0), ("O", "B", 1.0), ("O", "C", 1.0)],
        )
        .unwrap();
        let space = Space::product(Space::poincare(2).unwrap(), Space::Tree(tree));
        let region = SamplingRegion::default_for(&space);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let p = region.sample(&space, &mut rng).unwrap();
            space.check_point(&p).unwrap();
            assert!(region.contains(&space, &p).unwrap());
        }
    }

    #[test]
    fn grids_cover_boxes_and_trees() {
        let e = Space::euclidean(2).unwrap();
        let region = SamplingRegion::Box { center: vec![0.0, 0.0], half_widths: vec![1.0, 2.0] };
        let grid = region.grid(&e, 5).unwrap();
        assert_eq!(grid.len(), 25);
        assert!(grid.contains(&Point::vector([0.0, 0.0])));
        assert!(grid.contains(&Point::vector([-1.0, -2.0])));

        let tree = MetricTree::new(&["A", "B"], &[("A", "B", 2.0)]).unwrap();
        let ts = Space::Tree(tree);
        let tgrid = SamplingRegion::WholeTree.grid(&ts, 3).unwrap();
        // 2 vertices plus 3 interior nodes.
        assert_eq!(tgrid.len(), 5);
        for p in &tgrid {
            ts.check_point(p).unwrap();
        }
    }

    #[test]
    fn golden_section_finds_a_quadratic_minimum() {
        let s = Space::euclidean(1).unwrap();
        let mut obj = |p: &Point| -> Result<f64> {
            let x = p.as_vector().unwrap()[0];
            Ok((x - 0.3) * (x - 0.3))
        };
        let (lam, p, v) = golden_section_on_geodesic(
            &s,
            &mut obj,
            &Point::vector([0.0]),
            &Point::vector([1.0]),
            1e-7,
        )
        .unwrap();
        assert!((lam - 0.3).abs() <= 1e-6);
        assert!((p.as_vector().unwrap()[0] - 0.3).abs() <= 1e-6);
        assert!(v <= 1e-12);
    }

    #[test]
    fn golden_section_handles_infinite_plateaus() {
        // Indicator of [0, 0.25] plus distance to 1: minimum at 0.25.
        let s = Space::euclidean(1).unwrap();
        let mut obj = |p: &Point| -> Result<f64> {
            let x = p.as_vector().unwrap()[0];
            if x > 0.25 {
                Ok(f64::INFINITY)
            } else {
                Ok((x - 1.0).abs())
            }
        };
        let (_, p, v) = golden_section_on_geodesic(
            &s,
            &mut obj,
            &Point::vector([0.0]),
            &Point::vector([1.0]),
            1e-7,
        )
        .unwrap();
        assert!((p.as_vector().unwrap()[0] - 0.25).abs() <= 1e-4);
        assert!((v - 0.75).abs() <= 1e-4);
    }

    #[test]
    fn golden_section_reports_fully_infinite_segments() {
        let s = Space::euclidean(1).unwrap();
        let mut obj = |_: &Point| -> Result<f64> { Ok(f64::INFINITY) };
        assert!(matches!(
            golden_section_on_geodesic(
                &s,
                &mut obj,
                &Point::vector([0.0]),
                &Point::vector([1.0]),
                1e-7
            ),
            Err(Error::NoMinimum(_))
        ));
    }

    #[test]
    fn grid_minimize_recovers_an_offset_minimum() {
        let s = Space::euclidean(2).unwrap();
        let region = SamplingRegion::default_for(&s);
        let mut obj = |p: &Point| -> Result<f64> {
            let v = p.as_vector().unwrap();
            Ok((v[0] - 1.25).powi(2) + 3.0 * (v[1] + 2.5).powi(2))
        };
        let (p, val) = grid_minimize(&s, &mut obj, &region, 9).unwrap();
        let v = p.as_vector().unwrap();
        assert!((v[0] - 1.25).abs() <= 1e-6, "got {v:?}");
        assert!((v[1] + 2.5).abs() <= 1e-6, "got {v:?}");
        assert!(val <= 1e-10);
    }

    #[test]
    fn grid_minimize_is_deterministic() {
        let s = Space::euclidean(2).unwrap();
        let region = SamplingRegion::default_for(&s);
        let run = || {
            let mut obj = |p: &Point| -> Result<f64> {
                let v = p.as_vector().unwrap();
                Ok((v[0] - 0.7).powi(2) + (v[1] - 0.1).powi(4))
            };
            grid_minimize(&s, &mut obj, &region, 9).unwrap()
        };
        let (p1, v1) = run();
        let (p2, v2) = run();
        assert_eq!(p1, p2);
        assert_eq!(v1.to_bits(), v2.to_bits());
    }

    #[test]
    fn grid_minimize_flags_infeasible_regions() {
        let s = Space::euclidean(1).unwrap();
        let region = SamplingRegion::Box { center: vec![0.0], half_widths: vec![1.0] };
        let mut obj = |_: &Point| -> Result<f64> { Ok(f64::INFINITY) };
        assert!(matches!(
            grid_minimize(&s, &mut obj, &region, 9),
            Err(Error::NoFeasiblePoint(_))
        ));
    }

    #[test]
    fn solve_reference_on_the_interval_gap() {
        // f indicator of x <= 0, g indicator of x >= 2: the optimal pair is
        // (0, 2) with value 2 at gamma = 1.
        let problem = SplitProblem::new(
            Space::euclidean(1).unwrap(),
            Arc::new(indicator(ConvexSet::Box { lower: vec![-50.0], upper: vec![0.0] })),
            Arc::new(indicator(ConvexSet::Box { lower: vec![2.0], upper: vec![50.0] })),
            1.0,
        )
        .unwrap();
        let region = SamplingRegion::Box { center: vec![0.0], half_widths: vec![10.0] };
        let sol = solve_reference(&problem, &region, 17).unwrap();
        assert!((sol.value - 2.0).abs() <= 1e-9, "value {}", sol.value);
        assert!((sol.x.as_vector().unwrap()[0]).abs() <= 1e-9);
        assert!((sol.y.as_vector().unwrap()[0] - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn solve_reference_quadratic_pair() {
        // f = d(., 4)^2/2, g = d(., 0)^2/2 on the line at gamma = 1: the
        // stationary pair solves x = (4 + y)/2, y = x/2, so x = 8/3, y = 4/3.
        let problem = SplitProblem::new(
            Space::euclidean(1).unwrap(),
            Arc::new(half_squared_distance(Point::vector([4.0]))),
            Arc::new(half_squared_distance(Point::vector([0.0]))),
            1.0,
        )
        .unwrap();
        let region = SamplingRegion::Box { center: vec![0.0], half_widths: vec![10.0] };
        let sol = solve_reference(&problem, &region, 9).unwrap();
        let x = sol.x.as_vector().unwrap()[0];
        let y = sol.y.as_vector().unwrap()[0];
        assert!((x - 8.0 / 3.0).abs() <= 1e-9, "x = {x}");
        assert!((y - 4.0 / 3.0).abs() <= 1e-9, "y = {y}");
        // Value at the pair: f + g + gap^2 / 2.
        let expect = 0.5 * (4.0 - x) * (4.0 - x) + 0.5 * y * y + 0.5 * (x - y) * (x - y);
        assert!((sol.value - expect).abs() <= 1e-12);
    }
}
