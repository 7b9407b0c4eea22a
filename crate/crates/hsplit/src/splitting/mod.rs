//! The error-tolerant backward-backward iteration.
//!
//! One step of the scheme at the current point x_n:
//!
//!   y_n     = Prox_{gamma g}(x_n)   up to an injected error of size delta_n,
//!   x_{n+1} = Prox_{gamma f}(y_n)   up to an injected error of size eps_n.
//!
//! The trace additionally carries the exact prox targets and the exactly
//! recomputed pair (Prox_{gamma f}(Prox_{gamma g}(x_n)), Prox_{gamma g}(x_n)),
//! whose objective value converges to the infimum even on perturbed runs.
//! That costs one extra prox pair per iteration and makes every convergence
//! diagnostic checkable after the fact.

pub mod diagnostics;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::functions::ProxFunction;
use crate::oracle::SamplingRegion;
use crate::spaces::{Point, Space};

#[derive(Clone)]
pub struct SplitProblem {
    pub space: Space,
    pub f: Arc<dyn ProxFunction>,
    pub g: Arc<dyn ProxFunction>,
    pub gamma: f64,
}

impl SplitProblem {
    pub fn new(
        space: Space,
        f: Arc<dyn ProxFunction>,
        g: Arc<dyn ProxFunction>,
        gamma: f64,
    ) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "coupling constant gamma must be finite and > 0, got {gamma}"
            )));
        }
        f.validate(&space)?;
        g.validate(&space)?;
        Ok(Self { space, f, g, gamma })
    }

    /// The coupled objective f(x) + g(y) + d(x,y)^2 / (2 gamma).
    pub fn phi(&self, x: &Point, y: &Point) -> Result<f64> {
        let fx = self.f.evaluate(&self.space, x)?;
        let gy = self.g.evaluate(&self.space, y)?;
        let d2 = self.space.distance_squared(x, y)?;
        Ok(fx + gy + d2 / (2.0 * self.gamma))
    }
}

/// The coupled objective as a free function.
pub fn phi(problem: &SplitProblem, x: &Point, y: &Point) -> Result<f64> {
    problem.phi(x, y)
}

/// One exact iteration: (Prox_{gamma g}(x), Prox_{gamma f}(Prox_{gamma g}(x))).
pub fn exact_step(problem: &SplitProblem, x: &Point) -> Result<(Point, Point)> {
    let y = problem.g.prox(&problem.space, problem.gamma, x)?;
    let x_next = problem.f.prox(&problem.space, problem.gamma, &y)?;
    Ok((y, x_next))
}

#[derive(Clone, Debug)]
pub enum ScheduleKind {
    /// No injected errors.
    None,
    /// delta_n = eps_n = c / (n+1)^2; summable for every c >= 0.
    InverseSquare { c: f64 },
    /// Explicit per-iteration magnitudes. Runs longer than the list repeat
    /// the final entry, so the schedule is summable exactly when that final
    /// entry is zero.
    Custom { pairs: Vec<(f64, f64)> },
}

#[derive(Clone, Debug)]
pub struct ErrorSchedule {
    pub kind: ScheduleKind,
    /// Seed for the perturbation directions.
    pub seed: u64,
}

impl ErrorSchedule {
    pub fn none() -> Self {
        Self { kind: ScheduleKind::None, seed: 0 }
    }

    pub fn inverse_square(c: f64, seed: u64) -> Result<Self> {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::InvalidInput(format!(
                "inverse-square error constant must be finite and >= 0, got {c}"
            )));
        }
        Ok(Self { kind: ScheduleKind::InverseSquare { c }, seed })
    }

    pub fn custom(pairs: Vec<(f64, f64)>, seed: u64) -> Result<Self> {
        for &(d, e) in &pairs {
            if !d.is_finite() || !e.is_finite() || d < 0.0 || e < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "custom error entries must be finite and >= 0, got ({d}, {e})"
                )));
            }
        }
        Ok(Self { kind: ScheduleKind::Custom { pairs }, seed })
    }

    /// Scheduled (delta_n, eps_n) for iteration n.
    pub fn magnitudes(&self, n: usize) -> (f64, f64) {
        match &self.kind {
            ScheduleKind::None => (0.0, 0.0),
            ScheduleKind::InverseSquare { c } => {
                let m = c / (((n + 1) * (n + 1)) as f64);
                (m, m)
            }
            ScheduleKind::Custom { pairs } => {
                if pairs.is_empty() {
                    (0.0, 0.0)
                } else {
                    pairs[n.min(pairs.len() - 1)]
                }
            }
        }
    }

    /// Whether the infinite extension of this schedule has a finite sum.
    pub fn is_summable(&self) -> bool {
        match &self.kind {
            ScheduleKind::None | ScheduleKind::InverseSquare { .. } => true,
            ScheduleKind::Custom { pairs } => {
                pairs.last().map_or(true, |&(d, e)| d == 0.0 && e == 0.0)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct StoppingRule {
    pub max_iterations: usize,
    /// Stop once d(x_{n+1}, x_n) + d(y_n, y_{n-1}) drops below this; zero
    /// disables the rule.
    pub displacement_tol: f64,
    /// Stop once the step objective is within `tol` of `target`.
    pub objective_target: Option<(f64, f64)>,
    /// A step objective below this flags the run as unbounded and stops it.
    pub divergence_floor: f64,
}

impl StoppingRule {
    pub fn max_iterations(n: usize) -> Self {
        Self {
            max_iterations: n,
            displacement_tol: 0.0,
            objective_target: None,
            divergence_floor: -1e18,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
        }
        if !self.displacement_tol.is_finite() || self.displacement_tol < 0.0 {
            return Err(Error::InvalidInput(format!(
                "displacement tolerance must be finite and >= 0, got {}",
                self.displacement_tol
            )));
        }
        if let Some((target, tol)) = self.objective_target {
            if !target.is_finite() || !tol.is_finite() || tol < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "objective stopping target ({target}, {tol}) must be finite with tol >= 0"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopCause {
    MaxIterations,
    Displacement,
    Objective,
    Unbounded,
}

/// A candidate saddle pair with its objective value, used as the reference
/// for distance-to-solution diagnostics.
#[derive(Clone, Debug)]
pub struct SolutionPair {
    pub x: Point,
    pub y: Point,
    pub value: f64,
}

/// Everything a run records. With N completed iterations, `xs` holds
/// x_0..x_N and all per-iteration vectors have length N (disp_y has N-1).
#[derive(Clone, Debug)]
pub struct IterateTrace {
    pub xs: Vec<Point>,
    pub ys: Vec<Point>,
    /// Exact g-prox targets P_n = Prox_{gamma g}(x_n).
    pub prox_g_of_x: Vec<Point>,
    /// Exact f-prox targets Q_n = Prox_{gamma f}(y_n).
    pub prox_f_of_y: Vec<Point>,
    /// Exactly recomputed next iterates Prox_{gamma f}(P_n).
    pub x_tilde: Vec<Point>,
    /// Mirror targets Prox_{gamma g}(Q_n).
    pub y_tilde: Vec<Point>,
    pub phi_xy: Vec<f64>,
    pub phi_xnext_y: Vec<f64>,
    /// phi(x_tilde[n], prox_g_of_x[n]).
    pub phi_exact_pair: Vec<f64>,
    /// phi(prox_f_of_y[n], y_tilde[n]).
    pub phi_exact_pair_mirror: Vec<f64>,
    pub disp_x: Vec<f64>,
    pub disp_y: Vec<f64>,
    /// Realized error magnitudes (after clipping).
    pub delta: Vec<f64>,
    pub eps: Vec<f64>,
    pub dist_x_ref: Option<Vec<f64>>,
    pub dist_y_ref: Option<Vec<f64>>,
    pub error_free: bool,
    /// True when the configured schedule is not summable; convergence
    /// guarantees are void although the run still executes.
    pub guarantees_void: bool,
    pub stop_cause: StopCause,
}

impl IterateTrace {
    pub fn iterations(&self) -> usize {
        self.ys.len()
    }
}

/// Moves `target` toward a uniformly sampled auxiliary point of the space's
/// default sampling region, by arc length min(magnitude, distance to that
/// point). A zero magnitude returns the target unchanged (bit for bit) and
/// consumes no randomness.
pub fn perturb<R: Rng>(
    space: &Space,
    target: &Point,
    magnitude: f64,
    rng: &mut R,
) -> Result<Point> {
    if !magnitude.is_finite() || magnitude < 0.0 {
        return Err(Error::InvalidInput(format!(
            "perturbation magnitude must be finite and >= 0, got {magnitude}"
        )));
    }
    space.check_point(target)?;
    if magnitude == 0.0 {
        return Ok(target.clone());
    }
    let region = SamplingRegion::default_for(space);
    let q = region.sample(space, rng)?;
    let reach = space.distance(target, &q)?;
    if reach <= 0.0 {
        return Ok(target.clone());
    }
    let lambda = (magnitude / reach).min(1.0);
    space.geodesic_point(target, &q, lambda)
}

/// Runs the iteration from `x0` until the stopping rule fires.
pub fn run(
    problem: &SplitProblem,
    x0: &Point,
    schedule: &ErrorSchedule,
    stop: &StoppingRule,
    reference: Option<&SolutionPair>,
) -> Result<IterateTrace> {
    let space = &problem.space;
    space.check_point(x0)?;
    stop.validate()?;
    if let Some(r) = reference {
        space.check_point(&r.x)?;
        space.check_point(&r.y)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let n_max = stop.max_iterations;
    let dist0 = match reference {
        Some(r) => Some(space.distance(x0, &r.x)?),
        None => None,
    };

    let mut trace = IterateTrace {
        xs: vec![x0.clone()],
        ys: Vec::new(),
        prox_g_of_x: Vec::new(),
        prox_f_of_y: Vec::new(),
        x_tilde: Vec::new(),
        y_tilde: Vec::new(),
        phi_xy: Vec::new(),
        phi_xnext_y: Vec::new(),
        phi_exact_pair: Vec::new(),
        phi_exact_pair_mirror: Vec::new(),
        disp_x: Vec::new(),
        disp_y: Vec::new(),
        delta: Vec::new(),
        eps: Vec::new(),
        dist_x_ref: dist0.map(|d| vec![d]),
        dist_y_ref: reference.map(|_| Vec::new()),
        error_free: true,
        guarantees_void: !schedule.is_summable(),
        stop_cause: StopCause::MaxIterations,
    };

    for n in 0..n_max {
        let x_n = trace.xs[n].clone();
        let (delta_mag, eps_mag) = schedule.magnitudes(n);

        let p_n = problem.g.prox(space, problem.gamma, &x_n)?;
        let y_n = perturb(space, &p_n, delta_mag, &mut rng)?;
        let delta_real = space.distance(&y_n, &p_n)?;

        let q_n = problem.f.prox(space, problem.gamma, &y_n)?;
        let x_next = perturb(space, &q_n, eps_mag, &mut rng)?;
        let eps_real = space.distance(&x_next, &q_n)?;

        let x_tilde = problem.f.prox(space, problem.gamma, &p_n)?;
        let y_tilde = problem.g.prox(space, problem.gamma, &q_n)?;

        trace.phi_xy.push(problem.phi(&x_n, &y_n)?);
        let phi_step = problem.phi(&x_next, &y_n)?;
        trace.phi_xnext_y.push(phi_step);
        trace.phi_exact_pair.push(problem.phi(&x_tilde, &p_n)?);
        trace.phi_exact_pair_mirror.push(problem.phi(&q_n, &y_tilde)?);
        trace.disp_x.push(space.distance(&x_next, &x_n)?);
        if n >= 1 {
            trace.disp_y.push(space.distance(&y_n, &trace.ys[n - 1])?);
        }
        if delta_real > 0.0 || eps_real > 0.0 {
            trace.error_free = false;
        }
        trace.delta.push(delta_real);
        trace.eps.push(eps_real);
        if let (Some(r), Some(dx), Some(dy)) =
            (reference, trace.dist_x_ref.as_mut(), trace.dist_y_ref.as_mut())
        {
            dx.push(space.distance(&x_next, &r.x)?);
            dy.push(space.distance(&y_n, &r.y)?);
        }
        trace.ys.push(y_n);
        trace.prox_g_of_x.push(p_n);
        trace.prox_f_of_y.push(q_n);
        trace.x_tilde.push(x_tilde);
        trace.y_tilde.push(y_tilde);
        trace.xs.push(x_next);

        if phi_step < stop.divergence_floor {
            trace.stop_cause = StopCause::Unbounded;
            break;
        }
        if let Some((target, tol)) = stop.objective_target {
            if (phi_step - target).abs() <= tol {
                trace.stop_cause = StopCause::Objective;
                break;
            }
        }
        if stop.displacement_tol > 0.0 && n >= 1 {
            let move_now = trace.disp_x[n] + trace.disp_y[n - 1];
            if move_now < stop.displacement_tol {
                trace.stop_cause = StopCause::Displacement;
                break;
            }
        }
    }

    Ok(trace)
}
