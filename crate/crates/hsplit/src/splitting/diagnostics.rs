//! Post-hoc certificates for a recorded run.
//!
//! Every check replays inequalities that the iteration is guaranteed to
//! satisfy and reports the worst margin it saw. Margins are RHS - LHS of
//! the guaranteed inequality, so a healthy run keeps them nonnegative up
//! to the stated floating-point slack. Checks that need hypotheses the run
//! does not satisfy (exact proxes, a summable schedule, a convexity
//! modulus) return `NotApplicable` instead of guessing.

use crate::error::{Error, Result};
use crate::spaces::Point;

use super::{IterateTrace, SolutionPair, SplitProblem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: &'static str,
    pub verdict: Verdict,
    /// Iteration index of the first violated inequality, if any.
    pub first_violation: Option<usize>,
    /// Smallest RHS - LHS margin observed across all inequalities.
    pub worst_margin: f64,
    pub detail: String,
}

impl CheckReport {
    fn pass(name: &'static str) -> Self {
        Self {
            name,
            verdict: Verdict::Pass,
            first_violation: None,
            worst_margin: f64::INFINITY,
            detail: String::new(),
        }
    }

    fn not_applicable(name: &'static str, why: &str) -> Self {
        Self {
            name,
            verdict: Verdict::NotApplicable,
            first_violation: None,
            worst_margin: f64::INFINITY,
            detail: why.to_string(),
        }
    }

    /// Records one inequality with margin = RHS - LHS; fails the report if
    /// the margin dips below -tol.
    fn observe(&mut self, n: usize, margin: f64, tol: f64, what: &str) {
        if margin < self.worst_margin {
            self.worst_margin = margin;
        }
        if margin < -tol && self.verdict == Verdict::Pass {
            self.verdict = Verdict::Fail;
            self.first_violation = Some(n);
            self.detail = format!("{what} violated at n = {n}: margin {margin:e} < -{tol:e}");
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

fn chain_tol(scale: f64) -> f64 {
    1e-10 * (1.0 + scale.abs())
}

/// Confirms the residual fixed-point identity of a candidate solution pair
/// and returns that residual. Rejects candidates that are not fixed points
/// to within 1e-8.
fn validate_reference(problem: &SplitProblem, reference: &SolutionPair) -> Result<f64> {
    let s = &problem.space;
    s.check_point(&reference.x)?;
    s.check_point(&reference.y)?;
    let fx = problem.f.prox(s, problem.gamma, &reference.y)?;
    let gy = problem.g.prox(s, problem.gamma, &reference.x)?;
    let residual = s.distance(&reference.x, &fx)? + s.distance(&reference.y, &gy)?;
    if residual.is_nan() || residual > 1e-8 {
        return Err(Error::InvalidReference(format!(
            "candidate solution pair has fixed-point residual {residual:e} > 1e-8"
        )));
    }
    Ok(residual)
}

/// On exact runs the step objective phi(x_{n+1}, y_n) never increases, and
/// each prox application can only lower the value it optimizes.
pub fn check_monotone_decrease(trace: &IterateTrace) -> CheckReport {
    let name = "monotone_decrease";
    if !trace.error_free {
        return CheckReport::not_applicable(name, "run injected prox errors");
    }
    let mut rep = CheckReport::pass(name);
    let n_iters = trace.iterations();
    let tol2 = |a: f64, b: f64| {
        let mut s: f64 = 0.0;
        for v in [a, b] {
            if v.is_finite() {
                s = s.max(v.abs());
            }
        }
        chain_tol(s)
    };
    for n in 0..n_iters {
        rep.observe(
            n,
            trace.phi_xy[n] - trace.phi_xnext_y[n],
            tol2(trace.phi_xy[n], trace.phi_xnext_y[n]),
            "phi(x_{n+1}, y_n) <= phi(x_n, y_n)",
        );
        if n + 1 < n_iters {
            rep.observe(
                n,
                trace.phi_xnext_y[n] - trace.phi_xy[n + 1],
                tol2(trace.phi_xnext_y[n], trace.phi_xy[n + 1]),
                "phi(x_{n+1}, y_{n+1}) <= phi(x_{n+1}, y_n)",
            );
            rep.observe(
                n,
                trace.phi_xnext_y[n] - trace.phi_xnext_y[n + 1],
                tol2(trace.phi_xnext_y[n], trace.phi_xnext_y[n + 1]),
                "step objective nonincreasing",
            );
        }
    }
    rep
}

/// Squared displacements are controlled by the drop of the exactly
/// recomputed objective plus the squared error budget:
///
///   sum_{n>=1} d(x_{n+1}, x_n)^2
///     <= 9 sum_n (delta_n + eps_n)^2 + 6 gamma (V_0 - V_{N-1}),
///
/// where V_n is the exact-pair value. Exact runs also satisfy the tighter
/// factor-2-gamma form against the step objective, and y displacements are
/// pointwise dominated by x displacements plus adjacent errors.
pub fn check_displacement_summability(problem: &SplitProblem, trace: &IterateTrace) -> CheckReport {
    let name = "displacement_summability";
    let mut rep = CheckReport::pass(name);
    let n_iters = trace.iterations();

    let sum_x: f64 = trace.disp_x.iter().skip(1).map(|d| d * d).sum();
    let err_budget: f64 = trace
        .delta
        .iter()
        .zip(&trace.eps)
        .map(|(&d, &e)| (d + e) * (d + e))
        .sum();
    let drop = trace.phi_exact_pair[0] - trace.phi_exact_pair[n_iters - 1];
    let bound = 9.0 * err_budget + 6.0 * problem.gamma * drop;
    let tol = chain_tol(sum_x.abs() + bound.abs());
    rep.observe(1, bound - sum_x, tol, "squared-displacement budget");

    if trace.error_free {
        let drop_exact = trace.phi_xnext_y[0] - trace.phi_xnext_y[n_iters - 1];
        if drop_exact.is_finite() {
            let tight = 2.0 * problem.gamma * drop_exact;
            let tol = chain_tol(sum_x.abs() + tight.abs());
            rep.observe(1, tight - sum_x, tol, "exact squared-displacement budget");
        }
    }

    for n in 0..trace.disp_y.len() {
        let rhs = trace.delta[n + 1] + trace.delta[n] + trace.disp_x[n];
        let tol = chain_tol(rhs + trace.disp_y[n]);
        rep.observe(n, rhs - trace.disp_y[n], tol, "y-displacement domination");
    }

    if trace.guarantees_void && rep.verdict == Verdict::Pass {
        rep.detail = "finite-horizon budget holds; schedule not summable, so no asymptotic claim"
            .to_string();
    }
    rep
}

/// Exact runs never move away from any solution pair:
/// d(x_{n+1}, xbar) <= d(y_n, ybar) <= d(x_n, xbar).
pub fn check_fejer(
    problem: &SplitProblem,
    trace: &IterateTrace,
    reference: &SolutionPair,
) -> Result<CheckReport> {
    let name = "fejer_monotonicity";
    let residual = validate_reference(problem, reference)?;
    if !trace.error_free {
        return Ok(CheckReport::not_applicable(name, "run injected prox errors"));
    }
    let s = &problem.space;
    let mut rep = CheckReport::pass(name);
    let mut dx_prev = s.distance(&trace.xs[0], &reference.x)?;
    for n in 0..trace.iterations() {
        let dy = s.distance(&trace.ys[n], &reference.y)?;
        let dx_next = s.distance(&trace.xs[n + 1], &reference.x)?;
        let tol = chain_tol(dx_prev) + residual;
        rep.observe(n, dx_prev - dy, tol, "d(y_n, ybar) <= d(x_n, xbar)");
        rep.observe(n, dy - dx_next, tol, "d(x_{n+1}, xbar) <= d(y_n, ybar)");
        dx_prev = dx_next;
    }
    Ok(rep)
}

/// Perturbed runs drift from a solution pair by at most the injected error:
/// d(x_{n+1}, xbar) <= d(x_n, xbar) + delta_n + eps_n.
pub fn check_quasi_fejer(
    problem: &SplitProblem,
    trace: &IterateTrace,
    reference: &SolutionPair,
) -> Result<CheckReport> {
    let name = "quasi_fejer";
    let residual = validate_reference(problem, reference)?;
    let s = &problem.space;
    let mut rep = CheckReport::pass(name);
    let mut dx_prev = s.distance(&trace.xs[0], &reference.x)?;
    for n in 0..trace.iterations() {
        let dx_next = s.distance(&trace.xs[n + 1], &reference.x)?;
        let allowed = dx_prev + trace.delta[n] + trace.eps[n];
        let tol = chain_tol(allowed) + residual;
        rep.observe(n, allowed - dx_next, tol, "error-buffered distance decrease");
        dx_prev = dx_next;
    }
    Ok(rep)
}

/// The exactly recomputed pair values converge to the infimum. The check
/// verifies the tail mean of both the value sequence and its f/g-mirrored
/// companion against the expected infimum, and when a solution pair is
/// supplied it also verifies the per-iteration sandwich
///
///   l <= V_n <= l + (d(x_n, xbar)^2 - d(xt_{n+1}, xbar)^2) / (2 gamma)
///
/// together with its mirrored counterpart.
pub fn check_value_convergence(
    problem: &SplitProblem,
    trace: &IterateTrace,
    expected_value: f64,
    value_tol: f64,
    reference: Option<&SolutionPair>,
) -> Result<CheckReport> {
    let name = "value_convergence";
    if !value_tol.is_finite() || value_tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "value tolerance must be finite and > 0, got {value_tol}"
        )));
    }
    if expected_value == f64::NEG_INFINITY {
        return Ok(CheckReport::not_applicable(name, "objective is unbounded below"));
    }
    if !expected_value.is_finite() {
        return Err(Error::InvalidInput(format!(
            "expected objective value must be finite, got {expected_value}"
        )));
    }
    let n_iters = trace.iterations();
    let tail = n_iters.div_ceil(10);
    let start = n_iters - tail;
    let mut rep = CheckReport::pass(name);

    let mean = |vals: &[f64]| vals[start..].iter().sum::<f64>() / tail as f64;
    let tail_mean = mean(&trace.phi_exact_pair);
    rep.observe(
        start,
        value_tol - (tail_mean - expected_value).abs(),
        0.0,
        "tail mean of exact-pair values near the infimum",
    );
    let tail_mirror = mean(&trace.phi_exact_pair_mirror);
    rep.observe(
        start,
        value_tol - (tail_mirror - expected_value).abs(),
        0.0,
        "tail mean of mirrored exact-pair values near the infimum",
    );

    if let Some(r) = reference {
        let residual = validate_reference(problem, r)?;
        let s = &problem.space;
        let scale = s.distance(&trace.xs[0], &r.x)?;
        let slack = 1e-9 * (1.0 + expected_value.abs())
            + 10.0 * residual * (1.0 + scale) * (1.0 + 1.0 / problem.gamma);
        for n in 0..n_iters {
            let v = trace.phi_exact_pair[n];
            rep.observe(n, v - expected_value + slack, 0.0, "infimum lower bound");
            let dxn = s.distance_squared(&trace.xs[n], &r.x)?;
            let dxt = s.distance_squared(&trace.x_tilde[n], &r.x)?;
            let upper = expected_value + (dxn - dxt) / (2.0 * problem.gamma) + slack;
            rep.observe(n, upper - v, 0.0, "exact-pair sandwich upper bound");

            let w = trace.phi_exact_pair_mirror[n];
            rep.observe(n, w - expected_value + slack, 0.0, "mirrored infimum lower bound");
            let dyn_ = s.distance_squared(&trace.ys[n], &r.y)?;
            let dyt = s.distance_squared(&trace.y_tilde[n], &r.y)?;
            let upper_m = expected_value + (dyn_ - dyt) / (2.0 * problem.gamma) + slack;
            rep.observe(n, upper_m - w, 0.0, "mirrored sandwich upper bound");
        }
    }
    Ok(rep)
}

/// On exact runs the running average of step objectives beats any fixed
/// competitor pair at the 1/N rate:
///
///   (1/N) sum_n phi(x_{n+1}, y_n) <= phi(x, y) + d(x_0, x)^2 / (2 gamma N).
pub fn check_averaged_rate(
    problem: &SplitProblem,
    trace: &IterateTrace,
    competitors: &[(Point, Point)],
) -> Result<CheckReport> {
    let name = "averaged_rate";
    if !trace.error_free {
        return Ok(CheckReport::not_applicable(name, "run injected prox errors"));
    }
    let n_iters = trace.iterations();
    let mean = trace.phi_xnext_y.iter().sum::<f64>() / n_iters as f64;
    let mut rep = CheckReport::pass(name);
    for (i, (x, y)) in competitors.iter().enumerate() {
        let value = problem.phi(x, y)?;
        if !value.is_finite() {
            continue;
        }
        let d2 = problem.space.distance_squared(&trace.xs[0], x)?;
        let bound = value + d2 / (2.0 * problem.gamma * n_iters as f64);
        let tol = 1e-9 * (1.0 + value.abs() + d2);
        rep.observe(i, bound - mean, tol, "averaged objective rate");
    }
    Ok(rep)
}

/// When f or g carries a uniform convexity modulus and the schedule is
/// summable, the iterates converge to the solution pair itself; the check
/// asks the final pair to be within `tol` of the reference.
pub fn check_strong_convergence(
    problem: &SplitProblem,
    trace: &IterateTrace,
    reference: &SolutionPair,
    tol: f64,
) -> Result<CheckReport> {
    let name = "strong_convergence";
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "strong convergence tolerance must be finite and > 0, got {tol}"
        )));
    }
    if problem.f.convexity_modulus().is_none() && problem.g.convexity_modulus().is_none() {
        return Ok(CheckReport::not_applicable(
            name,
            "neither term carries a uniform convexity modulus",
        ));
    }
    if trace.guarantees_void {
        return Ok(CheckReport::not_applicable(name, "error schedule is not summable"));
    }
    validate_reference(problem, reference)?;
    let s = &problem.space;
    let n_iters = trace.iterations();
    let final_dist = s.distance(&trace.xs[n_iters], &reference.x)?
        + s.distance(&trace.ys[n_iters - 1], &reference.y)?;
    let mut rep = CheckReport::pass(name);
    rep.observe(n_iters, tol - final_dist, 0.0, "final distance to the solution pair");
    if rep.verdict == Verdict::Pass {
        rep.detail = format!("final distance {final_dist:e}");
    }
    Ok(rep)
}
