//! Executes a built scenario: resolves the reference pair, runs the
//! iteration, applies every diagnostic, and writes `trace.csv` plus
//! `summary.json` into the output directory.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use hsplit::oracle::{solve_reference, SamplingRegion};
use hsplit::splitting::diagnostics::{
    check_averaged_rate, check_displacement_summability, check_fejer, check_monotone_decrease,
    check_quasi_fejer, check_strong_convergence, check_value_convergence, CheckReport, Verdict,
};
use hsplit::splitting::{run, IterateTrace, StopCause};
use log::{debug, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{
    build_scenario, load_config, CliError, CliResult, ReferenceRequest, Scenario,
};

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    pub seed: Option<u64>,
    pub dump_points: bool,
    /// Compute a search reference even when the config does not ask for
    /// one, so distance diagnostics always run.
    pub with_reference: bool,
}

#[derive(Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub verdict: String,
    pub first_violation: Option<usize>,
    pub worst_margin: f64,
    pub detail: String,
}

impl From<&CheckReport> for CheckSummary {
    fn from(r: &CheckReport) -> Self {
        let verdict = match r.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not_applicable",
        };
        CheckSummary {
            name: r.name.to_string(),
            verdict: verdict.to_string(),
            first_violation: r.first_violation,
            worst_margin: r.worst_margin,
            detail: r.detail.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct ReferenceSummary {
    pub source: String,
    pub value: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub config_sha256: String,
    pub library_version: String,
    pub seed: u64,
    pub iterations: usize,
    pub stop_cause: String,
    pub error_free: bool,
    pub guarantees_void: bool,
    /// Coupled objective at the last perturbed pair. Infinite when an
    /// injected error pushed an iterate off a constraint set; JSON then
    /// shows null.
    pub final_phi_step: f64,
    /// Coupled objective at the last exactly recomputed pair; finite on
    /// every run.
    pub final_phi_exact: f64,
    pub final_disp_x: f64,
    pub final_disp_y: Option<f64>,
    pub sum_delta: f64,
    pub sum_eps: f64,
    pub reference: Option<ReferenceSummary>,
    pub checks: Vec<CheckSummary>,
    pub all_passed: bool,
    pub wall_time_seconds: f64,
}

pub struct RunOutcome {
    pub summary: RunSummary,
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.summary.all_passed
    }
}

fn stop_cause_name(c: StopCause) -> &'static str {
    match c {
        StopCause::MaxIterations => "max_iterations",
        StopCause::Displacement => "displacement",
        StopCause::Objective => "objective",
        StopCause::Unbounded => "unbounded",
    }
}

/// Writes the per-iteration table. Row n reports the objectives before
/// and after the x update, the displacements, the realized error
/// magnitudes, and (when a reference pair exists) the distances of the
/// just-produced iterates to it. Fields without a defined value on a row
/// stay empty. Floats print in shortest round-trip form.
fn write_trace(
    scenario: &Scenario,
    trace: &IterateTrace,
    dump_points: bool,
    out: &mut dyn Write,
) -> CliResult<()> {
    let space = &scenario.problem.space;
    let mut header = String::from(
        "n,phi_xy,phi_xnext_y,disp_x,disp_y,delta_n,eps_n,dist_x_ref,dist_y_ref",
    );
    if dump_points {
        for i in 0..space.flat_len() {
            header.push_str(&format!(",x_{i}"));
        }
        for i in 0..space.flat_len() {
            header.push_str(&format!(",y_{i}"));
        }
    }
    writeln!(out, "{header}").map_err(CliError::from)?;

    let mut flat = Vec::new();
    for n in 0..trace.iterations() {
        let disp_y = if n < trace.disp_y.len() {
            trace.disp_y[n].to_string()
        } else {
            String::new()
        };
        let dist_x = trace
            .dist_x_ref
            .as_ref()
            .map(|v| v[n + 1].to_string())
            .unwrap_or_default();
        let dist_y = trace
            .dist_y_ref
            .as_ref()
            .map(|v| v[n].to_string())
            .unwrap_or_default();
        let mut row = format!(
            "{n},{},{},{},{disp_y},{},{},{dist_x},{dist_y}",
            trace.phi_xy[n],
            trace.phi_xnext_y[n],
            trace.disp_x[n],
            trace.delta[n],
            trace.eps[n],
        );
        if dump_points {
            flat.clear();
            space.flatten_point(&trace.xs[n + 1], &mut flat);
            space.flatten_point(&trace.ys[n], &mut flat);
            for v in &flat {
                row.push(',');
                row.push_str(&v.to_string());
            }
        }
        writeln!(out, "{row}").map_err(CliError::from)?;
    }
    Ok(())
}

/// Ten space-point pairs drawn from the default sampling region, used as
/// competitors in the averaged-rate bound.
fn competitor_pairs(scenario: &Scenario) -> CliResult<Vec<(hsplit::spaces::Point, hsplit::spaces::Point)>> {
    let space = &scenario.problem.space;
    let region = SamplingRegion::default_for(space);
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed ^ 0xC0_3881);
    let mut pairs = Vec::with_capacity(10);
    for _ in 0..10 {
        let x = region.sample(space, &mut rng)?;
        let y = region.sample(space, &mut rng)?;
        pairs.push((x, y));
    }
    Ok(pairs)
}

fn not_applicable(name: &'static str) -> CheckReport {
    CheckReport {
        name,
        verdict: Verdict::NotApplicable,
        first_violation: None,
        worst_margin: f64::INFINITY,
        detail: "no reference pair configured".into(),
    }
}

/// Runs one scenario end to end and writes `trace.csv` and
/// `summary.json` under `out_dir`.
pub fn run_scenario(
    config_path: &Path,
    out_dir: &Path,
    opts: &SolveOptions,
) -> CliResult<RunOutcome> {
    let started = Instant::now();
    let (config, raw) = load_config(config_path)?;
    let scenario = build_scenario(&config, config_path, opts.seed)?;
    info!("scenario {}: running", scenario.name);

    let (reference, ref_source) = match &scenario.reference {
        ReferenceRequest::Explicit(pair) => (Some(pair.clone()), "explicit"),
        ReferenceRequest::Auto { region, resolution } => {
            debug!("searching for a reference pair at resolution {resolution}");
            let pair = solve_reference(&scenario.problem, region, *resolution)?;
            (Some(pair), "search")
        }
        ReferenceRequest::None if opts.with_reference => {
            let region = SamplingRegion::default_for(&scenario.problem.space);
            let pair = solve_reference(&scenario.problem, &region, 24)?;
            (Some(pair), "search")
        }
        ReferenceRequest::None => (None, ""),
    };

    let trace = run(
        &scenario.problem,
        &scenario.x0,
        &scenario.schedule,
        &scenario.stopping,
        reference.as_ref(),
    )?;
    let n = trace.iterations();
    debug!("finished after {n} iterations ({:?})", trace.stop_cause);

    let problem = &scenario.problem;
    let mut checks = vec![
        check_monotone_decrease(&trace),
        check_displacement_summability(problem, &trace),
    ];
    match &reference {
        Some(pair) => {
            checks.push(check_fejer(problem, &trace, pair)?);
            checks.push(check_quasi_fejer(problem, &trace, pair)?);
            checks.push(check_value_convergence(
                problem,
                &trace,
                pair.value,
                scenario.tolerances.value,
                Some(pair),
            )?);
            checks.push(check_strong_convergence(
                problem,
                &trace,
                pair,
                scenario.tolerances.strong,
            )?);
        }
        None => {
            checks.push(not_applicable("fejer_monotonicity"));
            checks.push(not_applicable("quasi_fejer"));
            checks.push(not_applicable("value_convergence"));
            checks.push(not_applicable("strong_convergence"));
        }
    }
    checks.push(check_averaged_rate(problem, &trace, &competitor_pairs(&scenario)?)?);

    std::fs::create_dir_all(out_dir)?;
    let trace_path = out_dir.join("trace.csv");
    let mut file = std::io::BufWriter::new(std::fs::File::create(&trace_path)?);
    write_trace(&scenario, &trace, opts.dump_points, &mut file)?;
    file.flush()?;

    let space = &problem.space;
    let reference_summary = match &reference {
        Some(pair) => {
            let mut x = Vec::new();
            let mut y = Vec::new();
            space.flatten_point(&pair.x, &mut x);
            space.flatten_point(&pair.y, &mut y);
            Some(ReferenceSummary {
                source: ref_source.to_string(),
                value: pair.value,
                x,
                y,
            })
        }
        None => None,
    };
    let all_passed = checks.iter().all(|c| c.verdict != Verdict::Fail);
    let summary = RunSummary {
        scenario: scenario.name.clone(),
        config_sha256: hex_digest(&raw),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: scenario.seed,
        iterations: n,
        stop_cause: stop_cause_name(trace.stop_cause).to_string(),
        error_free: trace.error_free,
        guarantees_void: trace.guarantees_void,
        final_phi_step: trace.phi_xnext_y[n - 1],
        final_phi_exact: trace.phi_exact_pair[n - 1],
        final_disp_x: trace.disp_x[n - 1],
        final_disp_y: trace.disp_y.last().copied(),
        sum_delta: trace.delta.iter().sum(),
        sum_eps: trace.eps.iter().sum(),
        reference: reference_summary,
        checks: checks.iter().map(CheckSummary::from).collect(),
        all_passed,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    let summary_path = out_dir.join("summary.json");
    std::fs::write(&summary_path, serde_json::to_vec_pretty(&summary)?)?;
    info!(
        "scenario {}: {} after {n} iterations",
        scenario.name,
        if all_passed { "all checks passed" } else { "CHECK FAILURES" }
    );
    Ok(RunOutcome { summary })
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub struct SuiteEntry {
    pub name: String,
    pub result: CliResult<RunOutcome>,
}

/// Runs every `*.json` scenario in `dir` concurrently, each into its own
/// subdirectory of `out_dir`. Entries come back sorted by name.
pub fn run_suite(dir: &Path, out_dir: &Path, opts: &SolveOptions) -> CliResult<Vec<SuiteEntry>> {
    let mut configs: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| CliError(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    configs.sort();
    if configs.is_empty() {
        return Err(CliError(format!(
            "no .json scenario files found in {}",
            dir.display()
        )));
    }
    let mut entries: Vec<SuiteEntry> = Vec::with_capacity(configs.len());
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(configs.len());
        for path in &configs {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scenario".into());
            let sub = out_dir.join(&name);
            handles.push((name, scope.spawn(move || run_scenario(path, &sub, opts))));
        }
        for (name, handle) in handles {
            let result = handle
                .join()
                .unwrap_or_else(|_| Err(CliError(format!("scenario {name} panicked"))));
            entries.push(SuiteEntry { name, result });
        }
    });
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(entries)
}
