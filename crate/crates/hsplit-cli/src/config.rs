//! Scenario files: JSON descriptors for every space, function, set,
//! point, schedule, reference, and stopping rule the runner accepts,
//! plus conversion into library objects with semantic validation.
//!
//! Tree vertices are referenced by name in configs and resolved to
//! indices here, so scenario files stay readable.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use hsplit::functions::{
    distance_to_point, half_squared_distance, indicator, zero_function, ConvexSet, ProxFunction,
};
use hsplit::oracle::SamplingRegion;
use hsplit::spaces::{MetricTree, Point, Space, TreePosition};
use hsplit::splitting::{ErrorSchedule, SolutionPair, SplitProblem, StoppingRule};
use serde::Deserialize;

/// Anything that prevents a scenario from loading or running. Rendered to
/// stderr verbatim; the process exits with status 1.
#[derive(Debug)]
pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

impl From<hsplit::Error> for CliError {
    fn from(e: hsplit::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError(format!("config does not match the schema: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn err(msg: impl Into<String>) -> CliError {
    CliError(msg.into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub space: SpaceDesc,
    pub f: FunctionDesc,
    pub g: FunctionDesc,
    pub gamma: f64,
    pub x0: PointDesc,
    #[serde(default)]
    pub schedule: ScheduleDesc,
    pub stopping: StoppingDesc,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub reference: ReferenceDesc,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceDesc {
    Euclidean { dim: usize },
    Poincare { dim: usize },
    Tree { vertices: Vec<String>, edges: Vec<(String, String, f64)> },
    Product { left: Box<SpaceDesc>, right: Box<SpaceDesc> },
}

impl SpaceDesc {
    pub fn build(&self) -> CliResult<Space> {
        Ok(match self {
            SpaceDesc::Euclidean { dim } => Space::euclidean(*dim)?,
            SpaceDesc::Poincare { dim } => Space::poincare(*dim)?,
            SpaceDesc::Tree { vertices, edges } => {
                Space::Tree(MetricTree::new(vertices, edges)?)
            }
            SpaceDesc::Product { left, right } => Space::product(left.build()?, right.build()?),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PointDesc {
    Vector { vector: Vec<f64> },
    Vertex { vertex: String },
    OnEdge { edge: (String, String), offset: f64 },
    Product { product: Box<(PointDesc, PointDesc)> },
}

/// Looks up a vertex by name with a helpful message on a miss.
fn vertex_id(tree: &MetricTree, name: &str) -> CliResult<usize> {
    tree.vertex_id(name)
        .ok_or_else(|| err(format!("unknown tree vertex \"{name}\"")))
}

impl PointDesc {
    pub fn build(&self, space: &Space) -> CliResult<Point> {
        let point = match (self, space) {
            (PointDesc::Vector { vector }, Space::Euclidean { .. } | Space::Poincare { .. }) => {
                Point::vector(vector.clone())
            }
            (PointDesc::Vertex { vertex }, Space::Tree(t)) => {
                Point::Tree(TreePosition::Vertex(vertex_id(t, vertex)?))
            }
            (PointDesc::OnEdge { edge: (a, b), offset }, Space::Tree(t)) => {
                let (ia, ib) = (vertex_id(t, a)?, vertex_id(t, b)?);
                let idx = (0..t.edge_count())
                    .find(|&i| {
                        let e = t.edge(i);
                        (e.u, e.v) == (ia, ib) || (e.u, e.v) == (ib, ia)
                    })
                    .ok_or_else(|| err(format!("no tree edge joins \"{a}\" and \"{b}\"")))?;
                let e = t.edge(idx);
                // The offset in the file is measured from the first listed
                // endpoint; flip it when the stored edge runs the other way.
                let off = if e.u == ia { *offset } else { e.len - *offset };
                Point::Tree(t.canonical(&TreePosition::OnEdge { edge: idx, offset: off })?)
            }
            (PointDesc::Product { product }, Space::Product(l, r)) => {
                Point::product(product.0.build(l)?, product.1.build(r)?)
            }
            _ => {
                return Err(err(format!(
                    "point literal does not fit a {} space",
                    space.kind_name()
                )))
            }
        };
        space.check_point(&point)?;
        Ok(point)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetDesc {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    GeodesicBall { center: Vec<f64>, radius: f64 },
    Subtree { vertices: Vec<String> },
    Product { left: Box<SetDesc>, right: Box<SetDesc> },
}

impl SetDesc {
    pub fn build(&self, space: &Space) -> CliResult<ConvexSet> {
        let set = match (self, space) {
            (SetDesc::Box { lower, upper }, _) => {
                ConvexSet::Box { lower: lower.clone(), upper: upper.clone() }
            }
            (SetDesc::Ball { center, radius }, _) => {
                ConvexSet::Ball { center: center.clone(), radius: *radius }
            }
            (SetDesc::GeodesicBall { center, radius }, _) => {
                ConvexSet::GeodesicBall { center: center.clone(), radius: *radius }
            }
            (SetDesc::Subtree { vertices }, Space::Tree(t)) => {
                let ids = vertices
                    .iter()
                    .map(|name| vertex_id(t, name))
                    .collect::<CliResult<Vec<_>>>()?;
                ConvexSet::Subtree { vertices: ids }
            }
            (SetDesc::Subtree { .. }, _) => {
                return Err(err(format!(
                    "a subtree constraint needs a tree space, not {}",
                    space.kind_name()
                )))
            }
            (SetDesc::Product { left, right }, Space::Product(ls, rs)) => ConvexSet::Product(
                Box::new(left.build(ls)?),
                Box::new(right.build(rs)?),
            ),
            (SetDesc::Product { .. }, _) => {
                return Err(err(format!(
                    "a product constraint needs a product space, not {}",
                    space.kind_name()
                )))
            }
        };
        set.validate(space)?;
        Ok(set)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionDesc {
    Indicator { set: SetDesc },
    HalfSquaredDistance { anchor: PointDesc },
    DistanceTo { anchor: PointDesc },
    Zero,
}

impl FunctionDesc {
    pub fn build(&self, space: &Space) -> CliResult<Arc<dyn ProxFunction>> {
        Ok(match self {
            FunctionDesc::Indicator { set } => Arc::new(indicator(set.build(space)?)),
            FunctionDesc::HalfSquaredDistance { anchor } => {
                Arc::new(half_squared_distance(anchor.build(space)?))
            }
            FunctionDesc::DistanceTo { anchor } => {
                Arc::new(distance_to_point(anchor.build(space)?))
            }
            FunctionDesc::Zero => Arc::new(zero_function()),
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleDesc {
    #[default]
    None,
    InverseSquare {
        c: f64,
    },
    /// Per-iteration magnitudes from a CSV file of "delta,eps" rows,
    /// resolved relative to the config file. The last row repeats forever.
    Custom {
        path: String,
    },
}

impl ScheduleDesc {
    pub fn build(&self, seed: u64, base_dir: &Path) -> CliResult<ErrorSchedule> {
        match self {
            ScheduleDesc::None => Ok(ErrorSchedule::none()),
            ScheduleDesc::InverseSquare { c } => Ok(ErrorSchedule::inverse_square(*c, seed)?),
            ScheduleDesc::Custom { path } => {
                let full = base_dir.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| {
                    err(format!("cannot read error schedule {}: {e}", full.display()))
                })?;
                let mut rows = Vec::new();
                for (lineno, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let mut parts = line.split(',');
                    let parse = |s: Option<&str>| -> CliResult<f64> {
                        s.map(str::trim)
                            .filter(|t| !t.is_empty())
                            .ok_or_else(|| {
                                err(format!("{}:{}: expected \"delta,eps\"", path, lineno + 1))
                            })?
                            .parse::<f64>()
                            .map_err(|e| err(format!("{}:{}: {e}", path, lineno + 1)))
                    };
                    let delta = parse(parts.next())?;
                    let eps = parse(parts.next())?;
                    if parts.next().is_some() {
                        return Err(err(format!(
                            "{}:{}: expected exactly two columns",
                            path,
                            lineno + 1
                        )));
                    }
                    rows.push((delta, eps));
                }
                Ok(ErrorSchedule::custom(rows, seed)?)
            }
        }
    }
}

fn default_divergence_floor() -> f64 {
    -1e18
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoppingDesc {
    pub max_iterations: usize,
    #[serde(default)]
    pub displacement_tol: f64,
    #[serde(default)]
    pub objective_target: Option<(f64, f64)>,
    #[serde(default = "default_divergence_floor")]
    pub divergence_floor: f64,
}

impl StoppingDesc {
    pub fn build(&self) -> StoppingRule {
        StoppingRule {
            max_iterations: self.max_iterations,
            displacement_tol: self.displacement_tol,
            objective_target: self.objective_target,
            divergence_floor: self.divergence_floor,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceDesc {
    #[default]
    None,
    Explicit {
        x: PointDesc,
        y: PointDesc,
        value: f64,
    },
    /// Compute the reference pair by grid search plus fixed-point polish
    /// before the run starts.
    Auto {
        resolution: usize,
        #[serde(default)]
        region: Option<RegionDesc>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionDesc {
    Box { center: Vec<f64>, half_widths: Vec<f64> },
    BallCap { cap: f64 },
    WholeTree,
    Product { left: Box<RegionDesc>, right: Box<RegionDesc> },
}

impl RegionDesc {
    pub fn build(&self, space: &Space) -> CliResult<SamplingRegion> {
        let region = match self {
            RegionDesc::Box { center, half_widths } => SamplingRegion::Box {
                center: center.clone(),
                half_widths: half_widths.clone(),
            },
            RegionDesc::BallCap { cap } => SamplingRegion::BallCap { cap: *cap },
            RegionDesc::WholeTree => SamplingRegion::WholeTree,
            RegionDesc::Product { left, right } => match space {
                Space::Product(ls, rs) => SamplingRegion::Product(
                    Box::new(left.build(ls)?),
                    Box::new(right.build(rs)?),
                ),
                _ => {
                    return Err(err(format!(
                        "a product region needs a product space, not {}",
                        space.kind_name()
                    )))
                }
            },
        };
        region.validate(space)?;
        Ok(region)
    }
}

fn default_check_tol() -> f64 {
    1e-6
}

/// Pass thresholds for the value-convergence and strong-convergence
/// checks; everything else uses scale-aware floating-point slack.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_check_tol")]
    pub value: f64,
    #[serde(default = "default_check_tol")]
    pub strong: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { value: default_check_tol(), strong: default_check_tol() }
    }
}

/// How the runner obtains a solution pair for the distance diagnostics.
pub enum ReferenceRequest {
    None,
    Explicit(SolutionPair),
    Auto { region: SamplingRegion, resolution: usize },
}

/// A fully built scenario, ready to run.
pub struct Scenario {
    pub name: String,
    pub problem: SplitProblem,
    pub x0: Point,
    pub schedule: ErrorSchedule,
    pub stopping: StoppingRule,
    pub reference: ReferenceRequest,
    pub tolerances: Tolerances,
    pub seed: u64,
}

/// Reads and parses a scenario file, returning the raw bytes as well so
/// the summary can embed their digest.
pub fn load_config(path: &Path) -> CliResult<(ScenarioConfig, Vec<u8>)> {
    let bytes = std::fs::read(path)
        .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
    let config: ScenarioConfig = serde_json::from_slice(&bytes)?;
    Ok((config, bytes))
}

pub fn build_scenario(
    config: &ScenarioConfig,
    config_path: &Path,
    seed_override: Option<u64>,
) -> CliResult<Scenario> {
    let name = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());
    let base_dir = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();

    let space = config.space.build()?;
    if !config.gamma.is_finite() || config.gamma <= 0.0 {
        return Err(err(format!(
            "gamma must be a positive finite number, got {}",
            config.gamma
        )));
    }
    let f = config.f.build(&space)?;
    let g = config.g.build(&space)?;
    let problem = SplitProblem::new(space, f, g, config.gamma)?;
    let x0 = config.x0.build(&problem.space)?;
    let seed = seed_override.unwrap_or(config.seed);
    let schedule = config.schedule.build(seed, &base_dir)?;
    let stopping = config.stopping.build();
    stopping_sanity(&stopping)?;
    let reference = match &config.reference {
        ReferenceDesc::None => ReferenceRequest::None,
        ReferenceDesc::Explicit { x, y, value } => {
            if !value.is_finite() {
                return Err(err(format!("reference value must be finite, got {value}")));
            }
            ReferenceRequest::Explicit(SolutionPair {
                x: x.build(&problem.space)?,
                y: y.build(&problem.space)?,
                value: *value,
            })
        }
        ReferenceDesc::Auto { resolution, region } => {
            let region = match region {
                Some(desc) => desc.build(&problem.space)?,
                None => SamplingRegion::default_for(&problem.space),
            };
            ReferenceRequest::Auto { region, resolution: *resolution }
        }
    };
    let tolerances = config.tolerances.clone();
    for (label, tol) in [("value", tolerances.value), ("strong", tolerances.strong)] {
        if !tol.is_finite() || tol <= 0.0 {
            return Err(err(format!("{label} tolerance must be positive, got {tol}")));
        }
    }
    Ok(Scenario {
        name,
        problem,
        x0,
        schedule,
        stopping,
        reference,
        tolerances,
        seed,
    })
}

fn stopping_sanity(stop: &StoppingRule) -> CliResult<()> {
    if stop.max_iterations == 0 {
        return Err(err("stopping.max_iterations must be at least 1"));
    }
    Ok(())
}

/// Full parse plus semantic validation without running the iteration.
/// Returns the human-readable description of what was validated.
pub fn validate_config(path: &Path) -> CliResult<String> {
    let (config, _) = load_config(path)?;
    let scenario = build_scenario(&config, path, None)?;
    let mut lines = vec![
        format!("space: {}", scenario.problem.space.kind_name()),
        format!("f: {}, g: {}", scenario.problem.f.name(), scenario.problem.g.name()),
        format!("gamma: {}", scenario.problem.gamma),
        format!("max iterations: {}", scenario.stopping.max_iterations),
    ];
    match &scenario.reference {
        ReferenceRequest::None => lines.push("reference: none".into()),
        ReferenceRequest::Explicit(p) => lines.push(format!("reference: explicit, value {}", p.value)),
        ReferenceRequest::Auto { resolution, .. } => {
            lines.push(format!("reference: search at resolution {resolution}"))
        }
    }
    Ok(lines.join("\n"))
}
