//! Run configuration: a TOML file describing either a built-in benchmark
//! (optionally overridden) or a custom rectangular-plate crack problem.
//! Unknown keys are rejected; every value is validated before any compute
//! starts. The full grammar is documented in the guide (`book/src/cli.md`).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::benchmarks::{BenchmarkCase, BenchmarkId};
use crate::elasticity::{Material, PlaneAssumption};
use crate::geometry::{
    build_problem, CrackGeometry, EdgeConditions, PlateSpec, ProblemDefinition, SegmentCondition,
    TipSelection,
};
use crate::network::{ActivationKind, Architecture};
use crate::training::TrainingConfig;
use crate::{Error, Result};

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemDefinition,
    pub arch: Architecture,
    pub training: TrainingConfig,
    pub grid: (usize, usize),
    pub boundary_density: Option<f64>,
    pub window: (f64, f64),
    pub radii: usize,
    pub extraction_tip: usize,
    pub out_dir: PathBuf,
    pub seeds: Vec<u64>,
    /// Present when the config named a built-in benchmark.
    pub benchmark: Option<BenchmarkCase>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    benchmark: Option<String>,
    benchmark_options: Option<BenchmarkOptions>,
    problem: Option<ProblemSection>,
    #[serde(default)]
    network: NetworkSection,
    #[serde(default)]
    training: TrainingSection,
    #[serde(default)]
    sampling: SamplingSection,
    #[serde(default)]
    extraction: ExtractionSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchmarkOptions {
    /// Edge-crack length ratio `a/b`.
    ratio: Option<f64>,
    /// Slant-crack angle in degrees.
    angle_deg: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSection {
    material: MaterialSection,
    domain: DomainSection,
    crack: CrackSection,
    boundary: BoundarySection,
    body_force: Option<[f64; 2]>,
    char_length: Option<f64>,
    enrichment: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialSection {
    youngs_modulus: Option<f64>,
    poisson_ratio: f64,
    assumption: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainSection {
    x: [f64; 2],
    y: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CrackSection {
    start: [f64; 2],
    end: [f64; 2],
    tips: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundarySection {
    left: EdgeSpec,
    right: EdgeSpec,
    bottom: EdgeSpec,
    top: EdgeSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeSpec {
    u1: Option<f64>,
    u2: Option<f64>,
    t1: Option<f64>,
    t2: Option<f64>,
}

impl EdgeSpec {
    fn conditions(&self, edge: &str) -> Result<Vec<SegmentCondition>> {
        let mut out = Vec::new();
        if let Some(v) = self.u1 {
            out.push(SegmentCondition::DirichletU1(v));
        }
        if let Some(v) = self.u2 {
            out.push(SegmentCondition::DirichletU2(v));
        }
        match (self.t1, self.t2) {
            (Some(a), Some(b)) => out.push(SegmentCondition::Traction([a, b])),
            (Some(a), None) => out.push(SegmentCondition::Traction1(a)),
            (None, Some(b)) => out.push(SegmentCondition::Traction2(b)),
            (None, None) => {}
        }
        if out.is_empty() {
            return Err(Error::Config(format!(
                "boundary.{edge} has no conditions (use t1 = 0.0, t2 = 0.0 for traction-free)"
            )));
        }
        Ok(out)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkSection {
    hidden_layers: Option<usize>,
    neurons: Option<usize>,
    activation: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainingSection {
    iterations: Option<usize>,
    seed: Option<u64>,
    seeds: Option<Vec<u64>>,
    adam_lr: Option<f64>,
    adam_fraction: Option<f64>,
    log_every: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplingSection {
    grid: Option<[usize; 2]>,
    boundary_density: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtractionSection {
    window: Option<[f64; 2]>,
    radii: Option<usize>,
    tip: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<String>,
}

/// Parse and validate a config file into a ready-to-run [`RunConfig`].
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parse a config from a TOML string (exposed for tests and embedding).
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    if raw.benchmark.is_some() && raw.problem.is_some() {
        return Err(Error::Config(
            "give either 'benchmark' or a [problem] section, not both".into(),
        ));
    }

    let seeds = match (&raw.training.seed, &raw.training.seeds) {
        (Some(_), Some(_)) => {
            return Err(Error::Config("give either training.seed or training.seeds".into()))
        }
        (Some(s), None) => vec![*s],
        (None, Some(list)) if !list.is_empty() => list.clone(),
        (None, Some(_)) => return Err(Error::Config("training.seeds must not be empty".into())),
        (None, None) => vec![0],
    };

    let mut training = TrainingConfig { seed: seeds[0], ..Default::default() };
    if let Some(iters) = raw.training.iterations {
        if iters == 0 {
            return Err(Error::Config("training.iterations must be at least 1".into()));
        }
        training.iterations = iters;
    }
    if let Some(lr) = raw.training.adam_lr {
        if !(lr > 0.0) {
            return Err(Error::Config("training.adam_lr must be positive".into()));
        }
        training.adam_lr = lr;
    }
    if let Some(f) = raw.training.adam_fraction {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::Config("training.adam_fraction must be in [0, 1]".into()));
        }
        training.adam_fraction = f;
    }
    if let Some(every) = raw.training.log_every {
        if every == 0 {
            return Err(Error::Config("training.log_every must be at least 1".into()));
        }
        training.log_every = every;
    }

    let window = match raw.extraction.window {
        Some([lo, hi]) => {
            if !(lo > 0.0 && hi > lo && hi <= 1.0) {
                return Err(Error::Config(format!(
                    "extraction.window must satisfy 0 < lo < hi <= 1, got [{lo}, {hi}]"
                )));
            }
            (lo, hi)
        }
        None => (0.05, 0.30),
    };
    let radii = raw.extraction.radii.unwrap_or(12);
    if radii < 4 {
        return Err(Error::Config("extraction.radii must be at least 4".into()));
    }
    let out_dir = PathBuf::from(raw.output.dir.unwrap_or_else(|| "out".into()));

    if let Some(name) = raw.benchmark {
        let id = BenchmarkId::parse(&name)?;
        let options = raw.benchmark_options.unwrap_or_default();
        let mut case = BenchmarkCase::from_id(id, options.ratio, options.angle_deg)?;
        if let Some(h) = raw.network.hidden_layers {
            case.arch.hidden_layers = h;
        }
        if let Some(w) = raw.network.neurons {
            case.arch.neurons_per_layer = w;
        }
        if let Some(act) = &raw.network.activation {
            case.arch.activation = ActivationKind::parse(act)?;
        }
        if case.arch.hidden_layers == 0 || case.arch.neurons_per_layer == 0 {
            return Err(Error::InvalidArchitecture {
                hidden_layers: case.arch.hidden_layers,
                neurons_per_layer: case.arch.neurons_per_layer,
            });
        }
        if let Some([m, n]) = raw.sampling.grid {
            case.grid = (m, n);
        }
        if raw.training.iterations.is_some() {
            case.iterations = training.iterations;
        } else {
            training.iterations = case.iterations;
        }
        case.window = window;
        let problem = case.problem()?;
        validate_grid(case.grid)?;
        return Ok(RunConfig {
            problem,
            arch: case.arch,
            training,
            grid: case.grid,
            boundary_density: raw.sampling.boundary_density,
            window,
            radii,
            extraction_tip: raw.extraction.tip.unwrap_or(case.extraction_tip),
            out_dir,
            seeds,
            benchmark: Some(case),
        });
    }

    let section = raw
        .problem
        .ok_or_else(|| Error::Config("config needs 'benchmark' or a [problem] section".into()))?;
    let assumption = match section.material.assumption.as_str() {
        "plane-strain" => PlaneAssumption::PlaneStrain,
        "plane-stress" => PlaneAssumption::PlaneStress,
        other => {
            return Err(Error::Config(format!(
                "material.assumption must be 'plane-strain' or 'plane-stress', got '{other}'"
            )))
        }
    };
    let material = Material::new(
        section.material.youngs_modulus.unwrap_or(1.0),
        section.material.poisson_ratio,
        assumption,
    )?;
    let tips = match section.crack.tips.as_str() {
        "start" => TipSelection::Start,
        "end" => TipSelection::End,
        "both" => TipSelection::Both,
        other => {
            return Err(Error::Config(format!(
                "crack.tips must be 'start', 'end' or 'both', got '{other}'"
            )))
        }
    };
    let spec = PlateSpec {
        material,
        rect: [
            section.domain.x[0],
            section.domain.x[1],
            section.domain.y[0],
            section.domain.y[1],
        ],
        crack: CrackGeometry { start: section.crack.start, end: section.crack.end },
        tips,
        edges: EdgeConditions {
            left: section.boundary.left.conditions("left")?,
            right: section.boundary.right.conditions("right")?,
            bottom: section.boundary.bottom.conditions("bottom")?,
            top: section.boundary.top.conditions("top")?,
        },
        body_force: section.body_force.unwrap_or([0.0, 0.0]),
        char_length: section.char_length,
        enrichment: section.enrichment.unwrap_or(true),
    };
    let problem = build_problem(&spec)?;

    let arch = Architecture::new(
        raw.network.hidden_layers.unwrap_or(5),
        raw.network.neurons.unwrap_or(20),
        match &raw.network.activation {
            Some(name) => ActivationKind::parse(name)?,
            None => ActivationKind::Swish,
        },
    );
    if arch.hidden_layers == 0 || arch.neurons_per_layer == 0 {
        return Err(Error::InvalidArchitecture {
            hidden_layers: arch.hidden_layers,
            neurons_per_layer: arch.neurons_per_layer,
        });
    }
    let grid = raw
        .sampling
        .grid
        .map(|[m, n]| (m, n))
        .ok_or_else(|| Error::Config("custom problems need sampling.grid = [m, n]".into()))?;
    validate_grid(grid)?;
    let extraction_tip = raw.extraction.tip.unwrap_or(0);
    if extraction_tip >= problem.tips.len() {
        return Err(Error::Config(format!(
            "extraction.tip {} out of range (problem has {} tips)",
            extraction_tip,
            problem.tips.len()
        )));
    }

    Ok(RunConfig {
        problem,
        arch,
        training,
        grid,
        boundary_density: raw.sampling.boundary_density,
        window,
        radii,
        extraction_tip,
        out_dir,
        seeds,
        benchmark: None,
    })
}

fn validate_grid(grid: (usize, usize)) -> Result<()> {
    if grid.0 < 2 || grid.1 < 2 {
        return Err(Error::Config(format!(
            "sampling.grid must be at least 2×2, got {}×{}",
            grid.0, grid.1
        )));
    }
    Ok(())
}
