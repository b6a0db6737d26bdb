//! The four built-in verification problems, their reference solutions, and
//! benchmark reports.
//!
//! - `center-tension`: center-cracked plate under remote tension (mode I),
//!   half-width model with symmetry conditions on the left edge.
//! - `center-shear`: the same plate under remote shear (mode II),
//!   antisymmetric reduction.
//! - `edge-tension`: edge-cracked plate under tension, checked against the
//!   empirical edge crack-opening-displacement formula.
//! - `slant`: finite plate with an inclined center crack (mixed mode,
//!   plane stress), checked against published boundary-element values.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::elasticity::{Material, PlaneAssumption};
use crate::geometry::{
    build_problem, generate_collocation, CrackGeometry, EdgeConditions, PlateSpec,
    ProblemDefinition, SegmentCondition, TipSelection,
};
use crate::network::{ActivationKind, Architecture};
use crate::sif::{extract_sif, kstar_curve, ktilde_to_k, window_radii, KStarSample};
use crate::training::{train, TrainingConfig};
use crate::{Error, Result};

/// Identifier of a built-in benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkId {
    CenterTension,
    CenterShear,
    EdgeTension,
    Slant,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 4] = [
        BenchmarkId::CenterTension,
        BenchmarkId::CenterShear,
        BenchmarkId::EdgeTension,
        BenchmarkId::Slant,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkId::CenterTension => "center-tension",
            BenchmarkId::CenterShear => "center-shear",
            BenchmarkId::EdgeTension => "edge-tension",
            BenchmarkId::Slant => "slant",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "center-tension" => Ok(BenchmarkId::CenterTension),
            "center-shear" => Ok(BenchmarkId::CenterShear),
            "edge-tension" => Ok(BenchmarkId::EdgeTension),
            "slant" => Ok(BenchmarkId::Slant),
            other => Err(Error::UnknownBenchmark {
                id: other.to_string(),
                valid: BenchmarkId::ALL.map(|b| b.name()).join(", "),
            }),
        }
    }
}

/// Reference values a benchmark is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReferenceValues {
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    /// Normalized edge crack-opening displacement.
    pub edge_cod: Option<f64>,
}

/// A fully specified benchmark run: geometry, loading, network and grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkCase {
    pub id: BenchmarkId,
    pub plate: PlateSpec,
    pub arch: Architecture,
    pub grid: (usize, usize),
    pub iterations: usize,
    pub window: (f64, f64),
    /// Tip index whose SIFs are reported.
    pub extraction_tip: usize,
    pub load: f64,
    pub reference: ReferenceValues,
}

const DEFAULT_WINDOW: (f64, f64) = (0.05, 0.30);

fn traction_free() -> Vec<SegmentCondition> {
    vec![SegmentCondition::Traction([0.0, 0.0])]
}

impl BenchmarkCase {
    /// Center-cracked plate, remote tension `σ22 = 1`. Half-width model
    /// (`b/a = 2`, `h/a = 6`) with mode-I symmetry on the left edge:
    /// `u1 = 0` and zero shear traction.
    pub fn center_tension() -> Self {
        let material = Material::new(1.0, 0.3, PlaneAssumption::PlaneStrain).unwrap();
        Self {
            id: BenchmarkId::CenterTension,
            plate: PlateSpec {
                material,
                rect: [0.0, 2.0, -6.0, 6.0],
                crack: CrackGeometry { start: [0.0, 0.0], end: [1.0, 0.0] },
                tips: TipSelection::End,
                edges: EdgeConditions {
                    left: vec![
                        SegmentCondition::DirichletU1(0.0),
                        SegmentCondition::Traction2(0.0),
                    ],
                    right: traction_free(),
                    bottom: vec![SegmentCondition::Traction([0.0, -1.0])],
                    top: vec![SegmentCondition::Traction([0.0, 1.0])],
                },
                body_force: [0.0, 0.0],
                char_length: Some(1.0),
                enrichment: true,
            },
            arch: Architecture::new(5, 20, ActivationKind::Swish),
            grid: (30, 180),
            iterations: 2500,
            window: DEFAULT_WINDOW,
            extraction_tip: 0,
            load: 1.0,
            reference: ReferenceValues {
                k1: Some(exact_center_crack_k(1.0, 1.0, 2.0).unwrap()),
                ..Default::default()
            },
        }
    }

    /// Center-cracked plate, remote shear `τ = 1`. Antisymmetric reduction
    /// on the left edge: `u2 = 0` and zero normal traction; the remote
    /// pure-shear state prescribes the tangential tractions on the outer
    /// edges.
    pub fn center_shear() -> Self {
        let material = Material::new(1.0, 0.3, PlaneAssumption::PlaneStrain).unwrap();
        Self {
            id: BenchmarkId::CenterShear,
            plate: PlateSpec {
                material,
                rect: [0.0, 2.0, -6.0, 6.0],
                crack: CrackGeometry { start: [0.0, 0.0], end: [1.0, 0.0] },
                tips: TipSelection::End,
                edges: EdgeConditions {
                    left: vec![
                        SegmentCondition::DirichletU2(0.0),
                        SegmentCondition::Traction1(0.0),
                    ],
                    right: vec![SegmentCondition::Traction([0.0, 1.0])],
                    bottom: vec![SegmentCondition::Traction([-1.0, 0.0])],
                    top: vec![SegmentCondition::Traction([1.0, 0.0])],
                },
                body_force: [0.0, 0.0],
                char_length: Some(1.0),
                enrichment: true,
            },
            arch: Architecture::new(5, 20, ActivationKind::Swish),
            grid: (40, 200),
            iterations: 2500,
            window: DEFAULT_WINDOW,
            extraction_tip: 0,
            load: 1.0,
            reference: ReferenceValues {
                k2: Some(exact_center_crack_k(1.0, 1.0, 2.0).unwrap()),
                ..Default::default()
            },
        }
    }

    /// Edge-cracked plate (`b = 1`, `h = 2b`) under tension, crack length
    /// ratio `a/b`.
    pub fn edge_tension(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Domain(format!("edge crack ratio a/b must be in (0, 1), got {ratio}")));
        }
        let material = Material::new(1.0, 0.3, PlaneAssumption::PlaneStrain).unwrap();
        let a = ratio; // b = 1
        Ok(Self {
            id: BenchmarkId::EdgeTension,
            plate: PlateSpec {
                material,
                rect: [0.0, 1.0, -1.0, 1.0],
                crack: CrackGeometry { start: [0.0, 0.0], end: [a, 0.0] },
                tips: TipSelection::End,
                edges: EdgeConditions {
                    left: traction_free(),
                    right: traction_free(),
                    bottom: vec![SegmentCondition::Traction([0.0, -1.0])],
                    top: vec![SegmentCondition::Traction([0.0, 1.0])],
                },
                body_force: [0.0, 0.0],
                char_length: Some(a),
                enrichment: true,
            },
            arch: Architecture::new(6, 15, ActivationKind::Swish),
            grid: (20, 100),
            iterations: 2500,
            window: DEFAULT_WINDOW,
            extraction_tip: 0,
            load: 1.0,
            reference: ReferenceValues {
                edge_cod: Some(normalized_edge_cod_reference(ratio)?),
                ..Default::default()
            },
        })
    }

    /// Finite plate (`H = 4`, height `2H`) with a slant center crack of
    /// half-length 1 at `angle_deg` to the horizontal, under vertical
    /// tension; plane stress. SIFs are reported at the right tip.
    pub fn slant(angle_deg: f64) -> Result<Self> {
        if !(0.0..90.0).contains(&angle_deg) {
            return Err(Error::Domain(format!(
                "slant angle must be in [0, 90) degrees, got {angle_deg}"
            )));
        }
        let material = Material::new(1.0, 0.3, PlaneAssumption::PlaneStress).unwrap();
        let alpha = angle_deg.to_radians();
        let (s, c) = alpha.sin_cos();
        Ok(Self {
            id: BenchmarkId::Slant,
            plate: PlateSpec {
                material,
                rect: [-2.0, 2.0, -4.0, 4.0],
                crack: CrackGeometry { start: [-c, -s], end: [c, s] },
                tips: TipSelection::Both,
                edges: EdgeConditions {
                    left: traction_free(),
                    right: traction_free(),
                    bottom: vec![SegmentCondition::Traction([0.0, -1.0])],
                    top: vec![SegmentCondition::Traction([0.0, 1.0])],
                },
                body_force: [0.0, 0.0],
                char_length: Some(1.0),
                enrichment: true,
            },
            arch: Architecture::new(6, 20, ActivationKind::Swish),
            grid: (40, 200),
            iterations: 2500,
            window: DEFAULT_WINDOW,
            // tips are ordered (start, end); the end tip is the right one
            extraction_tip: 1,
            load: 1.0,
            reference: slant_bem_reference(angle_deg),
        })
    }

    pub fn from_id(id: BenchmarkId, ratio: Option<f64>, angle_deg: Option<f64>) -> Result<Self> {
        match id {
            BenchmarkId::CenterTension => Ok(Self::center_tension()),
            BenchmarkId::CenterShear => Ok(Self::center_shear()),
            BenchmarkId::EdgeTension => Self::edge_tension(ratio.unwrap_or(0.5)),
            BenchmarkId::Slant => Self::slant(angle_deg.unwrap_or(45.0)),
        }
    }

    pub fn problem(&self) -> Result<ProblemDefinition> {
        build_problem(&self.plate)
    }

    pub fn with_arch(mut self, hidden_layers: usize, neurons: usize) -> Self {
        self.arch.hidden_layers = hidden_layers;
        self.arch.neurons_per_layer = neurons;
        self
    }

    pub fn with_activation(mut self, activation: ActivationKind) -> Self {
        self.arch.activation = activation;
        self
    }

    pub fn without_enrichment(mut self) -> Self {
        self.plate.enrichment = false;
        self
    }
}

/// Center-crack SIF reference for a finite-width plate:
/// `K = load·√(πa)·[1 − 0.025(a/b)² + 0.06(a/b)⁴]·√(sec(πa/2b))`
/// (the same polynomial serves mode I under tension and mode II under
/// shear).
pub fn exact_center_crack_k(load: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a < b) {
        return Err(Error::Domain(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    let ratio = a / b;
    let poly = 1.0 - 0.025 * ratio.powi(2) + 0.06 * ratio.powi(4);
    let sec = 1.0 / (std::f64::consts::PI * a / (2.0 * b)).cos();
    Ok(load * (std::f64::consts::PI * a).sqrt() * poly * sec.sqrt())
}

/// Empirical edge crack-opening displacement at the plate edge:
/// `Δu2 = (4σa(1−ν²)/E)·[1.46 + 3.42(1 − cos(πa/2b))]/cos²(πa/2b)`.
pub fn edge_crack_cod_reference(sigma: f64, a: f64, b: f64, nu: f64, e: f64) -> Result<f64> {
    Ok(sigma * a * (1.0 - nu * nu) / e * normalized_edge_cod_reference(a / b)?)
}

/// The same reference normalized by `σ·a·(1−ν²)/E`.
pub fn normalized_edge_cod_reference(ratio: f64) -> Result<f64> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Domain(format!("a/b must be in (0, 1), got {ratio}")));
    }
    let c = (std::f64::consts::PI * ratio / 2.0).cos();
    Ok(4.0 * (1.46 + 3.42 * (1.0 - c)) / (c * c))
}

/// Published BEM values for the slant benchmark (right tip).
fn slant_bem_reference(angle_deg: f64) -> ReferenceValues {
    const TABLE: [(f64, f64, f64); 4] = [
        (15.0, 1.9705, 0.4641),
        (30.0, 1.6020, 0.8180),
        (45.0, 1.0838, 0.9666),
        (60.0, 0.5494, 0.8551),
    ];
    for (angle, k1, k2) in TABLE {
        if (angle - angle_deg).abs() < 1e-9 {
            return ReferenceValues { k1: Some(k1), k2: Some(k2), edge_cod: None };
        }
    }
    ReferenceValues::default()
}

/// Result of one seeded training run of a benchmark.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    /// DEM intercepts at the extraction tip.
    pub k1: f64,
    pub k2: f64,
    /// SIFs converted from the learned enrichment coefficients
    /// (diagnostic; zero without enrichment).
    pub k1_from_ktilde: f64,
    pub k2_from_ktilde: f64,
    /// Normalized edge COD (edge benchmark only).
    pub edge_cod: Option<f64>,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub wall_s: f64,
    #[serde(skip)]
    pub curve: Vec<KStarSample>,
}

/// Aggregated benchmark outcome across seeds (medians, relative errors).
#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub case: BenchmarkCase,
    pub runs: Vec<SeedRun>,
    pub median_k1: f64,
    pub median_k2: f64,
    pub median_edge_cod: Option<f64>,
    pub k1_rel_err: Option<f64>,
    pub k2_rel_err: Option<f64>,
    pub edge_cod_rel_err: Option<f64>,
}

pub fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

/// Train the case once per seed, extract SIFs (and the edge COD where
/// applicable), and aggregate medians and relative errors.
pub fn run_benchmark(case: &BenchmarkCase, seeds: &[u64]) -> Result<BenchmarkReport> {
    let problem = case.problem()?;
    let samples = generate_collocation(&problem, case.grid.0, case.grid.1, None)?;
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let started = Instant::now();
        let config = TrainingConfig { iterations: case.iterations, seed, ..Default::default() };
        let (model, log) = train(&problem, &case.arch, &samples, &config)?;
        let (k1, k2) = extract_sif(&model, &problem, case.extraction_tip, case.window, 12)?;
        let curve_radii = window_radii((0.02, 0.90), problem.char_length, 40);
        let curve = kstar_curve(&model, &problem, case.extraction_tip, &curve_radii)?;
        let mu = problem.material.shear_modulus();
        let (k1_kt, k2_kt) = model
            .tips
            .get(case.extraction_tip)
            .map(|t| (ktilde_to_k(t.ktilde_i, mu), ktilde_to_k(t.ktilde_ii, mu)))
            .unwrap_or((0.0, 0.0));
        let edge_cod = if case.id == BenchmarkId::EdgeTension {
            Some(normalized_edge_cod(&model, &problem, case.load)?)
        } else {
            None
        };
        runs.push(SeedRun {
            seed,
            k1,
            k2,
            k1_from_ktilde: k1_kt,
            k2_from_ktilde: k2_kt,
            edge_cod,
            initial_loss: log.first().map(|r| r.loss.total).unwrap_or(f64::NAN),
            final_loss: log.last().map(|r| r.loss.total).unwrap_or(f64::NAN),
            wall_s: started.elapsed().as_secs_f64(),
            curve,
        });
    }

    let median_k1 = median(&mut runs.iter().map(|r| r.k1).collect::<Vec<_>>());
    let median_k2 = median(&mut runs.iter().map(|r| r.k2).collect::<Vec<_>>());
    let median_edge_cod = if case.id == BenchmarkId::EdgeTension {
        Some(median(&mut runs.iter().filter_map(|r| r.edge_cod).collect::<Vec<_>>()))
    } else {
        None
    };
    Ok(BenchmarkReport {
        k1_rel_err: case.reference.k1.map(|k| rel_err(median_k1, k)),
        k2_rel_err: case.reference.k2.map(|k| rel_err(median_k2, k)),
        edge_cod_rel_err: case
            .reference
            .edge_cod
            .zip(median_edge_cod)
            .map(|(r, v)| rel_err(v, r)),
        case: case.clone(),
        runs,
        median_k1,
        median_k2,
        median_edge_cod,
    })
}

/// Normalized crack-opening displacement at the plate edge (crack mouth):
/// `Δu2 · E / (σ · a · (1−ν²))`.
pub fn normalized_edge_cod(
    model: &crate::kinematics::EnrichedModel,
    problem: &ProblemDefinition,
    load: f64,
) -> Result<f64> {
    let mouth = problem.crack.start;
    let up = model.displacement(0, mouth)?;
    let lo = model.displacement(1, mouth)?;
    let delta = up[1] - lo[1];
    let e = problem.material.youngs_modulus;
    let nu = problem.material.poisson_ratio;
    let a = problem.crack.length();
    Ok(delta * e / (load * a * (1.0 - nu * nu)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_crack_reference_value() {
        let k = exact_center_crack_k(1.0, 1.0, 2.0).unwrap();
        assert!((k - 2.1025).abs() < 1e-4, "got {k}");
        assert!(exact_center_crack_k(1.0, 2.0, 2.0).is_err());
        // a → 0 limit: K → load·√(πa)
        let a = 1e-6;
        let k = exact_center_crack_k(1.0, a, 2.0).unwrap();
        assert!((k / (std::f64::consts::PI * a).sqrt() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn center_crack_reference_is_monotone_in_a() {
        let mut prev = 0.0;
        for i in 1..40 {
            let a = i as f64 / 20.0; // up to a/b ≈ 0.975
            let k = exact_center_crack_k(1.0, a, 2.0).unwrap();
            assert!(k > prev);
            prev = k;
        }
    }

    #[test]
    fn edge_cod_reference_values() {
        for (ratio, expected) in [(0.1, 6.1591), (0.5, 19.6935), (0.6, 33.2254)] {
            let v = normalized_edge_cod_reference(ratio).unwrap();
            assert!((v - expected).abs() < 1e-4, "a/b = {ratio}: got {v}, want {expected}");
        }
        assert!(normalized_edge_cod_reference(1.0).is_err());
    }

    #[test]
    fn edge_cod_reference_is_increasing() {
        let mut prev = 0.0;
        for i in 1..=6 {
            let v = normalized_edge_cod_reference(0.1 * i as f64).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn references_are_linear_in_load() {
        let k1 = exact_center_crack_k(1.0, 1.0, 2.0).unwrap();
        let k2 = exact_center_crack_k(2.0, 1.0, 2.0).unwrap();
        assert!((k2 - 2.0 * k1).abs() < 1e-12);
        let c1 = edge_crack_cod_reference(1.0, 0.5, 1.0, 0.3, 1.0).unwrap();
        let c2 = edge_crack_cod_reference(2.0, 0.5, 1.0, 0.3, 1.0).unwrap();
        assert!((c2 - 2.0 * c1).abs() < 1e-12);
    }

    #[test]
    fn benchmark_ids_roundtrip() {
        for id in BenchmarkId::ALL {
            assert_eq!(BenchmarkId::parse(id.name()).unwrap(), id);
        }
        assert!(matches!(
            BenchmarkId::parse("center-torsion"),
            Err(Error::UnknownBenchmark { .. })
        ));
    }

    #[test]
    fn cases_build_valid_problems() {
        for case in [
            BenchmarkCase::center_tension(),
            BenchmarkCase::center_shear(),
            BenchmarkCase::edge_tension(0.5).unwrap(),
            BenchmarkCase::slant(45.0).unwrap(),
        ] {
            let problem = case.problem().unwrap();
            assert_eq!(problem.subdomains.len(), 2);
            assert!(problem.tips.len() >= 1);
            assert!(case.extraction_tip < problem.tips.len());
        }
    }

    #[test]
    fn slant_reference_lookup() {
        let r = slant_bem_reference(45.0);
        assert_eq!(r.k1, Some(1.0838));
        assert_eq!(r.k2, Some(0.9666));
        assert_eq!(slant_bem_reference(50.0).k1, None);
    }

    #[test]
    fn median_handles_odd_and_even() {
        assert_eq!(median(&mut vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
