//! File formats: model checkpoints, CSV exports, and line-delimited
//! training logs. Every file is written atomically (temp file in the target
//! directory, then rename), so output files are either complete or absent.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::autodiff::spatial_jets;
use crate::elasticity::FieldSample;
use crate::geometry::ProblemDefinition;
use crate::kinematics::EnrichedModel;
use crate::network::{ActivationKind, Architecture};
use crate::sif::KStarSample;
use crate::training::TrainingLogRecord;
use crate::{Error, Result};

/// Write `content` to `path` atomically.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp: PathBuf = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        std::process::id()
    ));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

const CHECKPOINT_MAGIC: &str = "fracpinn-checkpoint v1";

/// Save a model checkpoint: a text header carrying the architecture and the
/// full problem definition, followed by one parameter per line in the flat
/// ordering (17 significant digits, which round-trips f64 exactly).
pub fn save_checkpoint(
    path: &Path,
    model: &EnrichedModel,
    problem: &ProblemDefinition,
    arch: &Architecture,
) -> Result<()> {
    let params = model.flat_params();
    let mut out = String::new();
    let _ = writeln!(out, "{CHECKPOINT_MAGIC}");
    let _ = writeln!(
        out,
        "arch {} {} {}",
        arch.hidden_layers,
        arch.neurons_per_layer,
        arch.activation.name()
    );
    let problem_json = serde_json::to_string(problem)
        .map_err(|e| Error::Checkpoint(format!("problem serialization failed: {e}")))?;
    let _ = writeln!(out, "problem {problem_json}");
    let _ = writeln!(out, "params {}", params.len());
    for p in &params {
        let _ = writeln!(out, "{p:.17e}");
    }
    write_atomic(path, &out)
}

/// Load a checkpoint saved by [`save_checkpoint`].
pub fn load_checkpoint(path: &Path) -> Result<(EnrichedModel, ProblemDefinition, Architecture)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Checkpoint(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let magic = lines.next().unwrap_or_default();
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint(format!("bad header '{magic}'")));
    }
    let arch_line = lines
        .next()
        .and_then(|l| l.strip_prefix("arch "))
        .ok_or_else(|| Error::Checkpoint("missing arch line".into()))?;
    let mut parts = arch_line.split_whitespace();
    let hidden: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Checkpoint("bad hidden layer count".into()))?;
    let neurons: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Checkpoint("bad neuron count".into()))?;
    let activation = ActivationKind::parse(
        parts.next().ok_or_else(|| Error::Checkpoint("missing activation".into()))?,
    )?;
    let arch = Architecture::new(hidden, neurons, activation);

    let problem_line = lines
        .next()
        .and_then(|l| l.strip_prefix("problem "))
        .ok_or_else(|| Error::Checkpoint("missing problem line".into()))?;
    let problem: ProblemDefinition = serde_json::from_str(problem_line)
        .map_err(|e| Error::Checkpoint(format!("problem deserialization failed: {e}")))?;

    let count: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("params "))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Checkpoint("missing params line".into()))?;
    let mut params = Vec::with_capacity(count);
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        params.push(
            line.trim()
                .parse::<f64>()
                .map_err(|e| Error::Checkpoint(format!("bad parameter '{line}': {e}")))?,
        );
    }
    if params.len() != count {
        return Err(Error::Checkpoint(format!(
            "expected {count} parameters, found {}",
            params.len()
        )));
    }
    let mut model = EnrichedModel::init(&problem, &arch, 0)?;
    if model.param_count() != count {
        return Err(Error::Checkpoint(format!(
            "parameter count {} does not match the stored problem/architecture ({})",
            count,
            model.param_count()
        )));
    }
    model.set_flat_params(&params);
    Ok((model, problem, arch))
}

/// Training log as line-delimited JSON records.
pub fn render_train_log(log: &[TrainingLogRecord]) -> String {
    let mut out = String::new();
    for record in log {
        out.push_str(&serde_json::to_string(record).expect("log record serialization"));
        out.push('\n');
    }
    out
}

/// `K*(r)` curve as CSV (`r,k1_star,k2_star`).
pub fn render_kstar_csv(samples: &[KStarSample]) -> String {
    let mut out = String::from("r,k1_star,k2_star\n");
    for s in samples {
        let _ = writeln!(out, "{},{},{}", s.r, s.k1_star, s.k2_star);
    }
    out
}

/// Per-tip SIF report as CSV.
pub fn render_sif_csv(rows: &[SifRow]) -> String {
    let mut out = String::from("tip,k1_dem,k2_dem,k1_from_ktilde,k2_from_ktilde\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.tip, r.k1_dem, r.k2_dem, r.k1_from_ktilde, r.k2_from_ktilde
        );
    }
    out
}

/// One row of `sif.csv`.
#[derive(Debug, Clone, Copy)]
pub struct SifRow {
    pub tip: usize,
    pub k1_dem: f64,
    pub k2_dem: f64,
    pub k1_from_ktilde: f64,
    pub k2_from_ktilde: f64,
}

/// Evaluate the model over an `m×n` grid covering the problem's bounding
/// box and render the field CSV
/// (`x1,x2,u1,u2,s11,s22,s12,r1,r2`). Points outside every subdomain or
/// inside the tip exclusion radius keep empty field columns.
pub fn render_fields_csv(
    model: &EnrichedModel,
    problem: &ProblemDefinition,
    m: usize,
    n: usize,
) -> Result<String> {
    if m < 2 || n < 2 {
        return Err(Error::Config(format!("field grid must be at least 2×2, got {m}×{n}")));
    }
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &problem.subdomains {
        for v in &s.polygon.vertices {
            x_min = x_min.min(v[0]);
            x_max = x_max.max(v[0]);
            y_min = y_min.min(v[1]);
            y_max = y_max.max(v[1]);
        }
    }
    let mut out = String::from("x1,x2,u1,u2,s11,s22,s12,r1,r2\n");
    for j in 0..n {
        let y = y_min + (y_max - y_min) * j as f64 / (n - 1) as f64;
        for i in 0..m {
            let x = x_min + (x_max - x_min) * i as f64 / (m - 1) as f64;
            let p = [x, y];
            let near_tip = problem
                .tips
                .iter()
                .any(|t| (p[0] - t.position[0]).hypot(p[1] - t.position[1]) < problem.eps_tip());
            let sub = problem.locate(p);
            match (near_tip, sub) {
                (false, Some(sub)) => {
                    let (u1, u2) = spatial_jets(model, sub, p)?;
                    let fs =
                        FieldSample::from_jets(p, &u1, &u2, &model.material, problem.body_force);
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{}",
                        p[0],
                        p[1],
                        fs.u[0],
                        fs.u[1],
                        fs.stress.s11,
                        fs.stress.s22,
                        fs.stress.s12,
                        fs.residual.0,
                        fs.residual.1
                    );
                }
                _ => {
                    let _ = writeln!(out, "{},{},,,,,,,", p[0], p[1]);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elasticity::{Material, PlaneAssumption};
    use crate::geometry::{
        build_problem, CrackGeometry, EdgeConditions, PlateSpec, SegmentCondition, TipSelection,
    };

    fn small_problem() -> ProblemDefinition {
        build_problem(&PlateSpec {
            material: Material::new(1.0, 0.3, PlaneAssumption::PlaneStrain).unwrap(),
            rect: [0.0, 2.0, -2.0, 2.0],
            crack: CrackGeometry { start: [0.0, 0.0], end: [1.0, 0.0] },
            tips: TipSelection::End,
            edges: EdgeConditions {
                left: vec![SegmentCondition::DirichletU1(0.0), SegmentCondition::Traction2(0.0)],
                right: vec![SegmentCondition::Traction([0.0, 0.0])],
                bottom: vec![SegmentCondition::Traction([0.0, -1.0])],
                top: vec![SegmentCondition::Traction([0.0, 1.0])],
            },
            body_force: [0.0, 0.0],
            char_length: None,
            enrichment: true,
        })
        .unwrap()
    }

    #[test]
    fn checkpoint_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let problem = small_problem();
        let arch = Architecture::new(2, 5, ActivationKind::Swish);
        let mut model = EnrichedModel::init(&problem, &arch, 42).unwrap();
        // make the tip coefficients non-trivial
        let mut params = model.flat_params();
        let n = params.len();
        params[n - 2] = 1.2345678901234567;
        params[n - 1] = -0.000012345;
        model.set_flat_params(&params);

        let path = dir.path().join("model.ckpt");
        save_checkpoint(&path, &model, &problem, &arch).unwrap();
        let (loaded, loaded_problem, loaded_arch) = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.flat_params(), model.flat_params());
        assert_eq!(loaded_problem, problem);
        assert_eq!(loaded_arch, arch);
    }

    #[test]
    fn corrupt_checkpoint_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        std::fs::write(&path, "not a checkpoint\n").unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Checkpoint(_))));
        assert!(load_checkpoint(&dir.path().join("missing.ckpt")).is_err());
    }

    #[test]
    fn fields_csv_zero_model_is_zero() {
        let problem = small_problem();
        let arch = Architecture::new(1, 2, ActivationKind::Swish);
        let mut model = EnrichedModel::init(&problem, &arch, 1).unwrap();
        let zeros = vec![0.0; model.param_count()];
        model.set_flat_params(&zeros);
        let csv = render_fields_csv(&model, &problem, 6, 6).unwrap();
        let mut data_rows = 0;
        for line in csv.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 9);
            if !cells[2].is_empty() {
                data_rows += 1;
                for value in &cells[2..] {
                    assert_eq!(value.parse::<f64>().unwrap(), 0.0);
                }
            }
        }
        assert!(data_rows > 0);
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_atomic(&path, "a\n").unwrap();
        write_atomic(&path, "b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "b\n");
        // no stray temp files
        let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(entries.len(), 1);
    }
}
