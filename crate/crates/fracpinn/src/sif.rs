//! Stress-intensity-factor extraction from a trained model: crack-opening
//! displacements behind the tip, the displacement extrapolation method
//! (least-squares line through `K*(r)`, intercept at `r → 0`), and the
//! conversion from learned enrichment coefficients.

use crate::geometry::{ProblemDefinition, TipSpec};
use crate::kinematics::{local_side_of_polygon, CrackTip, CutSide, EnrichedModel};
use crate::{Error, Result};

/// One COD-based SIF estimate at distance `r` behind a tip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KStarSample {
    pub r: f64,
    pub k1_star: f64,
    pub k2_star: f64,
}

/// Subdomain of the model lying on the given side of a tip's cut line.
fn subdomain_on_side(model: &EnrichedModel, tip: &TipSpec, side: CutSide) -> Result<usize> {
    let ct = CrackTip::new(tip.position, tip.orientation);
    model
        .polygons
        .iter()
        .position(|p| local_side_of_polygon(&ct, p) == side)
        .ok_or_else(|| Error::Domain(format!("no subdomain on side {side:?} of the tip")))
}

/// SIF estimates from the crack-opening displacements at distance `r`
/// behind the tip:
///
/// ```text
/// K*_I  = μ/(κ+1) √(2π/r) [(u2)θ=π − (u2)θ=−π]
/// K*_II = μ/(κ+1) √(2π/r) [(u1)θ=π − (u1)θ=−π]
/// ```
///
/// with the displacements taken in the tip-local frame. The tip geometry is
/// passed explicitly so extraction also works for models trained without
/// enrichment. `face_length` is the length of the crack face behind this
/// tip; estimates beyond it are rejected.
pub fn cod_sif(
    model: &EnrichedModel,
    tip: &TipSpec,
    r: f64,
    face_length: f64,
) -> Result<KStarSample> {
    if r > face_length + 1e-12 {
        return Err(Error::OffCrack { r, max: face_length });
    }
    if r <= 0.0 {
        return Err(Error::Domain(format!("COD radius must be positive, got {r}")));
    }
    let (sw, cw) = tip.orientation.sin_cos();
    let x = [tip.position[0] - r * cw, tip.position[1] - r * sw];

    // evaluate the jump from the θ=+π and θ=−π subdomains
    let sub_pos = subdomain_on_side(model, tip, CutSide::Positive)?;
    let sub_neg = subdomain_on_side(model, tip, CutSide::Negative)?;
    let up = model.displacement(sub_pos, x)?;
    let lo = model.displacement(sub_neg, x)?;
    let jump = [up[0] - lo[0], up[1] - lo[1]];
    // rotate into the tip frame
    let j1 = cw * jump[0] + sw * jump[1];
    let j2 = -sw * jump[0] + cw * jump[1];

    let mu = model.material.shear_modulus();
    let kappa = model.material.kolosov();
    let amp = mu / (kappa + 1.0) * (2.0 * std::f64::consts::PI / r).sqrt();
    Ok(KStarSample { r, k1_star: amp * j2, k2_star: amp * j1 })
}

/// Least-squares straight line `K*(r) = K + c·r` over the samples whose
/// `r / char_length` falls inside `window`; returns the mode I and II
/// intercepts.
pub fn extrapolate_sif(
    samples: &[KStarSample],
    window: (f64, f64),
    char_length: f64,
) -> Result<(f64, f64)> {
    let selected: Vec<&KStarSample> = samples
        .iter()
        .filter(|s| {
            let ratio = s.r / char_length;
            ratio >= window.0 - 1e-12 && ratio <= window.1 + 1e-12
        })
        .collect();
    if selected.len() < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: selected.len() });
    }
    let intercept = |value: fn(&KStarSample) -> f64| -> f64 {
        let n = selected.len() as f64;
        let sx: f64 = selected.iter().map(|s| s.r).sum();
        let sy: f64 = selected.iter().map(|s| value(s)).sum();
        let sxx: f64 = selected.iter().map(|s| s.r * s.r).sum();
        let sxy: f64 = selected.iter().map(|s| s.r * value(s)).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        (sy - slope * sx) / n
    };
    Ok((intercept(|s| s.k1_star), intercept(|s| s.k2_star)))
}

/// Convert a learned enrichment coefficient to a stress intensity factor:
/// `K = 2μ√(2π)·K̃` (the same factor for both modes).
pub fn ktilde_to_k(ktilde: f64, mu: f64) -> f64 {
    2.0 * mu * (2.0 * std::f64::consts::PI).sqrt() * ktilde
}

/// Equally spaced COD sampling radii covering `window · char_length`.
pub fn window_radii(window: (f64, f64), char_length: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let t = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
            (window.0 + t * (window.1 - window.0)) * char_length
        })
        .collect()
}

/// `K*(r)` samples of a trained model at the given radii behind one tip.
pub fn kstar_curve(
    model: &EnrichedModel,
    problem: &ProblemDefinition,
    tip_index: usize,
    radii: &[f64],
) -> Result<Vec<KStarSample>> {
    let tip = problem
        .tips
        .get(tip_index)
        .ok_or_else(|| Error::Domain(format!("no tip with index {tip_index}")))?;
    let face = problem.face_length(tip);
    radii.iter().map(|&r| cod_sif(model, tip, r, face)).collect()
}

/// DEM extraction in one call: sample `K*(r)` at `n_radii` radii inside the
/// window and return both intercepts.
pub fn extract_sif(
    model: &EnrichedModel,
    problem: &ProblemDefinition,
    tip_index: usize,
    window: (f64, f64),
    n_radii: usize,
) -> Result<(f64, f64)> {
    let radii = window_radii(window, problem.char_length, n_radii);
    let samples = kstar_curve(model, problem, tip_index, &radii)?;
    extrapolate_sif(&samples, window, problem.char_length)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrapolation_recovers_exact_line() {
        let samples: Vec<KStarSample> = (0..12)
            .map(|i| {
                let r = 0.05 + 0.25 * i as f64 / 11.0;
                KStarSample { r, k1_star: 2.0 + 0.5 * r, k2_star: -1.0 + 3.0 * r }
            })
            .collect();
        let (k1, k2) = extrapolate_sif(&samples, (0.05, 0.30), 1.0).unwrap();
        assert!((k1 - 2.0).abs() < 1e-12);
        assert!((k2 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn extrapolation_of_constant_samples() {
        let samples: Vec<KStarSample> = (1..=8)
            .map(|i| KStarSample { r: 0.03 * i as f64, k1_star: 1.8, k2_star: 0.0 })
            .collect();
        let (k1, k2) = extrapolate_sif(&samples, (0.0, 1.0), 1.0).unwrap();
        assert!((k1 - 1.8).abs() < 1e-12);
        assert!(k2.abs() < 1e-12);
    }

    #[test]
    fn extrapolation_is_order_invariant() {
        let mut samples: Vec<KStarSample> = (0..10)
            .map(|i| {
                let r = 0.05 + 0.02 * i as f64;
                KStarSample { r, k1_star: 1.0 + 0.1 * r + 0.001 * (i as f64).sin(), k2_star: 0.0 }
            })
            .collect();
        let a = extrapolate_sif(&samples, (0.0, 1.0), 1.0).unwrap();
        samples.reverse();
        let b = extrapolate_sif(&samples, (0.0, 1.0), 1.0).unwrap();
        assert!((a.0 - b.0).abs() < 1e-12);
    }

    #[test]
    fn insufficient_samples_error() {
        let samples = vec![
            KStarSample { r: 0.1, k1_star: 1.0, k2_star: 0.0 },
            KStarSample { r: 0.2, k1_star: 1.0, k2_star: 0.0 },
        ];
        assert!(matches!(
            extrapolate_sif(&samples, (0.0, 1.0), 1.0),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn ktilde_conversion() {
        assert_eq!(ktilde_to_k(0.0, 0.5), 0.0);
        let mu = 1.0 / (2.0 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((ktilde_to_k(1.0, mu) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn window_radii_spacing() {
        let radii = window_radii((0.05, 0.30), 2.0, 12);
        assert_eq!(radii.len(), 12);
        assert!((radii[0] - 0.1).abs() < 1e-15);
        assert!((radii[11] - 0.6).abs() < 1e-15);
        let d0 = radii[1] - radii[0];
        for w in radii.windows(2) {
            assert!((w[1] - w[0] - d0).abs() < 1e-12);
        }
    }
}
