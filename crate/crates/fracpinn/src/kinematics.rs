//! Crack-tip local frames, branch-cut-aware polar coordinates, and the
//! singular enrichment terms of the displacement ansatz.
//!
//! Each tip owns a local frame whose `θ = 0` ray points ahead of the tip
//! (along `orientation`); the branch cut of `θ` lies exactly along the
//! crack faces, `θ = ±π`. Points on the cut are disambiguated by the side
//! tag of the owning subdomain. Enrichment derivatives are formed in closed
//! form in the `(r, θ)` frame and chained through the polar map, never by
//! differentiating `sqrt`/`atan2` generically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::SpatialJet;
use crate::elasticity::Material;
use crate::geometry::{Polygon, ProblemDefinition};
use crate::network::{init_network_from_rng, Architecture, Network};
use crate::{Error, Result};

/// Relative half-width of the on-cut detection band around `θ = ±π`.
const CUT_TOL: f64 = 1e-9;

/// Which side of a tip's branch cut an evaluation approaches from:
/// `Positive` is the local `+ξ2` half-plane (`θ → +π` on the cut).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSide {
    Positive,
    Negative,
}

impl CutSide {
    pub fn sign(&self) -> f64 {
        match self {
            CutSide::Positive => 1.0,
            CutSide::Negative => -1.0,
        }
    }
}

/// A crack tip with its local frame and the two trainable enrichment
/// coefficients (scaled SIFs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrackTip {
    pub position: [f64; 2],
    /// Direction of the "ahead" ray (`θ = 0`), normalized to `(−π, π]`.
    /// The crack faces run behind the tip along `orientation + π`.
    pub orientation: f64,
    pub ktilde_i: f64,
    pub ktilde_ii: f64,
}

impl CrackTip {
    pub fn new(position: [f64; 2], orientation: f64) -> Self {
        Self { position, orientation: normalize_angle(orientation), ktilde_i: 0.0, ktilde_ii: 0.0 }
    }
}

/// Wrap an angle into `(−π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = a % two_pi;
    if a <= -std::f64::consts::PI {
        a += two_pi;
    } else if a > std::f64::consts::PI {
        a -= two_pi;
    }
    a
}

/// Tip-local polar coordinates of `x`, with `θ ∈ (−π, π]` measured from the
/// tip's ahead direction.
///
/// Points on the mathematical crack line behind the tip sit on the branch
/// cut; they receive `θ = ±π` according to `side`, and an error when no
/// side is declared. Points within the tip exclusion radius are rejected.
pub fn local_polar(
    tip: &CrackTip,
    x: [f64; 2],
    side: Option<CutSide>,
    eps_tip: f64,
) -> Result<(f64, f64)> {
    let (sw, cw) = tip.orientation.sin_cos();
    let dx = x[0] - tip.position[0];
    let dy = x[1] - tip.position[1];
    let xi1 = cw * dx + sw * dy;
    let xi2 = -sw * dx + cw * dy;
    let r = xi1.hypot(xi2);
    if r < eps_tip {
        return Err(Error::AtTip { r, eps_tip });
    }
    let theta = if xi2.abs() <= CUT_TOL * (1.0 + r) {
        if xi1 > 0.0 {
            0.0
        } else {
            match side {
                Some(s) => s.sign() * std::f64::consts::PI,
                None => return Err(Error::AmbiguousCut { x }),
            }
        }
    } else {
        xi2.atan2(xi1)
    };
    Ok((r, theta))
}

/// 1D second-order jet used for the angular factors of the enrichment.
#[derive(Debug, Clone, Copy)]
struct D2 {
    v: f64,
    d1: f64,
    d2: f64,
}

impl D2 {
    fn add_const(self, c: f64) -> D2 {
        D2 { v: self.v + c, ..self }
    }
    fn neg(self) -> D2 {
        D2 { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
    fn mul(self, o: D2) -> D2 {
        D2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

/// Angular factors `g(θ)` of the four enrichment fields, with `θ`
/// derivatives: mode I `(e1, e2)` then mode II `(e1, e2)`.
///
/// The mode-II `e2` factor is `cos(θ/2)(2 − κ − cosθ)`: this is the sign
/// that makes the mode-II field an equilibrium solution consistent with the
/// near-tip stresses (see the field-consistency oracle in the test suite).
fn angular_basis(theta: f64, kappa: f64) -> [D2; 4] {
    let (s, c) = theta.sin_cos();
    let (sh, ch) = (theta / 2.0).sin_cos();
    let cos_t = D2 { v: c, d1: -s, d2: -c };
    let sin_half = D2 { v: sh, d1: 0.5 * ch, d2: -0.25 * sh };
    let cos_half = D2 { v: ch, d1: -0.5 * sh, d2: -0.25 * ch };
    let kappa_minus_cos = cos_t.neg().add_const(kappa);
    [
        kappa_minus_cos.mul(cos_half),
        kappa_minus_cos.mul(sin_half),
        sin_half.mul(cos_t.add_const(kappa + 2.0)),
        cos_half.mul(cos_t.neg().add_const(2.0 - kappa)),
    ]
}

/// Unit-coefficient enrichment fields of one tip, as global-frame jets.
#[derive(Debug, Clone, Copy)]
pub struct EnrichmentBasis {
    /// Jets of the mode-I field's two global displacement components.
    pub mode_i: [SpatialJet; 2],
    /// Jets of the mode-II field's two global displacement components.
    pub mode_ii: [SpatialJet; 2],
}

/// Rotate a jet's derivative indices from the tip frame to global axes
/// (`x = tip + R ξ` with `R = [[cw, −sw], [sw, cw]]`).
fn rotate_jet_coords(j: SpatialJet, cw: f64, sw: f64) -> SpatialJet {
    let (a, b, c) = (j.hxx, j.hxy, j.hyy);
    SpatialJet {
        value: j.value,
        gx: cw * j.gx - sw * j.gy,
        gy: sw * j.gx + cw * j.gy,
        hxx: cw * cw * a - 2.0 * cw * sw * b + sw * sw * c,
        hxy: cw * sw * a + (cw * cw - sw * sw) * b - sw * cw * c,
        hyy: sw * sw * a + 2.0 * sw * cw * b + cw * cw * c,
    }
}

/// Jets of the four enrichment basis fields (unit `K̃`) at `x`, in the
/// global frame. `side` selects the branch for on-cut points.
pub fn enrichment_jets(
    tip: &CrackTip,
    kappa: f64,
    x: [f64; 2],
    side: CutSide,
    eps_tip: f64,
) -> Result<EnrichmentBasis> {
    let (r, theta) = local_polar(tip, x, Some(side), eps_tip)?;
    let sqrt_r = r.sqrt();
    // radial factor √r and its r-derivatives
    let fr = D2 { v: sqrt_r, d1: 0.5 / sqrt_r, d2: -0.25 / (r * sqrt_r) };
    let angular = angular_basis(theta, kappa);

    // polar-to-local-Cartesian chain at (r, θ)
    let (q, p) = theta.sin_cos();
    let r1 = p;
    let r2 = q;
    let t1 = -q / r;
    let t2 = p / r;
    let r11 = q * q / r;
    let r12 = -p * q / r;
    let r22 = p * p / r;
    let t11 = 2.0 * p * q / (r * r);
    let t12 = (q * q - p * p) / (r * r);
    let t22 = -2.0 * p * q / (r * r);

    let mut local = [SpatialJet::zero(); 4];
    for (k, g) in angular.iter().enumerate() {
        let e_v = fr.v * g.v;
        let e_r = fr.d1 * g.v;
        let e_t = fr.v * g.d1;
        let e_rr = fr.d2 * g.v;
        let e_rt = fr.d1 * g.d1;
        let e_tt = fr.v * g.d2;
        local[k] = SpatialJet {
            value: e_v,
            gx: e_r * r1 + e_t * t1,
            gy: e_r * r2 + e_t * t2,
            hxx: e_rr * r1 * r1 + 2.0 * e_rt * r1 * t1 + e_tt * t1 * t1 + e_r * r11 + e_t * t11,
            hxy: e_rr * r1 * r2
                + e_rt * (r1 * t2 + r2 * t1)
                + e_tt * t1 * t2
                + e_r * r12
                + e_t * t12,
            hyy: e_rr * r2 * r2 + 2.0 * e_rt * r2 * t2 + e_tt * t2 * t2 + e_r * r22 + e_t * t22,
        };
    }

    // rotate derivative indices, then combine local vector components into
    // global ones (both maps are linear, order does not matter)
    let (sw, cw) = tip.orientation.sin_cos();
    let rot: Vec<SpatialJet> = local.iter().map(|j| rotate_jet_coords(*j, cw, sw)).collect();
    let combine = |e1: &SpatialJet, e2: &SpatialJet| -> [SpatialJet; 2] {
        let mut g1 = e1.scaled(cw);
        g1.add_scaled(e2, -sw);
        let mut g2 = e1.scaled(sw);
        g2.add_scaled(e2, cw);
        [g1, g2]
    };
    Ok(EnrichmentBasis {
        mode_i: combine(&rot[0], &rot[1]),
        mode_ii: combine(&rot[2], &rot[3]),
    })
}

/// Enrichment displacement of one tip at `x` (global frame), weighted by
/// the tip's current `K̃` coefficients.
pub fn enrichment_displacement(
    tip: &CrackTip,
    kappa: f64,
    x: [f64; 2],
    side: Option<CutSide>,
    eps_tip: f64,
) -> Result<[f64; 2]> {
    let (r, theta) = local_polar(tip, x, side, eps_tip)?;
    let sqrt_r = r.sqrt();
    let g = angular_basis(theta, kappa);
    let e1 = sqrt_r * (tip.ktilde_i * g[0].v + tip.ktilde_ii * g[2].v);
    let e2 = sqrt_r * (tip.ktilde_i * g[1].v + tip.ktilde_ii * g[3].v);
    let (sw, cw) = tip.orientation.sin_cos();
    Ok([cw * e1 - sw * e2, sw * e1 + cw * e2])
}

/// The trainable displacement model: one raw network per subdomain plus
/// shared crack tips whose enrichment coefficients are trained alongside
/// the network parameters.
#[derive(Debug, Clone)]
pub struct EnrichedModel {
    pub networks: Vec<Network>,
    pub tips: Vec<CrackTip>,
    pub material: Material,
    /// Evaluation domains, indexed by subdomain id.
    pub polygons: Vec<Polygon>,
    /// Branch-cut side of each tip as seen from each subdomain
    /// (`tip_sides[subdomain][tip]`).
    pub tip_sides: Vec<Vec<CutSide>>,
    pub eps_tip: f64,
}

impl EnrichedModel {
    /// Initialize networks (Glorot-uniform, zero biases) and zeroed
    /// enrichment coefficients for a problem. All randomness comes from one
    /// seeded stream consumed in subdomain order, so the result is
    /// deterministic under the seed.
    pub fn init(problem: &ProblemDefinition, arch: &Architecture, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut networks = Vec::with_capacity(problem.subdomains.len());
        for _ in &problem.subdomains {
            networks.push(init_network_from_rng(
                arch.hidden_layers,
                arch.neurons_per_layer,
                arch.activation,
                &mut rng,
            )?);
        }
        let tips: Vec<CrackTip> = if problem.enrichment {
            problem.tips.iter().map(|t| CrackTip::new(t.position, t.orientation)).collect()
        } else {
            Vec::new()
        };
        let polygons: Vec<Polygon> =
            problem.subdomains.iter().map(|s| s.polygon.clone()).collect();
        let tip_sides = polygons
            .iter()
            .map(|poly| tips.iter().map(|tip| local_side_of_polygon(tip, poly)).collect())
            .collect();
        Ok(Self { networks, tips, material: problem.material, polygons, tip_sides, eps_tip: problem.eps_tip() })
    }

    pub fn param_count(&self) -> usize {
        self.networks.iter().map(Network::param_count).sum::<usize>() + 2 * self.tips.len()
    }

    /// All trainable parameters in the documented flat ordering.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for net in &self.networks {
            net.write_params(&mut out);
        }
        for tip in &self.tips {
            out.push(tip.ktilde_i);
            out.push(tip.ktilde_ii);
        }
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) {
        debug_assert_eq!(flat.len(), self.param_count());
        let mut offset = 0;
        for net in &mut self.networks {
            offset += net.read_params(&flat[offset..]);
        }
        for tip in &mut self.tips {
            tip.ktilde_i = flat[offset];
            tip.ktilde_ii = flat[offset + 1];
            offset += 2;
        }
    }

    /// Start of each network's parameter block in the flat ordering.
    pub(crate) fn network_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.networks.len() + 1);
        let mut acc = 0;
        for net in &self.networks {
            offsets.push(acc);
            acc += net.param_count();
        }
        offsets.push(acc);
        offsets
    }

    /// Total enriched displacement at `x` inside the named subdomain.
    pub fn displacement(&self, subdomain: usize, x: [f64; 2]) -> Result<[f64; 2]> {
        let poly = self
            .polygons
            .get(subdomain)
            .ok_or(Error::OutsideSubdomain { subdomain, x })?;
        if !poly.contains_with_tol(x, 1e-9) {
            return Err(Error::OutsideSubdomain { subdomain, x });
        }
        let net = &self.networks[subdomain];
        let mut u = net.forward(x);
        let kappa = self.material.kolosov();
        for (t, tip) in self.tips.iter().enumerate() {
            let side = self.tip_sides[subdomain][t];
            let e = enrichment_displacement(tip, kappa, x, Some(side), self.eps_tip)?;
            u[0] += e[0];
            u[1] += e[1];
        }
        Ok(u)
    }
}

/// Raw network output of that subdomain's network plus every tip's
/// enrichment displacement.
pub fn enriched_displacement(
    model: &EnrichedModel,
    subdomain: usize,
    x: [f64; 2],
) -> Result<[f64; 2]> {
    model.displacement(subdomain, x)
}

/// Which side of a tip's cut line a polygon occupies. Subdomains are built
/// by cutting along the full crack line, so every polygon lies entirely in
/// one local half-plane; the vertex farthest from the line decides.
pub(crate) fn local_side_of_polygon(tip: &CrackTip, poly: &Polygon) -> CutSide {
    let (sw, cw) = tip.orientation.sin_cos();
    let mut best = 0.0_f64;
    for v in &poly.vertices {
        let xi2 = -sw * (v[0] - tip.position[0]) + cw * (v[1] - tip.position[1]);
        if xi2.abs() > best.abs() {
            best = xi2;
        }
    }
    if best >= 0.0 {
        CutSide::Positive
    } else {
        CutSide::Negative
    }
}
