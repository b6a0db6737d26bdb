//! Exact derivatives for the enriched displacement model.
//!
//! Spatial derivatives are propagated forward through the network as
//! second-order jets (value, gradient, Hessian with respect to `(x1, x2)`);
//! the enrichment terms contribute closed-form jets from the kinematics
//! module. Parameter gradients of the scalar training loss come from a
//! reverse pass over the same jet-carrying forward computation, which needs
//! activation derivatives up to third order. Finite differences appear only
//! in tests.

use crate::kinematics::EnrichedModel;
use crate::network::Network;
use crate::training::LossSpec;
use crate::{Error, Result};

/// Value, first and second spatial derivatives of a scalar field at a point.
///
/// The Hessian is stored once (`hxy`) and mirrored by [`SpatialJet::hess`],
/// so symmetry holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpatialJet {
    pub value: f64,
    pub gx: f64,
    pub gy: f64,
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

impl SpatialJet {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        Self { value, ..Self::default() }
    }

    /// Jet of the coordinate function `x1` evaluated at `value`.
    pub fn seed_x(value: f64) -> Self {
        Self { value, gx: 1.0, ..Self::default() }
    }

    /// Jet of the coordinate function `x2` evaluated at `value`.
    pub fn seed_y(value: f64) -> Self {
        Self { value, gy: 1.0, ..Self::default() }
    }

    pub fn grad(&self) -> [f64; 2] {
        [self.gx, self.gy]
    }

    pub fn hess(&self) -> [[f64; 2]; 2] {
        [[self.hxx, self.hxy], [self.hxy, self.hyy]]
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gx.is_finite()
            && self.gy.is_finite()
            && self.hxx.is_finite()
            && self.hxy.is_finite()
            && self.hyy.is_finite()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            value: self.value * s,
            gx: self.gx * s,
            gy: self.gy * s,
            hxx: self.hxx * s,
            hxy: self.hxy * s,
            hyy: self.hyy * s,
        }
    }

    /// `self += other * s`, the hot-loop accumulation primitive.
    #[inline(always)]
    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        self.value += other.value * s;
        self.gx += other.gx * s;
        self.gy += other.gy * s;
        self.hxx += other.hxx * s;
        self.hxy += other.hxy * s;
        self.hyy += other.hyy * s;
    }

    /// Component-wise inner product, used when pulling cotangents back
    /// through a linear layer.
    #[inline(always)]
    pub(crate) fn dot(&self, other: &Self) -> f64 {
        self.value * other.value
            + self.gx * other.gx
            + self.gy * other.gy
            + self.hxx * other.hxx
            + self.hxy * other.hxy
            + self.hyy * other.hyy
    }
}

impl std::ops::Add for SpatialJet {
    type Output = SpatialJet;
    fn add(self, rhs: SpatialJet) -> SpatialJet {
        let mut out = self;
        out.add_scaled(&rhs, 1.0);
        out
    }
}

impl std::ops::Sub for SpatialJet {
    type Output = SpatialJet;
    fn sub(self, rhs: SpatialJet) -> SpatialJet {
        let mut out = self;
        out.add_scaled(&rhs, -1.0);
        out
    }
}

impl std::ops::Mul<f64> for SpatialJet {
    type Output = SpatialJet;
    fn mul(self, rhs: f64) -> SpatialJet {
        self.scaled(rhs)
    }
}

/// Gradient of the scalar loss with respect to every trainable parameter,
/// in the model's flat ordering (all networks in subdomain order, each
/// layer's weights row-major then biases; then per tip `ktilde_i`,
/// `ktilde_ii`).
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterGradient(Vec<f64>);

impl ParameterGradient {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|g| g.is_finite())
    }
}

impl From<Vec<f64>> for ParameterGradient {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Reusable per-network evaluation buffers: activations `a[0..=L]` and
/// pre-activations `z[0..L]` for the forward pass, cotangent buffers for
/// the reverse pass.
#[derive(Debug, Clone)]
pub(crate) struct NetScratch {
    a: Vec<Vec<SpatialJet>>,
    z: Vec<Vec<SpatialJet>>,
    /// Activation derivatives `(σ, σ', σ'', σ''')` cached by the forward
    /// pass so the reverse pass avoids recomputing exponentials.
    act: Vec<Vec<[f64; 4]>>,
    cot: Vec<SpatialJet>,
    cot_prev: Vec<SpatialJet>,
}

impl NetScratch {
    pub(crate) fn new(net: &Network) -> Self {
        let mut a = Vec::with_capacity(net.layers.len() + 1);
        a.push(vec![SpatialJet::zero(); 2]);
        let mut z = Vec::with_capacity(net.layers.len());
        let mut act = Vec::with_capacity(net.layers.len());
        for layer in &net.layers {
            z.push(vec![SpatialJet::zero(); layer.output_width]);
            act.push(vec![[0.0; 4]; layer.output_width]);
            a.push(vec![SpatialJet::zero(); layer.output_width]);
        }
        let w = net.max_width();
        Self { a, z, act, cot: vec![SpatialJet::zero(); w], cot_prev: vec![SpatialJet::zero(); w] }
    }
}

/// Chain rule for `a = σ(z)` on a second-order jet, given the cached
/// activation derivatives at `z.value`.
#[inline(always)]
fn activation_jet(d: &[f64; 4], z: &SpatialJet) -> SpatialJet {
    let (v, d1, d2) = (d[0], d[1], d[2]);
    SpatialJet {
        value: v,
        gx: d1 * z.gx,
        gy: d1 * z.gy,
        hxx: d2 * z.gx * z.gx + d1 * z.hxx,
        hxy: d2 * z.gx * z.gy + d1 * z.hxy,
        hyy: d2 * z.gy * z.gy + d1 * z.hyy,
    }
}

/// Pull an output cotangent back through `a = σ(z)`. Every output jet
/// component depends on `z.value` through the activation derivatives, which
/// is where the third derivative enters.
#[inline(always)]
fn activation_pullback(d: &[f64; 4], z: &SpatialJet, ca: &SpatialJet) -> SpatialJet {
    let (s1, s2, s3) = (d[1], d[2], d[3]);
    SpatialJet {
        value: ca.value * s1
            + s2 * (ca.gx * z.gx + ca.gy * z.gy)
            + ca.hxx * (s3 * z.gx * z.gx + s2 * z.hxx)
            + ca.hxy * (s3 * z.gx * z.gy + s2 * z.hxy)
            + ca.hyy * (s3 * z.gy * z.gy + s2 * z.hyy),
        gx: ca.gx * s1 + 2.0 * s2 * z.gx * ca.hxx + s2 * z.gy * ca.hxy,
        gy: ca.gy * s1 + 2.0 * s2 * z.gy * ca.hyy + s2 * z.gx * ca.hxy,
        hxx: ca.hxx * s1,
        hxy: ca.hxy * s1,
        hyy: ca.hyy * s1,
    }
}

/// Jet forward pass through one network, caching everything the reverse
/// pass needs. Returns the two raw output jets.
pub(crate) fn net_forward(
    net: &Network,
    x: [f64; 2],
    scratch: &mut NetScratch,
) -> (SpatialJet, SpatialJet) {
    scratch.a[0][0] = SpatialJet::seed_x(x[0]);
    scratch.a[0][1] = SpatialJet::seed_y(x[1]);
    for (l, layer) in net.layers.iter().enumerate() {
        let (head, tail) = scratch.a.split_at_mut(l + 1);
        let a_in = &head[l];
        let a_out = &mut tail[0];
        let z = &mut scratch.z[l];
        let act = &mut scratch.act[l];
        for i in 0..layer.output_width {
            let row = &layer.weights[i * layer.input_width..(i + 1) * layer.input_width];
            let mut acc = SpatialJet::constant(layer.biases[i]);
            for (w, aj) in row.iter().zip(a_in.iter()) {
                acc.add_scaled(aj, *w);
            }
            z[i] = acc;
            a_out[i] = match layer.activation {
                Some(kind) => {
                    let d = kind.eval3(acc.value);
                    act[i] = [d.0, d.1, d.2, d.3];
                    activation_jet(&act[i], &acc)
                }
                None => acc,
            };
        }
    }
    let out = scratch.a.last().unwrap();
    (out[0], out[1])
}

/// Reverse pass over the cached forward computation. `cot1`/`cot2` are the
/// loss cotangents of the two output jets; gradients accumulate into
/// `grad`, which must cover exactly this network's parameters in the flat
/// ordering.
pub(crate) fn net_backward(
    net: &Network,
    scratch: &mut NetScratch,
    cot1: SpatialJet,
    cot2: SpatialJet,
    grad: &mut [f64],
) {
    debug_assert_eq!(grad.len(), net.param_count());
    scratch.cot[0] = cot1;
    scratch.cot[1] = cot2;
    // parameter offsets of each layer within `grad`
    let mut offset = grad.len();
    for (l, layer) in net.layers.iter().enumerate().rev() {
        offset -= layer.param_count();
        let (gw, gb) = grad[offset..offset + layer.param_count()]
            .split_at_mut(layer.weights.len());
        let a_in = &scratch.a[l];
        for j in scratch.cot_prev.iter_mut().take(layer.input_width) {
            *j = SpatialJet::zero();
        }
        for i in 0..layer.output_width {
            let cz = match layer.activation {
                Some(_) => activation_pullback(&scratch.act[l][i], &scratch.z[l][i], &scratch.cot[i]),
                None => scratch.cot[i],
            };
            gb[i] += cz.value;
            let row = &layer.weights[i * layer.input_width..(i + 1) * layer.input_width];
            let grow = &mut gw[i * layer.input_width..(i + 1) * layer.input_width];
            for j in 0..layer.input_width {
                grow[j] += cz.dot(&a_in[j]);
                scratch.cot_prev[j].add_scaled(&cz, row[j]);
            }
        }
        std::mem::swap(&mut scratch.cot, &mut scratch.cot_prev);
    }
}

/// Exact value, gradient and Hessian of both enriched displacement
/// components at `x`, evaluated with the named subdomain's network and the
/// subdomain's side of every branch cut.
pub fn spatial_jets(
    model: &EnrichedModel,
    subdomain: usize,
    x: [f64; 2],
) -> Result<(SpatialJet, SpatialJet)> {
    let net = model.networks.get(subdomain).ok_or(Error::OutsideSubdomain { subdomain, x })?;
    let mut scratch = NetScratch::new(net);
    let (mut u1, mut u2) = net_forward(net, x, &mut scratch);
    for (t, tip) in model.tips.iter().enumerate() {
        let side = model.tip_sides[subdomain][t];
        let basis = crate::kinematics::enrichment_jets(
            tip,
            model.material.kolosov(),
            x,
            side,
            model.eps_tip,
        )?;
        u1.add_scaled(&basis.mode_i[0], tip.ktilde_i);
        u1.add_scaled(&basis.mode_ii[0], tip.ktilde_ii);
        u2.add_scaled(&basis.mode_i[1], tip.ktilde_i);
        u2.add_scaled(&basis.mode_ii[1], tip.ktilde_ii);
    }
    if !u1.is_finite() || !u2.is_finite() {
        return Err(Error::NonFinite {
            context: format!("spatial jets at ({}, {})", x[0], x[1]),
        });
    }
    Ok((u1, u2))
}

/// Loss value and its exact gradient with respect to every trainable
/// parameter, by reverse accumulation over the jet-carrying forward pass.
///
/// The loss value equals what [`crate::training::assemble_loss`] reports for
/// the same samples (both call the same engine).
pub fn loss_gradient(
    model: &EnrichedModel,
    spec: &LossSpec<'_>,
) -> Result<(f64, ParameterGradient)> {
    let (breakdown, grad) = crate::training::engine::evaluate(model, spec, true)?;
    let grad = grad.expect("gradient requested");
    if !breakdown.total.is_finite() {
        return Err(Error::NonFinite { context: "loss".into() });
    }
    if !grad.is_finite() {
        return Err(Error::NonFinite { context: "loss gradient".into() });
    }
    Ok((breakdown.total, grad))
}
