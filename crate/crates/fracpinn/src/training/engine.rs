//! The shared loss/gradient engine behind [`crate::training::assemble_loss`]
//! and [`crate::autodiff::loss_gradient`].
//!
//! Enrichment basis jets depend only on geometry, so they are computed once
//! per collocation point and reused across every evaluation of a training
//! run. Samples are processed in fixed-size chunks; chunks may run on any
//! number of threads but their partial results are merged in chunk order,
//! making every evaluation bitwise reproducible.

use rayon::prelude::*;

use crate::autodiff::{net_backward, net_forward, NetScratch, ParameterGradient, SpatialJet};
use crate::elasticity::navier_residual;
use crate::geometry::{BatchCounts, PointCondition};
use crate::kinematics::{enrichment_jets, EnrichedModel, EnrichmentBasis};
use crate::training::{LossBreakdown, LossSpec};
use crate::{Error, Result};

const CHUNK: usize = 128;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct KSum {
    s: f64,
    c: f64,
}

impl KSum {
    #[inline(always)]
    fn add(&mut self, v: f64) {
        let t = self.s + v;
        if self.s.abs() >= v.abs() {
            self.c += (self.s - t) + v;
        } else {
            self.c += (v - t) + self.s;
        }
        self.s = t;
    }

    fn merge(&mut self, o: &KSum) {
        self.add(o.s);
        self.add(o.c);
    }

    fn total(&self) -> f64 {
        self.s + self.c
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct TermSums {
    pde1: KSum,
    pde2: KSum,
    u1: KSum,
    u2: KSum,
    t1: KSum,
    t2: KSum,
    iface_u: KSum,
    iface_t: KSum,
}

impl TermSums {
    fn merge(&mut self, o: &TermSums) {
        self.pde1.merge(&o.pde1);
        self.pde2.merge(&o.pde2);
        self.u1.merge(&o.u1);
        self.u2.merge(&o.u2);
        self.t1.merge(&o.t1);
        self.t2.merge(&o.t2);
        self.iface_u.merge(&o.iface_u);
        self.iface_t.merge(&o.iface_t);
    }
}

struct IntSample {
    subdomain: usize,
    x: [f64; 2],
    basis: Vec<EnrichmentBasis>,
}

struct BndSample {
    subdomain: usize,
    x: [f64; 2],
    normal: [f64; 2],
    conditions: Vec<PointCondition>,
    basis: Vec<EnrichmentBasis>,
}

struct IfcSample {
    x: [f64; 2],
    upper: usize,
    lower: usize,
    normal_upper: [f64; 2],
    basis_upper: Vec<EnrichmentBasis>,
    basis_lower: Vec<EnrichmentBasis>,
}

/// Prepared evaluation state for one (geometry, samples) pair.
pub(crate) struct Evaluator {
    interior: Vec<IntSample>,
    boundary: Vec<BndSample>,
    interface: Vec<IfcSample>,
    counts: BatchCounts,
    mu: f64,
    nu_eff: f64,
    body_force: [f64; 2],
    n_params: usize,
    net_offsets: Vec<usize>,
    ktilde_offset: usize,
}

impl Evaluator {
    pub(crate) fn new(model: &EnrichedModel, spec: &LossSpec<'_>) -> Result<Self> {
        let kappa = model.material.kolosov();
        let bases_at = |subdomain: usize, x: [f64; 2]| -> Result<Vec<EnrichmentBasis>> {
            model
                .tips
                .iter()
                .enumerate()
                .map(|(t, tip)| {
                    enrichment_jets(tip, kappa, x, model.tip_sides[subdomain][t], model.eps_tip)
                })
                .collect()
        };

        let interior = spec
            .samples
            .interior
            .iter()
            .map(|p| {
                Ok(IntSample { subdomain: p.subdomain, x: p.x, basis: bases_at(p.subdomain, p.x)? })
            })
            .collect::<Result<Vec<_>>>()?;
        let boundary = spec
            .samples
            .boundary
            .iter()
            .map(|p| {
                Ok(BndSample {
                    subdomain: p.subdomain,
                    x: p.x,
                    normal: p.normal,
                    conditions: p.conditions.clone(),
                    basis: bases_at(p.subdomain, p.x)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let interface = spec
            .samples
            .interface
            .iter()
            .map(|p| {
                Ok(IfcSample {
                    x: p.x,
                    upper: p.upper,
                    lower: p.lower,
                    normal_upper: p.normal_upper,
                    basis_upper: bases_at(p.upper, p.x)?,
                    basis_lower: bases_at(p.lower, p.x)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let net_offsets = model.network_offsets();
        let ktilde_offset = *net_offsets.last().unwrap();
        Ok(Self {
            interior,
            boundary,
            interface,
            counts: spec.samples.counts(),
            mu: spec.material.shear_modulus(),
            nu_eff: spec.material.effective_poisson(),
            body_force: spec.body_force,
            n_params: model.param_count(),
            net_offsets,
            ktilde_offset,
        })
    }

    /// Install `params` into the model, then evaluate.
    pub(crate) fn evaluate_params(
        &self,
        model: &mut EnrichedModel,
        params: &[f64],
        with_grad: bool,
    ) -> Result<(LossBreakdown, Option<ParameterGradient>)> {
        model.set_flat_params(params);
        self.evaluate(model, with_grad)
    }

    pub(crate) fn evaluate(
        &self,
        model: &EnrichedModel,
        with_grad: bool,
    ) -> Result<(LossBreakdown, Option<ParameterGradient>)> {
        let chunk_outputs: Vec<(TermSums, Option<Vec<f64>>)> = {
            let interior = self.interior.par_chunks(CHUNK).map(|c| self.interior_chunk(model, c, with_grad));
            let boundary = self.boundary.par_chunks(CHUNK).map(|c| self.boundary_chunk(model, c, with_grad));
            let interface = self.interface.par_chunks(CHUNK).map(|c| self.interface_chunk(model, c, with_grad));
            interior.chain(boundary).chain(interface).collect()
        };

        let mut sums = TermSums::default();
        let mut grad = with_grad.then(|| vec![0.0; self.n_params]);
        for (partial, partial_grad) in &chunk_outputs {
            sums.merge(partial);
            if let (Some(g), Some(pg)) = (grad.as_mut(), partial_grad.as_ref()) {
                for (gi, pi) in g.iter_mut().zip(pg) {
                    *gi += pi;
                }
            }
        }

        let c = &self.counts;
        let mean = |sum: &KSum, n: usize| if n > 0 { sum.total() / n as f64 } else { 0.0 };
        let breakdown = LossBreakdown {
            pde1: mean(&sums.pde1, c.n_pde),
            pde2: mean(&sums.pde2, c.n_pde),
            u1: mean(&sums.u1, c.n_u1),
            u2: mean(&sums.u2, c.n_u2),
            t1: mean(&sums.t1, c.n_t1),
            t2: mean(&sums.t2, c.n_t2),
            iface_u: mean(&sums.iface_u, c.n_interface),
            iface_t: mean(&sums.iface_t, c.n_interface),
            total: 0.0,
        }
        .finalize();

        if !breakdown.total.is_finite() {
            return Err(Error::NonFinite { context: self.find_offending(model) });
        }
        if let Some(g) = grad.as_ref() {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { context: self.find_offending(model) });
            }
        }
        Ok((breakdown, grad.map(ParameterGradient::from)))
    }

    /// Locate the first sample whose jets or residuals are non-finite, for
    /// error reporting (only runs on the failure path).
    fn find_offending(&self, model: &EnrichedModel) -> String {
        let mut ws = Workspace::new(model);
        for s in &self.interior {
            let (u1, u2) = forward_enriched(model, s.subdomain, s.x, &s.basis, &mut ws);
            let (r1, r2) = navier_residual(&u1, &u2, &model.material, self.body_force);
            if !r1.is_finite() || !r2.is_finite() {
                return format!("PDE residual at ({}, {})", s.x[0], s.x[1]);
            }
        }
        for s in &self.boundary {
            let (u1, u2) = forward_enriched(model, s.subdomain, s.x, &s.basis, &mut ws);
            if !u1.is_finite() || !u2.is_finite() {
                return format!("boundary residual at ({}, {})", s.x[0], s.x[1]);
            }
        }
        for s in &self.interface {
            let (u1, u2) = forward_enriched(model, s.upper, s.x, &s.basis_upper, &mut ws);
            let (l1, l2) = forward_enriched(model, s.lower, s.x, &s.basis_lower, &mut ws);
            if !u1.is_finite() || !u2.is_finite() || !l1.is_finite() || !l2.is_finite() {
                return format!("interface residual at ({}, {})", s.x[0], s.x[1]);
            }
        }
        "loss evaluation (no single offending sample identified)".into()
    }

    fn interior_chunk(
        &self,
        model: &EnrichedModel,
        chunk: &[IntSample],
        with_grad: bool,
    ) -> (TermSums, Option<Vec<f64>>) {
        let mut sums = TermSums::default();
        let mut grad = with_grad.then(|| vec![0.0; self.n_params]);
        let mut ws = Workspace::new(model);
        let mu = self.mu;
        let k = mu / (1.0 - 2.0 * self.nu_eff);
        let n_pde = self.counts.n_pde as f64;
        for s in chunk {
            let (u1, u2) = forward_enriched(model, s.subdomain, s.x, &s.basis, &mut ws);
            let (r1, r2) = navier_residual(&u1, &u2, &model.material, self.body_force);
            sums.pde1.add(r1 * r1);
            sums.pde2.add(r2 * r2);
            if let Some(g) = grad.as_mut() {
                // R1 = (μ+k)·u1.hxx + μ·u1.hyy + k·u2.hxy + f1
                // R2 = μ·u2.hxx + (μ+k)·u2.hyy + k·u1.hxy + f2
                let w1 = 2.0 * r1 / n_pde;
                let w2 = 2.0 * r2 / n_pde;
                let cot1 = SpatialJet {
                    value: 0.0,
                    gx: 0.0,
                    gy: 0.0,
                    hxx: w1 * (mu + k),
                    hxy: w2 * k,
                    hyy: w1 * mu,
                };
                let cot2 = SpatialJet {
                    value: 0.0,
                    gx: 0.0,
                    gy: 0.0,
                    hxx: w2 * mu,
                    hxy: w1 * k,
                    hyy: w2 * (mu + k),
                };
                self.backward(model, s.subdomain, &s.basis, cot1, cot2, &mut ws, g);
            }
        }
        (sums, grad)
    }

    fn boundary_chunk(
        &self,
        model: &EnrichedModel,
        chunk: &[BndSample],
        with_grad: bool,
    ) -> (TermSums, Option<Vec<f64>>) {
        let mut sums = TermSums::default();
        let mut grad = with_grad.then(|| vec![0.0; self.n_params]);
        let mut ws = Workspace::new(model);
        for s in chunk {
            let (u1, u2) = forward_enriched(model, s.subdomain, s.x, &s.basis, &mut ws);
            let mut cot1 = SpatialJet::zero();
            let mut cot2 = SpatialJet::zero();
            for cond in &s.conditions {
                self.accumulate_condition(cond, &u1, &u2, s.normal, &mut sums, &mut cot1, &mut cot2);
            }
            if let Some(g) = grad.as_mut() {
                self.backward(model, s.subdomain, &s.basis, cot1, cot2, &mut ws, g);
            }
        }
        (sums, grad)
    }

    /// Residual and cotangent contributions of one pointwise condition.
    fn accumulate_condition(
        &self,
        cond: &PointCondition,
        u1: &SpatialJet,
        u2: &SpatialJet,
        normal: [f64; 2],
        sums: &mut TermSums,
        cot1: &mut SpatialJet,
        cot2: &mut SpatialJet,
    ) {
        let mu = self.mu;
        let ccoef = self.nu_eff / (1.0 - 2.0 * self.nu_eff);
        let big_a = 2.0 * mu * (1.0 + ccoef);
        let big_b = 2.0 * mu * ccoef;
        let [n1, n2] = normal;
        match cond {
            PointCondition::U1(v) => {
                let res = u1.value - v;
                sums.u1.add(res * res);
                cot1.value += 2.0 * res / self.counts.n_u1 as f64;
            }
            PointCondition::U2(v) => {
                let res = u2.value - v;
                sums.u2.add(res * res);
                cot2.value += 2.0 * res / self.counts.n_u2 as f64;
            }
            PointCondition::T1(v) => {
                // t1 = (A·u1.gx + B·u2.gy)·n1 + μ(u1.gy + u2.gx)·n2
                let t1 = (big_a * u1.gx + big_b * u2.gy) * n1 + mu * (u1.gy + u2.gx) * n2;
                let res = t1 - v;
                sums.t1.add(res * res);
                let w = 2.0 * res / self.counts.n_t1 as f64;
                cot1.gx += w * big_a * n1;
                cot1.gy += w * mu * n2;
                cot2.gx += w * mu * n2;
                cot2.gy += w * big_b * n1;
            }
            PointCondition::T2(v) => {
                // t2 = μ(u1.gy + u2.gx)·n1 + (B·u1.gx + A·u2.gy)·n2
                let t2 = mu * (u1.gy + u2.gx) * n1 + (big_b * u1.gx + big_a * u2.gy) * n2;
                let res = t2 - v;
                sums.t2.add(res * res);
                let w = 2.0 * res / self.counts.n_t2 as f64;
                cot1.gy += w * mu * n1;
                cot2.gx += w * mu * n1;
                cot1.gx += w * big_b * n2;
                cot2.gy += w * big_a * n2;
            }
        }
    }

    fn interface_chunk(
        &self,
        model: &EnrichedModel,
        chunk: &[IfcSample],
        with_grad: bool,
    ) -> (TermSums, Option<Vec<f64>>) {
        let mut sums = TermSums::default();
        let mut grad = with_grad.then(|| vec![0.0; self.n_params]);
        let mu = self.mu;
        let ccoef = self.nu_eff / (1.0 - 2.0 * self.nu_eff);
        let big_a = 2.0 * mu * (1.0 + ccoef);
        let big_b = 2.0 * mu * ccoef;
        let n_if = self.counts.n_interface as f64;
        let mut ws = Workspace::new(model);
        for s in chunk {
            let (up1, up2) = forward_enriched(model, s.upper, s.x, &s.basis_upper, &mut ws);
            // the upper forward cache must survive the lower forward pass;
            // subdomains differ, so each uses its own scratch
            let (lo1, lo2) = forward_enriched(model, s.lower, s.x, &s.basis_lower, &mut ws);

            let d1 = up1.value - lo1.value;
            let d2 = up2.value - lo2.value;
            sums.iface_u.add(d1 * d1 + d2 * d2);

            let [n1, n2] = s.normal_upper;
            let t_of = |a1: &SpatialJet, a2: &SpatialJet, sgn: f64| {
                let t1 = ((big_a * a1.gx + big_b * a2.gy) * n1 + mu * (a1.gy + a2.gx) * n2) * sgn;
                let t2 = (mu * (a1.gy + a2.gx) * n1 + (big_b * a1.gx + big_a * a2.gy) * n2) * sgn;
                (t1, t2)
            };
            let (tu1, tu2) = t_of(&up1, &up2, 1.0);
            let (tl1, tl2) = t_of(&lo1, &lo2, -1.0); // opposite normal
            let rho1 = tu1 + tl1;
            let rho2 = tu2 + tl2;
            sums.iface_t.add(rho1 * rho1 + rho2 * rho2);

            if let Some(g) = grad.as_mut() {
                let wu = 2.0 / n_if;
                // displacement continuity cotangents (±)
                let mut cu1 = SpatialJet { value: wu * d1, ..SpatialJet::zero() };
                let mut cu2 = SpatialJet { value: wu * d2, ..SpatialJet::zero() };
                let mut cl1 = SpatialJet { value: -wu * d1, ..SpatialJet::zero() };
                let mut cl2 = SpatialJet { value: -wu * d2, ..SpatialJet::zero() };
                // traction equilibrium cotangents; lower side carries the
                // sign flip from its opposite normal
                for (rho, comp) in [(rho1, 0usize), (rho2, 1usize)] {
                    let w = wu * rho;
                    for (sgn, c1, c2) in
                        [(1.0, &mut cu1, &mut cu2), (-1.0, &mut cl1, &mut cl2)]
                    {
                        if comp == 0 {
                            c1.gx += w * sgn * big_a * n1;
                            c1.gy += w * sgn * mu * n2;
                            c2.gx += w * sgn * mu * n2;
                            c2.gy += w * sgn * big_b * n1;
                        } else {
                            c1.gy += w * sgn * mu * n1;
                            c2.gx += w * sgn * mu * n1;
                            c1.gx += w * sgn * big_b * n2;
                            c2.gy += w * sgn * big_a * n2;
                        }
                    }
                }
                // each subdomain has its own scratch, so both forward
                // caches are still valid here
                self.backward(model, s.lower, &s.basis_lower, cl1, cl2, &mut ws, g);
                self.backward(model, s.upper, &s.basis_upper, cu1, cu2, &mut ws, g);
            }
        }
        (sums, grad)
    }

    /// Enrichment-coefficient gradients plus the network reverse pass. The
    /// subdomain's scratch must still hold this sample's forward caches.
    fn backward(
        &self,
        model: &EnrichedModel,
        subdomain: usize,
        basis: &[EnrichmentBasis],
        cot1: SpatialJet,
        cot2: SpatialJet,
        ws: &mut Workspace,
        grad: &mut [f64],
    ) {
        for (t, b) in basis.iter().enumerate() {
            grad[self.ktilde_offset + 2 * t] += cot1.dot(&b.mode_i[0]) + cot2.dot(&b.mode_i[1]);
            grad[self.ktilde_offset + 2 * t + 1] +=
                cot1.dot(&b.mode_ii[0]) + cot2.dot(&b.mode_ii[1]);
        }
        let range = self.net_offsets[subdomain]..self.net_offsets[subdomain + 1];
        net_backward(
            &model.networks[subdomain],
            &mut ws.scratches[subdomain],
            cot1,
            cot2,
            &mut grad[range],
        );
    }
}

/// Per-task scratch: one jet workspace per subdomain network.
struct Workspace {
    scratches: Vec<NetScratch>,
}

impl Workspace {
    fn new(model: &EnrichedModel) -> Self {
        Self { scratches: model.networks.iter().map(NetScratch::new).collect() }
    }
}

/// Forward pass of the enriched field at one prepared sample.
#[inline]
fn forward_enriched(
    model: &EnrichedModel,
    subdomain: usize,
    x: [f64; 2],
    basis: &[EnrichmentBasis],
    ws: &mut Workspace,
) -> (SpatialJet, SpatialJet) {
    let (mut u1, mut u2) = net_forward(&model.networks[subdomain], x, &mut ws.scratches[subdomain]);
    for (tip, b) in model.tips.iter().zip(basis) {
        u1.add_scaled(&b.mode_i[0], tip.ktilde_i);
        u1.add_scaled(&b.mode_ii[0], tip.ktilde_ii);
        u2.add_scaled(&b.mode_i[1], tip.ktilde_i);
        u2.add_scaled(&b.mode_ii[1], tip.ktilde_ii);
    }
    (u1, u2)
}

/// One-shot evaluation used by the public wrappers.
pub(crate) fn evaluate(
    model: &EnrichedModel,
    spec: &LossSpec<'_>,
    with_grad: bool,
) -> Result<(LossBreakdown, Option<ParameterGradient>)> {
    Evaluator::new(model, spec)?.evaluate(model, with_grad)
}
