//! Fully-connected displacement networks: two inputs `(x1, x2)`, two raw
//! outputs `(u1_raw, u2_raw)`, one shared body.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Smooth activation functions available for the hidden layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Sigmoid,
    Tanh,
    Swish,
    Arctan,
    Softplus,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 5] = [
        ActivationKind::Sigmoid,
        ActivationKind::Tanh,
        ActivationKind::Swish,
        ActivationKind::Arctan,
        ActivationKind::Softplus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Swish => "swish",
            ActivationKind::Arctan => "arctan",
            ActivationKind::Softplus => "softplus",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "tanh" => Ok(ActivationKind::Tanh),
            "swish" => Ok(ActivationKind::Swish),
            "arctan" => Ok(ActivationKind::Arctan),
            "softplus" => Ok(ActivationKind::Softplus),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }

    /// Value with exact first and second derivatives.
    pub fn eval(&self, z: f64) -> (f64, f64, f64) {
        let (v, d1, d2, _) = self.eval3(z);
        (v, d1, d2)
    }

    /// Value with derivatives up to third order (the extra order feeds the
    /// parameter-gradient pullback through second-order jets).
    pub(crate) fn eval3(&self, z: f64) -> (f64, f64, f64, f64) {
        match self {
            ActivationKind::Sigmoid => {
                let s = stable_sigmoid(z);
                let s1 = s * (1.0 - s);
                let s2 = s1 * (1.0 - 2.0 * s);
                let s3 = s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1;
                (s, s1, s2, s3)
            }
            ActivationKind::Tanh => {
                let t = z.tanh();
                let t1 = 1.0 - t * t;
                let t2 = -2.0 * t * t1;
                let t3 = -2.0 * (t1 * t1 + t * t2);
                (t, t1, t2, t3)
            }
            ActivationKind::Swish => {
                let s = stable_sigmoid(z);
                let s1 = s * (1.0 - s);
                let s2 = s1 * (1.0 - 2.0 * s);
                let s3 = s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1;
                (z * s, s + z * s1, 2.0 * s1 + z * s2, 3.0 * s2 + z * s3)
            }
            ActivationKind::Arctan => {
                let w = 1.0 / (1.0 + z * z);
                (z.atan(), w, -2.0 * z * w * w, (6.0 * z * z - 2.0) * w * w * w)
            }
            ActivationKind::Softplus => {
                let s = stable_sigmoid(z);
                let s1 = s * (1.0 - s);
                let s2 = s1 * (1.0 - 2.0 * s);
                // overflow-safe softplus: max(z,0) + log1p(exp(-|z|))
                let v = z.max(0.0) + (-z.abs()).exp().ln_1p();
                (v, s, s1, s2)
            }
        }
    }
}

fn stable_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Network shape: hidden layer count, width, and hidden activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub hidden_layers: usize,
    pub neurons_per_layer: usize,
    pub activation: ActivationKind,
}

impl Architecture {
    pub fn new(hidden_layers: usize, neurons_per_layer: usize, activation: ActivationKind) -> Self {
        Self { hidden_layers, neurons_per_layer, activation }
    }
}

/// One fully-connected layer. `weights` is row-major `[output][input]`;
/// `activation == None` means the identity map (output layer).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub input_width: usize,
    pub output_width: usize,
    pub activation: Option<ActivationKind>,
}

impl Layer {
    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// A layered fully-connected network mapping `(x1, x2)` to two raw
/// displacement outputs through a final linear layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Layer>,
    pub hidden_layers: usize,
    pub neurons_per_layer: usize,
    pub activation: ActivationKind,
}

/// Glorot-uniform initialization (bound `sqrt(6/(fan_in+fan_out))`), zero
/// biases, deterministic under the seed.
pub fn init_network(
    hidden_layers: usize,
    neurons_per_layer: usize,
    activation: ActivationKind,
    seed: u64,
) -> Result<Network> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    init_network_from_rng(hidden_layers, neurons_per_layer, activation, &mut rng)
}

/// As [`init_network`], drawing from a caller-provided stream so several
/// networks can share one seeded source in a fixed order.
pub fn init_network_from_rng(
    hidden_layers: usize,
    neurons_per_layer: usize,
    activation: ActivationKind,
    rng: &mut ChaCha8Rng,
) -> Result<Network> {
    if hidden_layers == 0 || neurons_per_layer == 0 {
        return Err(Error::InvalidArchitecture { hidden_layers, neurons_per_layer });
    }
    let mut widths = Vec::with_capacity(hidden_layers + 2);
    widths.push(2);
    widths.extend(std::iter::repeat(neurons_per_layer).take(hidden_layers));
    widths.push(2);

    let mut layers = Vec::with_capacity(widths.len() - 1);
    for k in 0..widths.len() - 1 {
        let (fan_in, fan_out) = (widths[k], widths[k + 1]);
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let weights: Vec<f64> =
            (0..fan_in * fan_out).map(|_| rng.gen_range(-bound..bound)).collect();
        let is_output = k == widths.len() - 2;
        layers.push(Layer {
            weights,
            biases: vec![0.0; fan_out],
            input_width: fan_in,
            output_width: fan_out,
            activation: if is_output { None } else { Some(activation) },
        });
    }
    Ok(Network { layers, hidden_layers, neurons_per_layer, activation })
}

impl Network {
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Widest layer, used to size evaluation scratch buffers.
    pub fn max_width(&self) -> usize {
        self.layers.iter().map(|l| l.output_width).max().unwrap_or(2).max(2)
    }

    /// Append all parameters in the flat ordering: layer by layer, weights
    /// row-major, then biases.
    pub fn write_params(&self, out: &mut Vec<f64>) {
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.biases);
        }
    }

    /// Overwrite all parameters from the flat ordering; returns the number
    /// of scalars consumed.
    pub fn read_params(&mut self, flat: &[f64]) -> usize {
        let mut offset = 0;
        for layer in &mut self.layers {
            let nw = layer.weights.len();
            layer.weights.copy_from_slice(&flat[offset..offset + nw]);
            offset += nw;
            let nb = layer.biases.len();
            layer.biases.copy_from_slice(&flat[offset..offset + nb]);
            offset += nb;
        }
        offset
    }

    /// Plain value-only forward pass. Accumulation order matches the jet
    /// forward pass exactly, so the two agree bitwise.
    pub fn forward(&self, x: [f64; 2]) -> [f64; 2] {
        let mut a: Vec<f64> = vec![x[0], x[1]];
        let mut next = Vec::new();
        for layer in &self.layers {
            next.clear();
            for i in 0..layer.output_width {
                let row = &layer.weights[i * layer.input_width..(i + 1) * layer.input_width];
                let mut acc = layer.biases[i];
                for (w, aj) in row.iter().zip(a.iter()) {
                    acc += w * aj;
                }
                next.push(match layer.activation {
                    Some(kind) => kind.eval3(acc).0,
                    None => acc,
                });
            }
            std::mem::swap(&mut a, &mut next);
        }
        [a[0], a[1]]
    }
}
