//! Optimizers for the training loop: Adam for the exploration phase and
//! limited-memory BFGS with a strong-Wolfe line search for the polishing
//! phase. Everything operates on flat parameter slices and is fully
//! deterministic.

use std::collections::VecDeque;

/// Adam with bias correction (defaults: lr 1e-3, β1 0.9, β2 0.999, ε 1e-8).
#[derive(Debug, Clone)]
pub(crate) struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u32,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), grad.len());
        self.t += 1;
        let b1t = 1.0 - self.beta1.powi(self.t as i32);
        let b2t = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / b1t;
            let v_hat = self.v[i] / b2t;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// One stored curvature pair of the L-BFGS history.
#[derive(Debug, Clone)]
struct CurvaturePair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Limited-memory BFGS state (two-loop recursion, scaled initial Hessian).
#[derive(Debug, Clone)]
pub(crate) struct Lbfgs {
    history: VecDeque<CurvaturePair>,
    memory: usize,
}

impl Lbfgs {
    pub fn new(memory: usize) -> Self {
        Self { history: VecDeque::with_capacity(memory), memory }
    }

    pub fn reset(&mut self) {
        self.history.clear();
    }

    pub fn has_history(&self) -> bool {
        !self.history.is_empty()
    }

    /// Record a curvature pair; skipped when the curvature condition
    /// `sᵀy > 0` fails (up to a relative guard).
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        let ss = dot(&s, &s).sqrt();
        let yy = dot(&y, &y).sqrt();
        if sy <= 1e-10 * ss * yy || !sy.is_finite() {
            return;
        }
        if self.history.len() == self.memory {
            self.history.pop_front();
        }
        self.history.push_back(CurvaturePair { s, y, rho: 1.0 / sy });
    }

    /// Search direction `−H·g` by the two-loop recursion. With empty
    /// history this is steepest descent.
    pub fn direction(&self, grad: &[f64]) -> Vec<f64> {
        let mut q: Vec<f64> = grad.to_vec();
        let mut alphas = Vec::with_capacity(self.history.len());
        for pair in self.history.iter().rev() {
            let alpha = pair.rho * dot(&pair.s, &q);
            axpy(&mut q, -alpha, &pair.y);
            alphas.push(alpha);
        }
        if let Some(last) = self.history.back() {
            let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
            for qi in q.iter_mut() {
                *qi *= gamma;
            }
        }
        for (pair, alpha) in self.history.iter().zip(alphas.iter().rev()) {
            let beta = pair.rho * dot(&pair.y, &q);
            axpy(&mut q, alpha - beta, &pair.s);
        }
        for qi in q.iter_mut() {
            *qi = -*qi;
        }
        q
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Outcome of one strong-Wolfe line search.
pub(crate) struct LineSearchResult {
    pub params: Vec<f64>,
    pub loss: f64,
    pub grad: Vec<f64>,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_TRIALS: usize = 25;

/// Strong-Wolfe line search along `dir` from `x0`. `eval` returns
/// `(loss, grad)` and may return non-finite losses, which are treated as
/// rejected trials. Returns `None` when no acceptable step is found.
pub(crate) fn strong_wolfe<F>(
    eval: &mut F,
    x0: &[f64],
    f0: f64,
    g0: &[f64],
    dir: &[f64],
    alpha_init: f64,
) -> Option<LineSearchResult>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let d0 = dot(g0, dir);
    if !(d0 < 0.0) {
        return None; // not a descent direction
    }
    let probe = |alpha: f64, eval: &mut F| {
        let x: Vec<f64> = x0.iter().zip(dir).map(|(xi, di)| xi + alpha * di).collect();
        let (f, g) = eval(&x);
        let slope = dot(&g, dir);
        (x, f, g, slope)
    };

    let mut alpha_prev = 0.0;
    let mut f_prev = f0;
    let mut slope_prev = d0;
    let mut alpha = alpha_init.max(1e-16);

    // bracketing phase
    let mut bracket: Option<(f64, f64, f64, f64, f64, f64)> = None; // (lo, f_lo, slope_lo, hi, f_hi, slope_hi)
    let mut accepted: Option<(Vec<f64>, f64, Vec<f64>)> = None;
    for _ in 0..MAX_TRIALS {
        let (x, f, g, slope) = probe(alpha, eval);
        if !f.is_finite() || f > f0 + C1 * alpha * d0 || (alpha_prev > 0.0 && f >= f_prev) {
            bracket = Some((alpha_prev, f_prev, slope_prev, alpha, f, slope));
            break;
        }
        if slope.abs() <= -C2 * d0 {
            accepted = Some((x, f, g));
            break;
        }
        if slope >= 0.0 {
            bracket = Some((alpha, f, slope, alpha_prev, f_prev, slope_prev));
            break;
        }
        alpha_prev = alpha;
        f_prev = f;
        slope_prev = slope;
        alpha *= 2.0;
    }

    if let Some((x, f, g)) = accepted {
        return Some(LineSearchResult { params: x, loss: f, grad: g });
    }
    let (mut lo, mut f_lo, mut slope_lo, mut hi, mut f_hi, _slope_hi) = bracket?;

    // zoom phase
    for _ in 0..MAX_TRIALS {
        if (hi - lo).abs() * norm_inf(dir) < 1e-16 * (1.0 + norm_inf(x0)) {
            break;
        }
        // cubic interpolation between lo and hi, safeguarded by bisection
        let mut trial = cubic_min(lo, f_lo, slope_lo, hi, f_hi);
        let (lo_b, hi_b) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let width = hi_b - lo_b;
        if !trial.is_finite() || trial <= lo_b + 0.1 * width || trial >= hi_b - 0.1 * width {
            trial = 0.5 * (lo + hi);
        }
        let (x, f, g, slope) = probe(trial, eval);
        if !f.is_finite() || f > f0 + C1 * trial * d0 || f >= f_lo {
            hi = trial;
            f_hi = f;
        } else {
            if slope.abs() <= -C2 * d0 {
                return Some(LineSearchResult { params: x, loss: f, grad: g });
            }
            if slope * (hi - lo) >= 0.0 {
                hi = lo;
                f_hi = f_lo;
            }
            lo = trial;
            f_lo = f;
            slope_lo = slope;
        }
    }
    None
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Minimizer of the cubic interpolant through `(a, fa, slope_a)` and
/// `(b, fb)`; falls back to NaN on degenerate data (caller bisects).
fn cubic_min(a: f64, fa: f64, slope_a: f64, b: f64, fb: f64) -> f64 {
    let d = b - a;
    if d == 0.0 {
        return f64::NAN;
    }
    // minimize fa + slope_a t + c t² over the quadratic model first if the
    // cubic is ill-conditioned
    let c = (fb - fa - slope_a * d) / (d * d);
    if c.abs() < 1e-30 || !c.is_finite() {
        return f64::NAN;
    }
    a - slope_a / (2.0 * c)
}
