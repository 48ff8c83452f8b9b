//! Trace-class noise on the graph and its lift to the channel.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::quad::{weighted_dot, GraphFunction};
use crate::error::{Error, Result};

/// Orthonormality tolerance of the modes in `H̄`.
pub const ORTHO_TOL: f64 = 1e-10;

/// Default bound on `Σ λ_j²`.
pub const DEFAULT_TRACE_BOUND: f64 = 1e3;

/// Eigenvalue decay law of a generated noise family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum Decay {
    /// `λ_j = amp · j^{−s}`.
    Power { s: f64, #[serde(default = "one")] amp: f64 },
    /// `λ_j = amp · r^j`.
    Geometric { r: f64, #[serde(default = "one")] amp: f64 },
    /// Explicit `λ_1, λ_2, …`.
    Explicit { lambdas: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl Decay {
    pub fn lambdas(&self, j_max: usize) -> Vec<f64> {
        match self {
            Decay::Power { s, amp } => (1..=j_max).map(|j| amp * (j as f64).powf(-s)).collect(),
            Decay::Geometric { r, amp } => (1..=j_max).map(|j| amp * r.powi(j as i32)).collect(),
            Decay::Explicit { lambdas } => lambdas.iter().take(j_max).copied().collect(),
        }
    }

    /// `Σ_{j > j_max} λ_j²`; infinite for a non-trace-class law.
    pub fn tail(&self, j_max: usize) -> f64 {
        match self {
            Decay::Power { s, amp } => {
                let p = 2.0 * s;
                if p <= 1.0 {
                    return f64::INFINITY;
                }
                let n = j_max + 100_000;
                let head: f64 = (j_max + 1..=n).map(|j| (j as f64).powf(-p)).sum();
                amp * amp * (head + (n as f64 + 0.5).powf(1.0 - p) / (p - 1.0))
            }
            Decay::Geometric { r, amp } => {
                if r.abs() >= 1.0 {
                    return f64::INFINITY;
                }
                amp * amp * r.powi(2 * (j_max as i32 + 1)) / (1.0 - r * r)
            }
            Decay::Explicit { lambdas } => lambdas.iter().skip(j_max).map(|l| l * l).sum(),
        }
    }
}

/// `A f_j = λ_j f_j` with `{f_j}` orthonormal in `H̄` (weights = the discrete `ν`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    lambdas: Vec<f64>,
    modes: Vec<GraphFunction>,
    weights: Vec<f64>,
}

impl NoiseModel {
    pub fn new(lambdas: Vec<f64>, modes: Vec<GraphFunction>, weights: Vec<f64>, trace_bound: f64) -> Result<Self> {
        if lambdas.len() != modes.len() {
            return Err(Error::Noise("one eigenvalue per mode is required".into()));
        }
        if lambdas.iter().any(|l| !l.is_finite()) {
            return Err(Error::Noise("eigenvalues must be finite".into()));
        }
        if lambdas.windows(2).any(|w| w[1].abs() > w[0].abs()) {
            return Err(Error::Noise("eigenvalues must be ordered by non-increasing modulus".into()));
        }
        let trace: f64 = lambdas.iter().map(|l| l * l).sum();
        if trace > trace_bound {
            return Err(Error::Noise(format!(
                "sum of squared eigenvalues {trace} exceeds the trace bound {trace_bound}"
            )));
        }
        for (i, f) in modes.iter().enumerate() {
            if f.len() != weights.len() {
                return Err(Error::Noise(format!("mode {i} has the wrong length")));
            }
            for (j, g) in modes.iter().enumerate().take(i + 1) {
                let d = weighted_dot(&weights, &f.values, &g.values) - if i == j { 1.0 } else { 0.0 };
                if d.abs() > ORTHO_TOL {
                    return Err(Error::Noise(format!(
                        "modes {j} and {i} are not orthonormal (deviation {d:e})"
                    )));
                }
            }
        }
        Ok(Self { lambdas, modes, weights })
    }

    /// Modes from Gram–Schmidt on `1, cos(π x̂), cos(2π x̂), …` with `x̂ = (x − x_min)/(x_max − x_min)`.
    ///
    /// The functions depend only on `x`, so they are continuous across vertices.
    pub fn cosine(weights: &[f64], xs: &[f64], decay: &Decay, j_max: usize, trace_bound: f64) -> Result<Self> {
        if decay.tail(j_max).is_infinite() {
            return Err(Error::Noise("the eigenvalue law is not square-summable".into()));
        }
        let lambdas = decay.lambdas(j_max);
        let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let span = (hi - lo).max(f64::MIN_POSITIVE);
        let mut modes: Vec<GraphFunction> = Vec::new();
        let mut j = 0;
        while modes.len() < lambdas.len() {
            if j > 4 * lambdas.len() + 16 {
                return Err(Error::Noise("the grid cannot resolve the requested number of modes".into()));
            }
            let mut v: Vec<f64> = xs.iter().map(|x| (j as f64 * std::f64::consts::PI * (x - lo) / span).cos()).collect();
            j += 1;
            let n0 = weighted_dot(weights, &v, &v).sqrt();
            for _ in 0..2 {
                for m in &modes {
                    let c = weighted_dot(weights, &v, &m.values);
                    for (a, b) in v.iter_mut().zip(&m.values) {
                        *a -= c * b;
                    }
                }
            }
            let n = weighted_dot(weights, &v, &v).sqrt();
            if n < 1e-8 * n0 {
                continue;
            }
            v.iter_mut().for_each(|a| *a /= n);
            modes.push(GraphFunction::new(v));
        }
        Self::new(lambdas, modes, weights.to_vec(), trace_bound)
    }

    pub fn n_modes(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn modes(&self) -> &[GraphFunction] {
        &self.modes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `‖A‖_{L₂(H̄)} = (Σ λ_j²)^{1/2}`.
    pub fn hs_norm(&self) -> f64 {
        self.lambdas.iter().map(|l| l * l).sum::<f64>().sqrt()
    }

    /// `Σ_j λ_j f_j Δβ_j`, summed in mode order.
    pub fn increment(&self, dbeta: &[f64]) -> GraphFunction {
        let mut out = vec![0.0; self.weights.len()];
        for ((l, f), b) in self.lambdas.iter().zip(&self.modes).zip(dbeta) {
            let c = l * b;
            for (o, v) in out.iter_mut().zip(&f.values) {
                *o += c * v;
            }
        }
        GraphFunction::new(out)
    }

    /// Applies `A g = Σ λ_j ⟨g, f_j⟩ f_j`.
    pub fn apply(&self, g: &GraphFunction) -> GraphFunction {
        let coeffs: Vec<f64> = self.modes.iter().map(|f| weighted_dot(&self.weights, &g.values, &f.values)).collect();
        self.increment(&coeffs)
    }
}

/// The channel noise `Q u = A∨ u₁`: modes `f_j∨` on a channel layout.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedNoise {
    pub model: NoiseModel,
    pub lifted: Vec<Vec<f64>>,
    pub channel_weights: Vec<f64>,
}

impl LiftedNoise {
    pub fn new(model: NoiseModel, vee: impl Fn(&GraphFunction) -> Vec<f64>, channel_weights: Vec<f64>) -> Self {
        let lifted = model.modes().iter().map(&vee).collect();
        Self { model, lifted, channel_weights }
    }

    /// `Σ_j λ_j f_j∨ Δβ_j` with the same draws and summation order as the graph side.
    pub fn increment(&self, dbeta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.channel_weights.len()];
        for ((l, f), b) in self.model.lambdas().iter().zip(&self.lifted).zip(dbeta) {
            let c = l * b;
            for (o, v) in out.iter_mut().zip(f) {
                *o += c * v;
            }
        }
        out
    }

    /// Gram matrix of the lifted modes in `H`.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.lifted.len();
        DMatrix::from_fn(n, n, |i, j| weighted_dot(&self.channel_weights, &self.lifted[i], &self.lifted[j]))
    }

    /// `‖Q‖_{L₂(H)}` computed on the channel layout.
    pub fn hs_norm(&self) -> f64 {
        let g = self.gram();
        let l = self.model.lambdas();
        let mut s = 0.0;
        for i in 0..l.len() {
            for j in 0..l.len() {
                s += l[i] * l[j] * g[(i, j)] * g[(i, j)];
            }
        }
        s.sqrt()
    }
}
