use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::em::{semi_implicit_em, BrownianLog, Drift, EmProblem, NoiseSource};
use crate::error::{Error, Result};
use crate::graph::NoiseModel;
use crate::operator::{DiscreteGraphOperator, Spectrum, Trajectory};

/// Final state of a graph SPDE run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpdeState {
    pub u: Vec<f64>,
    pub t: f64,
    /// Number of log entries consumed.
    pub cursor: usize,
}

impl GraphSpdeState {
    pub fn is_consistent(&self, dt: f64) -> bool {
        self.u.iter().all(|v| v.is_finite()) && ((self.t / dt).round() as usize) == self.cursor
    }
}

/// Semi-implicit Euler–Maruyama for `dū = (L ū + b(ū)) dt + Σ λ_j f_j dβ_j`.
pub fn solve_graph_spde(
    op: &DiscreteGraphOperator,
    noise: &NoiseModel,
    u0: &[f64],
    drift: Drift,
    t_end: f64,
    dt: f64,
    stride: usize,
    source: NoiseSource,
) -> Result<(Trajectory, BrownianLog, GraphSpdeState)> {
    if noise.weights().len() != op.n() {
        return Err(Error::Noise("noise modes do not live on this operator".into()));
    }
    let inc = |db: &[f64]| noise.increment(db).values;
    let p = EmProblem { mass: op.mass(), stiffness: op.stiffness(), drift, n_modes: noise.n_modes(), increment: &inc };
    let (traj, log) = semi_implicit_em(&p, u0, t_end, dt, stride, source)?;
    let state = GraphSpdeState {
        u: traj.last().unwrap_or(u0).to_vec(),
        t: *traj.times.last().unwrap_or(&0.0),
        cursor: log.n_steps(),
    };
    Ok((traj, log, state))
}

/// `(e^{μ t} − 1)/μ`, equal to `t` at `μ = 0`.
fn phi1(mu: f64, t: f64) -> f64 {
    if (mu * t).abs() < 1e-14 {
        t
    } else {
        (mu * t).exp_m1() / mu
    }
}

/// Covariance of `∫₀ᵗ e^{(t−s)L} Σ λ_j f_j dβ_j(s)` from the spectral formula
/// `Σ_j λ_j² Σ_{p,q} a_jp a_jq φ_p φ_qᵀ (e^{(μ_p+μ_q)t} − 1)/(μ_p + μ_q)`.
pub fn stochastic_convolution_cov(spec: &Spectrum, mass: &[f64], noise: &NoiseModel, t: f64) -> DMatrix<f64> {
    let n = mass.len();
    let np = spec.values.len();
    // a_jp = ⟨f_j, φ_p⟩_W
    let phi = &spec.vectors;
    let mut a = DMatrix::zeros(noise.n_modes(), np);
    for (j, f) in noise.modes().iter().enumerate() {
        for p in 0..np {
            a[(j, p)] = (0..n).map(|r| mass[r] * f.values[r] * phi[(r, p)]).sum::<f64>();
        }
    }
    let lam2: Vec<f64> = noise.lambdas().iter().map(|l| l * l).collect();
    let mut m = DMatrix::zeros(np, np);
    for p in 0..np {
        for q in 0..=p {
            let s: f64 = (0..noise.n_modes()).map(|j| lam2[j] * a[(j, p)] * a[(j, q)]).sum();
            if s == 0.0 {
                continue;
            }
            let v = s * phi1(spec.values[p] + spec.values[q], t);
            m[(p, q)] = v;
            m[(q, p)] = v;
        }
    }
    let c = phi * m * phi.transpose();
    (&c + c.transpose()) * 0.5
}

/// Stationary variance of the coefficient recursion
/// `c' = ((1 + a dt) c + λ Δβ) / (1 + |μ| dt)` of an eigenmode under the
/// semi-implicit scheme with linear drift `b(u) = a u`.
pub fn discrete_ou_variance(lambda: f64, mu: f64, a: f64, dt: f64) -> f64 {
    let d = 1.0 + mu.abs() * dt;
    let r = (1.0 + a * dt) / d;
    lambda * lambda * dt / (d * d) / (1.0 - r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains;
    use crate::graph::{build_graph, Decay, GraphFunction};
    use crate::operator::{apply_semigroup, assemble_generator, eigen_decompose, solve_graph_pde, GraphMesh, SemigroupMethod};
    use crate::rng::{stream, tags};

    fn small_op() -> DiscreteGraphOperator {
        let g = build_graph(&domains::fork()).unwrap();
        assemble_generator(&g, &GraphMesh::uniform(&g, 8)).unwrap()
    }

    fn cosine_noise(op: &DiscreteGraphOperator, lambdas: Vec<f64>) -> NoiseModel {
        let xs: Vec<f64> = op.nodes().iter().map(|n| n.x).collect();
        let k = lambdas.len();
        NoiseModel::cosine(op.mass(), &xs, &Decay::Explicit { lambdas }, k, 1e3).unwrap()
    }

    #[test]
    fn zero_time_gives_zero_covariance() {
        let op = small_op();
        let spec = eigen_decompose(&op).unwrap();
        let c = stochastic_convolution_cov(&spec, op.mass(), &cosine_noise(&op, vec![1.0, 0.5]), 0.0);
        assert!(c.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_eigenmode_variance() {
        let op = small_op();
        let spec = eigen_decompose(&op).unwrap();
        let p = 3;
        let f = GraphFunction::new(spec.mode(p));
        let lam = 0.7;
        let noise = NoiseModel::new(vec![lam], vec![f.clone()], op.mass().to_vec(), 1e3).unwrap();
        let t = 0.4;
        let c = stochastic_convolution_cov(&spec, op.mass(), &noise, t);
        // variance along φ_p: φ_pᵀ W C W φ_p
        let wf: Vec<f64> = op.mass().iter().zip(&f.values).map(|(m, v)| m * v).collect();
        let v = nalgebra::DVector::from_vec(wf);
        let var = (v.transpose() * &c * &v)[(0, 0)];
        let mu = spec.values[p];
        let want = lam * lam * (1.0 - (2.0 * mu * t).exp()) / (2.0 * mu.abs());
        assert!((var - want).abs() < 1e-10 * want.max(1.0), "{var} {want}");
    }

    #[test]
    fn constant_mode_covariance_grows_linearly() {
        let op = small_op();
        let spec = eigen_decompose(&op).unwrap();
        let noise = cosine_noise(&op, vec![0.6]);
        let c = stochastic_convolution_cov(&spec, op.mass(), &noise, 2.0);
        let nu: f64 = op.mass().iter().sum();
        // mode 1/√ν: covariance λ² t / ν in every entry
        let want = 0.36 * 2.0 / nu;
        assert!(c.iter().all(|v| (v - want).abs() < 1e-9), "{} {want}", c[(0, 0)]);
    }

    #[test]
    fn no_noise_matches_the_deterministic_solver() {
        let op = small_op();
        let noise = cosine_noise(&op, vec![0.0, 0.0]);
        let u0: Vec<f64> = op.nodes().iter().map(|n| (2.0 * n.x).cos()).collect();
        let mut rng = stream(1, tags::NOISE, 0);
        let drift = Drift::Linear { a: -0.5 };
        let (a, _, st) = solve_graph_spde(&op, &noise, &u0, drift, 0.5, 0.001, 100, NoiseSource::Fresh(&mut rng)).unwrap();
        assert!(st.is_consistent(0.001));
        // the linear drift is equivalent to the shifted operator: e^{-t/2} e^{tL} u0
        let exact: Vec<f64> = apply_semigroup(&op, &u0, 0.5, SemigroupMethod::DenseExp)
            .unwrap()
            .iter()
            .map(|v| v * (-0.25f64).exp())
            .collect();
        let err = a.last().unwrap().iter().zip(&exact).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 5e-3, "{err}");
        let f = |_t: f64| vec![0.0; op.n()];
        let b = solve_graph_pde(&op, &u0, Some(&f), 0.5, 0.001, 100).unwrap();
        assert_eq!(a.times, b.times);
    }

    #[test]
    fn constant_mode_moves_only_the_mean() {
        let op = small_op();
        let noise = cosine_noise(&op, vec![0.9]);
        let u0 = vec![0.0; op.n()];
        let mut rng = stream(2, tags::NOISE, 0);
        let (traj, log, _) = solve_graph_spde(&op, &noise, &u0, Drift::Zero, 0.3, 0.01, 1, NoiseSource::Fresh(&mut rng)).unwrap();
        let nu: f64 = op.mass().iter().sum();
        let mut beta = 0.0;
        for (n, db) in log.increments.iter().enumerate() {
            beta += db[0];
            let want = 0.9 * beta / nu.sqrt();
            assert!(traj.states[n + 1].iter().all(|v| (v - want).abs() < 1e-12));
        }
    }

    #[test]
    fn replay_rejects_a_mismatched_log() {
        let op = small_op();
        let noise = cosine_noise(&op, vec![0.9, 0.3]);
        let log = BrownianLog { dt: 0.01, n_modes: 2, increments: vec![vec![0.0; 2]; 10] };
        let u0 = vec![0.0; op.n()];
        assert!(solve_graph_spde(&op, &noise, &u0, Drift::Zero, 0.1, 0.01, 1, NoiseSource::Replay(&log)).is_ok());
        let err = solve_graph_spde(&op, &noise, &u0, Drift::Zero, 0.2, 0.01, 1, NoiseSource::Replay(&log));
        assert!(matches!(err, Err(Error::LogMismatch(_))));
    }

    #[test]
    fn discrete_ou_limit() {
        let v = discrete_ou_variance(0.5, -3.0, -1.0, 1e-6);
        assert!((v - 0.25 / 8.0).abs() < 1e-6);
    }
}
