use serde::{Deserialize, Serialize};

use super::assemble::DiscreteGraphOperator;
use crate::error::{Error, Result};
use crate::sparse::{Csr, SpdSolver};

/// Largest operator for which the dense exponential is allowed.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemigroupMethod {
    DenseExp,
    CrankNicolson,
}

/// Stored snapshots of a time-dependent solution.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn push(&mut self, t: f64, u: &[f64]) {
        self.times.push(t);
        self.states.push(u.to_vec());
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.states.last().map(|v| v.as_slice())
    }
}

/// One-step θ-scheme `(W − θ dt S) u' = W u + (1 − θ) dt S u + W s` for a symmetric
/// stiffness `S = W L` and diagonal mass `W`; the matrix is factored once.
pub struct ThetaStepper {
    solver: SpdSolver,
    matrix: Csr,
    residual_tol: Option<f64>,
    mass: Vec<f64>,
    stiffness: Csr,
    theta: f64,
    dt: f64,
}

impl ThetaStepper {
    pub fn new(mass: &[f64], stiffness: &Csr, theta: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let a = Csr::diag(mass).lin_comb(1.0, stiffness, -theta * dt);
        Ok(Self {
            solver: SpdSolver::new(&a)?,
            matrix: a,
            residual_tol: None,
            mass: mass.to_vec(),
            stiffness: stiffness.clone(),
            theta,
            dt,
        })
    }

    /// Rejects steps whose relative residual `‖A u' − b‖ / ‖b‖` exceeds `tol`.
    pub fn with_residual_check(mut self, tol: f64) -> Self {
        self.residual_tol = Some(tol);
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `u` by one step; `source` is added as `W·source` on the right-hand side.
    pub fn step(&self, u: &[f64], source: Option<&[f64]>) -> Result<Vec<f64>> {
        let mut rhs: Vec<f64> = self.mass.iter().zip(u).map(|(m, v)| m * v).collect();
        if self.theta < 1.0 {
            let su = self.stiffness.mul_vec(u);
            let c = (1.0 - self.theta) * self.dt;
            rhs.iter_mut().zip(&su).for_each(|(r, s)| *r += c * s);
        }
        if let Some(s) = source {
            rhs.iter_mut().zip(self.mass.iter().zip(s)).for_each(|(r, (m, s))| *r += m * s);
        }
        let out = self.solver.solve(&rhs)?;
        if let Some(tol) = self.residual_tol {
            let au = self.matrix.mul_vec(&out);
            let num = au.iter().zip(&rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let den = rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
            if num > tol * den {
                return Err(Error::Solver(format!("relative residual {:e} exceeds {tol:e}", num / den)));
            }
        }
        Ok(out)
    }
}

/// Default Crank–Nicolson step: `Δ²/2` for the smallest cell `Δ`.
pub fn default_cn_dt(op: &DiscreteGraphOperator) -> f64 {
    op.min_cell().powi(2) / 2.0
}

/// `e^{tL} f0`. Constants are carried through exactly by evolving `f0 − f0[0]`.
pub fn apply_semigroup(op: &DiscreteGraphOperator, f0: &[f64], t: f64, method: SemigroupMethod) -> Result<Vec<f64>> {
    if f0.len() != op.n() {
        return Err(Error::Operator("initial datum does not match the operator".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Operator(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 || f0.is_empty() {
        return Ok(f0.to_vec());
    }
    let r = f0[0];
    let dev: Vec<f64> = f0.iter().map(|v| v - r).collect();
    if dev.iter().all(|&d| d == 0.0) {
        return Ok(f0.to_vec());
    }
    let out = match method {
        SemigroupMethod::DenseExp => {
            if op.n() > DENSE_LIMIT {
                return Err(Error::Operator(format!(
                    "dense exponential is limited to {DENSE_LIMIT} unknowns, operator has {}",
                    op.n()
                )));
            }
            let m = op.generator().to_dense() * t;
            let e = m.exp();
            (e * nalgebra::DVector::from_vec(dev)).as_slice().to_vec()
        }
        SemigroupMethod::CrankNicolson => {
            let steps = (t / default_cn_dt(op)).ceil().max(1.0) as usize;
            let stepper = ThetaStepper::new(op.mass(), op.stiffness(), 0.5, t / steps as f64)?;
            let mut u = dev;
            for _ in 0..steps {
                u = stepper.step(&u, None)?;
            }
            u
        }
    };
    Ok(out.into_iter().map(|v| v + r).collect())
}

/// Crank–Nicolson for `u' = L u + h(t)` with trapezoidal forcing; stores every `stride`-th step.
pub fn solve_graph_pde(
    op: &DiscreteGraphOperator,
    f0: &[f64],
    forcing: Option<&dyn Fn(f64) -> Vec<f64>>,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    if f0.len() != op.n() {
        return Err(Error::Operator("initial datum does not match the operator".into()));
    }
    let steps = (t_end / dt).round() as usize;
    if steps == 0 || ((steps as f64) * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(Error::Config(format!("T = {t_end} is not a positive multiple of dt = {dt}")));
    }
    let stride = stride.max(1);
    let stepper = ThetaStepper::new(op.mass(), op.stiffness(), 0.5, dt)?;
    let mut traj = Trajectory::default();
    let mut u = f0.to_vec();
    traj.push(0.0, &u);
    let mut h_prev = forcing.map(|h| h(0.0));
    for n in 1..=steps {
        let t = n as f64 * dt;
        let src = match (forcing, &h_prev) {
            (Some(h), Some(hp)) => {
                let hn = h(t);
                let s: Vec<f64> = hp.iter().zip(&hn).map(|(a, b)| 0.5 * dt * (a + b)).collect();
                h_prev = Some(hn);
                Some(s)
            }
            _ => None,
        };
        u = stepper.step(&u, src.as_deref())?;
        if n % stride == 0 || n == steps {
            traj.push(t, &u);
        }
    }
    Ok(traj)
}
