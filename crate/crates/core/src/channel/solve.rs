use super::operator::ChannelOperator;
use crate::error::{Error, Result};
use crate::graph::LiftedNoise;
use crate::operator::{ThetaStepper, Trajectory};
use crate::spde::{semi_implicit_em, step_count, BrownianLog, Drift, EmProblem, NoiseSource};

/// Crank–Nicolson for `u' = L_ε u + h(t)` started with two backward-Euler half steps,
/// which damps the stiff vertical modes of rough data. Stores every `stride`-th step.
pub fn solve_channel_pde(
    op: &ChannelOperator,
    u0: &[f64],
    forcing: Option<&dyn Fn(f64) -> Vec<f64>>,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    if u0.len() != op.n() {
        return Err(Error::Operator("initial datum does not match the operator".into()));
    }
    let steps = step_count(t_end, dt)?;
    let stride = stride.max(1);
    let half = ThetaStepper::new(op.mass(), op.stiffness(), 1.0, 0.5 * dt)?;
    let cn = ThetaStepper::new(op.mass(), op.stiffness(), 0.5, dt)?;
    let mut traj = Trajectory::default();
    let mut u = u0.to_vec();
    traj.push(0.0, &u);
    let scaled = |h: Vec<f64>, c: f64| h.into_iter().map(|v| c * v).collect::<Vec<_>>();
    for n in 1..=steps {
        let t0 = (n - 1) as f64 * dt;
        let t = n as f64 * dt;
        if n == 1 {
            for k in 1..=2 {
                let src = forcing.map(|h| scaled(h(t0 + 0.5 * dt * k as f64), 0.5 * dt));
                u = half.step(&u, src.as_deref())?;
            }
        } else {
            let src = forcing.map(|h| {
                let (a, b) = (h(t0), h(t));
                a.iter().zip(&b).map(|(a, b)| 0.5 * dt * (a + b)).collect::<Vec<_>>()
            });
            u = cn.step(&u, src.as_deref())?;
        }
        if n % stride == 0 || n == steps {
            traj.push(t, &u);
        }
    }
    Ok(traj)
}

/// Semi-implicit Euler–Maruyama for the channel SPDE with lifted noise
/// `Σ λ_j f_j∨ Δβ_j`. Returns the trajectory and the Brownian log for the graph side.
pub fn solve_channel_spde(
    op: &ChannelOperator,
    u0: &[f64],
    drift: Drift,
    noise: &LiftedNoise,
    t_end: f64,
    dt: f64,
    stride: usize,
    source: NoiseSource,
) -> Result<(Trajectory, BrownianLog)> {
    if noise.channel_weights.len() != op.n() {
        return Err(Error::Noise("lifted noise does not live on this grid".into()));
    }
    let inc = |db: &[f64]| noise.increment(db);
    let p = EmProblem {
        mass: op.mass(),
        stiffness: op.stiffness(),
        drift,
        n_modes: noise.model.n_modes(),
        increment: &inc,
    };
    semi_implicit_em(&p, u0, t_end, dt, stride, source)
}
