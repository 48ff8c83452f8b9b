use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{ThetaStepper, Trajectory};
use crate::rng::Rng;
use crate::sparse::Csr;

/// Relative residual above which a linear solve is rejected.
pub const SOLVE_TOL: f64 = 1e-10;

/// Scalar reaction term `b`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Drift {
    #[default]
    Zero,
    Linear { a: f64 },
    Tanh,
    Sin,
}

impl Drift {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Drift::Zero => 0.0,
            Drift::Linear { a } => a * u,
            Drift::Tanh => u.tanh(),
            Drift::Sin => u.sin(),
        }
    }

    /// Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Drift::Zero => 0.0,
            Drift::Linear { a } => a.abs(),
            Drift::Tanh | Drift::Sin => 1.0,
        }
    }

    /// Parses `zero`, `tanh`, `sin`, `linear` (slope −1) or `linear:<a>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "zero" | "0" => Ok(Drift::Zero),
            "tanh" => Ok(Drift::Tanh),
            "sin" => Ok(Drift::Sin),
            "linear" => Ok(Drift::Linear { a: -1.0 }),
            _ => match s.strip_prefix("linear:") {
                Some(a) => a
                    .trim()
                    .parse()
                    .map(|a| Drift::Linear { a })
                    .map_err(|_| Error::Parse(format!("bad slope in drift `{s}`"))),
                None => Err(Error::Parse(format!("unknown drift `{s}` (expected zero, linear[:a], tanh or sin)"))),
            },
        }
    }
}

/// Brownian increments `Δβ_j^{(n)}` of every step, recorded for replay.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BrownianLog {
    pub dt: f64,
    pub n_modes: usize,
    pub increments: Vec<Vec<f64>>,
}

impl BrownianLog {
    pub fn new(dt: f64, n_modes: usize) -> Self {
        Self { dt, n_modes, increments: Vec::new() }
    }

    pub fn n_steps(&self) -> usize {
        self.increments.len()
    }

    /// Draws and records the increments of one step.
    pub fn draw(&mut self, rng: &mut Rng) -> &[f64] {
        let s = self.dt.sqrt();
        let db = (0..self.n_modes).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect();
        self.increments.push(db);
        self.increments.last().unwrap()
    }

    /// Checks that the log can drive `steps` steps of size `dt` with `n_modes` modes.
    pub fn check(&self, dt: f64, n_modes: usize, steps: usize) -> Result<()> {
        if self.dt != dt {
            return Err(Error::LogMismatch(format!("log has dt = {}, solver uses {dt}", self.dt)));
        }
        if self.n_modes != n_modes {
            return Err(Error::LogMismatch(format!("log has {} modes, noise has {n_modes}", self.n_modes)));
        }
        if self.increments.len() < steps {
            return Err(Error::LogMismatch(format!("log has {} steps, {steps} needed", self.increments.len())));
        }
        Ok(())
    }
}

/// Where the Brownian increments come from.
pub enum NoiseSource<'a> {
    Fresh(&'a mut Rng),
    Replay(&'a BrownianLog),
}

/// Number of steps `T / dt`, which must be a positive integer.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    let steps = (t_end / dt).round();
    if steps < 1.0 || (steps * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(Error::Config(format!("T = {t_end} is not a positive multiple of dt = {dt}")));
    }
    Ok(steps as usize)
}

/// A linear problem `u' = L u + b(u) + Σ λ_j g_j β̇_j` in mass/stiffness form.
pub struct EmProblem<'a> {
    pub mass: &'a [f64],
    pub stiffness: &'a Csr,
    pub drift: Drift,
    pub n_modes: usize,
    /// Maps `Δβ` to the noise increment `Σ λ_j g_j Δβ_j`.
    pub increment: &'a dyn Fn(&[f64]) -> Vec<f64>,
}

/// Semi-implicit Euler–Maruyama `(I − dt L) u_{n+1} = u_n + dt b(u_n) + ξ_n`, storing every
/// `stride`-th state. Returns the trajectory and the increments that drove it.
pub fn semi_implicit_em(
    p: &EmProblem,
    u0: &[f64],
    t_end: f64,
    dt: f64,
    stride: usize,
    source: NoiseSource,
) -> Result<(Trajectory, BrownianLog)> {
    if u0.len() != p.mass.len() {
        return Err(Error::Operator("initial datum does not match the operator".into()));
    }
    let steps = step_count(t_end, dt)?;
    let stride = stride.max(1);
    let stepper = ThetaStepper::new(p.mass, p.stiffness, 1.0, dt)?.with_residual_check(SOLVE_TOL);
    let (mut rng, replay) = match source {
        NoiseSource::Fresh(r) => (Some(r), None),
        NoiseSource::Replay(log) => {
            log.check(dt, p.n_modes, steps)?;
            (None, Some(log))
        }
    };
    let mut log = BrownianLog::new(dt, p.n_modes);
    let mut traj = Trajectory::default();
    let mut u = u0.to_vec();
    traj.push(0.0, &u);
    for n in 1..=steps {
        let db: &[f64] = match (&mut rng, replay) {
            (Some(r), _) => log.draw(r),
            (None, Some(l)) => &l.increments[n - 1],
            (None, None) => unreachable!(),
        };
        let xi = if p.n_modes > 0 { (p.increment)(db) } else { vec![0.0; u.len()] };
        let src: Vec<f64> = u.iter().zip(&xi).map(|(v, x)| dt * p.drift.eval(*v) + x).collect();
        u = stepper.step(&u, Some(&src))?;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("non-finite state at step {n}")));
        }
        if n % stride == 0 || n == steps {
            traj.push(n as f64 * dt, &u);
        }
    }
    if let Some(l) = replay {
        log = BrownianLog { dt, n_modes: p.n_modes, increments: l.increments[..steps].to_vec() };
    }
    Ok((traj, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_parsing() {
        assert_eq!(Drift::parse("tanh").unwrap(), Drift::Tanh);
        assert_eq!(Drift::parse("linear").unwrap(), Drift::Linear { a: -1.0 });
        assert_eq!(Drift::parse("linear: 0.5").unwrap(), Drift::Linear { a: 0.5 });
        assert!(Drift::parse("cubic").is_err());
        assert!(Drift::parse("linear:x").is_err());
    }

    #[test]
    fn step_count_requires_multiple() {
        assert_eq!(step_count(1.0, 0.01).unwrap(), 100);
        assert!(step_count(1.0, 0.3).is_err());
        assert!(step_count(1.0, 0.0).is_err());
    }

    #[test]
    fn log_mismatch_is_reported() {
        let log = BrownianLog { dt: 0.1, n_modes: 2, increments: vec![vec![0.0; 2]; 3] };
        assert!(log.check(0.1, 2, 3).is_ok());
        assert!(matches!(log.check(0.05, 2, 3), Err(Error::LogMismatch(_))));
        assert!(matches!(log.check(0.1, 3, 3), Err(Error::LogMismatch(_))));
        assert!(matches!(log.check(0.1, 2, 4), Err(Error::LogMismatch(_))));
    }

    #[test]
    fn scalar_brownian_motion() {
        // One unknown, L = 0, single mode: u_n is a sum of the increments.
        let mass = [2.0];
        let s = Csr::from_triplets(1, &[(0, 0, 0.0)]);
        let inc = |db: &[f64]| vec![0.5 * db[0]];
        let p = EmProblem { mass: &mass, stiffness: &s, drift: Drift::Zero, n_modes: 1, increment: &inc };
        let mut rng = crate::rng::stream(7, crate::rng::tags::NOISE, 0);
        let (traj, log) = semi_implicit_em(&p, &[1.0], 1.0, 0.1, 1, NoiseSource::Fresh(&mut rng)).unwrap();
        let mut want = 1.0;
        for (n, db) in log.increments.iter().enumerate() {
            want += 0.5 * db[0];
            assert!((traj.states[n + 1][0] - want).abs() < 1e-14);
        }
        let (again, _) = semi_implicit_em(&p, &[1.0], 1.0, 0.1, 1, NoiseSource::Replay(&log)).unwrap();
        assert_eq!(again, traj);
    }
}
