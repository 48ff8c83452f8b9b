use serde::{Deserialize, Serialize};

use super::sim::{advance, brownian_increment, ReflectedState, SimConfig, MAX_HALVINGS};
use crate::error::{Error, Result};
use crate::geometry::{curve_normal, Side, StripComplex};
use crate::par::ExecPolicy;
use crate::rng::{stream, tags, Rng};
use crate::spde::step_count;
use crate::types::Point;

/// Default exponent in `γ_ε = ε² ln ε^{−κ₁}`.
pub const DEFAULT_KAPPA1: f64 = 0.5;

/// `γ_ε = ε² ln(ε^{−κ₁})`.
pub fn gamma_eps(eps: f64, kappa1: f64) -> f64 {
    eps * eps * (-kappa1 * eps.ln())
}

/// Number of steps in a window of length `γ`, at least one.
pub fn window_steps(gamma: f64, dt: f64) -> usize {
    (gamma / dt).round().max(1.0) as usize
}

/// State of the pair `(Z^ε, Ẑ^{ε,γ})` at one stored time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledState {
    pub time: f64,
    pub z: Point,
    pub phi: f64,
    pub z_hat: Point,
    pub phi_hat: f64,
}

impl CoupledState {
    pub fn sq_distance(&self) -> f64 {
        let d = self.z.dist(self.z_hat);
        d * d
    }
}

/// Reflected 1D step of the frozen process in the section at `x`, returning the new
/// height and the local-time increment (multiplier of `σ̂_ε ν = (0, ε⁻² ν₂)`).
fn frozen_step(sc: &StripComplex, x: f64, y: f64, dy: f64, eps: f64) -> (f64, f64) {
    let s = sc.strip(0);
    let (lo, hi) = s.section(x);
    let y1 = y + dy;
    let e2 = eps * eps;
    if y1 < lo {
        let nu = curve_normal(Side::Lower, s.lower.d1(x)).y.abs();
        (lo, (lo - y1) * e2 / nu)
    } else if y1 > hi {
        let nu = curve_normal(Side::Upper, s.upper.d1(x)).y.abs();
        (hi, (y1 - hi) * e2 / nu)
    } else {
        (y1, 0.0)
    }
}

fn check_single_strip(sc: &StripComplex) -> Result<()> {
    if sc.strips().len() != 1 {
        return Err(Error::Domain(format!(
            "the frozen-slow process needs a single strip, got {} strips",
            sc.strips().len()
        )));
    }
    Ok(())
}

/// Coupled pair on `[0, T]` driven by the same increments: `Ẑ` is reset to `Z` at
/// every multiple of `γ`, keeps `x` frozen inside the window and lets `y` move with
/// `dB₂/ε`, reflected in the frozen section. States are stored after every step
/// listed in `record` (step 0 is the start).
pub fn coupled_path(
    sc: &StripComplex,
    z0: Point,
    cfg: &SimConfig,
    gamma: f64,
    record: &[usize],
    rng: &mut Rng,
) -> Result<Vec<CoupledState>> {
    check_single_strip(sc)?;
    cfg.validate()?;
    if !sc.contains(z0) {
        return Err(Error::OutsideDomain { x: z0.x, y: z0.y });
    }
    let m = window_steps(gamma, cfg.dt);
    if ((m as f64) * cfg.dt - gamma).abs() > 1e-6 * gamma {
        return Err(Error::Config(format!("window γ = {gamma} is not a multiple of dt = {}", cfg.dt)));
    }
    let steps = step_count(cfg.t_end, cfg.dt)?;
    let mut z = ReflectedState::start(z0);
    let mut zh = z0;
    let mut phi_hat = 0.0;
    let mut out = Vec::with_capacity(record.len());
    let mut push = |n: usize, z: &ReflectedState, zh: Point, phi_hat: f64| {
        if record.contains(&n) {
            out.push(CoupledState { time: n as f64 * cfg.dt, z: z.position, phi: z.phi, z_hat: zh, phi_hat });
        }
    };
    push(0, &z, zh, phi_hat);
    for n in 1..=steps {
        if (n - 1) % m == 0 {
            zh = z.position;
        }
        let db = brownian_increment(cfg.dt, rng);
        z = advance(sc, &z, db, cfg.eps, cfg.dt, MAX_HALVINGS, rng)?;
        let (y, dphi) = frozen_step(sc, zh.x, zh.y, db.1 / cfg.eps, cfg.eps);
        zh.y = y;
        phi_hat += dphi;
        push(n, &z, zh, phi_hat);
    }
    Ok(out)
}

/// The frozen-slow trajectory alone, stored at every `cfg.stride`-th step.
pub fn frozen_slow_path(sc: &StripComplex, z0: Point, cfg: &SimConfig, gamma: f64, rng: &mut Rng) -> Result<Vec<CoupledState>> {
    let steps = step_count(cfg.t_end, cfg.dt)?;
    let stride = cfg.stride.max(1);
    let record: Vec<usize> = (0..=steps).filter(|n| n % stride == 0 || *n == steps).collect();
    coupled_path(sc, z0, cfg, gamma, &record, rng)
}

/// `n_paths` coupled pairs, pair `i` on stream `(seed, FROZEN, i)`.
pub fn coupled_ensemble(
    sc: &StripComplex,
    z0: Point,
    cfg: &SimConfig,
    gamma: f64,
    record: &[usize],
    policy: ExecPolicy,
) -> Result<Vec<Vec<CoupledState>>> {
    check_single_strip(sc)?;
    policy
        .map(cfg.n_paths, |i| {
            let mut rng = stream(cfg.seed, tags::FROZEN, i as u64);
            coupled_path(sc, z0, cfg, gamma, record, &mut rng)
        })
        .into_iter()
        .collect()
}

/// Heights at the end of one frozen window started from `(x, y0)`: the fast motion
/// alone, for comparison with the exact cross-section law.
pub fn frozen_window_heights(
    sc: &StripComplex,
    x: f64,
    y0: f64,
    eps: f64,
    dt: f64,
    window: f64,
    n: usize,
    seed: u64,
    policy: ExecPolicy,
) -> Result<Vec<f64>> {
    check_single_strip(sc)?;
    let steps = step_count(window, dt)?;
    Ok(policy.map(n, |i| {
        let mut rng = stream(seed, tags::FROZEN, i as u64);
        let mut y = y0;
        for _ in 0..steps {
            let db = brownian_increment(dt, &mut rng);
            y = frozen_step(sc, x, y, db.1 / eps, eps).0;
        }
        y
    }))
}
