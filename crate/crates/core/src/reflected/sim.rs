use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::StripComplex;
use crate::par::ExecPolicy;
use crate::rng::{stream, tags, Rng};
use crate::spde::step_count;
use crate::stats::Welford;
use crate::types::Point;

/// How often a failed step may be halved before the error is returned.
pub const MAX_HALVINGS: usize = 4;

/// Position, accumulated local time and time of a reflected path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectedState {
    pub position: Point,
    pub phi: f64,
    pub time: f64,
}

impl ReflectedState {
    pub fn start(position: Point) -> Self {
        Self { position, phi: 0.0, time: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub n_paths: usize,
    /// Store every `stride`-th step of a path.
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

impl SimConfig {
    /// The largest `dt ≤ ε²/20` that divides `T`.
    pub fn with_default_dt(eps: f64, t_end: f64, seed: u64, n_paths: usize) -> Self {
        Self { eps, dt: aligned_dt(eps * eps / 20.0, &[t_end]), t_end, seed, n_paths, stride: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.dt > 0.0) || self.dt > self.eps * self.eps / 10.0 * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "dt = {} must lie in (0, eps²/10 = {}]",
                self.dt,
                self.eps * self.eps / 10.0
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("at least one path is required".into()));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("T must be non-negative, got {}", self.t_end)));
        }
        Ok(())
    }
}

/// The largest step `≤ max_dt` of which every time in `times` is a multiple.
pub fn aligned_dt(max_dt: f64, times: &[f64]) -> f64 {
    let unit = times.iter().copied().filter(|t| *t > 0.0).fold(0.0, real_gcd);
    if unit == 0.0 {
        return max_dt;
    }
    unit / (unit / max_dt * (1.0 - 1e-12)).ceil()
}

/// Euclid on reals, treating remainders below `1e-9` of the operands as zero.
fn real_gcd(a: f64, b: f64) -> f64 {
    let (mut a, mut b) = (a.max(b), a.min(b));
    let tol = 1e-9 * a;
    while b > tol {
        let r = a % b;
        a = b;
        b = if r > b - tol { 0.0 } else { r };
    }
    a
}

/// Draws `(ΔB₁, ΔB₂)` for a step of length `dt`.
pub fn brownian_increment(dt: f64, rng: &mut Rng) -> (f64, f64) {
    let s = dt.sqrt();
    (s * rng.sample::<f64, _>(StandardNormal), s * rng.sample::<f64, _>(StandardNormal))
}

/// One projection Euler step `z* = z + (ΔB₁, ΔB₂/ε)` followed by reflection along `σ_ε ν`.
pub fn step_reflected(sc: &StripComplex, s: &ReflectedState, eps: f64, dt: f64, rng: &mut Rng) -> Result<ReflectedState> {
    let db = brownian_increment(dt, rng);
    advance(sc, s, db, eps, dt, MAX_HALVINGS, rng)
}

/// Moves by a given increment; on failure splits it with a Brownian bridge and
/// takes two half steps.
pub fn advance(
    sc: &StripComplex,
    s: &ReflectedState,
    db: (f64, f64),
    eps: f64,
    dt: f64,
    halvings: usize,
    rng: &mut Rng,
) -> Result<ReflectedState> {
    let z = Point::new(s.position.x + db.0, s.position.y + db.1 / eps);
    match sc.reflect(z, eps) {
        Ok(r) => Ok(ReflectedState { position: r.point, phi: s.phi + r.dphi, time: s.time + dt }),
        Err(Error::ReflectionFailed(_)) if halvings > 0 => {
            let h = 0.5 * dt;
            let b = brownian_increment(0.25 * dt, rng);
            let first = (0.5 * db.0 + b.0, 0.5 * db.1 + b.1);
            let mid = advance(sc, s, first, eps, h, halvings - 1, rng)?;
            advance(sc, &mid, (db.0 - first.0, db.1 - first.1), eps, h, halvings - 1, rng)
        }
        Err(e) => Err(e),
    }
}

/// The same step carried out as normal reflection in `G_ε` (`thin = sc.scaled(ε)`),
/// mapped back by `y ↦ y/ε`.
pub fn step_reflected_thin(
    sc: &StripComplex,
    thin: &StripComplex,
    s: &ReflectedState,
    eps: f64,
    db: (f64, f64),
    dt: f64,
) -> Result<ReflectedState> {
    let z = Point::new(s.position.x + db.0, s.position.y + db.1 / eps);
    let r = sc.reflect_via_thin_channel(thin, z, eps)?;
    Ok(ReflectedState { position: r.point, phi: s.phi + r.dphi, time: s.time + dt })
}

/// Path on `[0, T]` storing every `stride`-th state (and the last one).
pub fn simulate_path(sc: &StripComplex, z0: Point, cfg: &SimConfig, rng: &mut Rng) -> Result<Vec<ReflectedState>> {
    cfg.validate()?;
    if !sc.contains(z0) {
        return Err(Error::OutsideDomain { x: z0.x, y: z0.y });
    }
    let steps = if cfg.t_end == 0.0 { 0 } else { step_count(cfg.t_end, cfg.dt)? };
    let stride = cfg.stride.max(1);
    let mut s = ReflectedState::start(z0);
    let mut out = vec![s];
    for n in 1..=steps {
        s = step_reflected(sc, &s, cfg.eps, cfg.dt, rng)?;
        s.time = n as f64 * cfg.dt;
        if n % stride == 0 || n == steps {
            out.push(s);
        }
    }
    Ok(out)
}

/// Sample mean and standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl From<&Welford> for Estimate {
    fn from(w: &Welford) -> Self {
        Self { mean: w.mean(), stderr: w.stderr(), n: w.count() }
    }
}

/// `E φ(Z^ε(t))` at each of `ts` over `n_paths` paths; path `i` uses stream
/// `(seed, PATHS, i)`, so runs with different `ε` share their random numbers.
pub fn mc_expectations(
    sc: &StripComplex,
    z0: Point,
    cfg: &SimConfig,
    ts: &[f64],
    phi: &(dyn Fn(Point) -> f64 + Sync),
    policy: ExecPolicy,
) -> Result<Vec<Estimate>> {
    cfg.validate()?;
    if !sc.contains(z0) {
        return Err(Error::OutsideDomain { x: z0.x, y: z0.y });
    }
    let mut at = Vec::with_capacity(ts.len());
    for &t in ts {
        if t > cfg.t_end * (1.0 + 1e-12) || t < 0.0 {
            return Err(Error::Config(format!("t = {t} is outside [0, T = {}]", cfg.t_end)));
        }
        at.push(if t == 0.0 { 0 } else { step_count(t, cfg.dt)? });
    }
    let last = at.iter().copied().max().unwrap_or(0);
    let per_path = policy.map(cfg.n_paths, |i| -> Result<Vec<f64>> {
        let mut rng = stream(cfg.seed, tags::PATHS, i as u64);
        let mut s = ReflectedState::start(z0);
        let mut vals = vec![f64::NAN; at.len()];
        for n in 0..=last {
            if n > 0 {
                s = step_reflected(sc, &s, cfg.eps, cfg.dt, &mut rng)?;
            }
            for (v, &k) in vals.iter_mut().zip(&at) {
                if k == n {
                    *v = phi(s.position);
                }
            }
        }
        Ok(vals)
    });
    let mut acc = vec![Welford::new(); ts.len()];
    for vals in per_path {
        for (a, v) in acc.iter_mut().zip(vals?) {
            a.push(v);
        }
    }
    Ok(acc.iter().map(Estimate::from).collect())
}

pub fn mc_expectation(
    sc: &StripComplex,
    z0: Point,
    cfg: &SimConfig,
    t: f64,
    phi: &(dyn Fn(Point) -> f64 + Sync),
    policy: ExecPolicy,
) -> Result<Estimate> {
    Ok(mc_expectations(sc, z0, cfg, &[t], phi, policy)?[0])
}

/// Positions at time `T` of `n_paths` independent paths.
pub fn terminal_positions(sc: &StripComplex, z0: Point, cfg: &SimConfig, policy: ExecPolicy) -> Result<Vec<Point>> {
    cfg.validate()?;
    let steps = step_count(cfg.t_end, cfg.dt)?;
    policy
        .map(cfg.n_paths, |i| {
            let mut rng = stream(cfg.seed, tags::PATHS, i as u64);
            let mut s = ReflectedState::start(z0);
            for _ in 0..steps {
                s = step_reflected(sc, &s, cfg.eps, cfg.dt, &mut rng)?;
            }
            Ok(s.position)
        })
        .into_iter()
        .collect()
}
