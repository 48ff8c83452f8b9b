use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::observable::Observable;
use crate::domains;
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, StripComplex};
use crate::graph::Decay;
use crate::par::ExecPolicy;
use crate::spde::Drift;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SemigroupConvergence,
    SpdeConvergence,
    FrozenSlow,
    LocalTime,
    Equilibration,
    OperatorSelfchecks,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SemigroupConvergence => "semigroup-convergence",
            ExperimentKind::SpdeConvergence => "spde-convergence",
            ExperimentKind::FrozenSlow => "frozen-slow",
            ExperimentKind::LocalTime => "local-time",
            ExperimentKind::Equilibration => "equilibration",
            ExperimentKind::OperatorSelfchecks => "operator-selfchecks",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemigroupMethod {
    MonteCarlo,
    FiniteVolume,
    #[default]
    Both,
}

/// `E φ(Z^ε(t))` against the graph semigroup, by Monte Carlo and by finite volumes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemigroupParams {
    pub method: SemigroupMethod,
    pub eps: Vec<f64>,
    pub observable: Observable,
    pub z0: [f64; 2],
    /// Times of the Monte Carlo estimates.
    pub times: Vec<f64>,
    pub paths: usize,
    /// Monte Carlo step `dt ≤ ε²/dt_factor`.
    pub dt_factor: f64,
    /// Cells per edge of the graph oracle.
    pub graph_cells: usize,
    pub mc_abs_tol: f64,
    pub mc_se_factor: f64,
    /// Channel grid spacing of the finite-volume comparison.
    pub h: f64,
    pub fv_dt: f64,
    pub fv_t_start: f64,
    pub fv_t_end: f64,
    /// Final error bound relative to `‖φ‖`.
    pub fv_rel_tol: f64,
}

impl Default for SemigroupParams {
    fn default() -> Self {
        Self {
            method: SemigroupMethod::Both,
            eps: vec![0.4, 0.2, 0.1],
            observable: Observable::CosXOnePlusY,
            z0: [PI, 1.0],
            times: vec![0.5, 1.0],
            paths: 20_000,
            dt_factor: 20.0,
            graph_cells: 401,
            mc_abs_tol: 0.03,
            mc_se_factor: 3.0,
            h: 0.05,
            fv_dt: 0.01,
            fv_t_start: 0.25,
            fv_t_end: 1.0,
            fv_rel_tol: 0.05,
        }
    }
}

/// Channel/graph SPDE ladder and the stochastic-convolution checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpdeParams {
    pub ladder: bool,
    pub covariance: bool,
    pub eps: Vec<f64>,
    pub h: f64,
    pub dt: f64,
    pub t_end: f64,
    pub tau: f64,
    pub decay: Decay,
    pub n_modes: usize,
    /// `zero`, `tanh`, `sin`, `linear` or `linear:<a>`.
    pub drift: String,
    pub realizations: usize,
    pub u0: Observable,
    pub stride: usize,
    pub cov_cells: usize,
    pub cov_modes: usize,
    pub cov_t: f64,
    pub cov_dt: f64,
    pub cov_realizations: usize,
    pub cov_se_factor: f64,
    /// Index of the eigenmode carrying the noise in the stationary check.
    pub ou_mode: usize,
    pub ou_lambda: f64,
    /// Linear drift coefficient of the stationary check.
    pub ou_drift: f64,
    pub ou_dt: f64,
    pub ou_burn_in: usize,
    pub ou_steps: usize,
    pub ou_batches: usize,
    pub ou_se_factor: f64,
}

impl Default for SpdeParams {
    fn default() -> Self {
        Self {
            ladder: true,
            covariance: true,
            eps: vec![0.4, 0.2, 0.1],
            h: 0.05,
            dt: 0.01,
            t_end: 1.0,
            tau: 0.25,
            decay: Decay::Geometric { r: 0.5, amp: 1.0 },
            n_modes: 4,
            drift: "tanh".into(),
            realizations: 100,
            u0: Observable::CosXOnePlusY,
            stride: 1,
            cov_cells: 8,
            cov_modes: 3,
            cov_t: 0.5,
            cov_dt: 1e-3,
            cov_realizations: 2000,
            cov_se_factor: 4.0,
            ou_mode: 2,
            ou_lambda: 1.0,
            ou_drift: -1.0,
            ou_dt: 0.01,
            ou_burn_in: 1000,
            ou_steps: 10_000,
            ou_batches: 50,
            ou_se_factor: 3.0,
        }
    }
}

/// Coupled `E|Z^ε − Ẑ^{ε,γ_ε}|²` over an `ε` ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrozenParams {
    pub eps: Vec<f64>,
    pub kappa1: f64,
    pub pairs: usize,
    pub t_end: f64,
    pub z0: [f64; 2],
    /// Number of points of the time grid in `(0, T]`.
    pub grid_points: usize,
    pub dt_factor: f64,
}

impl Default for FrozenParams {
    fn default() -> Self {
        Self { eps: vec![0.2, 0.1, 0.05], kappa1: 0.5, pairs: 5000, t_end: 1.0, z0: [PI, 1.0], grid_points: 20, dt_factor: 20.0 }
    }
}

/// Moments of frozen local-time increments over one window against `c(γ^p + ε^p γ^{p/2} + ε^{2p})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalTimeParams {
    pub eps: Vec<f64>,
    pub kappa1: f64,
    pub paths: usize,
    /// The measured window is the one containing `r`.
    pub r: f64,
    pub p: u32,
    pub slack: f64,
    pub z0: [f64; 2],
    pub dt_factor: f64,
}

impl Default for LocalTimeParams {
    fn default() -> Self {
        Self { eps: vec![0.2, 0.1, 0.05], kappa1: 0.5, paths: 5000, r: 0.5, p: 2, slack: 1.5, z0: [PI, 1.0], dt_factor: 20.0 }
    }
}

/// Cross-section relaxation (KS) and uniform occupation (χ²).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquilibrationParams {
    pub ks: bool,
    pub chi2: bool,
    pub ks_eps: f64,
    pub ks_samples: usize,
    pub ks_x: f64,
    pub ks_y0: f64,
    pub kappa1: f64,
    pub ks_dt_factor: f64,
    pub ks_tol: f64,
    pub chi2_eps: f64,
    pub chi2_t_end: f64,
    pub chi2_paths: usize,
    pub chi2_dt_factor: f64,
    pub x_bins: usize,
    pub y_bins: usize,
    pub z0: [f64; 2],
    pub p_min: f64,
}

impl Default for EquilibrationParams {
    fn default() -> Self {
        Self {
            ks: true,
            chi2: true,
            ks_eps: 0.05,
            ks_samples: 10_000,
            ks_x: PI / 2.0,
            ks_y0: 1.0,
            kappa1: 0.5,
            ks_dt_factor: 200.0,
            ks_tol: 0.05,
            chi2_eps: 0.5,
            chi2_t_end: 50.0,
            chi2_paths: 2000,
            chi2_dt_factor: 1000.0,
            x_bins: 10,
            y_bins: 10,
            z0: [PI, 1.0],
            p_min: 0.01,
        }
    }
}

/// Algebraic invariants, and optionally the convergence checks of the discrete operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelfcheckParams {
    pub cases: usize,
    pub tol: f64,
    pub quad_intervals: usize,
    pub cells: usize,
    pub invariant_tol: f64,
    pub noise_modes: usize,
    pub channel_h: f64,
    pub j_eps: [f64; 2],
    pub convergence: bool,
    pub spectrum_cells: usize,
    pub spectrum_length: f64,
    pub spectrum_modes: usize,
    pub spectrum_tol: f64,
    pub kirchhoff_meshes: Vec<usize>,
    pub kirchhoff_ratio: f64,
    pub kirchhoff_ratio_tol: f64,
    /// Residuals below this count as an exact flux balance.
    pub kirchhoff_exact_tol: f64,
}

impl Default for SelfcheckParams {
    fn default() -> Self {
        Self {
            cases: 100,
            tol: 1e-8,
            quad_intervals: 32,
            cells: 64,
            invariant_tol: 1e-12,
            noise_modes: 4,
            channel_h: 0.05,
            j_eps: [0.3, 0.05],
            convergence: false,
            spectrum_cells: 400,
            spectrum_length: 1.0,
            spectrum_modes: 5,
            spectrum_tol: 1e-6,
            kirchhoff_meshes: vec![8, 16, 32, 64],
            kirchhoff_ratio: 2.0,
            kirchhoff_ratio_tol: 0.3,
            kirchhoff_exact_tol: 1e-6,
        }
    }
}

/// One experiment: the domain, the kind and its parameter section.
///
/// ```toml
/// kind = "frozen-slow"
/// domain = "single-strip"   # built-in name or path to a domain file
/// seed = 7
/// output = "out/frozen"
///
/// [frozen-slow]
/// eps = [0.2, 0.1, 0.05]
/// pairs = 5000
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_domain")]
    pub domain: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub policy: ExecPolicy,
    #[serde(default, rename = "semigroup-convergence", skip_serializing_if = "Option::is_none")]
    pub semigroup: Option<SemigroupParams>,
    #[serde(default, rename = "spde-convergence", skip_serializing_if = "Option::is_none")]
    pub spde: Option<SpdeParams>,
    #[serde(default, rename = "frozen-slow", skip_serializing_if = "Option::is_none")]
    pub frozen: Option<FrozenParams>,
    #[serde(default, rename = "local-time", skip_serializing_if = "Option::is_none")]
    pub local_time: Option<LocalTimeParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibration: Option<EquilibrationParams>,
    #[serde(default, rename = "operator-selfchecks", skip_serializing_if = "Option::is_none")]
    pub selfchecks: Option<SelfcheckParams>,
    /// Directory against which a relative domain path is resolved.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_domain() -> String {
    "single-strip".into()
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

/// A validation failure tied to a key of the parameter section.
#[derive(Debug)]
struct Invalid {
    key: &'static str,
    msg: String,
}

fn check(ok: bool, key: &'static str, msg: impl FnOnce() -> String) -> std::result::Result<(), Invalid> {
    if ok {
        Ok(())
    } else {
        Err(Invalid { key, msg: msg() })
    }
}

fn eps_ladder(eps: &[f64], key: &'static str) -> std::result::Result<(), Invalid> {
    check(!eps.is_empty(), key, || "the eps ladder is empty".into())?;
    for &e in eps {
        check(e > 0.0 && e <= 1.0, key, || format!("eps = {e} must lie in (0, 1]"))?;
    }
    check(eps.windows(2).all(|w| w[1] < w[0]), key, || "the eps ladder must be strictly decreasing".into())
}

fn positive(v: f64, key: &'static str) -> std::result::Result<(), Invalid> {
    check(v > 0.0 && v.is_finite(), key, || format!("{key} must be positive, got {v}"))
}

fn at_least(v: usize, min: usize, key: &'static str) -> std::result::Result<(), Invalid> {
    check(v >= min, key, || format!("{key} must be at least {min}, got {v}"))
}

/// `dt = ε²/factor` respects `dt ≤ ε²/10`.
fn dt_factor(f: f64, key: &'static str) -> std::result::Result<(), Invalid> {
    check(f >= 10.0 && f.is_finite(), key, || format!("{key} = {f} gives dt > eps²/10; it must be at least 10"))
}

impl SemigroupParams {
    fn validate(&self) -> std::result::Result<(), Invalid> {
        eps_ladder(&self.eps, "eps")?;
        check(!self.times.is_empty(), "times", || "no Monte Carlo times given".into())?;
        for &t in &self.times {
            positive(t, "times")?;
        }
        at_least(self.paths, 2, "paths")?;
        dt_factor(self.dt_factor, "dt_factor")?;
        at_least(self.graph_cells, 2, "graph_cells")?;
        positive(self.h, "h")?;
        positive(self.fv_dt, "fv_dt")?;
        check(self.fv_t_start >= 0.0 && self.fv_t_start <= self.fv_t_end, "fv_t_start", || {
            format!("fv_t_start = {} must lie in [0, fv_t_end = {}]", self.fv_t_start, self.fv_t_end)
        })?;
        positive(self.fv_t_end, "fv_t_end")?;
        check(self.mc_abs_tol >= 0.0, "mc_abs_tol", || "mc_abs_tol must be non-negative".into())?;
        check(self.fv_rel_tol >= 0.0, "fv_rel_tol", || "fv_rel_tol must be non-negative".into())
    }
}

impl SpdeParams {
    fn validate(&self) -> std::result::Result<(), Invalid> {
        eps_ladder(&self.eps, "eps")?;
        positive(self.h, "h")?;
        positive(self.dt, "dt")?;
        positive(self.t_end, "t_end")?;
        check(self.tau >= 0.0 && self.tau <= self.t_end, "tau", || format!("tau = {} must lie in [0, T]", self.tau))?;
        at_least(self.n_modes, 1, "n_modes")?;
        Drift::parse(&self.drift).map_err(|e| Invalid { key: "drift", msg: e.to_string() })?;
        at_least(self.realizations, 1, "realizations")?;
        at_least(self.stride, 1, "stride")?;
        at_least(self.cov_cells, 1, "cov_cells")?;
        at_least(self.cov_modes, 1, "cov_modes")?;
        positive(self.cov_t, "cov_t")?;
        positive(self.cov_dt, "cov_dt")?;
        at_least(self.cov_realizations, 2, "cov_realizations")?;
        at_least(self.ou_mode, 1, "ou_mode")?;
        positive(self.ou_dt, "ou_dt")?;
        check(self.ou_drift <= 0.0, "ou_drift", || "ou_drift must be non-positive for a stationary law".into())?;
        at_least(self.ou_batches, 2, "ou_batches")?;
        check(self.ou_steps >= self.ou_batches, "ou_steps", || "ou_steps must be at least ou_batches".into())
    }
}

impl FrozenParams {
    fn validate(&self) -> std::result::Result<(), Invalid> {
        eps_ladder(&self.eps, "eps")?;
        check(self.eps.iter().all(|e| *e < 1.0), "eps", || "the window ε² ln ε^{-κ} needs ε < 1".into())?;
        positive(self.kappa1, "kappa1")?;
        at_least(self.pairs, 2, "pairs")?;
        positive(self.t_end, "t_end")?;
        at_least(self.grid_points, 1, "grid_points")?;
        dt_factor(self.dt_factor, "dt_factor")
    }
}

impl LocalTimeParams {
    fn validate(&self) -> std::result::Result<(), Invalid> {
        eps_ladder(&self.eps, "eps")?;
        check(self.eps.iter().all(|e| *e < 1.0), "eps", || "the window ε² ln ε^{-κ} needs ε < 1".into())?;
        positive(self.kappa1, "kappa1")?;
        at_least(self.paths, 2, "paths")?;
        check(self.r >= 0.0, "r", || "r must be non-negative".into())?;
        check([1, 2, 4].contains(&self.p), "p", || format!("p must be 1, 2 or 4, got {}", self.p))?;
        check(self.slack >= 1.0, "slack", || "slack must be at least 1".into())?;
        dt_factor(self.dt_factor, "dt_factor")
    }
}

impl EquilibrationParams {
    fn validate(&self) -> std::result::Result<(), Invalid> {
        check(self.ks_eps > 0.0 && self.ks_eps < 1.0, "ks_eps", || format!("ks_eps = {} must lie in (0, 1)", self.ks_eps))?;
        at_least(self.ks_samples, 2, "ks_samples")?;
        positive(self.kappa1, "kappa1")?;
        dt_factor(self.ks_dt_factor, "ks_dt_factor")?;
        check(self.chi2_eps > 0.0 && self.chi2_eps <= 1.0, "chi2_eps", || {
            format!("chi2_eps = {} must lie in (0, 1]", self.chi2_eps)
        })?;
        positive(self.chi2_t_end, "chi2_t_end")?;
        at_least(self.chi2_paths, 2, "chi2_paths")?;
        dt_factor(self.chi2_dt_factor, "chi2_dt_factor")?;
        at_least(self.x_bins, 1, "x_bins")?;
        at_least(self.y_bins, 1, "y_bins")?;
        check(self.x_bins * self.y_bins >= 2, "x_bins", || "at least two bins are needed".into())
    }
}

impl SelfcheckParams {
    fn validate(&self) -> std::result::Result<(), Invalid> {
        at_least(self.cases, 1, "cases")?;
        check(self.quad_intervals >= 2 && self.quad_intervals.is_multiple_of(2), "quad_intervals", || {
            format!("quad_intervals must be even and at least 2, got {}", self.quad_intervals)
        })?;
        at_least(self.cells, 2, "cells")?;
        at_least(self.noise_modes, 1, "noise_modes")?;
        positive(self.channel_h, "channel_h")?;
        check(self.j_eps.iter().all(|e| *e > 0.0 && *e <= 1.0), "j_eps", || "j_eps entries must lie in (0, 1]".into())?;
        at_least(self.spectrum_cells, 2, "spectrum_cells")?;
        positive(self.spectrum_length, "spectrum_length")?;
        at_least(self.spectrum_modes, 1, "spectrum_modes")?;
        check(self.kirchhoff_meshes.len() >= 2, "kirchhoff_meshes", || "at least two meshes are needed".into())?;
        check(self.kirchhoff_meshes.windows(2).all(|w| w[1] == 2 * w[0]), "kirchhoff_meshes", || {
            "each mesh must double the previous one".into()
        })
    }
}

impl ExperimentConfig {
    /// A configuration with default parameters for `kind`.
    pub fn new(kind: ExperimentKind, domain: &str, seed: u64) -> Self {
        let mut c = Self {
            kind,
            domain: domain.into(),
            seed,
            output: default_output(),
            policy: ExecPolicy::Parallel,
            semigroup: None,
            spde: None,
            frozen: None,
            local_time: None,
            equilibration: None,
            selfchecks: None,
            base_dir: None,
        };
        c.fill_defaults();
        c
    }

    /// Adds the default parameter section of the kind when it is missing.
    fn fill_defaults(&mut self) {
        match self.kind {
            ExperimentKind::SemigroupConvergence => _ = self.semigroup.get_or_insert_with(Default::default),
            ExperimentKind::SpdeConvergence => _ = self.spde.get_or_insert_with(Default::default),
            ExperimentKind::FrozenSlow => _ = self.frozen.get_or_insert_with(Default::default),
            ExperimentKind::LocalTime => _ = self.local_time.get_or_insert_with(Default::default),
            ExperimentKind::Equilibration => _ = self.equilibration.get_or_insert_with(Default::default),
            ExperimentKind::OperatorSelfchecks => _ = self.selfchecks.get_or_insert_with(Default::default),
        }
    }

    /// Parses TOML, or JSON when `json` is set, and validates. Errors carry the line number.
    pub fn parse(src: &str, json: bool) -> Result<Self> {
        let mut cfg: Self = if json {
            serde_json::from_str(src).map_err(|e| Error::Config(format!("line {}: {}", e.line(), strip_position(&e.to_string()))))?
        } else {
            toml::from_str(src).map_err(|e| {
                let line = e.span().map(|s| line_of(src, s.start));
                match line {
                    Some(l) => Error::Config(format!("line {l}: {}", e.message())),
                    None => Error::Config(e.message().to_string()),
                }
            })?
        };
        cfg.validate_inner().map_err(|(section, inv)| {
            let line = find_key_line(src, section, inv.key, json);
            match line {
                Some(l) => Error::Config(format!("line {l}: {}: {}", inv.key, inv.msg)),
                None => Error::Config(format!("{}: {}", inv.key, inv.msg)),
            }
        })?;
        cfg.fill_defaults();
        Ok(cfg)
    }

    /// Reads a `.json` or `.toml` file; relative domain paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let json = path.extension().and_then(|e| e.to_str()) == Some("json");
        let mut cfg = Self::parse(&src, json).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        cfg.domain_spec().map_err(|e| {
            let line = find_key_line(&src, None, "domain", json);
            Error::Config(format!("{}: {}{e}", path.display(), line.map(|l| format!("line {l}: ")).unwrap_or_default()))
        })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_inner().map_err(|(_, inv)| Error::Config(format!("{}: {}", inv.key, inv.msg)))?;
        self.domain_spec().map(|_| ())
    }

    fn validate_inner(&self) -> std::result::Result<(), (Option<&'static str>, Invalid)> {
        let sections: [(&'static str, bool); 6] = [
            ("semigroup-convergence", self.semigroup.is_some()),
            ("spde-convergence", self.spde.is_some()),
            ("frozen-slow", self.frozen.is_some()),
            ("local-time", self.local_time.is_some()),
            ("equilibration", self.equilibration.is_some()),
            ("operator-selfchecks", self.selfchecks.is_some()),
        ];
        for (name, present) in sections {
            if present && name != self.kind.name() {
                return Err((
                    Some(name),
                    Invalid { key: "kind", msg: format!("section [{name}] does not belong to kind '{}'", self.kind.name()) },
                ));
            }
        }
        let sec = Some(self.kind.name());
        let r = match self.kind {
            ExperimentKind::SemigroupConvergence => self.semigroup_params().validate(),
            ExperimentKind::SpdeConvergence => self.spde_params().validate(),
            ExperimentKind::FrozenSlow => self.frozen_params().validate(),
            ExperimentKind::LocalTime => self.local_time_params().validate(),
            ExperimentKind::Equilibration => self.equilibration_params().validate(),
            ExperimentKind::OperatorSelfchecks => self.selfcheck_params().validate(),
        };
        r.map_err(|inv| (sec, inv))
    }

    pub fn semigroup_params(&self) -> SemigroupParams {
        self.semigroup.clone().unwrap_or_default()
    }

    pub fn spde_params(&self) -> SpdeParams {
        self.spde.clone().unwrap_or_default()
    }

    pub fn frozen_params(&self) -> FrozenParams {
        self.frozen.clone().unwrap_or_default()
    }

    pub fn local_time_params(&self) -> LocalTimeParams {
        self.local_time.clone().unwrap_or_default()
    }

    pub fn equilibration_params(&self) -> EquilibrationParams {
        self.equilibration.clone().unwrap_or_default()
    }

    pub fn selfcheck_params(&self) -> SelfcheckParams {
        self.selfchecks.clone().unwrap_or_default()
    }

    /// The built-in domain of that name, or the domain file at that path.
    pub fn domain_spec(&self) -> Result<DomainSpec> {
        resolve_domain(&self.domain, self.base_dir.as_deref())
    }

    /// `output`, with a relative path taken against the directory of the loaded file.
    pub fn output_dir(&self) -> PathBuf {
        match &self.base_dir {
            Some(b) if self.output.is_relative() => b.join(&self.output),
            _ => self.output.clone(),
        }
    }

    pub fn complex(&self) -> Result<StripComplex> {
        StripComplex::build(&self.domain_spec()?)
    }

    /// The configuration as TOML (the echo embedded in reports).
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment configs serialize")
    }
}

/// Built-in name or path (relative paths against `base`).
pub fn resolve_domain(domain: &str, base: Option<&Path>) -> Result<DomainSpec> {
    if let Some(spec) = domains::by_name(domain) {
        return Ok(spec);
    }
    let p = Path::new(domain);
    let full = match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    };
    if !full.exists() {
        return Err(Error::Config(format!(
            "domain '{domain}' is neither a built-in ({}) nor an existing file",
            domains::NAMES.join(", ")
        )));
    }
    DomainSpec::load(&full)
}

fn line_of(src: &str, byte: usize) -> usize {
    src[..byte.min(src.len())].matches('\n').count() + 1
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Line of `key` inside `section` (top level when `None`), falling back to the first occurrence anywhere.
fn find_key_line(src: &str, section: Option<&str>, key: &str, json: bool) -> Option<usize> {
    let is_key = |line: &str| {
        let t = line.trim_start();
        if json {
            t.starts_with(&format!("\"{key}\""))
        } else {
            t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        }
    };
    let mut current: Option<String> = None;
    let mut any = None;
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if json {
            if let Some(sec) = section {
                if t.starts_with(&format!("\"{sec}\"")) {
                    current = Some(sec.to_string());
                }
            }
        } else if t.starts_with('[') {
            current = Some(t.trim_matches(|c| c == '[' || c == ']').trim().to_string());
            if section.is_none() {
                continue;
            }
        }
        if is_key(line) {
            any.get_or_insert(i + 1);
            let here = match section {
                Some(s) => current.as_deref() == Some(s),
                None => current.is_none(),
            };
            if here {
                return Some(i + 1);
            }
        }
    }
    if section.is_some() && key == "kind" {
        // a misplaced section: point at its header
        let sec = section?;
        return src.lines().position(|l| l.trim() == format!("[{sec}]") || l.trim_start().starts_with(&format!("\"{sec}\""))).map(|i| i + 1);
    }
    any
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::parse("kind = \"frozen-slow\"\nseed = 3\n", false).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::FrozenSlow);
        assert_eq!(cfg.frozen_params(), FrozenParams::default());
        assert_eq!(cfg.domain, "single-strip");
        assert!(cfg.to_toml().contains("[frozen-slow]"));
    }

    #[test]
    fn range_errors_name_the_line() {
        let src = "kind = \"frozen-slow\"\nseed = 3\n\n[frozen-slow]\npairs = 10\neps = [0.2, 1.5]\n";
        let err = ExperimentConfig::parse(src, false).unwrap_err().to_string();
        assert!(err.contains("line 6") && err.contains("eps"), "{err}");
    }

    #[test]
    fn dt_above_the_limit_is_rejected() {
        let src = "kind = \"local-time\"\n[local-time]\ndt_factor = 5.0\n";
        let err = ExperimentConfig::parse(src, false).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("eps²/10"), "{err}");
    }

    #[test]
    fn syntax_and_unknown_keys_name_the_line() {
        let err = ExperimentConfig::parse("kind = \"frozen-slow\"\n[frozen-slow]\npairz = 3\n", false).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let err = ExperimentConfig::parse("kind = \"nope\"\n", false).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
        let err = ExperimentConfig::parse("{\n  \"kind\": \"frozen-slow\",\n  \"seed\": -1\n}", true).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn json_range_errors_name_the_line() {
        let src = "{\n  \"kind\": \"spde-convergence\",\n  \"spde-convergence\": {\n    \"dt\": 0.01,\n    \"tau\": 5.0\n  }\n}";
        let err = ExperimentConfig::parse(src, true).unwrap_err().to_string();
        assert!(err.contains("line 5") && err.contains("tau"), "{err}");
    }

    #[test]
    fn foreign_sections_are_rejected() {
        let src = "kind = \"frozen-slow\"\n\n[local-time]\npaths = 10\n";
        let err = ExperimentConfig::parse(src, false).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn missing_domain_files_are_reported() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::OperatorSelfchecks, "no/such/file.toml", 0);
        assert!(cfg.validate().is_err());
        cfg.domain = "fork".into();
        cfg.validate().unwrap();
    }

    #[test]
    fn echo_round_trips() {
        let cfg = ExperimentConfig::new(ExperimentKind::SpdeConvergence, "fork", 9);
        let back = ExperimentConfig::parse(&cfg.to_toml(), false).unwrap();
        assert_eq!(back, cfg);
    }
}
