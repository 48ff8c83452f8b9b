use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{Check, Report, Table};
use crate::error::Result;
use crate::geometry::StripComplex;
use crate::reflected::{coupled_ensemble, fit_and_dominate, gamma_eps, local_time_moments, window_steps, SimConfig};
use crate::stats::Welford;
use crate::types::Point;

/// A step `dt ≤ ε²/factor` dividing `γ_ε`, and `γ_ε` rounded to whole steps.
pub fn window_grid(eps: f64, kappa1: f64, factor: f64) -> (f64, f64, usize) {
    let gamma = gamma_eps(eps, kappa1);
    let dt = gamma / (gamma / (eps * eps / factor) * (1.0 - 1e-12)).ceil();
    let m = window_steps(gamma, dt);
    (dt, m as f64 * dt, m)
}

pub fn run_frozen_slow(sc: &StripComplex, cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.frozen_params();
    let z0 = Point::new(p.z0[0], p.z0[1]);
    let mut rep = Report::new(ExperimentKind::FrozenSlow);
    let mut table = Table::new("frozen-slow", &["eps", "gamma", "dt", "t", "mean", "stderr"]);
    let mut sup_table = Table::new("frozen-slow-sup", &["eps", "gamma", "dt", "sup_mean", "stderr"]);
    let mut sups = Vec::new();
    for &eps in &p.eps {
        let (dt, gamma, _) = window_grid(eps, p.kappa1, p.dt_factor);
        let steps = (p.t_end / dt).round() as usize;
        let record: Vec<usize> =
            (0..=p.grid_points).map(|k| (k as f64 * steps as f64 / p.grid_points as f64).round() as usize).collect();
        let sim = SimConfig { eps, dt, t_end: steps as f64 * dt, seed: cfg.seed, n_paths: p.pairs, stride: 1 };
        let paths = coupled_ensemble(sc, z0, &sim, gamma, &record, cfg.policy)?;
        let mut acc = vec![Welford::new(); record.len()];
        for path in &paths {
            for (a, s) in acc.iter_mut().zip(path) {
                a.push(s.sq_distance());
            }
        }
        let (mut sup, mut sup_se) = (0.0, 0.0);
        for (a, &n) in acc.iter().zip(&record) {
            table.push(vec![eps, gamma, dt, n as f64 * dt, a.mean(), a.stderr()]);
            if a.mean() > sup {
                sup = a.mean();
                sup_se = a.stderr();
            }
        }
        sup_table.push(vec![eps, gamma, dt, sup, sup_se]);
        sups.push(sup);
    }
    rep.checks.push(Check::decreasing("coupled distance decreasing", &sups));
    rep.tables.push(table);
    rep.tables.push(sup_table);
    Ok(rep)
}

pub fn run_local_time(sc: &StripComplex, cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.local_time_params();
    let z0 = Point::new(p.z0[0], p.z0[1]);
    let mut rep = Report::new(ExperimentKind::LocalTime);
    let mut points = Vec::new();
    let mut full = Vec::new();
    let mut dts = Vec::new();
    for &eps in &p.eps {
        let (dt, gamma, m) = window_grid(eps, p.kappa1, p.dt_factor);
        // the window [kγ, (k+1)γ] containing r
        let start = (p.r / gamma).floor() as usize * m;
        let end = start + m;
        let sim = SimConfig { eps, dt, t_end: end as f64 * dt, seed: cfg.seed, n_paths: p.paths, stride: 1 };
        let paths = coupled_ensemble(sc, z0, &sim, gamma, &[start, end], cfg.policy)?;
        let hat: Vec<f64> = paths.iter().map(|s| s[1].phi_hat - s[0].phi_hat).collect();
        let phi: Vec<f64> = paths.iter().map(|s| s[1].phi - s[0].phi).collect();
        points.push((eps, gamma, local_time_moments(&hat, p.p)?));
        full.push(local_time_moments(&phi, p.p)?);
        dts.push(dt);
    }
    let (c, checks) = fit_and_dominate(&points, p.p, p.slack)?;
    let mut table =
        Table::new("local-time", &["eps", "gamma", "dt", "moment", "stderr", "bound", "ratio", "full_moment", "full_stderr"]);
    for ((mc, f), dt) in checks.iter().zip(&full).zip(&dts) {
        table.push(vec![
            mc.eps,
            mc.gamma,
            *dt,
            mc.moment.mean,
            mc.moment.stderr,
            mc.bound,
            mc.moment.mean / mc.bound,
            f.mean,
            f.stderr,
        ]);
    }
    for mc in checks.iter().skip(1) {
        rep.checks.push(Check::at_most(&format!("moment dominated (eps = {})", mc.eps), mc.moment.mean, p.slack * mc.bound));
    }
    rep.tolerance("slack", p.slack);
    rep.tolerance("fitted_c", c);
    rep.tables.push(table);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_are_whole_steps() {
        for eps in [0.2, 0.1, 0.05] {
            let (dt, gamma, m) = window_grid(eps, 0.5, 20.0);
            assert!(dt <= eps * eps / 20.0);
            assert!((gamma - gamma_eps(eps, 0.5)).abs() < 1e-12 * gamma);
            assert!((m as f64 * dt - gamma).abs() < 1e-15);
        }
    }
}
