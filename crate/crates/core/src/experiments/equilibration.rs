use super::config::{EquilibrationParams, ExperimentConfig, ExperimentKind};
use super::frozen::window_grid;
use super::report::{Check, Report, Table};
use crate::error::{Error, Result};
use crate::geometry::StripComplex;
use crate::quadrature::adaptive_simpson;
use crate::reflected::{aligned_dt, frozen_window_heights, terminal_positions, CrossSectionLaw, SimConfig};
use crate::stats::{chi_square_test, ks_statistic};
use crate::types::Point;

pub fn run(sc: &StripComplex, cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.equilibration_params();
    let mut rep = Report::new(ExperimentKind::Equilibration);
    if p.ks {
        relaxation(sc, cfg, &p, &mut rep)?;
    }
    if p.chi2 {
        occupation(sc, cfg, &p, &mut rep)?;
    }
    Ok(rep)
}

/// Heights after one frozen window against the exact reflected law of the section.
fn relaxation(sc: &StripComplex, cfg: &ExperimentConfig, p: &EquilibrationParams, rep: &mut Report) -> Result<()> {
    let (dt, gamma, _) = window_grid(p.ks_eps, p.kappa1, p.ks_dt_factor);
    let ys = frozen_window_heights(sc, p.ks_x, p.ks_y0, p.ks_eps, dt, gamma, p.ks_samples, cfg.seed, cfg.policy)?;
    let law = CrossSectionLaw::at(sc, p.ks_x, 0, p.ks_eps)?;
    let cdf = |y: f64| law.transition_cdf(p.ks_y0, gamma, y);
    let ks = ks_statistic(&ys, cdf);

    let mut sorted = ys.clone();
    sorted.sort_by(f64::total_cmp);
    let mut table = Table::new("relaxation", &["level", "y", "empirical_cdf", "law_cdf"]);
    for q in 1..20 {
        let level = q as f64 / 20.0;
        let i = ((level * sorted.len() as f64) as usize).min(sorted.len() - 1);
        let y = sorted[i];
        let emp = sorted.partition_point(|v| *v <= y) as f64 / sorted.len() as f64;
        table.push(vec![level, y, emp, cdf(y)]);
    }
    rep.checks.push(Check::at_most(&format!("ks distance (eps = {}, window = {gamma:.4e})", p.ks_eps), ks, p.ks_tol));
    rep.tolerance("ks_tol", p.ks_tol);
    rep.tolerance("ks_dt", dt);
    rep.tables.push(table);
    Ok(())
}

/// Terminal positions of independent paths binned against the uniform law on `G`.
fn occupation(sc: &StripComplex, cfg: &ExperimentConfig, p: &EquilibrationParams, rep: &mut Report) -> Result<()> {
    let eps = p.chi2_eps;
    let sim = SimConfig {
        eps,
        dt: aligned_dt(eps * eps / p.chi2_dt_factor, &[p.chi2_t_end]),
        t_end: p.chi2_t_end,
        seed: cfg.seed,
        n_paths: p.chi2_paths,
        stride: 1,
    };
    let z0 = Point::new(p.z0[0], p.z0[1]);
    let ends = terminal_positions(sc, z0, &sim, cfg.policy)?;

    let (nx, ny) = (p.x_bins, p.y_bins);
    let strips = sc.strips();
    let mut probs = Vec::new();
    for s in strips {
        let dx = s.length() / nx as f64;
        for i in 0..nx {
            let a = s.x_lo + i as f64 * dx;
            let mass = adaptive_simpson(&|x: f64| s.width(x), a, a + dx, 1e-12);
            for _ in 0..ny {
                probs.push(mass / ny as f64);
            }
        }
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|q| *q /= total);

    let mut counts = vec![0u64; probs.len()];
    for z in &ends {
        let k = sc.locate(*z).ok_or(Error::OutsideDomain { x: z.x, y: z.y })?;
        let s = &strips[k];
        let x = s.clamp_x(z.x);
        let i = (((x - s.x_lo) / s.length() * nx as f64) as usize).min(nx - 1);
        let (lo, hi) = s.section(x);
        let j = ((((z.y - lo) / (hi - lo)).clamp(0.0, 1.0) * ny as f64) as usize).min(ny - 1);
        counts[(k * nx + i) * ny + j] += 1;
    }
    let (stat, pval) = chi_square_test(&counts, &probs);

    let mut table = Table::new("occupation", &["strip", "x_bin", "y_bin", "observed", "expected"]);
    let n = ends.len() as f64;
    for (idx, (&c, &q)) in counts.iter().zip(&probs).enumerate() {
        let (k, rest) = (idx / (nx * ny), idx % (nx * ny));
        table.push(vec![k as f64, (rest / ny) as f64, (rest % ny) as f64, c as f64, q * n]);
    }
    let mut check = Check::at_least(&format!("uniform occupation p-value (eps = {eps}, T = {})", p.chi2_t_end), pval, p.p_min);
    check.detail = format!("chi2 = {stat:.3}, dof = {}, p = {pval:.4} >= {}", counts.len() - 1, p.p_min);
    rep.checks.push(check);
    rep.tolerance("p_min", p.p_min);
    rep.tables.push(table);
    Ok(())
}
