use super::config::{ExperimentConfig, ExperimentKind, SpdeParams};
use super::report::{Check, Report, Table};
use crate::error::Result;
use crate::geometry::StripComplex;
use crate::graph::{build_graph, GraphFunction, NoiseModel, DEFAULT_TRACE_BOUND};
use crate::operator::{assemble_generator, eigen_decompose, GraphMesh};
use crate::rng::{stream, tags};
use crate::spde::{
    compare_channel_graph, discrete_ou_variance, solve_graph_spde, step_count, stochastic_convolution_cov, CompareConfig,
    Drift, NoiseSource,
};
use crate::stats::Welford;

pub fn run(sc: &StripComplex, cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.spde_params();
    let mut rep = Report::new(ExperimentKind::SpdeConvergence);
    if p.ladder {
        ladder(sc, cfg, &p, &mut rep)?;
    }
    if p.covariance {
        covariance(sc, cfg, &p, &mut rep)?;
        stationary(sc, cfg, &p, &mut rep)?;
    }
    Ok(rep)
}

fn ladder(sc: &StripComplex, cfg: &ExperimentConfig, p: &SpdeParams, rep: &mut Report) -> Result<()> {
    let cc = CompareConfig {
        eps: p.eps.clone(),
        h: p.h,
        dt: p.dt,
        t_end: p.t_end,
        tau: p.tau,
        decay: p.decay.clone(),
        n_modes: p.n_modes,
        drift: Drift::parse(&p.drift)?,
        realizations: p.realizations,
        seed: cfg.seed,
        stride: p.stride,
    };
    let u0 = p.u0;
    let rows = compare_channel_graph(sc, &cc, &|q| u0.eval(q), cfg.policy)?;
    let mut table = Table::new("spde-ladder", &["eps", "mean", "stderr", "n"]);
    for r in &rows {
        table.push(vec![r.eps, r.mean, r.stderr, r.n as f64]);
    }
    let means: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    rep.checks.push(Check::decreasing("spde error strictly decreasing", &means));
    rep.tables.push(table);
    Ok(())
}

/// Monte Carlo covariance of the graph SPDE with `b = 0`, `u(0) = 0` against the spectral formula.
fn covariance(sc: &StripComplex, cfg: &ExperimentConfig, p: &SpdeParams, rep: &mut Report) -> Result<()> {
    let g = build_graph(sc)?;
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, p.cov_cells))?;
    let n = op.n();
    let xs: Vec<f64> = op.nodes().iter().map(|nd| nd.x).collect();
    let noise = NoiseModel::cosine(op.mass(), &xs, &p.decay, p.cov_modes, DEFAULT_TRACE_BOUND)?;
    let spec = eigen_decompose(&op)?;
    let c = stochastic_convolution_cov(&spec, op.mass(), &noise, p.cov_t);

    let steps = step_count(p.cov_t, p.cov_dt)?;
    let finals = cfg.policy.map(p.cov_realizations, |r| -> Result<Vec<f64>> {
        let mut rng = stream(cfg.seed, tags::NOISE, r as u64);
        let zero = vec![0.0; n];
        let (traj, _, _) =
            solve_graph_spde(&op, &noise, &zero, Drift::Zero, p.cov_t, p.cov_dt, steps, NoiseSource::Fresh(&mut rng))?;
        Ok(traj.last().expect("at least the final state").to_vec())
    });
    let mut acc = vec![Welford::new(); n * (n + 1) / 2];
    let mut energy = Welford::new();
    for u in finals {
        let u = u?;
        let mut k = 0;
        for i in 0..n {
            for j in 0..=i {
                acc[k].push(u[i] * u[j]);
                k += 1;
            }
        }
        energy.push(op.inner(&u, &u));
    }
    let mut table = Table::new("covariance", &["i", "j", "mc", "stderr", "oracle", "z"]);
    let mut worst: f64 = 0.0;
    let mut k = 0;
    for i in 0..n {
        for j in 0..=i {
            let (m, se) = (acc[k].mean(), acc[k].stderr());
            let z = (m - c[(i, j)]).abs() / se;
            worst = worst.max(z);
            table.push(vec![i as f64, j as f64, m, se, c[(i, j)], z]);
            k += 1;
        }
    }
    // E‖u(t)‖²_W = tr(W C)
    let trace: f64 = (0..n).map(|i| op.mass()[i] * c[(i, i)]).sum();
    let z_energy = (energy.mean() - trace).abs() / energy.stderr();
    rep.checks.push(Check::at_most("covariance entrywise within se_factor·SE", worst, p.cov_se_factor));
    rep.checks.push(Check::at_most("mean energy within se_factor·SE", z_energy, p.cov_se_factor));
    rep.tolerance("cov_se_factor", p.cov_se_factor);
    rep.tables.push(table);
    Ok(())
}

/// Long single-mode run with linear drift against the stationary variance of the scheme.
fn stationary(sc: &StripComplex, cfg: &ExperimentConfig, p: &SpdeParams, rep: &mut Report) -> Result<()> {
    let g = build_graph(sc)?;
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, p.cov_cells))?;
    let spec = eigen_decompose(&op)?;
    let mode = p.ou_mode.min(op.n() - 1);
    let phi = spec.mode(mode);
    let mu = spec.values[mode];
    let noise = NoiseModel::new(vec![p.ou_lambda], vec![GraphFunction::new(phi.clone())], op.mass().to_vec(), DEFAULT_TRACE_BOUND)?;
    let total = p.ou_burn_in + p.ou_steps;
    let t_end = total as f64 * p.ou_dt;
    let mut rng = stream(cfg.seed, tags::NOISE, u64::MAX);
    let drift = Drift::Linear { a: p.ou_drift };
    let (traj, _, _) =
        solve_graph_spde(&op, &noise, &vec![0.0; op.n()], drift, t_end, p.ou_dt, 1, NoiseSource::Fresh(&mut rng))?;
    let sq: Vec<f64> = traj.states[p.ou_burn_in + 1..]
        .iter()
        .map(|u| {
            let c = op.inner(u, &phi);
            c * c
        })
        .collect();
    let b = sq.len() / p.ou_batches;
    let batches: Welford = sq.chunks_exact(b).map(|c| c.iter().sum::<f64>() / b as f64).collect();
    let oracle = discrete_ou_variance(p.ou_lambda, mu, p.ou_drift, p.ou_dt);
    let z = (batches.mean() - oracle).abs() / batches.stderr();
    let mut table = Table::new("stationary-variance", &["mode", "mu", "mc", "stderr", "oracle", "z"]);
    table.push(vec![mode as f64, mu, batches.mean(), batches.stderr(), oracle, z]);
    rep.checks.push(Check::at_most("stationary variance within se_factor·SE", z, p.ou_se_factor));
    rep.tolerance("ou_se_factor", p.ou_se_factor);
    rep.tables.push(table);
    Ok(())
}
