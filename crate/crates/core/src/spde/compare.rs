use serde::{Deserialize, Serialize};

use super::em::{Drift, NoiseSource};
use super::graph::solve_graph_spde;
use crate::channel::{assemble_leps, build_channel_grid, induced_graph_operator, lift_noise, solve_channel_spde};
use crate::error::{Error, Result};
use crate::geometry::StripComplex;
use crate::graph::{weighted_dot, Decay, NoiseModel, DEFAULT_TRACE_BOUND};
use crate::par::ExecPolicy;
use crate::rng::{stream, tags};
use crate::stats::Welford;
use crate::types::Point;

/// Parameters of the coupled channel/graph SPDE comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub eps: Vec<f64>,
    pub h: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Start of the window over which the supremum is taken.
    pub tau: f64,
    pub decay: Decay,
    pub n_modes: usize,
    pub drift: Drift,
    pub realizations: usize,
    pub seed: u64,
    /// Snapshot spacing in steps for the supremum.
    pub stride: usize,
}

impl CompareConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            return Err(Error::Config("every eps must lie in (0, 1]".into()));
        }
        if !(self.tau >= 0.0 && self.tau <= self.t_end) {
            return Err(Error::Config(format!("tau = {} must lie in [0, T = {}]", self.tau, self.t_end)));
        }
        if self.realizations == 0 {
            return Err(Error::Config("at least one realization is required".into()));
        }
        Ok(())
    }
}

/// `E sup_{t∈[τ,T]} ‖u_ε(t)∧ − ū(t)‖²` for one `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub eps: f64,
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

/// Runs the channel SPDE for every `ε` and the graph SPDE on the induced graph
/// operator, all driven by one Brownian log per realization.
pub fn compare_channel_graph(
    sc: &StripComplex,
    cfg: &CompareConfig,
    u0: &(dyn Fn(Point) -> f64 + Sync),
    policy: ExecPolicy,
) -> Result<Vec<CompareRow>> {
    cfg.validate()?;
    let grid = build_channel_grid(sc, cfg.h)?;
    let gop = induced_graph_operator(&grid)?;
    let w = grid.group_areas();
    let xs: Vec<f64> = grid.groups().iter().map(|g| g.x).collect();
    let model = NoiseModel::cosine(&w, &xs, &cfg.decay, cfg.n_modes, DEFAULT_TRACE_BOUND)?;
    let lifted = lift_noise(&grid, model.clone());
    let ops = cfg.eps.iter().map(|&e| assemble_leps(&grid, e)).collect::<Result<Vec<_>>>()?;
    let u0c = grid.sample(u0);
    let u0g = grid.wedge(&u0c);

    let per_real = policy.map(cfg.realizations, |r| -> Result<Vec<f64>> {
        let mut rng = stream(cfg.seed, tags::NOISE, r as u64);
        let (gtraj, log, _) =
            solve_graph_spde(&gop, &model, &u0g, cfg.drift, cfg.t_end, cfg.dt, cfg.stride, NoiseSource::Fresh(&mut rng))?;
        ops.iter()
            .map(|op| {
                let (ctraj, _) =
                    solve_channel_spde(op, &u0c, cfg.drift, &lifted, cfg.t_end, cfg.dt, cfg.stride, NoiseSource::Replay(&log))?;
                let mut sup: f64 = 0.0;
                for ((t, uc), ug) in ctraj.times.iter().zip(&ctraj.states).zip(&gtraj.states) {
                    if *t < cfg.tau - 1e-12 {
                        continue;
                    }
                    let d: Vec<f64> = grid.wedge(uc).iter().zip(ug).map(|(a, b)| a - b).collect();
                    sup = sup.max(weighted_dot(&w, &d, &d));
                }
                Ok(sup)
            })
            .collect()
    });
    let mut acc = vec![Welford::new(); cfg.eps.len()];
    for errs in per_real {
        for (a, e) in acc.iter_mut().zip(errs?) {
            a.push(e);
        }
    }
    Ok(cfg
        .eps
        .iter()
        .zip(&acc)
        .map(|(&eps, a)| CompareRow { eps, mean: a.mean(), stderr: a.stderr(), n: a.count() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains;

    fn small_cfg() -> CompareConfig {
        CompareConfig {
            eps: vec![0.4, 0.2],
            h: 0.1,
            dt: 0.02,
            t_end: 0.4,
            tau: 0.1,
            decay: Decay::Geometric { r: 0.5, amp: 1.0 },
            n_modes: 2,
            drift: Drift::Tanh,
            realizations: 4,
            seed: 5,
            stride: 1,
        }
    }

    #[test]
    fn lifted_data_without_noise_is_exact_on_a_rectangle() {
        // every cell of a column has the same horizontal links, so f∨ stays group-constant;
        // what remains is the 23-bit rounding of the two sets of coefficients
        let mut cfg = small_cfg();
        cfg.decay = Decay::Explicit { lambdas: vec![0.0, 0.0] };
        cfg.drift = Drift::Zero;
        let sq = domains::unit_square();
        let rows = compare_channel_graph(&sq, &cfg, &|p: Point| (2.0 * p.x).cos(), ExecPolicy::Parallel).unwrap();
        assert!(rows.iter().all(|r| r.mean < 1e-12 && r.stderr == 0.0), "{rows:?}");
    }

    #[test]
    fn without_noise_the_comparison_is_deterministic() {
        let mut cfg = small_cfg();
        cfg.decay = Decay::Explicit { lambdas: vec![0.0, 0.0] };
        cfg.drift = Drift::Zero;
        let rows = compare_channel_graph(&domains::fork(), &cfg, &|p: Point| (2.0 * p.x).cos(), ExecPolicy::Parallel).unwrap();
        assert!(rows.iter().all(|r| r.stderr == 0.0));
        assert!(rows[1].mean < rows[0].mean, "{rows:?}");
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = small_cfg();
        let f = |p: Point| p.x + p.y;
        let a = compare_channel_graph(&domains::fork(), &cfg, &f, ExecPolicy::Parallel).unwrap();
        let b = compare_channel_graph(&domains::fork(), &cfg, &f, ExecPolicy::Sequential).unwrap();
        assert_eq!(a, b);
        assert!(a[1].mean < a[0].mean, "{a:?}");
    }

    #[test]
    fn bad_ladders_are_rejected() {
        let mut cfg = small_cfg();
        cfg.eps = vec![1.5];
        assert!(compare_channel_graph(&domains::fork(), &cfg, &|_| 0.0, ExecPolicy::Sequential).is_err());
    }
}
