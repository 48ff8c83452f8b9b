use super::config::{ExperimentConfig, ExperimentKind, SemigroupMethod, SemigroupParams};
use super::report::{Check, Report, Table};
use crate::channel::{assemble_leps, build_channel_grid, induced_graph_operator, solve_channel_pde};
use crate::error::{Error, Result};
use crate::geometry::StripComplex;
use crate::graph::{build_graph, GraphSkeleton};
use crate::operator::{
    apply_semigroup, assemble_generator, solve_graph_pde, DiscreteGraphOperator, GraphMesh, SemigroupMethod as Exp,
    DENSE_LIMIT,
};
use crate::quadrature::gauss_legendre_16;
use crate::reflected::{aligned_dt, mc_expectations, SimConfig};
use crate::types::{End, GraphPoint, Point};

pub fn run(sc: &StripComplex, cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.semigroup_params();
    let mut rep = Report::new(ExperimentKind::SemigroupConvergence);
    if p.method != SemigroupMethod::FiniteVolume {
        monte_carlo(sc, cfg, &p, &mut rep)?;
    }
    if p.method != SemigroupMethod::MonteCarlo {
        finite_volume(sc, &p, &mut rep)?;
    }
    Ok(rep)
}

/// Cross-section average of `phi` over the section of strip `k` at `x`.
pub fn section_average(sc: &StripComplex, k: usize, x: f64, phi: impl Fn(Point) -> f64) -> f64 {
    let s = sc.strip(k);
    let x = s.clamp_x(x);
    let (lo, hi) = s.section(x);
    let gl = gauss_legendre_16();
    gl.nodes
        .iter()
        .zip(gl.weights.iter())
        .map(|(t, w)| 0.5 * w * phi(Point::new(x, lo + (hi - lo) * (1.0 + t) / 2.0)))
        .sum()
}

/// Linear interpolation of a node function at a graph point, using the cells of the
/// edge and the vertex unknowns at its ends.
pub fn graph_value(g: &GraphSkeleton, op: &DiscreteGraphOperator, p: GraphPoint, f: &[f64]) -> Result<f64> {
    let (k, x) = match p {
        GraphPoint::Vertex(v) => return Ok(f[op.locate(GraphPoint::Vertex(v))?]),
        GraphPoint::Edge { edge, x } => (edge, x),
    };
    let e = g.edges.get(k).ok_or_else(|| Error::Operator(format!("no edge {k}")))?;
    let mut pts: Vec<(f64, f64)> = op.edge_nodes(k).iter().map(|&i| (op.nodes()[i].x, f[i])).collect();
    for end in [End::Lo, End::Hi] {
        if let Some(i) = op.vertex_node(e.vertex(end)) {
            pts.push((e.end_x(end), f[i]));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.is_empty() {
        return Err(Error::Operator(format!("edge {k} has no unknowns")));
    }
    if x <= pts[0].0 {
        return Ok(pts[0].1);
    }
    for w in pts.windows(2) {
        if x <= w[1].0 {
            let s = (x - w[0].0) / (w[1].0 - w[0].0);
            return Ok(w[0].1 + s * (w[1].1 - w[0].1));
        }
    }
    Ok(pts[pts.len() - 1].1)
}

fn monte_carlo(sc: &StripComplex, cfg: &ExperimentConfig, p: &SemigroupParams, rep: &mut Report) -> Result<()> {
    let z0 = Point::new(p.z0[0], p.z0[1]);
    let obs = p.observable;
    let g = build_graph(sc)?;
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, p.graph_cells))?;
    let f = op.sample(&g, |k, x| section_average(sc, k, x, |q| obs.eval(q))).values;
    let method = if op.n() <= DENSE_LIMIT { Exp::DenseExp } else { Exp::CrankNicolson };
    let at = sc.project_to_graph(z0)?;
    let targets = p
        .times
        .iter()
        .map(|&t| graph_value(&g, &op, at, &apply_semigroup(&op, &f, t, method)?))
        .collect::<Result<Vec<f64>>>()?;

    let t_end = p.times.iter().copied().fold(0.0, f64::max);
    let mut table = Table::new("monte-carlo", &["eps", "t", "mean", "stderr", "n", "target", "gap"]);
    let mut gaps = vec![Vec::new(); p.times.len()];
    let mut last_se = vec![0.0; p.times.len()];
    for &eps in &p.eps {
        let dt = aligned_dt(eps * eps / p.dt_factor, &p.times);
        let sim = SimConfig { eps, dt, t_end, seed: cfg.seed, n_paths: p.paths, stride: 1 };
        let est = mc_expectations(sc, z0, &sim, &p.times, &|q| obs.eval(q), cfg.policy)?;
        for (i, (e, &target)) in est.iter().zip(&targets).enumerate() {
            let gap = (e.mean - target).abs();
            table.push(vec![eps, p.times[i], e.mean, e.stderr, e.n as f64, target, gap]);
            gaps[i].push(gap);
            last_se[i] = e.stderr;
        }
    }
    for (i, &t) in p.times.iter().enumerate() {
        rep.checks.push(Check::decreasing(&format!("mc gap decreasing (t = {t})"), &gaps[i]));
        let final_gap = *gaps[i].last().expect("non-empty ladder");
        let bound = p.mc_se_factor * last_se[i] + p.mc_abs_tol;
        rep.checks.push(Check::at_most(&format!("mc final gap (t = {t})"), final_gap, bound));
    }
    rep.tolerance("mc_abs_tol", p.mc_abs_tol);
    rep.tolerance("mc_se_factor", p.mc_se_factor);
    rep.tables.push(table);
    Ok(())
}

fn finite_volume(sc: &StripComplex, p: &SemigroupParams, rep: &mut Report) -> Result<()> {
    let obs = p.observable;
    let grid = build_channel_grid(sc, p.h)?;
    let gop = induced_graph_operator(&grid)?;
    let phi = grid.sample(|q| obs.eval(q));
    let norm_phi = grid.norm(&phi);
    let gtraj = solve_graph_pde(&gop, &grid.wedge(&phi), None, p.fv_t_end, p.fv_dt, 1)?;
    let lifted: Vec<Vec<f64>> = gtraj.states.iter().map(|f| grid.vee(f)).collect();

    let mut table = Table::new("finite-volume", &["eps", "t", "error"]);
    let mut sup_table = Table::new("finite-volume-sup", &["eps", "sup_error", "relative"]);
    let mut sups = Vec::new();
    for &eps in &p.eps {
        let op = assemble_leps(&grid, eps)?;
        let ctraj = solve_channel_pde(&op, &phi, None, p.fv_t_end, p.fv_dt, 1)?;
        let mut sup: f64 = 0.0;
        for ((t, u), v) in ctraj.times.iter().zip(&ctraj.states).zip(&lifted) {
            if *t < p.fv_t_start - 1e-12 {
                continue;
            }
            let d: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
            let err = grid.norm(&d);
            table.push(vec![eps, *t, err]);
            sup = sup.max(err);
        }
        sup_table.push(vec![eps, sup, sup / norm_phi]);
        sups.push(sup);
    }
    rep.checks.push(Check::decreasing("fv error decreasing", &sups));
    let last = *sups.last().expect("non-empty ladder");
    rep.checks.push(Check::at_most("fv final error", last, p.fv_rel_tol * norm_phi));
    rep.tolerance("fv_rel_tol", p.fv_rel_tol);
    rep.tables.push(table);
    rep.tables.push(sup_table);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains;

    #[test]
    fn section_average_of_y_is_the_midline() {
        let sc = domains::single_strip();
        let x = 1.0f64;
        let a = section_average(&sc, 0, x, |p| p.y);
        assert!((a - (2.0 + x.sin()) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn interpolation_is_exact_for_linear_data() {
        let sc = domains::single_strip();
        let g = build_graph(&sc).unwrap();
        let op = assemble_generator(&g, &GraphMesh::uniform(&g, 20)).unwrap();
        let f: Vec<f64> = op.nodes().iter().map(|n| 2.0 * n.x - 1.0).collect();
        for x in [0.0, 0.01, 1.7, 3.0, 6.2] {
            let v = graph_value(&g, &op, GraphPoint::on_edge(0, x), &f).unwrap();
            assert!((v - (2.0 * x - 1.0)).abs() < 1e-12, "{x}: {v}");
        }
    }
}
