use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;

use super::config::{ExperimentConfig, ExperimentKind, SelfcheckParams};
use super::report::{Check, Report, Table};
use crate::channel::{assemble_leps, build_channel_grid, lift_noise};
use crate::domains;
use crate::error::Result;
use crate::fv::FvOperator;
use crate::geometry::{StripComplex, VertexKind};
use crate::graph::{build_graph, rescale_j_grid, ChannelField, Decay, GraphFunction, GraphSkeleton, LiftedNoise, NoiseModel, QuadGrid};
use crate::operator::{assemble_generator, eigen_decompose, vertex_flux_residual, DiscreteGraphOperator, GraphMesh};
use crate::rng::{stream, tags, Rng};
use crate::types::End;

pub fn run(sc: &StripComplex, cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.selfcheck_params();
    let g = build_graph(sc)?;
    let mut rep = Report::new(ExperimentKind::OperatorSelfchecks);
    algebra(&g, cfg.seed, &p, &mut rep)?;
    invariants(sc, &g, &p, &mut rep)?;
    kirchhoff(&g, &p, &mut rep)?;
    rescaling(sc, &g, cfg.seed, &p, &mut rep)?;
    if p.convergence {
        spectrum(&p, &mut rep)?;
    }
    rep.tolerance("tol", p.tol);
    rep.tolerance("invariant_tol", p.invariant_tol);
    Ok(rep)
}

fn uniform(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Randomized identities between `H` and `H̄` on the quadrature grid.
fn algebra(g: &GraphSkeleton, seed: u64, p: &SelfcheckParams, rep: &mut Report) -> Result<()> {
    let q = QuadGrid::new(g, p.quad_intervals)?;
    let (ng, nc) = (q.n_graph(), q.n_channel());
    let names = [
        "(f∨)∧ = f",
        "|f∨|_H = |f|_H̄",
        "|u∧|_H̄ <= |u|_H",
        "<u∧, f>_H̄ = <u, f∨>_H",
        "(A∨)∧ = A",
        "K1 ⟂ K2",
    ];
    let mut worst = [0.0f64; 6];
    for case in 0..p.cases {
        let mut rng = stream(seed, tags::CHECKS, case as u64);
        let f = GraphFunction::new(uniform(&mut rng, ng));
        let u = ChannelField::new(uniform(&mut rng, nc));
        let a = DMatrix::from_vec(ng, ng, uniform(&mut rng, ng * ng));

        let fv = q.vee(&f);
        let uw = q.wedge(&u);
        worst[0] = worst[0].max(max_abs_diff(&q.wedge(&fv).values, &f.values) / (1.0 + max_abs(&f.values)));
        let nf = q.norm_graph(&f);
        worst[1] = worst[1].max((q.norm_channel(&fv) - nf).abs() / nf);
        worst[2] = worst[2].max((q.norm_graph(&uw) - q.norm_channel(&u)) / q.norm_channel(&u));
        let (l, r) = (q.inner_graph(&uw, &f), q.inner_channel(&u, &fv));
        worst[3] = worst[3].max((l - r).abs() / (q.norm_channel(&u) * nf));
        let apply = |h: &GraphFunction| GraphFunction::new((&a * DVector::from_column_slice(&h.values)).as_slice().to_vec());
        let af = apply(&f);
        let back = q.wedge(&q.lift_operator(apply, &fv));
        worst[4] = worst[4].max(max_abs_diff(&back.values, &af.values) / (1.0 + max_abs(&af.values)));
        let (u1, u2) = q.split(&u);
        let n12 = q.norm_channel(&u1) * q.norm_channel(&u2);
        let orth = q.inner_channel(&u1, &u2).abs() / n12;
        worst[5] = worst[5].max(orth.max(max_abs(&q.wedge(&u2).values)));
    }
    let mut table = Table::new("algebra", &["identity", "worst_defect", "cases"]);
    for (i, (name, w)) in names.iter().zip(worst).enumerate() {
        table.push(vec![i as f64, w, p.cases as f64]);
        rep.checks.push(Check::at_most(&format!("{name} ({} cases)", p.cases), w, p.tol));
    }
    rep.tables.push(table);
    Ok(())
}

fn fv_checks(name: &str, fv: &FvOperator, tol: f64, table: &mut Table, rep: &mut Report, row: f64) {
    let scale = fv.generator().max_abs();
    let rows = max_abs(&fv.row_sums()) / scale;
    let stat = fv.stationary_residual();
    let sym = fv.symmetry_defect();
    table.push(vec![row, rows, stat, sym]);
    rep.checks.push(Check::at_most(&format!("{name}: L·1 = 0"), rows, tol));
    rep.checks.push(Check::at_most(&format!("{name}: νᵀL = 0"), stat, tol));
    rep.checks.push(Check::at_most(&format!("{name}: W-symmetry"), sym, tol));
}

/// Generator invariants of the graph operator and of the channel operator.
fn invariants(sc: &StripComplex, g: &GraphSkeleton, p: &SelfcheckParams, rep: &mut Report) -> Result<()> {
    let mut table = Table::new("invariants", &["operator", "row_sum", "stationary", "symmetry"]);
    let op = assemble_generator(g, &GraphMesh::uniform(g, p.cells))?;
    fv_checks("graph operator", op.fv(), p.invariant_tol, &mut table, rep, 0.0);
    let grid = build_channel_grid(sc, p.channel_h)?;
    for (i, eps) in [1.0, 0.1].into_iter().enumerate() {
        let cop = assemble_leps(&grid, eps)?;
        fv_checks(&format!("channel operator (eps = {eps})"), cop.fv(), p.invariant_tol, &mut table, rep, 1.0 + i as f64);
    }
    rep.tables.push(table);
    Ok(())
}

/// Piecewise-linear data through vertex `v` whose one-sided width-weighted slopes balance.
fn balanced_linear(g: &GraphSkeleton, op: &DiscreteGraphOperator, v: usize) -> Vec<f64> {
    let vert = &g.vertices[v];
    let deg = vert.incident.len();
    let mut f = vec![0.0; op.n()];
    for (idx, &(k, end)) in vert.incident.iter().enumerate() {
        let e = &g.edges[k];
        // outward derivative a_k / l_k with Σ a_k = 0
        let a = if idx == 0 { (deg - 1) as f64 } else { -1.0 };
        let slope_out = a / e.width(e.end_x(end));
        let sign = if end == End::Lo { 1.0 } else { -1.0 };
        for &i in op.edge_nodes(k) {
            f[i] = 0.3 + sign * slope_out * (op.nodes()[i].x - vert.x);
        }
    }
    if let Some(i) = op.vertex_node(v) {
        f[i] = 0.3;
    }
    f
}

/// Flux imbalance at interior vertices under mesh doubling.
fn kirchhoff(g: &GraphSkeleton, p: &SelfcheckParams, rep: &mut Report) -> Result<()> {
    let interior: Vec<usize> =
        g.vertices.iter().enumerate().filter(|(_, v)| v.kind == VertexKind::Interior).map(|(i, _)| i).collect();
    if interior.is_empty() {
        return Ok(());
    }
    let mut table = Table::new("kirchhoff", &["vertex", "cells", "residual"]);
    let mut res = vec![Vec::new(); interior.len()];
    for &n in &p.kirchhoff_meshes {
        let op = assemble_generator(g, &GraphMesh::uniform(g, n))?;
        for (r, &v) in res.iter_mut().zip(&interior) {
            let f = balanced_linear(g, &op, v);
            let x = vertex_flux_residual(&op, &f, v).unwrap_or(f64::NAN).abs();
            table.push(vec![v as f64, n as f64, x]);
            r.push(x);
        }
    }
    for (r, &v) in res.iter().zip(&interior) {
        if r.iter().all(|x| *x <= p.kirchhoff_exact_tol) {
            rep.checks.push(Check::at_most(&format!("vertex {v}: flux balance exact"), max_abs(r), p.kirchhoff_exact_tol));
        } else {
            let ratios: Vec<f64> = r.windows(2).map(|w| w[0] / w[1]).collect();
            let dev = ratios.iter().map(|q| (q - p.kirchhoff_ratio).abs()).fold(0.0, f64::max);
            let mut c = Check::at_most(&format!("vertex {v}: residual ratio under doubling"), dev, p.kirchhoff_ratio_tol);
            c.detail = format!("ratios {ratios:.3?}, max |ratio − {}| = {dev:.3} <= {}", p.kirchhoff_ratio, p.kirchhoff_ratio_tol);
            rep.checks.push(c);
        }
    }
    rep.tolerance("kirchhoff_ratio_tol", p.kirchhoff_ratio_tol);
    rep.tolerance("kirchhoff_exact_tol", p.kirchhoff_exact_tol);
    rep.tables.push(table);
    Ok(())
}

/// `J` isometry between thin grids and the noise identity on both channel discretizations.
fn rescaling(sc: &StripComplex, g: &GraphSkeleton, seed: u64, p: &SelfcheckParams, rep: &mut Report) -> Result<()> {
    let [e1, e2] = p.j_eps;
    let q1 = QuadGrid::thin(g, p.quad_intervals, e1)?;
    let q2 = QuadGrid::thin(g, p.quad_intervals, e2)?;
    let mut worst: f64 = 0.0;
    for case in 0..p.cases {
        let mut rng = stream(seed, tags::CHECKS, (p.cases + case) as u64);
        let u = ChannelField::new(uniform(&mut rng, q1.n_channel()));
        let v = rescale_j_grid(&u, &q1, &q2)?;
        let (a, b) = (q1.norm_channel(&u), q2.norm_channel(&v));
        worst = worst.max((a - b).abs() / a);
    }
    rep.checks.push(Check::at_most(&format!("J isometry ({} cases)", p.cases), worst, p.invariant_tol));

    let decay = Decay::Geometric { r: 0.5, amp: 1.0 };
    let q = QuadGrid::new(g, p.quad_intervals)?;
    let xs: Vec<f64> = q.nodes().iter().map(|n| n.x).collect();
    let model = NoiseModel::cosine(q.nu_weights(), &xs, &decay, p.noise_modes, 1e3)?;
    let quad_lift = LiftedNoise::new(model.clone(), |f| q.vee(f).values, q.area_weights().to_vec());

    let grid = build_channel_grid(sc, p.channel_h)?;
    let gxs: Vec<f64> = grid.groups().iter().map(|c| c.x).collect();
    let gmodel = NoiseModel::cosine(&grid.group_areas(), &gxs, &decay, p.noise_modes, 1e3)?;
    let fv_lift = lift_noise(&grid, gmodel.clone());

    let (mut quad_bad, mut fv_bad) = (0usize, 0usize);
    for case in 0..p.cases {
        let mut rng = stream(seed, tags::CHECKS, (2 * p.cases + case) as u64);
        let db = uniform(&mut rng, p.noise_modes);
        let w = q.wedge(&ChannelField::new(quad_lift.increment(&db)));
        quad_bad += usize::from(w.values != model.increment(&db).values);
        fv_bad += usize::from(grid.wedge(&fv_lift.increment(&db)) != gmodel.increment(&db).values);
    }
    rep.checks.push(Check::flag(
        "noise identity bit-exact (quadrature grid)",
        quad_bad == 0,
        format!("{quad_bad} of {} cases differ", p.cases),
    ));
    rep.checks.push(Check::flag(
        "noise identity bit-exact (finite-volume grid)",
        fv_bad == 0,
        format!("{fv_bad} of {} cases differ", p.cases),
    ));
    Ok(())
}

/// Eigenvalues of a single constant-width edge against `−½(jπ/L)²`.
fn spectrum(p: &SelfcheckParams, rep: &mut Report) -> Result<()> {
    let len = p.spectrum_length;
    let sc = domains::rectangle(len, 1.0);
    let g = build_graph(&sc)?;
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, p.spectrum_cells))?;
    let spec = eigen_decompose(&op)?;
    let mut table = Table::new("spectrum", &["j", "computed", "exact", "relative_error"]);
    let mut worst: f64 = 0.0;
    for j in 1..=p.spectrum_modes {
        let exact = -0.5 * (j as f64 * PI / len).powi(2);
        let mu = spec.values[j];
        let rel = ((mu - exact) / exact).abs();
        table.push(vec![j as f64, mu, exact, rel]);
        worst = worst.max(rel);
    }
    rep.checks.push(Check::at_most(
        &format!("Neumann edge spectrum, j <= {} at {} cells", p.spectrum_modes, p.spectrum_cells),
        worst,
        p.spectrum_tol,
    ));
    rep.tolerance("spectrum_tol", p.spectrum_tol);
    rep.tables.push(table);
    Ok(())
}
