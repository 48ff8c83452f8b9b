use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::domains;
use crate::graph::{build_graph, GraphSkeleton};

fn graph(spec: crate::geometry::DomainSpec) -> GraphSkeleton {
    build_graph(&crate::geometry::StripComplex::build(&spec).unwrap()).unwrap()
}

fn line(len: f64, n: usize) -> (GraphSkeleton, DiscreteGraphOperator) {
    let g = graph(domains::rectangle_spec(len, 1.0));
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, n)).unwrap();
    (g, op)
}

#[test]
fn constant_width_rows_are_half_second_differences() {
    let (_, op) = line(1.0, 10);
    let d = 0.1;
    let cells = op.edge_nodes(0).to_vec();
    for w in cells.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        let s = 0.5 / (d * d);
        // coefficients are rounded to 23 significant bits
        assert!((op.generator().get(b, a) - s).abs() < 3e-7 * s);
        assert!((op.generator().get(b, c) - s).abs() < 3e-7 * s);
        assert!((op.generator().get(b, b) + 2.0 * s).abs() < 6e-7 * s);
    }
}

#[test]
fn rows_sum_to_exactly_zero() {
    for spec in [domains::single_strip_spec(), domains::fork_spec(), domains::tapered_fork_spec()] {
        let g = graph(spec);
        let op = assemble_generator(&g, &GraphMesh::uniform(&g, 37)).unwrap();
        assert!(op.row_sums().iter().all(|&s| s == 0.0));
        let ones = vec![1.0; op.n()];
        assert!(op.apply(&ones).iter().all(|&s| s == 0.0));
        assert!(op.generator().triplets().iter().all(|&(i, j, v)| i == j || v >= 0.0));
    }
}

#[test]
fn nu_is_invariant_and_corruption_is_detected() {
    let g = graph(domains::fork_spec());
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, 50)).unwrap();
    assert!(stationary_check(&op) <= 1e-12, "{}", stationary_check(&op));
    let i = op.edge_nodes(0)[10];
    let j = op.edge_nodes(0)[11];
    let v = op.generator().get(i, j);
    let bad = op.with_entry(i, j, v + 1e-3).unwrap();
    assert!(stationary_check(&bad) >= 1e-4, "{}", stationary_check(&bad));
}

#[test]
fn total_mass_is_nu_of_the_graph() {
    let g = graph(domains::single_strip_spec());
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, 400)).unwrap();
    let total: f64 = op.mass().iter().sum();
    assert!((total - 4.0 * PI).abs() < 1e-4);
}

#[test]
fn w_symmetry_on_random_pairs() {
    let g = graph(domains::tapered_fork_spec());
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, 40)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let f: Vec<f64> = (0..op.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h: Vec<f64> = (0..op.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = op.inner(&op.apply(&f), &h);
        let b = op.inner(&f, &op.apply(&h));
        assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()), "{a} {b}");
    }
    assert!(op.symmetry_defect() <= 1e-12);
}

/// Piecewise-linear function through the vertex at x = 1 with the given slopes.
fn fork_linear(op: &DiscreteGraphOperator, slopes: [f64; 3]) -> Vec<f64> {
    op.nodes()
        .iter()
        .map(|n| match n.edge() {
            Some(k) => 0.3 + slopes[k] * (n.x - 1.0),
            None => f64::NAN,
        })
        .collect()
}

fn with_vertex_values(op: &DiscreteGraphOperator, mut f: Vec<f64>, slopes: [f64; 3], g: &GraphSkeleton) -> Vec<f64> {
    for (v, vert) in g.vertices.iter().enumerate() {
        let i = op.vertex_node(v).unwrap();
        let k = vert.incident[0].0;
        f[i] = 0.3 + slopes[k] * (vert.x - 1.0);
    }
    f
}

#[test]
fn kirchhoff_on_rectangular_fork() {
    let g = graph(domains::fork_spec());
    // 1·s_A = 0.4·s_B + 0.4·s_C
    let slopes = [1.0, 1.5, 1.0];
    for n in [8, 16, 32, 64] {
        let op = assemble_generator(&g, &GraphMesh::uniform(&g, n)).unwrap();
        let f = with_vertex_values(&op, fork_linear(&op, slopes), slopes, &g);
        let r = vertex_flux_residual(&op, &f, 0).unwrap();
        // zero up to the 23-bit rounding of the link coefficients
        assert!(r.abs() <= 1e-6, "{n}: {r}");
    }
    // slopes violating the condition leave an O(1) imbalance
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, 32)).unwrap();
    let bad = [1.0, 1.0, 1.0];
    let f = with_vertex_values(&op, fork_linear(&op, bad), bad, &g);
    assert!((vertex_flux_residual(&op, &f, 0).unwrap() + 0.2).abs() < 1e-6);
}

#[test]
fn kirchhoff_residual_halves_on_tapered_fork() {
    let g = graph(domains::tapered_fork_spec());
    // widths at the vertex: A 1.0, B 0.4, C 0.4
    let slopes = [1.0, 1.5, 1.0];
    let res: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|&n| {
            let op = assemble_generator(&g, &GraphMesh::uniform(&g, n)).unwrap();
            let f = with_vertex_values(&op, fork_linear(&op, slopes), slopes, &g);
            vertex_flux_residual(&op, &f, 0).unwrap().abs()
        })
        .collect();
    for w in res.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 2.0).abs() <= 0.3, "{res:?}");
    }
}

#[test]
fn semigroup_preserves_constants_and_identity_at_zero() {
    let g = graph(domains::fork_spec());
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, 20)).unwrap();
    let c = vec![0.7; op.n()];
    for m in [SemigroupMethod::DenseExp, SemigroupMethod::CrankNicolson] {
        assert_eq!(apply_semigroup(&op, &c, 0.8, m).unwrap(), c);
        let f = op.sample(&g, |_, x| x.sin()).values;
        assert_eq!(apply_semigroup(&op, &f, 0.0, m).unwrap(), f);
    }
}

#[test]
fn neumann_cosine_decays_at_rate_one_half() {
    let (g, op) = line(PI, 400);
    let f0 = op.sample(&g, |_, x| x.cos()).values;
    let t = 1.0;
    let u = apply_semigroup(&op, &f0, t, SemigroupMethod::CrankNicolson).unwrap();
    let err = op
        .nodes()
        .iter()
        .zip(&u)
        .map(|(n, v)| (v - (-t / 2.0).exp() * n.x.cos()).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-4, "{err}");
}

#[test]
fn dense_exponential_matches_spectral_sum_on_fork() {
    let g = graph(domains::fork_spec());
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, 30)).unwrap();
    let spec = eigen_decompose(&op).unwrap();
    assert!(spec.values[0].abs() < 1e-10);
    assert!(spec.values.iter().all(|&m| m <= 1e-10));
    let phi0 = spec.mode(0);
    assert!(phi0.iter().all(|v| (v - phi0[0]).abs() < 1e-10));
    let f = op.sample(&g, |k, x| (3.0 * x).cos() + k as f64).values;
    let a = apply_semigroup(&op, &f, 0.3, SemigroupMethod::DenseExp).unwrap();
    let b = spec.semigroup(op.mass(), &f, 0.3);
    let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(d <= 1e-8, "{d}");
}

#[test]
fn positivity_and_contraction() {
    let g = graph(domains::tapered_fork_spec());
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, 40)).unwrap();
    let f = op.sample(&g, |k, x| if k == 1 && x < 1.3 { 1.0 } else { 0.0 }).values;
    let u = apply_semigroup(&op, &f, 0.2, SemigroupMethod::CrankNicolson).unwrap();
    assert!(u.iter().all(|&v| v >= -1e-10));
    assert!(op.norm(&u) <= op.norm(&f));
}

#[test]
fn second_order_refinement() {
    let g = graph(domains::single_strip_spec());
    let t = 0.4;
    // a mesh-independent functional of the solution: ⟨e^{tL} f, g⟩_W
    let functional = |n: usize| {
        let op = assemble_generator(&g, &GraphMesh::uniform(&g, n)).unwrap();
        let f = op.sample(&g, |_, x| (x / 2.0).cos()).values;
        let w = op.sample(&g, |_, x| (x - 1.0).powi(2)).values;
        let u = apply_semigroup(&op, &f, t, SemigroupMethod::DenseExp).unwrap();
        op.inner(&u, &w)
    };
    let (j1, j2, j3) = (functional(50), functional(100), functional(200));
    let r = (j1 - j2) / (j2 - j3);
    assert!((r - 4.0).abs() < 0.6, "{j1} {j2} {j3} {r}");
}

#[test]
fn graph_pde_with_unit_forcing_grows_linearly() {
    let g = graph(domains::fork_spec());
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, 16)).unwrap();
    let n = op.n();
    let h = move |_t: f64| vec![1.0; n];
    let traj = solve_graph_pde(&op, &vec![0.0; n], Some(&h), 0.5, 0.01, 10).unwrap();
    for (t, u) in traj.times.iter().zip(&traj.states) {
        assert!(u.iter().all(|v| (v - t).abs() < 1e-12), "{t}");
    }
}

#[test]
fn graph_pde_conserves_mass_and_matches_semigroup() {
    let g = graph(domains::fork_spec());
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, 16)).unwrap();
    let f = op.sample(&g, |k, x| x * x + k as f64).values;
    let dt = default_cn_dt(&op);
    let steps = 200;
    let traj = solve_graph_pde(&op, &f, None, steps as f64 * dt, dt, 1).unwrap();
    let m0: f64 = op.inner(&f, &vec![1.0; op.n()]);
    for u in &traj.states {
        let m: f64 = op.inner(u, &vec![1.0; op.n()]);
        assert!((m - m0).abs() < 1e-12 * m0.abs());
    }
    let s = apply_semigroup(&op, &f, steps as f64 * dt, SemigroupMethod::CrankNicolson).unwrap();
    let d = s.iter().zip(traj.last().unwrap()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-10, "{d}");
}

#[test]
fn ctmc_symmetric_start_gives_zero_mean_odd_observable() {
    let (g, op) = line(2.0, 20);
    let _ = g;
    let sampler = CtmcSampler::new(&op);
    let start = op.locate(crate::types::GraphPoint::on_edge(0, 1.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut w = crate::stats::Welford::new();
    for _ in 0..20_000 {
        let s = sampler.sample(start, 0.3, &mut rng);
        w.push(op.nodes()[s].x - op.nodes()[start].x);
    }
    // the start cell is at 0.95 or 1.05; centre the observable on it
    assert!(w.mean().abs() <= 3.0 * w.stderr() + 1e-12, "{} {}", w.mean(), w.stderr());
    assert_eq!(sampler.sample(start, 0.0, &mut rng), start);
}

#[test]
fn operator_dump_round_trips() {
    let g = graph(domains::fork_spec());
    let op = assemble_generator(&g, &GraphMesh::uniform(&g, 4)).unwrap();
    let d = OperatorDump::new(&op);
    let back: OperatorDump = serde_json::from_str(&d.to_json()).unwrap();
    assert_eq!(back, d);
}

#[test]
fn too_few_cells_are_rejected() {
    let g = graph(domains::fork_spec());
    assert!(assemble_generator(&g, &GraphMesh::uniform(&g, 3)).is_err());
}

proptest! {
    #[test]
    fn constants_are_annihilated(n in 4usize..60, c in -5.0f64..5.0) {
        let g = graph(domains::tapered_fork_spec());
        let op = assemble_generator(&g, &GraphMesh::uniform(&g, n)).unwrap();
        prop_assert!(op.row_sums().iter().all(|&v| v == 0.0));
        prop_assert!(op.apply(&vec![1.0; op.n()]).iter().all(|&v| v == 0.0));
        let scale = c.abs() * op.generator().max_abs();
        prop_assert!(op.apply(&vec![c; op.n()]).iter().all(|&v| v.abs() <= 1e-15 * scale));
    }
}
