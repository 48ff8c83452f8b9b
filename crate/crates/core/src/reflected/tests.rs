use super::*;
use crate::domains;
use crate::par::ExecPolicy;
use crate::rng::{stream, tags};
use crate::stats::Welford;
use crate::types::Point;

#[test]
fn interior_step_leaves_local_time_alone() {
    let sc = domains::rectangle(10.0, 10.0);
    let mut rng = stream(1, tags::PATHS, 0);
    let s = ReflectedState::start(Point::new(5.0, 5.0));
    let t = step_reflected(&sc, &s, 0.5, 1e-4, &mut rng).unwrap();
    assert_eq!(t.phi, 0.0);
    assert_ne!(t.position, s.position);
}

#[test]
fn increment_variances() {
    let eps = 0.4;
    let dt = 1e-4;
    let mut rng = stream(2, tags::PATHS, 0);
    let (mut wx, mut wy) = (Welford::new(), Welford::new());
    for _ in 0..1_000_000 {
        let (a, b) = brownian_increment(dt, &mut rng);
        wx.push(a);
        wy.push(b / eps);
    }
    assert!((wx.variance() / dt - 1.0).abs() < 0.05);
    assert!((wy.variance() / (dt / (eps * eps)) - 1.0).abs() < 0.05);
}

#[test]
fn flat_channel_local_time_rate() {
    // reflected BM with generator ½ d²/dy² on [0, w]: E dφ = dt / w (both sides)
    let w = 1.0;
    let sc = domains::rectangle(40.0, w);
    let cfg = SimConfig { eps: 1.0, dt: 2.5e-4, t_end: 2.0, seed: 3, n_paths: 1000, stride: 4000 };
    let incs: Vec<f64> = ExecPolicy::Parallel
        .map(cfg.n_paths, |i| {
            let mut rng = stream(cfg.seed, tags::PATHS, i as u64);
            let p = simulate_path(&sc, Point::new(20.0, 0.5), &cfg, &mut rng).unwrap();
            p[2].phi - p[1].phi
        });
    let m: Welford = incs.into_iter().collect();
    assert!((m.mean() - 1.0 / w).abs() < 0.05 + 3.0 * m.stderr(), "{} ± {}", m.mean(), m.stderr());
}

#[test]
fn paths_are_reproducible_and_confined() {
    let sc = domains::fork();
    let cfg = SimConfig::with_default_dt(0.3, 1.0, 11, 1);
    // start on the boundary
    let z0 = Point::new(0.5, 0.0);
    let a = simulate_path(&sc, z0, &cfg, &mut stream(11, tags::PATHS, 0)).unwrap();
    let b = simulate_path(&sc, z0, &cfg, &mut stream(11, tags::PATHS, 0)).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|s| sc.contains(s.position)));
    assert!(a.windows(2).all(|w| w[1].phi >= w[0].phi));
    assert!((a.last().unwrap().time - 1.0).abs() < 1e-12);
}

#[test]
fn aligned_steps() {
    let dt = aligned_dt(0.008, &[0.5, 1.0]);
    assert!(dt <= 0.008);
    assert!((dt - 0.5 / 63.0).abs() < 1e-15);
    assert_eq!(aligned_dt(0.01, &[1.0]), 0.01);
    let dt = aligned_dt(0.3 * 0.3 / 20.0, &[1.0]);
    assert!((1.0 / dt - (1.0 / dt).round()).abs() < 1e-9 && dt <= 0.0045);
}

#[test]
fn invalid_configs_are_rejected() {
    let sc = domains::single_strip();
    let mut rng = stream(0, 0, 0);
    let bad_dt = SimConfig { eps: 0.1, dt: 0.01, t_end: 1.0, seed: 0, n_paths: 1, stride: 1 };
    assert!(simulate_path(&sc, Point::new(1.0, 1.0), &bad_dt, &mut rng).is_err());
    let ok = SimConfig::with_default_dt(0.1, 0.01, 0, 1);
    assert!(simulate_path(&sc, Point::new(1.0, 5.0), &ok, &mut rng).is_err());
}

#[test]
fn constant_observable_has_no_spread() {
    let sc = domains::single_strip();
    let cfg = SimConfig::with_default_dt(0.5, 0.5, 5, 64);
    let e = mc_expectation(&sc, Point::new(3.0, 1.0), &cfg, 0.5, &|_| 1.0, ExecPolicy::Parallel).unwrap();
    assert_eq!((e.mean, e.stderr, e.n), (1.0, 0.0, 64));
}

#[test]
fn policies_give_identical_estimates() {
    let sc = domains::single_strip();
    let mut cfg = SimConfig::with_default_dt(0.4, 0.2, 6, 50);
    cfg.dt = aligned_dt(0.4 * 0.4 / 20.0, &[0.1, 0.2]);
    let f = |p: Point| p.x.cos() * (1.0 + p.y);
    let a = mc_expectations(&sc, Point::new(3.0, 1.0), &cfg, &[0.1, 0.2], &f, ExecPolicy::Sequential).unwrap();
    let b = mc_expectations(&sc, Point::new(3.0, 1.0), &cfg, &[0.1, 0.2], &f, ExecPolicy::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn thin_channel_route_matches_direct_steps() {
    let sc = domains::single_strip();
    let eps = 0.2;
    let thin = sc.scaled(eps).unwrap();
    let dt = eps * eps / 20.0;
    let mut rng = stream(8, tags::PATHS, 0);
    let mut s = ReflectedState::start(Point::new(1.0, 2.5));
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let db = brownian_increment(dt, &mut rng);
        let a = advance(&sc, &s, db, eps, dt, MAX_HALVINGS, &mut rng).unwrap();
        let b = step_reflected_thin(&sc, &thin, &s, eps, db, dt).unwrap();
        worst = worst.max(a.position.dist(b.position));
        s = a;
    }
    // the two corrections differ at second order in the overshoot (≈ √dt/ε)
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn frozen_process_with_unit_window_tracks_z() {
    let sc = domains::single_strip();
    let eps = 0.2;
    let cfg = SimConfig { eps, dt: eps * eps / 20.0, t_end: 0.5, seed: 4, n_paths: 1, stride: 1 };
    let path = frozen_slow_path(&sc, Point::new(2.0, 1.0), &cfg, cfg.dt, &mut stream(4, tags::FROZEN, 0)).unwrap();
    let bound = 6.0 * cfg.dt.sqrt() / eps;
    assert!(path.iter().all(|c| c.z.dist(c.z_hat) <= bound));
    assert!(path.iter().all(|c| sc.contains(c.z_hat)));
    assert!(path.windows(2).all(|w| w[1].phi_hat >= w[0].phi_hat));
}

#[test]
fn frozen_process_needs_a_single_strip() {
    let cfg = SimConfig::with_default_dt(0.2, 0.1, 0, 1);
    let err = frozen_slow_path(&domains::fork(), Point::new(0.5, 0.5), &cfg, 0.01, &mut stream(0, 0, 0));
    assert!(err.is_err());
}

#[test]
fn frozen_x_is_constant_within_a_window() {
    let sc = domains::single_strip();
    let cfg = SimConfig { eps: 0.2, dt: 0.002, t_end: 0.2, seed: 1, n_paths: 1, stride: 1 };
    let path = frozen_slow_path(&sc, Point::new(2.0, 1.0), &cfg, 0.02, &mut stream(1, tags::FROZEN, 0)).unwrap();
    for (n, w) in path.windows(2).enumerate() {
        // steps n+1 within the same window as step n keep x̂
        if n % 10 != 0 {
            assert_eq!(w[0].z_hat.x, w[1].z_hat.x);
        }
    }
}

#[test]
fn frozen_window_heights_follow_the_cross_section_law() {
    let sc = domains::single_strip();
    let x = std::f64::consts::FRAC_PI_2;
    let eps = 0.1;
    let dt = eps * eps / 200.0;
    let window = 200.0 * dt;
    let ys = frozen_window_heights(&sc, x, 1.0, eps, dt, window, 4000, 3, ExecPolicy::Parallel).unwrap();
    let law = CrossSectionLaw::at(&sc, x, 0, eps).unwrap();
    let ks = crate::stats::ks_statistic(&ys, |y| law.transition_cdf(1.0, window, y));
    assert!(ks < 0.04, "{ks}");
}
