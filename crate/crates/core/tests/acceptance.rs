//! Acceptance criteria 1–11. Each test prints one `criterion N: PASS|FAIL` line
//! followed by the individual checks, then asserts.
//!
//! Run with `cargo test --release -p chgraph --test acceptance -- --nocapture`.

use chgraph::experiments::{
    run_experiment, Check, ExperimentConfig, ExperimentKind, Report, SemigroupMethod,
};

const SEED: u64 = 20240611;

fn config(kind: ExperimentKind, domain: &str) -> ExperimentConfig {
    ExperimentConfig::new(kind, domain, SEED)
}

fn verdict(n: u32, title: &str, rep: &Report, keep: impl Fn(&Check) -> bool) {
    let checks: Vec<&Check> = rep.checks.iter().filter(|c| keep(c)).collect();
    assert!(!checks.is_empty(), "criterion {n} selected no checks");
    let ok = checks.iter().all(|c| c.passed);
    let mut out = format!("criterion {n}: {} ({title})\n", if ok { "PASS" } else { "FAIL" });
    for c in &checks {
        out.push_str(&format!("    {} {}: {}\n", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail));
    }
    for t in &rep.tables {
        out.push_str(&format!("    table {}:\n", t.name));
        if t.rows.len() <= 12 {
            out.push_str(&format!("      {}\n", t.header.join(", ")));
            for r in &t.rows {
                let cells: Vec<String> = r.iter().map(|v| format!("{v:.6e}")).collect();
                out.push_str(&format!("      {}\n", cells.join(", ")));
            }
        }
    }
    print!("{out}");
    assert!(ok, "criterion {n} failed");
}

fn selfchecks(domain: &str, convergence: bool) -> Report {
    let mut cfg = config(ExperimentKind::OperatorSelfchecks, domain);
    cfg.selfchecks.as_mut().unwrap().convergence = convergence;
    run_experiment(&cfg).unwrap()
}

#[test]
fn criterion_01_operator_algebra() {
    let rep = selfchecks("fork", false);
    let ids = ["(f∨)∧", "|f∨|", "|u∧|", "<u∧", "(A∨)∧", "K1"];
    verdict(1, "operator algebra, 100 randomized cases each", &rep, |c| ids.iter().any(|i| c.name.starts_with(i)));
}

#[test]
fn criterion_02_generator_invariants() {
    let rep = selfchecks("fork", true);
    verdict(2, "generator invariants and Neumann spectrum", &rep, |c| {
        c.name.contains("L·1") || c.name.contains("νᵀL") || c.name.contains("W-symmetry") || c.name.contains("spectrum")
    });
}

#[test]
fn criterion_03_kirchhoff() {
    for domain in ["fork", "tapered-fork"] {
        let rep = selfchecks(domain, false);
        verdict(3, &format!("Kirchhoff flux balance on {domain}"), &rep, |c| c.name.starts_with("vertex"));
    }
}

#[test]
fn criterion_04_semigroup_monte_carlo() {
    let mut cfg = config(ExperimentKind::SemigroupConvergence, "single-strip");
    cfg.semigroup.as_mut().unwrap().method = SemigroupMethod::MonteCarlo;
    let rep = run_experiment(&cfg).unwrap();
    verdict(4, "Monte Carlo semigroup ladder", &rep, |_| true);
}

#[test]
fn criterion_05_semigroup_finite_volume() {
    let mut cfg = config(ExperimentKind::SemigroupConvergence, "single-strip");
    cfg.semigroup.as_mut().unwrap().method = SemigroupMethod::FiniteVolume;
    let rep = run_experiment(&cfg).unwrap();
    verdict(5, "channel vs graph finite volumes", &rep, |_| true);
}

#[test]
fn criterion_06_frozen_slow() {
    let rep = run_experiment(&config(ExperimentKind::FrozenSlow, "single-strip")).unwrap();
    verdict(6, "coupled frozen-slow distance", &rep, |_| true);
}

#[test]
fn criterion_07_local_time_moments() {
    let rep = run_experiment(&config(ExperimentKind::LocalTime, "single-strip")).unwrap();
    verdict(7, "local-time second moments", &rep, |_| true);
}

#[test]
fn criterion_08_equilibration() {
    let rep = run_experiment(&config(ExperimentKind::Equilibration, "single-strip")).unwrap();
    verdict(8, "cross-section relaxation and uniform occupation", &rep, |_| true);
}

#[test]
fn criterion_09_spde_ladder() {
    let mut cfg = config(ExperimentKind::SpdeConvergence, "fork");
    cfg.spde.as_mut().unwrap().covariance = false;
    let rep = run_experiment(&cfg).unwrap();
    verdict(9, "channel vs graph SPDE ladder", &rep, |_| true);
}

#[test]
fn criterion_10_stochastic_convolution() {
    let mut cfg = config(ExperimentKind::SpdeConvergence, "single-strip");
    cfg.spde.as_mut().unwrap().ladder = false;
    let rep = run_experiment(&cfg).unwrap();
    verdict(10, "stochastic convolution covariance", &rep, |_| true);
}

#[test]
fn criterion_11_rescaling_identities() {
    let rep = selfchecks("fork", false);
    verdict(11, "rescaling isometry and noise identity", &rep, |c| {
        c.name.starts_with("J isometry") || c.name.starts_with("noise identity")
    });
}
