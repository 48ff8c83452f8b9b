//! Configuration-driven experiments: every run yields CSV tables, PASS/FAIL checks
//! and a JSON metadata file echoing the configuration and tolerances.

mod config;
mod equilibration;
mod frozen;
mod observable;
mod report;
mod selfchecks;
mod semigroup;
mod spde;

pub use config::{
    resolve_domain, EquilibrationParams, ExperimentConfig, ExperimentKind, FrozenParams, LocalTimeParams, SelfcheckParams,
    SemigroupMethod, SemigroupParams, SpdeParams,
};
pub use frozen::window_grid;
pub use observable::{Observable, OBSERVABLE_NAMES};
pub use report::{Check, Report, Table};
pub use semigroup::{graph_value, section_average};

use crate::error::Result;

/// Runs the experiment described by `cfg` (in memory; see [`Report::write`]).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let sc = cfg.complex()?;
    match cfg.kind {
        ExperimentKind::SemigroupConvergence => semigroup::run(&sc, cfg),
        ExperimentKind::SpdeConvergence => spde::run(&sc, cfg),
        ExperimentKind::FrozenSlow => frozen::run_frozen_slow(&sc, cfg),
        ExperimentKind::LocalTime => frozen::run_local_time(&sc, cfg),
        ExperimentKind::Equilibration => equilibration::run(&sc, cfg),
        ExperimentKind::OperatorSelfchecks => selfchecks::run(&sc, cfg),
    }
}
