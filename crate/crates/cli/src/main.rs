use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use chgraph::channel::{assemble_leps, build_channel_grid, lift_noise, solve_channel_spde};
use chgraph::experiments::{
    resolve_domain, run_experiment, ExperimentConfig, ExperimentKind, Observable, Report,
};
use chgraph::geometry::StripComplex;
use chgraph::graph::{build_graph, Decay, NoiseModel, DEFAULT_TRACE_BOUND};
use chgraph::operator::{assemble_generator, GraphMesh, OperatorDump};
use chgraph::par::{set_worker_threads, ExecPolicy};
use chgraph::reflected::{aligned_dt, mc_expectations, simulate_path, SimConfig};
use chgraph::rng::{stream, tags};
use chgraph::spde::{Drift, NoiseSource};
use chgraph::types::Point;

/// Reflected diffusions in thin channels and their limits on graphs.
#[derive(Parser)]
#[command(name = "chgraph", version)]
struct Cli {
    /// Worker threads of the parallel pool (default: all cores).
    #[arg(long, global = true, env = "CHGRAPH_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Runs an experiment config and writes its CSV tables and report.json.
    Run {
        config: PathBuf,
        /// Overrides the output directory of the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Parses and validates a config without running it.
    Validate {
        config: PathBuf,
        /// Prints the config with every default filled in.
        #[arg(long)]
        echo: bool,
    },
    /// Runs the operator self-checks on a built-in domain or a domain file.
    Selfcheck {
        domain: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also runs the mesh-convergence checks (spectrum).
        #[arg(long)]
        convergence: bool,
        /// Writes the tables and report.json to this directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo estimates of `E φ(Z^ε(t))`.
    Mc(McArgs),
    /// Solves the channel SPDE on a finite-volume grid.
    Channel(ChannelArgs),
    /// Writes the assembled graph generator as JSON.
    DumpOperator {
        #[arg(long, default_value = "single-strip")]
        domain: String,
        #[arg(long, default_value_t = 50)]
        cells_per_edge: usize,
        /// Output file (default: stdout).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value = "single-strip")]
    domain: String,
    /// One or more values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<f64>,
    /// Time step (default: the largest divisor of every `t` not above ε²/20).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Observation times, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    #[arg(long, default_value = "cos(x)(1+y)")]
    observable: Observable,
    /// Starting point `x,y`.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [std::f64::consts::PI, 1.0])]
    z0: Vec<f64>,
    /// CSV output (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Binary dump of path states (see README).
    #[arg(long)]
    dump_paths: Option<PathBuf>,
    /// Number of paths per ε written to the dump.
    #[arg(long, default_value_t = 100)]
    dump_count: usize,
    /// Store every n-th step in the dump.
    #[arg(long, default_value_t = 1)]
    dump_stride: usize,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct ChannelArgs {
    #[arg(long, default_value = "single-strip")]
    domain: String,
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// `none`, `geometric:<r>[:<modes>]`, `power:<s>[:<modes>]` or `explicit:<λ1>,<λ2>,…`.
    #[arg(long, default_value = "none")]
    noise: String,
    /// Drift: `zero`, `linear[:a]`, `tanh` or `sin`.
    #[arg(long, default_value = "zero")]
    b: String,
    #[arg(long, default_value = "cos(x)(1+y)")]
    u0: Observable,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record every n-th step.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// CSV of `t, norm, mass` (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    /// CSV of the cross-section averaged field at every recorded step.
    #[arg(long)]
    wedge: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.chain().any(|c| c.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when a check failed.
fn dispatch(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        set_worker_threads(n)?;
    }
    match cli.cmd {
        Cmd::Run { config, output } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(o) = output {
                cfg.output = std::path::absolute(o)?;
            }
            finish(&cfg, run_experiment(&cfg)?, true)
        }
        Cmd::Validate { config, echo } => {
            let cfg = ExperimentConfig::load(&config)?;
            cfg.complex()?;
            if echo {
                write!(io::stdout(), "{}", cfg.to_toml())?;
            } else {
                writeln!(io::stdout(), "{}: valid {} config", config.display(), cfg.kind.name())?;
            }
            Ok(true)
        }
        Cmd::Selfcheck { domain, seed, convergence, output } => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::OperatorSelfchecks, &domain, seed);
            if let Some(p) = cfg.selfchecks.as_mut() {
                p.convergence = convergence;
            }
            let write = output.is_some();
            if let Some(o) = output {
                cfg.output = o;
            }
            finish(&cfg, run_experiment(&cfg)?, write)
        }
        Cmd::Mc(a) => mc(a).map(|_| true),
        Cmd::Channel(a) => channel(a).map(|_| true),
        Cmd::DumpOperator { domain, cells_per_edge, output } => {
            let sc = complex(&domain)?;
            let g = build_graph(&sc)?;
            let op = assemble_generator(&g, &GraphMesh::uniform(&g, cells_per_edge))?;
            let json = OperatorDump::new(&op).to_json();
            match output {
                Some(p) => std::fs::write(&p, json).with_context(|| format!("cannot write {}", p.display()))?,
                None => writeln!(io::stdout(), "{json}")?,
            }
            Ok(true)
        }
    }
}

fn finish(cfg: &ExperimentConfig, rep: Report, write: bool) -> Result<bool> {
    if write {
        let files = rep.write(cfg, &cfg.output_dir())?;
        for f in files {
            eprintln!("wrote {}", f.display());
        }
    }
    write!(io::stdout(), "{}", rep.summary())?;
    Ok(rep.passed())
}

fn complex(domain: &str) -> Result<StripComplex> {
    let spec = resolve_domain(domain, None)?;
    Ok(StripComplex::build(&spec)?)
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn mc(a: McArgs) -> Result<()> {
    let sc = complex(&a.domain)?;
    let z0 = Point::new(a.z0[0], a.z0[1]);
    let t_end = a.t.iter().copied().fold(0.0, f64::max);
    let policy = if a.sequential { ExecPolicy::Sequential } else { ExecPolicy::Parallel };
    let phi = a.observable;
    let mut out = csv::Writer::from_writer(sink(a.output.as_deref())?);
    out.write_record(["eps", "t", "mean", "stderr", "n"])?;
    let mut dump = a.dump_paths.as_deref().map(|p| sink(Some(p))).transpose()?;
    for &eps in &a.eps {
        let dt = a.dt.unwrap_or_else(|| aligned_dt(eps * eps / 20.0, &a.t));
        let cfg = SimConfig { eps, dt, t_end, seed: a.seed, n_paths: a.paths, stride: a.dump_stride };
        let est = mc_expectations(&sc, z0, &cfg, &a.t, &|p| phi.eval(p), policy)?;
        for (t, e) in a.t.iter().zip(&est) {
            out.write_record([eps.to_string(), t.to_string(), e.mean.to_string(), e.stderr.to_string(), e.n.to_string()])?;
        }
        if let Some(w) = dump.as_mut() {
            // Same streams as the estimates, so the dumped paths are the first ones used above.
            for i in 0..a.dump_count.min(a.paths) {
                let mut rng = stream(a.seed, tags::PATHS, i as u64);
                for s in simulate_path(&sc, z0, &cfg, &mut rng)? {
                    for v in [eps, i as f64, s.time, s.position.x, s.position.y, s.phi] {
                        w.write_all(&v.to_le_bytes())?;
                    }
                }
            }
        }
    }
    out.flush()?;
    if let Some(mut w) = dump {
        w.flush()?;
    }
    Ok(())
}

fn parse_noise(spec: &str) -> Result<(Decay, usize)> {
    let spec = spec.trim();
    if spec == "none" {
        return Ok((Decay::Explicit { lambdas: vec![0.0] }, 1));
    }
    let (law, rest) = spec.split_once(':').with_context(|| format!("bad noise spec `{spec}`"))?;
    let parts: Vec<&str> = rest.split(':').collect();
    let modes = |i: usize| -> Result<usize> {
        parts.get(i).map_or(Ok(4), |m| m.trim().parse().with_context(|| format!("bad mode count in `{spec}`")))
    };
    let num = |s: &str| -> Result<f64> { s.trim().parse().with_context(|| format!("bad number `{s}` in `{spec}`")) };
    Ok(match law {
        "geometric" => (Decay::Geometric { r: num(parts[0])?, amp: 1.0 }, modes(1)?),
        "power" => (Decay::Power { s: num(parts[0])?, amp: 1.0 }, modes(1)?),
        "explicit" => {
            let lambdas = rest.split(',').map(num).collect::<Result<Vec<_>>>()?;
            let n = lambdas.len();
            (Decay::Explicit { lambdas }, n)
        }
        _ => bail!("unknown noise law `{law}` (expected none, geometric, power or explicit)"),
    })
}

fn channel(a: ChannelArgs) -> Result<()> {
    let sc = complex(&a.domain)?;
    let (decay, modes) = parse_noise(&a.noise)?;
    let drift = Drift::parse(&a.b)?;
    let grid = build_channel_grid(&sc, a.h)?;
    let op = assemble_leps(&grid, a.eps)?;
    let xs: Vec<f64> = grid.groups().iter().map(|g| g.x).collect();
    let model = NoiseModel::cosine(&grid.group_areas(), &xs, &decay, modes, DEFAULT_TRACE_BOUND)?;
    let lifted = lift_noise(&grid, model);
    let u0 = grid.sample(|p| a.u0.eval(p));
    let mut rng = stream(a.seed, tags::NOISE, 0);
    let (traj, _) = solve_channel_spde(&op, &u0, drift, &lifted, a.t_end, a.dt, a.stride, NoiseSource::Fresh(&mut rng))?;

    let mut out = csv::Writer::from_writer(sink(a.output.as_deref())?);
    out.write_record(["t", "norm", "mass"])?;
    for (t, u) in traj.times.iter().zip(&traj.states) {
        out.write_record([t.to_string(), op.norm(u).to_string(), op.total_mass(u).to_string()])?;
    }
    out.flush()?;
    if let Some(p) = &a.wedge {
        let mut w = csv::Writer::from_writer(sink(Some(p))?);
        w.write_record(["t", "group", "edge", "x", "value"])?;
        for (t, u) in traj.times.iter().zip(&traj.states) {
            for (k, (g, v)) in grid.groups().iter().zip(grid.wedge(u)).enumerate() {
                w.write_record([t.to_string(), k.to_string(), g.edge.to_string(), g.x.to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
    }
    Ok(())
}
