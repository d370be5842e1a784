//! `evostab`: run evolutionary stability experiments and inspect Markov kernels.
//!
//! Exit status is 0 on success, 1 when the input is invalid (bad flags, bad
//! config values, malformed data files) and 2 when a file cannot be read or
//! written. Diagnostics go to stderr; results go to files or stdout.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use evostab::harness::{
    self, output, parse_grid, render_population, run_ensemble, run_single, ExperimentConfig,
    PixmapStyle,
};
use evostab::macrostate::{
    degree_of_instability, entropy_base, stability_verdict, MacroStateLabel,
};
use evostab::markov::{self, io as mio, Measure};
use evostab::Error;

#[derive(Parser, Debug)]
#[command(
    name = "evostab",
    version,
    about = "Evolutionary stability experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve one run and write its fitness curve, snapshots and a picture.
    Run {
        #[command(flatten)]
        common: Common,
        /// Which run of the ensemble to replay.
        #[arg(long, default_value_t = 0)]
        run_index: u64,
    },
    /// Evolve an ensemble and write macro-state occupation probabilities.
    Ensemble {
        #[command(flatten)]
        common: Common,
    },
    /// Degree of instability over a grid of mutation and crossover rates.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Mutation rates, `start:stop:step` or `a,b,c`.
        #[arg(long, default_value = "0:1:0.1")]
        mutation_grid: String,
        /// Crossover rates, `start:stop:step` or `a,b,c`.
        #[arg(long, default_value = "0:1:0.1")]
        crossover_grid: String,
    },
    /// Draw a population snapshot as a PPM image.
    Visualize {
        /// Snapshot file written by `run`.
        #[arg(long)]
        snapshot: PathBuf,
        /// Config supplying the request when the snapshot header lacks one.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output image.
        #[arg(long, default_value = "population.ppm")]
        out: PathBuf,
        #[arg(long, default_value_t = 8)]
        cell_width: usize,
        #[arg(long, default_value_t = 2)]
        cell_height: usize,
    },
    /// Analyse a transition matrix stored as CSV.
    Markov {
        #[arg(long)]
        matrix: PathBuf,
        /// Print the invariant distribution.
        #[arg(long)]
        invariant: bool,
        /// Print irreducibility, aperiodicity and per-state periods.
        #[arg(long)]
        classify: bool,
        /// Initial measure (CSV) to propagate for `--steps` steps.
        #[arg(long)]
        initial: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        steps: u64,
        /// Residual tolerance of the invariant-distribution solver.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Decimal places in printed numbers.
        #[arg(long, default_value_t = 4)]
        precision: usize,
    },
}

/// Config file plus the overrides every experiment subcommand accepts.
#[derive(Args, Debug)]
struct Common {
    /// TOML config; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    generations: Option<u64>,
    /// Mutation rate in [0, 1].
    #[arg(long)]
    mutation: Option<f64>,
    /// Crossover rate in [0, 1].
    #[arg(long)]
    crossover: Option<f64>,
    /// Directory for output files.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl Common {
    /// Loads the config and applies the flag overrides, validating everything
    /// before any computation.
    fn resolve(&self) -> evostab::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(r) = self.runs {
            cfg.runs = r;
        }
        if let Some(g) = self.generations {
            cfg.generations = g;
        }
        if let Some(m) = self.mutation {
            cfg.set_mutation_rate(m)?;
        }
        if let Some(c) = self.crossover {
            cfg.set_crossover_rate(c)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("evostab: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn dispatch(command: Command) -> evostab::Result<()> {
    match command {
        Command::Run { common, run_index } => cmd_run(&common, run_index),
        Command::Ensemble { common } => cmd_ensemble(&common),
        Command::Sweep {
            common,
            mutation_grid,
            crossover_grid,
        } => cmd_sweep(&common, &mutation_grid, &crossover_grid),
        Command::Visualize {
            snapshot,
            config,
            out,
            cell_width,
            cell_height,
        } => cmd_visualize(
            &snapshot,
            config.as_deref(),
            &out,
            PixmapStyle {
                cell_width,
                cell_height,
            },
        ),
        Command::Markov {
            matrix,
            invariant,
            classify,
            initial,
            steps,
            tol,
            precision,
        } => cmd_markov(
            &matrix,
            invariant,
            classify,
            initial.as_deref(),
            steps,
            tol,
            precision,
        ),
    }
}

fn cmd_run(common: &Common, run_index: u64) -> evostab::Result<()> {
    let mut cfg = common.resolve()?;
    if !cfg.checkpoints.contains(&cfg.generations) {
        cfg.checkpoints.push(cfg.generations);
    }
    let request = cfg.resolve_request()?;
    let hash = cfg.hash()?;
    let dir = &common.out_dir;
    output::save_config_echo(&dir.join("config.toml"), &cfg)?;

    let traj = run_single(&cfg, run_index)?;
    output::save_fitness_csv(&dir.join("fitness.csv"), &traj)?;
    for pop in &traj.checkpoints {
        let name = format!("snapshot-{}.txt", pop.generation());
        output::save_snapshot(&dir.join(name), pop, &hash, &request)?;
    }
    let last = traj.final_record();
    println!(
        "run {run_index}: generation {} max_fitness {} mean_fitness {} size {} macrostate {}",
        last.generation, last.max_fitness, last.mean_fitness, last.population_size, last.label
    );
    let final_pop = traj
        .checkpoints
        .iter()
        .find(|p| p.generation() == cfg.generations)
        .expect("horizon is a checkpoint");
    if final_pop.is_empty() {
        eprintln!("evostab: population is extinct; no picture written");
    } else {
        render_population(final_pop, &request, PixmapStyle::default())?
            .save(&dir.join("population.ppm"))?;
    }
    Ok(())
}

fn cmd_ensemble(common: &Common) -> evostab::Result<()> {
    let cfg = common.resolve()?;
    let dir = &common.out_dir;
    output::save_config_echo(&dir.join("config.toml"), &cfg)?;

    let traj = run_ensemble(&cfg)?;
    output::save_macrostate_csv(&dir.join("macrostates.csv"), &traj)?;

    let last = traj.last().expect("at least one generation");
    let n = entropy_base([last]);
    let delta = degree_of_instability(last, n)?;
    let verdict = stability_verdict(&traj, cfg.window, cfg.tol)?;
    println!(
        "generation {}: p(M_max) = {} delta = {delta} (N = {n})",
        last.generation,
        last.p(MacroStateLabel::MAX)
    );
    println!(
        "converged = {} nonuniform = {} stable = {}",
        verdict.converged, verdict.nonuniform, verdict.stable
    );
    Ok(())
}

fn cmd_sweep(common: &Common, mutation_grid: &str, crossover_grid: &str) -> evostab::Result<()> {
    let cfg = common.resolve()?;
    let mgrid = parse_grid(mutation_grid)?;
    let cgrid = parse_grid(crossover_grid)?;
    let dir = &common.out_dir;
    output::save_config_echo(&dir.join("config.toml"), &cfg)?;

    let total = mgrid.len() * cgrid.len();
    let mut done = 0;
    let result = harness::sweep_with_progress(&cfg, &mgrid, &cgrid, |cell| {
        done += 1;
        eprintln!(
            "[{done}/{total}] mutation {} crossover {}: delta {:.4}",
            cell.mutation_rate, cell.crossover_rate, cell.instability.delta
        );
    })?;
    output::save_sweep_csv(&dir.join("sweep.csv"), &result)
}

fn cmd_visualize(
    snapshot: &Path,
    config: Option<&Path>,
    out: &Path,
    style: PixmapStyle,
) -> evostab::Result<()> {
    let (header, pop) = output::load_snapshot(snapshot)?;
    let request = match (header.request, config) {
        (Some(r), _) => r,
        (None, Some(path)) => ExperimentConfig::load(path)?.resolve_request()?,
        (None, None) => {
            return Err(Error::invalid(
                "snapshot has no request; pass --config to supply one",
            ))
        }
    };
    render_population(&pop, &request, style)?.save(out)
}

fn format_measure(m: &Measure, precision: usize) -> String {
    let parts: Vec<String> = m
        .weights()
        .iter()
        .map(|w| format!("{w:.precision$}"))
        .collect();
    format!("({})", parts.join(", "))
}

fn cmd_markov(
    matrix: &Path,
    invariant: bool,
    classify: bool,
    initial: Option<&Path>,
    steps: u64,
    tol: f64,
    precision: usize,
) -> evostab::Result<()> {
    let p = mio::load_matrix(matrix)?;
    if !invariant && !classify && initial.is_none() {
        return Err(Error::invalid(
            "nothing to do; pass --invariant, --classify or --initial",
        ));
    }
    if classify {
        let c = markov::classify(&p);
        println!("irreducible = {}", c.irreducible);
        println!("aperiodic = {}", c.aperiodic);
        for (i, period) in c.period_per_state.iter().enumerate() {
            match period {
                Some(d) => println!("period {} = {d}", p.label(i)),
                None => println!("period {} = none", p.label(i)),
            }
        }
    }
    if invariant {
        let pi = markov::invariant_distribution(&p, tol)?;
        println!("{}", format_measure(&pi, precision));
    }
    if let Some(path) = initial {
        let (_, lambda) = mio::load_measure(path)?;
        let m = markov::propagate(&lambda, &markov::n_step(&p, steps))?;
        println!("{}", format_measure(&m, precision));
    }
    Ok(())
}
