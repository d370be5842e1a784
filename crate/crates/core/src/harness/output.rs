//! Files written per experiment: fitness curves, macro-state trajectories,
//! sweep grids, population snapshots and the resolved-config echo.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::config::ExperimentConfig;
use super::run::RunTrajectory;
use super::sweep::SweepResult;
use crate::error::{Error, Result};
use crate::evolution::{Agent, Population, Request};
use crate::macrostate::MacroStateDistribution;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish<W: Write>(path: &Path, mut w: W) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

/// `generation,max_fitness,mean_fitness,population_size`, one row per generation.
pub fn write_fitness_csv<W: Write>(out: W, trajectory: &RunTrajectory) -> csv::Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record([
        "generation",
        "max_fitness",
        "mean_fitness",
        "population_size",
    ])?;
    for r in &trajectory.records {
        csv.write_record([
            r.generation.to_string(),
            r.max_fitness.to_string(),
            r.mean_fitness.to_string(),
            r.population_size.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn save_fitness_csv(path: &Path, trajectory: &RunTrajectory) -> Result<()> {
    let w = create(path)?;
    write_fitness_csv(w, trajectory).map_err(|e| csv_io(path, e))
}

/// `generation,label,probability`, one row per occupied macro-state per generation.
pub fn write_macrostate_csv<W: Write>(
    out: W,
    trajectory: &[MacroStateDistribution],
) -> csv::Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["generation", "label", "probability"])?;
    for d in trajectory {
        for (label, p) in d.probabilities.iter().filter(|(_, p)| **p > 0.0) {
            csv.write_record([d.generation.to_string(), label.to_string(), p.to_string()])?;
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn save_macrostate_csv(path: &Path, trajectory: &[MacroStateDistribution]) -> Result<()> {
    let w = create(path)?;
    write_macrostate_csv(w, trajectory).map_err(|e| csv_io(path, e))
}

/// `mutation_rate,crossover_rate,delta,runs,N,ensemble_delta,ensemble_N,p_max`.
pub fn write_sweep_csv<W: Write>(out: W, result: &SweepResult) -> csv::Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record([
        "mutation_rate",
        "crossover_rate",
        "delta",
        "runs",
        "N",
        "ensemble_delta",
        "ensemble_N",
        "p_max",
    ])?;
    for c in &result.cells {
        let i = &c.instability;
        csv.write_record([
            c.mutation_rate.to_string(),
            c.crossover_rate.to_string(),
            i.delta.to_string(),
            c.runs.to_string(),
            i.n.to_string(),
            i.ensemble_delta.to_string(),
            i.ensemble_n.to_string(),
            i.p_max.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn save_sweep_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let w = create(path)?;
    write_sweep_csv(w, result).map_err(|e| csv_io(path, e))
}

/// Writes the resolved config, enough to reproduce the experiment bit for bit.
pub fn save_config_echo(path: &Path, config: &ExperimentConfig) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(config.to_toml_string()?.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    finish(path, w)
}

/// Header of a snapshot file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnapshotHeader {
    pub generation: u64,
    pub config_hash: String,
    pub request: Option<Request>,
}

/// Snapshot text: a header line
/// `# generation=<g> config=<hash> request=<r1,r2,...>` then one agent per
/// line as comma-separated attributes.
pub fn write_snapshot<W: Write>(
    mut out: W,
    population: &Population,
    config_hash: &str,
    request: &Request,
) -> std::io::Result<()> {
    writeln!(
        out,
        "# generation={} config={config_hash} request={request}",
        population.generation()
    )?;
    for a in population.agents() {
        writeln!(out, "{a}")?;
    }
    out.flush()
}

pub fn save_snapshot(
    path: &Path,
    population: &Population,
    config_hash: &str,
    request: &Request,
) -> Result<()> {
    let w = create(path)?;
    write_snapshot(w, population, config_hash, request).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot<R: BufRead>(reader: R, path: &Path) -> Result<(SnapshotHeader, Population)> {
    let bad = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        reason: format!("line {line}: {reason}"),
    };
    let mut lines = reader.lines();
    let head = lines
        .next()
        .ok_or_else(|| bad(1, "empty snapshot".into()))?
        .map_err(|e| Error::io(path, e))?;
    let fields = head
        .strip_prefix('#')
        .ok_or_else(|| bad(1, "missing header".into()))?;
    let mut generation = None;
    let mut config_hash = None;
    let mut request = None;
    for field in fields.split_whitespace() {
        match field.split_once('=') {
            Some(("generation", v)) => {
                generation = Some(
                    v.parse()
                        .map_err(|_| bad(1, format!("bad generation {v:?}")))?,
                )
            }
            Some(("config", v)) => config_hash = Some(v.to_string()),
            Some(("request", v)) => {
                request = Some(
                    Request::new(parse_attrs(v).map_err(|e| bad(1, e))?)
                        .map_err(|e| bad(1, e.to_string()))?,
                )
            }
            _ => return Err(bad(1, format!("unknown header field {field:?}"))),
        }
    }
    let header = SnapshotHeader {
        generation: generation.ok_or_else(|| bad(1, "header lacks generation".into()))?,
        config_hash: config_hash.ok_or_else(|| bad(1, "header lacks config".into()))?,
        request,
    };
    let mut agents = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let attrs = parse_attrs(&line).map_err(|e| bad(i + 2, e))?;
        agents.push(Agent::new(attrs).map_err(|e| bad(i + 2, e.to_string()))?);
    }
    let generation = header.generation;
    Ok((header, Population::new(agents, generation)))
}

pub fn load_snapshot(path: &Path) -> Result<(SnapshotHeader, Population)> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_snapshot(BufReader::new(f), path)
}

fn parse_attrs(s: &str) -> std::result::Result<Vec<u8>, String> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<u8>()
                .map_err(|_| format!("bad attribute {v:?}"))
        })
        .collect()
}
