//! Experiment configuration and its flat key-value file format.
//!
//! The file is TOML with top-level keys only; every key is optional and
//! unknown keys are rejected:
//!
//! ```toml
//! mutation_rate = 0.1
//! crossover_rate = 0.1
//! base_population = 300
//! init_attr_min = 3
//! init_attr_max = 6
//! attr_lo = 1
//! attr_hi = 100
//! parsimony_strength = 1.0
//! size_bounds = [30, 3000]
//! request_len = 5          # used when `request` is absent
//! request_seed = 1         # defaults to a value derived from master_seed
//! # request = [12, 40, 77] # explicit request, overrides the seeded one
//! generations = 1000
//! runs = 200
//! master_seed = 1
//! checkpoints = [1000]
//! window = 50
//! tol = 1e-3
//! ```

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::seed::splitmix64;
use crate::error::{Error, Result};
use crate::evolution::{check_rate, EvolutionParams, Request};

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub params: EvolutionParams,
    /// Explicit request; when absent one is drawn from `request_seed`.
    pub request: Option<Vec<u8>>,
    pub request_seed: Option<u64>,
    pub request_len: usize,
    pub generations: u64,
    pub runs: usize,
    pub master_seed: u64,
    pub checkpoints: Vec<u64>,
    /// Trailing window used for convergence checks and limit estimates.
    pub window: usize,
    pub tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: EvolutionParams::default(),
            request: None,
            request_seed: None,
            request_len: 5,
            generations: 1000,
            runs: 200,
            master_seed: 1,
            checkpoints: Vec::new(),
            window: 50,
            tol: 1e-3,
        }
    }
}

/// On-disk shape: flat, all optional, unknown keys rejected.
#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ConfigFile {
    mutation_rate: Option<f64>,
    crossover_rate: Option<f64>,
    base_population: Option<usize>,
    init_attr_min: Option<usize>,
    init_attr_max: Option<usize>,
    attr_lo: Option<u8>,
    attr_hi: Option<u8>,
    parsimony_strength: Option<f64>,
    size_bounds: Option<(usize, usize)>,
    request: Option<Vec<u8>>,
    request_seed: Option<u64>,
    request_len: Option<usize>,
    generations: Option<u64>,
    runs: Option<usize>,
    master_seed: Option<u64>,
    checkpoints: Option<Vec<u64>>,
    window: Option<usize>,
    tol: Option<f64>,
}

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Extracts the offending key from a toml error message, if it names one.
fn key_of_toml_error(msg: &str) -> String {
    msg.split('`')
        .nth(1)
        .filter(|k| !k.is_empty())
        .unwrap_or("<file>")
        .to_string()
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            bad(&key_of_toml_error(&msg), msg)
        })?;
        let mut cfg = Self::default();
        cfg.apply(file);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config { key, reason } => Error::Config {
                key,
                reason: format!("{reason} (in {})", path.display()),
            },
            other => other,
        })
    }

    fn apply(&mut self, f: ConfigFile) {
        let p = &mut self.params;
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(p.mutation_rate, f.mutation_rate);
        set!(p.crossover_rate, f.crossover_rate);
        set!(p.base_population, f.base_population);
        set!(p.init_attr_min, f.init_attr_min);
        set!(p.init_attr_max, f.init_attr_max);
        set!(p.attr_lo, f.attr_lo);
        set!(p.attr_hi, f.attr_hi);
        set!(p.parsimony_strength, f.parsimony_strength);
        set!(p.size_bounds, f.size_bounds);
        if f.request.is_some() {
            self.request = f.request;
        }
        if f.request_seed.is_some() {
            self.request_seed = f.request_seed;
        }
        set!(self.request_len, f.request_len);
        set!(self.generations, f.generations);
        set!(self.runs, f.runs);
        set!(self.master_seed, f.master_seed);
        set!(self.checkpoints, f.checkpoints);
        set!(self.window, f.window);
        set!(self.tol, f.tol);
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.generations == 0 {
            return Err(bad("generations", "must be at least 1"));
        }
        if self.runs == 0 {
            return Err(bad("runs", "must be at least 1"));
        }
        if self.request_len == 0 {
            return Err(bad("request_len", "must be at least 1"));
        }
        if let Some(r) = &self.request {
            Request::new(r.clone()).map_err(|e| bad("request", e.to_string()))?;
        }
        if self.window < 2 {
            return Err(bad("window", "must be at least 2"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(bad("tol", "must be positive"));
        }
        if let Some(g) = self.checkpoints.iter().find(|&&g| g > self.generations) {
            return Err(bad(
                "checkpoints",
                format!("generation {g} is beyond the horizon {}", self.generations),
            ));
        }
        Ok(())
    }

    /// Seed the request is drawn from when no explicit request is given.
    pub fn resolved_request_seed(&self) -> u64 {
        self.request_seed
            .unwrap_or_else(|| splitmix64(self.master_seed ^ 0x5245_5155_4553_5400))
    }

    /// The request of this experiment: explicit, or `request_len` uniform
    /// attributes drawn from the request seed.
    pub fn resolve_request(&self) -> Result<Request> {
        match &self.request {
            Some(r) => Request::new(r.clone()),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.resolved_request_seed());
                let lo = self.params.attr_lo;
                let hi = self.params.attr_hi;
                Request::new(
                    (0..self.request_len)
                        .map(|_| rng.gen_range(lo..=hi))
                        .collect(),
                )
            }
        }
    }

    pub fn set_mutation_rate(&mut self, rate: f64) -> Result<()> {
        check_rate("mutation_rate", rate)?;
        self.params.mutation_rate = rate;
        Ok(())
    }

    pub fn set_crossover_rate(&mut self, rate: f64) -> Result<()> {
        check_rate("crossover_rate", rate)?;
        self.params.crossover_rate = rate;
        Ok(())
    }

    /// Fully resolved config in the file format, request seed and request included.
    pub fn to_toml_string(&self) -> Result<String> {
        let p = &self.params;
        let file = ConfigFile {
            mutation_rate: Some(p.mutation_rate),
            crossover_rate: Some(p.crossover_rate),
            base_population: Some(p.base_population),
            init_attr_min: Some(p.init_attr_min),
            init_attr_max: Some(p.init_attr_max),
            attr_lo: Some(p.attr_lo),
            attr_hi: Some(p.attr_hi),
            parsimony_strength: Some(p.parsimony_strength),
            size_bounds: Some(p.size_bounds),
            request: Some(self.resolve_request()?.required().to_vec()),
            request_seed: Some(self.resolved_request_seed()),
            request_len: Some(self.request_len),
            generations: Some(self.generations),
            runs: Some(self.runs),
            master_seed: Some(self.master_seed),
            checkpoints: Some(self.checkpoints.clone()),
            window: Some(self.window),
            tol: Some(self.tol),
        };
        toml::to_string(&file).map_err(|e| Error::invalid(e.to_string()))
    }

    /// Short hash of the resolved config, used to tag snapshots.
    pub fn hash(&self) -> Result<String> {
        // FNV-1a over the canonical text
        let text = self.to_toml_string()?;
        let mut h: u64 = 0xCBF2_9CE4_8422_2325;
        for b in text.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        let mut s = String::with_capacity(16);
        write!(s, "{h:016x}").expect("write to string");
        Ok(s)
    }
}
