//! Seeded experiments: single runs, ensembles, rate sweeps, and their outputs.

mod config;
pub mod output;
pub mod pixmap;
mod run;
mod seed;
mod sweep;

pub use config::ExperimentConfig;
pub use pixmap::{render_population, Pixmap, PixmapStyle};
pub use run::{
    run_ensemble, run_ensemble_labels, run_single, EnsembleLabels, GenerationRecord, RunTrajectory,
};
pub use seed::{run_rng, run_seed, splitmix64};
pub use sweep::{
    instability, parse_grid, sweep, sweep_with_progress, window_occupancy, Instability, SweepCell,
    SweepResult,
};
