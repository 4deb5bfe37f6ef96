//! Configuration-driven sweeps for the anisotropic Rabi model: TOML in,
//! CSV tables and SVG figures out.

pub mod config;
pub mod csv;
pub mod run;
pub mod svg;

pub use config::{load, resolve, ConfigError, ConfigFile, RunConfig};
pub use run::{execute, Command, Output, RunError, VERSION};

/// Environment variable overriding the configured worker count.
pub const WORKERS_ENV: &str = "ARM_SIM_WORKERS";

/// Worker count from the environment, then the configuration; `None` keeps
/// the rayon default.
pub fn worker_count(configured: Option<usize>) -> Result<Option<usize>, ConfigError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(ConfigError::Invalid(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(configured),
    }
}

/// Run `command` inside a dedicated thread pool of `workers` threads.
pub fn execute_with_workers(
    command: Command,
    cfg: &RunConfig,
    figure: bool,
    workers: Option<usize>,
) -> Result<Output, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| RunError::Io(format!("cannot start worker pool: {e}")))?;
    pool.install(|| execute(command, cfg, figure))
}
