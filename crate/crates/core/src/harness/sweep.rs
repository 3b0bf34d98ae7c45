//! Sweep execution and worker pools.

use crate::cognizant::CognizantScheme;
use crate::error::{Error, Result};
use crate::feedback::FeedbackScheme;
use crate::harness::config::{Experiment, SweepCell, SweepSpec};
use crate::seeds::derive_seed;
use crate::summary::{SchemeKind, SimSummary};

/// Environment variable holding the worker count. Defaults to the number of
/// available execution units.
pub const WORKERS_ENV: &str = "GAUSSIAN_HELPER_WORKERS";

pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&k| k > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T, F>(workers: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::usage(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Root seed of a sweep cell: the base seed folded with each grid index in
/// turn (snr, helper rate, blocklength, rate).
pub fn cell_seed(base: u64, index: [usize; 4]) -> u64 {
    index.iter().fold(base, |s, &i| derive_seed(s, i as u128))
}

pub fn run_experiment(exp: &Experiment) -> Result<SimSummary> {
    match exp.scheme {
        SchemeKind::Cognizant => Ok(CognizantScheme::new(exp.config.clone())?.simulate()?.summary),
        SchemeKind::Feedback => Ok(FeedbackScheme::new(exp.feedback_config()?)?.simulate()?.summary),
    }
}

#[derive(Debug, Clone)]
pub enum CellOutcome {
    Done(SimSummary),
    Skipped { cell: SweepCell, reason: String },
}

impl CellOutcome {
    pub fn summary(&self) -> Option<&SimSummary> {
        match self {
            CellOutcome::Done(s) => Some(s),
            CellOutcome::Skipped { .. } => None,
        }
    }
}

/// Runs every cell in sweep order. Cells that cannot be configured or that
/// exceed a resource limit are reported as skipped; the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> Vec<CellOutcome> {
    spec.cells()
        .into_iter()
        .map(|cell| {
            let outcome = spec
                .experiment(&cell, cell_seed(spec.seed, cell.index))
                .and_then(|exp| run_experiment(&exp));
            match outcome {
                Ok(s) => CellOutcome::Done(s),
                Err(e) => CellOutcome::Skipped {
                    cell,
                    reason: e.to_string(),
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_sweep;
    use std::collections::HashSet;

    #[test]
    fn cell_seeds_do_not_collide() {
        let mut seen = HashSet::new();
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    for l in 0..10 {
                        assert!(seen.insert(cell_seed(42, [i, j, k, l])));
                    }
                }
            }
        }
    }

    #[test]
    fn oversized_cells_are_skipped() {
        let spec = parse_sweep(
            "snr = 3\nhelper_rate_bits = 0.5\nblocklength = 8, 60\nrate_bits = 0.5\ntrials = 20\n",
        )
        .unwrap();
        let out = run_sweep(&spec);
        assert_eq!(out.len(), 2);
        assert!(out[0].summary().is_some());
        match &out[1] {
            CellOutcome::Skipped { cell, reason } => {
                assert_eq!(cell.blocklength, 60);
                assert!(reason.contains("resource limit"), "{reason}");
            }
            other => panic!("expected skip, got {other:?}"),
        }
    }

    #[test]
    fn worker_pool_runs_closure() {
        assert_eq!(with_workers(2, rayon::current_num_threads).unwrap(), 2);
    }
}
