//! Parallel Monte Carlo driver. Each batch is filled by one task, so the
//! result does not depend on how many workers run.

use rayon::prelude::*;
use sff_core::ensembles::EnsembleSpec;
use sff_core::estimator::MomentAccumulator;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};

/// Fills batch `b` of an empty copy of `template`.
pub fn run_batch(
    spec: &EnsembleSpec,
    template: &MomentAccumulator,
    b: usize,
) -> Result<MomentAccumulator> {
    let mut acc = template.clone();
    for i in template.batch_range(b) {
        let spectrum = spec.sample_spectrum(i)?;
        acc.accumulate_spectrum(i, &spectrum)?;
    }
    Ok(acc)
}

/// Runs the batches selected by `cfg` on `cfg.run.threads` workers and merges
/// them in ascending batch order.
pub fn simulate(cfg: &RunConfig) -> Result<MomentAccumulator> {
    cfg.validate()?;
    let spec = cfg.ensemble_spec()?;
    let template = cfg.accumulator()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.threads)
        .build()
        .map_err(|e| {
            HarnessError::Config(format!(
                "cannot start {} worker threads: {e}",
                cfg.run.threads
            ))
        })?;
    let parts: Vec<Result<MomentAccumulator>> = pool.install(|| {
        cfg.batch_indices()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|b| run_batch(&spec, &template, b))
            .collect()
    });
    let mut acc = template;
    for part in parts {
        acc.merge(&part?)?;
    }
    Ok(acc)
}
