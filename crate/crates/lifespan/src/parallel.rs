//! Threaded bootstrap and threshold sweep. Output does not depend on the
//! thread count: every task owns its random substream and results are
//! ordered by task index.

use rayon::prelude::*;

use lifespan_core::design::{CovariateSchema, ExceedanceSet, IndividualRecord};
use lifespan_core::diagnostics::{check_thresholds, sweep_row, SweepResult};
use lifespan_core::fit::FitOptions;
use lifespan_core::inference::{bootstrap_replicate, BootstrapOptions, BootstrapRun};
use lifespan_core::likelihood::ParamVector;

use crate::error::{invalid, CliError, CliResult};

fn pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    if threads == 0 {
        return invalid("--threads must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start {threads} worker threads: {e}")))
}

pub fn bootstrap(
    data: &ExceedanceSet,
    original: &ParamVector,
    opts: &BootstrapOptions,
    threads: usize,
) -> CliResult<BootstrapRun> {
    if opts.replicates == 0 {
        return invalid("need at least one bootstrap replicate");
    }
    if data.is_empty() {
        return invalid("no exceedances to resample");
    }
    let outcomes = pool(threads)?.install(|| {
        (0..opts.replicates)
            .into_par_iter()
            .map(|i| (i, bootstrap_replicate(data, original, i, opts)))
            .collect()
    });
    Ok(BootstrapRun::assemble(opts.replicates, opts.seed, outcomes))
}

pub fn threshold_sweep(
    records: &[IndividualRecord],
    schema: &CovariateSchema,
    thresholds: &[f64],
    options: &FitOptions,
    level: f64,
    threads: usize,
) -> CliResult<SweepResult> {
    check_thresholds(thresholds)?;
    let rows = pool(threads)?.install(|| {
        thresholds
            .par_iter()
            .map(|&u| sweep_row(records, schema, u, options, level))
            .collect()
    });
    Ok(SweepResult { columns: schema.column_names(), rows })
}
