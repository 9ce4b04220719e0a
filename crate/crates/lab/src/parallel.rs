//! Sweep evaluation on a rayon pool. Rows are collected in index order, so
//! the table does not depend on the thread count.

use eehc_core::sweep::{SweepPlan, SweepSpec, SweepTable};

use crate::error::LabError;

pub const THREADS_ENV: &str = "EEHC_LAB_THREADS";

fn thread_cap() -> Result<Option<usize>, LabError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(LabError::Usage(format!("{THREADS_ENV}: expected a positive integer, got `{v}`"))),
        },
    }
}

pub fn run_sweep_parallel(spec: SweepSpec) -> Result<SweepTable, LabError> {
    run_with_threads(spec, thread_cap()?)
}

pub fn run_with_threads(spec: SweepSpec, threads: Option<usize>) -> Result<SweepTable, LabError> {
    use rayon::prelude::*;

    let plan = SweepPlan::new(spec)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| LabError::Usage(format!("{THREADS_ENV}: {e}")))?;
    let rows = pool.install(|| (0..plan.row_count()).into_par_iter().map(|i| plan.evaluate(i)).collect());
    Ok(SweepTable { header: plan.header(), rows })
}
