//! Execution-width control for the data-parallel kernels.
//!
//! With the `parallel` feature (default) the grid kernels run row-parallel on
//! a rayon pool; without it everything falls back to plain sequential loops.
//! The width is taken from the `SUSY_PAULI_THREADS` environment variable
//! (`0` or unset = automatic, `1` = sequential, `k` = a pool of `k` threads)
//! and can be overridden per thread with [`with_mode`], which is what the
//! benchmarks use to compare both paths in one process.
//!
//! Every kernel is written so that the parallel and sequential paths produce
//! bitwise-identical results: rows are independent work units and cross-row
//! reductions are folded in row order.

use std::cell::Cell;

/// How the row kernels execute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

thread_local! {
    static MODE_OVERRIDE: Cell<Option<ExecMode>> = const { Cell::new(None) };
}

/// Runs `body` with the execution mode forced to `mode` on this thread.
pub fn with_mode<T>(mode: ExecMode, body: impl FnOnce() -> T) -> T {
    MODE_OVERRIDE.with(|cell| {
        let prev = cell.replace(Some(mode));
        let out = body();
        cell.set(prev);
        out
    })
}

fn env_threads() -> usize {
    std::env::var("SUSY_PAULI_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0)
}

/// Resolved execution mode for the current thread.
pub fn mode() -> ExecMode {
    if let Some(m) = MODE_OVERRIDE.with(|cell| cell.get()) {
        return m;
    }
    if cfg!(feature = "parallel") && env_threads() != 1 {
        ExecMode::Parallel
    } else {
        ExecMode::Sequential
    }
}

#[cfg(feature = "parallel")]
mod pool {
    use std::sync::OnceLock;

    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();

    /// Dedicated pool when an explicit width > 1 is requested; `None` means
    /// use the global rayon pool.
    pub(super) fn get() -> Option<&'static rayon::ThreadPool> {
        POOL.get_or_init(|| {
            let n = super::env_threads();
            if n > 1 {
                rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()
            } else {
                None
            }
        })
        .as_ref()
    }
}

/// Applies `f` to each length-`chunk` row of `data`, in parallel when enabled.
///
/// `f` receives the row index and the mutable row slice. Rows are disjoint,
/// so the result does not depend on the execution mode.
pub(crate) fn for_each_row<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    debug_assert_eq!(data.len() % chunk, 0);
    #[cfg(feature = "parallel")]
    if mode() == ExecMode::Parallel {
        use rayon::prelude::*;
        let mut run = || {
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, row)| f(i, row));
        };
        match pool::get() {
            Some(p) => p.install(run),
            None => run(),
        }
        return;
    }
    for (i, row) in data.chunks_mut(chunk).enumerate() {
        f(i, row);
    }
}

/// Same as [`for_each_row`] but hands each worker a reusable scratch value.
pub(crate) fn for_each_row_scratch<T, S, F>(
    data: &mut [T],
    chunk: usize,
    make_scratch: impl Fn() -> S + Sync,
    f: F,
) where
    T: Send,
    S: Send,
    F: Fn(&mut S, usize, &mut [T]) + Sync,
{
    debug_assert_eq!(data.len() % chunk, 0);
    #[cfg(feature = "parallel")]
    if mode() == ExecMode::Parallel {
        use rayon::prelude::*;
        let mut run = || {
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each_init(&make_scratch, |scratch, (i, row)| f(scratch, i, row));
        };
        match pool::get() {
            Some(p) => p.install(run),
            None => run(),
        }
        return;
    }
    let mut scratch = make_scratch();
    for (i, row) in data.chunks_mut(chunk).enumerate() {
        f(&mut scratch, i, row);
    }
}

/// Computes one value per row and folds them in row order.
///
/// The fold is always sequential so reductions are bitwise independent of the
/// execution mode and thread count.
pub(crate) fn sum_rows<T, F>(n_rows: usize, row_value: F) -> T
where
    T: Send + std::iter::Sum<T>,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    if mode() == ExecMode::Parallel {
        use rayon::prelude::*;
        let run = || (0..n_rows).into_par_iter().map(&row_value).collect::<Vec<T>>();
        let partials = match pool::get() {
            Some(p) => p.install(run),
            None => run(),
        };
        return partials.into_iter().sum();
    }
    (0..n_rows).map(row_value).sum()
}
