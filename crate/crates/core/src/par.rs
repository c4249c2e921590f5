//! Data-parallel building blocks.
//!
//! Every helper assigns work to fixed output slots and keeps each slot's
//! reduction order sequential, so results do not depend on the number of
//! worker threads or on whether the `parallel` feature is enabled.

/// Rows below this count are processed on the calling thread.
#[cfg(feature = "parallel")]
const MIN_PARALLEL_ROWS: usize = 32;

/// Calls `f(row_index, row)` for every `cols`-wide row of `data`.
pub fn for_each_row<F>(data: &mut [f64], cols: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    if cols == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if data.len() / cols >= MIN_PARALLEL_ROWS {
            data.par_chunks_mut(cols).enumerate().for_each(|(i, row)| f(i, row));
            return;
        }
    }
    data.chunks_mut(cols).enumerate().for_each(|(i, row)| f(i, row));
}

/// Evaluates `f` on `0..n` and returns results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if n >= MIN_PARALLEL_ROWS {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Runs `op` on a pool of `workers` threads (0 = library default).
///
/// Without the `parallel` feature this simply calls `op`.
pub fn with_workers<R, F>(workers: usize, op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                return pool.install(op);
            }
        }
    }
    let _ = workers;
    op()
}

/// Number of threads the current context would use.
pub fn current_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_indexed_preserves_order() {
        let out = map_indexed(1000, |i| i * 2);
        assert!(out.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let f = |i: usize| (0..i).map(|k| (k as f64).sqrt()).sum::<f64>();
        let a = with_workers(1, || map_indexed(500, f));
        let b = with_workers(4, || map_indexed(500, f));
        assert_eq!(a, b);
    }

    #[test]
    fn rows_are_visited_once() {
        let mut data = vec![0.0; 100 * 3];
        for_each_row(&mut data, 3, |i, row| row.iter_mut().for_each(|x| *x += i as f64));
        for (i, row) in data.chunks(3).enumerate() {
            assert!(row.iter().all(|&x| x == i as f64));
        }
    }
}
