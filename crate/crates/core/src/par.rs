//! Grid-level data parallelism.
//!
//! Every parallel loop in the crate goes through [`map_indexed`], which
//! preserves input order. With the `parallel` feature disabled the
//! [`Execution::Parallel`] variant runs sequentially, so results never depend
//! on the build.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether work is actually distributed across threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `items`, returning results in input order.
pub fn map_indexed<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect();
    }
    let _ = exec;
    items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

/// Order-preserving map over `0..n`.
pub fn map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Fills consecutive `chunk`-sized pieces of `out`; the closure receives the
/// chunk index and its slice.
pub fn fill_chunks<T, F>(exec: Execution, out: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        out.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    let _ = exec;
    out.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..1000).collect();
        let seq = map_indexed(Execution::Sequential, &xs, |i, x| i as u64 * 3 + x);
        let par = map_indexed(Execution::Parallel, &xs, |i, x| i as u64 * 3 + x);
        assert_eq!(seq, par);
        assert_eq!(map_range(Execution::Parallel, 5, |i| i), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn chunks_match_sequential() {
        let mut a = vec![0usize; 103];
        let mut b = vec![0usize; 103];
        fill_chunks(Execution::Sequential, &mut a, 10, |ci, c| {
            c.iter_mut().enumerate().for_each(|(j, v)| *v = ci * 100 + j)
        });
        fill_chunks(Execution::Parallel, &mut b, 10, |ci, c| {
            c.iter_mut().enumerate().for_each(|(j, v)| *v = ci * 100 + j)
        });
        assert_eq!(a, b);
    }
}
