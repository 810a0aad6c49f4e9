//! Execution strategy for per-particle and per-cell work.
//!
//! Every implementation must produce results in index order and must not
//! change floating-point evaluation order, so serial and parallel runs are
//! bit-identical. Reductions are always performed serially by the caller.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluates `f(i)` for `i in 0..n`, returning results in index order.
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;

    /// Applies `f(i, &mut items[i])` to every item, returning one output per item.
    fn update_indexed<P, T, F>(&self, items: &mut [P], f: F) -> Vec<T>
    where
        P: Send,
        T: Send,
        F: Fn(usize, &mut P) -> T + Sync + Send;
}

/// Single-threaded executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }

    fn update_indexed<P, T, F>(&self, items: &mut [P], f: F) -> Vec<T>
    where
        P: Send,
        T: Send,
        F: Fn(usize, &mut P) -> T + Sync + Send,
    {
        items.iter_mut().enumerate().map(|(i, p)| f(i, p)).collect()
    }
}
