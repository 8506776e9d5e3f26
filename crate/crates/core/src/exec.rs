//! Per-video work scheduling.
//!
//! Training and decoding map a pure function over videos. Implementations
//! must return results in input order; all reductions happen afterwards in
//! that order, so output is independent of how the map was scheduled.

use alloc::vec::Vec;

pub trait Executor {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync;
}

/// Runs everything on the calling thread.
#[derive(Debug, Default, Clone, Copy)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync,
    {
        items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
    }
}
