use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use actseg_core::Executor;

/// Maps over items on up to `jobs` scoped threads. Items are claimed from a
/// shared counter and results land in input order, so the output never
/// depends on scheduling.
#[derive(Debug, Clone, Copy)]
pub struct Threads {
    jobs: usize,
}

impl Threads {
    pub fn new(jobs: usize) -> Self {
        Threads { jobs: jobs.max(1) }
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }
}

impl Executor for Threads {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync,
    {
        let workers = self.jobs.min(items.len());
        if workers <= 1 {
            return items.iter().enumerate().map(|(i, x)| f(i, x)).collect();
        }
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(item) = items.get(i) else { break };
                    let r = f(i, item);
                    slots.lock().expect("worker panicked")[i] = Some(r);
                });
            }
        });
        slots
            .into_inner()
            .expect("worker panicked")
            .into_iter()
            .map(|r| r.expect("every item mapped"))
            .collect()
    }
}
