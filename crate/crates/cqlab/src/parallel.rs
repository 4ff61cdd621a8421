//! Deterministic fork-join over independent work items.
//!
//! Results are collected by index and reduced in index order, so the output
//! is identical for any worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

static THREAD_CAP: OnceLock<usize> = OnceLock::new();

/// Worker count: an explicit [`set_worker_cap`], else the `CQLAB_THREADS`
/// env var, else the number of cores.
pub fn worker_count() -> usize {
    *THREAD_CAP.get_or_init(|| {
        let cores = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1);
        match std::env::var("CQLAB_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
        {
            Some(n) if n >= 1 => n.min(cores),
            _ => cores,
        }
    })
}

/// Caps the worker count for the whole process; must be called before the
/// first parallel region to take effect.
pub fn set_worker_cap(n: usize) {
    let _ = THREAD_CAP.set(n.max(1));
}

/// Applies `f` to `0..count`, possibly on several threads, and returns the
/// results in index order.
pub fn map_indexed<T, F>(count: usize, cap: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = cap.unwrap_or_else(worker_count).clamp(1, worker_count());
    if workers == 1 || count <= 1 {
        return (0..count).map(f).collect();
    }

    let cursor = AtomicUsize::new(0);
    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                let cursor = &cursor;
                let f = &f;
                scope.spawn(move || {
                    let mut done = Vec::new();
                    loop {
                        let i = cursor.fetch_add(1, Ordering::Relaxed);
                        if i >= count {
                            break;
                        }
                        done.push((i, f(i)));
                    }
                    done
                })
            })
            .collect();
        for h in handles {
            for (i, v) in h.join().expect("worker panicked") {
                slots[i] = Some(v);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("worker filled slot")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let out = map_indexed(100, Some(4), |i| i * i);
        assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn map_single_worker_matches_parallel() {
        let seq = map_indexed(37, Some(1), |i| i as f64 / 3.0);
        let par = map_indexed(37, Some(8), |i| i as f64 / 3.0);
        assert_eq!(seq, par);
    }
}
