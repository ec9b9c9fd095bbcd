//! Independent-trial execution, data-parallel when the `parallel` feature is on.

/// How a batch of independent trials is scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Uses the rayon pool; identical to `Sequential` without the `parallel` feature.
    #[default]
    Parallel,
}

impl Exec {
    /// Runs `f(0..trials)` and returns results in trial order regardless of scheduling.
    pub fn map<T, F>(self, trials: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..trials).map(f).collect(),
            Exec::Parallel => parallel_map(trials, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..trials).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..trials).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_agree() {
        let f = |i: u64| i.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(7);
        assert_eq!(Exec::Sequential.map(1000, f), Exec::Parallel.map(1000, f));
        assert!(Exec::Parallel.map(0, f).is_empty());
    }
}
