//! Execution strategy for the data-parallel loops (search scans, sweeps,
//! Monte Carlo chunks).
//!
//! With the `parallel` feature (default) both strategies are available and
//! [`Exec::default`] is [`Exec::Parallel`]. Without it rayon is not linked
//! and everything runs sequentially. Every helper here returns results that
//! are identical under either strategy.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Exec {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Exec {
    pub fn name(self) -> &'static str {
        match self {
            Exec::Sequential => "sequential",
            #[cfg(feature = "parallel")]
            Exec::Parallel => "parallel",
        }
    }
}

/// Smallest value in `range` satisfying `pred`, scanning in order.
pub fn find_first<F>(exec: Exec, range: Range<u64>, pred: F) -> Option<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    match exec {
        Exec::Sequential => range.into_iter().find(|&m| pred(m)),
        #[cfg(feature = "parallel")]
        Exec::Parallel => range.into_par_iter().find_first(|&m| pred(m)),
    }
}

/// Order-preserving map.
pub fn map<T, U, F>(exec: Exec, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec {
        Exec::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().map(f).collect(),
    }
}

/// Sum of `f(i)` for `i` in `0..count`. Integer addition keeps the result
/// independent of the reduction order.
pub fn sum_u64<F>(exec: Exec, count: u64, f: F) -> u64
where
    F: Fn(u64) -> u64 + Sync + Send,
{
    match exec {
        Exec::Sequential => (0..count).map(f).sum(),
        #[cfg(feature = "parallel")]
        Exec::Parallel => (0..count).into_par_iter().map(f).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strategies() -> Vec<Exec> {
        vec![
            Exec::Sequential,
            #[cfg(feature = "parallel")]
            Exec::Parallel,
        ]
    }

    #[test]
    fn find_first_returns_smallest_match() {
        for exec in strategies() {
            assert_eq!(find_first(exec, 0..10_000, |m| m % 997 == 5 && m > 100), Some(1002));
            assert_eq!(find_first(exec, 0..10, |_| false), None);
        }
    }

    #[test]
    fn map_and_sum_agree_across_strategies() {
        let items: Vec<u64> = (0..1000).collect();
        let expected: Vec<u64> = items.iter().map(|x| x * x).collect();
        for exec in strategies() {
            assert_eq!(map(exec, &items, |x| x * x), expected);
            assert_eq!(sum_u64(exec, 1000, |i| i), 499_500);
        }
    }
}
