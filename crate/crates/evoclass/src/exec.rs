//! Index-range scans behind the exhaustive searches.
//!
//! Every heavy loop in this crate walks a dense index range 0..n (matrix or
//! vector codes) with a pure predicate, so the work splits freely. With the
//! `parallel` feature (default) the scans run on rayon and preserve index
//! order in their results; without it they fall back to plain loops with
//! identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many candidates the rayon overhead is not worth paying.
const PAR_THRESHOLD: u64 = 1 << 12;

pub fn scan_collect<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_THRESHOLD {
            return (0..n).into_par_iter().filter_map(f).collect();
        }
    }
    scan_collect_seq(n, f)
}

pub fn scan_collect_seq<T, F>(n: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> Option<T>,
{
    (0..n).filter_map(f).collect()
}

/// First match in index order.
pub fn scan_first<T, F>(n: u64, f: F) -> Option<T>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_THRESHOLD {
            return (0..n).into_par_iter().find_map_first(f);
        }
    }
    scan_first_seq(n, f)
}

pub fn scan_first_seq<T, F>(n: u64, f: F) -> Option<T>
where
    F: Fn(u64) -> Option<T>,
{
    (0..n).find_map(f)
}

pub fn scan_any<F>(n: u64, f: F) -> bool
where
    F: Fn(u64) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_THRESHOLD {
            return (0..n).into_par_iter().any(f);
        }
    }
    (0..n).any(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scans_preserve_order() {
        let hits = scan_collect(100_000, |i| (i % 9973 == 0).then_some(i));
        let seq = scan_collect_seq(100_000, |i| (i % 9973 == 0).then_some(i));
        assert_eq!(hits, seq);
        assert_eq!(
            scan_first(100_000, |i| (i > 12_345).then_some(i)),
            Some(12_346)
        );
        assert!(scan_any(100_000, |i| i == 99_999));
        assert!(!scan_any(10, |i| i == 99));
    }
}
