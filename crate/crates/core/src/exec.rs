//! Data-parallel helpers. With the `parallel` feature the work is spread
//! over rayon; without it (or with `Parallelism::Sequential`) it runs inline.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    #[default]
    Auto,
    Sequential,
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Auto
    }
}

/// `f` applied to every item, results in input order.
pub fn map_collect<T, U, F>(mode: Parallelism, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = mode;
    items.into_iter().map(f).collect()
}

/// First index in `0..n` (lowest) for which `f` returns `Some`, with its value.
pub fn find_first<U, F>(mode: Parallelism, n: usize, f: F) -> Option<(usize, U)>
where
    U: Send,
    F: Fn(usize) -> Option<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..n)
            .into_par_iter()
            .find_map_first(|i| f(i).map(|u| (i, u)));
    }
    let _ = mode;
    (0..n).find_map(|i| f(i).map(|u| (i, u)))
}
