// Per-node data parallelism. Every closure reads frozen inputs and writes
// only its own output slot, so serial and parallel runs agree bitwise.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub(crate) fn fill<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn fill<T, F>(out: &mut [T], f: F)
where
    F: Fn(usize) -> T,
{
    out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
}

/// Pairwise fill of two output arrays from one closure.
#[cfg(feature = "parallel")]
pub(crate) fn fill2<A, B, F>(a: &mut [A], b: &mut [B], f: F)
where
    A: Send,
    B: Send,
    F: Fn(usize) -> (A, B) + Sync + Send,
{
    a.par_iter_mut()
        .zip(b.par_iter_mut())
        .enumerate()
        .for_each(|(i, (x, y))| {
            let (u, v) = f(i);
            *x = u;
            *y = v;
        });
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn fill2<A, B, F>(a: &mut [A], b: &mut [B], f: F)
where
    F: Fn(usize) -> (A, B),
{
    a.iter_mut().zip(b.iter_mut()).enumerate().for_each(|(i, (x, y))| {
        let (u, v) = f(i);
        *x = u;
        *y = v;
    });
}
