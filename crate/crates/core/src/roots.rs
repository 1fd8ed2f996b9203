//! Root isolation by sign-change scans and bisection.

use alloc::vec::Vec;

use crate::real::Real;

/// Bisect `g` on `[lo, hi]` where `g(lo)` and `g(hi)` have opposite signs.
/// Runs until the bracket stops shrinking in the working precision.
pub fn bisect<T: Real, G: FnMut(T) -> T>(mut g: G, mut lo: T, mut hi: T) -> (T, T) {
    let mut g_lo = g(lo);
    if g_lo == T::zero() {
        return (lo, lo);
    }
    for _ in 0..(T::BITS as usize + 1100) {
        let mid = (lo + hi).half();
        if !(mid > lo && mid < hi) {
            break;
        }
        let gm = g(mid);
        if gm == T::zero() {
            return (mid, mid);
        }
        if (gm < T::zero()) == (g_lo < T::zero()) {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// All sign changes of `g` on a uniform grid of `cells` cells over
/// `[lo, hi]`, each refined by bisection. Exact zeros at grid nodes are
/// reported as roots. Output is sorted.
pub fn scan_roots<T: Real, G: FnMut(T) -> T>(mut g: G, lo: T, hi: T, cells: usize) -> Vec<T> {
    let cells = cells.max(1);
    let width = hi - lo;
    let node = |i: usize| {
        if i == cells {
            hi
        } else {
            lo + width * T::from_usize(i) / T::from_usize(cells)
        }
    };
    let mut roots = Vec::new();
    let mut x0 = node(0);
    let mut g0 = g(x0);
    if g0 == T::zero() {
        roots.push(x0);
    }
    for i in 1..=cells {
        let x1 = node(i);
        let g1 = g(x1);
        if g1 == T::zero() {
            roots.push(x1);
        } else if g0 != T::zero() && ((g0 < T::zero()) != (g1 < T::zero())) {
            let (a, b) = bisect(&mut g, x0, x1);
            roots.push((a + b).half());
        }
        x0 = x1;
        g0 = g1;
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_all_roots_of_cubic() {
        let roots = scan_roots(|x: f64| (x - 0.1) * (x + 0.5) * (x - 0.75), -1.0, 1.0, 64);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([-0.5, 0.1, 0.75]) {
            assert!((r - e).abs() < 1e-15);
        }
    }

    #[test]
    fn bisection_is_tight() {
        let (a, b) = bisect(|x: f64| x * x - 2.0, 1.0, 2.0);
        assert!(b - a <= 4.0 * f64::EPSILON);
        assert!((a - 2f64.sqrt()).abs() < 1e-15);
    }
}
