//! Small one- and two-dimensional minimization helpers.

use crate::error::Result;
use crate::real::{from_usize, lit, Real};

/// Minimizes `f` on `[a, b]`: dense scan with `samples` points, then golden-section
/// refinement inside the bracket around the best sample. Returns `(argmin, min)`.
pub fn scan_golden<T: Real>(
    f: impl Fn(T) -> Result<T>,
    a: T,
    b: T,
    samples: usize,
    tol: T,
) -> Result<(T, T)> {
    let n = samples.max(3);
    let step = (b - a) / from_usize::<T>(n - 1);
    let at = |k: usize| if k == n - 1 { b } else { a + step * from_usize::<T>(k) };
    let mut best = (0usize, f(a)?);
    for k in 1..n {
        let v = f(at(k))?;
        if v < best.1 {
            best = (k, v);
        }
    }
    let lo = at(best.0.saturating_sub(1));
    let hi = at((best.0 + 1).min(n - 1));
    let (x, fx) = golden(&f, lo, hi, tol)?;
    if fx <= best.1 {
        Ok((x, fx))
    } else {
        Ok((at(best.0), best.1))
    }
}

/// Golden-section search on `[lo, hi]`, endpoints included in the candidates.
pub fn golden<T: Real>(f: &impl Fn(T) -> Result<T>, mut lo: T, mut hi: T, tol: T) -> Result<(T, T)> {
    let inv_phi: T = lit((5f64.sqrt() - 1.0) / 2.0);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut iters = 0;
    while (hi - lo).abs() > tol && iters < 200 {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d)?;
        }
        iters += 1;
    }
    let mid = (lo + hi) * lit(0.5);
    let fm = f(mid)?;
    let mut best = (mid, fm);
    for cand in [(c, fc), (d, fd)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    // The bracket may have collapsed onto an endpoint of the original interval.
    if flo < best.1 && (lo - mid).abs() <= tol {
        best = (lo, flo);
    }
    if fhi < best.1 && (hi - mid).abs() <= tol {
        best = (hi, fhi);
    }
    Ok(best)
}

/// Minimizes `f` on the rectangle `[a0, a1] x [b0, b1]`: lattice scan followed by
/// alternating golden searches inside the best cell's neighbourhood.
pub fn rect_min<T: Real>(
    f: impl Fn(T, T) -> Result<T>,
    (a0, a1): (T, T),
    (b0, b1): (T, T),
    samples: usize,
    tol: T,
) -> Result<(T, T, T)> {
    let n = samples.max(3);
    let ha = (a1 - a0) / from_usize::<T>(n - 1);
    let hb = (b1 - b0) / from_usize::<T>(n - 1);
    let mut best = (a0, b0, f(a0, b0)?);
    for i in 0..n {
        let x = if i == n - 1 { a1 } else { a0 + ha * from_usize::<T>(i) };
        for j in 0..n {
            let y = if j == n - 1 { b1 } else { b0 + hb * from_usize::<T>(j) };
            let v = f(x, y)?;
            if v < best.2 {
                best = (x, y, v);
            }
        }
    }
    let (mut x, mut y, mut v) = best;
    for _ in 0..4 {
        let (lo, hi) = ((x - ha).max(a0), (x + ha).min(a1));
        let (nx, nv) = golden(&|s| f(s, y), lo, hi, tol)?;
        if nv <= v {
            x = nx;
            v = nv;
        }
        let (lo, hi) = ((y - hb).max(b0), (y + hb).min(b1));
        let (ny, nv) = golden(&|s| f(x, s), lo, hi, tol)?;
        if nv <= v {
            y = ny;
            v = nv;
        }
    }
    Ok((x, y, v))
}

/// Bisection for a sign change of `f` on `[lo, hi]` (`f(lo)` and `f(hi)` of opposite sign).
pub fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T, rel_tol: T, max_iter: usize) -> T {
    let flo_pos = f(lo) > T::zero();
    for _ in 0..max_iter {
        let mid = (lo + hi) * lit(0.5);
        if (hi - lo).abs() <= rel_tol * mid.abs().max(T::min_positive_value()) {
            break;
        }
        if (f(mid) > T::zero()) == flo_pos {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * lit(0.5)
}
