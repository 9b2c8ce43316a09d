use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::{from_usize, lit, Real};
use crate::reduced::{ComplexField, HalfPlaneGrid};

/// Location and height of the maximum of `|u|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak<T> {
    pub rho: T,
    pub x3: T,
    pub value: T,
    pub node: (usize, usize),
}

/// Argmax node of `|u|`, refined by a parabola through the neighbours in each direction.
pub fn find_peak<T: Real>(grid: &HalfPlaneGrid<T>, u: &ComplexField<T>) -> Result<Peak<T>> {
    let (mut best, mut kbest) = (T::zero(), usize::MAX);
    for (k, z) in u.data.iter().enumerate() {
        let m = z.norm();
        if m > best {
            best = m;
            kbest = k;
        }
    }
    if kbest == usize::MAX {
        return Err(Error::Domain("peak of an identically zero field".into()));
    }
    let (i, j) = grid.ij(kbest);
    let at = |a: usize, b: usize| u.data[grid.idx(a, b)].norm();
    let refine = |fm: T, f0: T, fp: T| -> (T, T) {
        let den = fm - lit::<T>(2.0) * f0 + fp;
        if den >= T::zero() {
            return (T::zero(), T::zero());
        }
        let d = ((fm - fp) / (lit::<T>(2.0) * den)).max(lit(-0.5)).min(lit(0.5));
        (d, -(fm - fp) * d * lit(0.25))
    };
    let (mut di, mut dj, mut gain) = (T::zero(), T::zero(), T::zero());
    if i > 0 && i + 1 < grid.n_rho {
        let (d, g) = refine(at(i - 1, j), best, at(i + 1, j));
        di = d;
        gain += g;
    }
    if j > 0 && j + 1 < grid.n_x3 {
        let (d, g) = refine(at(i, j - 1), best, at(i, j + 1));
        dj = d;
        gain += g;
    }
    Ok(Peak {
        rho: grid.rho_min + grid.h_rho() * (from_usize::<T>(i) + di),
        x3: grid.x3_min + grid.h_x3() * (from_usize::<T>(j) + dj),
        value: best + gain.abs(),
        node: (i, j),
    })
}
