//! Radial shooting for `w'' + w'/r - a0 w + w^(p-1) = 0`, `w'(0) = 0`, `w(inf) = 0`.

use crate::error::{Error, Result};
use crate::real::{from_usize, lit, Real};

/// State: `w, w', ∫(w'^2 + a0 w^2) r, ∫ w^p r, ∫ w^2 r`.
type State<T> = [T; 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Event {
    /// `w` reached zero: initial height too large.
    Over,
    /// `w'` became positive while `w > 0`: initial height too small.
    Under,
    None,
}

pub(crate) struct Trajectory<T> {
    pub w: Vec<T>,
    pub dw: Vec<T>,
    pub grad_int: Vec<T>,
    pub pow_int: Vec<T>,
    pub mass_int: Vec<T>,
    pub event: Event,
    /// Radius at which the event fired (end of grid otherwise).
    pub r_event: T,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Ode<T> {
    pub a0: T,
    pub p: T,
}

impl<T: Real> Ode<T> {
    fn power(&self, w: T) -> T {
        w.abs().powf(self.p - T::one()) * w.signum()
    }

    fn rhs(&self, r: T, y: &State<T>) -> State<T> {
        let (w, dw) = (y[0], y[1]);
        let wp = w.abs().powf(self.p);
        [
            dw,
            -dw / r + self.a0 * w - self.power(w),
            (dw * dw + self.a0 * w * w) * r,
            wp * r,
            w * w * r,
        ]
    }

    /// Series solution at small `r` for `w(0) = eta`.
    fn series(&self, eta: T, r: T) -> State<T> {
        let c2 = (self.a0 * eta - self.power(eta)) * lit(0.25);
        let fprime = self.a0 - (self.p - T::one()) * eta.abs().powf(self.p - lit(2.0));
        let c4 = fprime * c2 / lit(16.0);
        let r2 = r * r;
        let r4 = r2 * r2;
        let half: T = lit(0.5);
        let w = eta + c2 * r2 + c4 * r4;
        let dw = lit::<T>(2.0) * c2 * r + lit::<T>(4.0) * c4 * r2 * r;
        let grad = self.a0 * eta * eta * r2 * half + (c2 * c2 + self.a0 * eta * c2 * half) * r4;
        let pw = eta.abs().powf(self.p) * r2 * half
            + self.p * eta.abs().powf(self.p - T::one()) * eta.signum() * c2 * r4 * lit(0.25);
        let mass = eta * eta * r2 * half + eta * c2 * r4 * half;
        [w, dw, grad, pw, mass]
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dp_step<T: Real>(ode: &Ode<T>, r: T, y: &State<T>, h: T) -> (State<T>, T) {
    let mut k = [[T::zero(); 5]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a: T = lit(A[s][j]);
            for c in 0..5 {
                ys[c] += h * a * kj[c];
            }
        }
        k[s] = ode.rhs(r + h * lit(C[s]), &ys);
    }
    let mut y5 = *y;
    let mut err = T::zero();
    for c in 0..5 {
        let mut d5 = T::zero();
        let mut d4 = T::zero();
        for s in 0..7 {
            d5 += lit::<T>(B5[s]) * k[s][c];
            d4 += lit::<T>(B4[s]) * k[s][c];
        }
        y5[c] += h * d5;
        // Error control on (w, w') only; the quadratures follow along.
        if c < 2 {
            err = err.max((h * (d5 - d4)).abs());
        }
    }
    (y5, err)
}

/// Integrates from the series start on `grid[1]` across the uniform grid, stopping at the
/// first over/undershoot event.
pub(crate) fn integrate<T: Real>(ode: &Ode<T>, eta: T, grid: &[T], rtol: T) -> Trajectory<T> {
    let n = grid.len();
    let mut tr = Trajectory {
        w: Vec::with_capacity(n),
        dw: Vec::with_capacity(n),
        grad_int: Vec::with_capacity(n),
        pow_int: Vec::with_capacity(n),
        mass_int: Vec::with_capacity(n),
        event: Event::None,
        r_event: grid[n - 1],
    };
    let push = |tr: &mut Trajectory<T>, y: &State<T>| {
        tr.w.push(y[0]);
        tr.dw.push(y[1]);
        tr.grad_int.push(y[2]);
        tr.pow_int.push(y[3]);
        tr.mass_int.push(y[4]);
    };
    push(&mut tr, &[eta, T::zero(), T::zero(), T::zero(), T::zero()]);
    let mut y = ode.series(eta, grid[1]);
    push(&mut tr, &y);
    let scale = eta.abs().max(T::min_positive_value());
    let mut h = (grid[1] - grid[0]) * lit(0.5);
    for i in 1..n - 1 {
        let (mut r, target) = (grid[i], grid[i + 1]);
        while r < target {
            let step = h.min(target - r);
            let (y_new, err) = dp_step(ode, r, &y, step);
            let tol = rtol * (scale + y[1].abs());
            if err <= tol || step <= lit::<T>(1e-14) * target {
                r = if step == target - r { target } else { r + step };
                y = y_new;
                let e = if err > T::zero() { err / tol } else { lit(1e-10) };
                h = step * (lit::<T>(0.9) * e.powf(lit(-0.2))).min(lit(5.0));
                if y[0] <= T::zero() {
                    tr.event = Event::Over;
                } else if y[1] > T::zero() {
                    tr.event = Event::Under;
                }
                if tr.event != Event::None {
                    tr.r_event = r;
                    return tr;
                }
            } else {
                h = step * (lit::<T>(0.9) * (err / tol).powf(lit(-0.2))).max(lit(0.1));
            }
        }
        push(&mut tr, &y);
    }
    tr
}

/// Bisection on the initial height. Returns the largest height found to undershoot.
pub(crate) fn shoot_height<T: Real>(ode: &Ode<T>, grid: &[T], rtol: T, eta_max_factor: T) -> Result<T> {
    let base = ode.a0.powf(T::one() / (ode.p - lit(2.0)));
    let mut lo = base * lit(0.999);
    if integrate(ode, lo, grid, rtol).event != Event::Under {
        return Err(Error::Solver(format!("shooting: height {lo} does not undershoot")));
    }
    let mut hi = base * lit(2.0);
    loop {
        match integrate(ode, hi, grid, rtol).event {
            Event::Over => break,
            _ => {
                lo = hi;
                hi = hi * lit(2.0);
                if hi > base * eta_max_factor {
                    return Err(Error::Solver(format!(
                        "shooting: no overshooting height below {}",
                        base * eta_max_factor
                    )));
                }
            }
        }
    }
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        match integrate(ode, mid, grid, rtol).event {
            Event::Over => hi = mid,
            _ => lo = mid,
        }
    }
    Ok(lo)
}

pub(crate) fn uniform_grid<T: Real>(r_max: T, n: usize) -> Vec<T> {
    let h = r_max / from_usize::<T>(n - 1);
    (0..n).map(|i| if i == n - 1 { r_max } else { h * from_usize::<T>(i) }).collect()
}
