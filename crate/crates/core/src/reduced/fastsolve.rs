//! Preconditioned conjugate gradients for `L z = f`, preconditioned by a separable
//! operator (sine transform in x3, tridiagonal solves in rho).

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::grid::ComplexField;
use super::operator::Discretization;
use crate::error::{Error, Result};
use crate::real::{from_usize, lit, Real};

/// Discrete sine transform (type I) of length `m`, computed through an FFT of length `2(m+1)`.
pub struct Dst1<T: Real> {
    m: usize,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> Dst1<T> {
    pub fn new(m: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * (m + 1));
        Self { m, fft }
    }

    /// `X_k = sum_j x_j sin(pi j k / (m+1))`, `j, k = 1..m` (stored 0-based). Applying the
    /// transform twice multiplies by `(m+1)/2`.
    pub fn forward(&self, x: &mut [Complex<T>], scratch: &mut Vec<Complex<T>>) {
        let m = self.m;
        let n = 2 * (m + 1);
        scratch.clear();
        scratch.resize(n, Complex::new(T::zero(), T::zero()));
        for j in 0..m {
            scratch[j + 1] = x[j];
            scratch[n - 1 - j] = -x[j];
        }
        self.fft.process(scratch);
        let i_half = Complex::new(T::zero(), lit(0.5));
        for k in 0..m {
            x[k] = scratch[k + 1] * i_half;
        }
    }

    pub fn inverse(&self, x: &mut [Complex<T>], scratch: &mut Vec<Complex<T>>) {
        self.forward(x, scratch);
        let s = lit::<T>(2.0) / from_usize::<T>(self.m + 1);
        for v in x.iter_mut().take(self.m) {
            *v = *v * s;
        }
    }
}

/// Separable approximation of `K = diag(w) L`: x3-averaged `phi` and `q`, no `A3`.
pub struct SeparablePreconditioner<T: Real> {
    n_rho: usize,
    n_x3: usize,
    dst: Dst1<T>,
    mode_eig: Vec<T>,
    diag0: Vec<T>,
    upper: Vec<Complex<T>>,
    lower: Vec<Complex<T>>,
    mass: Vec<T>,
    /// `true` when the approximation coincides with `K`.
    pub exact: bool,
}

impl<T: Real> SeparablePreconditioner<T> {
    pub fn new(disc: &Discretization<T>) -> Self {
        let g = &disc.grid;
        let (n1, n2) = (g.n_rho, g.n_x3);
        let (hr, h3) = (g.h_rho(), g.h_x3());
        let m = n2 - 2;
        let half: T = lit(0.5);
        let mode_eig = (1..=m)
            .map(|k| {
                let s = (T::PI() * from_usize::<T>(k) / from_usize::<T>(2 * (m + 1))).sin();
                lit::<T>(4.0) * disc.eps * disc.eps / (h3 * h3) * s * s
            })
            .collect();
        let interior = from_usize::<T>(m);
        let mut phi_bar = vec![T::zero(); n1];
        let mut q_bar = vec![T::zero(); n1];
        let mut exact = disc.a3_e.iter().all(|a| *a == T::zero());
        for i in 0..n1 {
            let row = |v: &[T]| (1..n2 - 1).map(|j| v[g.idx(i, j)]).collect::<Vec<T>>();
            let ph = row(&disc.phi_e);
            let q: Vec<T> = (1..n2 - 1).map(|j| disc.coef[g.idx(i, j)].q).collect();
            phi_bar[i] = ph.iter().copied().sum::<T>() / interior;
            q_bar[i] = q.iter().copied().sum::<T>() / interior;
            exact &= ph.iter().all(|v| *v == ph[0]) && q.iter().all(|v| *v == q[0]);
        }
        let mut diag0 = vec![T::zero(); n1];
        let mut upper = vec![Complex::new(T::zero(), T::zero()); n1];
        let mut lower = vec![Complex::new(T::zero(), T::zero()); n1];
        let alpha = Complex::new(T::zero(), disc.eps / hr);
        for i in 0..n1 - 1 {
            let w = disc.rho_edge_w[i];
            let ph = phi_bar[i] * half;
            let d = w * (ph * ph + disc.eps * disc.eps / (hr * hr));
            diag0[i] += d;
            diag0[i + 1] += d;
            let c = Complex::new(ph, T::zero());
            upper[i] = (alpha + c) * (alpha + c) * w;
            lower[i + 1] = (c - alpha) * (c - alpha) * w;
        }
        let mass: Vec<T> = disc.node_w.clone();
        for i in 0..n1 {
            diag0[i] += mass[i] * q_bar[i];
        }
        Self { n_rho: n1, n_x3: n2, dst: Dst1::new(m), mode_eig, diag0, upper, lower, mass, exact }
    }

    /// Applies the inverse of the separable operator to `b` (interior nodes).
    pub fn solve(&self, b: &ComplexField<T>) -> ComplexField<T> {
        let (n1, n2) = (self.n_rho, self.n_x3);
        let m = n2 - 2;
        let mi = n1 - 2;
        let zero = Complex::new(T::zero(), T::zero());
        let mut hat = vec![zero; mi * m];
        let mut scratch = Vec::new();
        let mut row = vec![zero; m];
        for i in 1..n1 - 1 {
            row.copy_from_slice(&b.data[i * n2 + 1..i * n2 + 1 + m]);
            self.dst.forward(&mut row, &mut scratch);
            hat[(i - 1) * m..i * m].copy_from_slice(&row);
        }
        let mut cp = vec![zero; mi];
        let mut dp = vec![zero; mi];
        for k in 0..m {
            for r in 0..mi {
                let i = r + 1;
                let diag = Complex::new(self.diag0[i] + self.mass[i] * self.mode_eig[k], T::zero());
                let rhs = hat[r * m + k];
                if r == 0 {
                    cp[r] = self.upper[i] / diag;
                    dp[r] = rhs / diag;
                } else {
                    let den = diag - self.lower[i] * cp[r - 1];
                    cp[r] = self.upper[i] / den;
                    dp[r] = (rhs - self.lower[i] * dp[r - 1]) / den;
                }
            }
            for r in (0..mi).rev() {
                let x = if r + 1 < mi { dp[r] - cp[r] * hat[(r + 1) * m + k] } else { dp[r] };
                hat[r * m + k] = x;
            }
        }
        let mut out = ComplexField { n_rho: n1, n_x3: n2, data: vec![zero; n1 * n2] };
        for i in 1..n1 - 1 {
            row.copy_from_slice(&hat[(i - 1) * m..i * m]);
            self.dst.inverse(&mut row, &mut scratch);
            out.data[i * n2 + 1..i * n2 + 1 + m].copy_from_slice(&row);
        }
        out
    }
}

/// Solver for `L z = f` on a fixed discretization.
pub struct FastSolver<'a, T: Real> {
    disc: &'a Discretization<T>,
    pre: SeparablePreconditioner<T>,
    pub rtol: T,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

impl<'a, T: Real> FastSolver<'a, T> {
    pub fn new(disc: &'a Discretization<T>) -> Self {
        let rtol = (T::eps_machine() * lit(1e3)).max(lit(1e-13));
        Self { disc, pre: SeparablePreconditioner::new(disc), rtol, max_iter: 500 }
    }

    pub fn preconditioner_is_exact(&self) -> bool {
        self.pre.exact
    }

    /// Solves `L z = f` (equivalently `K z = w f`) by preconditioned CG.
    pub fn solve_l(&self, f: &ComplexField<T>) -> Result<(ComplexField<T>, SolveStats)> {
        let mut b = f.clone();
        for (k, v) in b.data.iter_mut().enumerate() {
            *v = *v * self.disc.weight(k);
        }
        b.zero_boundary();
        self.solve_k(&b)
    }

    /// Solves `K z = b`.
    pub fn solve_k(&self, b: &ComplexField<T>) -> Result<(ComplexField<T>, SolveStats)> {
        let dot = |x: &ComplexField<T>, y: &ComplexField<T>| -> T {
            x.data.iter().zip(&y.data).map(|(a, c)| (a.conj() * c).re).sum()
        };
        let bnorm = dot(b, b).sqrt();
        if bnorm == T::zero() {
            return Ok((ComplexField::zeros(&self.disc.grid), SolveStats { iterations: 0, relative_residual: 0.0 }));
        }
        let mut x = self.pre.solve(b);
        let mut r = b.sub(&self.disc.apply_k(&x));
        let mut z = self.pre.solve(&r);
        let mut d = z.clone();
        let mut rz = dot(&r, &z);
        let mut res = dot(&r, &r).sqrt() / bnorm;
        let mut it = 0;
        while res > self.rtol && it < self.max_iter {
            let kd = self.disc.apply_k(&d);
            let dkd = dot(&d, &kd);
            if !(dkd > T::zero()) {
                break;
            }
            let a = rz / dkd;
            x = x.add_scaled(a, &d);
            r = r.add_scaled(-a, &kd);
            z = self.pre.solve(&r);
            let rz_new = dot(&r, &z);
            d = z.add_scaled(rz_new / rz, &d);
            rz = rz_new;
            res = dot(&r, &r).sqrt() / bnorm;
            it += 1;
        }
        let stats = SolveStats { iterations: it, relative_residual: res.to_f64().unwrap_or(f64::NAN) };
        if res > self.rtol.max(lit(1e-8)) {
            return Err(Error::NonConvergence { iterations: it, residual: stats.relative_residual });
        }
        Ok((x, stats))
    }
}
