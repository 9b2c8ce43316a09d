//! Shared fixtures and independent oracles.
#![allow(dead_code)]

use std::sync::Arc;

use magnls::potentials::{
    ConcentrationDomain, CylMagneticPotential, PenalizationParams, ScalarPotential, ScalarShape,
};
use magnls::reduced::{HalfPlaneGrid, ReducedContext};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

pub fn example_scalar() -> ScalarPotential<f64> {
    ScalarPotential::new(ScalarShape::CylindricalHardy { coefficient: 1.0, alpha: 2.0 }, Some(2.0), None).unwrap()
}

pub fn example_domain() -> ConcentrationDomain<f64> {
    ConcentrationDomain::new(0.5, 2.0, 0.5).unwrap()
}

pub fn example_grid(n: usize) -> HalfPlaneGrid<f64> {
    HalfPlaneGrid::new(0.1, 4.0, -2.0, 2.0, n, n).unwrap()
}

pub fn example_ctx(eps: f64, n: usize) -> ReducedContext<f64> {
    ReducedContext::new(
        eps,
        example_grid(n),
        CylMagneticPotential::ConstantField { b: 1.0 },
        example_scalar(),
        PenalizationParams::default(),
        example_domain(),
        4.0,
    )
    .unwrap()
}

/// `2^(1/2) / (3 b^2)^(1/4)`.
pub fn rho_star_closed_form(b: f64) -> f64 {
    2f64.sqrt() / (3.0 * b * b).powf(0.25)
}

struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(n: usize) -> Self {
        let mut p = FftPlanner::new();
        Self { n, fwd: p.plan_fft_forward(n), inv: p.plan_fft_inverse(n) }
    }

    fn apply(&self, a: &mut [Complex<f64>], inverse: bool) {
        let n = self.n;
        let f = if inverse { &self.inv } else { &self.fwd };
        f.process(a);
        let mut t = vec![Complex::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                t[j * n + i] = a[i * n + j];
            }
        }
        f.process(&mut t);
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = t[j * n + i];
            }
        }
        if inverse {
            let s = 1.0 / (n * n) as f64;
            a.iter_mut().for_each(|z| *z *= s);
        }
    }
}

/// Ground energy of `-Δw + a0 w = w^(p-1)` in the plane by a Nehari-normalized Sobolev gradient
/// flow on an `n x n` periodic Fourier grid over `[-half, half]^2`.
/// Returns `(energy, peak)`.
pub fn spectral_gradient_flow_energy(a0: f64, p: f64, n: usize, half: f64) -> (f64, f64) {
    let fft = Fft2::new(n);
    let h = 2.0 * half / n as f64;
    let dk = std::f64::consts::PI / half;
    let freq = |i: usize| if i < n / 2 { i as f64 * dk } else { (i as f64 - n as f64) * dk };
    let sym: Vec<f64> =
        (0..n * n).map(|k| { let (i, j) = (k / n, k % n); freq(i).powi(2) + freq(j).powi(2) + a0 }).collect();
    let x = |i: usize| -half + i as f64 * h;
    let mut w: Vec<f64> =
        (0..n * n).map(|k| { let (i, j) = (k / n, k % n); 2.0 * (-(x(i).powi(2) + x(j).powi(2)) / 2.0).exp() }).collect();
    let area = h * h;
    // <w, w>_{H} = sum sym |w_hat|^2 area / n^2 by Parseval.
    let quad = |w: &[f64]| -> (f64, Vec<Complex<f64>>) {
        let mut a: Vec<Complex<f64>> = w.iter().map(|v| Complex::new(*v, 0.0)).collect();
        fft.apply(&mut a, false);
        let q = a.iter().zip(&sym).map(|(z, s)| s * z.norm_sqr()).sum::<f64>() * area / (n * n) as f64;
        (q, a)
    };
    let power = |w: &[f64]| w.iter().map(|v| v.abs().powf(p)).sum::<f64>() * area;
    let mut energy_prev = f64::INFINITY;
    let mut energy = 0.0;
    for it in 0..2000 {
        let (q, _) = quad(&w);
        let t = (q / power(&w)).powf(1.0 / (p - 2.0));
        w.iter_mut().for_each(|v| *v *= t);
        let (q, what) = quad(&w);
        energy = 0.5 * q - power(&w) / p;
        if it > 10 && (energy_prev - energy).abs() <= 1e-13 * energy {
            break;
        }
        energy_prev = energy;
        // Sobolev gradient: w - (a0 - Δ)^-1 w^(p-1).
        let mut nl: Vec<Complex<f64>> = w.iter().map(|v| Complex::new(v.abs().powf(p - 2.0) * v, 0.0)).collect();
        fft.apply(&mut nl, false);
        let mut step: Vec<Complex<f64>> = what.iter().zip(&nl).zip(&sym).map(|((a, b), s)| a - b / s).collect();
        fft.apply(&mut step, true);
        let tau = 0.5;
        w.iter_mut().zip(&step).for_each(|(v, s)| *v -= tau * s.re);
    }
    (energy, w.iter().cloned().fold(0.0, f64::max))
}

/// `2 pi int int (eps^2 |grad u|^2 + u^2) rho drho dx3` for
/// `u = exp(-((rho - rho0)^2 + x3^2) / w^2)` on `rho in [rho_a, rho_b]`, `x3 in R`: analytic in `x3`,
/// composite Simpson in `rho`.
pub fn gaussian_energy_quadrature(eps: f64, rho0: f64, w: f64, rho_a: f64, rho_b: f64) -> f64 {
    let i0 = w * (std::f64::consts::PI / 2.0).sqrt();
    let f = |r: f64| {
        let d2 = (r - rho0).powi(2);
        (-2.0 * d2 / (w * w)).exp() * i0 * (eps * eps * 4.0 / w.powi(4) * (d2 + w * w / 4.0) + 1.0) * r
    };
    let m = 200_000;
    let hh = (rho_b - rho_a) / m as f64;
    let mut s = f(rho_a) + f(rho_b);
    for k in 1..m {
        s += f(rho_a + k as f64 * hh) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    std::f64::consts::TAU * s * hh / 3.0
}

/// Maximizer of `j(t)` over `points` equally spaced values in `(0, t_max]`, and the spacing.
pub fn ray_scan(j: impl Fn(f64) -> f64, t_max: f64, points: usize) -> (f64, f64) {
    let dt = t_max / points as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 1..=points {
        let t = k as f64 * dt;
        let v = j(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    (best.0, dt)
}
