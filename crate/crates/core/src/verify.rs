//! Invariant suite: discrete inequalities, nonlinearity properties, Nehari closed form,
//! adjoint consistency and gauge covariance, on seeded random fields.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::limit2d::{ConcentrationFunctionHandle, Normalization};
use crate::potentials::{check_equivariance, check_lambda_conditions, InfimumSampling};
use crate::reduced::{penalized_big_g, penalized_g, ComplexField, Discretization, HalfPlaneGrid, ReducedContext};
use crate::solver::nehari_time_bisect;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    pub random_fields: usize,
    pub gradient_pairs: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 0x5eed, random_fields: 100, gradient_pairs: 20 }
    }
}

fn outcome(name: &str, passed: bool, value: f64, threshold: f64, detail: String) -> CheckOutcome {
    CheckOutcome { name: name.into(), passed, value, threshold, detail }
}

/// Sum of three Gaussian bumps with random complex amplitudes and plane-wave phases, kept
/// four widths away from the grid edges.
pub fn random_smooth_field(grid: &HalfPlaneGrid<f64>, rng: &mut impl Rng) -> ComplexField<f64> {
    let lr = grid.rho_max - grid.rho_min;
    let lz = grid.x3_max - grid.x3_min;
    let bumps: Vec<_> = (0..3)
        .map(|_| {
            let w = rng.gen_range(0.05..0.12) * lr.min(lz);
            let r0 = rng.gen_range(grid.rho_min + 4.0 * w..grid.rho_max - 4.0 * w);
            let z0 = rng.gen_range(grid.x3_min + 4.0 * w..grid.x3_max - 4.0 * w);
            let amp = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let k = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            (w, r0, z0, amp, k)
        })
        .collect();
    ComplexField::from_fn(grid, |r, z| {
        bumps
            .iter()
            .map(|(w, r0, z0, amp, k)| {
                let e = (-((r - r0).powi(2) + (z - z0).powi(2)) / (w * w)).exp();
                amp * e * Complex::from_polar(1.0, k.0 * r + k.1 * z)
            })
            .sum()
    })
}

/// `eps^2 |grad |u||^2 <= |(i eps grad + A) u|^2` summed, on random fields, with slack `h`.
pub fn diamagnetic_check(disc: &Discretization<f64>, opts: &SuiteOptions) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let slack = disc.grid.h_rho().max(disc.grid.h_x3());
    let worst = (0..opts.random_fields)
        .map(|_| {
            let u = random_smooth_field(&disc.grid, &mut rng);
            disc.modulus_kinetic_part(&u) / disc.kinetic_part(&u) - 1.0
        })
        .fold(f64::NEG_INFINITY, f64::max);
    outcome(
        "diamagnetic",
        worst <= slack,
        worst,
        slack,
        format!("max relative excess over {} fields", opts.random_fields),
    )
}

/// `(eps^2/4) int |u|^2/|x|^2 <= int |(i eps grad + A)u|^2` on random fields, with slack `h`.
pub fn hardy_check(disc: &Discretization<f64>, opts: &SuiteOptions) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x4a5d);
    let slack = disc.grid.h_rho().max(disc.grid.h_x3());
    let worst = (0..opts.random_fields)
        .map(|_| {
            let u = random_smooth_field(&disc.grid, &mut rng);
            disc.hardy_part(&u) / disc.kinetic_part(&u) - 1.0
        })
        .fold(f64::NEG_INFINITY, f64::max);
    outcome("magnetic_hardy", worst <= slack, worst, slack, format!("max relative excess over {} fields", opts.random_fields))
}

/// Properties of the penalized nonlinearity at every node on a log grid of `s`:
/// `p G = g s` inside Λ, `2 G <= g s <= cap s` outside, and `t -> g(t^2)` nondecreasing.
pub fn nonlinearity_check(disc: &Discretization<f64>) -> Result<CheckOutcome> {
    let p = disc.p;
    let s_grid: Vec<f64> = (0..=60).map(|i| 10f64.powf(-8.0 + 0.25 * i as f64)).collect();
    let mut worst = 0.0f64;
    let mut failures = 0usize;
    for c in disc.coefficients() {
        let mut prev = 0.0;
        for &s in &s_grid {
            let g = penalized_g(p, disc.gamma, c.in_lambda, c.cap, s)?;
            let big = penalized_big_g(p, disc.gamma, c.in_lambda, c.cap, s)?;
            let scale = (g * s).abs().max(f64::MIN_POSITIVE);
            let tol = 1e-12 * scale;
            let excess = if c.in_lambda {
                (p * big - g * s).abs()
            } else {
                (2.0 * big - g * s).max(g * s - c.cap * s).max(0.0)
            };
            // g(s) on an increasing grid of s is g(t^2) on an increasing grid of t.
            let drop = (prev - g).max(0.0);
            let bad = excess.max(drop);
            if bad > tol {
                failures += 1;
            }
            worst = worst.max(bad / scale);
            prev = g;
        }
    }
    Ok(outcome(
        "nonlinearity_properties",
        failures == 0,
        worst,
        1e-12,
        format!("{} nodes x {} values of s, {failures} failures", disc.coefficients().len(), s_grid.len()),
    ))
}

/// Nehari bisection against `(Q / P)^(1/(p-2))` for fields supported in Λ.
pub fn nehari_closed_form_check(disc: &Discretization<f64>, opts: &SuiteOptions) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7e4a);
    let mut worst = 0.0f64;
    for _ in 0..opts.gradient_pairs {
        let mut u = random_smooth_field(&disc.grid, &mut rng);
        for (k, z) in u.data.iter_mut().enumerate() {
            if !disc.coefficients()[k].in_lambda {
                *z = Complex::new(0.0, 0.0);
            }
        }
        let q = disc.energy_norm(&u);
        let pw: f64 =
            u.data.iter().enumerate().map(|(k, z)| disc.weight(k) * disc.gamma * z.norm().powf(disc.p)).sum();
        let t_pp = (q / pw).powf(1.0 / (disc.p - 2.0));
        let t = nehari_time_bisect(disc, &u, 1e-14)?;
        worst = worst.max((t - t_pp).abs() / t_pp);
    }
    Ok(outcome("nehari_closed_form", worst <= 1e-10, worst, 1e-10, format!("{} fields", opts.gradient_pairs)))
}

/// `<grad J(u), v>` against central differences at `delta = 1e-3, 1e-4`; passes when the error
/// drops by at least 25x or sits at the round-off floor.
pub fn gradient_fd_check(disc: &Discretization<f64>, opts: &SuiteOptions) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9d1f);
    let mut worst_ratio = 0.0f64;
    let mut failures = 0;
    for _ in 0..opts.gradient_pairs {
        let u = random_smooth_field(&disc.grid, &mut rng);
        let v = random_smooth_field(&disc.grid, &mut rng);
        let exact = disc.dot(&disc.gradient(&u), &v);
        let fd = |d: f64| (disc.functional(&u.add_scaled(d, &v)) - disc.functional(&u.add_scaled(-d, &v))) / (2.0 * d);
        let e1 = (fd(1e-3) - exact).abs();
        let e2 = (fd(1e-4) - exact).abs();
        let floor = 1e-9 * (disc.functional(&u).abs() + exact.abs()).max(1.0);
        if !(e2 <= e1 / 25.0 || e2 <= floor) {
            failures += 1;
        }
        worst_ratio = worst_ratio.max(e2 / e1.max(f64::MIN_POSITIVE));
    }
    outcome(
        "gradient_vs_finite_difference",
        failures == 0,
        worst_ratio,
        1.0 / 25.0,
        format!("{} pairs, {failures} failures", opts.gradient_pairs),
    )
}

/// Relative change of the energy norm under `u -> exp(iS/eps) u`, `(phi, A3) -> (phi, A3) + grad S`
/// with linear `S`, on the context grid and its refinement.
pub fn gauge_change(ctx: &ReducedContext<f64>, s: (f64, f64)) -> Result<(f64, f64)> {
    let one = |ctx: &ReducedContext<f64>| -> Result<f64> {
        let base = ctx.discretize()?;
        let shifted = Discretization::from_context_shifted(ctx, |_, _| s.0, |_, _| s.1)?;
        let (rc, zc) = ((ctx.dom.rho_lo + ctx.dom.rho_hi) * 0.5, 0.0);
        let w = 0.25 * (ctx.dom.rho_hi - ctx.dom.rho_lo);
        let u = ComplexField::from_fn(&ctx.grid, |r, z| {
            Complex::new((-((r - rc).powi(2) + (z - zc).powi(2)) / (w * w)).exp(), 0.0)
        });
        let mut ug = u.clone();
        for (k, z) in ug.data.iter_mut().enumerate() {
            let (i, j) = ctx.grid.ij(k);
            *z *= Complex::from_polar(1.0, (s.0 * ctx.grid.rho(i) + s.1 * ctx.grid.x3(j)) / ctx.eps);
        }
        let e0 = base.energy_norm(&u);
        Ok((shifted.energy_norm(&ug) - e0).abs() / e0)
    };
    let coarse = one(ctx)?;
    let fine = one(&ctx.with_grid(ctx.grid.refined())?)?;
    Ok((coarse, fine))
}

pub fn gauge_check(ctx: &ReducedContext<f64>) -> Result<CheckOutcome> {
    let (c, f) = gauge_change(ctx, (0.3, -0.2))?;
    let ratio = c / f.max(f64::MIN_POSITIVE);
    Ok(outcome(
        "gauge_covariance",
        ratio >= 3.0,
        ratio,
        3.0,
        format!("relative energy change {c:.3e} -> {f:.3e} under refinement"),
    ))
}

/// Runs every check on the given context.
pub fn run_invariant_suite(ctx: &ReducedContext<f64>, opts: &SuiteOptions) -> Result<SuiteReport> {
    let disc = ctx.discretize()?;
    let mut checks = Vec::new();
    let eq = check_equivariance(&ctx.magnetic, 1000, opts.seed)?;
    checks.push(outcome(
        "equivariance",
        eq.passed,
        eq.max_violation,
        eq.tolerance,
        format!("{} random group elements", eq.samples),
    ));
    let handle = ConcentrationFunctionHandle::new(ctx.magnetic.clone(), ctx.scalar.clone(), ctx.p, Normalization::With2Pi)?;
    let lam = check_lambda_conditions(&ctx.dom, &handle, &ctx.scalar, InfimumSampling::default())?;
    checks.push(outcome(
        "lambda_conditions",
        lam.all_hold(),
        lam.inf_plane,
        lam.inf_plane_boundary,
        format!("inf over plane {:.6} at rho {:.6}, inf V {:.4}", lam.inf_plane, lam.argmin_plane_rho, lam.inf_v),
    ));
    checks.push(diamagnetic_check(&disc, opts));
    checks.push(hardy_check(&disc, opts));
    checks.push(nonlinearity_check(&disc)?);
    checks.push(nehari_closed_form_check(&disc, opts)?);
    checks.push(gradient_fd_check(&disc, opts));
    checks.push(gauge_check(ctx)?);
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { seed: opts.seed, passed, checks })
}
