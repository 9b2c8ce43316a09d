mod common;

use approx::assert_relative_eq;
use magnls::potentials::{CylMagneticPotential, PenalizationParams, ScalarPotential, ScalarShape, Table2D};
use magnls::solver::{init_guess, solve_penalized, SolveConfig};
use magnls::vortex::*;

use common::*;

fn example_cfg(k: i32, c_k: f64) -> VortexConfig<f64> {
    VortexConfig::new(k, c_k, CylMagneticPotential::ConstantField { b: 1.0 }, example_scalar(), 4.0).unwrap()
}

fn zero_v() -> ScalarPotential<f64> {
    ScalarPotential::untagged(ScalarShape::Constant { value: 0.0 }).unwrap()
}

#[test]
fn effective_potential_examples() {
    let cfg = VortexConfig::new(1, 1.0, CylMagneticPotential::ConstantField { b: 1.0 }, zero_v(), 4.0).unwrap();
    assert_relative_eq!(effective_potential(&cfg, 0.1, 1.0, 0.0).unwrap(), 0.36, max_relative = 1e-14);
    assert!(effective_potential(&cfg, 0.1, 0.0, 0.0).is_err());
    let k0 = example_cfg(0, 1.0);
    for (r, z) in [(0.5f64, 0.0), (1.3, 0.4), (3.0, -1.0)] {
        let expected = (0.5 * r).powi(2) + 1.0 / (r * r);
        assert_relative_eq!(effective_potential(&k0, 0.3, r, z).unwrap(), expected, max_relative = 1e-14);
    }
}

#[test]
fn effective_potential_times_rho_squared_stays_positive() {
    // c(rho) rho = 1 for all rho.
    let mag = CylMagneticPotential::TangentialPower { amplitude: 1.0, exponent: -1.0 };
    for k in [-1, 1, 3] {
        let cfg = VortexConfig::new(k, 1.0, mag.clone(), zero_v(), 4.0).unwrap();
        let eps = 0.1;
        let floor = (k as f64 * eps + 1.0).powi(2);
        for e in 0..7 {
            let rho = 10f64.powi(e);
            let w = effective_potential(&cfg, eps, rho, 0.0).unwrap() * rho * rho;
            assert_relative_eq!(w, floor, max_relative = 1e-12);
        }
    }
}

#[test]
fn config_rejections() {
    let mag = CylMagneticPotential::ConstantField { b: 1.0 };
    assert!(VortexConfig::new(1, 0.0, mag.clone(), example_scalar(), 4.0).is_err());
    assert!(VortexConfig::new(1, 1.0, mag, example_scalar(), 2.0).is_err());
    let axes = (vec![0.0, 5.0], vec![0.0, 3.0]);
    let table = |f: fn(f64, f64) -> f64| Table2D::from_fn(axes.0.clone(), axes.1.clone(), f).unwrap();
    let tab = CylMagneticPotential::Tabulated { phi: table(|_, _| 0.1), c: table(|r, _| r), a3: table(|_, _| 0.0) };
    assert!(VortexConfig::new(1, 1.0, tab, example_scalar(), 4.0).is_err());
}

#[test]
fn k_zero_matches_reduced_solver() {
    let eps = 0.2;
    let ctx = example_ctx(eps, 129);
    let cfg = SolveConfig::default();
    let init = init_guess(&ctx, (1.25, 0.0)).unwrap();
    let red = solve_penalized(&ctx.discretize().unwrap(), &cfg, &init).unwrap();
    let vc = example_cfg(0, 1.0);
    let sol = solve_vortex(&vc, eps, ctx.grid, &ctx.dom, &ctx.pen, &cfg, Some((1.25, 0.0)), None).unwrap();
    let top = red.u.max_modulus();
    let diff = red.u.data.iter().zip(&sol.result.u.data).map(|(a, b)| (a.norm() - b.norm()).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-6 * top, "modulus difference {diff}");
    assert!(sol.result.u.is_real(1e-10 * top));
    assert!(sol.result.u.data.iter().all(|z| z.re >= -1e-10 * top));
    assert_relative_eq!(sol.result.c_eps, red.c_eps, max_relative = 1e-10);
}

#[test]
fn winding_shifts_the_peak_by_order_eps() {
    let eps = 0.2;
    let grid = example_grid(129);
    let (dom, pen) = (example_domain(), PenalizationParams::default());
    let cfg = SolveConfig::default();
    let peak = |k: i32| {
        let s = solve_vortex(&example_cfg(k, 1.0), eps, grid, &dom, &pen, &cfg, Some((1.1, 0.0)), None).unwrap();
        s.result.peak.rho
    };
    let (r0, r1) = (peak(0), peak(1));
    assert!((r1 - r0).abs() <= eps, "k = 0 at {r0}, k = 1 at {r1}");
}

#[test]
fn nonlinear_coefficient_rescales_amplitude_only() {
    let eps = 0.2;
    let grid = example_grid(97);
    let (dom, pen) = (example_domain(), PenalizationParams::default());
    let vc = example_cfg(1, 1.0);
    let cfg = SolveConfig { grad_tol: 1e-10, ..Default::default() };
    let one = solve_vortex(&vc, eps, grid, &dom, &pen, &cfg, Some((1.1, 0.0)), None).unwrap().result;
    let gamma = 3.0f64;
    let s = gamma.powf(-0.5);
    let disc = vortex_discretization(&vc, eps, grid, &dom, &pen, gamma).unwrap();
    let scaled = solve_penalized(&disc, &cfg, &one.u.scaled(1.02 * s)).unwrap();
    assert_eq!(scaled.peak.node, one.peak.node);
    for (a, b) in scaled.u.data.iter().zip(&one.u.data) {
        assert!((a.norm() - s * b.norm()).abs() <= 1e-6 * s * one.peak.value);
    }
}

#[test]
fn reconstruction_identities() {
    let eps = 0.2;
    let grid = example_grid(97);
    let (dom, pen) = (example_domain(), PenalizationParams::default());
    let cfg = SolveConfig { grad_tol: 1e-10, ..Default::default() };

    let v0 = example_cfg(0, 1.0);
    let s0 = solve_vortex(&v0, eps, grid, &dom, &pen, &cfg, Some((1.1, 0.0)), None).unwrap();
    let rep = reconstruct_uk(&v0, &grid, eps, &s0.v_scaled(), 8).unwrap();
    assert!(rep.max_difference <= 1e-12 * s0.result.peak.value.max(1.0), "{}", rep.max_difference);
    assert_eq!(rep.modulus_error, 0.0);

    for (k, c_k) in [(1, 1.0), (1, 2.0), (-2, 0.5)] {
        let vc = example_cfg(k, c_k);
        let sol = solve_vortex(&vc, eps, grid, &dom, &pen, &cfg, Some((1.1, 0.0)), None).unwrap();
        let v = sol.v_scaled();
        let coarse = reconstruct_uk(&vc, &grid, eps, &v, 32).unwrap();
        let fine = reconstruct_uk(&vc, &grid, eps, &v, 64).unwrap();
        assert!(coarse.modulus_error <= 1e-12 * sol.result.peak.value);
        assert_eq!(coarse.slices.len(), 32);
        let ratio = coarse.max_difference / fine.max_difference;
        assert!((3.5..4.5).contains(&ratio), "k = {k}: {} -> {}", coarse.max_difference, fine.max_difference);
        // The scaled profile solves the equation with C_k to the same accuracy as the unscaled one.
        let raw: Vec<f64> = sol.result.u.data.iter().map(|z| z.re).collect();
        let unit = reconstruct_uk(&example_cfg(k, 1.0), &grid, eps, &raw, 32).unwrap();
        assert_relative_eq!(coarse.max_reduced_residual, unit.max_reduced_residual, max_relative = 1e-9);
    }
    assert!(reconstruct_uk(&v0, &grid, eps, &[0.0; 3], 8).is_err());
    assert!(reconstruct_uk(&v0, &grid, eps, &s0.v_scaled(), 2).is_err());
}

#[test]
fn critical_frequency_hypotheses() {
    let c1 = CylMagneticPotential::TangentialPower { amplitude: 1.0, exponent: 0.0 };
    let well = ScalarPotential::untagged(ScalarShape::ZeroMinimumWell { rho_v: 2.0, curvature: 1.0 }).unwrap();
    let dom = magnls::potentials::ConcentrationDomain::new(1.2, 2.6, 0.5).unwrap();
    let cfg = VortexConfig::new(1, 1.0, c1, well.clone(), 4.0).unwrap();
    assert!(cfg.critical_frequency_hypotheses(&dom).unwrap());
    assert_relative_eq!(cfg.theta_potential_inf(&dom, 0.9).unwrap(), 0.9, max_relative = 1e-9);
    let c0 = CylMagneticPotential::TangentialPower { amplitude: 0.0, exponent: 0.0 };
    let none = VortexConfig::new(1, 1.0, c0, well, 4.0).unwrap();
    assert!(!none.critical_frequency_hypotheses(&dom).unwrap());
}
