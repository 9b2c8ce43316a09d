mod common;

use approx::assert_relative_eq;
use magnls::limit2d::*;
use magnls::potentials::{ConcentrationDomain, CylMagneticPotential, ScalarPotential, ScalarShape, Table2D};
use magnls::reduced::ComplexField;
use num_complex::Complex;

use common::*;

#[test]
fn unit_energy_matches_spectral_gradient_flow() {
    let gs = solve_limit_ground_state(1.0, 4.0, 1e-10).unwrap();
    let (e_flow, peak_flow) = spectral_gradient_flow_energy(1.0, 4.0, 256, 12.0);
    assert_relative_eq!(gs.energy, e_flow, max_relative = 1e-3);
    assert_relative_eq!(gs.peak(), peak_flow, max_relative = 1e-3);
}

#[test]
fn profile_scaling_is_exact() {
    for p in [3.0f64, 4.0, 6.0] {
        let w1 = solve_limit_ground_state(1.0, p, 1e-11).unwrap();
        for a0 in [0.5f64, 2.0] {
            let wa = solve_limit_ground_state(a0, p, 1e-11).unwrap();
            let s = a0.powf(1.0 / (p - 2.0));
            for r in [0.0, 0.5, 1.0, 2.0, 4.0] {
                assert_relative_eq!(wa.eval(r), s * w1.eval(a0.sqrt() * r), max_relative = 1e-6);
            }
            assert_relative_eq!(wa.energy, w1.energy * a0.powf(2.0 / (p - 2.0)), max_relative = 1e-6);
        }
    }
}

#[test]
fn doubling_a0_doubles_energy_at_p4() {
    let e1 = solve_limit_ground_state(1.0, 4.0, 1e-10).unwrap().energy;
    let e2 = solve_limit_ground_state(2.0, 4.0, 1e-10).unwrap().energy;
    assert_relative_eq!(e2, 2.0 * e1, max_relative = 1e-6);
}

#[test]
fn ground_state_invariants() {
    let gs = solve_limit_ground_state(1.0, 4.0, 1e-10).unwrap();
    assert!(gs.nehari_defect() < 1e-6, "nehari defect {}", gs.nehari_defect());
    assert!(gs.ode_residual() < 1e-3, "ode residual {}", gs.ode_residual());
    assert!(gs.w.iter().all(|v| *v > 0.0));
    assert!(gs.w.windows(2).all(|p| p[1] < p[0]));
    assert_eq!(gs.dw[0], 0.0);
    assert!(gs.eval(gs.r_max()) < 1e-6);
    // Nehari form of the energy.
    assert_relative_eq!(ground_energy(&gs), (0.5 - 0.25) * gs.power, max_relative = 1e-6);
    // For p = 4 in the plane the mass is twice the energy.
    assert_relative_eq!(gs.mass, 2.0 * gs.energy, max_relative = 1e-6);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(solve_limit_ground_state(0.0, 4.0, 1e-10).is_err());
    assert!(solve_limit_ground_state(1.0, 2.0, 1e-10).is_err());
    assert!(solve_limit_ground_state(-1.0, 4.0, 1e-10).is_err());
}

#[test]
fn energy_is_cached_and_consistent() {
    let a = unit_ground_energy(4.0).unwrap();
    let b = unit_ground_energy(4.0).unwrap();
    assert_eq!(a, b);
    assert_relative_eq!(a, solve_limit_ground_state(1.0, 4.0, 1e-12).unwrap().energy, max_relative = 1e-9);
}

fn example_handle(b: f64, norm: Normalization) -> ConcentrationFunctionHandle<f64> {
    ConcentrationFunctionHandle::new(CylMagneticPotential::ConstantField { b }, example_scalar(), 4.0, norm).unwrap()
}

#[test]
fn concentration_function_closed_forms() {
    let h = example_handle(1.0, Normalization::Normalized);
    assert_relative_eq!(concentration_M(&h, 1.0, 0.0).unwrap(), 1.25, max_relative = 1e-14);
    let one = ScalarPotential::new(ScalarShape::Constant { value: 1.0 }, Some(0.0), None).unwrap();
    let flat = ConcentrationFunctionHandle::new(
        CylMagneticPotential::TangentialPower { amplitude: 0.0, exponent: 0.0 },
        one,
        4.0,
        Normalization::With2Pi,
    )
    .unwrap();
    for rho in [0.5, 1.0, 3.0] {
        assert_relative_eq!(
            concentration_M(&flat, rho, 0.3).unwrap(),
            std::f64::consts::TAU * rho * flat.e01,
            max_relative = 1e-14
        );
    }
    assert!(concentration_M(&h, 0.0, 0.0).is_err());
}

#[test]
fn concentration_scales_with_potential() {
    for p in [3.0, 4.0, 5.0] {
        let v1 = ScalarPotential::new(ScalarShape::Constant { value: 0.7 }, Some(0.0), None).unwrap();
        let v4 = ScalarPotential::new(ScalarShape::Constant { value: 2.8 }, Some(0.0), None).unwrap();
        let m = |v| {
            let c = CylMagneticPotential::TangentialPower { amplitude: 0.0, exponent: 0.0 };
            ConcentrationFunctionHandle::new(c, v, p, Normalization::With2Pi).unwrap()
        };
        let (a, b) = (m(v1), m(v4));
        assert_relative_eq!(
            concentration_M(&b, 1.3, 0.0).unwrap(),
            4f64.powf(2.0 / (p - 2.0)) * concentration_M(&a, 1.3, 0.0).unwrap(),
            max_relative = 1e-12
        );
    }
}

#[test]
fn minimizer_matches_closed_form_for_several_fields() {
    let dom = example_domain();
    for b in [0.5, 1.0, 2.0] {
        let h = example_handle(b, Normalization::With2Pi);
        let lo = rho_star_closed_form(b).min(1.9) * 0.5;
        let d = ConcentrationDomain::new(lo.min(0.5), 2.0, 0.5).unwrap();
        let rep = minimize_M(&h, &d, MinimizeOptions::default()).unwrap();
        assert!((rep.rho_star - rho_star_closed_form(b)).abs() < 1e-6, "b = {b}: {}", rep.rho_star);
        assert_eq!(rep.x3_star, 0.0);
        assert!(rep.inf_closure <= rep.m_min * (1.0 + 1e-12));
    }
    let h = example_handle(1.0, Normalization::With2Pi);
    let rep = minimize_M(&h, &dom, MinimizeOptions::default()).unwrap();
    assert_relative_eq!(rep.m_min, 45.6113644, max_relative = 1e-7);
}

#[test]
fn flat_potential_minimizer_sits_on_left_edge() {
    let one = ScalarPotential::new(ScalarShape::Constant { value: 1.0 }, Some(0.0), None).unwrap();
    let h = ConcentrationFunctionHandle::new(
        CylMagneticPotential::TangentialPower { amplitude: 0.0, exponent: 0.0 },
        one,
        4.0,
        Normalization::With2Pi,
    )
    .unwrap();
    let rep = minimize_M(&h, &example_domain(), MinimizeOptions::default()).unwrap();
    assert!((rep.rho_star - 0.5).abs() < 1e-9);
}

#[test]
fn gauge_transform_preserves_modulus_and_round_trips() {
    let g = planar_grid(5.0, 65).unwrap();
    let u = ComplexField::from_fn(&g, |a: f64, b: f64| Complex::new((-(a * a + b * b)).exp(), 0.3 * a));
    let same = gauge_transform(&g, &u, [0.0, 0.0], GaugeDirection::Add);
    assert_eq!(same.data, u.data);
    let v = gauge_transform(&g, &u, [1.3, -0.7], GaugeDirection::Add);
    for (a, b) in u.data.iter().zip(&v.data) {
        let (na, nb): (f64, f64) = (a.norm(), b.norm());
        assert!((na - nb).abs() <= 1e-15 * (1.0 + na));
    }
    let back = gauge_transform(&g, &v, [1.3, -0.7], GaugeDirection::Remove);
    for (a, b) in u.data.iter().zip(&back.data) {
        assert!((a - b).norm() < 1e-14);
    }
}

#[test]
fn gauge_energy_defect_is_second_order() {
    let gs = solve_limit_ground_state(1.0, 4.0, 1e-10).unwrap();
    let a0v = [0.8, -0.5];
    let defect = |n: usize| -> f64 {
        let g = planar_grid(10.0, n).unwrap();
        let w = radial_field(&g, &gs);
        let free = planar_limit_problem(g, [0.0, 0.0], 1.0, 4.0).unwrap();
        let mag = planar_limit_problem(g, a0v, 1.0, 4.0).unwrap();
        let wg = gauge_transform(&g, &w, a0v, GaugeDirection::Add);
        let (em, ef): (f64, f64) = (mag.energy_norm(&wg), free.energy_norm(&w));
        (em - ef).abs() / ef
    };
    let (d1, d2) = (defect(101), defect(201));
    let ratio = d1 / d2;
    assert!((3.0..5.0).contains(&ratio), "defects {d1:e} {d2:e}");
}

#[test]
fn twin_basins_are_flagged() {
    let dom = example_domain();
    let example = ConcentrationFunctionHandle::new(
        CylMagneticPotential::ConstantField { b: 1.0 },
        example_scalar(),
        4.0,
        Normalization::With2Pi,
    )
    .unwrap();
    let rep = minimize_M(&example, &dom, MinimizeOptions::default()).unwrap();
    assert!(!rep.near_degenerate && rep.competing_minima == 0);

    // rho V(rho) has equal minima at 1 and 1.6, so M does too when c = 0.
    let rho: Vec<f64> = (0..=800).map(|k| 0.1 + 0.005 * k as f64).collect();
    let table = Table2D::from_fn(rho, vec![0.0, 3.0], |r, _| (1.0 + 10.0 * ((r - 1.0) * (r - 1.6)).powi(2)) / r).unwrap();
    let twin = ConcentrationFunctionHandle::new(
        CylMagneticPotential::TangentialPower { amplitude: 0.0, exponent: 0.0 },
        ScalarPotential::untagged(ScalarShape::Tabulated { table }).unwrap(),
        4.0,
        Normalization::Normalized,
    )
    .unwrap();
    let rep = minimize_M(&twin, &dom, MinimizeOptions::default()).unwrap();
    assert!(rep.near_degenerate && rep.competing_minima == 1, "{rep:?}");
    assert!((rep.rho_star - 1.0).abs() < 1e-2 || (rep.rho_star - 1.6).abs() < 1e-2);
}
