//! Vortex ansatz `u_k = C_k ((x2 + i x1)/rho)^k v_k` with real `v_k` and effective potential
//! `(k eps / rho + c(rho))^2 + V`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::limit2d::{solve_limit_ground_state, ConcentrationFunctionHandle, Normalization};
use crate::numerics::rect_min;
use crate::potentials::{
    aux_hardy_h_radial, ConcentrationDomain, CylMagneticPotential, PenalizationParams, ScalarPotential,
};
use crate::real::{from_usize, lit, to_f64, Real};
use crate::reduced::{ComplexField, Discretization, HalfPlaneGrid, NodeCoefficients};
use crate::solver::{bump_field, solve_penalized, BumpSpec, SolveConfig, SolveFailure, SolveResult};

#[derive(Debug, Clone)]
pub struct VortexConfig<T> {
    pub k: i32,
    pub c_k: T,
    /// Tangential profile `c(rho)`; normal and axial parts must vanish.
    pub magnetic: CylMagneticPotential<T>,
    pub scalar: ScalarPotential<T>,
    pub p: T,
}

impl<T: Real> VortexConfig<T> {
    pub fn new(k: i32, c_k: T, magnetic: CylMagneticPotential<T>, scalar: ScalarPotential<T>, p: T) -> Result<Self> {
        if c_k == T::zero() || !c_k.is_finite() {
            return Err(Error::Config("vortex amplitude C_k must be nonzero".into()));
        }
        if !(p > lit(2.0)) {
            return Err(Error::Config(format!("p = {p} must exceed 2")));
        }
        if magnetic.has_normal_or_axial_part() || !magnetic.c_is_x3_independent() {
            return Err(Error::Config("vortex ansatz needs A = c(rho) e_tau with c independent of x3".into()));
        }
        Ok(Self { k, c_k, magnetic, scalar, p })
    }

    pub fn c(&self, rho: T) -> T {
        self.magnetic.c(rho, T::zero())
    }

    /// `inf (theta c^2 + V)` over the closure of Λ.
    pub fn theta_potential_inf(&self, dom: &ConcentrationDomain<T>, theta: T) -> Result<T> {
        let (_, _, v) = rect_min(
            |r, z| {
                let c = self.c(r);
                Ok(theta * c * c + self.scalar.eval(r, z)?)
            },
            (dom.rho_lo, dom.rho_hi),
            (-dom.x3_half_width, dom.x3_half_width),
            512,
            lit(1e-12),
        )?;
        Ok(v)
    }

    /// `c > 0` on the closure of Λ and `inf (0.9 c^2 + V) > 0` there.
    pub fn critical_frequency_hypotheses(&self, dom: &ConcentrationDomain<T>) -> Result<bool> {
        let n = 2048;
        let positive = (0..n).all(|i| {
            let r = dom.rho_lo + (dom.rho_hi - dom.rho_lo) * from_usize::<T>(i) / from_usize::<T>(n - 1);
            self.c(r) > T::zero()
        });
        Ok(positive && self.theta_potential_inf(dom, lit(0.9))? > T::zero())
    }

    /// Normalized concentration function `rho (c^2 + V)^(2/(p-2))`.
    pub fn concentration(&self) -> Result<ConcentrationFunctionHandle<T>> {
        ConcentrationFunctionHandle::new(self.magnetic.clone(), self.scalar.clone(), self.p, Normalization::Normalized)
    }
}

/// `W_k = (k eps / rho + c(rho))^2 + V(rho, x3)`.
pub fn effective_potential<T: Real>(cfg: &VortexConfig<T>, eps: T, rho: T, x3: T) -> Result<T> {
    if !(rho > T::zero()) {
        return domain("effective potential evaluated on the axis");
    }
    let s = lit::<T>(cfg.k as f64) * eps / rho + cfg.c(rho);
    Ok(s * s + cfg.scalar.eval(rho, x3)?)
}

/// Real reduced problem with potential `W_k` and nonlinearity coefficient `gamma`; the cap
/// outside Λ is `eps^2 H + mu W_k`.
pub fn vortex_discretization<T: Real>(
    cfg: &VortexConfig<T>,
    eps: T,
    grid: HalfPlaneGrid<T>,
    dom: &ConcentrationDomain<T>,
    pen: &PenalizationParams<T>,
    gamma: T,
) -> Result<Discretization<T>> {
    grid.check_margin(dom, 0.1)?;
    let node = |r: T, z: T| {
        let w = effective_potential(cfg, eps, r, z)?;
        let hardy = aux_hardy_h_radial(pen, r.hypot(z))?;
        Ok(NodeCoefficients {
            q: w,
            in_lambda: dom.contains(r, z),
            cap: eps * eps * hardy + pen.mu * w,
            v: cfg.scalar.eval(r, z)?,
            hardy,
        })
    };
    Discretization::assemble(grid, eps, cfg.p, gamma, node, |_, _| T::zero(), |_, _| T::zero())
}

/// Real solution with `C_k = 1`; the solution for general `C_k` is `v / C_k`.
#[derive(Debug, Clone)]
pub struct VortexSolution<T> {
    pub result: SolveResult<T>,
    pub c_k: T,
    pub k: i32,
    pub eps: T,
}

impl<T: Real> VortexSolution<T> {
    /// `v_k` for the configured `C_k`.
    pub fn v_scaled(&self) -> Vec<T> {
        self.result.u.data.iter().map(|z| z.re / self.c_k).collect()
    }
}

/// Solves the real equation for `v_k` (internally with `C_k = 1`).
#[allow(clippy::too_many_arguments)]
pub fn solve_vortex<T: Real>(
    cfg: &VortexConfig<T>,
    eps: T,
    grid: HalfPlaneGrid<T>,
    dom: &ConcentrationDomain<T>,
    pen: &PenalizationParams<T>,
    solver_cfg: &SolveConfig,
    center: Option<(T, T)>,
    init: Option<&ComplexField<T>>,
) -> std::result::Result<VortexSolution<T>, SolveFailure<T>> {
    let disc = vortex_discretization(cfg, eps, grid, dom, pen, T::one())?;
    let start = match init {
        Some(u) => u.map(|z| Complex::new(z.norm(), T::zero())),
        None => {
            let c = center.unwrap_or(((dom.rho_lo + dom.rho_hi) * lit(0.5), T::zero()));
            if !dom.contains(c.0, c.1) {
                return Err(Error::Domain("vortex initial centre outside the concentration domain".into()).into());
            }
            let a0 = effective_potential(cfg, eps, c.0, c.1)?;
            let gs = solve_limit_ground_state(a0, cfg.p, lit(1e-10))?;
            let spec = BumpSpec { center: c, eps, a0, p: cfg.p, gamma: T::one(), vector: (T::zero(), T::zero()) };
            bump_field(&grid, dom, &spec, &gs)
        }
    };
    let result = solve_penalized(&disc, solver_cfg, &start)?;
    Ok(VortexSolution { result, c_k: cfg.c_k, k: cfg.k, eps })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SliceResidual {
    pub theta: f64,
    /// `max_nodes |R_3d(theta)|`.
    pub max_residual: f64,
    pub max_difference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    pub k: i32,
    pub theta_samples: usize,
    /// `max_theta max_nodes |R_3d(theta) - phase(theta) R_red|`.
    pub max_difference: f64,
    pub max_reduced_residual: f64,
    /// `max ||u_k| - |C_k v_k||`.
    pub modulus_error: f64,
    pub slices: Vec<SliceResidual>,
}

/// Nodal centered cylindrical Laplacian `f_rr + f_r / rho + f_33` at interior nodes.
fn laplacian<T: Real>(grid: &HalfPlaneGrid<T>, f: &[Complex<T>], i: usize, j: usize) -> Complex<T> {
    let (hr, h3) = (grid.h_rho(), grid.h_x3());
    let k = grid.idx(i, j);
    let n = grid.n_x3;
    let two: T = lit(2.0);
    let (rp, rm, zp, zm, c) = (f[k + n], f[k - n], f[k + 1], f[k - 1], f[k]);
    (rp - c * two + rm) / (hr * hr) + (rp - rm) / (two * hr * grid.rho(i)) + (zp - c * two + zm) / (h3 * h3)
}

/// Builds `u_k` on `theta_samples` slices and compares the residual of the magnetic equation with
/// `A = c(rho) e_tau` against the phase times the residual of the real equation for `v_k`.
pub fn reconstruct_uk<T: Real>(
    cfg: &VortexConfig<T>,
    grid: &HalfPlaneGrid<T>,
    eps: T,
    v: &[T],
    theta_samples: usize,
) -> Result<ReconstructionReport> {
    if v.len() != grid.len() {
        return Err(Error::Config("profile length does not match the grid".into()));
    }
    if theta_samples < 4 {
        return Err(Error::Config("need at least 4 theta samples".into()));
    }
    let n = grid.len();
    let ck = cfg.c_k;
    let p = cfg.p;
    let vc: Vec<Complex<T>> = v.iter().map(|x| Complex::new(*x, T::zero())).collect();
    let dt = T::TAU() / from_usize::<T>(theta_samples);
    // (x2 + i x1)/rho = i exp(-i theta)
    let kk = cfg.k;
    let phase = |m: usize| -> Complex<T> {
        let th = dt * from_usize::<T>(m % theta_samples);
        Complex::new(T::zero(), T::one()).powi(kk) * Complex::from_polar(T::one(), -th * lit(kk as f64))
    };
    let ie = Complex::new(T::zero(), eps);
    let nl = |z: Complex<T>| z * z.norm().powf(p - lit(2.0));
    let mut red = vec![Complex::new(T::zero(), T::zero()); n];
    let mut max_red = T::zero();
    for i in 1..grid.n_rho - 1 {
        for j in 1..grid.n_x3 - 1 {
            let k = grid.idx(i, j);
            let w = effective_potential(cfg, eps, grid.rho(i), grid.x3(j))?;
            let r = -laplacian(grid, &vc, i, j) * (eps * eps) + vc[k] * w - nl(vc[k]) * ck.powf(p - lit(2.0));
            red[k] = r;
            max_red = max_red.max(r.norm());
        }
    }
    let slice = |m: usize| -> Vec<Complex<T>> { vc.iter().map(|z| *z * phase(m) * ck).collect() };
    let (mut diff, mut moderr) = (T::zero(), T::zero());
    let two: T = lit(2.0);
    let mut slices = Vec::with_capacity(theta_samples);
    for m in 0..theta_samples {
        let (mut slice_res, mut slice_diff) = (T::zero(), T::zero());
        let u0 = slice(m);
        let up = slice(m + 1);
        let um = slice(m + theta_samples - 1);
        for i in 1..grid.n_rho - 1 {
            let rho = grid.rho(i);
            let c = cfg.c(rho);
            for j in 1..grid.n_x3 - 1 {
                let k = grid.idx(i, j);
                let d_th = (up[k] - um[k]) / (two * dt);
                let d2_th = (up[k] - u0[k] * two + um[k]) / (dt * dt);
                let lap = laplacian(grid, &u0, i, j) + d2_th / (rho * rho);
                let v_pot = cfg.scalar.eval(rho, grid.x3(j))?;
                let r3 = -lap * (eps * eps) + ie * d_th * (two * c / rho) + u0[k] * (c * c + v_pot) - nl(u0[k]);
                slice_res = slice_res.max(r3.norm());
                slice_diff = slice_diff.max((r3 - red[k] * phase(m) * ck).norm());
                moderr = moderr.max((u0[k].norm() - (vc[k] * ck).norm()).abs());
            }
        }
        diff = diff.max(slice_diff);
        slices.push(SliceResidual {
            theta: to_f64(dt) * m as f64,
            max_residual: to_f64(slice_res),
            max_difference: to_f64(slice_diff),
        });
    }
    Ok(ReconstructionReport {
        k: cfg.k,
        theta_samples,
        max_difference: to_f64(diff),
        max_reduced_residual: to_f64(max_red * ck.abs()),
        modulus_error: to_f64(moderr),
        slices,
    })
}
