//! Two-dimensional limit problem: radial ground state, ground-energy function, gauge
//! changes and the concentration function.

mod shooting;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numerics::{rect_min, scan_golden};
use crate::potentials::{ConcentrationDomain, ConcentrationFunction, CylMagneticPotential, ScalarPotential};
use crate::real::{lit, to_f64, Real};
use crate::reduced::{ComplexField, Discretization, HalfPlaneGrid, Measure, NodeCoefficients};

use shooting::{integrate, shoot_height, uniform_grid, Event, Ode};

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    /// Relative tolerance of the Runge-Kutta integration.
    pub rtol: f64,
    /// Number of samples on `[0, r_max]`.
    pub samples: usize,
    /// `r_max = r_max_factor / sqrt(a0)`.
    pub r_max_factor: f64,
    /// Largest initial height tried, in units of `a0^(1/(p-2))`.
    pub eta_max_factor: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, samples: 4001, r_max_factor: 20.0, eta_max_factor: 1e3 }
    }
}

/// Positive radial solution of `-Δw + a0 w = w^(p-1)` in the plane.
#[derive(Debug, Clone, Serialize)]
pub struct GroundState1D<T> {
    pub a0: T,
    pub p: T,
    /// Uniform radii on `[0, r_max]`.
    pub r: Vec<T>,
    pub w: Vec<T>,
    pub dw: Vec<T>,
    /// Radius beyond which the profile is the matched exponential tail.
    pub r_match: T,
    /// `E(0, a0) = (1/2 - 1/p) * int (|∇w|^2 + a0 w^2)`.
    pub energy: T,
    /// `int w^2` over the plane.
    pub mass: T,
    /// `int (|∇w|^2 + a0 w^2)` over the plane.
    pub quadratic: T,
    /// `int w^p` over the plane.
    pub power: T,
}

impl<T: Real> GroundState1D<T> {
    pub fn r_max(&self) -> T {
        *self.r.last().expect("nonempty profile")
    }

    pub fn peak(&self) -> T {
        self.w[0]
    }

    /// Relative Nehari defect `|int(|∇w|^2 + a0 w^2) - int w^p| / int w^p`.
    pub fn nehari_defect(&self) -> T {
        (self.quadratic - self.power).abs() / self.power
    }

    fn tail(&self, r: T) -> (T, T) {
        let k = self.a0.sqrt();
        let rm = self.r_match;
        let m = self.index_of(rm);
        let wm = self.w[m];
        let rm = self.r[m];
        let w = wm * (rm / r).sqrt() * (-(k * (r - rm))).exp();
        (w, -w * (k + lit::<T>(0.5) / r))
    }

    fn index_of(&self, r: T) -> usize {
        let h = self.r[1] - self.r[0];
        (r / h).floor().to_usize().unwrap_or(0).min(self.r.len() - 1)
    }

    /// Profile at radius `r`: cubic Hermite between samples, exponential tail beyond `r_max`.
    pub fn eval(&self, r: T) -> T {
        let r = r.abs();
        if r >= self.r_max() {
            return self.tail(r).0;
        }
        let h = self.r[1] - self.r[0];
        let i = self.index_of(r).min(self.r.len() - 2);
        let t = (r - self.r[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let two: T = lit(2.0);
        let three: T = lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        h00 * self.w[i] + h10 * h * self.dw[i] + h01 * self.w[i + 1] + h11 * h * self.dw[i + 1]
    }

    /// `max |w'' + w'/r - a0 w + w^(p-1)|` over interior samples inside the matched region,
    /// with `w''` from second differences.
    pub fn ode_residual(&self) -> T {
        let h = self.r[1] - self.r[0];
        let m = self.index_of(self.r_match);
        let mut worst = T::zero();
        for i in 1..m.saturating_sub(1) {
            let d2 = (self.w[i + 1] - lit::<T>(2.0) * self.w[i] + self.w[i - 1]) / (h * h);
            let res = d2 + self.dw[i] / self.r[i] - self.a0 * self.w[i] + self.w[i].powf(self.p - T::one());
            worst = worst.max(res.abs());
        }
        worst
    }
}

pub fn solve_limit_ground_state<T: Real>(a0: T, p: T, tol: T) -> Result<GroundState1D<T>> {
    let opts = ShootingOptions { rtol: to_f64(tol), ..Default::default() };
    solve_limit_ground_state_with(a0, p, opts)
}

pub fn solve_limit_ground_state_with<T: Real>(a0: T, p: T, opts: ShootingOptions) -> Result<GroundState1D<T>> {
    if !(a0 > T::zero()) {
        return domain(format!("limit coefficient a0 = {a0} must be positive"));
    }
    if !(p > lit(2.0)) {
        return domain(format!("exponent p = {p} must exceed 2"));
    }
    let k = a0.sqrt();
    let r_max = lit::<T>(opts.r_max_factor) / k;
    let grid = uniform_grid(r_max, opts.samples.max(64));
    let rtol: T = lit(opts.rtol);
    let ode = Ode { a0, p };
    let eta = shoot_height(&ode, &grid, rtol, lit(opts.eta_max_factor))?;
    let tr = integrate(&ode, eta, &grid, rtol);
    if tr.event == Event::Over {
        return Err(Error::Solver("shooting: final height overshoots".into()));
    }
    // Back off from the divergence radius so that the growing mode is negligible.
    let back = (lit::<T>(7.0)).min(tr.r_event * k * lit(0.5)) / k;
    let r_m = (tr.r_event - back).min(r_max);
    let h = grid[1] - grid[0];
    let m = (r_m / h).floor().to_usize().unwrap_or(2).clamp(2, tr.w.len() - 1);
    let rm = grid[m];
    let wm = tr.w[m];
    let mut w = Vec::with_capacity(grid.len());
    let mut dw = Vec::with_capacity(grid.len());
    for (i, &r) in grid.iter().enumerate() {
        if i <= m {
            w.push(tr.w[i]);
            dw.push(tr.dw[i]);
        } else {
            let t = wm * (rm / r).sqrt() * (-(k * (r - rm))).exp();
            w.push(t);
            dw.push(-t * (k + lit::<T>(0.5) / r));
        }
    }
    let two_pi = T::TAU();
    let quad = (tr.grad_int[m] + k * wm * wm * rm) * two_pi;
    let power = (tr.pow_int[m] + wm.powf(p) * rm / (p * k)) * two_pi;
    let mass = (tr.mass_int[m] + wm * wm * rm / (lit::<T>(2.0) * k)) * two_pi;
    let energy = (lit::<T>(0.5) - T::one() / p) * quad;
    let gs = GroundState1D { a0, p, r: grid, w, dw, r_match: rm, energy, mass, quadratic: quad, power };
    let defect = gs.nehari_defect();
    let limit = (lit::<T>(opts.rtol) * lit(1e4)).max(T::eps_machine() * lit(1e4));
    if !(defect <= limit) {
        return Err(Error::NonConvergence { iterations: 0, residual: to_f64(defect) });
    }
    if gs.w.windows(2).any(|p| p[1] >= p[0]) || gs.w.iter().any(|v| *v <= T::zero()) {
        return Err(Error::Solver("shooting: profile not positive and decreasing".into()));
    }
    Ok(gs)
}

/// `(1/2 - 1/p) int (|∇w|^2 + a0 w^2)`.
pub fn ground_energy<T: Real>(gs: &GroundState1D<T>) -> T {
    gs.energy
}

/// Cached `E(0, 1)` for exponent `p`.
pub fn unit_ground_energy(p: f64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("cache lock").get(&p.to_bits()) {
        return Ok(*v);
    }
    let e = solve_limit_ground_state_with(1.0, p, ShootingOptions::default())?.energy;
    cache.lock().expect("cache lock").insert(p.to_bits(), e);
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `2 pi rho (c^2 + V)^(2/(p-2)) E(0,1)`
    With2Pi,
    /// `rho (c^2 + V)^(2/(p-2))`
    Normalized,
}

/// Concentration function built from the potentials.
#[derive(Debug, Clone)]
pub struct ConcentrationFunctionHandle<T> {
    pub magnetic: CylMagneticPotential<T>,
    pub v: ScalarPotential<T>,
    pub p: T,
    pub e01: T,
    pub normalization: Normalization,
    /// Adds `shift / rho` to `c` (the vortex term `k eps`).
    pub c_shift: T,
}

impl<T: Real> ConcentrationFunctionHandle<T> {
    pub fn new(
        magnetic: CylMagneticPotential<T>,
        v: ScalarPotential<T>,
        p: T,
        normalization: Normalization,
    ) -> Result<Self> {
        if !(p > lit(2.0)) {
            return domain(format!("exponent p = {p} must exceed 2"));
        }
        let e01 = lit(unit_ground_energy(to_f64(p))?);
        Ok(Self { magnetic, v, p, e01, normalization, c_shift: T::zero() })
    }

    pub fn with_c_shift(mut self, shift: T) -> Self {
        self.c_shift = shift;
        self
    }

    /// `c^2 + V` (with the optional shift).
    pub fn a0(&self, rho: T, x3: T) -> Result<T> {
        if !(rho > T::zero()) {
            return domain("concentration function evaluated on the axis");
        }
        let c = self.magnetic.c(rho, x3) + self.c_shift / rho;
        Ok(c * c + self.v.eval(rho, x3)?)
    }
}

impl<T: Real> ConcentrationFunction<T> for ConcentrationFunctionHandle<T> {
    fn eval_m(&self, rho: T, x3: T) -> Result<T> {
        concentration_m(self, rho, x3)
    }
}

#[allow(non_snake_case)]
pub fn concentration_M<T: Real>(handle: &ConcentrationFunctionHandle<T>, rho: T, x3: T) -> Result<T> {
    concentration_m(handle, rho, x3)
}

fn concentration_m<T: Real>(handle: &ConcentrationFunctionHandle<T>, rho: T, x3: T) -> Result<T> {
    let a = handle.a0(rho, x3)?;
    if !(a > T::zero()) {
        return domain(format!("c^2 + V = {a} is not positive at rho = {rho}, x3 = {x3}"));
    }
    let base = rho * a.powf(lit::<T>(2.0) / (handle.p - lit(2.0)));
    Ok(match handle.normalization {
        Normalization::With2Pi => T::TAU() * base * handle.e01,
        Normalization::Normalized => base,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MinimizeReport<T> {
    pub rho_star: T,
    pub x3_star: T,
    pub m_min: T,
    /// Infimum over the closure of Λ.
    pub inf_closure: T,
    /// Sampled local minima of 𝓜 on the plane segment, away from `rho_star`, within
    /// `DEGENERACY_TOL` of `m_min`.
    pub competing_minima: usize,
    pub near_degenerate: bool,
}

/// Relative gap below which a second basin of 𝓜 counts as competing.
pub const DEGENERACY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub segment_points: usize,
    pub face_points: usize,
    pub tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { segment_points: 2048, face_points: 512, tol: 1e-12 }
    }
}

#[allow(non_snake_case)]
pub fn minimize_M<T: Real>(
    handle: &ConcentrationFunctionHandle<T>,
    dom: &ConcentrationDomain<T>,
    opts: MinimizeOptions,
) -> Result<MinimizeReport<T>> {
    let tol: T = lit(opts.tol);
    let f = |r: T| concentration_m(handle, r, T::zero());
    let (rho_star, m_min) = scan_golden(f, dom.rho_lo, dom.rho_hi, opts.segment_points, tol)?;
    let h = dom.x3_half_width;
    let (_, _, inf2) = rect_min(
        |r, z| concentration_m(handle, r, z),
        (dom.rho_lo, dom.rho_hi),
        (-h, h),
        opts.face_points,
        tol,
    )?;
    let competing = competing_minima(&f, dom, opts.segment_points, rho_star, m_min)?;
    Ok(MinimizeReport {
        rho_star,
        x3_star: T::zero(),
        m_min,
        inf_closure: inf2.min(m_min),
        competing_minima: competing,
        near_degenerate: competing > 0,
    })
}

fn competing_minima<T: Real>(
    f: &impl Fn(T) -> Result<T>,
    dom: &ConcentrationDomain<T>,
    samples: usize,
    rho_star: T,
    m_min: T,
) -> Result<usize> {
    let n = samples.max(3);
    let step = (dom.rho_hi - dom.rho_lo) / lit(n as f64 - 1.0);
    let xs: Vec<T> = (0..n).map(|k| dom.rho_lo + step * lit(k as f64)).collect();
    let vs = xs.iter().map(|&x| f(x)).collect::<Result<Vec<T>>>()?;
    let level = m_min + m_min.abs() * lit(DEGENERACY_TOL);
    let count = (0..n)
        .filter(|&k| {
            let left = k == 0 || vs[k] < vs[k - 1];
            let right = k == n - 1 || vs[k] <= vs[k + 1];
            left && right && vs[k] <= level && (xs[k] - rho_star).abs() > step * lit(2.0)
        })
        .count();
    Ok(count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeDirection {
    /// Multiply by `exp(+i A0·y)`.
    Add,
    /// Multiply by `exp(-i A0·y)`.
    Remove,
}

/// Pointwise multiplication by `exp(±i A0·y)` with `y` the node coordinates.
pub fn gauge_transform<T: Real>(
    grid: &HalfPlaneGrid<T>,
    u: &ComplexField<T>,
    a0: [T; 2],
    direction: GaugeDirection,
) -> ComplexField<T> {
    let s = match direction {
        GaugeDirection::Add => T::one(),
        GaugeDirection::Remove => -T::one(),
    };
    let mut out = u.clone();
    for (k, z) in out.data.iter_mut().enumerate() {
        let (i, j) = grid.ij(k);
        let phase = s * (a0[0] * grid.rho(i) + a0[1] * grid.x3(j));
        *z = *z * Complex::from_polar(T::one(), phase);
    }
    out
}

/// Discretization of `|(i∇ + A0)u|^2 + a0|u|^2 - (2/p)|u|^p` on a planar grid.
pub fn planar_limit_problem<T: Real>(grid: HalfPlaneGrid<T>, a_const: [T; 2], a0: T, p: T) -> Result<Discretization<T>> {
    if grid.measure != Measure::Planar {
        return Err(Error::Config("planar limit problem needs a planar grid".into()));
    }
    let node = |_: T, _: T| Ok(NodeCoefficients { q: a0, in_lambda: true, cap: T::zero(), v: a0, hardy: T::zero() });
    Discretization::assemble(grid, T::one(), p, T::one(), node, |_, _| a_const[0], |_, _| a_const[1])
}

/// Square planar grid `[-half, half]^2` with `n` nodes per side.
pub fn planar_grid<T: Real>(half: T, n: usize) -> Result<HalfPlaneGrid<T>> {
    HalfPlaneGrid::planar(-half, half, -half, half, n, n)
}

/// Samples a radial profile on a planar grid.
pub fn radial_field<T: Real>(grid: &HalfPlaneGrid<T>, gs: &GroundState1D<T>) -> ComplexField<T> {
    ComplexField::from_fn(grid, |y1, y2| Complex::new(gs.eval(y1.hypot(y2)), T::zero()))
}

