//! Nehari-projected descent for the penalized functional.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{find_peak, Peak};
use crate::error::{domain, Error, Result};
use crate::limit2d::{solve_limit_ground_state, GroundState1D};
use crate::potentials::ConcentrationDomain;
use crate::real::{lit, to_f64, Real};
use crate::reduced::{ComplexField, Discretization, FastSolver, HalfPlaneGrid, ReducedContext};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum StepRule {
    Fixed { tau: f64 },
    Armijo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Plain weighted-L² gradient, initial step `1 / lambda_max`.
    L2,
    /// Gradient in the `||.||_eps` inner product (`L^-1` applied to the L² gradient).
    Sobolev,
    /// Polak-Ribière conjugate directions in the `||.||_eps` inner product.
    SobolevCg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub max_iters: usize,
    /// Threshold on `||grad J||_w / ||u||_eps`.
    pub grad_tol: f64,
    pub step: StepRule,
    pub direction: Direction,
    /// Relative tolerance of the Nehari root.
    pub nehari_bisection_tol: f64,
    pub armijo_c: f64,
    /// Restart from perturbed centres when `c_eps` exceeds the upper estimate by `guard_factor`.
    pub guard: bool,
    pub guard_factor: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            grad_tol: 1e-8,
            step: StepRule::Armijo,
            direction: Direction::SobolevCg,
            nehari_bisection_tol: 1e-14,
            armijo_c: 1e-4,
            guard: true,
            guard_factor: 1.1,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if self.max_iters == 0 || !pos(self.grad_tol) || !pos(self.nehari_bisection_tol) || !pos(self.armijo_c) {
            return Err(Error::Config("solver tolerances must be positive and max_iters >= 1".into()));
        }
        if let StepRule::Fixed { tau } = self.step {
            if !pos(tau) {
                return Err(Error::Config("fixed step must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult<T> {
    #[serde(skip)]
    pub u: ComplexField<T>,
    pub c_eps: T,
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
    pub peak: Peak<T>,
    pub energy_norm: T,
    /// Largest `|<J'(u_k), u_k>| / ||u_k||_eps^2` over the iterates.
    pub max_nehari_defect: T,
    /// Whether the discrete diamagnetic inequality held on every iterate.
    pub diamagnetic_all: bool,
    /// `J` after each accepted step.
    pub energy_history: Vec<f64>,
    pub inner_iterations: usize,
    pub restarts: usize,
}

/// Failed solve together with the best iterate reached.
#[derive(Debug)]
pub struct SolveFailure<T> {
    pub error: Error,
    pub best: Option<Box<SolveResult<T>>>,
}

impl<T> fmt::Display for SolveFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl<T: fmt::Debug> std::error::Error for SolveFailure<T> {}

impl<T> From<SolveFailure<T>> for Error {
    fn from(f: SolveFailure<T>) -> Self {
        f.error
    }
}

impl<T> From<Error> for SolveFailure<T> {
    fn from(error: Error) -> Self {
        Self { error, best: None }
    }
}

/// Scale `t* > 0` with `<J'(t u), t u> = 0`; the pure-power value `(Q/P)^(1/(p-2))` when no node
/// along the ray reaches its cap, bisection on `t^(p-2)` otherwise.
pub fn nehari_time<T: Real>(disc: &Discretization<T>, u: &ComplexField<T>, rel_tol: T) -> Result<T> {
    nehari_ray(disc, u, rel_tol, true)
}

/// As [`nehari_time`] but always bisecting from `[0, 2 Q/P]`.
pub fn nehari_time_bisect<T: Real>(disc: &Discretization<T>, u: &ComplexField<T>, rel_tol: T) -> Result<T> {
    nehari_ray(disc, u, rel_tol, false)
}

fn nehari_ray<T: Real>(disc: &Discretization<T>, u: &ComplexField<T>, rel_tol: T, shortcut: bool) -> Result<T> {
    let q = disc.energy_norm(u);
    if !(q > T::zero()) {
        return Err(Error::RayDegenerate("zero quadratic form along the ray".into()));
    }
    let half_exp = (disc.p - lit(2.0)) * lit(0.5);
    // h(tp) = Q - sum w s min(cap, tp * gamma f(s)),  tp = t^(p-2).
    let mut terms: Vec<(T, T, Option<T>)> = Vec::new();
    let mut pure = T::zero();
    for (k, z) in u.data.iter().enumerate() {
        let s = z.norm_sqr();
        if s == T::zero() {
            continue;
        }
        let c = &disc.coef[k];
        let a = disc.weight(k) * s;
        let f = disc.gamma * s.powf(half_exp);
        pure += a * f;
        terms.push((a, f, if c.in_lambda { None } else { Some(c.cap) }));
    }
    if !(pure > T::zero()) {
        return Err(Error::RayDegenerate("no superquadratic growth along the ray".into()));
    }
    let h = |tp: T| -> T {
        let mut s = T::zero();
        for (a, f, cap) in &terms {
            let g = *f * tp;
            s += *a * match cap {
                Some(c) => g.min(*c),
                None => g,
            };
        }
        q - s
    };
    let inv = T::one() / (disc.p - lit(2.0));
    let tp0 = q / pure;
    let mut lo = T::zero();
    if shortcut {
        if h(tp0) <= rel_tol * q {
            return Ok(tp0.powf(inv));
        }
        lo = tp0;
    }
    let mut hi = tp0 * lit(2.0);
    let limit = tp0 * lit(1e12);
    while h(hi) > T::zero() {
        lo = hi;
        hi = hi * lit(2.0);
        if hi > limit {
            return Err(Error::RayDegenerate(
                "penalized branch caps the growth: no Nehari point on the ray".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if (hi - lo) <= rel_tol * mid || mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(((lo + hi) * lit(0.5)).powf(inv))
}

fn smooth_step<T: Real>(t: T) -> T {
    let f = |x: T| if x > T::zero() { (-T::one() / x).exp() } else { T::zero() };
    let (a, b) = (f(t), f(T::one() - t));
    if a + b == T::zero() {
        T::zero()
    } else {
        a / (a + b)
    }
}

/// Smooth cutoff equal to one away from `∂Λ` and supported in Λ.
pub fn domain_cutoff<T: Real>(dom: &ConcentrationDomain<T>, rho: T, x3: T) -> T {
    let dr = (dom.rho_hi - dom.rho_lo) * lit(0.25);
    let dz = dom.x3_half_width * lit(0.5);
    smooth_step((rho - dom.rho_lo) / dr)
        * smooth_step((dom.rho_hi - rho) / dr)
        * smooth_step((dom.x3_half_width - x3) / dz)
        * smooth_step((dom.x3_half_width + x3) / dz)
}

/// Parameters of a bump initial guess.
#[derive(Debug, Clone, Copy)]
pub struct BumpSpec<T> {
    pub center: (T, T),
    pub eps: T,
    /// Limit coefficient at the centre.
    pub a0: T,
    pub p: T,
    pub gamma: T,
    /// `(phi, A3)` at the centre, used for the gauge phase.
    pub vector: (T, T),
}

/// `gamma^(-1/(p-2)) w((x - x0)/eps) exp(i (phi0 (rho - rho0) + A30 x3)/eps) * cutoff`.
pub fn bump_field<T: Real>(
    grid: &HalfPlaneGrid<T>,
    dom: &ConcentrationDomain<T>,
    spec: &BumpSpec<T>,
    gs: &GroundState1D<T>,
) -> ComplexField<T> {
    let (r0, z0) = spec.center;
    let amp = spec.gamma.powf(-T::one() / (spec.p - lit(2.0)));
    ComplexField::from_fn(grid, |r, z| {
        let d = (r - r0).hypot(z - z0) / spec.eps;
        let m = amp * gs.eval(d) * domain_cutoff(dom, r, z);
        let phase = (spec.vector.0 * (r - r0) + spec.vector.1 * z) / spec.eps;
        Complex::from_polar(m, phase)
    })
}

/// Gauge-phased limit profile centred at `center`, cut off inside Λ.
pub fn init_guess<T: Real>(ctx: &ReducedContext<T>, center: (T, T)) -> Result<ComplexField<T>> {
    let (r0, z0) = center;
    if !ctx.dom.contains(r0, z0) {
        return domain(format!("initial centre ({r0}, {z0}) outside the concentration domain"));
    }
    let c = ctx.magnetic.c(r0, z0);
    let a0 = c * c + ctx.scalar.eval(r0, z0)?;
    let gs = solve_limit_ground_state(a0, ctx.p, lit(1e-10))?;
    let spec = BumpSpec {
        center,
        eps: ctx.eps,
        a0,
        p: ctx.p,
        gamma: T::one(),
        vector: (ctx.magnetic.phi(r0, z0), ctx.magnetic.a3(r0, z0)),
    };
    Ok(bump_field(&ctx.grid, &ctx.dom, &spec, &gs))
}

/// Largest eigenvalue of `L` by power iteration.
pub fn lambda_max<T: Real>(disc: &Discretization<T>, iterations: usize) -> T {
    let g = &disc.grid;
    let mut v = ComplexField::from_fn(g, |r, z| {
        let s = (r * lit(12.9898) + z * lit(78.233)).sin() * lit(43758.5453);
        Complex::new(s - s.floor() - lit(0.5), T::zero())
    });
    let mut lam = T::zero();
    for _ in 0..iterations {
        let n = disc.norm_w(&v);
        if n == T::zero() {
            break;
        }
        v.scale(T::one() / n);
        let lv = disc.apply_l(&v);
        lam = disc.dot(&v, &lv);
        v = lv;
    }
    lam
}

struct Iterate<T> {
    u: ComplexField<T>,
    j: T,
}

fn project<T: Real>(disc: &Discretization<T>, v: &ComplexField<T>, tol: T) -> Result<Iterate<T>> {
    let t = nehari_time(disc, v, tol)?;
    let u = v.scaled(t);
    let j = disc.functional(&u);
    Ok(Iterate { u, j })
}

fn diamagnetic_holds<T: Real>(disc: &Discretization<T>, u: &ComplexField<T>) -> bool {
    let k = disc.kinetic_part(u);
    disc.modulus_kinetic_part(u) <= k * (T::one() + lit(1e-10)) + T::min_positive_value()
}

/// Minimizes `J` over the discrete Nehari manifold starting from `init`.
pub fn solve_penalized<T: Real>(
    disc: &Discretization<T>,
    cfg: &SolveConfig,
    init: &ComplexField<T>,
) -> std::result::Result<SolveResult<T>, SolveFailure<T>> {
    cfg.validate()?;
    if !init.matches(&disc.grid) || !init.is_finite() {
        return Err(Error::Config("initial field does not match the grid".into()).into());
    }
    let tol_n: T = lit(cfg.nehari_bisection_tol);
    let grad_tol: T = lit(cfg.grad_tol);
    let armijo_c: T = lit(cfg.armijo_c);
    let fast = FastSolver::new(disc);
    let mut cur = project(disc, init, tol_n)?;
    let tau_l2 = match cfg.direction {
        Direction::L2 => T::one() / lambda_max(disc, 20),
        _ => T::one(),
    };
    let mut tau_prev = match cfg.step {
        StepRule::Fixed { tau } => lit(tau),
        StepRule::Armijo => tau_l2,
    };
    let mut st = Stats { history: vec![to_f64(cur.j)], max_defect: T::zero(), dia_all: true, inner: 0, iterations: 0 };
    let mut grad = disc.gradient(&cur.u);
    let mut prev: Option<(ComplexField<T>, T, ComplexField<T>)> = None;
    loop {
        let q = disc.energy_norm(&cur.u);
        st.max_defect = st.max_defect.max((q - disc.nonlinear_pairing(&cur.u)).abs() / q);
        st.dia_all &= diamagnetic_holds(disc, &cur.u);
        let residual = disc.norm_w(&grad) / q.sqrt();
        if residual <= grad_tol {
            return Ok(finish(disc, &cur, residual, true, st)?);
        }
        if st.iterations >= cfg.max_iters {
            let best = finish(disc, &cur, residual, false, st)?;
            let iterations = best.iterations;
            return Err(SolveFailure {
                error: Error::NonConvergence { iterations, residual: to_f64(residual) },
                best: Some(Box::new(best)),
            });
        }
        let precond = match cfg.direction {
            Direction::L2 => grad.clone(),
            _ => {
                let (z, s) = fast.solve_l(&grad)?;
                st.inner += s.iterations;
                z
            }
        };
        let gz = disc.dot(&grad, &precond);
        let mut dir = precond.scaled(-T::one());
        if cfg.direction == Direction::SobolevCg {
            if let Some((g0, gz0, d0)) = &prev {
                let beta = ((gz - disc.dot(g0, &precond)) / *gz0).max(T::zero());
                let cand = dir.add_scaled(beta, d0);
                if disc.dot(&grad, &cand) < -lit::<T>(1e-3) * gz {
                    dir = cand;
                }
            }
        }
        let slope = disc.dot(&grad, &dir);
        // Values of J are only resolved to about eps * ||u||^2.
        let slack = lit::<T>(32.0) * T::eps_machine() * q;
        let armijo = |it: &Iterate<T>, tau: T| it.j <= cur.j + armijo_c * tau * slope + slack;
        let step = match (cfg.step, cfg.direction) {
            (StepRule::Fixed { tau }, _) => Some((project(disc, &cur.u.add_scaled(lit(tau), &dir), tol_n)?, lit(tau))),
            (StepRule::Armijo, Direction::SobolevCg) => {
                secant_search(disc, &cur, &dir, slope, tau_prev, tol_n, &armijo)?
            }
            (StepRule::Armijo, d) => {
                let tau0 = if d == Direction::Sobolev { T::one() } else { (tau_prev * lit(2.0)).min(tau_l2 * lit(64.0)) };
                backtrack(disc, &cur, &dir, tau0, tol_n, &armijo)?
            }
        };
        let Some((next, tau)) = step else {
            let best = finish(disc, &cur, residual, false, st)?;
            return Err(SolveFailure {
                error: Error::Solver(format!("line search stalled at residual {residual:e}")),
                best: Some(Box::new(best)),
            });
        };
        tau_prev = tau;
        if st.iterations % 200 == 0 {
            log::debug!("iter {}: J = {}, residual = {residual:e}, tau = {tau}", st.iterations, next.j);
        }
        prev = Some((grad, gz, dir));
        cur = next;
        grad = disc.gradient(&cur.u);
        st.history.push(to_f64(cur.j));
        st.iterations += 1;
    }
}

struct Stats<T> {
    history: Vec<f64>,
    max_defect: T,
    dia_all: bool,
    inner: usize,
    iterations: usize,
}

fn finish<T: Real>(
    disc: &Discretization<T>,
    it: &Iterate<T>,
    residual: T,
    converged: bool,
    st: Stats<T>,
) -> Result<SolveResult<T>> {
    Ok(SolveResult {
        u: it.u.clone(),
        c_eps: it.j,
        residual,
        iterations: st.iterations,
        converged,
        peak: find_peak(&disc.grid, &it.u)?,
        energy_norm: disc.energy_norm(&it.u),
        max_nehari_defect: st.max_defect,
        diamagnetic_all: st.dia_all,
        energy_history: st.history,
        inner_iterations: st.inner,
        restarts: 0,
    })
}

fn backtrack<T: Real>(
    disc: &Discretization<T>,
    cur: &Iterate<T>,
    dir: &ComplexField<T>,
    mut tau: T,
    tol_n: T,
    accept: &impl Fn(&Iterate<T>, T) -> bool,
) -> Result<Option<(Iterate<T>, T)>> {
    for _ in 0..60 {
        match project(disc, &cur.u.add_scaled(tau, dir), tol_n) {
            Ok(it) if accept(&it, tau) => return Ok(Some((it, tau))),
            Ok(_) | Err(Error::RayDegenerate(_)) => tau = tau * lit(0.5),
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Directional derivative of `tau -> J(P(u + tau d))` at a projected point `t (u + tau d)`.
fn path_slope<T: Real>(disc: &Discretization<T>, it: &Iterate<T>, dir: &ComplexField<T>, t: T) -> T {
    t * disc.dot(&disc.gradient(&it.u), dir)
}

/// Secant step on the directional derivative, safeguarded by the Armijo test.
fn secant_search<T: Real>(
    disc: &Discretization<T>,
    cur: &Iterate<T>,
    dir: &ComplexField<T>,
    slope0: T,
    tau_guess: T,
    tol_n: T,
    accept: &impl Fn(&Iterate<T>, T) -> bool,
) -> Result<Option<(Iterate<T>, T)>> {
    let mut tau1 = tau_guess.min(lit(16.0));
    for _ in 0..40 {
        let v = cur.u.add_scaled(tau1, dir);
        let t1 = match nehari_time(disc, &v, tol_n) {
            Ok(t) => t,
            Err(Error::RayDegenerate(_)) => {
                tau1 = tau1 * lit(0.25);
                continue;
            }
            Err(e) => return Err(e),
        };
        let it1 = Iterate { u: v.scaled(t1), j: T::zero() };
        let it1 = Iterate { j: disc.functional(&it1.u), u: it1.u };
        let s1 = path_slope(disc, &it1, dir, t1);
        let mut best = if accept(&it1, tau1) { Some((it1, tau1)) } else { None };
        if s1 != slope0 {
            let ts = (tau1 * slope0 / (slope0 - s1)).max(tau1 * lit(0.05)).min(tau1 * lit(4.0));
            if let Ok(its) = project(disc, &cur.u.add_scaled(ts, dir), tol_n) {
                if accept(&its, ts) && best.as_ref().is_none_or(|(b, _)| its.j <= b.j) {
                    best = Some((its, ts));
                }
            }
        }
        if best.is_some() {
            return Ok(best);
        }
        tau1 = tau1 * lit(0.25);
    }
    Ok(None)
}

/// `||R||_w / ||u||_w` for the strong residual
/// `R = -eps^2 (u_rr + u_r/rho + u_33) + i eps div(phi, A3) u + 2 i eps (phi u_r + A3 u_3)
///      + (phi^2 + A3^2 + q) u - g(|u|^2) u`,
/// evaluated with fourth-order differences at nodes two or more steps from the boundary.
pub fn pde_residual<T: Real>(disc: &Discretization<T>, u: &ComplexField<T>) -> T {
    let g = &disc.grid;
    let (n1, n2) = (g.n_rho, g.n_x3);
    let (hr, h3) = (g.h_rho(), g.h_x3());
    let twelve: T = lit(12.0);
    let d1 = |f: &dyn Fn(usize) -> Complex<T>, c: usize, h: T| {
        (f(c - 2) - f(c - 1) * lit::<T>(8.0) + f(c + 1) * lit::<T>(8.0) - f(c + 2)) / (twelve * h)
    };
    let d2 = |f: &dyn Fn(usize) -> Complex<T>, c: usize, h: T| {
        (-f(c - 2) + f(c - 1) * lit::<T>(16.0) - f(c) * lit::<T>(30.0) + f(c + 1) * lit::<T>(16.0) - f(c + 2))
            / (twelve * h * h)
    };
    let re = |v: T| Complex::new(v, T::zero());
    let ie = Complex::new(T::zero(), disc.eps);
    let e2 = disc.eps * disc.eps;
    let (mut num, mut den) = (T::zero(), T::zero());
    for i in 2..n1.saturating_sub(2) {
        let r = g.rho(i);
        for j in 2..n2.saturating_sub(2) {
            let k = g.idx(i, j);
            let ur_f = |a: usize| u.data[g.idx(a, j)];
            let uz_f = |b: usize| u.data[g.idx(i, b)];
            let (ur, urr) = (d1(&ur_f, i, hr), d2(&ur_f, i, hr));
            let (uz, uzz) = (d1(&uz_f, j, h3), d2(&uz_f, j, h3));
            let rphi = |a: usize| re(g.rho(a) * disc.phi_n[g.idx(a, j)]);
            let a3 = |b: usize| re(disc.a3_n[g.idx(i, b)]);
            let div = d1(&rphi, i, hr) / r + d1(&a3, j, h3);
            let (phi, a) = (disc.phi_n[k], disc.a3_n[k]);
            let z = u.data[k];
            let q = phi * phi + a * a + disc.coef[k].q - disc.g_node(k, z.norm_sqr());
            let res = -(urr + ur / r + uzz) * e2 + ie * div * z + ie * lit::<T>(2.0) * (ur * phi + uz * a) + z * q;
            let w = disc.weight(k);
            num += w * res.norm_sqr();
            den += w * z.norm_sqr();
        }
    }
    if den == T::zero() {
        T::zero()
    } else {
        (num / den).sqrt()
    }
}
