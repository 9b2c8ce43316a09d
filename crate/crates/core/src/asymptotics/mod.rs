//! Concentration diagnostics and ε-continuation.

mod peak;

pub use peak::{find_peak, Peak};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::limit2d::{
    minimize_M, solve_limit_ground_state, ConcentrationFunctionHandle, GroundState1D, MinimizeOptions,
    Normalization,
};
use crate::numerics::rect_min;
use crate::potentials::{aux_hardy_h_radial, ConcentrationFunction};
use crate::real::{from_usize, lit, to_f64, Real};
use crate::reduced::{ComplexField, Discretization, HalfPlaneGrid, ReducedContext};
use crate::solver::{init_guess, solve_penalized, SolveConfig, SolveResult};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileComparison {
    /// `max ||v| - w| / max w` over the sampled disc.
    pub error: f64,
    pub samples: usize,
    /// Whether part of the disc fell outside the grid.
    pub truncated: bool,
}

/// Compares `|u(x_peak + eps y)|` with `w(|y|)` at the grid nodes with `|y| <= radius`.
pub fn rescale_and_compare<T: Real>(
    grid: &HalfPlaneGrid<T>,
    u: &ComplexField<T>,
    peak: &Peak<T>,
    eps: T,
    gs: &GroundState1D<T>,
    radius: T,
) -> ProfileComparison {
    let reach = radius * eps;
    let truncated = peak.rho - reach < grid.rho_min
        || peak.rho + reach > grid.rho_max
        || peak.x3 - reach < grid.x3_min
        || peak.x3 + reach > grid.x3_max;
    if truncated {
        log::warn!("rescaled window exceeds the grid and is truncated");
    }
    let wmax = gs.peak();
    let (mut err, mut n) = (T::zero(), 0usize);
    for i in 0..grid.n_rho {
        for j in 0..grid.n_x3 {
            let y = (grid.rho(i) - peak.rho).hypot(grid.x3(j) - peak.x3) / eps;
            if y > radius {
                continue;
            }
            let d = (u.data[grid.idx(i, j)].norm() - gs.eval(y)).abs() / wmax;
            err = err.max(d);
            n += 1;
        }
    }
    ProfileComparison { error: to_f64(err), samples: n, truncated }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PenalizationReport {
    /// Nodes outside Λ with `|u|^(p-2) > eps^2 H + mu V`.
    pub violations: usize,
    pub nodes_outside: usize,
    /// `max |u|^(p-2) / (eps^2 H + mu V)` outside Λ.
    pub max_ratio: f64,
}

pub fn check_penalization_inactive<T: Real>(disc: &Discretization<T>, u: &ComplexField<T>) -> PenalizationReport {
    let e = disc.p - lit(2.0);
    let (mut violations, mut outside, mut ratio) = (0, 0, T::zero());
    for (k, c) in disc.coefficients().iter().enumerate() {
        if c.in_lambda {
            continue;
        }
        outside += 1;
        let m = u.data[k].norm().powf(e);
        if m > c.cap {
            violations += 1;
        }
        if c.cap > T::zero() {
            ratio = ratio.max(m / c.cap);
        } else if m > T::zero() {
            ratio = T::infinity();
        }
    }
    PenalizationReport { violations, nodes_outside: outside, max_ratio: to_f64(ratio) }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    /// Constant of the envelope after shifting the intercept to cover every node.
    pub c: f64,
    /// Largest rate for which the envelope with constant `c` covers every fit node.
    pub lambda: f64,
    /// Least-squares rate.
    pub lambda_ls: f64,
    pub nodes: usize,
    /// Whether `|u| <= C exp(-(lambda/eps) d/(1+d)) / (1+|x|)` at every fit node.
    pub bound_holds: bool,
}

struct DecaySample {
    x: f64,
    y: f64,
}

fn decay_samples<T: Real>(grid: &HalfPlaneGrid<T>, u: &ComplexField<T>, peak: &Peak<T>, eps: T, floor: f64) -> Vec<DecaySample> {
    let top = to_f64(u.max_modulus());
    let mut out = Vec::new();
    for i in 0..grid.n_rho {
        for j in 0..grid.n_x3 {
            let m = to_f64(u.data[grid.idx(i, j)].norm());
            if !(m > floor * top) {
                continue;
            }
            let (r, z) = (to_f64(grid.rho(i)), to_f64(grid.x3(j)));
            let d = (r - to_f64(peak.rho)).hypot(z - to_f64(peak.x3));
            out.push(DecaySample { x: d / (1.0 + d) / to_f64(eps), y: m.ln() + (1.0 + r.hypot(z)).ln() });
        }
    }
    out
}

/// Fits `log|u| + log(1+|x|) <= log C - (lambda/eps) d/(1+d)` with `d = d_cyl(x, x_peak)`.
pub fn fit_decay_envelope<T: Real>(
    grid: &HalfPlaneGrid<T>,
    u: &ComplexField<T>,
    peak: &Peak<T>,
    eps: T,
    noise_floor: f64,
) -> Result<DecayFit> {
    let s = decay_samples(grid, u, peak, eps, noise_floor);
    if s.len() < 10 {
        return Err(Error::Fit(format!("only {} nodes above the noise floor", s.len())));
    }
    let n = s.len() as f64;
    let mx = s.iter().map(|p| p.x).sum::<f64>() / n;
    let my = s.iter().map(|p| p.y).sum::<f64>() / n;
    let sxx: f64 = s.iter().map(|p| (p.x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("degenerate distances".into()));
    }
    let sxy: f64 = s.iter().map(|p| (p.x - mx) * (p.y - my)).sum();
    let lambda_ls = -sxy / sxx;
    let a = s.iter().map(|p| p.y + lambda_ls * p.x).fold(f64::NEG_INFINITY, f64::max);
    let lambda = s.iter().filter(|p| p.x > 0.0).map(|p| (a - p.y) / p.x).fold(f64::INFINITY, f64::min);
    let bound_holds = envelope_holds(&s, a, lambda);
    Ok(DecayFit { c: a.exp(), lambda, lambda_ls, nodes: s.len(), bound_holds })
}

fn envelope_holds(s: &[DecaySample], log_c: f64, lambda: f64) -> bool {
    s.iter().all(|p| p.y <= log_c - lambda * p.x + 1e-12 * (1.0 + log_c.abs()))
}

/// Whether the envelope with rate `lambda` and the smallest covering constant holds at every node
/// above the floor; returns that constant.
pub fn envelope_with_rate<T: Real>(
    grid: &HalfPlaneGrid<T>,
    u: &ComplexField<T>,
    peak: &Peak<T>,
    eps: T,
    noise_floor: f64,
    lambda: f64,
) -> Result<(f64, bool)> {
    let s = decay_samples(grid, u, peak, eps, noise_floor);
    if s.is_empty() {
        return Err(Error::Fit("no nodes above the noise floor".into()));
    }
    let a = s.iter().map(|p| p.y + lambda * p.x).fold(f64::NEG_INFINITY, f64::max);
    Ok((a.exp(), envelope_holds(&s, a, lambda)))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BarrierReport {
    /// `lambda^2 < (1 - mu) inf V` over the closure of Λ.
    pub hypothesis_holds: bool,
    /// Discrete inequality at every annulus node.
    pub inequality_holds: bool,
    pub passed: bool,
    pub nodes_checked: usize,
    /// Smallest value of `(-eps^2(Δ + H) + (1-mu)V) Φ / scale` over the annulus.
    pub min_scaled_value: f64,
    pub worst_node: (f64, f64),
    pub inf_v_domain: f64,
    pub inf_v_annulus: f64,
}

/// Evaluates `-eps^2 (Δ + H) Φ + (1-mu) V Φ` with `Φ = cosh(lambda (R - d)/eps)` on the annulus
/// `eps r < d < R` around the peak, using the discrete cylindrical Laplacian.
pub fn barrier_inequality_check<T: Real>(
    ctx: &ReducedContext<T>,
    peak: (T, T),
    lambda: T,
    big_r: T,
    r: T,
) -> Result<BarrierReport> {
    let (pr, pz) = peak;
    let dom = &ctx.dom;
    if !(pr - big_r > dom.rho_lo && pr + big_r < dom.rho_hi && pz.abs() + big_r < dom.x3_half_width) {
        return Err(Error::Config("barrier ball is not contained in the concentration domain".into()));
    }
    if !(ctx.eps * r < big_r) || !(r > T::zero()) {
        return Err(Error::Config("barrier annulus is empty (need 0 < eps r < R)".into()));
    }
    let eps = ctx.eps;
    let mu = ctx.pen.mu;
    let g = &ctx.grid;
    let (hr, h3) = (g.h_rho(), g.h_x3());
    let phi = |rho: T, x3: T| (lambda * (big_r - (rho - pr).hypot(x3 - pz)) / eps).cosh();
    let (_, _, inf_v) = rect_min(
        |a, b| ctx.scalar.eval(a, b),
        (dom.rho_lo, dom.rho_hi),
        (-dom.x3_half_width, dom.x3_half_width),
        512,
        lit(1e-12),
    )?;
    let two: T = lit(2.0);
    let mut vals = Vec::new();
    let mut inf_ann = T::infinity();
    let mut scale = T::zero();
    for i in 1..g.n_rho - 1 {
        for j in 1..g.n_x3 - 1 {
            let (rho, x3) = (g.rho(i), g.x3(j));
            let d = (rho - pr).hypot(x3 - pz);
            if !(d > eps * r && d < big_r) {
                continue;
            }
            let c = phi(rho, x3);
            let (rp, rm) = (phi(rho + hr, x3), phi(rho - hr, x3));
            let (zp, zm) = (phi(rho, x3 + h3), phi(rho, x3 - h3));
            let lap = (rp - two * c + rm) / (hr * hr) + (rp - rm) / (two * hr * rho) + (zp - two * c + zm) / (h3 * h3);
            let v = ctx.scalar.eval(rho, x3)?;
            let h = aux_hardy_h_radial(&ctx.pen, rho.hypot(x3))?;
            let val = -eps * eps * (lap + h * c) + (T::one() - mu) * v * c;
            inf_ann = inf_ann.min(v);
            scale = scale.max((eps * eps * lap).abs() + ((T::one() - mu) * v * c).abs());
            vals.push((val, rho, x3));
        }
    }
    let tol: T = lit(1e-10);
    let scale = scale.max(T::min_positive_value());
    let (mut worst, mut at) = (T::infinity(), (T::zero(), T::zero()));
    for (v, a, b) in &vals {
        if *v / scale < worst {
            worst = *v / scale;
            at = (*a, *b);
        }
    }
    let inequality_holds = !vals.is_empty() && worst >= -tol;
    let hypothesis_holds = lambda * lambda < (T::one() - mu) * inf_v;
    Ok(BarrierReport {
        hypothesis_holds,
        inequality_holds,
        passed: hypothesis_holds && inequality_holds,
        nodes_checked: vals.len(),
        min_scaled_value: to_f64(worst),
        worst_node: (to_f64(at.0), to_f64(at.1)),
        inf_v_domain: to_f64(inf_v),
        inf_v_annulus: to_f64(inf_ann),
    })
}

/// `u_new(x) = u_old(x_p + (x - x_p) eps_old / eps_new)` by bilinear interpolation.
pub fn rescale_field<T: Real>(
    grid: &HalfPlaneGrid<T>,
    u_old: &ComplexField<T>,
    peak: (T, T),
    eps_old: T,
    eps_new: T,
) -> ComplexField<T> {
    let f = eps_old / eps_new;
    ComplexField::from_fn(grid, |r, z| {
        let (a, b) = (peak.0 + (r - peak.0) * f, peak.1 + (z - peak.1) * f);
        grid.interpolate(&u_old.data, a, b).unwrap_or_default()
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub eps: f64,
    pub converged: bool,
    pub failure: Option<String>,
    pub iterations: usize,
    pub residual: f64,
    pub c_eps: f64,
    pub c_eps_over_eps2: f64,
    pub energy_norm_over_eps2: f64,
    pub peak_rho: f64,
    pub peak_x3: f64,
    pub peak_value: f64,
    pub w0_at_peak: f64,
    pub m_at_peak: f64,
    pub dist_to_boundary: f64,
    pub profile_error: f64,
    pub decay_rate: Option<f64>,
    pub decay_constant: Option<f64>,
    pub decay_bound_holds: bool,
    pub penalization_violations: usize,
    pub barrier_check: bool,
    pub h_x3: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rho_star: f64,
    pub inf_m_plane: f64,
    pub inf_v_domain: f64,
    pub mu: f64,
    /// A second basin of 𝓜 on the plane comes within the degeneracy tolerance of the minimum.
    pub near_degenerate: bool,
    /// `max - min` of the per-ε decay rates.
    pub decay_rate_spread: Option<f64>,
    pub records: Vec<SweepRecord>,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Initial centre for the largest ε; the centre of Λ on the plane if `None`.
    pub center: Option<(f64, f64)>,
    pub profile_radius: f64,
    pub noise_floor: f64,
    pub barrier_radius: f64,
    pub barrier_inner: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { center: None, profile_radius: 8.0, noise_floor: 1e-12, barrier_radius: 0.3, barrier_inner: 1.0 }
    }
}

/// Solves for each ε in decreasing order, warm-starting from the previous solution.
pub fn sweep<T: Real>(
    base: &ReducedContext<T>,
    eps_list: &[T],
    cfg: &SolveConfig,
    opts: &SweepOptions,
) -> Result<(SweepReport, Vec<Option<SolveResult<T>>>)> {
    if eps_list.is_empty() || eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config("eps list must be nonempty and strictly decreasing".into()));
    }
    let handle =
        ConcentrationFunctionHandle::new(base.magnetic.clone(), base.scalar.clone(), base.p, Normalization::With2Pi)?;
    let min = minimize_M(&handle, &base.dom, MinimizeOptions::default())?;
    if min.near_degenerate {
        log::warn!("concentration function has {} competing minima; the selected basin depends on the start", min.competing_minima);
    }
    let dom = base.dom;
    let (_, _, inf_v) = rect_min(
        |a, b| base.scalar.eval(a, b),
        (dom.rho_lo, dom.rho_hi),
        (-dom.x3_half_width, dom.x3_half_width),
        512,
        lit(1e-12),
    )?;
    let lambda_barrier = (lit::<T>(0.9) * (T::one() - base.pen.mu) * inf_v).sqrt();
    let mut records = Vec::new();
    let mut fields = Vec::new();
    let mut prev: Option<(ComplexField<T>, (T, T), T)> = None;
    for &eps in eps_list {
        let ctx = base.with_eps(eps)?;
        let disc = ctx.discretize()?;
        let init = match &prev {
            Some((u, pk, e_old)) => rescale_field(&ctx.grid, u, *pk, *e_old, eps),
            None => {
                let c = opts
                    .center
                    .map(|(a, b)| (lit(a), lit(b)))
                    .unwrap_or(((dom.rho_lo + dom.rho_hi) * lit(0.5), T::zero()));
                init_guess(&ctx, c)?
            }
        };
        let outcome = solve_guarded(&ctx, &disc, cfg, &init, min.m_min);
        let (res, failure) = match outcome {
            Ok(r) => (Some(r), None),
            Err(f) => (f.best.map(|b| *b), Some(f.error.to_string())),
        };
        let Some(res) = res else {
            records.push(failed_record(eps, failure.unwrap_or_default(), &ctx));
            fields.push(None);
            prev = None;
            continue;
        };
        let rec = diagnose(&ctx, &disc, &handle, &res, opts, lambda_barrier, failure)?;
        prev = Some((res.u.clone(), (res.peak.rho, res.peak.x3), eps));
        records.push(rec);
        fields.push(Some(res));
    }
    let rates: Vec<f64> = records.iter().filter_map(|r| r.decay_rate).collect();
    let decay_rate_spread = (rates.len() > 1).then(|| {
        let hi = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - rates.iter().copied().fold(f64::INFINITY, f64::min)
    });
    let report = SweepReport {
        rho_star: to_f64(min.rho_star),
        inf_m_plane: to_f64(min.m_min),
        inf_v_domain: to_f64(inf_v),
        mu: to_f64(base.pen.mu),
        near_degenerate: min.near_degenerate,
        decay_rate_spread,
        records,
    };
    Ok((report, fields))
}

fn failed_record<T: Real>(eps: T, failure: String, ctx: &ReducedContext<T>) -> SweepRecord {
    SweepRecord {
        eps: to_f64(eps),
        converged: false,
        failure: Some(failure),
        iterations: 0,
        residual: f64::NAN,
        c_eps: f64::NAN,
        c_eps_over_eps2: f64::NAN,
        energy_norm_over_eps2: f64::NAN,
        peak_rho: f64::NAN,
        peak_x3: f64::NAN,
        peak_value: f64::NAN,
        w0_at_peak: f64::NAN,
        m_at_peak: f64::NAN,
        dist_to_boundary: f64::NAN,
        profile_error: f64::NAN,
        decay_rate: None,
        decay_constant: None,
        decay_bound_holds: false,
        penalization_violations: 0,
        barrier_check: false,
        h_x3: to_f64(ctx.grid.h_x3()),
    }
}

fn diagnose<T: Real>(
    ctx: &ReducedContext<T>,
    disc: &Discretization<T>,
    handle: &ConcentrationFunctionHandle<T>,
    res: &SolveResult<T>,
    opts: &SweepOptions,
    lambda_barrier: T,
    failure: Option<String>,
) -> Result<SweepRecord> {
    let eps = ctx.eps;
    let pk = res.peak;
    let a0 = handle.a0(pk.rho, pk.x3)?;
    let gs = solve_limit_ground_state(a0, ctx.p, lit(1e-11))?;
    let prof = rescale_and_compare(&ctx.grid, &res.u, &pk, eps, &gs, lit(opts.profile_radius));
    let fit = fit_decay_envelope(&ctx.grid, &res.u, &pk, eps, opts.noise_floor).ok();
    let pen = check_penalization_inactive(disc, &res.u);
    let big_r = lit::<T>(opts.barrier_radius).min(ctx.dom.distance_to_boundary(pk.rho, pk.x3) * lit(0.9));
    let barrier = barrier_inequality_check(ctx, (pk.rho, pk.x3), lambda_barrier, big_r, lit(opts.barrier_inner))
        .map(|b| b.passed)
        .unwrap_or(false);
    let e2 = to_f64(eps * eps);
    Ok(SweepRecord {
        eps: to_f64(eps),
        converged: res.converged,
        failure,
        iterations: res.iterations,
        residual: to_f64(res.residual),
        c_eps: to_f64(res.c_eps),
        c_eps_over_eps2: to_f64(res.c_eps) / e2,
        energy_norm_over_eps2: to_f64(res.energy_norm) / e2,
        peak_rho: to_f64(pk.rho),
        peak_x3: to_f64(pk.x3),
        peak_value: to_f64(pk.value),
        w0_at_peak: to_f64(gs.peak()),
        m_at_peak: to_f64(handle.eval_m(pk.rho, pk.x3)?),
        dist_to_boundary: to_f64(ctx.dom.distance_to_boundary(pk.rho, pk.x3)),
        profile_error: prof.error,
        decay_rate: fit.map(|f| f.lambda),
        decay_constant: fit.map(|f| f.c),
        decay_bound_holds: fit.is_some_and(|f| f.bound_holds),
        penalization_violations: pen.violations,
        barrier_check: barrier,
        h_x3: to_f64(ctx.grid.h_x3()),
    })
}

/// Solves and, if `c_eps` exceeds `guard_factor * eps^2 * inf M`, restarts from three perturbed
/// centres and keeps the lowest converged level.
pub fn solve_guarded<T: Real>(
    ctx: &ReducedContext<T>,
    disc: &Discretization<T>,
    cfg: &SolveConfig,
    init: &ComplexField<T>,
    inf_m: T,
) -> std::result::Result<SolveResult<T>, crate::solver::SolveFailure<T>> {
    let first = solve_penalized(disc, cfg, init)?;
    let bound = lit::<T>(cfg.guard_factor) * ctx.eps * ctx.eps * inf_m;
    if !cfg.guard || first.c_eps <= bound {
        return Ok(first);
    }
    log::warn!("c_eps = {} above the upper estimate {}; restarting", first.c_eps, bound);
    let dom = &ctx.dom;
    let span = dom.rho_hi - dom.rho_lo;
    let (r0, z0) = (first.peak.rho, first.peak.x3);
    let mut best = first;
    let mut restarts = 0;
    for k in 0..3 {
        let off = span * lit(0.15) * from_usize::<T>(k + 1) * if k % 2 == 0 { T::one() } else { -T::one() };
        let c = ((r0 + off).max(dom.rho_lo + span * lit(0.1)).min(dom.rho_hi - span * lit(0.1)), z0 * lit(0.5));
        let Ok(u0) = init_guess(ctx, c) else { continue };
        restarts += 1;
        if let Ok(r) = solve_penalized(disc, cfg, &u0) {
            if r.c_eps < best.c_eps {
                best = r;
            }
        }
    }
    best.restarts = restarts;
    Ok(best)
}
