//! Edge-staggered discretization of the reduced magnetic quadratic form.

use num_complex::Complex;

use super::grid::{ComplexField, HalfPlaneGrid, Measure};
use crate::error::{Error, Result};
use crate::potentials::{
    aux_hardy_h_radial, ConcentrationDomain, CylMagneticPotential, PenalizationParams, ScalarPotential,
};
use crate::real::{lit, Real};

/// Data of the reduced problem at one value of `eps`.
#[derive(Debug, Clone)]
pub struct ReducedContext<T> {
    pub eps: T,
    pub grid: HalfPlaneGrid<T>,
    pub magnetic: CylMagneticPotential<T>,
    pub scalar: ScalarPotential<T>,
    pub pen: PenalizationParams<T>,
    pub dom: ConcentrationDomain<T>,
    pub p: T,
}

impl<T: Real> ReducedContext<T> {
    pub fn new(
        eps: T,
        grid: HalfPlaneGrid<T>,
        magnetic: CylMagneticPotential<T>,
        scalar: ScalarPotential<T>,
        pen: PenalizationParams<T>,
        dom: ConcentrationDomain<T>,
        p: T,
    ) -> Result<Self> {
        if !(eps > T::zero()) {
            return Err(Error::Config(format!("eps = {eps} must be positive")));
        }
        if !(p > lit(2.0)) {
            return Err(Error::Config(format!("p = {p} must exceed 2")));
        }
        if grid.measure != Measure::Cylindrical || !(grid.rho_min > T::zero()) {
            return Err(Error::Config("reduced problem needs a cylindrical grid with rho_min > 0".into()));
        }
        grid.check_margin(&dom, 0.1)?;
        Ok(Self { eps, grid, magnetic, scalar, pen, dom, p })
    }

    pub fn with_eps(&self, eps: T) -> Result<Self> {
        Self::new(eps, self.grid, self.magnetic.clone(), self.scalar.clone(), self.pen, self.dom, self.p)
    }

    pub fn with_grid(&self, grid: HalfPlaneGrid<T>) -> Result<Self> {
        Self::new(self.eps, grid, self.magnetic.clone(), self.scalar.clone(), self.pen, self.dom, self.p)
    }

    /// `eps^2 H + mu V` at a point of the half-plane.
    pub fn cap(&self, rho: T, x3: T) -> Result<T> {
        let h = aux_hardy_h_radial(&self.pen, rho.hypot(x3))?;
        Ok(self.eps * self.eps * h + self.pen.mu * self.scalar.eval(rho, x3)?)
    }

    /// Penalized nonlinearity at a point.
    pub fn g_eps(&self, rho: T, x3: T, s: T) -> Result<T> {
        let cap = self.cap(rho, x3)?;
        super::nonlinearity::penalized_g(self.p, T::one(), self.dom.contains(rho, x3), cap, s)
    }

    /// Primitive `(1/2) int_0^s g_eps` at a point.
    #[allow(non_snake_case)]
    pub fn G_eps(&self, rho: T, x3: T, s: T) -> Result<T> {
        let cap = self.cap(rho, x3)?;
        super::nonlinearity::penalized_big_g(self.p, T::one(), self.dom.contains(rho, x3), cap, s)
    }

    pub fn discretize(&self) -> Result<Discretization<T>> {
        Discretization::from_context(self)
    }
}

/// Per-node coefficients of a discretized problem.
#[derive(Debug, Clone, Copy)]
pub struct NodeCoefficients<T> {
    /// Coefficient of `|u|^2` in the quadratic form (`c^2 + V` for the reduced problem).
    pub q: T,
    pub in_lambda: bool,
    /// Penalization cap `eps^2 H + mu V`; unused inside Λ.
    pub cap: T,
    pub v: T,
    pub hardy: T,
}

/// Quadratic form
/// `Q(u) = sum_edges W_e |i eps (u_b - u_a)/h + A_e (u_a + u_b)/2|^2 + sum_nodes w_n q_n |u_n|^2`
/// with ρ-edge weights at half-integer radii and node/x3-edge weights at node radii.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    pub grid: HalfPlaneGrid<T>,
    pub eps: T,
    pub p: T,
    /// Coefficient of the nonlinearity (1 for the reduced problem).
    pub gamma: T,
    pub(crate) node_w: Vec<T>,
    pub(crate) rho_edge_w: Vec<T>,
    pub(crate) phi_e: Vec<T>,
    pub(crate) a3_e: Vec<T>,
    pub(crate) phi_n: Vec<T>,
    pub(crate) a3_n: Vec<T>,
    pub(crate) coef: Vec<NodeCoefficients<T>>,
}

impl<T: Real> Discretization<T> {
    pub fn assemble(
        grid: HalfPlaneGrid<T>,
        eps: T,
        p: T,
        gamma: T,
        node: impl Fn(T, T) -> Result<NodeCoefficients<T>>,
        phi: impl Fn(T, T) -> T,
        a3: impl Fn(T, T) -> T,
    ) -> Result<Self> {
        let (n1, n2) = (grid.n_rho, grid.n_x3);
        let (hr, h3) = (grid.h_rho(), grid.h_x3());
        let half: T = lit(0.5);
        let node_w = (0..n1).map(|i| grid.node_weight(i)).collect();
        let rho_edge_w = (0..n1 - 1).map(|i| grid.density(grid.rho(i) + half * hr) * hr * h3).collect();
        let mut phi_e = vec![T::zero(); grid.len()];
        let mut a3_e = vec![T::zero(); grid.len()];
        let mut phi_n = vec![T::zero(); grid.len()];
        let mut a3_n = vec![T::zero(); grid.len()];
        let mut coef = Vec::with_capacity(grid.len());
        for i in 0..n1 {
            let r = grid.rho(i);
            for j in 0..n2 {
                let z = grid.x3(j);
                let k = grid.idx(i, j);
                if i + 1 < n1 {
                    phi_e[k] = phi(r + half * hr, z);
                }
                if j + 1 < n2 {
                    a3_e[k] = a3(r, z + half * h3);
                }
                phi_n[k] = phi(r, z);
                a3_n[k] = a3(r, z);
                coef.push(node(r, z)?);
            }
        }
        Ok(Self { grid, eps, p, gamma, node_w, rho_edge_w, phi_e, a3_e, phi_n, a3_n, coef })
    }

    pub fn from_context(ctx: &ReducedContext<T>) -> Result<Self> {
        Self::from_context_shifted(ctx, |_, _| T::zero(), |_, _| T::zero())
    }

    /// As `from_context` with `(phi, A3)` replaced by `(phi + dphi, A3 + da3)`.
    pub fn from_context_shifted(
        ctx: &ReducedContext<T>,
        dphi: impl Fn(T, T) -> T,
        da3: impl Fn(T, T) -> T,
    ) -> Result<Self> {
        let node = |r: T, z: T| {
            let c = ctx.magnetic.c(r, z);
            let v = ctx.scalar.eval(r, z)?;
            let hardy = aux_hardy_h_radial(&ctx.pen, r.hypot(z))?;
            Ok(NodeCoefficients {
                q: c * c + v,
                in_lambda: ctx.dom.contains(r, z),
                cap: ctx.eps * ctx.eps * hardy + ctx.pen.mu * v,
                v,
                hardy,
            })
        };
        Self::assemble(
            ctx.grid,
            ctx.eps,
            ctx.p,
            T::one(),
            node,
            |r, z| ctx.magnetic.phi(r, z) + dphi(r, z),
            |r, z| ctx.magnetic.a3(r, z) + da3(r, z),
        )
    }

    pub fn coefficients(&self) -> &[NodeCoefficients<T>] {
        &self.coef
    }

    /// Quadrature mass of node `k`.
    #[inline]
    pub fn weight(&self, k: usize) -> T {
        self.node_w[k / self.grid.n_x3]
    }

    pub fn has_vector_part(&self) -> bool {
        self.phi_e.iter().chain(&self.a3_e).any(|v| *v != T::zero())
    }

    /// Visits every edge as `(a, b, W_e, A_e, h_e)`.
    fn for_each_edge(&self, mut f: impl FnMut(usize, usize, T, T, T)) {
        let g = &self.grid;
        let (n1, n2) = (g.n_rho, g.n_x3);
        let (hr, h3) = (g.h_rho(), g.h_x3());
        for i in 0..n1 {
            for j in 0..n2 {
                let k = g.idx(i, j);
                if i + 1 < n1 {
                    f(k, k + n2, self.rho_edge_w[i], self.phi_e[k], hr);
                }
                if j + 1 < n2 {
                    f(k, k + 1, self.node_w[i], self.a3_e[k], h3);
                }
            }
        }
    }

    #[inline]
    fn edge_value(&self, ua: Complex<T>, ub: Complex<T>, a: T, h: T) -> Complex<T> {
        let alpha = Complex::new(T::zero(), self.eps / h);
        alpha * (ub - ua) + (ua + ub) * (a * lit(0.5))
    }

    /// `sum_e W_e |a_e|^2`, the magnetic kinetic part of the form.
    pub fn kinetic_part(&self, u: &ComplexField<T>) -> T {
        let mut s = T::zero();
        self.for_each_edge(|a, b, w, av, h| {
            s += w * self.edge_value(u.data[a], u.data[b], av, h).norm_sqr();
        });
        s
    }

    pub fn potential_part(&self, u: &ComplexField<T>) -> T {
        u.data.iter().enumerate().map(|(k, z)| self.weight(k) * self.coef[k].q * z.norm_sqr()).sum()
    }

    /// Discrete `||u||_eps^2`.
    pub fn energy_norm(&self, u: &ComplexField<T>) -> T {
        self.kinetic_part(u) + self.potential_part(u)
    }

    /// `eps^2 sum_e W_e ((|u_b| - |u_a|)/h)^2`: the kinetic part of `|u|` without field.
    pub fn modulus_kinetic_part(&self, u: &ComplexField<T>) -> T {
        let mut s = T::zero();
        self.for_each_edge(|a, b, w, _, h| {
            let d = (u.data[b].norm() - u.data[a].norm()) * self.eps / h;
            s += w * d * d;
        });
        s
    }

    /// `eps^2 / 4 * sum_n w_n |u_n|^2 / |x_n|^2` (`|x|^2 = rho^2 + x3^2`).
    pub fn hardy_part(&self, u: &ComplexField<T>) -> T {
        let g = &self.grid;
        let quarter: T = lit(0.25);
        u.data
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let (i, j) = g.ij(k);
                let r2 = g.rho(i).powi(2) + g.x3(j).powi(2);
                self.weight(k) * z.norm_sqr() / r2
            })
            .sum::<T>()
            * quarter
            * self.eps
            * self.eps
    }

    /// `Re sum_n w_n conj(u_n) v_n`.
    pub fn dot(&self, u: &ComplexField<T>, v: &ComplexField<T>) -> T {
        u.data.iter().zip(&v.data).enumerate().map(|(k, (a, b))| self.weight(k) * (a.conj() * b).re).sum()
    }

    pub fn norm_w(&self, u: &ComplexField<T>) -> T {
        self.dot(u, u).sqrt()
    }

    /// `K u`, the gradient of `Q/2` with respect to the unweighted real inner product.
    pub fn apply_k(&self, u: &ComplexField<T>) -> ComplexField<T> {
        let mut out = ComplexField::zeros(&self.grid);
        let half: T = lit(0.5);
        self.for_each_edge(|a, b, w, av, h| {
            let e = self.edge_value(u.data[a], u.data[b], av, h) * w;
            let alpha = Complex::new(T::zero(), self.eps / h);
            let c = Complex::new(av * half, T::zero());
            out.data[a] += e * (alpha + c);
            out.data[b] += e * (c - alpha);
        });
        for (k, o) in out.data.iter_mut().enumerate() {
            *o += u.data[k] * (self.weight(k) * self.coef[k].q);
        }
        out.zero_boundary();
        out
    }

    /// `L u`: the Riesz representative of `Q/2` in the weighted inner product.
    pub fn apply_l(&self, u: &ComplexField<T>) -> ComplexField<T> {
        let mut out = self.apply_k(u);
        for (k, o) in out.data.iter_mut().enumerate() {
            *o = *o / self.weight(k);
        }
        out
    }

    /// Nodal approximations of `(i eps d_rho + phi) u` and `(i eps d_x3 + A3) u`: centered
    /// at interior nodes, one-sided on the boundary.
    pub fn magnetic_gradient(&self, u: &ComplexField<T>) -> (ComplexField<T>, ComplexField<T>) {
        let g = &self.grid;
        let (n1, n2) = (g.n_rho, g.n_x3);
        let ie = Complex::new(T::zero(), self.eps);
        let d = |lo: usize, hi: usize, span: T| (u.data[hi] - u.data[lo]) / span;
        let mut gr = ComplexField::zeros(g);
        let mut g3 = ComplexField::zeros(g);
        let (hr, h3) = (g.h_rho(), g.h_x3());
        let two: T = lit(2.0);
        for i in 0..n1 {
            for j in 0..n2 {
                let k = g.idx(i, j);
                let dr = if i == 0 {
                    d(k, k + n2, hr)
                } else if i == n1 - 1 {
                    d(k - n2, k, hr)
                } else {
                    d(k - n2, k + n2, two * hr)
                };
                let dz = if j == 0 {
                    d(k, k + 1, h3)
                } else if j == n2 - 1 {
                    d(k - 1, k, h3)
                } else {
                    d(k - 1, k + 1, two * h3)
                };
                gr.data[k] = ie * dr + u.data[k] * self.phi_n[k];
                g3.data[k] = ie * dz + u.data[k] * self.a3_n[k];
            }
        }
        (gr, g3)
    }
}
