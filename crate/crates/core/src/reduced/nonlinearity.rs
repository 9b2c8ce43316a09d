//! Penalized nonlinearity `g = chi f(s) + (1 - chi) min(cap, f(s))`, `f(s) = s^((p-2)/2)`.

use super::grid::ComplexField;
use super::operator::Discretization;
use crate::error::{domain, Result};
use crate::real::{lit, Real};

#[inline]
fn f_pow<T: Real>(p: T, s: T) -> T {
    s.powf((p - lit(2.0)) * lit(0.5))
}

/// `g` at squared modulus `s`, with the nonlinearity scaled by `gamma`.
pub fn penalized_g<T: Real>(p: T, gamma: T, in_lambda: bool, cap: T, s: T) -> Result<T> {
    if s < T::zero() {
        return domain(format!("penalized nonlinearity at negative argument {s}"));
    }
    Ok(g_unchecked(p, gamma, in_lambda, cap, s))
}

/// `(1/2) int_0^s g`, in closed form on both branches.
pub fn penalized_big_g<T: Real>(p: T, gamma: T, in_lambda: bool, cap: T, s: T) -> Result<T> {
    if s < T::zero() {
        return domain(format!("penalized primitive at negative argument {s}"));
    }
    Ok(big_g_unchecked(p, gamma, in_lambda, cap, s))
}

#[inline]
pub(crate) fn g_unchecked<T: Real>(p: T, gamma: T, in_lambda: bool, cap: T, s: T) -> T {
    let f = gamma * f_pow(p, s);
    if in_lambda {
        f
    } else {
        f.min(cap)
    }
}

#[inline]
pub(crate) fn big_g_unchecked<T: Real>(p: T, gamma: T, in_lambda: bool, cap: T, s: T) -> T {
    let pure = |s: T| gamma * s.powf(p * lit(0.5)) / p;
    if in_lambda || gamma * f_pow(p, s) <= cap {
        return pure(s);
    }
    let s_star = (cap / gamma).powf(lit::<T>(2.0) / (p - lit(2.0)));
    pure(s_star) + cap * (s - s_star) * lit(0.5)
}

impl<T: Real> Discretization<T> {
    #[inline]
    pub fn g_node(&self, k: usize, s: T) -> T {
        let c = &self.coef[k];
        g_unchecked(self.p, self.gamma, c.in_lambda, c.cap, s)
    }

    #[inline]
    pub fn big_g_node(&self, k: usize, s: T) -> T {
        let c = &self.coef[k];
        big_g_unchecked(self.p, self.gamma, c.in_lambda, c.cap, s)
    }

    /// `sum_n w_n G(x_n, |u_n|^2)`.
    pub fn nonlinear_energy(&self, u: &ComplexField<T>) -> T {
        u.data.iter().enumerate().map(|(k, z)| self.weight(k) * self.big_g_node(k, z.norm_sqr())).sum()
    }

    /// `sum_n w_n g(x_n, |u_n|^2) |u_n|^2`.
    pub fn nonlinear_pairing(&self, u: &ComplexField<T>) -> T {
        u.data
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let s = z.norm_sqr();
                self.weight(k) * self.g_node(k, s) * s
            })
            .sum()
    }

    /// Penalized functional `J(u) = Q(u)/2 - sum w G(|u|^2)`.
    pub fn functional(&self, u: &ComplexField<T>) -> T {
        self.energy_norm(u) * lit(0.5) - self.nonlinear_energy(u)
    }

    /// Weighted Riesz gradient `L u - g(|u|^2) u`.
    pub fn gradient(&self, u: &ComplexField<T>) -> ComplexField<T> {
        let mut out = self.apply_l(u);
        for (k, o) in out.data.iter_mut().enumerate() {
            let z = u.data[k];
            *o -= z * self.g_node(k, z.norm_sqr());
        }
        out.zero_boundary();
        out
    }

    /// `g(|u|^2) u` at every node.
    pub fn nonlinear_term(&self, u: &ComplexField<T>) -> ComplexField<T> {
        let mut out = u.map(|z| z);
        for (k, o) in out.data.iter_mut().enumerate() {
            *o = *o * self.g_node(k, o.norm_sqr());
        }
        out.zero_boundary();
        out
    }

    /// `<J'(u), u>` in the weighted pairing.
    pub fn nehari_functional(&self, u: &ComplexField<T>) -> T {
        self.energy_norm(u) - self.nonlinear_pairing(u)
    }
}
