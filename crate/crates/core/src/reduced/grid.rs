use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::ConcentrationDomain;
use crate::real::{from_usize, lit, Real};

/// Quadrature weight attached to the half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// `2 pi rho drho dx3`: the reduced form of a cylindrically symmetric 3D integral.
    Cylindrical,
    /// `dy1 dy2`: used for the planar limit problem.
    Planar,
}

/// Uniform tensor grid on `[rho_min, rho_max] x [x3_min, x3_max]`. Node `(i, j)` has
/// flat index `i * n_x3 + j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneGrid<T> {
    pub rho_min: T,
    pub rho_max: T,
    pub x3_min: T,
    pub x3_max: T,
    pub n_rho: usize,
    pub n_x3: usize,
    pub measure: Measure,
}

impl<T: Real> HalfPlaneGrid<T> {
    pub fn new(rho_min: T, rho_max: T, x3_min: T, x3_max: T, n_rho: usize, n_x3: usize) -> Result<Self> {
        if !(rho_min > T::zero()) {
            return Err(Error::Config("grid must exclude the axis (rho_min > 0)".into()));
        }
        Self::build(rho_min, rho_max, x3_min, x3_max, n_rho, n_x3, Measure::Cylindrical)
    }

    /// Grid with unit weight; coordinates may be any rectangle.
    pub fn planar(y1_min: T, y1_max: T, y2_min: T, y2_max: T, n1: usize, n2: usize) -> Result<Self> {
        Self::build(y1_min, y1_max, y2_min, y2_max, n1, n2, Measure::Planar)
    }

    fn build(a0: T, a1: T, b0: T, b1: T, n1: usize, n2: usize, measure: Measure) -> Result<Self> {
        if n1 < 4 || n2 < 4 {
            return Err(Error::Config("grid needs at least 4 nodes per direction".into()));
        }
        if !(a1 > a0) || !(b1 > b0) {
            return Err(Error::Config("grid extents must be increasing".into()));
        }
        Ok(Self { rho_min: a0, rho_max: a1, x3_min: b0, x3_max: b1, n_rho: n1, n_x3: n2, measure })
    }

    pub fn h_rho(&self) -> T {
        (self.rho_max - self.rho_min) / from_usize::<T>(self.n_rho - 1)
    }

    pub fn h_x3(&self) -> T {
        (self.x3_max - self.x3_min) / from_usize::<T>(self.n_x3 - 1)
    }

    pub fn rho(&self, i: usize) -> T {
        self.rho_min + self.h_rho() * from_usize::<T>(i)
    }

    pub fn x3(&self, j: usize) -> T {
        self.x3_min + self.h_x3() * from_usize::<T>(j)
    }

    pub fn len(&self) -> usize {
        self.n_rho * self.n_x3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_x3 + j
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k / self.n_x3, k % self.n_x3)
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n_rho - 1 || j == self.n_x3 - 1
    }

    /// Density of the measure at radius `rho`.
    pub fn density(&self, rho: T) -> T {
        match self.measure {
            Measure::Cylindrical => T::TAU() * rho,
            Measure::Planar => T::one(),
        }
    }

    /// Quadrature mass of a node in row `i`.
    pub fn node_weight(&self, i: usize) -> T {
        self.density(self.rho(i)) * self.h_rho() * self.h_x3()
    }

    /// Same extents with `n - 1` intervals replaced by `2 (n - 1)`.
    pub fn refined(&self) -> Self {
        Self { n_rho: 2 * self.n_rho - 1, n_x3: 2 * self.n_x3 - 1, ..*self }
    }

    /// Requires the closure of the domain inside the grid with a margin of at least
    /// `fraction` of each grid extent.
    pub fn check_margin(&self, dom: &ConcentrationDomain<T>, fraction: f64) -> Result<()> {
        let f: T = lit(fraction);
        let mr = f * (self.rho_max - self.rho_min);
        let mz = f * (self.x3_max - self.x3_min);
        let ok = dom.rho_lo - self.rho_min >= mr
            && self.rho_max - dom.rho_hi >= mr
            && -dom.x3_half_width - self.x3_min >= mz
            && self.x3_max - dom.x3_half_width >= mz;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "concentration domain must lie inside the grid with a {:.0}% margin",
                fraction * 100.0
            )))
        }
    }

    /// Bilinear interpolation of nodal data at `(rho, x3)`; `None` outside the grid.
    pub fn interpolate<V>(&self, data: &[V], rho: T, x3: T) -> Option<V>
    where
        V: Copy + std::ops::Mul<T, Output = V> + std::ops::Add<Output = V>,
    {
        let s = (rho - self.rho_min) / self.h_rho();
        let t = (x3 - self.x3_min) / self.h_x3();
        let eps = lit::<T>(1e-9);
        let (smax, tmax) = (from_usize::<T>(self.n_rho - 1), from_usize::<T>(self.n_x3 - 1));
        if s < -eps || t < -eps || s > smax + eps || t > tmax + eps || !s.is_finite() || !t.is_finite() {
            return None;
        }
        let s = s.max(T::zero()).min(smax);
        let t = t.max(T::zero()).min(tmax);
        let i = s.floor().to_usize()?.min(self.n_rho - 2);
        let j = t.floor().to_usize()?.min(self.n_x3 - 2);
        let (fs, ft) = (s - from_usize::<T>(i), t - from_usize::<T>(j));
        let one = T::one();
        let v = |a: usize, b: usize| data[self.idx(a, b)];
        Some(
            v(i, j) * ((one - fs) * (one - ft))
                + v(i, j + 1) * ((one - fs) * ft)
                + v(i + 1, j) * (fs * (one - ft))
                + v(i + 1, j + 1) * (fs * ft),
        )
    }
}

/// Complex nodal values on a grid, zero on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField<T> {
    pub n_rho: usize,
    pub n_x3: usize,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> ComplexField<T> {
    pub fn zeros(grid: &HalfPlaneGrid<T>) -> Self {
        Self { n_rho: grid.n_rho, n_x3: grid.n_x3, data: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    /// Samples `f(rho, x3)` at interior nodes; boundary nodes are set to zero.
    pub fn from_fn(grid: &HalfPlaneGrid<T>, f: impl Fn(T, T) -> Complex<T>) -> Self {
        let mut u = Self::zeros(grid);
        for i in 1..grid.n_rho - 1 {
            for j in 1..grid.n_x3 - 1 {
                u.data[grid.idx(i, j)] = f(grid.rho(i), grid.x3(j));
            }
        }
        u
    }

    pub fn from_real(grid: &HalfPlaneGrid<T>, values: &[T]) -> Self {
        let mut u = Self::zeros(grid);
        for (d, v) in u.data.iter_mut().zip(values) {
            *d = Complex::new(*v, T::zero());
        }
        u.zero_boundary();
        u
    }

    pub fn matches(&self, grid: &HalfPlaneGrid<T>) -> bool {
        self.n_rho == grid.n_rho && self.n_x3 == grid.n_x3 && self.data.len() == grid.len()
    }

    pub fn zero_boundary(&mut self) {
        let (n1, n2) = (self.n_rho, self.n_x3);
        for i in 0..n1 {
            for j in 0..n2 {
                if i == 0 || j == 0 || i == n1 - 1 || j == n2 - 1 {
                    self.data[i * n2 + j] = Complex::new(T::zero(), T::zero());
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn modulus(&self) -> Vec<T> {
        self.data.iter().map(|z| z.norm()).collect()
    }

    pub fn max_modulus(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn scale(&mut self, s: T) {
        for z in &mut self.data {
            *z = *z * s;
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut v = self.clone();
        v.scale(s);
        v
    }

    /// `self + a * other`
    pub fn add_scaled(&self, a: T, other: &Self) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(x, y)| *x + *y * a).collect();
        Self { data, ..*self }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-T::one(), other)
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self { data: self.data.iter().map(|z| f(*z)).collect(), ..*self }
    }

    pub fn is_real(&self, tol: T) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol)
    }
}
