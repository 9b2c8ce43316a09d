//! Cylindrically symmetric potentials, the concentration domain and geometry helpers.

mod tabulated;

pub use tabulated::Table2D;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numerics::{rect_min, scan_golden};
use crate::real::{lit, to_f64, Real};

pub type Point3<T> = [T; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MagneticFamily {
    ConstantField,
    TangentialPower,
    CustomTabulated,
}

/// Equivariant vector potential `phi e_n + c e_tau + a3 e_3`.
#[derive(Debug, Clone)]
pub enum CylMagneticPotential<T> {
    /// Uniform field `b e_3`: `c = b rho / 2`.
    ConstantField { b: T },
    /// `c = amplitude * rho^exponent`, no normal or axial part.
    TangentialPower { amplitude: T, exponent: T },
    /// `phi` and `c` are read at `|x3|`. If the `a3` table only covers `x3 >= 0`
    /// it is extended oddly, otherwise it is used as given.
    Tabulated { phi: Table2D<T>, c: Table2D<T>, a3: Table2D<T> },
}

impl<T: Real> CylMagneticPotential<T> {
    pub fn family(&self) -> MagneticFamily {
        match self {
            Self::ConstantField { .. } => MagneticFamily::ConstantField,
            Self::TangentialPower { .. } => MagneticFamily::TangentialPower,
            Self::Tabulated { .. } => MagneticFamily::CustomTabulated,
        }
    }

    pub fn params(&self) -> Vec<T> {
        match self {
            Self::ConstantField { b } => vec![*b],
            Self::TangentialPower { amplitude, exponent } => vec![*amplitude, *exponent],
            Self::Tabulated { .. } => Vec::new(),
        }
    }

    pub fn phi(&self, rho: T, x3: T) -> T {
        match self {
            Self::Tabulated { phi, .. } => phi.eval(rho, x3.abs()),
            _ => T::zero(),
        }
    }

    pub fn c(&self, rho: T, x3: T) -> T {
        match self {
            Self::ConstantField { b } => *b * rho * lit(0.5),
            Self::TangentialPower { amplitude, exponent } => *amplitude * rho.powf(*exponent),
            Self::Tabulated { c, .. } => c.eval(rho, x3.abs()),
        }
    }

    pub fn a3(&self, rho: T, x3: T) -> T {
        match self {
            Self::Tabulated { a3, .. } => {
                if a3.x3_axis()[0] >= T::zero() {
                    if x3 == T::zero() {
                        T::zero()
                    } else {
                        x3.signum() * a3.eval(rho, x3.abs())
                    }
                } else {
                    a3.eval(rho, x3)
                }
            }
            _ => T::zero(),
        }
    }

    /// Whether `c` depends on `rho` only.
    pub fn c_is_x3_independent(&self) -> bool {
        match self {
            Self::Tabulated { c, .. } => c.is_x3_independent(),
            _ => true,
        }
    }

    pub fn has_normal_or_axial_part(&self) -> bool {
        matches!(self, Self::Tabulated { .. })
    }

    pub fn eval_a(&self, x: Point3<T>) -> Result<Point3<T>> {
        let rho = x[0].hypot(x[1]);
        if rho <= T::zero() {
            return domain("vector potential evaluated on the symmetry axis");
        }
        let (cos, sin) = (x[0] / rho, x[1] / rho);
        let (phi, c, a3) = (self.phi(rho, x[2]), self.c(rho, x[2]), self.a3(rho, x[2]));
        Ok([phi * cos - c * sin, phi * sin + c * cos, a3])
    }
}

/// Free-function form of [`CylMagneticPotential::eval_a`].
#[allow(non_snake_case)]
pub fn eval_A<T: Real>(pot: &CylMagneticPotential<T>, x: Point3<T>) -> Result<Point3<T>> {
    pot.eval_a(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarFamily {
    Constant,
    CylindricalHardy,
    RadialPower,
    CompactBump,
    ZeroMinimumWell,
    Tabulated,
}

#[derive(Debug, Clone)]
pub enum ScalarShape<T> {
    Constant { value: T },
    /// `coefficient / rho^alpha`
    CylindricalHardy { coefficient: T, alpha: T },
    /// `coefficient / |x|^alpha`
    RadialPower { coefficient: T, alpha: T },
    /// Smooth bump of the given radius centred on the circles `(rho0, ±x30)`.
    CompactBump { amplitude: T, rho0: T, x30: T, radius: T },
    /// `curvature * ((rho - rho_v)^2 + x3^2)`, vanishing on one circle.
    ZeroMinimumWell { rho_v: T, curvature: T },
    /// Read at `(rho, |x3|)`.
    Tabulated { table: Table2D<T> },
}

/// Nonnegative potential depending on `rho` and `|x3|`, with optional decay tags.
#[derive(Debug, Clone)]
pub struct ScalarPotential<T> {
    pub shape: ScalarShape<T>,
    /// Exponent `alpha <= 2` with `liminf V |x|^alpha > 0` at infinity, if declared.
    pub alpha_inf: Option<T>,
    /// Exponent `alpha >= 2` with `liminf V |x|^alpha > 0` at the origin, if declared.
    pub alpha_zero: Option<T>,
}

impl<T: Real> ScalarPotential<T> {
    pub fn new(shape: ScalarShape<T>, alpha_inf: Option<T>, alpha_zero: Option<T>) -> Result<Self> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        match &shape {
            ScalarShape::Constant { value } if *value < T::zero() => return bad("constant potential must be >= 0"),
            ScalarShape::CylindricalHardy { coefficient, .. } | ScalarShape::RadialPower { coefficient, .. }
                if *coefficient < T::zero() =>
            {
                return bad("power potential coefficient must be >= 0")
            }
            ScalarShape::CompactBump { amplitude, radius, .. } if *amplitude < T::zero() || *radius <= T::zero() => {
                return bad("bump needs amplitude >= 0 and radius > 0")
            }
            ScalarShape::ZeroMinimumWell { curvature, .. } if *curvature < T::zero() => {
                return bad("well curvature must be >= 0")
            }
            ScalarShape::Tabulated { table } if table.values().iter().any(|v| *v < T::zero()) => {
                return bad("tabulated potential has negative values")
            }
            _ => {}
        }
        Ok(Self { shape, alpha_inf, alpha_zero })
    }

    pub fn untagged(shape: ScalarShape<T>) -> Result<Self> {
        Self::new(shape, None, None)
    }

    pub fn family(&self) -> ScalarFamily {
        match self.shape {
            ScalarShape::Constant { .. } => ScalarFamily::Constant,
            ScalarShape::CylindricalHardy { .. } => ScalarFamily::CylindricalHardy,
            ScalarShape::RadialPower { .. } => ScalarFamily::RadialPower,
            ScalarShape::CompactBump { .. } => ScalarFamily::CompactBump,
            ScalarShape::ZeroMinimumWell { .. } => ScalarFamily::ZeroMinimumWell,
            ScalarShape::Tabulated { .. } => ScalarFamily::Tabulated,
        }
    }

    pub fn params(&self) -> Vec<T> {
        match &self.shape {
            ScalarShape::Constant { value } => vec![*value],
            ScalarShape::CylindricalHardy { coefficient, alpha } | ScalarShape::RadialPower { coefficient, alpha } => {
                vec![*coefficient, *alpha]
            }
            ScalarShape::CompactBump { amplitude, rho0, x30, radius } => vec![*amplitude, *rho0, *x30, *radius],
            ScalarShape::ZeroMinimumWell { rho_v, curvature } => vec![*rho_v, *curvature],
            ScalarShape::Tabulated { .. } => Vec::new(),
        }
    }

    /// Declared (V∞) tag with `alpha <= 2`.
    pub fn satisfies_v_inf(&self) -> bool {
        self.alpha_inf.is_some_and(|a| a <= lit(2.0))
    }

    /// Declared (V⁰) tag with `alpha >= 2`.
    pub fn satisfies_v_zero(&self) -> bool {
        self.alpha_zero.is_some_and(|a| a >= lit(2.0))
    }

    pub fn eval(&self, rho: T, x3: T) -> Result<T> {
        if rho < T::zero() || !rho.is_finite() || !x3.is_finite() {
            return domain(format!("potential evaluated at rho = {rho}, x3 = {x3}"));
        }
        let z = x3.abs();
        let v = match &self.shape {
            ScalarShape::Constant { value } => *value,
            ScalarShape::CylindricalHardy { coefficient, alpha } => {
                if rho == T::zero() {
                    return domain("cylindrical Hardy potential evaluated on the axis");
                }
                *coefficient / rho.powf(*alpha)
            }
            ScalarShape::RadialPower { coefficient, alpha } => {
                let r = rho.hypot(z);
                if r == T::zero() {
                    return domain("radial power potential evaluated at the origin");
                }
                *coefficient / r.powf(*alpha)
            }
            ScalarShape::CompactBump { amplitude, rho0, x30, radius } => {
                let t = (rho - *rho0).hypot(z - *x30) / *radius;
                if t < T::one() {
                    *amplitude * (T::one() - T::one() / (T::one() - t * t)).exp()
                } else {
                    T::zero()
                }
            }
            ScalarShape::ZeroMinimumWell { rho_v, curvature } => *curvature * ((rho - *rho_v).powi(2) + z * z),
            ScalarShape::Tabulated { table } => table.eval(rho, z),
        };
        Ok(v)
    }
}

/// The solid torus `rho_lo < rho < rho_hi`, `|x3| < x3_half_width` in reduced coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationDomain<T> {
    pub rho_lo: T,
    pub rho_hi: T,
    pub x3_half_width: T,
}

impl<T: Real> ConcentrationDomain<T> {
    pub fn new(rho_lo: T, rho_hi: T, x3_half_width: T) -> Result<Self> {
        if !(rho_lo > T::zero()) {
            return Err(Error::Config("concentration domain must avoid the axis (rho_lo > 0)".into()));
        }
        if !(rho_hi > rho_lo) || !(x3_half_width > T::zero()) {
            return Err(Error::Config("concentration domain needs rho_lo < rho_hi and h > 0".into()));
        }
        Ok(Self { rho_lo, rho_hi, x3_half_width })
    }

    pub fn contains(&self, rho: T, x3: T) -> bool {
        rho > self.rho_lo && rho < self.rho_hi && x3.abs() < self.x3_half_width
    }

    pub fn contains_closed(&self, rho: T, x3: T) -> bool {
        rho >= self.rho_lo && rho <= self.rho_hi && x3.abs() <= self.x3_half_width
    }

    /// Distance in the half-plane to the boundary (zero outside).
    pub fn distance_to_boundary(&self, rho: T, x3: T) -> T {
        if !self.contains_closed(rho, x3) {
            return T::zero();
        }
        (rho - self.rho_lo).min(self.rho_hi - rho).min(self.x3_half_width - x3.abs())
    }
}

/// Penalization constants: `mu` in (0,1), `kappa` in (0, 1/4), `beta > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenalizationParams<T> {
    pub mu: T,
    pub kappa: T,
    pub beta: T,
}

impl<T: Real> PenalizationParams<T> {
    pub fn new(mu: T, kappa: T, beta: T) -> Result<Self> {
        let mut bad = Vec::new();
        if !(mu > T::zero() && mu < T::one()) {
            bad.push(format!("mu = {mu} not in (0,1)"));
        }
        if !(kappa > T::zero() && kappa < lit(0.25)) {
            bad.push(format!("kappa = {kappa} not in (0, 1/4)"));
        }
        if !(beta > T::zero()) {
            bad.push(format!("beta = {beta} not > 0"));
        }
        if bad.is_empty() {
            Ok(Self { mu, kappa, beta })
        } else {
            Err(Error::Hypotheses(bad))
        }
    }
}

impl<T: Real> Default for PenalizationParams<T> {
    fn default() -> Self {
        Self { mu: lit(0.5), kappa: lit(0.2), beta: T::one() }
    }
}

/// `H` as a function of `r = |x|`.
pub fn aux_hardy_h_radial<T: Real>(params: &PenalizationParams<T>, r: T) -> Result<T> {
    if !(r > T::zero()) {
        return domain("auxiliary Hardy potential evaluated at the origin");
    }
    let l = r.ln();
    let e = (T::one() + params.beta) * lit(0.5);
    Ok(params.kappa / (r * r * (l * l + T::one()).powf(e)))
}

/// `H(x) = kappa / (|x|^2 ((log|x|)^2 + 1)^((1+beta)/2))`.
#[allow(non_snake_case)]
pub fn aux_hardy_H<T: Real>(params: &PenalizationParams<T>, x: Point3<T>) -> Result<T> {
    aux_hardy_h_radial(params, norm3(x))
}

pub fn norm3<T: Real>(x: Point3<T>) -> T {
    x[0].hypot(x[1]).hypot(x[2])
}

/// Distance between the circles through `y` and `z`.
pub fn d_cyl<T: Real>(y: Point3<T>, z: Point3<T>) -> T {
    let (ry, rz) = (y[0].hypot(y[1]), z[0].hypot(z[1]));
    (ry - rz).hypot(y[2] - z[2])
}

/// [`d_cyl`] in reduced coordinates.
pub fn d_cyl_reduced<T: Real>(rho_y: T, x3_y: T, rho_z: T, x3_z: T) -> T {
    (rho_y - rho_z).hypot(x3_y - x3_z)
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivarianceReport {
    pub samples: usize,
    pub seed: u64,
    pub max_violation: f64,
    pub worst_point: [f64; 3],
    pub tolerance: f64,
    pub passed: bool,
}

/// Samples random points and group elements (rotation by `alpha`, optional reflection
/// `x3 -> -x3`) and reports `max |g A(g^-1 x) - A(x)|`.
pub fn check_equivariance<T: Real>(
    pot: &CylMagneticPotential<T>,
    sample_count: usize,
    seed: u64,
) -> Result<EquivarianceReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0.0f64, [0.0; 3]);
    let mut scale = 0.0f64;
    for _ in 0..sample_count {
        let rho: T = lit(rng.gen_range(0.05..4.0));
        let theta: T = lit(rng.gen_range(0.0..std::f64::consts::TAU));
        let x3: T = lit(rng.gen_range(-2.0..2.0));
        let alpha: T = lit(rng.gen_range(0.0..std::f64::consts::TAU));
        let s = if rng.gen_bool(0.5) { T::one() } else { -T::one() };
        let x = [rho * theta.cos(), rho * theta.sin(), x3];
        let (ca, sa) = (alpha.cos(), alpha.sin());
        // g^-1 x: rotate by -alpha, reflect x3.
        let gx = [ca * x[0] + sa * x[1], -sa * x[0] + ca * x[1], s * x[2]];
        let a = pot.eval_a(gx)?;
        let ga = [ca * a[0] - sa * a[1], sa * a[0] + ca * a[1], s * a[2]];
        let ax = pot.eval_a(x)?;
        let v = to_f64((ga[0] - ax[0]).hypot(ga[1] - ax[1]).hypot(ga[2] - ax[2]));
        scale = scale.max(to_f64(norm3(ax)));
        if v > worst.0 || v.is_nan() {
            worst = (v, [to_f64(x[0]), to_f64(x[1]), to_f64(x[2])]);
        }
    }
    let tolerance = 64.0 * to_f64(T::eps_machine()) * scale.max(1.0);
    Ok(EquivarianceReport {
        samples: sample_count,
        seed,
        max_violation: worst.0,
        worst_point: worst.1,
        tolerance,
        passed: worst.0 <= tolerance,
    })
}

/// A concentration function evaluable at reduced coordinates.
pub trait ConcentrationFunction<T> {
    fn eval_m(&self, rho: T, x3: T) -> Result<T>;
}

impl<T, F: Fn(T, T) -> Result<T>> ConcentrationFunction<T> for F {
    fn eval_m(&self, rho: T, x3: T) -> Result<T> {
        self(rho, x3)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct InfimumSampling {
    pub edge_points: usize,
    pub face_points: usize,
    pub tol: f64,
}

impl Default for InfimumSampling {
    fn default() -> Self {
        Self { edge_points: 2048, face_points: 512, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaReport {
    /// inf of M on the open segment `Λ ∩ {x3 = 0}` and where it is attained.
    pub inf_plane: f64,
    pub argmin_plane_rho: f64,
    /// inf of M on `∂Λ ∩ {x3 = 0}` (the two segment endpoints).
    pub inf_plane_boundary: f64,
    /// inf of M over the closure of Λ.
    pub inf_domain: f64,
    pub inf_v: f64,
    pub interior_below_boundary: bool,
    pub plane_below_twice_domain: bool,
    pub v_positive: bool,
    pub relative_tolerance: f64,
}

impl LambdaReport {
    pub fn all_hold(&self) -> bool {
        self.interior_below_boundary && self.plane_below_twice_domain && self.v_positive
    }
}

/// Checks the three conditions on Λ: the plane infimum is strictly below its boundary
/// value and below twice the infimum over Λ, and `inf V > 0` on the closure.
pub fn check_lambda_conditions<T: Real>(
    dom: &ConcentrationDomain<T>,
    mfun: &impl ConcentrationFunction<T>,
    v: &ScalarPotential<T>,
    sampling: InfimumSampling,
) -> Result<LambdaReport> {
    let tol: T = lit(sampling.tol);
    let (rho_star, inf_plane) =
        scan_golden(|r| mfun.eval_m(r, T::zero()), dom.rho_lo, dom.rho_hi, sampling.edge_points, tol)?;
    let inf_bdry = mfun.eval_m(dom.rho_lo, T::zero())?.min(mfun.eval_m(dom.rho_hi, T::zero())?);
    let h = dom.x3_half_width;
    let (_, _, inf_dom) =
        rect_min(|r, z| mfun.eval_m(r, z), (dom.rho_lo, dom.rho_hi), (-h, h), sampling.face_points, tol)?;
    let (_, _, inf_v) = rect_min(|r, z| v.eval(r, z), (dom.rho_lo, dom.rho_hi), (-h, h), sampling.face_points, tol)?;
    let rel = 1e-9;
    let (ip, ib, id) = (to_f64(inf_plane), to_f64(inf_bdry), to_f64(inf_dom.min(inf_plane)));
    Ok(LambdaReport {
        inf_plane: ip,
        argmin_plane_rho: to_f64(rho_star),
        inf_plane_boundary: ib,
        inf_domain: id,
        inf_v: to_f64(inf_v),
        interior_below_boundary: ip < ib - rel * ib.abs(),
        plane_below_twice_domain: ip < 2.0 * id,
        v_positive: to_f64(inf_v) > 0.0,
        relative_tolerance: rel,
    })
}
