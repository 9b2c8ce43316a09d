//! Run configuration: JSON descriptors, cross-validation and context construction.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::potentials::{
    ConcentrationDomain, CylMagneticPotential, PenalizationParams, ScalarPotential, ScalarShape, Table2D,
};
use crate::reduced::{HalfPlaneGrid, ReducedContext};
use crate::solver::SolveConfig;
use crate::vortex::VortexConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family", deny_unknown_fields)]
pub enum MagneticSpec {
    ConstantField { b: f64 },
    TangentialPower { amplitude: f64, exponent: f64 },
    /// CSV paths, relative to the config file.
    CustomTabulated { phi: PathBuf, c: PathBuf, a3: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum ScalarShapeSpec {
    Constant { value: f64 },
    CylindricalHardy { coefficient: f64, alpha: f64 },
    RadialPower { coefficient: f64, alpha: f64 },
    CompactBump { amplitude: f64, rho0: f64, x30: f64, radius: f64 },
    ZeroMinimumWell { rho_v: f64, curvature: f64 },
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarSpec {
    #[serde(flatten)]
    pub shape: ScalarShapeSpec,
    #[serde(default)]
    pub alpha_inf: Option<f64>,
    #[serde(default)]
    pub alpha_zero: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub x3_half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rho_min: f64,
    pub rho_max: f64,
    pub x3_min: f64,
    pub x3_max: f64,
    pub n_rho: usize,
    pub n_x3: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { rho_min: 0.1, rho_max: 4.0, x3_min: -2.0, x3_max: 2.0, n_rho: 256, n_x3: 256 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenalizationSpec {
    pub mu: f64,
    pub kappa: f64,
    pub beta: f64,
}

impl Default for PenalizationSpec {
    fn default() -> Self {
        Self { mu: 0.5, kappa: 0.2, beta: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VortexSpec {
    pub k: i32,
    pub c_k: f64,
    pub theta_samples: usize,
    /// Checks the critical-frequency hypotheses before solving.
    pub critical_frequency: bool,
}

impl Default for VortexSpec {
    fn default() -> Self {
        Self { k: 1, c_k: 1.0, theta_samples: 64, critical_frequency: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitSpec {
    pub a0: f64,
    pub tol: f64,
}

impl Default for LimitSpec {
    fn default() -> Self {
        Self { a0: 1.0, tol: 1e-10 }
    }
}

fn default_eps() -> Vec<f64> {
    vec![0.4, 0.2, 0.1]
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_seed() -> u64 {
    0x5eed
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub magnetic: MagneticSpec,
    pub scalar: ScalarSpec,
    pub domain: DomainSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub penalization: PenalizationSpec,
    pub p: f64,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub vortex: VortexSpec,
    #[serde(default)]
    pub limit: LimitSpec,
    /// Directory against which relative table paths resolve; set on load.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Model objects built from a validated configuration.
#[derive(Debug, Clone)]
pub struct Model {
    pub magnetic: CylMagneticPotential<f64>,
    pub scalar: ScalarPotential<f64>,
    pub dom: ConcentrationDomain<f64>,
    pub grid: HalfPlaneGrid<f64>,
    pub pen: PenalizationParams<f64>,
    pub p: f64,
}

impl Model {
    pub fn context(&self, eps: f64) -> Result<ReducedContext<f64>> {
        ReducedContext::new(eps, self.grid, self.magnetic.clone(), self.scalar.clone(), self.pen, self.dom, self.p)
    }
}

impl RunConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text)?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    fn table(&self, path: &Path) -> Result<Table2D<f64>> {
        let full = if path.is_absolute() { path.to_path_buf() } else { self.base_dir.join(path) };
        Table2D::from_csv(&full)
    }

    /// Collects every violated hypothesis; structural errors are reported on their own.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.p > 2.0) || !self.p.is_finite() {
            bad.push(format!("exponent: p = {} must satisfy p > 2", self.p));
        }
        if self.p > 2.0 && self.p <= 4.0 {
            match self.scalar.alpha_inf {
                None => bad.push(format!(
                    "(V∞): p = {} lies in (2,4] so V must declare an exponent alpha_inf <= 2; none declared",
                    self.p
                )),
                Some(a) if a > 2.0 => bad.push(format!("(V∞): declared alpha_inf = {a} violates alpha <= 2")),
                _ => {}
            }
        }
        if let Some(a) = self.scalar.alpha_zero {
            if a < 2.0 {
                bad.push(format!("(V⁰): declared alpha_zero = {a} violates alpha >= 2"));
            }
        }
        let pen = &self.penalization;
        if !(pen.mu > 0.0 && pen.mu < 1.0) {
            bad.push(format!("penalization: mu = {} not in (0,1)", pen.mu));
        }
        if !(pen.kappa > 0.0 && pen.kappa < 0.25) {
            bad.push(format!("Hardy potential: kappa = {} not in (0, 1/4)", pen.kappa));
        }
        if !(pen.beta > 0.0) {
            bad.push(format!("Hardy potential: beta = {} not > 0", pen.beta));
        }
        let d = &self.domain;
        if !(d.rho_lo > 0.0) {
            bad.push(format!("Λ: closure must avoid the symmetry axis, rho_lo = {} <= 0", d.rho_lo));
        }
        if !(d.rho_hi > d.rho_lo && d.x3_half_width > 0.0) {
            bad.push("Λ: needs rho_lo < rho_hi and x3_half_width > 0".into());
        }
        let g = &self.grid;
        if !(g.rho_min > 0.0) {
            bad.push(format!("grid: rho_min = {} must be > 0", g.rho_min));
        }
        if bad.is_empty() {
            let mr = 0.1 * (g.rho_max - g.rho_min);
            let mz = 0.1 * (g.x3_max - g.x3_min);
            if !(d.rho_lo - g.rho_min >= mr
                && g.rho_max - d.rho_hi >= mr
                && -d.x3_half_width - g.x3_min >= mz
                && g.x3_max - d.x3_half_width >= mz)
            {
                bad.push("grid: closure of Λ must sit inside the grid with a margin of 10% of each extent".into());
            }
        }
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            bad.push("eps: list must be nonempty with positive entries".into());
        }
        if !bad.is_empty() {
            return Err(Error::Hypotheses(bad));
        }
        self.solver.validate()?;
        self.model().map(|_| ())
    }

    pub fn model(&self) -> Result<Model> {
        let magnetic = match &self.magnetic {
            MagneticSpec::ConstantField { b } => CylMagneticPotential::ConstantField { b: *b },
            MagneticSpec::TangentialPower { amplitude, exponent } => {
                CylMagneticPotential::TangentialPower { amplitude: *amplitude, exponent: *exponent }
            }
            MagneticSpec::CustomTabulated { phi, c, a3 } => {
                CylMagneticPotential::Tabulated { phi: self.table(phi)?, c: self.table(c)?, a3: self.table(a3)? }
            }
        };
        let shape = match &self.scalar.shape {
            ScalarShapeSpec::Constant { value } => ScalarShape::Constant { value: *value },
            ScalarShapeSpec::CylindricalHardy { coefficient, alpha } => {
                ScalarShape::CylindricalHardy { coefficient: *coefficient, alpha: *alpha }
            }
            ScalarShapeSpec::RadialPower { coefficient, alpha } => {
                ScalarShape::RadialPower { coefficient: *coefficient, alpha: *alpha }
            }
            ScalarShapeSpec::CompactBump { amplitude, rho0, x30, radius } => {
                ScalarShape::CompactBump { amplitude: *amplitude, rho0: *rho0, x30: *x30, radius: *radius }
            }
            ScalarShapeSpec::ZeroMinimumWell { rho_v, curvature } => {
                ScalarShape::ZeroMinimumWell { rho_v: *rho_v, curvature: *curvature }
            }
            ScalarShapeSpec::Tabulated { path } => ScalarShape::Tabulated { table: self.table(path)? },
        };
        let scalar = ScalarPotential::new(shape, self.scalar.alpha_inf, self.scalar.alpha_zero)?;
        let d = &self.domain;
        let dom = ConcentrationDomain::new(d.rho_lo, d.rho_hi, d.x3_half_width)?;
        let g = &self.grid;
        let grid = HalfPlaneGrid::new(g.rho_min, g.rho_max, g.x3_min, g.x3_max, g.n_rho, g.n_x3)?;
        grid.check_margin(&dom, 0.1)?;
        let pen = PenalizationParams::new(self.penalization.mu, self.penalization.kappa, self.penalization.beta)?;
        Ok(Model { magnetic, scalar, dom, grid, pen, p: self.p })
    }

    pub fn vortex_config(&self, k: i32) -> Result<VortexConfig<f64>> {
        let m = self.model()?;
        VortexConfig::new(k, self.vortex.c_k, m.magnetic, m.scalar, m.p)
    }

    /// SHA-256 of the canonical JSON serialization, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    RunConfig::from_json(&text, &base)
}

/// The worked example: constant field `b = 1`, `V = 1/rho^2`, `p = 4`, Λ = (0.5, 2) x (-0.5, 0.5).
pub fn example_config() -> RunConfig {
    RunConfig {
        magnetic: MagneticSpec::ConstantField { b: 1.0 },
        scalar: ScalarSpec {
            shape: ScalarShapeSpec::CylindricalHardy { coefficient: 1.0, alpha: 2.0 },
            alpha_inf: Some(2.0),
            alpha_zero: None,
        },
        domain: DomainSpec { rho_lo: 0.5, rho_hi: 2.0, x3_half_width: 0.5 },
        grid: GridSpec::default(),
        penalization: PenalizationSpec::default(),
        p: 4.0,
        eps: default_eps(),
        solver: SolveConfig::default(),
        output_dir: default_out(),
        seed: default_seed(),
        vortex: VortexSpec::default(),
        limit: LimitSpec::default(),
        base_dir: PathBuf::new(),
    }
}
