//! Subcommand dispatch and report emission.

mod config;
pub mod svg;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

pub use config::{
    example_config, load_config, DomainSpec, GridSpec, LimitSpec, MagneticSpec, Model, PenalizationSpec,
    RunConfig, ScalarShapeSpec, ScalarSpec, VortexSpec,
};

use crate::asymptotics::{solve_guarded, sweep, SweepOptions};
use crate::error::{Error, Result};
use crate::limit2d::{
    concentration_M, minimize_M, solve_limit_ground_state, ConcentrationFunctionHandle, MinimizeOptions,
    Normalization,
};
use crate::potentials::{check_lambda_conditions, InfimumSampling};
use crate::reduced::io::{write_field, write_modulus_csv};
use crate::reduced::{ComplexField, HalfPlaneGrid};
use crate::solver::{init_guess, SolveFailure, SolveResult};
use crate::verify::{run_invariant_suite, SuiteOptions};
use crate::vortex::{reconstruct_uk, solve_vortex};

pub const TOOL: &str = "magnls";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Limit,
    Map,
    Solve,
    Sweep,
    Vortex,
    Verify,
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "limit" => Self::Limit,
            "map" => Self::Map,
            "solve" => Self::Solve,
            "sweep" => Self::Sweep,
            "vortex" => Self::Vortex,
            "verify" => Self::Verify,
            other => return Err(Error::Config(format!("unknown subcommand '{other}'"))),
        })
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Limit => "limit",
            Self::Map => "map",
            Self::Solve => "solve",
            Self::Sweep => "sweep",
            Self::Vortex => "vortex",
            Self::Verify => "verify",
        };
        f.write_str(s)
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_INVARIANTS: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Hypotheses(_) | Error::Json(_) => EXIT_CONFIG,
        Error::NonConvergence { .. } | Error::Solver(_) | Error::RayDegenerate(_) => EXIT_NONCONVERGENCE,
        _ => EXIT_FAILURE,
    }
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    tool: &'a str,
    version: &'a str,
    config_sha256: &'a str,
    seed: u64,
    subcommand: String,
    result: &'a R,
}

/// Sole writer into one run directory.
pub struct Emitter {
    dir: PathBuf,
    hash: String,
    seed: u64,
    subcommand: Subcommand,
    written: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(dir: &Path, cfg: &RunConfig, subcommand: Subcommand) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), hash: cfg.hash(), seed: cfg.seed, subcommand, written: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    pub fn report<R: Serialize>(&mut self, name: &str, result: &R) -> Result<()> {
        let env = Envelope {
            tool: TOOL,
            version: VERSION,
            config_sha256: &self.hash,
            seed: self.seed,
            subcommand: self.subcommand.to_string(),
            result,
        };
        let mut text = serde_json::to_string_pretty(&env)?;
        text.push('\n');
        let p = self.path(name);
        fs::write(p, text)?;
        Ok(())
    }

    pub fn csv<S: Serialize>(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = S>) -> Result<()> {
        let p = self.path(name);
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(p)?;
        w.write_record(header)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(p, body)?;
        Ok(())
    }

    pub fn field(&mut self, name: &str, grid: &HalfPlaneGrid<f64>, eps: f64, p: f64, u: &ComplexField<f64>) -> Result<()> {
        let path = self.path(name);
        write_field(&path, grid, eps, p, u)
    }

    pub fn modulus_csv(&mut self, name: &str, grid: &HalfPlaneGrid<f64>, u: &ComplexField<f64>) -> Result<()> {
        let path = self.path(name);
        write_modulus_csv(&path, grid, u)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
}

fn tag(eps: f64) -> String {
    format!("eps{eps}")
}

#[derive(Serialize)]
struct LimitRecord {
    a0: f64,
    p: f64,
    energy: f64,
    mass: f64,
    peak: f64,
    r_match: f64,
}

#[derive(Serialize)]
struct MapRecord {
    rho_star: f64,
    x3_star: f64,
    m_min: f64,
    inf_closure: f64,
    competing_minima: usize,
    near_degenerate: bool,
    e01: f64,
    lambda_conditions: crate::potentials::LambdaReport,
}

#[derive(Serialize)]
struct SolveRecord<'a> {
    eps: f64,
    #[serde(flatten)]
    result: &'a SolveResult<f64>,
}

#[derive(Serialize)]
struct VortexRecord<'a> {
    k: i32,
    c_k: f64,
    eps: f64,
    #[serde(flatten)]
    result: &'a SolveResult<f64>,
    reconstruction_max_difference: f64,
    reconstruction_max_reduced_residual: f64,
    reconstruction_modulus_error: f64,
    theta_samples: usize,
}

/// Runs one subcommand; invariant failures are reported through the exit code.
pub fn dispatch(sub: Subcommand, cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.model()?;
    let mut out = Emitter::new(&cfg.output_dir, cfg, sub)?;
    let mut code = EXIT_OK;
    match sub {
        Subcommand::Limit => {
            let gs = solve_limit_ground_state(cfg.limit.a0, cfg.p, cfg.limit.tol)?;
            out.csv("limit_profile.csv", &["r", "w"], gs.r.iter().zip(&gs.w).map(|(r, w)| (*r, *w)))?;
            let rec = LimitRecord {
                a0: gs.a0,
                p: gs.p,
                energy: gs.energy,
                mass: gs.mass,
                peak: gs.peak(),
                r_match: gs.r_match,
            };
            out.report("limit.json", &rec)?;
        }
        Subcommand::Map => {
            let h = ConcentrationFunctionHandle::new(model.magnetic.clone(), model.scalar.clone(), cfg.p, Normalization::With2Pi)?;
            let min = minimize_M(&h, &model.dom, MinimizeOptions::default())?;
            let lam = check_lambda_conditions(&model.dom, &h, &model.scalar, InfimumSampling::default())?;
            let g = model.grid;
            let mut rows = Vec::with_capacity(g.len());
            for i in 0..g.n_rho {
                for j in 0..g.n_x3 {
                    rows.push((g.rho(i), g.x3(j), concentration_M(&h, g.rho(i), g.x3(j))?));
                }
            }
            out.csv("m_landscape.csv", &["rho", "x3", "m"], rows)?;
            let rec = MapRecord {
                rho_star: min.rho_star,
                x3_star: min.x3_star,
                m_min: min.m_min,
                inf_closure: min.inf_closure,
                competing_minima: min.competing_minima,
                near_degenerate: min.near_degenerate,
                e01: h.e01,
                lambda_conditions: lam,
            };
            out.report("minimizer.json", &rec)?;
        }
        Subcommand::Solve => {
            let h = ConcentrationFunctionHandle::new(model.magnetic.clone(), model.scalar.clone(), cfg.p, Normalization::With2Pi)?;
            let inf_m = minimize_M(&h, &model.dom, MinimizeOptions::default())?.m_min;
            let centre = ((model.dom.rho_lo + model.dom.rho_hi) * 0.5, 0.0);
            for &eps in &cfg.eps {
                let ctx = model.context(eps)?;
                let disc = ctx.discretize()?;
                let init = init_guess(&ctx, centre)?;
                let res = solve_guarded(&ctx, &disc, &cfg.solver, &init, inf_m);
                let (res, err) = split(res);
                if let Some(r) = &res {
                    let t = tag(eps);
                    out.report(&format!("solve_{t}.json"), &SolveRecord { eps, result: r })?;
                    out.field(&format!("field_{t}.bin"), &ctx.grid, eps, cfg.p, &r.u)?;
                    out.modulus_csv(&format!("modulus_{t}.csv"), &ctx.grid, &r.u)?;
                }
                if let Some(e) = err {
                    log::error!("eps = {eps}: {e}");
                    code = code.max(exit_code(&e));
                }
            }
        }
        Subcommand::Sweep => {
            let mut eps = cfg.eps.clone();
            eps.sort_by(|a, b| b.total_cmp(a));
            eps.dedup();
            let base = model.context(eps[0])?;
            let (rep, sols) = sweep(&base, &eps, &cfg.solver, &SweepOptions::default())?;
            out.report("sweep_report.json", &rep)?;
            for (e, sol) in eps.iter().zip(&sols) {
                let Some(s) = sol else { continue };
                let g = model.grid;
                let m = s.u.modulus();
                let rows: Vec<(f64, f64)> =
                    (0..g.n_rho).map(|i| (g.rho(i), g.interpolate(&m, g.rho(i), 0.0).unwrap_or(0.0))).collect();
                let t = tag(*e);
                out.csv(&format!("slice_{t}.csv"), &["rho", "abs_u"], rows)?;
                out.text(&format!("heatmap_{t}.svg"), &svg::heatmap(&g, &m, &format!("|u| at eps = {e}"), 128))?;
            }
            if rep.records.iter().any(|r| !r.converged) {
                code = EXIT_NONCONVERGENCE;
            }
        }
        Subcommand::Vortex => {
            let vcfg = cfg.vortex_config(cfg.vortex.k)?;
            if cfg.vortex.critical_frequency && !vcfg.critical_frequency_hypotheses(&model.dom)? {
                return Err(Error::Hypotheses(vec![
                    "critical frequency: need c > 0 on the closure of Λ and inf (0.9 c^2 + V) > 0".into(),
                ]));
            }
            let h = vcfg.concentration()?;
            let centre = minimize_M(&h, &model.dom, MinimizeOptions::default())?;
            for &eps in &cfg.eps {
                let res = solve_vortex(
                    &vcfg,
                    eps,
                    model.grid,
                    &model.dom,
                    &model.pen,
                    &cfg.solver,
                    Some((centre.rho_star, 0.0)),
                    None,
                );
                let (res, err) = split(res.map(|s| s.result));
                if let Some(r) = &res {
                    let v: Vec<f64> = r.u.data.iter().map(|z| z.re / vcfg.c_k).collect();
                    let rec = reconstruct_uk(&vcfg, &model.grid, eps, &v, cfg.vortex.theta_samples)?;
                    let t = format!("k{}_{}", vcfg.k, tag(eps));
                    out.report(
                        &format!("vortex_{t}.json"),
                        &VortexRecord {
                            k: vcfg.k,
                            c_k: vcfg.c_k,
                            eps,
                            result: r,
                            reconstruction_max_difference: rec.max_difference,
                            reconstruction_max_reduced_residual: rec.max_reduced_residual,
                            reconstruction_modulus_error: rec.modulus_error,
                            theta_samples: rec.theta_samples,
                        },
                    )?;
                    let vk = ComplexField::from_real(&model.grid, &v);
                    out.field(&format!("field_{t}.bin"), &model.grid, eps, cfg.p, &vk)?;
                    out.modulus_csv(&format!("modulus_{t}.csv"), &model.grid, &vk.scaled(vcfg.c_k.abs()))?;
                    out.csv(
                        &format!("theta_residual_{t}.csv"),
                        &["theta", "max_residual", "max_difference"],
                        rec.slices.iter().map(|s| (s.theta, s.max_residual, s.max_difference)),
                    )?;
                }
                if let Some(e) = err {
                    log::error!("eps = {eps}: {e}");
                    code = code.max(exit_code(&e));
                }
            }
        }
        Subcommand::Verify => {
            let ctx = model.context(cfg.eps[0])?;
            let opts = SuiteOptions { seed: cfg.seed, ..SuiteOptions::default() };
            let rep = run_invariant_suite(&ctx, &opts)?;
            out.report("verify.json", &rep)?;
            if !rep.passed {
                code = EXIT_INVARIANTS;
            }
        }
    }
    Ok(Outcome { exit_code: code, files: out.written().to_vec() })
}

fn split(
    r: std::result::Result<SolveResult<f64>, SolveFailure<f64>>,
) -> (Option<SolveResult<f64>>, Option<Error>) {
    match r {
        Ok(s) => (Some(s), None),
        Err(SolveFailure { error, best }) => (best.map(|b| *b), Some(error)),
    }
}

/// Parses a comma-separated list of positive numbers.
pub fn parse_eps_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let v = t.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad eps entry '{t}': {e}")))?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Config(format!("eps entry {v} must be positive and finite")))
            }
        })
        .collect()
}
