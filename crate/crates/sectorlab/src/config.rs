//! Plain key=value run configuration: one `key = value` pair per line,
//! `#` comments, unknown keys rejected.  Flags on the command line
//! override file values through [`RunConfig::set`].
//!
//! Keys and defaults:
//!
//! ```text
//! domain.shape            sector        sector | rect
//! domain.r_inner          0             inner radius (0 = disc sector)
//! domain.r_outer          1             outer radius
//! domain.beta             1.5707963267948966   opening angle / rect length
//! domain.width            1             rect cross-section
//! grid.n_r                64            radial (cross) nodes
//! grid.n_theta            64            angular nodes
//! problem.kind            linear        linear | henon | lane_emden | power
//! problem.lambda          0             linear coefficient
//! problem.alpha           0             henon weight exponent
//! problem.p               3             power exponent
//! problem.weight_exponent 0             free weight exponent (kind = power)
//! problem.g               0             constant Dirichlet value on the arcs
//! solver.mode             auto          auto | newton | ground-state
//! solver.tol              1e-8          residual tolerance (M^-1 norm)
//! solver.eigen_m          4             eigenpairs per spectral solve
//! solver.eigen_tol        1e-8          relative eigen residual tolerance
//! solver.zero_tol         auto          auto | explicit threshold
//! analysis.n_alpha        16            rotating-plane sweep size
//! output.dir              out           artifact directory
//! output.svg              true          emit SVG heatmaps
//! ```

use crate::domain::{RectDomain, SectorDomain};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::nonlinear::{DirichletData, Nonlinearity, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Sector,
    Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Linear,
    Henon,
    LaneEmden,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    Auto,
    Newton,
    GroundState,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub shape: Shape,
    pub r_inner: f64,
    pub r_outer: f64,
    pub beta: f64,
    pub width: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub kind: ProblemKind,
    pub lambda: f64,
    pub alpha: f64,
    pub p: f64,
    pub weight_exponent: f64,
    pub g: f64,
    pub mode: SolverMode,
    pub tol: f64,
    pub eigen_m: usize,
    pub eigen_tol: f64,
    /// `None` selects the discretization-scaled default.
    pub zero_tol: Option<f64>,
    pub n_alpha: usize,
    pub out_dir: String,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            shape: Shape::Sector,
            r_inner: 0.0,
            r_outer: 1.0,
            beta: std::f64::consts::FRAC_PI_2,
            width: 1.0,
            n_r: 64,
            n_theta: 64,
            kind: ProblemKind::Linear,
            lambda: 0.0,
            alpha: 0.0,
            p: 3.0,
            weight_exponent: 0.0,
            g: 0.0,
            mode: SolverMode::Auto,
            tol: 1e-8,
            eigen_m: 4,
            eigen_tol: 1e-8,
            zero_tol: None,
            n_alpha: 16,
            out_dir: "out".into(),
            svg: true,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{key}: expected a number, got `{value}`")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("{key}: expected a count, got `{value}`")))
}

impl RunConfig {
    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Sets one key; unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "domain.shape" => {
                self.shape = match value {
                    "sector" => Shape::Sector,
                    "rect" => Shape::Rect,
                    _ => {
                        return Err(Error::Parse(format!(
                            "domain.shape: `{value}` is not sector|rect"
                        )))
                    }
                }
            }
            "domain.r_inner" => self.r_inner = parse_f64(key, value)?,
            "domain.r_outer" => self.r_outer = parse_f64(key, value)?,
            "domain.beta" => self.beta = parse_f64(key, value)?,
            "domain.width" => self.width = parse_f64(key, value)?,
            "grid.n_r" => self.n_r = parse_usize(key, value)?,
            "grid.n_theta" => self.n_theta = parse_usize(key, value)?,
            "problem.kind" => {
                self.kind = match value {
                    "linear" => ProblemKind::Linear,
                    "henon" => ProblemKind::Henon,
                    "lane_emden" => ProblemKind::LaneEmden,
                    "power" => ProblemKind::Power,
                    _ => {
                        return Err(Error::Parse(format!(
                            "problem.kind: `{value}` is not linear|henon|lane_emden|power"
                        )))
                    }
                }
            }
            "problem.lambda" => self.lambda = parse_f64(key, value)?,
            "problem.alpha" => self.alpha = parse_f64(key, value)?,
            "problem.p" => self.p = parse_f64(key, value)?,
            "problem.weight_exponent" => self.weight_exponent = parse_f64(key, value)?,
            "problem.g" => self.g = parse_f64(key, value)?,
            "solver.mode" => {
                self.mode = match value {
                    "auto" => SolverMode::Auto,
                    "newton" => SolverMode::Newton,
                    "ground-state" => SolverMode::GroundState,
                    _ => {
                        return Err(Error::Parse(format!(
                            "solver.mode: `{value}` is not auto|newton|ground-state"
                        )))
                    }
                }
            }
            "solver.tol" => self.tol = parse_f64(key, value)?,
            "solver.eigen_m" => self.eigen_m = parse_usize(key, value)?,
            "solver.eigen_tol" => self.eigen_tol = parse_f64(key, value)?,
            "solver.zero_tol" => {
                self.zero_tol = if value == "auto" {
                    None
                } else {
                    Some(parse_f64(key, value)?)
                }
            }
            "analysis.n_alpha" => self.n_alpha = parse_usize(key, value)?,
            "output.dir" => self.out_dir = value.to_string(),
            "output.svg" => {
                self.svg = match value {
                    "true" => true,
                    "false" => false,
                    _ => {
                        return Err(Error::Parse(format!(
                            "output.svg: `{value}` is not true|false"
                        )))
                    }
                }
            }
            _ => return Err(Error::Parse(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Canonical text form: every key in documentation order, full
    /// precision.
    pub fn canonical(&self) -> String {
        let shape = match self.shape {
            Shape::Sector => "sector",
            Shape::Rect => "rect",
        };
        let kind = match self.kind {
            ProblemKind::Linear => "linear",
            ProblemKind::Henon => "henon",
            ProblemKind::LaneEmden => "lane_emden",
            ProblemKind::Power => "power",
        };
        let mode = match self.mode {
            SolverMode::Auto => "auto",
            SolverMode::Newton => "newton",
            SolverMode::GroundState => "ground-state",
        };
        let zero_tol = match self.zero_tol {
            None => "auto".to_string(),
            Some(z) => format!("{z}"),
        };
        format!(
            "domain.shape = {shape}\n\
             domain.r_inner = {}\n\
             domain.r_outer = {}\n\
             domain.beta = {}\n\
             domain.width = {}\n\
             grid.n_r = {}\n\
             grid.n_theta = {}\n\
             problem.kind = {kind}\n\
             problem.lambda = {}\n\
             problem.alpha = {}\n\
             problem.p = {}\n\
             problem.weight_exponent = {}\n\
             problem.g = {}\n\
             solver.mode = {mode}\n\
             solver.tol = {}\n\
             solver.eigen_m = {}\n\
             solver.eigen_tol = {}\n\
             solver.zero_tol = {zero_tol}\n\
             analysis.n_alpha = {}\n\
             output.dir = {}\n\
             output.svg = {}\n",
            self.r_inner,
            self.r_outer,
            self.beta,
            self.width,
            self.n_r,
            self.n_theta,
            self.lambda,
            self.alpha,
            self.p,
            self.weight_exponent,
            self.g,
            self.tol,
            self.eigen_m,
            self.eigen_tol,
            self.n_alpha,
            self.out_dir,
            self.svg,
        )
    }

    /// Hash of the computation-relevant keys: the output block only says
    /// where artifacts land, so it stays out of the experiment identity.
    pub fn hash(&self) -> String {
        let canonical = self.canonical();
        let computation: String = canonical
            .lines()
            .filter(|l| !l.starts_with("output."))
            .fold(String::new(), |mut acc, l| {
                acc.push_str(l);
                acc.push('\n');
                acc
            });
        crate::report::sha256_hex(computation.as_bytes())
    }

    pub fn build_grid(&self) -> Result<Grid> {
        match self.shape {
            Shape::Sector => {
                let dom = SectorDomain::new(self.r_inner, self.r_outer, self.beta)?;
                Grid::sector(dom, self.n_r, self.n_theta)
            }
            Shape::Rect => {
                let dom = RectDomain::new(self.beta, self.width)?;
                Grid::rectangle(dom, self.n_r, self.n_theta)
            }
        }
    }

    pub fn build_nonlinearity(&self) -> Nonlinearity {
        match self.kind {
            ProblemKind::Linear => Nonlinearity::Linear {
                lambda: self.lambda,
            },
            ProblemKind::Henon => Nonlinearity::Henon {
                alpha: self.alpha,
                p: self.p,
            },
            ProblemKind::LaneEmden => Nonlinearity::LaneEmden { p: self.p },
            ProblemKind::Power => Nonlinearity::PowerWithWeight {
                exponent: self.weight_exponent,
                p: self.p,
            },
        }
    }

    pub fn build_problem(&self) -> Result<ProblemSpec> {
        let dirichlet = if self.g == 0.0 {
            DirichletData::Zero
        } else {
            DirichletData::Constant(self.g)
        };
        ProblemSpec::new(self.build_grid()?, self.build_nonlinearity(), dirichlet)
    }
}
