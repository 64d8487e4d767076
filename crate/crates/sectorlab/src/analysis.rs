//! Angular-monotonicity diagnostics: the rotating-plane sweep of the
//! reflection difference `w_alpha`, the `L_u u_theta = 0` identity check,
//! and the classification verdict for accepted solutions.
//!
//! The verdict distinguishes three shapes: angle-independent solutions,
//! solutions strictly monotone in the angle (whose derivative is then a
//! first Dirichlet eigenfunction with eigenvalue zero), and everything
//! else (expected only beyond index one, e.g. the third linear mode which
//! is monotone on each half but not globally).

use crate::eigen::{default_zero_tol, morse_index, smallest_eigenpairs, MorseReport, Spectrum};
use crate::error::{Error, Result};
use crate::grid::{theta_derivative, ScalarField};
use crate::nonlinear::{ProblemSpec, SolutionRecord};
use crate::operator::{assemble_linearized, BoundarySpace, OperatorSet};

/// Minima of the reflection differences `w_alpha = u(sigma_alpha x) - u(x)`
/// over the sub-sectors `0 < theta < alpha`, for a sweep of grid-aligned
/// angles.
#[derive(Debug, Clone)]
pub struct RotatingPlaneReport {
    /// Sampled reflection angles, strictly increasing, grid-aligned.
    pub alphas: Vec<f64>,
    /// Per-angle minimum of `w_alpha` over the interior of the sub-sector.
    pub min_w: Vec<f64>,
    /// Per-angle minimum of `w_alpha` on the `theta = 0` edge.
    pub boundary_min: Vec<f64>,
}

/// Sweeps grid-aligned reflection angles and records the minima of
/// `w_alpha`.  Reflections that leave `[0, beta]` use the even extension
/// across `Gamma_beta`, so all evaluations stay exact nodal lookups (sign
/// decisions never ride on interpolation error).
pub fn rotating_plane(u: &ScalarField, n_alpha: usize) -> Result<RotatingPlaneReport> {
    if n_alpha < 3 {
        return Err(Error::invalid("need at least 3 sweep angles"));
    }
    let grid = *u.grid();
    let nt = grid.n_theta();
    if nt < 4 {
        return Err(Error::invalid("grid too coarse for a rotating-plane sweep"));
    }
    let arc_rows: Vec<usize> = grid.dirichlet_rows();
    let is_arc = |i: usize| arc_rows.contains(&i);

    // u extended evenly across Gamma_beta, by column index
    let u_ext = |i: usize, j: isize| -> f64 {
        let last = (nt - 1) as isize;
        let jj = if j <= last { j } else { 2 * last - j };
        u.at(i, jj as usize)
    };

    // distinct grid-aligned alphas spread over the open interval
    let mut cols: Vec<usize> = (1..=n_alpha)
        .map(|a| {
            let t = a as f64 / (n_alpha as f64 + 1.0);
            ((t * (nt - 1) as f64).round() as usize).clamp(1, nt - 2)
        })
        .collect();
    cols.dedup();

    let mut alphas = Vec::with_capacity(cols.len());
    let mut min_w = Vec::with_capacity(cols.len());
    let mut boundary_min = Vec::with_capacity(cols.len());
    for &ja in &cols {
        let mut interior = f64::INFINITY;
        let mut edge = f64::INFINITY;
        for i in 0..grid.n_r() {
            if is_arc(i) {
                continue;
            }
            for j in 0..ja {
                let w = u_ext(i, 2 * ja as isize - j as isize) - u.at(i, j);
                if j == 0 {
                    edge = edge.min(w);
                } else {
                    interior = interior.min(w);
                }
            }
        }
        alphas.push(grid.theta(ja));
        min_w.push(interior);
        boundary_min.push(edge);
    }
    Ok(RotatingPlaneReport {
        alphas,
        min_w,
        boundary_min,
    })
}

/// Residual of the identity `L_u u_theta = 0` on the Dirichlet free set:
/// assembles `L` at `u`, applies it to the angular derivative, and returns
/// the `M^{-1}` norm (expected `O(h^2)` times the derivative size).
pub fn verify_utheta_equation(u: &ScalarField, ops: &OperatorSet) -> Result<f64> {
    if ops.lap.space != BoundarySpace::HZero {
        return Err(Error::invalid(
            "the derivative identity lives in the Dirichlet space",
        ));
    }
    if u.grid() != ops.grid() {
        return Err(Error::invalid("field lives on a different grid"));
    }
    let ut = theta_derivative(u);
    let x = ops.lap.map.restrict(&ut);
    let k = ops.k_matrix();
    let r = k.matvec_alloc(&x);
    Ok(r.iter()
        .zip(&ops.lap.mass)
        .map(|(v, m)| v * v / m)
        .sum::<f64>()
        .sqrt())
}

/// Shape verdict for an accepted solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ThetaConstant,
    StrictlyMonotone,
    Inconsistent,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::ThetaConstant => "theta-constant",
            Verdict::StrictlyMonotone => "strictly-monotone",
            Verdict::Inconsistent => "inconsistent",
        };
        write!(f, "{s}")
    }
}

/// Evidence bundle behind a verdict.
#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    pub utheta_min: f64,
    pub utheta_max: f64,
    /// Low-lying spectrum of `L_u` in the arc-Dirichlet space.
    pub lambda1_gamma: f64,
    pub lambda2_gamma: f64,
    /// Bottom of the full-Dirichlet spectrum.
    pub lambda1_dirichlet: f64,
    /// Squared M-inner product of normalized `u_theta` with the first
    /// Dirichlet eigenvector (1 means `u_theta` is that eigenfunction).
    pub utheta_alignment: f64,
    pub morse: MorseReport,
    /// Threshold below which `|u_theta|` counts as zero.
    pub const_tol: f64,
    pub zero_tol: f64,
    /// Expected implications when the verdict is `Inconsistent`.
    pub notes: Vec<String>,
}

/// Tolerance ladder for the verdicts.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Multiplier on `h^2 * scale` for the theta-constant test.
    pub c_const: f64,
    /// Required alignment of `u_theta` with the first Dirichlet mode.
    pub alignment_threshold: f64,
    /// Relative residual tolerance handed to the eigensolver.
    pub eigen_tol: f64,
    /// Override for the near-zero eigenvalue tolerance (default: the
    /// spectral module's discretization-scaled value).
    pub zero_tol: Option<f64>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            c_const: 10.0,
            alignment_threshold: 0.99,
            eigen_tol: 1e-8,
            zero_tol: None,
        }
    }
}

/// Applies the shape trichotomy to an accepted solution.
///
/// `ThetaConstant` when `|u_theta|` stays below the discretization floor;
/// `StrictlyMonotone` when `u_theta` is one-signed beyond that floor, the
/// first Dirichlet eigenvalue vanishes within `zero_tol`, and `u_theta`
/// aligns with the corresponding eigenfunction; `Inconsistent` otherwise,
/// with the expected spectral implications listed in `notes`.
pub fn classify(
    sol: &SolutionRecord,
    problem: &ProblemSpec,
    opts: &ClassifyOptions,
) -> Result<ClassificationReport> {
    let grid = problem.grid;
    if sol.field.grid() != &grid {
        return Err(Error::invalid("solution lives on a different grid"));
    }
    let nl = problem.nonlinearity;
    let ops_gamma = assemble_linearized(
        &grid,
        &sol.field,
        |r, u| nl.fprime(r, u),
        BoundarySpace::HGamma,
    )?;
    let ops_zero = assemble_linearized(
        &grid,
        &sol.field,
        |r, u| nl.fprime(r, u),
        BoundarySpace::HZero,
    )?;
    let spec_gamma = smallest_eigenpairs(&ops_gamma, 3, opts.eigen_tol)?;
    let spec_zero = smallest_eigenpairs(&ops_zero, 1, opts.eigen_tol)?;

    let zero_tol = opts
        .zero_tol
        .unwrap_or_else(|| default_zero_tol(&grid, ops_gamma.v_max()));
    let morse = morse_index(&spec_gamma, zero_tol);

    let ut = theta_derivative(&sol.field);
    let (mut ut_min, mut ut_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in ut.values() {
        ut_min = ut_min.min(v);
        ut_max = ut_max.max(v);
    }
    let scale = sol.field.max_abs().max(1.0);
    let h = grid.h_max();
    let const_tol = opts.c_const * h * h * scale;

    let alignment = alignment_with_first_dirichlet(&ut, &spec_zero, &ops_zero);

    let lambda1_dirichlet = spec_zero.eigenvalues[0];
    let theta_constant = ut_min.abs().max(ut_max.abs()) <= const_tol;
    let one_signed = ut_min >= -const_tol || ut_max <= const_tol;

    let mut notes = Vec::new();
    let verdict = if theta_constant {
        Verdict::ThetaConstant
    } else if one_signed
        && lambda1_dirichlet.abs() <= zero_tol
        && alignment >= opts.alignment_threshold
    {
        Verdict::StrictlyMonotone
    } else {
        if morse.index <= 1 {
            notes.push(
                "index <= 1 but the shape alternative failed; expected index >= 2 here".to_string(),
            );
        } else {
            notes.push(format!(
                "Morse index {} >= 2: the shape trichotomy does not apply",
                morse.index
            ));
        }
        if !one_signed {
            notes.push("u_theta changes sign beyond the discretization floor".to_string());
        }
        if lambda1_dirichlet.abs() > zero_tol {
            notes.push(format!(
                "lambda_1(H^1_0) = {lambda1_dirichlet:.6} not within zero_tol of 0"
            ));
        }
        Verdict::Inconsistent
    };

    Ok(ClassificationReport {
        verdict,
        utheta_min: ut_min,
        utheta_max: ut_max,
        lambda1_gamma: spec_gamma.eigenvalues[0],
        lambda2_gamma: spec_gamma.eigenvalues[1],
        lambda1_dirichlet,
        utheta_alignment: alignment,
        morse,
        const_tol,
        zero_tol,
        notes,
    })
}

fn alignment_with_first_dirichlet(
    ut: &ScalarField,
    spec_zero: &Spectrum,
    ops_zero: &OperatorSet,
) -> f64 {
    let x = ops_zero.lap.map.restrict(ut);
    let phi = ops_zero.lap.map.restrict(&spec_zero.eigenvectors[0]);
    let mass = &ops_zero.lap.mass;
    let mut xx = 0.0;
    let mut pp = 0.0;
    let mut xp = 0.0;
    for f in 0..x.len() {
        xx += mass[f] * x[f] * x[f];
        pp += mass[f] * phi[f] * phi[f];
        xp += mass[f] * x[f] * phi[f];
    }
    if xx <= 0.0 || pp <= 0.0 {
        return 0.0;
    }
    (xp * xp) / (xx * pp)
}
