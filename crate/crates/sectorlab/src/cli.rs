//! Subcommand implementations behind the thin binary: each command wires
//! library calls into files under an output directory and registers every
//! artifact in a content-hash manifest.  Exit code 0 means every requested
//! stage met its tolerance.

use crate::analysis::{classify, rotating_plane, verify_utheta_equation, ClassifyOptions};
use crate::bessel::{bessel_zero, critical_angle, eigen_catalog};
use crate::config::{RunConfig, SolverMode};
use crate::eigen::{
    default_zero_tol, morse_index, smallest_eigenpairs, splitting_inequality_check,
};
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::nonlinear::{ground_state, newton_solve, sector_rescale, SolutionRecord};
use crate::operator::{assemble_linearized, operator_with_potential, BoundarySpace};
use crate::report::{
    alpha_sweep_csv, classification_kv, emit, kv_text, solution_kv, spectrum_csv, splitting_csv,
    Manifest,
};
use crate::svg::heatmap;
use std::path::{Path, PathBuf};

/// Loads the config file (defaults when absent) and applies `key=value`
/// overrides in order.
pub fn resolve_config(
    config: Option<&Path>,
    overrides: &[String],
    out: Option<&Path>,
) -> Result<RunConfig> {
    let mut cfg = match config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for item in overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("override `{item}` is not key=value")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(dir) = out {
        cfg.out_dir = dir.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    PathBuf::from(&cfg.out_dir)
}

/// `bessel`: tables of `j_{nu,k}` to stdout (CSV) and, when an output
/// directory is given, to `bessel.csv`.
pub fn cmd_bessel(nu: f64, k: usize, k_max: Option<usize>, out: Option<&Path>) -> Result<()> {
    let k_hi = k_max.unwrap_or(k).max(k);
    let mut csv = String::from("nu,k,zero\n");
    for kk in k..=k_hi {
        let z = bessel_zero(nu, kk)?;
        csv.push_str(&format!("{nu},{kk},{z}\n"));
    }
    print!("{csv}");
    if let Some(dir) = out {
        let mut manifest = Manifest::new();
        emit(dir, "bessel.csv", &csv, &mut manifest)?;
        manifest.write(dir)?;
    }
    Ok(())
}

/// `critical-angle`: the opening where the first zero of order `pi/beta`
/// meets `target` (default: the second zero of order zero).
pub fn cmd_critical_angle(target: Option<f64>, out: Option<&Path>) -> Result<()> {
    let target = match target {
        Some(t) => t,
        None => bessel_zero(0.0, 2)?,
    };
    let beta = critical_angle(target)?;
    let body = kv_text(&[
        ("target", format!("{target}")),
        ("beta", format!("{beta}")),
        ("s", format!("{}", std::f64::consts::PI / beta)),
    ]);
    print!("{body}");
    if let Some(dir) = out {
        let mut manifest = Manifest::new();
        emit(dir, "critical_angle.txt", &body, &mut manifest)?;
        manifest.write(dir)?;
    }
    Ok(())
}

/// `spectrum`: eigenpairs of the linearization at `u = 0`, written as CSV
/// plus eigenvector field files and a Morse report.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<()> {
    let grid = cfg.build_grid()?;
    let nl = cfg.build_nonlinearity();
    let zero = ScalarField::zeros(grid);
    let ops = assemble_linearized(&grid, &zero, |r, u| nl.fprime(r, u), BoundarySpace::HGamma)?;
    let spectrum = smallest_eigenpairs(&ops, cfg.eigen_m, cfg.eigen_tol)?;
    let zero_tol = cfg
        .zero_tol
        .unwrap_or_else(|| default_zero_tol(&grid, ops.v_max()));
    let morse = morse_index(&spectrum, zero_tol);

    let dir = out_dir(cfg);
    let mut manifest = Manifest::new();
    emit(
        &dir,
        "spectrum.csv",
        &spectrum_csv(&spectrum),
        &mut manifest,
    )?;
    for (i, vec) in spectrum.eigenvectors.iter().enumerate() {
        let rel = format!("eigvec_{i}.field");
        vec.write(&dir.join(&rel))?;
        manifest.add(&dir, &rel)?;
    }
    let mut pairs = vec![
        ("config_hash", cfg.hash()),
        ("morse_index", format!("{}", morse.index)),
        ("zero_modes", format!("{}", morse.zero_modes)),
        ("zero_tol", format!("{}", morse.zero_tol)),
    ];
    if spectrum.eigenvalues.len() >= 3 {
        let gap = (spectrum.eigenvalues[2] - spectrum.eigenvalues[1]).abs();
        if gap < 1e-2 * spectrum.eigenvalues[1].abs() {
            pairs.push((
                "near_double",
                format!(
                    "second eigenvalue nearly double (|l3 - l2| = {gap} < 1% of l2); \
                     both candidate modes reported"
                ),
            ));
        }
    }
    emit(&dir, "morse.txt", &kv_text(&pairs), &mut manifest)?;
    manifest.write(&dir)?;
    for (i, l) in spectrum.eigenvalues.iter().enumerate() {
        println!("lambda_{} = {l}", i + 1);
    }
    println!("morse_index = {}", morse.index);
    Ok(())
}

fn solve_record(cfg: &RunConfig) -> Result<SolutionRecord> {
    let problem = cfg.build_problem()?;
    let use_ground_state = match cfg.mode {
        SolverMode::Newton => false,
        SolverMode::GroundState => true,
        SolverMode::Auto => problem.nonlinearity.is_superlinear() && problem.dirichlet.is_zero(),
    };
    let mut record = if use_ground_state {
        ground_state(&problem, cfg.tol)?
    } else {
        // positive bump initial guess; the linear/inhomogeneous cases are
        // globally Newton-attracted
        let grid = problem.grid;
        let initial = ScalarField::from_fn(grid, |r, _| {
            let (lo, hi) = match grid.geometry() {
                crate::grid::GridGeometry::Polar {
                    r_inner, r_outer, ..
                } => (r_inner, r_outer),
                crate::grid::GridGeometry::Cartesian { width, .. } => (0.0, width),
            };
            (r - lo).max(0.0) * (hi - r).max(0.0)
        });
        newton_solve(&problem, &initial, cfg.tol)?
    };
    record.provenance.config_hash = cfg.hash();

    // Morse data computed post hoc at the accepted solution
    let nl = problem.nonlinearity;
    let ops = assemble_linearized(
        &problem.grid,
        &record.field,
        |r, u| nl.fprime(r, u),
        BoundarySpace::HGamma,
    )?;
    let spectrum = smallest_eigenpairs(&ops, cfg.eigen_m.max(2), cfg.eigen_tol)?;
    let zero_tol = cfg
        .zero_tol
        .unwrap_or_else(|| default_zero_tol(&problem.grid, ops.v_max()));
    record.morse = Some(morse_index(&spectrum, zero_tol));
    Ok(record)
}

/// `solve`: Newton or Nehari ground state per config; persists the field
/// plus a key=value side-car.
pub fn cmd_solve(cfg: &RunConfig) -> Result<()> {
    let record = solve_record(cfg)?;
    let dir = out_dir(cfg);
    std::fs::create_dir_all(&dir)?;
    let mut manifest = Manifest::new();
    record.field.write(&dir.join("solution.field"))?;
    manifest.add(&dir, "solution.field")?;
    emit(
        &dir,
        "solution.meta",
        &solution_kv(&record, &[]),
        &mut manifest,
    )?;
    manifest.write(&dir)?;
    println!(
        "solver = {}\nresidual_norm = {}\nenergy = {}",
        record.provenance.solver, record.residual_norm, record.energy
    );
    Ok(())
}

/// `classify`: loads a solution field, runs the shape diagnostics, and
/// emits the verdict report, the rotating-plane CSV and the heatmaps.
pub fn cmd_classify(cfg: &RunConfig, solution: &Path) -> Result<()> {
    let field = ScalarField::read(solution)?;
    let grid = *field.grid();
    let expected = cfg.build_grid()?;
    if grid != expected {
        return Err(Error::invalid(
            "solution grid does not match the configured domain/grid block",
        ));
    }
    let problem = cfg.build_problem()?;
    let record = SolutionRecord {
        field,
        residual_norm: f64::NAN,
        energy: f64::NAN,
        morse: None,
        iterations: 0,
        provenance: crate::nonlinear::Provenance {
            solver: format!("loaded({})", solution.display()),
            config_hash: cfg.hash(),
        },
    };
    let opts = ClassifyOptions {
        eigen_tol: cfg.eigen_tol,
        zero_tol: cfg.zero_tol,
        ..ClassifyOptions::default()
    };
    let report = classify(&record, &problem, &opts)?;
    let sweep = rotating_plane(&record.field, cfg.n_alpha)?;
    let nl = problem.nonlinearity;
    let ops_zero = assemble_linearized(
        &grid,
        &record.field,
        |r, u| nl.fprime(r, u),
        BoundarySpace::HZero,
    )?;
    let ut_residual = verify_utheta_equation(&record.field, &ops_zero)?;

    let dir = out_dir(cfg);
    let mut manifest = Manifest::new();
    let mut body = classification_kv(&report);
    body.push_str(&kv_text(&[(
        "utheta_equation_residual",
        format!("{ut_residual}"),
    )]));
    emit(&dir, "classification.txt", &body, &mut manifest)?;
    emit(
        &dir,
        "alpha_sweep.csv",
        &alpha_sweep_csv(&sweep),
        &mut manifest,
    )?;
    if cfg.svg {
        emit(
            &dir,
            "heatmap_u.svg",
            &heatmap(&record.field, "u"),
            &mut manifest,
        )?;
        let ut = crate::grid::theta_derivative(&record.field);
        emit(
            &dir,
            "heatmap_utheta.svg",
            &heatmap(&ut, "u_theta"),
            &mut manifest,
        )?;
    }
    manifest.write(&dir)?;
    println!("verdict = {}", report.verdict);
    Ok(())
}

/// `rescale`: maps a half-disc solution onto a sector and reports the
/// residual under the rescaled weight.
pub fn cmd_rescale(
    solution: &Path,
    beta: f64,
    p: f64,
    alpha_exp: f64,
    n_r: Option<usize>,
    n_theta: Option<usize>,
    out: &Path,
) -> Result<()> {
    let field = ScalarField::read(solution)?;
    let source = SolutionRecord {
        residual_norm: f64::NAN,
        energy: f64::NAN,
        morse: None,
        iterations: 0,
        provenance: crate::nonlinear::Provenance {
            solver: format!("loaded({})", solution.display()),
            config_hash: String::new(),
        },
        field,
    };
    let dom = crate::domain::SectorDomain::new(0.0, 1.0, beta)?;
    let grid = Grid::sector(
        dom,
        n_r.unwrap_or(source.field.grid().n_r()),
        n_theta.unwrap_or(source.field.grid().n_theta()),
    )?;
    let record = sector_rescale(&source, &grid, p, alpha_exp)?;
    std::fs::create_dir_all(out)?;
    let mut manifest = Manifest::new();
    record.field.write(&out.join("rescaled.field"))?;
    manifest.add(out, "rescaled.field")?;
    emit(
        out,
        "rescale.meta",
        &solution_kv(
            &record,
            &[
                ("beta", format!("{beta}")),
                ("p", format!("{p}")),
                ("alpha_exp", format!("{alpha_exp}")),
                (
                    "weight_exponent",
                    format!("{}", (alpha_exp + 2.0) * std::f64::consts::PI / beta - 2.0),
                ),
            ],
        ),
        &mut manifest,
    )?;
    manifest.write(out)?;
    println!("residual_norm = {}", record.residual_norm);
    Ok(())
}

/// `splitting-check`: both sides of the two-half eigenvalue inequality for
/// one or more interior line angles.
pub fn cmd_splitting_check(cfg: &RunConfig, alphas: &[f64]) -> Result<()> {
    let grid = cfg.build_grid()?;
    let nl = cfg.build_nonlinearity();
    let zero = ScalarField::zeros(grid);
    let ops = assemble_linearized(&grid, &zero, |r, u| nl.fprime(r, u), BoundarySpace::HGamma)?;
    let list: Vec<f64> = if alphas.is_empty() {
        vec![grid.beta() / 2.0]
    } else {
        alphas.to_vec()
    };
    let mut checks = Vec::new();
    let mut all_hold = true;
    for &alpha in &list {
        let check = splitting_inequality_check(&ops, alpha, cfg.eigen_tol)?;
        all_hold &= check.holds;
        println!(
            "alpha = {:.6}: lhs = {:.6}, rhs = {:.6}, holds = {}",
            check.alpha, check.lhs, check.rhs, check.holds
        );
        checks.push(check);
    }
    let dir = out_dir(cfg);
    let mut manifest = Manifest::new();
    emit(
        &dir,
        "splitting.csv",
        &splitting_csv(&checks),
        &mut manifest,
    )?;
    manifest.write(&dir)?;
    if all_hold {
        Ok(())
    } else {
        Err(Error::convergence(
            "splitting inequality failed on at least one angle",
        ))
    }
}

/// `catalog`: analytic eigenvalue table (support for the spectrum command
/// and the mode-crossing diagnostics).
pub fn cmd_catalog(beta: f64, n_max: usize, k_max: usize, out: Option<&Path>) -> Result<()> {
    let entries = eigen_catalog(beta, n_max, k_max)?;
    let mut csv = String::from("lambda,n,k\n");
    for e in &entries {
        csv.push_str(&format!("{},{},{}\n", e.lambda, e.n, e.k));
    }
    print!("{csv}");
    if let Some(dir) = out {
        let mut manifest = Manifest::new();
        emit(dir, "catalog.csv", &csv, &mut manifest)?;
        manifest.write(dir)?;
    }
    Ok(())
}

/// Exposes the solution pipeline for reuse (benchmarks, tests, examples).
pub fn run_solve_pipeline(cfg: &RunConfig) -> Result<SolutionRecord> {
    solve_record(cfg)
}

/// Verifies that an operator's quadratic form agrees with its spectrum;
/// shared by the `spectrum` command's self-check and the test suite.
pub fn rayleigh_self_check(cfg: &RunConfig) -> Result<f64> {
    let grid = cfg.build_grid()?;
    let nl = cfg.build_nonlinearity();
    let zero = ScalarField::zeros(grid);
    let ops = assemble_linearized(&grid, &zero, |r, u| nl.fprime(r, u), BoundarySpace::HGamma)?;
    let spectrum = smallest_eigenpairs(&ops, 1, cfg.eigen_tol)?;
    let ops2 = operator_with_potential(&grid, &ops.potential_field, BoundarySpace::HGamma)?;
    let q = crate::operator::quadratic_form(&ops2, &spectrum.eigenvectors[0])?;
    Ok((q - spectrum.eigenvalues[0]).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply_in_order() {
        let cfg =
            resolve_config(None, &["grid.n_r=20".into(), "grid.n_r=24".into()], None).unwrap();
        assert_eq!(cfg.n_r, 24);
        assert!(resolve_config(None, &["nope".into()], None).is_err());
    }

    #[test]
    fn rayleigh_check_is_small() {
        let mut cfg = RunConfig::default();
        cfg.set("grid.n_r", "16").unwrap();
        cfg.set("grid.n_theta", "16").unwrap();
        let err = rayleigh_self_check(&cfg).unwrap();
        assert!(err <= 1e-7);
    }
}
