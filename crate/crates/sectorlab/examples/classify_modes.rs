//! The shape trichotomy on the linear eigenmodes: the first mode is
//! angle-independent, the second (wide opening) strictly monotone, the
//! third neither — with the rotating-plane sweep backing each verdict.
//!
//! ```bash
//! cargo run --release --example classify_modes
//! ```

use sectorlab::analysis::{classify, rotating_plane, ClassifyOptions};
use sectorlab::domain::SectorDomain;
use sectorlab::eigen::smallest_eigenpairs;
use sectorlab::grid::{Grid, ScalarField};
use sectorlab::nonlinear::{DirichletData, Nonlinearity, ProblemSpec, Provenance, SolutionRecord};
use sectorlab::operator::{assemble_linearized, BoundarySpace};
use std::f64::consts::PI;

fn mode_record(grid: Grid, index: usize) -> sectorlab::Result<(SolutionRecord, ProblemSpec)> {
    let ops = assemble_linearized(
        &grid,
        &ScalarField::zeros(grid),
        |_, _| 0.0,
        BoundarySpace::HGamma,
    )?;
    let spec = smallest_eigenpairs(&ops, index + 1, 1e-10)?;
    let lambda = spec.eigenvalues[index];
    let problem = ProblemSpec::new(grid, Nonlinearity::Linear { lambda }, DirichletData::Zero)?;
    let record = SolutionRecord {
        field: spec.eigenvectors[index].clone(),
        residual_norm: spec.residuals[index],
        energy: 0.0,
        morse: None,
        iterations: 0,
        provenance: Provenance {
            solver: format!("discrete eigenmode {index}"),
            config_hash: String::new(),
        },
    };
    Ok((record, problem))
}

fn main() -> sectorlab::Result<()> {
    // first and second modes on a wide sector (beta > beta_hat)
    let wide = Grid::sector(SectorDomain::new(0.0, 1.0, PI / 2.0)?, 64, 64)?;
    // third mode on the half-disc (beta > beta_tilde)
    let half = Grid::sector(SectorDomain::new(0.0, 1.0, PI)?, 64, 64)?;

    for (label, grid, index) in [
        ("psi_01 (first mode, beta = pi/2)", wide, 0),
        ("psi_11 (second mode, beta = pi/2)", wide, 1),
        ("psi_21 (third mode, beta = pi)", half, 2),
    ] {
        let (record, problem) = mode_record(grid, index)?;
        let report = classify(&record, &problem, &ClassifyOptions::default())?;
        println!("{label}:");
        println!("  verdict            = {}", report.verdict);
        println!("  morse index        = {}", report.morse.index);
        println!(
            "  lambda_1,2 (gamma) = {:.6}, {:.6}",
            report.lambda1_gamma, report.lambda2_gamma
        );
        println!("  lambda_1 (H^1_0)   = {:.6}", report.lambda1_dirichlet);
        println!("  u_theta alignment  = {:.6}", report.utheta_alignment);
        for note in &report.notes {
            println!("  note: {note}");
        }

        let sweep = rotating_plane(&record.field, 9)?;
        let worst = sweep.min_w.iter().cloned().fold(f64::INFINITY, f64::min);
        println!("  rotating plane: worst interior min_w = {worst:.3e}\n");
    }
    Ok(())
}
