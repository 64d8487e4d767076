//! Convergence of the discrete spectrum against the analytic catalogs:
//! Bessel eigenvalues on the disc sector, separable eigenvalues on the
//! rectangle, and the mode identity in between.
//!
//! ```bash
//! cargo run --release --example spectrum_convergence
//! ```

use sectorlab::bessel::{bessel_zero, critical_angle, eigen_catalog};
use sectorlab::domain::{RectDomain, SectorDomain};
use sectorlab::eigen::smallest_eigenpairs;
use sectorlab::grid::{theta_derivative, Grid, ScalarField};
use sectorlab::operator::{assemble_linearized, BoundarySpace};
use std::f64::consts::PI;

fn zero_ops(grid: &Grid) -> sectorlab::Result<sectorlab::operator::OperatorSet> {
    assemble_linearized(
        grid,
        &ScalarField::zeros(*grid),
        |_, _| 0.0,
        BoundarySpace::HGamma,
    )
}

fn main() -> sectorlab::Result<()> {
    // disc sector, beta = pi/2: lambda_1 -> j_(0,1)^2, lambda_2 -> j_(2,1)^2
    let j01 = bessel_zero(0.0, 1)?;
    let j21 = bessel_zero(2.0, 1)?;
    let exact = [j01 * j01, j21 * j21];
    let dom = SectorDomain::new(0.0, 1.0, PI / 2.0)?;
    println!(
        "disc sector beta = pi/2 (exact {:.6}, {:.6}):",
        exact[0], exact[1]
    );
    let mut prev: Option<[f64; 2]> = None;
    for n in [32usize, 64, 128] {
        let grid = Grid::sector(dom, n, n)?;
        let spec = smallest_eigenpairs(&zero_ops(&grid)?, 2, 1e-9)?;
        let err = [
            (spec.eigenvalues[0] - exact[0]).abs() / exact[0],
            (spec.eigenvalues[1] - exact[1]).abs() / exact[1],
        ];
        match prev {
            Some(p) => println!(
                "  n={n:4}  rel err {:9.3e} {:9.3e}   observed order {:.2} {:.2}",
                err[0],
                err[1],
                (p[0] / err[0]).log2(),
                (p[1] / err[1]).log2()
            ),
            None => println!("  n={n:4}  rel err {:9.3e} {:9.3e}", err[0], err[1]),
        }
        prev = Some(err);
    }

    // rectangle (0,2) x (0,1): lambda = (n pi / 2)^2 + (k pi)^2
    println!("rectangle (0,2)x(0,1) (exact lambda_1 = pi^2):");
    let rect = RectDomain::new(2.0, 1.0)?;
    let mut prev: Option<f64> = None;
    for n in [32usize, 64, 128] {
        let grid = Grid::rectangle(rect, n, n)?;
        let spec = smallest_eigenpairs(&zero_ops(&grid)?, 1, 1e-9)?;
        let err = (spec.eigenvalues[0] - PI * PI).abs() / (PI * PI);
        match prev {
            Some(p) => println!(
                "  n={n:4}  rel err {err:9.3e}   observed order {:.2}",
                (p / err).log2()
            ),
            None => println!("  n={n:4}  rel err {err:9.3e}"),
        }
        prev = Some(err);
    }

    // mode crossing: the second eigenfunction is angular for beta > beta_hat
    // and radial below; the angular content of the discrete mode tells them apart
    let beta_hat = critical_angle(bessel_zero(0.0, 2)?)?;
    println!("mode of the second eigenfunction (beta_hat = {beta_hat:.4}):");
    for &beta in &[PI / 3.0, beta_hat, PI / 2.0] {
        let grid = Grid::sector(SectorDomain::new(0.0, 1.0, beta)?, 64, 64)?;
        let spec = smallest_eigenpairs(&zero_ops(&grid)?, 3, 1e-9)?;
        let angular =
            theta_derivative(&spec.eigenvectors[1]).max_abs() / spec.eigenvectors[1].max_abs();
        let catalog = eigen_catalog(beta, 3, 3)?;
        let gap23 = (spec.eigenvalues[2] - spec.eigenvalues[1]).abs();
        println!(
            "  beta = {beta:.4}: lambda_2 = {:.4} (catalog {:.4}, mode ({},{})), \
             |d_theta psi_2|/|psi_2| = {angular:.3}, |l3-l2|/l2 = {:.2e}",
            spec.eigenvalues[1],
            catalog[1].lambda,
            catalog[1].n,
            catalog[1].k,
            gap23 / spec.eigenvalues[1]
        );
    }
    Ok(())
}
