//! The discrete two-half eigenvalue inequality
//! `lambda_2(whole) <= max(lambda_1(lower half), lambda_1(upper half))`
//! across domains, potentials and line angles.
//!
//! ```bash
//! cargo run --release --example splitting_inequality
//! ```

use sectorlab::domain::{RectDomain, SectorDomain};
use sectorlab::eigen::splitting_inequality_check;
use sectorlab::grid::{Grid, ScalarField};
use sectorlab::nonlinear::{ground_state, DirichletData, Nonlinearity, ProblemSpec};
use sectorlab::operator::{assemble_linearized, operator_with_potential, BoundarySpace};
use std::f64::consts::PI;

fn main() -> sectorlab::Result<()> {
    let disc = Grid::sector(SectorDomain::new(0.0, 1.0, PI / 2.0)?, 48, 49)?;
    let annulus = Grid::sector(SectorDomain::new(0.3, 1.0, 1.0)?, 48, 49)?;
    let rect = Grid::rectangle(RectDomain::new(2.0, 1.0)?, 48, 49)?;

    // one potential flavor per domain: free Laplacian, constant shift,
    // and a genuine linearization at a computed ground state
    let zero_field = |g: &Grid| ScalarField::zeros(*g);
    let ops_disc =
        assemble_linearized(&disc, &zero_field(&disc), |_, _| 0.0, BoundarySpace::HGamma)?;
    let ops_annulus = assemble_linearized(
        &annulus,
        &zero_field(&annulus),
        |_, _| 8.0,
        BoundarySpace::HGamma,
    )?;
    let henon = ProblemSpec::new(
        rect,
        Nonlinearity::LaneEmden { p: 3.0 },
        DirichletData::Zero,
    )?;
    let state = ground_state(&henon, 1e-8)?;
    let nl = henon.nonlinearity;
    let ops_rect = {
        let linearized = assemble_linearized(
            &rect,
            &state.field,
            |r, u| nl.fprime(r, u),
            BoundarySpace::HGamma,
        )?;
        operator_with_potential(&rect, &linearized.potential_field, BoundarySpace::HGamma)?
    };

    println!(
        "{:<28} {:>8} {:>12} {:>12} {:>12}  holds",
        "case", "alpha", "lambda_2", "rhs", "slack"
    );
    for (label, ops) in [
        ("disc sector, V = 0", &ops_disc),
        ("annulus sector, V = 8", &ops_annulus),
        ("rectangle, V = f'(state)", &ops_rect),
    ] {
        let beta = ops.grid().beta();
        for frac in [0.5, 0.35, 0.7] {
            let check = splitting_inequality_check(ops, frac * beta, 1e-9)?;
            println!(
                "{label:<28} {:>8.4} {:>12.6} {:>12.6} {:>12.2e}  {}",
                check.alpha, check.lhs, check.rhs, check.slack, check.holds
            );
        }
    }
    Ok(())
}
