//! Symmetry breaking of the Henon ground state on the half-disc: sweeps
//! the weight exponent, compares the Nehari winner against the best
//! angle-independent competitor, and reports the empirical breaking
//! threshold (a probe, not an asserted value).
//!
//! ```bash
//! cargo run --release --example henon_symmetry_breaking
//! ```

use sectorlab::analysis::{classify, ClassifyOptions};
use sectorlab::domain::SectorDomain;
use sectorlab::grid::{theta_derivative, Grid};
use sectorlab::nonlinear::{
    ground_state, ground_state_radial, DirichletData, Nonlinearity, ProblemSpec,
};
use sectorlab::report::{emit, Manifest};
use sectorlab::svg::heatmap;
use std::f64::consts::PI;
use std::path::Path;

fn main() -> sectorlab::Result<()> {
    let n = 64;
    let p = 3.0;
    let grid = Grid::sector(SectorDomain::new(0.0, 1.0, PI)?, n, n)?;
    let out = Path::new("out/henon_sweep");
    let mut manifest = Manifest::new();
    let mut csv = String::from("alpha,energy_winner,energy_radial,rel_gap,utheta_max,verdict\n");

    println!("half-disc {n}x{n}, p = {p}");
    println!(
        "{:>6} {:>14} {:>14} {:>10} {:>10}  verdict",
        "alpha", "E(winner)", "E(radial)", "rel gap", "|u_theta|"
    );
    let mut threshold: Option<f64> = None;
    for &alpha in &[0.0, 1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0] {
        let problem =
            ProblemSpec::new(grid, Nonlinearity::Henon { alpha, p }, DirichletData::Zero)?;
        let winner = ground_state(&problem, 1e-8)?;
        let radial = ground_state_radial(&problem, 1e-8)?;
        let gap = (radial.energy - winner.energy) / radial.energy.abs();
        let ut = theta_derivative(&winner.field).max_abs();
        let report = classify(&winner, &problem, &ClassifyOptions::default())?;
        if threshold.is_none() && winner.energy < 0.99 * radial.energy {
            threshold = Some(alpha);
        }
        println!(
            "{alpha:>6.1} {:>14.6} {:>14.6} {:>10.3e} {:>10.3e}  {}",
            winner.energy, radial.energy, gap, ut, report.verdict
        );
        csv.push_str(&format!(
            "{alpha},{},{},{gap},{ut},{}\n",
            winner.energy, radial.energy, report.verdict
        ));
        if alpha == 20.0 {
            emit(
                out,
                "winner_alpha20.svg",
                &heatmap(&winner.field, "u"),
                &mut manifest,
            )?;
            emit(
                out,
                "winner_alpha20_utheta.svg",
                &heatmap(&theta_derivative(&winner.field), "u_theta"),
                &mut manifest,
            )?;
        }
    }
    match threshold {
        Some(a) => println!(
            "empirical breaking threshold (first swept alpha with >1% energy gap): \
             alpha ~ {a} at this resolution"
        ),
        None => println!("no symmetry breaking detected in the sweep"),
    }
    emit(out, "sweep.csv", &csv, &mut manifest)?;
    manifest.write(out)?;
    println!("artifacts under {}", out.display());
    Ok(())
}
