//! The critical opening angle where the second eigenvalue of the mixed
//! sector problem switches between the radial mode (0,2) and the angular
//! mode (1,1): the unique beta with j_(pi/beta,1) = j_(0,2).
//!
//! ```bash
//! cargo run --release --example critical_angle
//! ```

use sectorlab::bessel::{bessel_zero, critical_angle};
use std::f64::consts::PI;

fn main() -> sectorlab::Result<()> {
    let target = bessel_zero(0.0, 2)?;
    let beta_hat = critical_angle(target)?;
    println!("j_(0,2)      = {target:.10}");
    println!("beta_hat     = {beta_hat:.10}");
    println!("s = pi/beta  = {:.10}", PI / beta_hat);
    println!(
        "in (pi/3, pi/2): {}",
        beta_hat > PI / 3.0 && beta_hat < PI / 2.0
    );

    // the crossing: below beta_hat the angular zero exceeds j_(0,2),
    // above it falls short
    for &beta in &[PI / 3.0, beta_hat, PI / 2.0] {
        let j_ang = bessel_zero(PI / beta, 1)?;
        let side = if (j_ang - target).abs() < 1e-6 {
            "equal (second eigenvalue double)"
        } else if j_ang > target {
            "radial mode second"
        } else {
            "angular mode second"
        };
        println!("beta = {beta:.6}: j_(pi/beta,1) = {j_ang:.6}  -> {side}");
    }

    // two-sided inverse checks at exactly representable openings
    let beta_pi = critical_angle(bessel_zero(1.0, 1)?)?;
    let beta_half = critical_angle(bessel_zero(2.0, 1)?)?;
    println!("inverse at s=1: beta = {beta_pi:.12} (pi = {:.12})", PI);
    println!(
        "inverse at s=2: beta = {beta_half:.12} (pi/2 = {:.12})",
        PI / 2.0
    );
    Ok(())
}
