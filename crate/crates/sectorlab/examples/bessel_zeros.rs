//! Tables of Bessel zeros j_{nu,k} and a self-check against the ascending
//! series.
//!
//! ```bash
//! cargo run --release --example bessel_zeros
//! ```

use sectorlab::bessel::{bessel_j, bessel_zero};

fn main() -> sectorlab::Result<()> {
    println!("{:>6} {:>3} {:>18} {:>12}", "nu", "k", "j_(nu,k)", "|J(j)|");
    for &nu in &[0.0, 0.5, 1.0, 2.0, 3.0, 5.0] {
        for k in 1..=5 {
            let z = bessel_zero(nu, k)?;
            let check = bessel_j(nu, z)?.abs();
            println!("{nu:>6.2} {k:>3} {z:>18.12} {check:>12.2e}");
        }
    }

    // reference zeros behind the mode-crossing discussion
    println!("\nreference zeros:");
    println!("  j_(0,2) = {:.6}", bessel_zero(0.0, 2)?);
    println!("  j_(2,1) = {:.6}", bessel_zero(2.0, 1)?);
    println!("  j_(3,1) = {:.6}", bessel_zero(3.0, 1)?);
    Ok(())
}
