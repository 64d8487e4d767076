//! Numerical laboratory for semilinear elliptic problems on planar sector
//! domains with mixed Dirichlet (arcs) / Neumann (radial edges) boundary
//! conditions.
//!
//! The crate solves the boundary-value problems, computes linearized
//! spectra and Morse indices, and runs the angular-shape diagnostics
//! (rotating-plane sweep, `L_u u_theta = 0` check, verdict
//! classification) that characterise low-index solutions.
//!
//! ## Where to start
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release --example bessel_zeros            # J_nu zeros + residuals
//! cargo run --release --example critical_angle          # the mode-crossing opening
//! cargo run --release --example spectrum_convergence    # discrete vs analytic spectra
//! cargo run --release --example classify_modes          # shape verdicts on linear modes
//! cargo run --release --example henon_symmetry_breaking # weighted-power sweep + threshold
//! cargo run --release --example lane_emden_annulus      # annulus-sector exponent sweep
//! cargo run --release --example splitting_inequality    # two-half eigenvalue bound
//! cargo run --release --example rescale_half_disc       # half-disc -> sector map
//! ```
//!
//! The same pipelines are scriptable through the `sectorlab` binary
//! (see [`cli`]); the acceptance suite lives in `tests/acceptance.rs`.

pub mod analysis;
pub mod bessel;
pub mod cli;
pub mod config;
pub mod domain;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod nonlinear;
pub mod operator;
pub mod report;
pub mod sparse;
pub mod svg;

pub use error::{Error, Result};
