//! Tensor grids on sectors and rectangles, nodal scalar fields, angular
//! calculus (derivative, even extension) and the field file format.
//!
//! Node layout, row-major in the radial index `i` then the angular index
//! `j`:
//!
//! * polar: `r_i = r_inner + (i + s/2) h_r` with `s = 1` for disc sectors
//!   (staggered first node, no node on the vertex) and `s = 0` otherwise;
//!   `theta_j = j h_theta`, so `theta_0 = 0` and `theta_{nt-1} = beta` put
//!   the Neumann edges on-grid while the Dirichlet arcs sit on the first
//!   and last radial rows.
//! * rectangle `(0,beta) x (0,width)`: the cross-section coordinate plays
//!   the radial role (both end rows Dirichlet) and the translation
//!   coordinate the angular role (Neumann ends), with unit metric weight.

use crate::domain::{RectDomain, SectorDomain};
use crate::error::{Error, Result};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

/// Metric/geometry of a grid. The polar variant stores raw extents rather
/// than a validated `SectorDomain` because reflection-extended fields live
/// on openings beyond `2*pi` (unwrapped angles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridGeometry {
    Polar {
        r_inner: f64,
        r_outer: f64,
        beta: f64,
    },
    Cartesian {
        beta: f64,
        width: f64,
    },
}

/// Uniform tensor grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    geometry: GridGeometry,
    n_r: usize,
    n_theta: usize,
    h_r: f64,
    h_theta: f64,
}

/// The two radial edges of the angular interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularEdge {
    /// theta = 0 (Gamma_0)
    ThetaMin,
    /// theta = beta (Gamma_beta)
    ThetaMax,
}

impl Grid {
    /// Polar grid over a sector domain.
    pub fn sector(dom: SectorDomain, n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 3 || n_theta < 3 {
            return Err(Error::invalid("grid needs n_r >= 3 and n_theta >= 3"));
        }
        let stagger = if dom.is_disc() { 0.5 } else { 0.0 };
        let h_r = (dom.r_outer - dom.r_inner) / (n_r as f64 - 1.0 + stagger);
        let h_theta = dom.beta / (n_theta as f64 - 1.0);
        Ok(Grid {
            geometry: GridGeometry::Polar {
                r_inner: dom.r_inner,
                r_outer: dom.r_outer,
                beta: dom.beta,
            },
            n_r,
            n_theta,
            h_r,
            h_theta,
        })
    }

    /// Cartesian grid over a rectangle.
    pub fn rectangle(dom: RectDomain, n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 3 || n_theta < 3 {
            return Err(Error::invalid("grid needs n_r >= 3 and n_theta >= 3"));
        }
        Ok(Grid {
            geometry: GridGeometry::Cartesian {
                beta: dom.beta,
                width: dom.width,
            },
            n_r,
            n_theta,
            h_r: dom.width / (n_r as f64 - 1.0),
            h_theta: dom.beta / (n_theta as f64 - 1.0),
        })
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn h_r(&self) -> f64 {
        self.h_r
    }

    pub fn h_theta(&self) -> f64 {
        self.h_theta
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_polar(&self) -> bool {
        matches!(self.geometry, GridGeometry::Polar { .. })
    }

    /// Opening angle (or rectangle length).
    pub fn beta(&self) -> f64 {
        match self.geometry {
            GridGeometry::Polar { beta, .. } => beta,
            GridGeometry::Cartesian { beta, .. } => beta,
        }
    }

    fn stagger(&self) -> f64 {
        match self.geometry {
            GridGeometry::Polar { r_inner, .. } if r_inner == 0.0 => 0.5,
            _ => 0.0,
        }
    }

    /// Radial (or cross-section) coordinate of row `i`.
    pub fn r(&self, i: usize) -> f64 {
        match self.geometry {
            GridGeometry::Polar { r_inner, .. } => r_inner + (i as f64 + self.stagger()) * self.h_r,
            GridGeometry::Cartesian { .. } => i as f64 * self.h_r,
        }
    }

    /// Angular (or translation) coordinate of column `j`.
    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.h_theta
    }

    /// Metric weight at row `i`: `r_i` in polar coordinates, 1 otherwise.
    pub fn weight(&self, i: usize) -> f64 {
        match self.geometry {
            GridGeometry::Polar { .. } => self.r(i),
            GridGeometry::Cartesian { .. } => 1.0,
        }
    }

    /// Radial flux weight at the half node `i + 1/2` (may address `i = -1`
    /// via `i_plus_half = i as isize`); vanishes at the disc vertex.
    pub fn weight_half(&self, i: isize) -> f64 {
        match self.geometry {
            GridGeometry::Polar { r_inner, .. } => {
                r_inner + (i as f64 + self.stagger() + 0.5) * self.h_r
            }
            GridGeometry::Cartesian { .. } => 1.0,
        }
    }

    /// Rows carrying Dirichlet data (arcs / long sides).
    pub fn dirichlet_rows(&self) -> Vec<usize> {
        match self.geometry {
            GridGeometry::Polar { r_inner, .. } => {
                if r_inner == 0.0 {
                    vec![self.n_r - 1]
                } else {
                    vec![0, self.n_r - 1]
                }
            }
            GridGeometry::Cartesian { .. } => vec![0, self.n_r - 1],
        }
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n_r && j < self.n_theta);
        i * self.n_theta + j
    }

    /// Worst physical node spacing, the `h` of `O(h^2)` error estimates.
    pub fn h_max(&self) -> f64 {
        match self.geometry {
            GridGeometry::Polar { r_outer, .. } => self.h_r.max(r_outer * self.h_theta),
            GridGeometry::Cartesian { .. } => self.h_r.max(self.h_theta),
        }
    }

    /// Snaps an interior angle to the nearest grid column, clamped to stay
    /// strictly inside `(0, beta)`; returns `(column, snapped_angle)`.
    pub fn snap_angle(&self, alpha: f64) -> Result<(usize, f64)> {
        if !(alpha > 0.0 && alpha < self.beta()) {
            return Err(Error::invalid(format!(
                "angle {alpha} not strictly inside (0, {})",
                self.beta()
            )));
        }
        let j = (alpha / self.h_theta).round() as usize;
        let j = j.clamp(1, self.n_theta - 2);
        Ok((j, self.theta(j)))
    }
}

/// Nodal values of a function on a grid, row-major in `r` then `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_r() {
            for j in 0..grid.n_theta() {
                values.push(f(grid.r(i), grid.theta(j)));
            }
        }
        ScalarField { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("field contains non-finite values"));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    /// Writes the text field format:
    /// `SECTOR n_r n_theta r_inner r_outer beta` (or
    /// `RECT n_r n_theta beta width`) then one value per line, row-major,
    /// shortest round-trip decimal.
    pub fn write(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        match self.grid.geometry {
            GridGeometry::Polar {
                r_inner,
                r_outer,
                beta,
            } => writeln!(
                w,
                "SECTOR {} {} {} {} {}",
                self.grid.n_r, self.grid.n_theta, r_inner, r_outer, beta
            )?,
            GridGeometry::Cartesian { beta, width } => writeln!(
                w,
                "RECT {} {} {} {}",
                self.grid.n_r, self.grid.n_theta, beta, width
            )?,
        }
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a field written by [`ScalarField::write`].
    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut lines = std::io::BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty field file".into()))??;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{s}` in field header")))
        };
        let parse_u = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad count `{s}` in field header")))
        };
        let grid = match toks.as_slice() {
            ["SECTOR", n_r, n_theta, r_inner, r_outer, beta] => {
                let dom = SectorDomain::new(parse_f(r_inner)?, parse_f(r_outer)?, parse_f(beta)?)?;
                Grid::sector(dom, parse_u(n_r)?, parse_u(n_theta)?)?
            }
            ["RECT", n_r, n_theta, beta, width] => {
                let dom = RectDomain::new(parse_f(beta)?, parse_f(width)?)?;
                Grid::rectangle(dom, parse_u(n_r)?, parse_u(n_theta)?)?
            }
            _ => {
                return Err(Error::Parse(format!(
                    "unrecognized field header: `{header}`"
                )))
            }
        };
        let mut values = Vec::with_capacity(grid.len());
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            values.push(parse_f(t)?);
        }
        ScalarField::from_values(grid, values)
    }
}

/// Centered angular derivative; on the `Gamma_0` and `Gamma_beta` columns
/// the ghost even-reflection of the Neumann condition makes it vanish
/// identically.
pub fn theta_derivative(v: &ScalarField) -> ScalarField {
    let g = *v.grid();
    let nt = g.n_theta();
    let mut out = ScalarField::zeros(g);
    let inv2h = 1.0 / (2.0 * g.h_theta());
    for i in 0..g.n_r() {
        for j in 1..nt - 1 {
            out.set(i, j, (v.at(i, j + 1) - v.at(i, j - 1)) * inv2h);
        }
        // edge columns: ghost mirror gives (v_1 - v_1)/2h = 0 exactly
        out.set(i, 0, 0.0);
        out.set(i, nt - 1, 0.0);
    }
    out
}

/// Even reflection of a field across one radial edge, producing a field on
/// the doubled opening `2*beta` with `2*n_theta - 1` columns.
///
/// Across `Gamma_beta` the original columns keep their indices; across
/// `Gamma_0` the doubled field is re-origined so column `n_theta - 1` is
/// the old `theta = 0` interface (the `[-beta, beta]` picture shifted to
/// start at zero).
pub fn extend_even(v: &ScalarField, edge: AngularEdge) -> ScalarField {
    let g = *v.grid();
    let nt = g.n_theta();
    let doubled_nt = 2 * nt - 1;
    let geometry = match g.geometry() {
        GridGeometry::Polar {
            r_inner,
            r_outer,
            beta,
        } => GridGeometry::Polar {
            r_inner,
            r_outer,
            beta: 2.0 * beta,
        },
        GridGeometry::Cartesian { beta, width } => GridGeometry::Cartesian {
            beta: 2.0 * beta,
            width,
        },
    };
    let doubled = Grid {
        geometry,
        n_r: g.n_r(),
        n_theta: doubled_nt,
        h_r: g.h_r(),
        h_theta: g.h_theta(),
    };
    let mut out = ScalarField::zeros(doubled);
    for i in 0..g.n_r() {
        for jd in 0..doubled_nt {
            let j_src = match edge {
                AngularEdge::ThetaMax => {
                    if jd < nt {
                        jd
                    } else {
                        2 * (nt - 1) - jd
                    }
                }
                AngularEdge::ThetaMin => (jd as isize - (nt as isize - 1)).unsigned_abs(),
            };
            out.set(i, jd, v.at(i, j_src));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn disc_grid(n: usize) -> Grid {
        Grid::sector(SectorDomain::new(0.0, 1.0, PI / 2.0).unwrap(), n, n).unwrap()
    }

    #[test]
    fn staggered_disc_nodes() {
        let g = disc_grid(8);
        assert!(g.r(0) > 0.0);
        assert_abs_diff_eq!(g.r(0), g.h_r() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.r(7), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.weight_half(-1), 0.0, epsilon = 1e-15);
        assert_eq!(g.dirichlet_rows(), vec![7]);
        assert_abs_diff_eq!(g.theta(7), PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn annulus_nodes_hit_both_arcs() {
        let dom = SectorDomain::new(0.5, 1.0, 1.0).unwrap();
        let g = Grid::sector(dom, 6, 4).unwrap();
        assert_abs_diff_eq!(g.r(0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.r(5), 1.0, epsilon = 1e-15);
        assert_eq!(g.dirichlet_rows(), vec![0, 5]);
    }

    #[test]
    fn theta_derivative_examples() {
        let g = disc_grid(24);
        let beta = g.beta();

        let constant = ScalarField::from_fn(g, |_, _| 3.7);
        assert_eq!(theta_derivative(&constant).max_abs(), 0.0);

        let cosine = ScalarField::from_fn(g, |_, th| (PI * th / beta).cos());
        let d = theta_derivative(&cosine);
        let h = g.h_theta();
        for i in 0..g.n_r() {
            for j in 1..g.n_theta() - 1 {
                let want = -(PI / beta) * (PI * g.theta(j) / beta).sin();
                assert_abs_diff_eq!(d.at(i, j), want, epsilon = 4.0 * h * h);
            }
            assert_eq!(d.at(i, 0), 0.0);
            assert_eq!(d.at(i, g.n_theta() - 1), 0.0);
        }

        let linear = ScalarField::from_fn(g, |_, th| th);
        let d = theta_derivative(&linear);
        for j in 1..g.n_theta() - 1 {
            assert_abs_diff_eq!(d.at(3, j), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn extension_examples() {
        let g = disc_grid(9);
        let beta = g.beta();

        let constant = ScalarField::from_fn(g, |_, _| 2.0);
        let ext = extend_even(&constant, AngularEdge::ThetaMin);
        assert!(ext.values().iter().all(|&v| v == 2.0));
        assert_eq!(ext.grid().n_theta(), 2 * g.n_theta() - 1);
        assert_abs_diff_eq!(ext.grid().beta(), 2.0 * beta, epsilon = 1e-15);

        // cos(pi theta / beta) is even about theta = 0: extension is cos of |theta|
        let cosine = ScalarField::from_fn(g, |_, th| (PI * th / beta).cos());
        let ext = extend_even(&cosine, AngularEdge::ThetaMin);
        let center = g.n_theta() - 1;
        for dj in 0..g.n_theta() {
            for i in 0..g.n_r() {
                assert_abs_diff_eq!(
                    ext.at(i, center + dj),
                    ext.at(i, center - dj),
                    epsilon = 0.0
                );
                assert_abs_diff_eq!(ext.at(i, center + dj), cosine.at(i, dj), epsilon = 0.0);
            }
        }

        // theta-linear field picks up the |theta| kink at the interface
        let linear = ScalarField::from_fn(g, |_, th| th);
        let ext = extend_even(&linear, AngularEdge::ThetaMin);
        for dj in 1..g.n_theta() {
            assert_abs_diff_eq!(ext.at(2, center - dj), linear.at(2, dj), epsilon = 0.0);
        }
    }

    proptest! {
        #[test]
        fn double_mirror_is_idempotent(seed in 0u64..1000) {
            // mirroring the already-extended field across the same interface changes nothing
            let g = disc_grid(7);
            let mut s = seed;
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64
            };
            let f = ScalarField::from_values(g, (0..g.len()).map(|_| next()).collect()).unwrap();
            let e1 = extend_even(&f, AngularEdge::ThetaMax);
            // restrict back to the original half and extend again
            let mut back = ScalarField::zeros(g);
            for i in 0..g.n_r() {
                for j in 0..g.n_theta() {
                    back.set(i, j, e1.at(i, j));
                }
            }
            let e2 = extend_even(&back, AngularEdge::ThetaMax);
            prop_assert_eq!(e1.values(), e2.values());
        }
    }

    #[test]
    fn field_file_round_trip() {
        let g = disc_grid(5);
        let f = ScalarField::from_fn(g, |r, th| r * th.cos() + 0.1234567890123456);
        let dir = std::env::temp_dir().join("sectorlab_grid_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.txt");
        f.write(&path).unwrap();
        let f2 = ScalarField::read(&path).unwrap();
        assert_eq!(f.values(), f2.values());
        assert_eq!(f.grid(), f2.grid());
    }
}
