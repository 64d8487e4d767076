//! Assembly of the discrete Laplacian and linearized operators on tensor
//! grids with the mixed boundary conditions.
//!
//! The scheme is the conservative 5-point stencil of
//! `-(u_rr + u_r/r + u_tt/r^2)` (unit metric on rectangles), scaled by the
//! lumped area weights `r_i h_r h_theta` (half weight on Neumann edge
//! columns) so that the stiffness matrix is exactly symmetric.  Neumann
//! edges use ghost-node even reflection; Dirichlet rows and columns are
//! eliminated from the free set with their stencil couplings collected in
//! a separate lift matrix.

use crate::error::{Error, Result};
use crate::grid::{AngularEdge, Grid, ScalarField};
use crate::sparse::CsrMatrix;

/// Boundary space the operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySpace {
    /// Dirichlet on the arcs only; Neumann on both radial edges.
    HGamma,
    /// Dirichlet on arcs and both radial edges.
    HZero,
    /// `HGamma` plus a Dirichlet line on the interior grid column
    /// `theta = column * h_theta` (splitting-inequality half problems).
    HGammaInteriorDirichlet { column: usize },
}

impl BoundarySpace {
    fn edge_is_neumann(&self, _edge: AngularEdge) -> bool {
        !matches!(self, BoundarySpace::HZero)
    }
}

/// Node <-> free-index bookkeeping for one grid/space pair.
#[derive(Debug, Clone)]
pub struct FreeMap {
    grid: Grid,
    free_of_node: Vec<Option<usize>>,
    node_of_free: Vec<usize>,
    dirichlet_nodes: Vec<usize>,
    dirichlet_of_node: Vec<Option<usize>>,
}

impl FreeMap {
    fn build(grid: Grid, space: BoundarySpace) -> Result<Self> {
        let (nr, nt) = (grid.n_r(), grid.n_theta());
        let mut eliminated = vec![false; grid.len()];
        for i in grid.dirichlet_rows() {
            for j in 0..nt {
                eliminated[grid.idx(i, j)] = true;
            }
        }
        match space {
            BoundarySpace::HGamma => {}
            BoundarySpace::HZero => {
                for i in 0..nr {
                    eliminated[grid.idx(i, 0)] = true;
                    eliminated[grid.idx(i, nt - 1)] = true;
                }
            }
            BoundarySpace::HGammaInteriorDirichlet { column } => {
                if column == 0 || column >= nt - 1 {
                    return Err(Error::invalid(format!(
                        "interior Dirichlet column {column} must satisfy 0 < column < {}",
                        nt - 1
                    )));
                }
                for i in 0..nr {
                    eliminated[grid.idx(i, column)] = true;
                }
            }
        }
        let mut free_of_node = vec![None; grid.len()];
        let mut dirichlet_of_node = vec![None; grid.len()];
        let mut node_of_free = Vec::new();
        let mut dirichlet_nodes = Vec::new();
        for node in 0..grid.len() {
            if eliminated[node] {
                dirichlet_of_node[node] = Some(dirichlet_nodes.len());
                dirichlet_nodes.push(node);
            } else {
                free_of_node[node] = Some(node_of_free.len());
                node_of_free.push(node);
            }
        }
        if node_of_free.is_empty() {
            return Err(Error::invalid("no free nodes left after elimination"));
        }
        Ok(FreeMap {
            grid,
            free_of_node,
            node_of_free,
            dirichlet_nodes,
            dirichlet_of_node,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_free(&self) -> usize {
        self.node_of_free.len()
    }

    pub fn free_index(&self, i: usize, j: usize) -> Option<usize> {
        self.free_of_node[self.grid.idx(i, j)]
    }

    pub fn node_of_free(&self, f: usize) -> (usize, usize) {
        let node = self.node_of_free[f];
        (node / self.grid.n_theta(), node % self.grid.n_theta())
    }

    pub fn dirichlet_nodes(&self) -> &[usize] {
        &self.dirichlet_nodes
    }

    /// Restriction of a full-grid field to the free nodes.
    pub fn restrict(&self, v: &ScalarField) -> Vec<f64> {
        self.node_of_free.iter().map(|&n| v.values()[n]).collect()
    }

    /// Scatters free values into a full-grid field (zeros elsewhere).
    pub fn scatter(&self, free_values: &[f64]) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid);
        for (f, &n) in self.node_of_free.iter().enumerate() {
            out.values_mut()[n] = free_values[f];
        }
        out
    }

    /// Dirichlet boundary values sampled from `g(r)` on the eliminated nodes.
    pub fn dirichlet_values(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        self.dirichlet_nodes
            .iter()
            .map(|&n| g(self.grid.r(n / self.grid.n_theta())))
            .collect()
    }

    /// Free indices whose column is strictly below / above `column`.
    pub fn split_by_column(&self, column: usize) -> (Vec<usize>, Vec<usize>) {
        let nt = self.grid.n_theta();
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for (f, &n) in self.node_of_free.iter().enumerate() {
            let j = n % nt;
            if j < column {
                lo.push(f);
            } else if j > column {
                hi.push(f);
            }
        }
        (lo, hi)
    }
}

/// Assembled discrete `-Delta` with boundary conditions folded in.
#[derive(Debug, Clone)]
pub struct LaplaceOperator {
    /// Stiffness over free nodes, area-weighted, symmetric.
    pub a: CsrMatrix,
    /// Couplings from free nodes to eliminated Dirichlet nodes
    /// (`lift = coupling * g`).
    pub coupling: CsrMatrix,
    /// Lumped diagonal mass (polar area weights).
    pub mass: Vec<f64>,
    pub map: FreeMap,
    pub space: BoundarySpace,
}

/// Assembles stiffness `A`, mass `M` and the free-node index map for a
/// grid/space pair.
pub fn assemble_laplacian(grid: &Grid, space: BoundarySpace) -> Result<LaplaceOperator> {
    let map = FreeMap::build(*grid, space)?;
    let (nr, nt) = (grid.n_r(), grid.n_theta());
    let (h_r, h_t) = (grid.h_r(), grid.h_theta());

    let mut a_trip: Vec<(usize, usize, f64)> = Vec::with_capacity(5 * map.n_free());
    let mut c_trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut mass = vec![0.0; map.n_free()];

    for f in 0..map.n_free() {
        let (i, j) = map.node_of_free(f);
        let on_edge = j == 0 || j == nt - 1;
        let w_edge = if on_edge && space.edge_is_neumann(AngularEdge::ThetaMin) {
            0.5
        } else {
            1.0
        };
        mass[f] = grid.weight(i) * h_r * h_t * w_edge;

        let mut diag = 0.0;
        let couple = |trip_a: &mut Vec<(usize, usize, f64)>,
                      trip_c: &mut Vec<(usize, usize, f64)>,
                      ii: usize,
                      jj: usize,
                      c: f64| {
            if let Some(nb) = map.free_index(ii, jj) {
                trip_a.push((f, nb, -c));
            } else {
                let d = map.dirichlet_of_node[grid.idx(ii, jj)].expect("eliminated node");
                trip_c.push((f, d, -c));
            }
        };

        // radial fluxes; at the disc vertex weight_half(-1) vanishes and the
        // inner flux drops out of the stencil
        if i + 1 < nr {
            let c = w_edge * h_t * grid.weight_half(i as isize) / h_r;
            diag += c;
            couple(&mut a_trip, &mut c_trip, i + 1, j, c);
        }
        if i > 0 {
            let c = w_edge * h_t * grid.weight_half(i as isize - 1) / h_r;
            diag += c;
            couple(&mut a_trip, &mut c_trip, i - 1, j, c);
        } else if grid.is_polar() && grid.weight_half(-1) != 0.0 {
            // annulus inner arc is a Dirichlet row, handled by elimination;
            // reaching here would mean an inconsistent map
            return Err(Error::invalid("free node on the inner arc"));
        }

        // angular fluxes; the half edge weight exactly cancels the doubled
        // ghost flux, so the pair coefficient is the same on edge and
        // interior rows
        let c_ang = h_r / (grid.weight(i) * h_t);
        if j + 1 < nt {
            diag += c_ang;
            couple(&mut a_trip, &mut c_trip, i, j + 1, c_ang);
        }
        if j > 0 {
            diag += c_ang;
            couple(&mut a_trip, &mut c_trip, i, j - 1, c_ang);
        }

        a_trip.push((f, f, diag));
    }

    let a = CsrMatrix::from_triplets(map.n_free(), map.n_free(), &a_trip)?;
    let coupling =
        CsrMatrix::from_triplets(map.n_free(), map.dirichlet_nodes().len().max(1), &c_trip)?;
    Ok(LaplaceOperator {
        a,
        coupling,
        mass,
        map,
        space,
    })
}

/// Stiffness, mass and potential realizing the linearized operator
/// `L_u = -Delta - f'(r, u) I` in a boundary space; `L` acts on free nodes
/// as `A - M V`.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub lap: LaplaceOperator,
    /// `V_ff = f'(r_f, u_f)` on free nodes, aligned with the free index.
    pub potential: Vec<f64>,
    /// Same potential on the whole grid (for restriction to subspaces).
    pub potential_field: ScalarField,
}

impl OperatorSet {
    /// `K = A - M V` as an explicit sparse matrix (shares structure with `A`).
    pub fn k_matrix(&self) -> CsrMatrix {
        let mut k = self.lap.a.clone();
        let shift: Vec<f64> = self
            .potential
            .iter()
            .zip(&self.lap.mass)
            .map(|(v, m)| -v * m)
            .collect();
        k.add_diag(&shift).expect("stencil diagonal present");
        k
    }

    pub fn grid(&self) -> &Grid {
        self.lap.map.grid()
    }

    pub fn v_max(&self) -> f64 {
        self.potential.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Assembles `L_u` at the state `u` for a nonlinearity derivative
/// `fprime(r, u)`.
pub fn assemble_linearized(
    grid: &Grid,
    u: &ScalarField,
    fprime: impl Fn(f64, f64) -> f64,
    space: BoundarySpace,
) -> Result<OperatorSet> {
    if u.grid() != grid {
        return Err(Error::invalid("state field lives on a different grid"));
    }
    let lap = assemble_laplacian(grid, space)?;
    let mut potential_field = ScalarField::zeros(*grid);
    for i in 0..grid.n_r() {
        for j in 0..grid.n_theta() {
            let v = fprime(grid.r(i), u.at(i, j));
            if !v.is_finite() {
                return Err(Error::domain(format!(
                    "f' is not finite at node (i={i}, j={j}), r={}, u={}",
                    grid.r(i),
                    u.at(i, j)
                )));
            }
            potential_field.set(i, j, v);
        }
    }
    let potential = lap.map.restrict(&potential_field);
    Ok(OperatorSet {
        lap,
        potential,
        potential_field,
    })
}

/// Wraps an existing potential field over a (possibly different) boundary
/// space on the same grid.
pub fn operator_with_potential(
    grid: &Grid,
    potential_field: &ScalarField,
    space: BoundarySpace,
) -> Result<OperatorSet> {
    if potential_field.grid() != grid {
        return Err(Error::invalid("potential lives on a different grid"));
    }
    let lap = assemble_laplacian(grid, space)?;
    let potential = lap.map.restrict(potential_field);
    Ok(OperatorSet {
        lap,
        potential,
        potential_field: potential_field.clone(),
    })
}

/// The discrete quadratic form `v^T (A - M V) v` over the free nodes.
///
/// Rejects fields violating the Dirichlet constraints of the operator's
/// space beyond `1e-12` (relative to the field scale), and is by
/// construction exactly consistent with the matrices the eigensolver uses.
pub fn quadratic_form(ops: &OperatorSet, v: &ScalarField) -> Result<f64> {
    if v.grid() != ops.grid() {
        return Err(Error::invalid("field lives on a different grid"));
    }
    let scale = v.max_abs().max(1.0);
    for &node in ops.lap.map.dirichlet_nodes() {
        if v.values()[node].abs() > 1e-12 * scale {
            return Err(Error::invalid(format!(
                "field violates the Dirichlet constraint at node {node}: {}",
                v.values()[node]
            )));
        }
    }
    let x = ops.lap.map.restrict(v);
    let mut q = ops.lap.a.bilinear(&x, &x);
    for f in 0..x.len() {
        q -= ops.lap.mass[f] * ops.potential[f] * x[f] * x[f];
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{RectDomain, SectorDomain};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn disc(n: usize) -> Grid {
        Grid::sector(SectorDomain::new(0.0, 1.0, PI / 2.0).unwrap(), n, n).unwrap()
    }

    #[test]
    fn stiffness_is_symmetric() {
        for space in [
            BoundarySpace::HGamma,
            BoundarySpace::HZero,
            BoundarySpace::HGammaInteriorDirichlet { column: 5 },
        ] {
            let lap = assemble_laplacian(&disc(12), space).unwrap();
            assert!(lap.a.symmetry_error() < 1e-12, "space {space:?}");
            assert!(lap.mass.iter().all(|&m| m > 0.0));
        }
    }

    #[test]
    fn constant_in_kernel_away_from_arcs() {
        // rows whose stencil sees no Dirichlet node must annihilate constants;
        // with the boundary lift included the whole constant is harmonic
        let lap = assemble_laplacian(&disc(10), BoundarySpace::HGamma).unwrap();
        let ones_free = vec![1.0; lap.map.n_free()];
        let ones_dir = vec![1.0; lap.map.dirichlet_nodes().len()];
        let a1 = lap.a.matvec_alloc(&ones_free);
        let c1 = lap.coupling.matvec_alloc(&ones_dir);
        let nr = lap.map.grid().n_r();
        for f in 0..lap.map.n_free() {
            let (i, _) = lap.map.node_of_free(f);
            if i + 1 < nr - 1 {
                assert_abs_diff_eq!(a1[f], 0.0, epsilon = 1e-12);
            }
            assert_abs_diff_eq!(a1[f] + c1[f], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn linear_potential_is_constant_diagonal() {
        let g = disc(8);
        let u = ScalarField::zeros(g);
        let lam = 4.25;
        let ops = assemble_linearized(&g, &u, |_, _| lam, BoundarySpace::HGamma).unwrap();
        assert!(ops.potential.iter().all(|&v| v == lam));
        let k = ops.k_matrix();
        for f in 0..ops.lap.map.n_free() {
            assert_abs_diff_eq!(
                k.get(f, f),
                ops.lap.a.get(f, f) - lam * ops.lap.mass[f],
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn henon_fprime_spot_value() {
        // f(u) = r^alpha u^p with alpha = 1, p = 3 at r = 0.5, u = 2:
        // f' = p r^alpha u^(p-1) = 3 * 0.5 * 4 = 6
        let g = disc(8);
        let u = ScalarField::from_fn(g, |_, _| 2.0);
        let ops =
            assemble_linearized(&g, &u, |r, u| 3.0 * r * u * u, BoundarySpace::HGamma).unwrap();
        // pick a free node and check against the formula at its radius
        let f = ops.lap.map.free_index(2, 3).unwrap();
        let r = g.r(2);
        assert_abs_diff_eq!(ops.potential[f], 3.0 * r * 4.0, epsilon = 1e-14);
        // zero state kills the superlinear derivative
        let ops0 = assemble_linearized(
            &g,
            &ScalarField::zeros(g),
            |r, u| 3.0 * r * u * u,
            BoundarySpace::HGamma,
        )
        .unwrap();
        assert!(ops0.potential.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nonfinite_fprime_is_reported() {
        let g = disc(8);
        let u = ScalarField::zeros(g);
        let err = assemble_linearized(&g, &u, |_, _| f64::NAN, BoundarySpace::HGamma);
        assert!(err.is_err());
    }

    #[test]
    fn quadratic_form_basics() {
        let g = disc(10);
        let ops = assemble_linearized(
            &g,
            &ScalarField::zeros(g),
            |_, _| 0.0,
            BoundarySpace::HGamma,
        )
        .unwrap();
        let zero = ScalarField::zeros(g);
        assert_eq!(quadratic_form(&ops, &zero).unwrap(), 0.0);

        // constraint violation rejected
        let bad = ScalarField::from_fn(g, |_, _| 1.0);
        assert!(quadratic_form(&ops, &bad).is_err());
    }

    #[test]
    fn rectangle_rayleigh_quotient_approaches_pi_squared() {
        // Dirichlet long sides, Neumann ends: smallest Rayleigh quotient of
        // the x1-constant sine profile tends to (pi/width)^2
        let rect = RectDomain::new(2.0, 1.0).unwrap();
        let mut prev_err = f64::INFINITY;
        for n in [16usize, 32, 64] {
            let g = Grid::rectangle(rect, n, 9).unwrap();
            let ops = assemble_linearized(
                &g,
                &ScalarField::zeros(g),
                |_, _| 0.0,
                BoundarySpace::HGamma,
            )
            .unwrap();
            let v = ScalarField::from_fn(g, |y, _| (PI * y).sin());
            let q = quadratic_form(&ops, &v).unwrap();
            let x = ops.lap.map.restrict(&v);
            let m_norm: f64 = x.iter().zip(&ops.lap.mass).map(|(v, m)| v * v * m).sum();
            let rayleigh = q / m_norm;
            let err = (rayleigh - PI * PI).abs();
            assert!(err < prev_err, "error must shrink under refinement");
            prev_err = err;
        }
        assert!(prev_err < 1e-3 * PI * PI);
    }
}
