//! Solvers for the semilinear mixed problems: damped Newton iteration,
//! Nehari-constrained descent for ground states, the energy functional and
//! the half-disc to sector rescaling map.

use crate::eigen::MorseReport;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridGeometry, ScalarField};
use crate::operator::{assemble_laplacian, BoundarySpace, LaplaceOperator};
use crate::sparse::EnvelopeLdlt;

/// Right-hand sides `f(r, u)` with derivative and `u`-antiderivative.
///
/// Power nonlinearities are odd-extended, `f = w(r) |u|^(p-1) u`, so the
/// solvers stay well defined at sign changes of the iterates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    /// `f(u) = lambda u`
    Linear { lambda: f64 },
    /// `f(r, u) = r^alpha |u|^(p-1) u`
    Henon { alpha: f64, p: f64 },
    /// `f(u) = |u|^(p-1) u`
    LaneEmden { p: f64 },
    /// `f(r, u) = r^exponent |u|^(p-1) u` with a free weight exponent
    /// (the rescaled problems of the sector map).
    PowerWithWeight { exponent: f64, p: f64 },
}

impl Nonlinearity {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Nonlinearity::Linear { lambda } => lambda.is_finite(),
            Nonlinearity::Henon { alpha, p } => alpha.is_finite() && alpha >= 0.0 && p > 1.0,
            Nonlinearity::LaneEmden { p } => p > 1.0,
            Nonlinearity::PowerWithWeight { exponent, p } => exponent.is_finite() && p > 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid nonlinearity {self:?}")))
        }
    }

    fn weight_and_p(&self) -> Option<(f64, f64)> {
        match *self {
            Nonlinearity::Linear { .. } => None,
            Nonlinearity::Henon { alpha, p } => Some((alpha, p)),
            Nonlinearity::LaneEmden { p } => Some((0.0, p)),
            Nonlinearity::PowerWithWeight { exponent, p } => Some((exponent, p)),
        }
    }

    pub fn f(&self, r: f64, u: f64) -> f64 {
        match *self {
            Nonlinearity::Linear { lambda } => lambda * u,
            _ => {
                let (w, p) = self.weight_and_p().unwrap();
                r.powf(w) * u.abs().powf(p - 1.0) * u
            }
        }
    }

    pub fn fprime(&self, r: f64, u: f64) -> f64 {
        match *self {
            Nonlinearity::Linear { lambda } => lambda,
            _ => {
                let (w, p) = self.weight_and_p().unwrap();
                p * r.powf(w) * u.abs().powf(p - 1.0)
            }
        }
    }

    /// `F(r, u) = int_0^u f(r, s) ds`
    pub fn antiderivative(&self, r: f64, u: f64) -> f64 {
        match *self {
            Nonlinearity::Linear { lambda } => 0.5 * lambda * u * u,
            _ => {
                let (w, p) = self.weight_and_p().unwrap();
                r.powf(w) * u.abs().powf(p + 1.0) / (p + 1.0)
            }
        }
    }

    pub fn is_superlinear(&self) -> bool {
        self.weight_and_p().is_some()
    }

    pub fn label(&self) -> String {
        match *self {
            Nonlinearity::Linear { lambda } => format!("linear(lambda={lambda})"),
            Nonlinearity::Henon { alpha, p } => format!("henon(alpha={alpha},p={p})"),
            Nonlinearity::LaneEmden { p } => format!("lane_emden(p={p})"),
            Nonlinearity::PowerWithWeight { exponent, p } => {
                format!("power(weight={exponent},p={p})")
            }
        }
    }
}

/// Dirichlet data on the arcs, a function of the radius.
#[derive(Clone, Copy)]
pub enum DirichletData {
    Zero,
    Constant(f64),
    Radial(fn(f64) -> f64),
}

impl DirichletData {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            DirichletData::Zero => 0.0,
            DirichletData::Constant(c) => *c,
            DirichletData::Radial(g) => g(r),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, DirichletData::Zero)
    }
}

impl std::fmt::Debug for DirichletData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DirichletData::Zero => write!(f, "Zero"),
            DirichletData::Constant(c) => write!(f, "Constant({c})"),
            DirichletData::Radial(_) => write!(f, "Radial(fn)"),
        }
    }
}

/// A full problem instance: domain grid, nonlinearity and arc data.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub grid: Grid,
    pub nonlinearity: Nonlinearity,
    pub dirichlet: DirichletData,
}

impl ProblemSpec {
    pub fn new(grid: Grid, nonlinearity: Nonlinearity, dirichlet: DirichletData) -> Result<Self> {
        nonlinearity.validate()?;
        Ok(ProblemSpec {
            grid,
            nonlinearity,
            dirichlet,
        })
    }
}

/// Where a solution came from.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub solver: String,
    pub config_hash: String,
}

/// An accepted solution with its certificate numbers.
#[derive(Debug, Clone)]
pub struct SolutionRecord {
    /// Full-grid field including the Dirichlet boundary values.
    pub field: ScalarField,
    /// `M^{-1}`-norm of the discrete residual `A u + lift - M f(u)`.
    pub residual_norm: f64,
    pub energy: f64,
    /// Filled post hoc by the spectral module.
    pub morse: Option<MorseReport>,
    pub iterations: usize,
    pub provenance: Provenance,
}

struct Assembled {
    lap: LaplaceOperator,
    lift: Vec<f64>,
    dirichlet_values: Vec<f64>,
}

fn assemble(problem: &ProblemSpec) -> Result<Assembled> {
    let lap = assemble_laplacian(&problem.grid, BoundarySpace::HGamma)?;
    let g = problem.dirichlet;
    let dirichlet_values = lap.map.dirichlet_values(|r| g.eval(r));
    for v in &dirichlet_values {
        if !v.is_finite() {
            return Err(Error::invalid("Dirichlet data not finite on the arcs"));
        }
    }
    let lift = lap.coupling.matvec_alloc(&dirichlet_values);
    Ok(Assembled {
        lap,
        lift,
        dirichlet_values,
    })
}

fn residual_vec(asm: &Assembled, nl: &Nonlinearity, u: &[f64], out: &mut Vec<f64>) {
    asm.lap.a.matvec(u, out);
    let grid = asm.lap.map.grid();
    for f in 0..u.len() {
        let (i, _) = asm.lap.map.node_of_free(f);
        out[f] += asm.lift[f] - asm.lap.mass[f] * nl.f(grid.r(i), u[f]);
    }
}

fn minv_norm(asm: &Assembled, v: &[f64]) -> f64 {
    v.iter()
        .zip(&asm.lap.mass)
        .map(|(x, m)| x * x / m)
        .sum::<f64>()
        .sqrt()
}

fn energy_free(asm: &Assembled, nl: &Nonlinearity, u: &[f64]) -> f64 {
    let grid = asm.lap.map.grid();
    let mut e = 0.5 * asm.lap.a.bilinear(u, u);
    for f in 0..u.len() {
        let (i, _) = asm.lap.map.node_of_free(f);
        e += asm.lift[f] * u[f] - asm.lap.mass[f] * nl.antiderivative(grid.r(i), u[f]);
    }
    e
}

fn full_field(asm: &Assembled, u: &[f64]) -> ScalarField {
    let mut field = asm.lap.map.scatter(u);
    for (d, &node) in asm.lap.map.dirichlet_nodes().iter().enumerate() {
        field.values_mut()[node] = asm.dirichlet_values[d];
    }
    field
}

/// Discrete energy `E(u) = 1/2 u^T A u + u^T lift - sum_i M_ii F(r_i, u_i)`
/// over the free nodes (boundary contributions are a fixed constant and
/// omitted; for homogeneous arcs this is the standard functional whose
/// critical points solve the problem).
pub fn energy(problem: &ProblemSpec, u: &ScalarField) -> Result<f64> {
    if u.grid() != &problem.grid {
        return Err(Error::invalid("field lives on a different grid"));
    }
    let asm = assemble(problem)?;
    let x = asm.lap.map.restrict(u);
    Ok(energy_free(&asm, &problem.nonlinearity, &x))
}

/// Damped Newton iteration on the discrete residual.
///
/// Accepts when the `M^{-1}`-norm of the residual drops to `tol`; Armijo
/// backtracking halves rejected steps up to 30 times, stagnation and
/// divergence abort with the iteration trace in the error.
pub fn newton_solve(
    problem: &ProblemSpec,
    initial: &ScalarField,
    tol: f64,
) -> Result<SolutionRecord> {
    if initial.grid() != &problem.grid {
        return Err(Error::invalid("initial guess lives on a different grid"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let asm = assemble(problem)?;
    let nl = problem.nonlinearity;
    let grid = *asm.lap.map.grid();
    let n = asm.lap.map.n_free();
    let mut u = asm.lap.map.restrict(initial);
    let mut res = vec![0.0; n];
    residual_vec(&asm, &nl, &u, &mut res);
    let mut norm = minv_norm(&asm, &res);
    let norm0 = norm;
    let mut trace: Vec<(usize, f64, f64)> = Vec::new();

    let max_iter = 60usize;
    for it in 0..max_iter {
        if norm <= tol {
            let x = full_field(&asm, &u);
            return Ok(SolutionRecord {
                residual_norm: norm,
                energy: energy_free(&asm, &nl, &u),
                field: x,
                morse: None,
                iterations: it,
                provenance: Provenance {
                    solver: "newton".into(),
                    config_hash: String::new(),
                },
            });
        }
        if !norm.is_finite() || norm > 1e8 * (norm0 + 1.0) {
            return Err(Error::convergence(format!(
                "Newton diverged at iteration {it} (residual {norm:e}); trace: {trace:?}"
            )));
        }

        // J = A - M f'(u), factored with growing diagonal damping if a
        // pivot breaks down
        let mut jac = asm.lap.a.clone();
        let mut shift = vec![0.0; n];
        let mut v_max = 0.0f64;
        for f in 0..n {
            let (i, _) = asm.lap.map.node_of_free(f);
            let v = nl.fprime(grid.r(i), u[f]);
            if !v.is_finite() {
                return Err(Error::domain(format!(
                    "f' not finite at free node {f} during Newton iteration {it}"
                )));
            }
            v_max = v_max.max(v.abs());
            shift[f] = -asm.lap.mass[f] * v;
        }
        jac.add_diag(&shift)?;
        let mut tau = 0.0f64;
        let factor = loop {
            let mut probe = jac.clone();
            if tau > 0.0 {
                let damp: Vec<f64> = asm.lap.mass.iter().map(|m| tau * m).collect();
                probe.add_diag(&damp)?;
            }
            match EnvelopeLdlt::factor(&probe, 1e-14) {
                Ok(f) => break f,
                Err(_) if tau < 1e6 * (v_max + 1.0) => {
                    tau = if tau == 0.0 {
                        1e-10 * (v_max + 1.0)
                    } else {
                        tau * 100.0
                    };
                }
                Err(e) => return Err(e),
            }
        };
        let mut delta: Vec<f64> = res.iter().map(|r| -r).collect();
        factor.solve_in_place(&mut delta);

        // Armijo backtracking on phi = 1/2 |F|^2
        let phi = 0.5 * norm * norm;
        let mut step = 1.0f64;
        let mut accepted = false;
        let mut u_try = vec![0.0; n];
        let mut res_try = vec![0.0; n];
        for _ in 0..=30 {
            for f in 0..n {
                u_try[f] = u[f] + step * delta[f];
            }
            residual_vec(&asm, &nl, &u_try, &mut res_try);
            let norm_try = minv_norm(&asm, &res_try);
            if norm_try.is_finite() && 0.5 * norm_try * norm_try <= (1.0 - 2e-4 * step) * phi {
                let du = step * delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
                u.copy_from_slice(&u_try);
                res.copy_from_slice(&res_try);
                norm = norm_try;
                trace.push((it, norm, step));
                accepted = true;
                if du <= 1e-14 * (1.0 + u.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
                    return Err(Error::convergence(format!(
                        "Newton stagnated at iteration {it} (step {du:e}); trace: {trace:?}"
                    )));
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::convergence(format!(
                "Newton line search failed after 30 halvings at iteration {it} \
                 (residual {norm:e}); trace: {trace:?}"
            )));
        }
    }
    Err(Error::convergence(format!(
        "Newton did not reach tolerance {tol} in {max_iter} iterations \
         (residual {norm:e}); trace: {trace:?}"
    )))
}

/// Rescales `u` onto the Nehari manifold `u^T A u = sum M f(u) u`
/// (exact for the homogeneous power nonlinearities).
fn nehari_project(asm: &Assembled, nl: &Nonlinearity, u: &mut [f64]) -> Result<f64> {
    let (_, p) = nl
        .weight_and_p()
        .ok_or_else(|| Error::invalid("Nehari projection needs a superlinear power"))?;
    let grid = asm.lap.map.grid();
    let num = asm.lap.a.bilinear(u, u);
    let mut den = 0.0;
    for f in 0..u.len() {
        let (i, _) = asm.lap.map.node_of_free(f);
        den += asm.lap.mass[f] * nl.f(grid.r(i), u[f]) * u[f];
    }
    if !(num > 0.0 && den > 0.0) {
        return Err(Error::domain(format!(
            "Nehari projection undefined (u^T A u = {num:e}, f-moment = {den:e})"
        )));
    }
    let t = (num / den).powf(1.0 / (p - 1.0));
    for v in u.iter_mut() {
        *v *= t;
    }
    Ok(t)
}

fn theta_average_in_place(asm: &Assembled, u: &mut [f64]) {
    let grid = *asm.lap.map.grid();
    let field = asm.lap.map.scatter(u);
    let nt = grid.n_theta();
    for i in 0..grid.n_r() {
        // trapezoid average, consistent with the half edge weights
        let mut s = 0.5 * (field.at(i, 0) + field.at(i, nt - 1));
        for j in 1..nt - 1 {
            s += field.at(i, j);
        }
        let avg = s / (nt as f64 - 1.0);
        for j in 0..nt {
            if let Some(f) = asm.lap.map.free_index(i, j) {
                u[f] = avg;
            }
        }
    }
}

fn projected_gradient_phase(
    asm: &Assembled,
    a_inv: &EnvelopeLdlt,
    nl: &Nonlinearity,
    u: &mut Vec<f64>,
    tol: f64,
    radial_only: bool,
) -> Result<()> {
    let n = u.len();
    nehari_project(asm, nl, u)?;
    if radial_only {
        theta_average_in_place(asm, u);
        nehari_project(asm, nl, u)?;
    }
    let mut e_cur = energy_free(asm, nl, u);
    let mut res = vec![0.0; n];
    let mut eta = 1.0f64;
    for _ in 0..800 {
        residual_vec(asm, nl, u, &mut res);
        let norm = minv_norm(asm, &res);
        let u_scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm <= (1e-3 * (1.0 + u_scale)).max(10.0 * tol) {
            return Ok(());
        }
        // Sobolev (A^{-1}-preconditioned) gradient: eta = 1 is the Picard
        // step u <- A^{-1} (M f(u) - lift), well conditioned even for
        // sharply weighted nonlinearities
        let grad = a_inv.solve(&res);
        let mut improved = false;
        for _shrink in 0..40 {
            let mut cand: Vec<f64> = u.iter().zip(&grad).map(|(v, g)| v - eta * g).collect();
            if nehari_project(asm, nl, &mut cand).is_ok() {
                if radial_only {
                    theta_average_in_place(asm, &mut cand);
                    if nehari_project(asm, nl, &mut cand).is_err() {
                        eta *= 0.4;
                        continue;
                    }
                }
                let e_new = energy_free(asm, nl, &cand);
                if e_new < e_cur {
                    *u = cand;
                    e_cur = e_new;
                    eta = (eta * 1.3).min(1.0);
                    improved = true;
                    break;
                }
            }
            eta *= 0.4;
        }
        if !improved {
            // descent exhausted at this resolution; let Newton finish
            return Ok(());
        }
    }
    Ok(())
}

fn run_start(
    problem: &ProblemSpec,
    asm: &Assembled,
    a_inv: &EnvelopeLdlt,
    start: &ScalarField,
    tol: f64,
    radial_only: bool,
    label: &str,
) -> Result<SolutionRecord> {
    let mut u = asm.lap.map.restrict(start);
    projected_gradient_phase(asm, a_inv, &problem.nonlinearity, &mut u, tol, radial_only)?;
    let mut record = newton_solve(problem, &asm.lap.map.scatter(&u), tol)?;
    if radial_only {
        // snap the converged iterate back onto the symmetric subspace and
        // re-verify; the drift being removed is at rounding level
        let mut v = asm.lap.map.restrict(&record.field);
        theta_average_in_place(asm, &mut v);
        let mut res = vec![0.0; v.len()];
        residual_vec(asm, &problem.nonlinearity, &v, &mut res);
        let norm = minv_norm(asm, &res);
        if norm <= tol {
            record.field = full_field(asm, &v);
            record.residual_norm = norm;
            record.energy = energy_free(asm, &problem.nonlinearity, &v);
        } else {
            return Err(Error::convergence(format!(
                "radial snap lost the solution (residual {norm:e} > {tol:e})"
            )));
        }
    }
    if record.field.max_abs() <= 1e-8 {
        return Err(Error::convergence(
            "start collapsed to the trivial solution",
        ));
    }
    record.provenance.solver = format!("nehari+newton({label})");
    Ok(record)
}

fn bump_starts(problem: &ProblemSpec) -> Vec<(ScalarField, &'static str)> {
    let grid = problem.grid;
    let beta = grid.beta();
    let (r_lo, r_hi) = match grid.geometry() {
        GridGeometry::Polar {
            r_inner, r_outer, ..
        } => (r_inner, r_outer),
        GridGeometry::Cartesian { width, .. } => (0.0, width),
    };
    let bump =
        move |r: f64| (r - r_lo).max(0.0) * (r_hi - r).max(0.0) / (r_hi - r_lo).powi(2) * 4.0;
    let cosine = move |th: f64| (std::f64::consts::PI * th / beta).cos();
    vec![
        (
            ScalarField::from_fn(grid, move |r, _| bump(r)),
            "radial-bump",
        ),
        (
            ScalarField::from_fn(grid, move |r, th| bump(r) * (1.0 + 0.75 * cosine(th))),
            "cos-biased",
        ),
        (
            ScalarField::from_fn(grid, move |r, th| bump(r) * (1.0 - 0.75 * cosine(th))),
            "cos-mirrored",
        ),
    ]
}

/// Nehari-constrained energy minimization: projected gradient with Nehari
/// rescaling each step, Newton polish, best of the three documented starts
/// (radial bump, cosine-biased bump, mirrored bias).  Deterministic: no
/// random restarts.
pub fn ground_state(problem: &ProblemSpec, tol: f64) -> Result<SolutionRecord> {
    if !problem.nonlinearity.is_superlinear() {
        return Err(Error::invalid(
            "ground states are defined for superlinear power nonlinearities",
        ));
    }
    if !problem.dirichlet.is_zero() {
        return Err(Error::invalid("ground states need homogeneous arc data"));
    }
    let asm = assemble(problem)?;
    let a_inv = EnvelopeLdlt::factor(&asm.lap.a, 1e-14)?;
    let mut winner: Option<SolutionRecord> = None;
    let mut failures = Vec::new();
    for (start, label) in bump_starts(problem) {
        match run_start(problem, &asm, &a_inv, &start, tol, false, label) {
            Ok(rec) => {
                let better = winner
                    .as_ref()
                    .map(|w| rec.energy < w.energy)
                    .unwrap_or(true);
                if better {
                    winner = Some(rec);
                }
            }
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    winner.ok_or_else(|| {
        Error::convergence(format!(
            "all multistart attempts failed: {}",
            failures.join("; ")
        ))
    })
}

/// Best angle-independent competitor: the same descent constrained to the
/// theta-constant subspace (radial bump start, symmetrized every step).
pub fn ground_state_radial(problem: &ProblemSpec, tol: f64) -> Result<SolutionRecord> {
    if !problem.nonlinearity.is_superlinear() || !problem.dirichlet.is_zero() {
        return Err(Error::invalid(
            "radial competitor needs a superlinear problem with homogeneous arcs",
        ));
    }
    let asm = assemble(problem)?;
    let a_inv = EnvelopeLdlt::factor(&asm.lap.a, 1e-14)?;
    let (start, _) = &bump_starts(problem)[0];
    run_start(
        problem,
        &asm,
        &a_inv,
        start,
        tol,
        true,
        "radial-constrained",
    )
}

/// Transforms a half-disc solution onto a sector of opening `beta`:
/// `v(rho, phi) = c * u(rho^(pi/beta), (pi/beta) phi)` with
/// `c = (pi/beta)^(2/(p-1))`, sampled by bilinear interpolation, and
/// records the residual of the transformed field under the rescaled weight
/// exponent `(alpha + 2) pi/beta - 2`.
pub fn sector_rescale(
    source: &SolutionRecord,
    target_grid: &Grid,
    p: f64,
    alpha_exp: f64,
) -> Result<SolutionRecord> {
    let src_grid = *source.field.grid();
    let (src_beta, src_r_outer) = match src_grid.geometry() {
        GridGeometry::Polar {
            r_inner,
            r_outer,
            beta,
        } if r_inner == 0.0 => (beta, r_outer),
        _ => return Err(Error::invalid("rescaling source must be a disc sector")),
    };
    if (src_beta - std::f64::consts::PI).abs() > 1e-9 || (src_r_outer - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(
            "rescaling source must live on the unit half-disc (beta = pi)",
        ));
    }
    let beta = match target_grid.geometry() {
        GridGeometry::Polar {
            r_inner,
            r_outer,
            beta,
        } if r_inner == 0.0 && (r_outer - 1.0).abs() <= 1e-12 => beta,
        _ => {
            return Err(Error::invalid(
                "rescaling target must be a unit disc sector",
            ))
        }
    };
    if p <= 1.0 {
        return Err(Error::invalid("rescaling exponent p must exceed 1"));
    }
    let k = std::f64::consts::PI / beta;
    // outermost mapped radial spacing; a target much finer than the source
    // sampling cannot gain accuracy from interpolation
    if k * target_grid.h_r() < 0.5 * src_grid.h_r() {
        return Err(Error::invalid(format!(
            "target grid finer than the source sampling supports \
             (mapped spacing {:e} < half the source spacing {:e})",
            k * target_grid.h_r(),
            src_grid.h_r()
        )));
    }
    let c = k.powf(2.0 / (p - 1.0));

    let interp = |r: f64, th: f64| -> f64 {
        // clamped bilinear on the source grid
        let fr = ((r - src_grid.r(0)) / src_grid.h_r()).clamp(0.0, (src_grid.n_r() - 1) as f64);
        let ft = (th / src_grid.h_theta()).clamp(0.0, (src_grid.n_theta() - 1) as f64);
        let i0 = (fr.floor() as usize).min(src_grid.n_r() - 2);
        let j0 = (ft.floor() as usize).min(src_grid.n_theta() - 2);
        let wr = fr - i0 as f64;
        let wt = ft - j0 as f64;
        (1.0 - wr) * (1.0 - wt) * source.field.at(i0, j0)
            + wr * (1.0 - wt) * source.field.at(i0 + 1, j0)
            + (1.0 - wr) * wt * source.field.at(i0, j0 + 1)
            + wr * wt * source.field.at(i0 + 1, j0 + 1)
    };
    let field = ScalarField::from_fn(*target_grid, |rho, phi| c * interp(rho.powf(k), k * phi));

    let rescaled = ProblemSpec::new(
        *target_grid,
        Nonlinearity::PowerWithWeight {
            exponent: (alpha_exp + 2.0) * k - 2.0,
            p,
        },
        DirichletData::Zero,
    )?;
    let asm = assemble(&rescaled)?;
    let u = asm.lap.map.restrict(&field);
    let mut res = vec![0.0; u.len()];
    residual_vec(&asm, &rescaled.nonlinearity, &u, &mut res);
    Ok(SolutionRecord {
        residual_norm: minv_norm(&asm, &res),
        energy: energy_free(&asm, &rescaled.nonlinearity, &u),
        field,
        morse: None,
        iterations: 0,
        provenance: Provenance {
            solver: format!("sector_rescale(beta={beta},p={p},alpha={alpha_exp})"),
            config_hash: String::new(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::SectorDomain;
    use crate::eigen::smallest_eigenpairs;
    use crate::grid::theta_derivative;
    use crate::operator::assemble_linearized;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn disc_grid(beta: f64, n: usize) -> Grid {
        Grid::sector(SectorDomain::new(0.0, 1.0, beta).unwrap(), n, n).unwrap()
    }

    #[test]
    fn nonlinearity_derivative_consistency() {
        // f' must match central differences of f at sampled states
        let kinds = [
            Nonlinearity::Linear { lambda: 3.2 },
            Nonlinearity::Henon { alpha: 2.0, p: 3.0 },
            Nonlinearity::LaneEmden { p: 2.5 },
            Nonlinearity::PowerWithWeight {
                exponent: 1.5,
                p: 4.0,
            },
        ];
        for nl in kinds {
            nl.validate().unwrap();
            for &r in &[0.2f64, 0.7, 1.0] {
                for &u in &[0.3f64, 1.0, 2.5] {
                    let h = 1e-6 * u.max(1.0);
                    let fd = (nl.f(r, u + h) - nl.f(r, u - h)) / (2.0 * h);
                    assert_abs_diff_eq!(nl.fprime(r, u), fd, epsilon = 1e-5 * fd.abs().max(1.0));
                    let fd_f =
                        (nl.antiderivative(r, u + h) - nl.antiderivative(r, u - h)) / (2.0 * h);
                    assert_abs_diff_eq!(nl.f(r, u), fd_f, epsilon = 1e-5 * fd_f.abs().max(1.0));
                    assert_eq!(nl.antiderivative(r, 0.0), 0.0);
                }
            }
        }
    }

    #[test]
    fn newton_on_linear_eigenpair_converges_immediately() {
        let grid = disc_grid(PI / 2.0, 24);
        let ops = assemble_linearized(
            &grid,
            &ScalarField::zeros(grid),
            |_, _| 0.0,
            BoundarySpace::HGamma,
        )
        .unwrap();
        let spec = smallest_eigenpairs(&ops, 1, 1e-11).unwrap();
        let lambda = spec.eigenvalues[0];
        let psi = spec.eigenvectors[0].clone();
        let problem =
            ProblemSpec::new(grid, Nonlinearity::Linear { lambda }, DirichletData::Zero).unwrap();
        let record = newton_solve(&problem, &psi, 1e-6).unwrap();
        assert!(record.iterations <= 2);
        // stays on the psi ray
        let scale = record.field.max_abs() / psi.max_abs();
        for (a, b) in record.field.values().iter().zip(psi.values()) {
            assert_abs_diff_eq!(*a, scale * b, epsilon = 1e-5);
        }
    }

    #[test]
    fn harmonic_extension_reproduces_constants() {
        // f = 0, g = c on both arcs of an annulus: the solution is u = c
        let dom = SectorDomain::new(0.4, 1.0, 1.0).unwrap();
        let grid = Grid::sector(dom, 20, 16).unwrap();
        let problem = ProblemSpec::new(
            grid,
            Nonlinearity::Linear { lambda: 0.0 },
            DirichletData::Constant(2.5),
        )
        .unwrap();
        let record = newton_solve(&problem, &ScalarField::zeros(grid), 1e-11).unwrap();
        for &v in record.field.values() {
            assert_abs_diff_eq!(v, 2.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn ground_state_energy_converges_under_refinement() {
        // refinement study: the discrete minimum approaches its limit from
        // below at second order (E = 5.4614, 5.4870, 5.4932 for n = 16,
        // 32, 64 on the half-disc, limit ~ 5.495)
        let mut energies = Vec::new();
        for n in [16usize, 32, 64] {
            let grid = disc_grid(PI, n);
            let problem = ProblemSpec::new(
                grid,
                Nonlinearity::Henon { alpha: 0.0, p: 3.0 },
                DirichletData::Zero,
            )
            .unwrap();
            energies.push(ground_state(&problem, 1e-8).unwrap().energy);
        }
        assert!(energies[0] < energies[1] && energies[1] < energies[2]);
        let d1 = energies[1] - energies[0];
        let d2 = energies[2] - energies[1];
        assert!(d2 < 0.5 * d1, "not converging toward a limit: {energies:?}");
    }

    #[test]
    fn accepted_solution_reverifies_under_fresh_assembly() {
        let grid = disc_grid(PI, 24);
        let problem = ProblemSpec::new(
            grid,
            Nonlinearity::Henon { alpha: 2.0, p: 3.0 },
            DirichletData::Zero,
        )
        .unwrap();
        let record = ground_state(&problem, 1e-8).unwrap();
        // rebuild the operator from scratch and recompute the residual
        let asm = assemble(&problem).unwrap();
        let u = asm.lap.map.restrict(&record.field);
        let mut res = vec![0.0; u.len()];
        residual_vec(&asm, &problem.nonlinearity, &u, &mut res);
        let norm = minv_norm(&asm, &res);
        assert!(norm <= 1e-8, "re-verified residual {norm:e}");
        assert_abs_diff_eq!(norm, record.residual_norm, epsilon = 1e-12);
    }

    #[test]
    fn radial_dirichlet_data_is_honored() {
        // f = 0 with radial arc data: the solution is the radial harmonic
        // interpolant, theta-independent, matching g on both arcs
        fn g(r: f64) -> f64 {
            1.0 + r * r
        }
        let dom = SectorDomain::new(0.5, 1.0, 2.0).unwrap();
        let grid = Grid::sector(dom, 24, 12).unwrap();
        let problem = ProblemSpec::new(
            grid,
            Nonlinearity::Linear { lambda: 0.0 },
            DirichletData::Radial(g),
        )
        .unwrap();
        let record = newton_solve(&problem, &ScalarField::zeros(grid), 1e-11).unwrap();
        for j in 0..grid.n_theta() {
            assert_abs_diff_eq!(record.field.at(0, j), g(0.5), epsilon = 1e-12);
            assert_abs_diff_eq!(record.field.at(grid.n_r() - 1, j), g(1.0), epsilon = 1e-12);
        }
        assert!(theta_derivative(&record.field).max_abs() <= 1e-9);
    }

    #[test]
    fn energy_identities() {
        let grid = disc_grid(PI / 2.0, 16);
        let problem = ProblemSpec::new(
            grid,
            Nonlinearity::Linear { lambda: 7.0 },
            DirichletData::Zero,
        )
        .unwrap();
        let zero = ScalarField::zeros(grid);
        assert_eq!(energy(&problem, &zero).unwrap(), 0.0);

        // E(u) = 1/2 Q(u) with V = lambda for homogeneous data
        let u = ScalarField::from_fn(grid, |r, th| (1.0 - r) * r * (1.0 + th).sin());
        let ops = assemble_linearized(&grid, &zero, |_, _| 7.0, BoundarySpace::HGamma).unwrap();
        let q = crate::operator::quadratic_form(&ops, &u).unwrap();
        assert_abs_diff_eq!(energy(&problem, &u).unwrap(), 0.5 * q, epsilon = 1e-10);
    }

    #[test]
    fn energy_gradient_matches_finite_differences() {
        let grid = disc_grid(PI, 12);
        let problem = ProblemSpec::new(
            grid,
            Nonlinearity::Henon { alpha: 1.0, p: 3.0 },
            DirichletData::Zero,
        )
        .unwrap();
        let asm = assemble(&problem).unwrap();
        let n = asm.lap.map.n_free();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut grad = vec![0.0; n];
        residual_vec(&asm, &problem.nonlinearity, &u, &mut grad);
        let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for _ in 0..10 {
            let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let eps = 1e-6 * scale;
            let up: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + eps * b).collect();
            let um: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a - eps * b).collect();
            let fd = (energy_free(&asm, &problem.nonlinearity, &up)
                - energy_free(&asm, &problem.nonlinearity, &um))
                / (2.0 * eps);
            let dg: f64 = grad.iter().zip(&d).map(|(a, b)| a * b).sum();
            assert_abs_diff_eq!(dg, fd, epsilon = 1e-5 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn nehari_projection_is_exact() {
        let grid = disc_grid(PI, 16);
        let problem = ProblemSpec::new(
            grid,
            Nonlinearity::LaneEmden { p: 3.0 },
            DirichletData::Zero,
        )
        .unwrap();
        let asm = assemble(&problem).unwrap();
        let start = &bump_starts(&problem)[1].0;
        let mut u = asm.lap.map.restrict(start);
        nehari_project(&asm, &problem.nonlinearity, &mut u).unwrap();
        let num = asm.lap.a.bilinear(&u, &u);
        let grid_ref = asm.lap.map.grid();
        let mut den = 0.0;
        for f in 0..u.len() {
            let (i, _) = asm.lap.map.node_of_free(f);
            den += asm.lap.mass[f] * problem.nonlinearity.f(grid_ref.r(i), u[f]) * u[f];
        }
        assert!((num - den).abs() <= 1e-10 * num.abs());
    }

    #[test]
    fn ground_state_on_half_disc_is_radial_without_weight() {
        // alpha = 0: the half-disc winner is theta-constant to O(h^2)
        let grid = disc_grid(PI, 32);
        let problem = ProblemSpec::new(
            grid,
            Nonlinearity::Henon { alpha: 0.0, p: 3.0 },
            DirichletData::Zero,
        )
        .unwrap();
        let record = ground_state(&problem, 1e-10).unwrap();
        assert!(record.residual_norm <= 1e-10);
        let ut = theta_derivative(&record.field);
        let h = grid.h_max();
        assert!(
            ut.max_abs() <= 10.0 * h * h * record.field.max_abs().max(1.0),
            "u_theta = {:e} too large",
            ut.max_abs()
        );
        // positivity up to discretization undershoot
        let min = record
            .field
            .values()
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        assert!(min >= -10.0 * h * h * record.field.max_abs());
        // multistart determinism: a second run is bit-identical
        let again = ground_state(&problem, 1e-10).unwrap();
        assert_eq!(record.field.values(), again.field.values());
        assert_eq!(record.energy, again.energy);
    }

    #[test]
    fn rescale_identity_at_beta_pi() {
        let grid = disc_grid(PI, 48);
        let problem = ProblemSpec::new(
            grid,
            Nonlinearity::Henon { alpha: 0.0, p: 3.0 },
            DirichletData::Zero,
        )
        .unwrap();
        let source = ground_state(&problem, 1e-10).unwrap();
        // coarser target so the comparison exercises the interpolation
        let target = disc_grid(PI, 32);
        let out = sector_rescale(&source, &target, 3.0, 0.0).unwrap();
        // c = 1 and the angle map is the identity: the output is exactly the
        // radial interpolant of the source
        let mut worst = 0.0f64;
        for i in 0..target.n_r() {
            for j in 0..target.n_theta() {
                let r = target.r(i);
                let fr = ((r - grid.r(0)) / grid.h_r()).clamp(0.0, (grid.n_r() - 1) as f64);
                let i0 = (fr.floor() as usize).min(grid.n_r() - 2);
                let wr = fr - i0 as f64;
                let ft = (target.theta(j) / grid.h_theta()).clamp(0.0, (grid.n_theta() - 1) as f64);
                let j0 = (ft.floor() as usize).min(grid.n_theta() - 2);
                let wt = ft - j0 as f64;
                let want = (1.0 - wr) * (1.0 - wt) * source.field.at(i0, j0)
                    + wr * (1.0 - wt) * source.field.at(i0 + 1, j0)
                    + (1.0 - wr) * wt * source.field.at(i0, j0 + 1)
                    + wr * wt * source.field.at(i0 + 1, j0 + 1);
                worst = worst.max((out.field.at(i, j) - want).abs());
            }
        }
        assert!(worst <= 1e-14);
    }

    #[test]
    fn rescale_spot_value_beta_half_pi() {
        // beta = pi/2, p = 3: c = 2 and v(rho, phi) = 2 u(rho^2, 2 phi)
        let grid = disc_grid(PI, 40);
        let u = ScalarField::from_fn(grid, |r, th| (1.0 - r * r) * (0.5 * th).cos());
        let source = SolutionRecord {
            field: u.clone(),
            residual_norm: 0.0,
            energy: 0.0,
            morse: None,
            iterations: 0,
            provenance: Provenance {
                solver: "test".into(),
                config_hash: String::new(),
            },
        };
        let target = disc_grid(PI / 2.0, 24);
        let out = sector_rescale(&source, &target, 3.0, 0.0).unwrap();
        for &(i, j) in &[(5usize, 7usize), (12, 3), (20, 20)] {
            let rho = target.r(i);
            let phi = target.theta(j);
            let want = 2.0 * (1.0 - rho.powi(4)) * phi.cos();
            assert_abs_diff_eq!(out.field.at(i, j), want, epsilon = 5e-3);
        }
    }

    #[test]
    fn rescale_rejects_oversampled_target() {
        let grid = disc_grid(PI, 12);
        let u = ScalarField::from_fn(grid, |r, _| 1.0 - r);
        let source = SolutionRecord {
            field: u,
            residual_norm: 0.0,
            energy: 0.0,
            morse: None,
            iterations: 0,
            provenance: Provenance {
                solver: "test".into(),
                config_hash: String::new(),
            },
        };
        let target = disc_grid(PI / 2.0, 128);
        assert!(sector_rescale(&source, &target, 3.0, 0.0).is_err());
    }
}
