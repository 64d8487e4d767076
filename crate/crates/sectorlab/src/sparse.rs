//! Row-compressed sparse matrices and the direct/iterative solvers used by
//! the eigen and Newton machinery.
//!
//! The factorization is an envelope (profile) LDL^T: for the tensor-grid
//! stencils in this crate the bandwidth equals the angular grid size, all
//! fill stays inside the row envelope, and the computation is exactly
//! deterministic. Definite systems (shifted pencils) take the D > 0 path;
//! Newton systems may be indefinite, which LDL^T handles without pivoting
//! on these diagonally-heavy operators.

use crate::error::{Error, Result};

/// Square sparse matrix in CSR form: sorted column indices per row, no
/// explicit zeros.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::invalid(format!(
                    "triplet ({r},{c}) outside {n_rows}x{n_cols}"
                )));
            }
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_unstable_by_key(|&t| (triplets[t].0, triplets[t].1));

        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut cur_row = 0usize;
        for &t in &order {
            let (r, c, v) = triplets[t];
            while cur_row < r {
                cur_row += 1;
                row_ptr[cur_row] = col_idx.len();
            }
            if let (Some(&last_c), true) = (col_idx.last(), row_ptr[cur_row] < col_idx.len()) {
                if last_c == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            col_idx.push(c);
            vals.push(v);
        }
        while cur_row < n_rows {
            cur_row += 1;
            row_ptr[cur_row] = col_idx.len();
        }
        let mut m = CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            vals,
        };
        m.drop_zeros();
        Ok(m)
    }

    fn drop_zeros(&mut self) {
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.vals[k] != 0.0 {
                    col_idx.push(self.col_idx[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.vals = vals;
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.vals[a..b])
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for i in 0..self.n_rows {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = s;
        }
    }

    pub fn matvec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec(x, &mut y);
        y
    }

    /// x^T A y (requires square-compatible shapes).
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n_rows {
            let mut row = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.vals[k] * y[self.col_idx[k]];
            }
            s += x[i] * row;
        }
        s
    }

    pub fn diag(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    d[i] = self.vals[k];
                }
            }
        }
        d
    }

    /// Adds `shift[i]` to each diagonal entry (entry must be structurally present).
    pub fn add_diag(&mut self, shift: &[f64]) -> Result<()> {
        if shift.len() != self.n_rows {
            return Err(Error::invalid("diagonal shift length mismatch"));
        }
        for i in 0..self.n_rows {
            let mut hit = false;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    self.vals[k] += shift[i];
                    hit = true;
                }
            }
            if !hit && shift[i] != 0.0 {
                return Err(Error::invalid(format!(
                    "row {i} has no structural diagonal to shift"
                )));
            }
        }
        Ok(())
    }

    /// Two-sided diagonal scaling `diag(d) A diag(d)` (symmetry preserving).
    pub fn sym_scale(&self, d: &[f64]) -> CsrMatrix {
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.vals[k] = d[i] * self.vals[k] * d[self.col_idx[k]];
            }
        }
        out
    }

    /// Largest asymmetry |A_ij - A_ji| relative to the largest entry.
    pub fn symmetry_error(&self) -> f64 {
        let mut scale: f64 = 0.0;
        for &v in &self.vals {
            scale = scale.max(v.abs());
        }
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let a_ji = self.get(j, i);
                worst = worst.max((self.vals[k] - a_ji).abs());
            }
        }
        worst / scale
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// P A P^T for a permutation given as `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Result<CsrMatrix> {
        if perm.len() != self.n_rows || self.n_rows != self.n_cols {
            return Err(Error::invalid("permutation length mismatch"));
        }
        let mut inv = vec![usize::MAX; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            if old >= perm.len() || inv[old] != usize::MAX {
                return Err(Error::invalid("not a permutation"));
            }
            inv[old] = new;
        }
        let mut trip = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                trip.push((inv[i], inv[self.col_idx[k]], self.vals[k]));
            }
        }
        CsrMatrix::from_triplets(self.n_rows, self.n_cols, &trip)
    }

    /// Keeps the rows/columns listed in `keep` (sorted, unique), renumbering.
    pub fn submatrix(&self, keep: &[usize]) -> Result<CsrMatrix> {
        let mut new_of_old = vec![usize::MAX; self.n_cols.max(self.n_rows)];
        for (new, &old) in keep.iter().enumerate() {
            new_of_old[old] = new;
        }
        let mut trip = Vec::new();
        for (new_r, &old_r) in keep.iter().enumerate() {
            for k in self.row_ptr[old_r]..self.row_ptr[old_r + 1] {
                let c = new_of_old[self.col_idx[k]];
                if c != usize::MAX {
                    trip.push((new_r, c, self.vals[k]));
                }
            }
        }
        CsrMatrix::from_triplets(keep.len(), keep.len(), &trip)
    }
}

/// Envelope LDL^T factorization of a symmetric CSR matrix.
#[derive(Debug)]
pub struct EnvelopeLdlt {
    n: usize,
    first: Vec<usize>,
    offset: Vec<usize>,
    low: Vec<f64>,
    d: Vec<f64>,
}

impl EnvelopeLdlt {
    /// Factors `a`; fails on a pivot smaller than `pivot_tol` times the
    /// largest diagonal magnitude (callers may damp and retry).
    pub fn factor(a: &CsrMatrix, pivot_tol: f64) -> Result<Self> {
        if a.n_rows != a.n_cols {
            return Err(Error::invalid("LDL^T needs a square matrix"));
        }
        let n = a.n_rows;
        let mut first = vec![0usize; n];
        for i in 0..n {
            let (cols, _) = a.row(i);
            first[i] = cols.first().copied().unwrap_or(i).min(i);
        }
        let mut offset = vec![0usize; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i]);
        }
        let mut low = vec![0.0f64; offset[n]];
        let mut d = vec![0.0f64; n];

        let mut scale: f64 = 0.0;
        for i in 0..n {
            scale = scale.max(a.get(i, i).abs());
        }
        let pivot_floor = pivot_tol * scale.max(f64::MIN_POSITIVE);

        let mut work = vec![0.0f64; n];
        for i in 0..n {
            let f_i = first[i];
            let (cols, vals) = a.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if c <= i {
                    work[c] = v;
                }
            }
            for j in f_i..i {
                let f_j = first[j];
                let lo_k = f_i.max(f_j);
                let mut s = work[j];
                let row_i = offset[i];
                let row_j = offset[j];
                for k in lo_k..j {
                    s -= low[row_i + (k - f_i)] * d[k] * low[row_j + (k - f_j)];
                }
                low[row_i + (j - f_i)] = s / d[j];
            }
            let mut dd = work[i];
            let row_i = offset[i];
            for k in f_i..i {
                let l = low[row_i + (k - f_i)];
                dd -= l * l * d[k];
            }
            if dd.abs() <= pivot_floor || !dd.is_finite() {
                return Err(Error::convergence(format!(
                    "LDL^T pivot breakdown at row {i}: d = {dd:e}"
                )));
            }
            d[i] = dd;
            for (&c, _) in cols.iter().zip(vals) {
                if c <= i {
                    work[c] = 0.0;
                }
            }
            // clear fill positions touched above
            for k in f_i..i {
                work[k] = 0.0;
            }
        }
        Ok(EnvelopeLdlt {
            n,
            first,
            offset,
            low,
            d,
        })
    }

    /// True when every pivot is positive (the matrix was positive definite).
    pub fn is_positive_definite(&self) -> bool {
        self.d.iter().all(|&x| x > 0.0)
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for i in 0..self.n {
            let f_i = self.first[i];
            let row = self.offset[i];
            let mut s = x[i];
            for k in f_i..i {
                s -= self.low[row + (k - f_i)] * x[k];
            }
            x[i] = s;
        }
        for i in 0..self.n {
            x[i] /= self.d[i];
        }
        for i in (0..self.n).rev() {
            let f_i = self.first[i];
            let row = self.offset[i];
            let xi = x[i];
            for k in f_i..i {
                x[k] -= self.low[row + (k - f_i)] * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Jacobi-preconditioned conjugate gradients for SPD systems; fallback path
/// when a factorization is not available.
pub fn pcg(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n_rows();
    let diag = a.diag();
    let precond = |r: &[f64], z: &mut [f64]| {
        for i in 0..n {
            z[i] = r[i] / diag[i].max(f64::MIN_POSITIVE);
        }
    };
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let b_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::convergence("PCG: matrix not positive definite"));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm <= tol * b_norm {
            return Ok(x);
        }
        precond(&r, &mut z);
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::convergence(format!(
        "PCG did not reach tolerance {tol} in {max_iter} iterations"
    )))
}
