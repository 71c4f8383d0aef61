//! Compressed sparse row matrices, the Krylov solver for the per-step
//! systems, and a small dense LU used as a verification oracle.
//!
//! The per-step system has an SPD symmetric part plus a skew contribution
//! from the cross term, so the driver is restarted GMRES with diagonal
//! (Jacobi) preconditioning applied from the right; right preconditioning
//! keeps the monitored residual equal to the true residual of the original
//! system. Convergence is always confirmed against a freshly recomputed
//! residual, never the Arnoldi recurrence value alone. Everything runs on a
//! single thread and is bitwise deterministic for fixed inputs.

use crate::error::Error;

/// Sparse matrix in CSR form with sorted, duplicate-free column indices.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, Error> {
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({r},{c}) outside {nrows}x{ncols} matrix"
                )));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
        for &(r, c, v) in &sorted {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; nrows + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx: merged.iter().map(|t| t.1).collect(),
            values: merged.iter().map(|t| t.2).collect(),
        })
    }

    /// Construct directly from raw CSR arrays (used by the assemblers,
    /// which produce already-sorted patterns).
    pub fn from_raw(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_ptr.len(), nrows + 1);
        debug_assert_eq!(col_idx.len(), values.len());
        debug_assert_eq!(*row_ptr.last().unwrap(), col_idx.len());
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Entry (i, j), zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => 0.0,
        }
    }

    /// Value slot of entry (i, j) if present in the sparsity pattern.
    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].binary_search(&j).ok().map(|p| lo + p)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                triplets.push((self.col_idx[p], i, self.values[p]));
            }
        }
        CsrMatrix::from_triplets(self.ncols, self.nrows, &triplets).expect("valid transpose")
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                *d.at_mut(i, self.col_idx[p]) += self.values[p];
            }
        }
        d
    }
}

/// y = A x.
pub fn spmv(a: &CsrMatrix, x: &[f64], y: &mut [f64]) -> Result<(), Error> {
    if x.len() != a.ncols || y.len() != a.nrows {
        return Err(Error::InvalidArgument(format!(
            "spmv dimension mismatch: A is {}x{}, x has {}, y has {}",
            a.nrows,
            a.ncols,
            x.len(),
            y.len()
        )));
    }
    for i in 0..a.nrows {
        let mut acc = 0.0;
        for p in a.row_ptr[i]..a.row_ptr[i + 1] {
            acc += a.values[p] * x[a.col_idx[p]];
        }
        y[i] = acc;
    }
    Ok(())
}

/// Apply a scalar V x V matrix to each of the three interleaved components
/// of a vertex-major vector of length 3V.
pub fn spmv_blockdiag3(scalar: &CsrMatrix, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), 3 * scalar.ncols);
    debug_assert_eq!(y.len(), 3 * scalar.nrows);
    for i in 0..scalar.nrows {
        let mut acc = [0.0; 3];
        for p in scalar.row_ptr[i]..scalar.row_ptr[i + 1] {
            let v = scalar.values[p];
            let base = 3 * scalar.col_idx[p];
            acc[0] += v * x[base];
            acc[1] += v * x[base + 1];
            acc[2] += v * x[base + 2];
        }
        y[3 * i] = acc[0];
        y[3 * i + 1] = acc[1];
        y[3 * i + 2] = acc[2];
    }
}

/// Outcome of an iterative solve.
#[derive(Clone, Copy, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Iterative solver controls. Defaults: tol 1e-10, max_iter 10000,
/// restart length 100.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 10_000,
            restart: 100,
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solve A x = b by restarted GMRES with Jacobi preconditioning from the
/// right. Requires the symmetric part of A to be positive definite (true
/// for every composed per-step system). Non-convergence is an error that
/// carries the report.
pub fn solve(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport), Error> {
    if a.nrows != a.ncols {
        return Err(Error::InvalidArgument("solve requires a square matrix".into()));
    }
    if b.len() != a.nrows {
        return Err(Error::InvalidArgument(format!(
            "rhs length {} does not match matrix size {}",
            b.len(),
            a.nrows
        )));
    }
    let n = a.nrows;
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveReport {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        ));
    }

    let mut inv_diag = a.diagonal();
    for d in &mut inv_diag {
        *d = if d.abs() > 0.0 { 1.0 / *d } else { 1.0 };
    }

    let m = opts.restart.max(1);
    let mut x = vec![0.0; n];
    let mut total_iters = 0usize;
    let mut residual = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    // Arnoldi basis and Hessenberg factors (Givens form)
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut rel_res;

    loop {
        spmv(a, &x, &mut residual)?;
        for i in 0..n {
            residual[i] = b[i] - residual[i];
        }
        let beta = norm2(&residual);
        rel_res = beta / b_norm;
        if rel_res <= opts.tol {
            return Ok((
                x,
                SolveReport {
                    iterations: total_iters,
                    relative_residual: rel_res,
                    converged: true,
                },
            ));
        }
        if total_iters >= opts.max_iter {
            return Err(Error::SolveFailed(SolveReport {
                iterations: total_iters,
                relative_residual: rel_res,
                converged: false,
            }));
        }

        basis.clear();
        basis.push(residual.iter().map(|r| r / beta).collect());
        let mut h = vec![0.0f64; (m + 1) * m]; // column-major (m+1) x m
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![0.0f64; m];
        let mut g = vec![0.0f64; m + 1];
        g[0] = beta;
        let mut k_used = 0;

        for k in 0..m {
            if total_iters >= opts.max_iter {
                break;
            }
            total_iters += 1;
            // w = A M^{-1} v_k
            for i in 0..n {
                z[i] = inv_diag[i] * basis[k][i];
            }
            spmv(a, &z, &mut w)?;
            // modified Gram-Schmidt
            for j in 0..=k {
                let mut dot = 0.0;
                for i in 0..n {
                    dot += w[i] * basis[j][i];
                }
                h[j + k * (m + 1)] = dot;
                for i in 0..n {
                    w[i] -= dot * basis[j][i];
                }
            }
            let h_next = norm2(&w);
            h[(k + 1) + k * (m + 1)] = h_next;
            // apply accumulated Givens rotations to the new column
            for j in 0..k {
                let (c, s) = (cs[j], sn[j]);
                let h0 = h[j + k * (m + 1)];
                let h1 = h[(j + 1) + k * (m + 1)];
                h[j + k * (m + 1)] = c * h0 + s * h1;
                h[(j + 1) + k * (m + 1)] = -s * h0 + c * h1;
            }
            let h0 = h[k + k * (m + 1)];
            let denom = (h0 * h0 + h_next * h_next).sqrt();
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h0 / denom, h_next / denom) };
            cs[k] = c;
            sn[k] = s;
            h[k + k * (m + 1)] = c * h0 + s * h_next;
            h[(k + 1) + k * (m + 1)] = 0.0;
            g[k + 1] = -s * g[k];
            g[k] *= c;
            k_used = k + 1;

            let est = g[k + 1].abs() / b_norm;
            if h_next == 0.0 || est <= opts.tol {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }

        if k_used > 0 {
            // back-substitute the k_used x k_used triangular system
            let mut y = vec![0.0; k_used];
            for row in (0..k_used).rev() {
                let mut acc = g[row];
                for col in (row + 1)..k_used {
                    acc -= h[row + col * (m + 1)] * y[col];
                }
                y[row] = acc / h[row + row * (m + 1)];
            }
            // x += M^{-1} (V y)
            for (col, yv) in y.iter().enumerate() {
                for i in 0..n {
                    x[i] += inv_diag[i] * basis[col][i] * yv;
                }
            }
        }
        // loop re-enters with a freshly computed true residual
    }
}

/// Dense row-major matrix for the verification oracles and small tests.
#[derive(Clone, Debug)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols);
            data.extend_from_slice(r);
        }
        DenseMatrix { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                (0..self.ncols)
                    .map(|j| self.at(i, j) * x[j])
                    .sum()
            })
            .collect()
    }
}

/// Direct solve of a small dense system by LU with partial pivoting.
pub fn dense_lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, Error> {
    if a.nrows != a.ncols {
        return Err(Error::InvalidArgument("dense solve requires a square matrix".into()));
    }
    if b.len() != a.nrows {
        return Err(Error::InvalidArgument("rhs length mismatch in dense solve".into()));
    }
    let n = a.nrows;
    let mut lu = a.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = lu[perm[col] * n + col].abs();
        for row in (col + 1)..n {
            let v = lu[perm[row] * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val == 0.0 {
            return Err(Error::SingularMatrix);
        }
        perm.swap(col, pivot_row);
        let p = perm[col];
        for row in (col + 1)..n {
            let r = perm[row];
            let factor = lu[r * n + col] / lu[p * n + col];
            lu[r * n + col] = factor;
            for j in (col + 1)..n {
                lu[r * n + j] -= factor * lu[p * n + j];
            }
        }
    }

    // forward substitution (unit lower triangular)
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut acc = b[perm[i]];
        for j in 0..i {
            acc -= lu[perm[i] * n + j] * y[j];
        }
        y[i] = acc;
    }
    // back substitution
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for j in (i + 1)..n {
            acc -= lu[perm[i] * n + j] * x[j];
        }
        x[i] = acc / lu[perm[i] * n + i];
    }
    Ok(x)
}
