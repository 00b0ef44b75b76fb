//! Direct sparse solves through faer's supernodal LU (COLAMD fill-reducing
//! ordering, partial pivoting).

use faer::sparse::{SparseRowMat, SymbolicSparseRowMat};
use faer::Mat;
use faer::prelude::Solve;
use faer::sparse::linalg::LuError;

use super::SolveError;
use crate::assembly::{CsrMatrix, LinearSystem};

/// Backward-error bound every accepted solve must meet.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

fn to_faer(a: &CsrMatrix) -> Result<SparseRowMat<usize, f64>, SolveError> {
    let symbolic = SymbolicSparseRowMat::new_checked(
        a.nrows(),
        a.ncols(),
        a.row_offsets().to_vec(),
        None,
        a.col_indices().to_vec(),
    );
    Ok(SparseRowMat::new(symbolic, a.values().to_vec()))
}

/// `||Ax - b||_inf / (||A||_inf ||x||_inf + ||b||_inf)`.
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r = ax.iter().zip(b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let denom = a.norm_inf() * xn + bn;
    if denom == 0.0 {
        r
    } else {
        r / denom
    }
}

/// Solves `system.matrix * x = system.rhs`. One step of iterative refinement
/// is taken if the first solve misses [`RESIDUAL_TOLERANCE`].
pub fn sparse_lu_solve(system: &LinearSystem) -> Result<Vec<f64>, SolveError> {
    let a = &system.matrix;
    if a.nrows() != a.ncols() {
        return Err(SolveError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lu = to_faer(a)?.sp_lu().map_err(|e| match e {
        LuError::SymbolicSingular { index } => SolveError::Singular { row: index },
        LuError::Generic(err) => SolveError::Factorization(format!("{err:?}")),
    })?;

    let solve = |rhs: &[f64]| -> Vec<f64> {
        let mut b = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
        lu.solve_in_place(b.as_mut());
        (0..n).map(|i| b[(i, 0)]).collect()
    };

    let mut x = solve(&system.rhs);
    if let Some(row) = x.iter().position(|v| !v.is_finite()) {
        return Err(SolveError::Singular { row });
    }
    let mut rel = relative_residual(a, &x, &system.rhs);
    if rel >= RESIDUAL_TOLERANCE {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = system.rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        let dx = solve(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        rel = relative_residual(a, &x, &system.rhs);
    }
    if !(rel < RESIDUAL_TOLERANCE) {
        return Err(SolveError::Inaccurate { relative_residual: rel });
    }
    Ok(x)
}
