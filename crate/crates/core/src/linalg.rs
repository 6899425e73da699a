//! Dense symmetric eigensolvers and SVD nullspaces with fixed sign conventions.
//!
//! Every eigenvector returned here is normalised so that its entry of largest
//! absolute value is non-negative (near-ties resolved toward the lowest index).
//! Eigenvalues come back in non-increasing order; equal eigenvalues keep the
//! order produced by the underlying solver, which is deterministic, so a
//! degenerate eigenspace yields an arbitrary but reproducible basis.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Dense real matrix. Data matrices are stored `d × n`, one column per point.
pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Default relative singular-value threshold for [`nullspace_basis`].
pub const DEFAULT_NULLSPACE_TOL: f64 = 1e-10;
/// Ridge added to the right-hand matrix of the generalized eigenproblem.
pub const DEFAULT_JITTER: f64 = 1e-5;

/// Top eigenpairs of a symmetric (or symmetric-definite) problem.
#[derive(Debug, Clone, PartialEq)]
pub struct EigResult {
    /// Sorted non-increasing.
    pub values: Vector,
    /// Column `i` belongs to `values[i]`.
    pub vectors: Matrix,
}

pub(crate) fn ensure_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} contains non-finite entries"
        )))
    }
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}

/// Relative margin within which entry magnitudes count as tied for the sign
/// convention.
pub const SIGN_TIE_TOL: f64 = 1e-12;

/// Flips `v` so its largest-magnitude entry is non-negative. Entries within
/// [`SIGN_TIE_TOL`] (relative) of the largest magnitude tie, and the first
/// of them decides.
pub fn normalize_sign(mut v: nalgebra::DVectorViewMut<'_, f64>) {
    let top = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if let Some(lead) = v.iter().find(|x| x.abs() >= top * (1.0 - SIGN_TIE_TOL)) {
        if *lead < 0.0 {
            v.neg_mut();
        }
    }
}

pub(crate) fn normalize_column_signs(m: &mut Matrix) {
    for j in 0..m.ncols() {
        normalize_sign(m.column_mut(j));
    }
}

/// Full eigendecomposition of a symmetric matrix, sorted non-increasing.
pub fn sym_eig_all(a: &Matrix) -> Result<EigResult> {
    if a.nrows() != a.ncols() {
        return Err(Error::dim(format!(
            "matrix is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite(a, "matrix")?;
    let d = a.nrows();
    if d == 0 {
        return Ok(EigResult {
            values: Vector::zeros(0),
            vectors: Matrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(symmetrize(a));
    let mut order: Vec<usize> = (0..d).collect();
    // stable sort keeps solver order on ties
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = Vector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = eig.eigenvectors.select_columns(&order);
    normalize_column_signs(&mut vectors);
    Ok(EigResult { values, vectors })
}

/// The `k` largest eigenpairs of the symmetric matrix `a`.
///
/// `a` is symmetrized before solving.
pub fn sym_eig_topk(a: &Matrix, k: usize) -> Result<EigResult> {
    if a.nrows() != a.ncols() {
        return Err(Error::dim(format!(
            "matrix is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite(a, "matrix")?;
    let d = a.nrows();
    if k == 0 || k > d {
        return Err(Error::dim_max(format!("k = {k} must lie in 1..={d}"), d));
    }
    let all = sym_eig_all(a)?;
    Ok(EigResult {
        values: all.values.rows(0, k).into_owned(),
        vectors: all.vectors.columns(0, k).into_owned(),
    })
}

/// Orthonormal basis (as columns) of `{v : M v = 0}`.
///
/// Singular values `σ ≤ rel_tol · σ_max` count as zero; if `M` is identically
/// zero the basis is the identity. The row space is taken from the SVD and
/// its orthogonal complement is completed with Householder reflections, so
/// the returned basis is `d × (d − rank)` and may have zero columns.
pub fn nullspace_basis(m: &Matrix, rel_tol: f64) -> Result<Matrix> {
    ensure_finite(m, "matrix")?;
    if rel_tol.is_nan() || rel_tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "rel_tol must be positive, got {rel_tol}"
        )));
    }
    let d = m.ncols();
    if m.nrows() == 0 || d == 0 {
        return Ok(Matrix::identity(d, d));
    }
    // The row space of M is the column space of Mᵀ. nalgebra's bidiagonal
    // SVD can return factors that do not reconstruct rank-deficient inputs,
    // so the singular vectors come from a one-sided Jacobi SVD instead, after
    // a QR reduction when M has more rows than columns.
    let reduced = if m.nrows() > d {
        m.clone().qr().r()
    } else {
        m.clone()
    };
    let (singular_values, row_basis) = jacobi_left_svd(reduced.transpose());
    let sigma_max = singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    if sigma_max == 0.0 {
        return Ok(Matrix::identity(d, d));
    }
    let cutoff = rel_tol * sigma_max;
    let keep: Vec<usize> = singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cutoff)
        .map(|(i, _)| i)
        .collect();
    let row_space = Matrix::from_fn(d, keep.len(), |i, j| {
        row_basis[(i, keep[j])] / singular_values[keep[j]]
    });
    let basis = orthogonal_complement(&row_space);
    let residual = if basis.ncols() == 0 {
        0.0
    } else {
        (m * &basis).amax()
    };
    if residual > 1e3 * f64::EPSILON * sigma_max * (d as f64).sqrt() + cutoff * 10.0 {
        return Err(Error::Numerical(format!(
            "nullspace residual {residual:e} too large"
        )));
    }
    Ok(basis)
}

/// One-sided (Hestenes) Jacobi orthogonalization of the columns of `a`.
///
/// Returns the column norms (the singular values of `a`) and the rotated
/// columns, which are mutually orthogonal and equal `u_i σ_i`.
fn jacobi_left_svd(mut a: Matrix) -> (Vector, Matrix) {
    const MAX_SWEEPS: usize = 100;
    let c = a.ncols();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let ap = a.column(p).into_owned();
                let aq = a.column(q).into_owned();
                a.set_column(p, &(&ap * cs - &aq * sn));
                a.set_column(q, &(&ap * sn + &aq * cs));
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = Vector::from_iterator(c, a.column_iter().map(|col| col.norm()));
    (sigma, a)
}

/// Orthonormal basis of the orthogonal complement of the column span of `w`
/// (assumed to have orthonormal, linearly independent columns).
fn orthogonal_complement(w: &Matrix) -> Matrix {
    let d = w.nrows();
    let r = w.ncols();
    let mut a = w.clone();
    // Householder vectors: H_j = I - 2 v_j v_jᵀ, with v_j supported on j..d
    let mut reflectors: Vec<Vector> = Vec::with_capacity(r);
    for j in 0..r {
        let x = a.view((j, j), (d - j, 1)).column(0).into_owned();
        let norm = x.norm();
        let mut v = x;
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vn = v.norm();
        if vn > 0.0 {
            v /= vn;
        }
        // apply to remaining columns
        for c in j..r {
            let mut col = a.view_mut((j, c), (d - j, 1));
            let dot = v.dot(&col.column(0));
            col.column_mut(0).axpy(-2.0 * dot, &v, 1.0);
        }
        let mut full = Vector::zeros(d);
        full.rows_mut(j, d - j).copy_from(&v);
        reflectors.push(full);
    }
    let s = d - r;
    let mut out = Matrix::zeros(d, s);
    for (c, j) in (r..d).enumerate() {
        let mut e = Vector::zeros(d);
        e[j] = 1.0;
        for v in reflectors.iter().rev() {
            let dot = v.dot(&e);
            e.axpy(-2.0 * dot, v, 1.0);
        }
        out.set_column(c, &e);
    }
    out
}

/// The `k` largest eigenpairs of `A v = λ (B + jitter·I) v`.
///
/// The jittered `B` is Cholesky-factored as `L Lᵀ` and the problem reduced to
/// the standard symmetric problem for `L⁻¹ A L⁻ᵀ`. Returned vectors are
/// orthonormal in the `(B + jitter·I)` inner product.
pub fn gen_sym_eig_topk(a: &Matrix, b: &Matrix, k: usize, jitter: f64) -> Result<EigResult> {
    let p = a.nrows();
    if a.ncols() != p || b.nrows() != p || b.ncols() != p {
        return Err(Error::dim(format!(
            "generalized problem needs equal square matrices, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    ensure_finite(a, "A")?;
    ensure_finite(b, "B")?;
    if !jitter.is_finite() || jitter < 0.0 {
        return Err(Error::InvalidInput(format!(
            "jitter must be a finite non-negative number, got {jitter}"
        )));
    }
    if k == 0 || k > p {
        return Err(Error::dim_max(format!("k = {k} must lie in 1..={p}"), p));
    }
    let mut bj = symmetrize(b);
    for i in 0..p {
        bj[(i, i)] += jitter;
    }
    let chol = Cholesky::new(bj)
        .ok_or_else(|| Error::Numerical(format!("B + {jitter:e}·I is not positive definite")))?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(&symmetrize(a))
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let std = sym_eig_topk(&c, k)?;
    let mut vectors = l
        .transpose()
        .solve_upper_triangular(&std.vectors)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    normalize_column_signs(&mut vectors);
    Ok(EigResult {
        values: std.values,
        vectors,
    })
}
