//! Kernel functions and fair kernel PCA.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::fair::{build_constraint_matrix, DegeneratePolicy};
use crate::linalg::{self, Matrix, DEFAULT_JITTER, DEFAULT_NULLSPACE_TOL};
use crate::par::{self, Parallelism};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    /// `1 / (d · Var(X))` over the flattened training matrix.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    /// `exp(−γ ‖x − y‖²)`
    Gaussian(Gamma),
    /// `xᵀ y`
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
}

impl KernelSpec {
    pub fn gaussian(gamma: Gamma) -> Self {
        KernelSpec {
            kind: KernelKind::Gaussian(gamma),
        }
    }

    pub fn linear() -> Self {
        KernelSpec {
            kind: KernelKind::Linear,
        }
    }

    /// Replaces an automatic bandwidth with its value on `x` (`d × n`).
    pub fn resolve(&self, x: &Matrix) -> Result<KernelSpec> {
        match self.kind {
            KernelKind::Gaussian(Gamma::Auto) => {
                Ok(KernelSpec::gaussian(Gamma::Fixed(auto_gamma(x)?)))
            }
            KernelKind::Gaussian(Gamma::Fixed(g)) if !(g > 0.0 && g.is_finite()) => Err(
                Error::InvalidInput(format!("gamma must be positive, got {g}")),
            ),
            _ => Ok(*self),
        }
    }

    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            KernelKind::Gaussian(Gamma::Fixed(g)) => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-g * d2).exp()
            }
            KernelKind::Gaussian(Gamma::Auto) => {
                unreachable!("bandwidth resolved before evaluation")
            }
        }
    }
}

/// `1 / (d · Var)` with the population variance of all entries of `x`.
pub fn auto_gamma(x: &Matrix) -> Result<f64> {
    let count = x.len() as f64;
    if count == 0.0 {
        return Err(Error::DegenerateInput("empty matrix".into()));
    }
    let mean = x.sum() / count;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count;
    if var <= 0.0 {
        return Err(Error::DegenerateInput(
            "training data has zero variance; set gamma explicitly".into(),
        ));
    }
    Ok(1.0 / (x.nrows() as f64 * var))
}

/// Kernel matrix `K[i, j] = k(aᵢ, bⱼ)` for columns of `a` (`d × n₁`) and `b` (`d × n₂`).
///
/// An automatic bandwidth is resolved on `a`.
pub fn gram(spec: &KernelSpec, a: &Matrix, b: &Matrix) -> Result<Matrix> {
    gram_with(spec, a, b, Parallelism::default())
}

pub fn gram_with(spec: &KernelSpec, a: &Matrix, b: &Matrix, mode: Parallelism) -> Result<Matrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::dim(format!(
            "kernel inputs have {} and {} features",
            a.nrows(),
            b.nrows()
        )));
    }
    linalg::ensure_finite(a, "kernel input")?;
    linalg::ensure_finite(b, "kernel input")?;
    let spec = spec.resolve(a)?;
    let (n1, n2) = (a.ncols(), b.ncols());
    let mut out = Matrix::zeros(n1, n2);
    // column-major storage: chunk j is column j of the result
    par::for_each_chunk_mut(out.as_mut_slice(), n1, mode, |j, col| {
        let bj = b.column(j);
        for (i, slot) in col.iter_mut().enumerate() {
            *slot = spec.eval(a.column(i).as_slice(), bj.as_slice());
        }
    });
    Ok(out)
}

/// Fitted fair kernel PCA.
///
/// The training embedding is `Λᵀ Rᵀ K`; new points embed as `Λᵀ Rᵀ K̂` with
/// `K̂` the kernel between training and new points, so the training matrix is
/// kept (memory `O(d n)`).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    /// `s × k`, orthonormal in the `Rᵀ K R + jitter·I` inner product.
    pub lambda: Matrix,
    /// `n × s`, orthonormal basis of the nullspace of `Zᵀ K`.
    pub r: Matrix,
    pub train_x: Matrix,
    /// Bandwidth already resolved.
    pub spec: KernelSpec,
    pub attributes: Vec<usize>,
    pub jitter: f64,
}

impl KernelModel {
    pub fn k(&self) -> usize {
        self.lambda.ncols()
    }

    pub fn d(&self) -> usize {
        self.train_x.nrows()
    }

    /// `R Λ`, `n × k`.
    pub fn coefficients(&self) -> Matrix {
        &self.r * &self.lambda
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.nrows() != self.d() {
            return Err(Error::dim(format!(
                "model expects {} features, got {}",
                self.d(),
                x.nrows()
            )));
        }
        if x.ncols() == 0 {
            return Ok(Matrix::zeros(self.k(), 0));
        }
        let khat = gram(&self.spec, &self.train_x, x)?;
        Ok(self.coefficients().transpose() * khat)
    }
}

pub fn kernel_transform(model: &KernelModel, x: &Matrix) -> Result<Matrix> {
    model.transform(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelFitOptions {
    pub attributes: Vec<usize>,
    pub jitter: f64,
    pub degenerate: DegeneratePolicy,
    pub nullspace_tol: f64,
}

impl Default for KernelFitOptions {
    fn default() -> Self {
        KernelFitOptions {
            attributes: vec![0],
            jitter: DEFAULT_JITTER,
            degenerate: DegeneratePolicy::Error,
            nullspace_tol: DEFAULT_NULLSPACE_TOL,
        }
    }
}

/// Fair kernel PCA on the (uncentered) kernel matrix of the training data.
///
/// `R` spans the nullspace of `Zᵀ K` and `Λ` holds the top-`k` solutions of
/// `Rᵀ K K R Λ = (Rᵀ K R + jitter·I) Λ W`.
pub fn fit_fair_kernel_pca(
    data: &Dataset,
    k: usize,
    spec: &KernelSpec,
    opts: &KernelFitOptions,
) -> Result<KernelModel> {
    data.check_fittable()?;
    let spec = spec.resolve(&data.x)?;
    let kmat = linalg::symmetrize(&gram(&spec, &data.x, &data.x)?);
    let z = build_constraint_matrix(data, &opts.attributes, opts.degenerate)?;
    let n = data.n();
    let r = if z.columns() == 0 {
        Matrix::identity(n, n)
    } else {
        linalg::nullspace_basis(&(z.z.transpose() * &kmat), opts.nullspace_tol)?
    };
    let s = r.ncols();
    if k == 0 || k > s {
        return Err(Error::dim_max(
            format!("k = {k} exceeds the fair kernel subspace dimension {s}"),
            s,
        ));
    }
    let kr = &kmat * &r;
    let a = kr.transpose() * &kr;
    let b = r.transpose() * &kr;
    let eig = linalg::gen_sym_eig_topk(&a, &b, k, opts.jitter)?;
    Ok(KernelModel {
        lambda: eig.vectors,
        r,
        train_x: data.x.clone(),
        spec,
        attributes: opts.attributes.clone(),
        jitter: opts.jitter,
    })
}
