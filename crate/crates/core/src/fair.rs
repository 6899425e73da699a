//! Closed-form fitting of standard PCA, fair PCA and the covariance-equalizing
//! Fair PCA-S variant, plus the fair/standard trade-off representation.
//!
//! A fair projection `U` satisfies `Zᵀ Xᵀ U = 0`, where the columns of `Z`
//! are centered one-hot group indicators. Equivalently the projected
//! group-conditional means coincide. Writing `U = R Λ` with `R` an orthonormal
//! basis of the nullspace of `Zᵀ Xᵀ` turns the constrained trace maximization
//! into an ordinary eigenproblem for `Rᵀ X Xᵀ R`.

use log::warn;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector, DEFAULT_NULLSPACE_TOL};

/// Centered group indicators, `n × c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMatrix {
    pub z: Matrix,
}

impl ConstraintMatrix {
    pub fn columns(&self) -> usize {
        self.z.ncols()
    }
}

/// What to do with an attribute that has fewer than two groups present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneratePolicy {
    #[default]
    Error,
    /// Drop its (vacuous) constraint with a warning.
    Skip,
}

fn centered_indicator(codes: &[usize], group: usize) -> Vector {
    let n = codes.len() as f64;
    let count = codes.iter().filter(|&&c| c == group).count() as f64;
    let mean = count / n;
    Vector::from_iterator(
        codes.len(),
        codes
            .iter()
            .map(|&c| f64::from(u8::from(c == group)) - mean),
    )
}

/// Stacks centered one-hot columns for each listed attribute.
///
/// Only groups present in `data` get a column. An attribute with exactly two
/// groups contributes a single column (the indicator of its second group);
/// the two-column version spans the same space.
pub fn build_constraint_matrix(
    data: &Dataset,
    attributes: &[usize],
    policy: DegeneratePolicy,
) -> Result<ConstraintMatrix> {
    let n = data.n();
    let mut cols: Vec<Vector> = Vec::new();
    for &r in attributes {
        let attr = data.attribute(r)?;
        let present = attr.present_groups();
        match present.len() {
            0 | 1 => match policy {
                DegeneratePolicy::Error => {
                    return Err(Error::DegenerateAttribute {
                        attribute: attr.name.clone(),
                    })
                }
                DegeneratePolicy::Skip => {
                    warn!(
                        "attribute {} has a single group; its constraint is dropped",
                        attr.name
                    );
                }
            },
            2 => cols.push(centered_indicator(&attr.codes, present[1])),
            _ => cols.extend(present.iter().map(|&g| centered_indicator(&attr.codes, g))),
        }
    }
    let mut z = Matrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        z.set_column(j, c);
    }
    Ok(ConstraintMatrix { z })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Standard,
    Fair,
    FairS,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Standard => "standard",
            Method::Fair => "fair",
            Method::FairS => "fair_s",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "standard" => Some(Method::Standard),
            "fair" => Some(Method::Fair),
            "fair_s" => Some(Method::FairS),
            _ => None,
        }
    }
}

/// Options shared by the fitting procedures.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Subtract the per-feature training mean before fitting and transforming.
    pub center: bool,
    /// Indices into `Dataset::attributes` whose groups are obfuscated.
    pub attributes: Vec<usize>,
    /// Equal-opportunity mode: fit on the points with label 1 only.
    pub eo_mode: bool,
    /// In EO mode, impose the constraint on the positives but take the
    /// variance objective over all points.
    pub eo_constraint_only: bool,
    pub degenerate: DegeneratePolicy,
    pub nullspace_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            center: false,
            attributes: vec![0],
            eo_mode: false,
            eo_constraint_only: false,
            degenerate: DegeneratePolicy::Error,
            nullspace_tol: DEFAULT_NULLSPACE_TOL,
        }
    }
}

/// Fair PCA-S parameters actually used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairSParams {
    pub fraction: f64,
    pub l: usize,
}

/// A fitted linear projection `x ↦ Uᵀ(x − μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionModel {
    /// `d × k` with orthonormal columns.
    pub u: Matrix,
    pub method: Method,
    /// Training mean, present iff the model centers.
    pub mean: Option<Vector>,
    pub options: FitOptions,
    pub fair_s: Option<FairSParams>,
}

impl ProjectionModel {
    pub fn d(&self) -> usize {
        self.u.nrows()
    }

    pub fn k(&self) -> usize {
        self.u.ncols()
    }

    /// Applies the model's centering (if any) to `x`.
    pub fn preprocess(&self, x: &Matrix) -> Result<Matrix> {
        if x.nrows() != self.d() {
            return Err(Error::dim(format!(
                "model expects {} features, got {}",
                self.d(),
                x.nrows()
            )));
        }
        Ok(match &self.mean {
            Some(mu) => center_with(x, mu),
            None => x.clone(),
        })
    }

    /// `Uᵀ(X − μ 1ᵀ)`, `k × n′`.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.u.transpose() * self.preprocess(x)?)
    }
}

/// Free-function form of [`ProjectionModel::transform`].
pub fn transform(model: &ProjectionModel, x: &Matrix) -> Result<Matrix> {
    model.transform(x)
}

fn center_with(x: &Matrix, mu: &Vector) -> Matrix {
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        col -= mu;
    }
    out
}

/// `trace(Uᵀ X Xᵀ U)`.
pub fn trace_objective(u: &Matrix, x: &Matrix) -> f64 {
    (u.transpose() * x).norm_squared()
}

fn gram_xxt(x: &Matrix) -> Matrix {
    linalg::symmetrize(&(x * x.transpose()))
}

/// Optionally centered training matrix and its mean.
fn prepare(data: &Dataset, center: bool) -> (Matrix, Option<Vector>) {
    if center {
        let mu = data.x.column_mean();
        (center_with(&data.x, &mu), Some(mu))
    } else {
        (data.x.clone(), None)
    }
}

fn check_k(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::dim_max(format!("k = {k} must lie in 1..={d}"), d));
    }
    Ok(())
}

fn orient(mut u: Matrix) -> Matrix {
    linalg::normalize_column_signs(&mut u);
    u
}

/// Standard PCA: top-`k` eigenvectors of `X Xᵀ` (of the centered `X` when `center`).
pub fn fit_standard_pca(data: &Dataset, k: usize, center: bool) -> Result<ProjectionModel> {
    data.check_fittable()?;
    check_k(k, data.d())?;
    let (x, mean) = prepare(data, center);
    let eig = linalg::sym_eig_topk(&gram_xxt(&x), k)?;
    Ok(ProjectionModel {
        u: eig.vectors,
        method: Method::Standard,
        mean,
        options: FitOptions {
            center,
            attributes: Vec::new(),
            ..FitOptions::default()
        },
        fair_s: None,
    })
}

/// Matrices entering a fair fit: the data the objective is taken over, the
/// data the constraint is imposed on (both already centered if requested).
struct FitData {
    objective_x: Matrix,
    constraint: Dataset,
    mean: Option<Vector>,
}

fn fit_data(data: &Dataset, opts: &FitOptions) -> Result<FitData> {
    data.check_fittable()?;
    let (x, mean) = prepare(data, opts.center);
    if !opts.eo_mode {
        let constraint = Dataset {
            x: x.clone(),
            ..data.clone()
        };
        return Ok(FitData {
            objective_x: x,
            constraint,
            mean,
        });
    }
    let labels = data
        .labels
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("equal-opportunity mode needs task labels".into()))?;
    let positives: Vec<usize> = (0..data.n()).filter(|&i| labels[i] == 1).collect();
    for &r in &opts.attributes {
        let attr = data.attribute(r)?;
        for g in attr.present_groups() {
            let count = positives.iter().filter(|&&i| attr.codes[i] == g).count();
            if count < 2 {
                return Err(Error::DegenerateInput(format!(
                    "equal-opportunity mode needs at least 2 positive points in group {} of attribute {}, found {count}",
                    attr.levels[g], attr.name
                )));
            }
        }
    }
    let centered = Dataset { x, ..data.clone() };
    let constraint = centered.subset(&positives);
    let objective_x = if opts.eo_constraint_only {
        centered.x
    } else {
        constraint.x.clone()
    };
    Ok(FitData {
        objective_x,
        constraint,
        mean,
    })
}

/// Orthonormal basis of the nullspace of `Zᵀ Xᵀ` on the constraint data.
fn constraint_nullspace(fd: &FitData, opts: &FitOptions) -> Result<Matrix> {
    let z = build_constraint_matrix(&fd.constraint, &opts.attributes, opts.degenerate)?;
    let d = fd.constraint.d();
    if z.columns() == 0 {
        return Ok(Matrix::identity(d, d));
    }
    let m = z.z.transpose() * fd.constraint.x.transpose();
    linalg::nullspace_basis(&m, opts.nullspace_tol)
}

fn check_nullspace_k(k: usize, s: usize) -> Result<()> {
    if k == 0 || k > s {
        return Err(Error::dim_max(
            format!("k = {k} exceeds the dimension {s} of the space of fair projections"),
            s,
        ));
    }
    Ok(())
}

/// Fair PCA for one or more attributes with any number of groups.
///
/// Builds `Z` (from the positives only in EO mode), takes an orthonormal
/// basis `R` of the nullspace of `Zᵀ Xᵀ`, and returns `U = R Λ` with `Λ` the
/// top-`k` eigenvectors of `Rᵀ X Xᵀ R`. `k` may go up to the numerical
/// nullspace dimension, which is at least `d − Σ m_r + p`.
pub fn fit_fair_pca(data: &Dataset, k: usize, opts: &FitOptions) -> Result<ProjectionModel> {
    let fd = fit_data(data, opts)?;
    let r = constraint_nullspace(&fd, opts)?;
    check_nullspace_k(k, r.ncols())?;
    let rx = r.transpose() * &fd.objective_x;
    let eig = linalg::sym_eig_topk(&gram_xxt(&rx), k)?;
    Ok(ProjectionModel {
        u: orient(&r * eig.vectors),
        method: Method::Fair,
        mean: fd.mean,
        options: opts.clone(),
        fair_s: None,
    })
}

/// Population covariance (`1/n_g`) of the columns of `x`.
fn group_covariance(x: &Matrix) -> Matrix {
    let n = x.ncols() as f64;
    let mu = x.column_mean();
    let c = center_with(x, &mu);
    linalg::symmetrize(&(&c * c.transpose())) / n
}

/// `l = max(k, ⌊f·d⌋)`, clamped to the nullspace dimension `s`.
///
/// The floor tolerates rounding, so `f = (d − 1)/d` gives `l = d − 1`.
pub fn fair_s_dimension(k: usize, fraction: f64, d: usize, s: usize) -> usize {
    let l = k.max((fraction * d as f64 + 1e-9).floor() as usize);
    l.min(s)
}

/// Fair PCA-S: fair PCA restricted to the `l` directions of the fair subspace
/// along which the two group covariances differ least.
///
/// With `Σ_g` the group covariances, `Q` holds the eigenvectors of
/// `Rᵀ(Σ₀ − Σ₁)R` for the `l` eigenvalues smallest in magnitude, `V` the
/// top-`k` eigenvectors of `Qᵀ Rᵀ X Xᵀ R Q`, and `U = R Q V`. Uses the first
/// listed attribute, which must have exactly two groups.
pub fn fit_fair_pca_s(
    data: &Dataset,
    k: usize,
    fraction: f64,
    opts: &FitOptions,
) -> Result<ProjectionModel> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "fraction f must lie in (0, 1], got {fraction}"
        )));
    }
    let attr_idx = match opts.attributes.as_slice() {
        [a] => *a,
        other => {
            return Err(Error::InvalidInput(format!(
                "Fair PCA-S takes exactly one attribute, got {}",
                other.len()
            )))
        }
    };
    let fd = fit_data(data, opts)?;
    let attr = fd.constraint.attribute(attr_idx)?;
    let present = attr.present_groups();
    if present.len() != 2 {
        if present.len() < 2 {
            return Err(Error::DegenerateAttribute {
                attribute: attr.name.clone(),
            });
        }
        return Err(Error::InvalidInput(format!(
            "Fair PCA-S needs exactly two groups, attribute {} has {}",
            attr.name,
            present.len()
        )));
    }
    let r = constraint_nullspace(&fd, opts)?;
    let s = r.ncols();
    check_nullspace_k(k, s)?;
    let l = fair_s_dimension(k, fraction, data.d(), s);

    let cov = |g: usize| {
        let idx: Vec<usize> = (0..attr.codes.len())
            .filter(|&i| attr.codes[i] == g)
            .collect();
        group_covariance(&fd.constraint.x.select_columns(&idx))
    };
    let diff = cov(present[0]) - cov(present[1]);
    let m = r.transpose() * diff * &r;
    let all = linalg::sym_eig_all(&m)?;
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&i, &j| all.values[i].abs().total_cmp(&all.values[j].abs()));
    let q = all.vectors.select_columns(&order[..l]);

    let rq = &r * q;
    let proj = rq.transpose() * &fd.objective_x;
    let eig = linalg::sym_eig_topk(&gram_xxt(&proj), k)?;
    Ok(ProjectionModel {
        u: orient(rq * eig.vectors),
        method: Method::FairS,
        mean: fd.mean,
        options: opts.clone(),
        fair_s: Some(FairSParams { fraction, l }),
    })
}

/// Concatenated representation `(U_fairᵀ x; λ · U_stdᵀ x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffModel {
    pub fair: ProjectionModel,
    pub standard: ProjectionModel,
    pub lambda: f64,
}

impl TradeoffModel {
    pub fn new(fair: ProjectionModel, standard: ProjectionModel, lambda: f64) -> Result<Self> {
        if fair.d() != standard.d() {
            return Err(Error::dim(format!(
                "fair model has d = {}, standard model has d = {}",
                fair.d(),
                standard.d()
            )));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidInput(format!(
                "lambda must lie in [0, 1], got {lambda}"
            )));
        }
        Ok(TradeoffModel {
            fair,
            standard,
            lambda,
        })
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        TradeoffModel::new(self.fair.clone(), self.standard.clone(), lambda)
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        let top = self.fair.transform(x)?;
        let bottom = self.standard.transform(x)? * self.lambda;
        let (kf, ks) = (top.nrows(), bottom.nrows());
        let mut out = Matrix::zeros(kf + ks, x.ncols());
        out.rows_mut(0, kf).copy_from(&top);
        out.rows_mut(kf, ks).copy_from(&bottom);
        Ok(out)
    }
}

pub fn tradeoff_transform(model: &TradeoffModel, x: &Matrix) -> Result<Matrix> {
    model.transform(x)
}

/// `λ_i = (i/10)³` for `i = 0, …, 10`.
pub fn lambda_grid() -> Vec<f64> {
    (0..=10).map(|i| (f64::from(i) / 10.0).powi(3)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ds(cols: &[[f64; 2]], groups: Vec<usize>) -> Dataset {
        let x = Matrix::from_fn(2, cols.len(), |i, j| cols[j][i]);
        Dataset::from_parts(x, vec![groups], None).unwrap()
    }

    #[test]
    fn constraint_balanced_binary() {
        let d = ds(&[[0., 0.], [1., 0.], [2., 0.], [3., 0.]], vec![0, 0, 1, 1]);
        let z = build_constraint_matrix(&d, &[0], DegeneratePolicy::Error).unwrap();
        assert_eq!(z.z.as_slice(), &[-0.5, -0.5, 0.5, 0.5]);
    }

    #[test]
    fn constraint_three_groups() {
        let d = ds(&[[0., 0.], [1., 0.], [2., 0.]], vec![0, 1, 2]);
        let z = build_constraint_matrix(&d, &[0], DegeneratePolicy::Error)
            .unwrap()
            .z;
        let (a, b) = (2.0 / 3.0, -1.0 / 3.0);
        let expected = Matrix::from_row_slice(3, 3, &[a, b, b, b, a, b, b, b, a]);
        assert_abs_diff_eq!(z, expected, epsilon = 1e-15);
    }

    #[test]
    fn constraint_two_binary_attributes() {
        let x = Matrix::zeros(1, 4);
        let d = Dataset::from_parts(x, vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1]], None).unwrap();
        let z = build_constraint_matrix(&d, &[0, 1], DegeneratePolicy::Error)
            .unwrap()
            .z;
        assert_eq!(z.ncols(), 2);
        for c in z.column_iter() {
            assert_abs_diff_eq!(c.sum(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn constraint_degenerate() {
        let d = ds(&[[0., 0.], [1., 0.]], vec![1, 1]);
        assert!(matches!(
            build_constraint_matrix(&d, &[0], DegeneratePolicy::Error),
            Err(Error::DegenerateAttribute { .. })
        ));
        let z = build_constraint_matrix(&d, &[0], DegeneratePolicy::Skip).unwrap();
        assert_eq!(z.columns(), 0);
    }

    fn axis_fixture() -> Dataset {
        ds(
            &[[2., 0.], [-2., 0.], [0., 1.], [0., -1.]],
            vec![0, 0, 1, 1],
        )
    }

    #[test]
    fn standard_axis_aligned() {
        let d = axis_fixture();
        let m = fit_standard_pca(&d, 1, false).unwrap();
        assert_abs_diff_eq!(
            m.u,
            Matrix::from_column_slice(2, 1, &[1.0, 0.0]),
            epsilon = 1e-12
        );
        let ev = trace_objective(&m.u, &d.x) / d.x.norm_squared();
        assert_abs_diff_eq!(ev, 0.8, epsilon = 1e-12);
        let full = fit_standard_pca(&d, 2, false).unwrap();
        assert_abs_diff_eq!(
            trace_objective(&full.u, &d.x) / d.x.norm_squared(),
            1.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            fit_standard_pca(&d, 3, false),
            Err(Error::Dimension { max: Some(2), .. })
        ));
    }

    #[test]
    fn fair_equals_standard_when_means_match() {
        let d = axis_fixture();
        let m = fit_fair_pca(&d, 1, &FitOptions::default()).unwrap();
        assert_abs_diff_eq!(
            m.u,
            Matrix::from_column_slice(2, 1, &[1.0, 0.0]),
            epsilon = 1e-12
        );
    }

    #[test]
    fn fair_four_point_fixture() {
        let d = ds(&[[0., 0.], [2., 0.], [1., 1.], [3., 1.]], vec![0, 0, 1, 1]);
        let m = fit_fair_pca(&d, 1, &FitOptions::default()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(
            m.u,
            Matrix::from_column_slice(2, 1, &[h, -h]),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(trace_objective(&m.u, &d.x), 4.0, epsilon = 1e-12);
        // projected group means: group 0 → (0 + 2h)/2 = h, group 1 → (0 + 2h)/2 = h
        let t = m.transform(&d.x).unwrap();
        assert_abs_diff_eq!(t[(0, 0)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t[(0, 1)], 2.0 * h, epsilon = 1e-12);
        assert_abs_diff_eq!(
            (t[(0, 0)] + t[(0, 1)]) / 2.0,
            (t[(0, 2)] + t[(0, 3)]) / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn fair_k_bound_reports_max() {
        let d = ds(&[[0., 0.], [2., 0.], [1., 1.], [3., 1.]], vec![0, 0, 1, 1]);
        match fit_fair_pca(&d, 2, &FitOptions::default()) {
            Err(Error::Dimension { max, .. }) => assert_eq!(max, Some(1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn transform_identity_and_centering() {
        let d = axis_fixture();
        let model = ProjectionModel {
            u: Matrix::identity(2, 2),
            method: Method::Standard,
            mean: None,
            options: FitOptions::default(),
            fair_s: None,
        };
        assert_eq!(model.transform(&d.x).unwrap(), d.x);
        let centered = fit_standard_pca(&d, 2, true).unwrap();
        let mu = Matrix::from_column_slice(2, 1, centered.mean.as_ref().unwrap().as_slice());
        assert_abs_diff_eq!(
            centered.transform(&mu).unwrap(),
            Matrix::zeros(2, 1),
            epsilon = 1e-15
        );
        assert!(matches!(
            centered.transform(&Matrix::zeros(3, 1)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn eo_mode_uses_positives() {
        let x = Matrix::from_row_slice(
            2,
            8,
            &[
                0., 2., 1., 3., 9., -9., 5., 5., 0., 0., 1., 1., 7., 7., -3., 4.,
            ],
        );
        let data = Dataset::from_parts(
            x,
            vec![vec![0, 0, 1, 1, 0, 0, 1, 1]],
            Some(vec![1, 1, 1, 1, 0, 0, 0, 0]),
        )
        .unwrap();
        let opts = FitOptions {
            eo_mode: true,
            ..FitOptions::default()
        };
        let m = fit_fair_pca(&data, 1, &opts).unwrap();
        // positives are the four-point fixture above
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(
            m.u,
            Matrix::from_column_slice(2, 1, &[h, -h]),
            epsilon = 1e-12
        );
        let none = Dataset {
            labels: None,
            ..data.clone()
        };
        assert!(fit_fair_pca(&none, 1, &opts).is_err());
        let sparse = Dataset {
            labels: Some(vec![1, 0, 1, 1, 0, 0, 0, 0]),
            ..data
        };
        assert!(matches!(
            fit_fair_pca(&sparse, 1, &opts),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn tradeoff_blocks() {
        let d = ds(&[[0., 0.], [2., 0.], [1., 1.], [3., 1.]], vec![0, 0, 1, 1]);
        let fair = fit_fair_pca(&d, 1, &FitOptions::default()).unwrap();
        let std = fit_standard_pca(&d, 1, false).unwrap();
        let t0 = TradeoffModel::new(fair.clone(), std.clone(), 0.0)
            .unwrap()
            .transform(&d.x)
            .unwrap();
        assert!(t0.row(1).iter().all(|&v| v == 0.0));
        assert_eq!(t0.rows(0, 1), fair.transform(&d.x).unwrap().rows(0, 1));
        let t1 = TradeoffModel::new(fair, std.clone(), 1.0)
            .unwrap()
            .transform(&d.x)
            .unwrap();
        assert_eq!(t1.rows(1, 1), std.transform(&d.x).unwrap().rows(0, 1));
    }

    #[test]
    fn lambda_grid_values() {
        let g = lambda_grid();
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.0);
        assert_abs_diff_eq!(g[5], 0.125, epsilon = 1e-15);
        assert_eq!(g[10], 1.0);
    }

    #[test]
    fn fair_s_dimension_rule() {
        assert_eq!(fair_s_dimension(2, 0.5, 10, 9), 5);
        assert_eq!(fair_s_dimension(7, 0.5, 10, 9), 7);
        assert_eq!(fair_s_dimension(2, 1.0, 10, 9), 9);
        assert_eq!(fair_s_dimension(2, 0.85, 10, 9), 8);
    }
}
