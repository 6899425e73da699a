//! Utility and fairness metrics for representations.
//!
//! Explained variance, squared MMD between the group-conditional embeddings,
//! the error of a linear probe predicting the group (linear inseparability),
//! and accuracy / demographic-parity / equal-opportunity gaps of a
//! downstream logistic-regression classifier.

use std::fmt;

use log::warn;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::fair::{ProjectionModel, TradeoffModel};
use crate::kernel::KernelModel;
use crate::linalg::{Matrix, Vector};
use crate::par::{self, Parallelism};

/// `1/(C·n)` for `C = 1/(2 · n · 0.01)`; the regularization weight of the
/// mean-loss objective used by [`train_logreg`].
pub const DEFAULT_REG: f64 = 0.02;
pub const LOGREG_GRAD_TOL: f64 = 1e-6;
pub const LOGREG_MAX_ITER: usize = 10_000;
/// Pooled points used for the median bandwidth heuristic.
pub const MEDIAN_SUBSAMPLE: usize = 1000;

/// `trace(Uᵀ X Xᵀ U) / trace(X Xᵀ)`.
pub fn explained_variance(u: &Matrix, x: &Matrix) -> Result<f64> {
    if u.nrows() != x.nrows() {
        return Err(Error::dim(format!(
            "U has {} rows, X has {}",
            u.nrows(),
            x.nrows()
        )));
    }
    let total = x.norm_squared();
    if total == 0.0 {
        return Err(Error::DegenerateInput("data matrix is zero".into()));
    }
    Ok((u.transpose() * x).norm_squared() / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MmdEstimator {
    /// U-statistic, drops the diagonal terms; may be slightly negative.
    #[default]
    Unbiased,
    /// V-statistic, keeps the diagonal terms.
    Biased,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Bandwidth {
    /// `γ = 1 / (2 · median²)` of pooled pairwise distances.
    #[default]
    Median,
    /// `γ = 1 / (k · Var)` of the flattened pooled embedding.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MmdOptions {
    pub estimator: MmdEstimator,
    pub bandwidth: Bandwidth,
    pub parallelism: Parallelism,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn median_gamma(a: &Matrix, b: &Matrix) -> f64 {
    let total = a.ncols() + b.ncols();
    let take = total.min(MEDIAN_SUBSAMPLE);
    let point = |i: usize| {
        if i < a.ncols() {
            a.column(i)
        } else {
            b.column(i - a.ncols())
        }
    };
    let idx: Vec<usize> = (0..take).map(|t| t * total / take).collect();
    let mut dists = Vec::with_capacity(take * (take - 1) / 2);
    for (p, &i) in idx.iter().enumerate() {
        for &j in &idx[p + 1..] {
            dists.push(sq_dist(point(i).as_slice(), point(j).as_slice()).sqrt());
        }
    }
    let m = dists.len();
    let median = if m == 0 {
        0.0
    } else if m % 2 == 1 {
        *dists.select_nth_unstable_by(m / 2, f64::total_cmp).1
    } else {
        let hi = *dists.select_nth_unstable_by(m / 2, f64::total_cmp).1;
        let lo = dists[..m / 2]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    };
    if median > 0.0 {
        1.0 / (2.0 * median * median)
    } else {
        1.0
    }
}

/// Canonical argument order so that `mmd2(a, b) == mmd2(b, a)` bitwise.
fn canonical<'a>(a: &'a Matrix, b: &'a Matrix) -> (&'a Matrix, &'a Matrix) {
    let ord = a.ncols().cmp(&b.ncols()).then_with(|| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    if ord.is_gt() {
        (b, a)
    } else {
        (a, b)
    }
}

/// Sum of `exp(−γ‖aᵢ − aⱼ‖²)` over `i < j`.
fn within_sum(a: &Matrix, gamma: f64, mode: Parallelism) -> f64 {
    let n = a.ncols();
    par::map_indices(n, mode, |i| {
        let ai = a.column(i);
        ((i + 1)..n)
            .map(|j| (-gamma * sq_dist(ai.as_slice(), a.column(j).as_slice())).exp())
            .sum::<f64>()
    })
    .into_iter()
    .sum()
}

fn cross_sum(a: &Matrix, b: &Matrix, gamma: f64, mode: Parallelism) -> f64 {
    par::map_indices(a.ncols(), mode, |i| {
        let ai = a.column(i);
        b.column_iter()
            .map(|bj| (-gamma * sq_dist(ai.as_slice(), bj.as_slice())).exp())
            .sum::<f64>()
    })
    .into_iter()
    .sum()
}

/// Squared MMD with a Gaussian kernel between the columns of `a` and `b`.
pub fn mmd2(a: &Matrix, b: &Matrix, opts: &MmdOptions) -> Result<f64> {
    if a.nrows() != b.nrows() {
        return Err(Error::dim(format!(
            "samples have {} and {} dimensions",
            a.nrows(),
            b.nrows()
        )));
    }
    if a.ncols() < 2 || b.ncols() < 2 {
        return Err(Error::DegenerateInput(
            "each group needs at least 2 points".into(),
        ));
    }
    crate::linalg::ensure_finite(a, "sample")?;
    crate::linalg::ensure_finite(b, "sample")?;
    let (a, b) = canonical(a, b);
    let gamma = match opts.bandwidth {
        Bandwidth::Median => median_gamma(a, b),
        Bandwidth::Auto => {
            let mut pooled = Matrix::zeros(a.nrows(), a.ncols() + b.ncols());
            pooled.columns_mut(0, a.ncols()).copy_from(a);
            pooled.columns_mut(a.ncols(), b.ncols()).copy_from(b);
            crate::kernel::auto_gamma(&pooled)?
        }
        Bandwidth::Fixed(g) if g > 0.0 && g.is_finite() => g,
        Bandwidth::Fixed(g) => {
            return Err(Error::InvalidInput(format!(
                "gamma must be positive, got {g}"
            )))
        }
    };
    let mode = opts.parallelism;
    let (n0, n1) = (a.ncols() as f64, b.ncols() as f64);
    let xx = 2.0 * within_sum(a, gamma, mode);
    let yy = 2.0 * within_sum(b, gamma, mode);
    let xy = cross_sum(a, b, gamma, mode);
    Ok(match opts.estimator {
        MmdEstimator::Unbiased => {
            xx / (n0 * (n0 - 1.0)) + yy / (n1 * (n1 - 1.0)) - 2.0 * xy / (n0 * n1)
        }
        MmdEstimator::Biased => {
            (xx + n0) / (n0 * n0) + (yy + n1) / (n1 * n1) - 2.0 * xy / (n0 * n1)
        }
    })
}

/// L2-regularized logistic regression `P(y = 1 | x) = σ(wᵀx + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub weights: Vector,
    pub bias: f64,
    pub reg_strength: f64,
    /// Objective value at every iteration checkpoint (non-increasing).
    pub loss_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl LinearClassifier {
    pub fn decision(&self, features: &Matrix) -> Result<Vector> {
        if features.nrows() != self.weights.len() {
            return Err(Error::dim(format!(
                "classifier expects {} features, got {}",
                self.weights.len(),
                features.nrows()
            )));
        }
        Ok(features.tr_mul(&self.weights).add_scalar(self.bias))
    }

    pub fn predict(&self, features: &Matrix) -> Result<Vec<u8>> {
        Ok(self
            .decision(features)?
            .iter()
            .map(|&m| u8::from(m > 0.0))
            .collect())
    }

    pub fn accuracy(&self, features: &Matrix, targets: &[u8]) -> Result<f64> {
        let pred = self.predict(features)?;
        if pred.len() != targets.len() {
            return Err(Error::dim(format!(
                "{} predictions for {} targets",
                pred.len(),
                targets.len()
            )));
        }
        if pred.is_empty() {
            return Err(Error::DegenerateInput("no points to score".into()));
        }
        Ok(pred.iter().zip(targets).filter(|(p, t)| p == t).count() as f64 / pred.len() as f64)
    }
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Objective `mean log-loss + (reg/2)‖w‖²` and its gradient; the bias is not
/// penalized. The parameter vector is `(w, b)`.
pub fn logistic_objective(
    features: &Matrix,
    targets: &[u8],
    reg: f64,
    params: &Vector,
) -> (f64, Vector) {
    let k = features.nrows();
    let n = features.ncols() as f64;
    let w = params.rows(0, k);
    let b = params[k];
    let margins = features.tr_mul(&w).add_scalar(b);
    let mut loss = 0.0;
    // d loss / d margin, per point
    let mut coef = Vector::zeros(features.ncols());
    for (i, (&m, &y)) in margins.iter().zip(targets).enumerate() {
        let s = if y == 1 { 1.0 } else { -1.0 };
        loss += softplus(-s * m);
        coef[i] = -s * sigmoid(-s * m) / n;
    }
    let mut grad = Vector::zeros(k + 1);
    grad.rows_mut(0, k).copy_from(&(features * &coef + w * reg));
    grad[k] = coef.sum();
    (loss / n + 0.5 * reg * w.norm_squared(), grad)
}

fn check_targets(features: &Matrix, targets: &[u8]) -> Result<()> {
    if features.ncols() != targets.len() {
        return Err(Error::dim(format!(
            "{} points but {} targets",
            features.ncols(),
            targets.len()
        )));
    }
    if targets.iter().any(|&t| t > 1) {
        return Err(Error::InvalidInput("targets must be 0 or 1".into()));
    }
    let pos = targets.iter().filter(|&&t| t == 1).count();
    if pos == 0 || pos == targets.len() {
        return Err(Error::DegenerateInput(
            "targets contain a single class".into(),
        ));
    }
    crate::linalg::ensure_finite(features, "features")
}

/// Trains from the zero vector; see [`train_logreg_from`].
pub fn train_logreg(
    features: &Matrix,
    targets: &[u8],
    reg_strength: f64,
) -> Result<LinearClassifier> {
    train_logreg_from(features, targets, reg_strength, None)
}

/// Full-batch accelerated gradient descent with step `1/L` and a
/// function-value restart, which keeps the objective non-increasing. Stops
/// when the gradient norm drops to [`LOGREG_GRAD_TOL`] or after
/// [`LOGREG_MAX_ITER`] iterations.
pub fn train_logreg_from(
    features: &Matrix,
    targets: &[u8],
    reg_strength: f64,
    init: Option<&Vector>,
) -> Result<LinearClassifier> {
    check_targets(features, targets)?;
    if !(reg_strength >= 0.0 && reg_strength.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "regularization must be non-negative, got {reg_strength}"
        )));
    }
    let k = features.nrows();
    let n = features.ncols() as f64;
    // Lipschitz bound of the gradient: ‖[X; 1]‖_F² / (4n) + reg
    let lipschitz = (features.norm_squared() + n) / (4.0 * n) + reg_strength;
    let step = 1.0 / lipschitz;
    let f = |p: &Vector| logistic_objective(features, targets, reg_strength, p);

    let mut x = match init {
        Some(p) if p.len() == k + 1 => p.clone(),
        Some(p) => {
            return Err(Error::dim(format!(
                "initial parameters have length {}, expected {}",
                p.len(),
                k + 1
            )))
        }
        None => Vector::zeros(k + 1),
    };
    let (mut fx, mut gx) = f(&x);
    let mut y = x.clone();
    let mut gy = gx.clone();
    let mut t = 1.0_f64;
    let mut history = vec![fx];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < LOGREG_MAX_ITER {
        if gx.norm() <= LOGREG_GRAD_TOL {
            converged = true;
            break;
        }
        iterations += 1;
        let mut z = &y - &gy * step;
        let (mut fz, mut gz) = f(&z);
        if fz > fx {
            t = 1.0;
            z = &x - &gx * step;
            (fz, gz) = f(&z);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_next;
        y = &z + (&z - &x) * momentum;
        t = t_next;
        x = z;
        fx = fz;
        gx = gz;
        gy = if momentum == 0.0 { gx.clone() } else { f(&y).1 };
        history.push(fx);
    }
    if !converged && gx.norm() <= LOGREG_GRAD_TOL {
        converged = true;
    }
    if !converged {
        warn!(
            "logistic regression stopped after {iterations} iterations with gradient norm {:e}",
            gx.norm()
        );
    }
    Ok(LinearClassifier {
        weights: x.rows(0, k).into_owned(),
        bias: x[k],
        reg_strength,
        loss_history: history,
        iterations,
        converged,
    })
}

/// Test error of a probe predicting the (binary) group from the embedding.
pub fn linear_inseparability(
    embedding: &Matrix,
    groups: &[u8],
    probe: &LinearClassifier,
) -> Result<f64> {
    Ok(1.0 - probe.accuracy(embedding, groups)?)
}

/// All monomials of degree one and two of the embedding coordinates:
/// `zᵢ` then `zᵢ zⱼ` for `i ≤ j`. Turns the logistic probe into a quadratic one.
pub fn quadratic_features(embedding: &Matrix) -> Matrix {
    let k = embedding.nrows();
    let q = k + k * (k + 1) / 2;
    let mut out = Matrix::zeros(q, embedding.ncols());
    for (c, col) in embedding.column_iter().enumerate() {
        let mut r = 0;
        for i in 0..k {
            out[(r, c)] = col[i];
            r += 1;
        }
        for i in 0..k {
            for j in i..k {
                out[(r, c)] = col[i] * col[j];
                r += 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FairnessGaps {
    /// `|P(Ŷ=1 | Z=0) − P(Ŷ=1 | Z=1)|`
    pub delta_dp: Option<f64>,
    /// `|P(Ŷ=1 | Z=0, Y=1) − P(Ŷ=1 | Z=1, Y=1)|`
    pub delta_eo: Option<f64>,
}

fn positive_rate(pred: &[u8], keep: impl Fn(usize) -> bool) -> Option<f64> {
    let (mut hits, mut total) = (0usize, 0usize);
    for (i, &p) in pred.iter().enumerate() {
        if keep(i) {
            total += 1;
            hits += usize::from(p == 1);
        }
    }
    (total > 0).then(|| hits as f64 / total as f64)
}

/// Demographic-parity and equal-opportunity gaps of binary predictions.
///
/// A gap whose conditioning cell is empty is reported as `None` (with a warning).
pub fn fairness_gaps(
    predictions: &[u8],
    groups: &[u8],
    labels: Option<&[u8]>,
) -> Result<FairnessGaps> {
    if predictions.len() != groups.len() || labels.is_some_and(|y| y.len() != groups.len()) {
        return Err(Error::dim(
            "predictions, groups and labels must have equal length",
        ));
    }
    let gap = |cond: &dyn Fn(usize) -> bool, what: &str| {
        let r0 = positive_rate(predictions, |i| groups[i] == 0 && cond(i));
        let r1 = positive_rate(predictions, |i| groups[i] == 1 && cond(i));
        match (r0, r1) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => {
                warn!("{what} undefined: a conditioning cell is empty");
                None
            }
        }
    };
    let delta_dp = gap(&|_| true, "demographic parity gap");
    let delta_eo = labels.and_then(|y| gap(&|i| y[i] == 1, "equal opportunity gap"));
    Ok(FairnessGaps { delta_dp, delta_eo })
}

/// Anything that maps `d × n` data to a `k × n` representation.
pub trait Embedding {
    fn embed(&self, x: &Matrix) -> Result<Matrix>;

    /// Explained variance of the underlying linear projection on `x`, if the
    /// representation is a linear projection of the input space.
    fn explained_variance_on(&self, x: &Matrix) -> Option<Result<f64>>;
}

impl Embedding for ProjectionModel {
    fn embed(&self, x: &Matrix) -> Result<Matrix> {
        self.transform(x)
    }

    fn explained_variance_on(&self, x: &Matrix) -> Option<Result<f64>> {
        Some(
            self.preprocess(x)
                .and_then(|xc| explained_variance(&self.u, &xc)),
        )
    }
}

/// Reports the explained variance of the fair block.
impl Embedding for TradeoffModel {
    fn embed(&self, x: &Matrix) -> Result<Matrix> {
        self.transform(x)
    }

    fn explained_variance_on(&self, x: &Matrix) -> Option<Result<f64>> {
        self.fair.explained_variance_on(x)
    }
}

/// The projection lives in the kernel's feature space, so no explained variance.
impl Embedding for KernelModel {
    fn embed(&self, x: &Matrix) -> Result<Matrix> {
        self.transform(x)
    }

    fn explained_variance_on(&self, _x: &Matrix) -> Option<Result<f64>> {
        None
    }
}

/// Feature map of the group probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Probe {
    /// Logistic regression on the embedding.
    #[default]
    Linear,
    /// Logistic regression on [`quadratic_features`] of the embedding.
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Attribute whose (two) groups the fairness metrics refer to.
    pub attribute: usize,
    pub downstream_reg: f64,
    pub probe_reg: f64,
    /// `linear_insep` is the test error of this probe.
    pub probe: Probe,
    pub mmd: MmdOptions,
    /// Train probe and downstream classifier concurrently.
    pub parallelism: Parallelism,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            attribute: 0,
            downstream_reg: DEFAULT_REG,
            probe_reg: DEFAULT_REG,
            probe: Probe::Linear,
            mmd: MmdOptions::default(),
            parallelism: Parallelism::default(),
        }
    }
}

/// Metrics of one representation on one test set.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalReport {
    /// Absent for kernel models.
    pub explained_var: Option<f64>,
    /// Clamped at 0.
    pub mmd2: f64,
    pub linear_insep: f64,
    /// The downstream fields are absent when the data carry no task label.
    pub downstream_accuracy: Option<f64>,
    pub delta_dp: Option<f64>,
    pub delta_eo: Option<f64>,
}

impl EvalReport {
    pub const CSV_COLUMNS: [&'static str; 6] = [
        "explained_var",
        "mmd2",
        "linear_insep",
        "downstream_accuracy",
        "delta_dp",
        "delta_eo",
    ];

    pub fn values(&self) -> [Option<f64>; 6] {
        [
            self.explained_var,
            Some(self.mmd2),
            Some(self.linear_insep),
            self.downstream_accuracy,
            self.delta_dp,
            self.delta_eo,
        ]
    }

    /// Cells in [`Self::CSV_COLUMNS`] order; absent values are empty.
    pub fn csv_cells(&self) -> Vec<String> {
        self.values()
            .iter()
            .map(|v| v.map(|x| x.to_string()).unwrap_or_default())
            .collect()
    }

    /// Field-wise mean and sample standard deviation over `reports`, taken
    /// over the reports in which a field is present.
    pub fn summarize(reports: &[EvalReport]) -> (SummaryRow, SummaryRow) {
        let mut mean = [None; 6];
        let mut std = [None; 6];
        for f in 0..6 {
            let vals: Vec<f64> = reports.iter().filter_map(|r| r.values()[f]).collect();
            if vals.is_empty() {
                continue;
            }
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let s = if vals.len() > 1 {
                (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64).sqrt()
            } else {
                0.0
            };
            mean[f] = Some(m);
            std[f] = Some(s);
        }
        (SummaryRow(mean), SummaryRow(std))
    }
}

/// Aggregated metric values in [`EvalReport::CSV_COLUMNS`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow(pub [Option<f64>; 6]);

impl SummaryRow {
    pub fn csv_cells(&self) -> Vec<String> {
        self.0
            .iter()
            .map(|v| v.map(|x| x.to_string()).unwrap_or_default())
            .collect()
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_owned(), |x| format!("{x:.4}"));
        writeln!(f, "explained variance   {}", show(self.explained_var))?;
        writeln!(f, "MMD²                 {:.4}", self.mmd2)?;
        writeln!(f, "linear inseparability {:.4}", self.linear_insep)?;
        writeln!(f, "downstream accuracy  {}", show(self.downstream_accuracy))?;
        writeln!(f, "ΔDP                  {}", show(self.delta_dp))?;
        write!(f, "ΔEO                  {}", show(self.delta_eo))
    }
}

/// Maps the codes of a two-group attribute to 0/1 using the groups present in `train`.
fn binary_groups(train: &Dataset, test: &Dataset, attribute: usize) -> Result<(Vec<u8>, Vec<u8>)> {
    let attr = train.attribute(attribute)?;
    let present = attr.present_groups();
    if present.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "fairness metrics need an attribute with two groups; {} has {} in the training data",
            attr.name,
            present.len()
        )));
    }
    let map = |d: &Dataset| -> Result<Vec<u8>> {
        d.attribute(attribute)?
            .codes
            .iter()
            .map(|&c| {
                if c == present[0] {
                    Ok(0)
                } else if c == present[1] {
                    Ok(1)
                } else {
                    Err(Error::InvalidInput(format!(
                        "group code {c} not seen in training data"
                    )))
                }
            })
            .collect()
    };
    let (tr, te) = (map(train)?, map(test)?);
    if !(te.contains(&0) && te.contains(&1)) {
        return Err(Error::DegenerateInput(
            "test data must contain both groups".into(),
        ));
    }
    Ok((tr, te))
}

/// Embeds train and test data, trains the group probe and the downstream
/// classifier on the training embedding and scores everything on the test
/// embedding.
pub fn evaluate(
    model: &dyn Embedding,
    train: &Dataset,
    test: &Dataset,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let (g_train, g_test) = binary_groups(train, test, opts.attribute)?;
    let e_train = model.embed(&train.x)?;
    let e_test = model.embed(&test.x)?;

    let explained_var = model.explained_variance_on(&test.x).transpose()?;

    let idx = |g: &[u8], v: u8| -> Vec<usize> { (0..g.len()).filter(|&i| g[i] == v).collect() };
    let mmd = mmd2(
        &e_test.select_columns(&idx(&g_test, 0)),
        &e_test.select_columns(&idx(&g_test, 1)),
        &opts.mmd,
    )?;

    let downstream = || -> Result<Option<(f64, FairnessGaps)>> {
        let (Some(y_train), Some(y_test)) = (&train.labels, &test.labels) else {
            return Ok(None);
        };
        let clf = train_logreg(&e_train, y_train, opts.downstream_reg)?;
        let pred = clf.predict(&e_test)?;
        let acc =
            pred.iter().zip(y_test).filter(|(p, y)| p == y).count() as f64 / pred.len() as f64;
        let gaps = fairness_gaps(&pred, &g_test, Some(y_test))?;
        Ok(Some((acc, gaps)))
    };
    let probe_features = |e: &Matrix| match opts.probe {
        Probe::Linear => e.clone(),
        Probe::Quadratic => quadratic_features(e),
    };
    let probe = || train_logreg(&probe_features(&e_train), &g_train, opts.probe_reg);
    let (probe, downstream) = par::join(opts.parallelism, probe, downstream);
    let linear_insep = linear_inseparability(&probe_features(&e_test), &g_test, &probe?)?;
    let downstream = downstream?;

    Ok(EvalReport {
        explained_var,
        mmd2: mmd.max(0.0),
        linear_insep,
        downstream_accuracy: downstream.map(|d| d.0),
        delta_dp: downstream.and_then(|d| d.1.delta_dp),
        delta_eo: downstream.and_then(|d| d.1.delta_eo),
    })
}
