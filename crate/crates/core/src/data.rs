//! Datasets: CSV ingestion, standardization, splitting and the seeded
//! two-Gaussian mixture generator.
//!
//! All randomness goes through [`ChaCha8Rng`] seeded with `seed_from_u64`, and
//! normal deviates come from `rand_distr::StandardNormal`, so fixtures are
//! reproducible across platforms.

use std::collections::BTreeSet;
use std::path::Path;

use log::warn;
use nalgebra::Cholesky;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// One demographic attribute: a group code in `0..levels.len()` per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub levels: Vec<String>,
    pub codes: Vec<usize>,
}

impl Attribute {
    pub fn new(name: impl Into<String>, levels: Vec<String>, codes: Vec<usize>) -> Result<Self> {
        let name = name.into();
        if let Some(&bad) = codes.iter().find(|&&c| c >= levels.len()) {
            return Err(Error::InvalidInput(format!(
                "attribute {name}: code {bad} outside 0..{}",
                levels.len()
            )));
        }
        Ok(Attribute {
            name,
            levels,
            codes,
        })
    }

    /// Attribute with levels named `"0"`, `"1"`, … up to the largest code.
    pub fn from_codes(name: impl Into<String>, codes: Vec<usize>) -> Self {
        let m = codes.iter().max().map_or(0, |&c| c + 1);
        let levels = (0..m).map(|l| l.to_string()).collect();
        Attribute {
            name: name.into(),
            levels,
            codes,
        }
    }

    /// Codes that occur at least once, ascending.
    pub fn present_groups(&self) -> Vec<usize> {
        self.codes
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    fn subset(&self, idx: &[usize]) -> Self {
        Attribute {
            name: self.name.clone(),
            levels: self.levels.clone(),
            codes: idx.iter().map(|&i| self.codes[i]).collect(),
        }
    }
}

/// Feature matrix (`d × n`, one column per point), demographic attributes and
/// an optional binary task label.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub feature_names: Vec<String>,
    pub attributes: Vec<Attribute>,
    pub labels: Option<Vec<u8>>,
}

impl Dataset {
    /// Validates shapes. Attributes with a single group present are accepted
    /// with a warning; fitting with them fails later.
    pub fn new(
        x: Matrix,
        feature_names: Vec<String>,
        attributes: Vec<Attribute>,
        labels: Option<Vec<u8>>,
    ) -> Result<Self> {
        let n = x.ncols();
        if x.nrows() == 0 {
            return Err(Error::InvalidInput("dataset has no features".into()));
        }
        if n == 0 {
            return Err(Error::InvalidInput("dataset has no points".into()));
        }
        if feature_names.len() != x.nrows() {
            return Err(Error::InvalidInput(format!(
                "{} feature names for {} features",
                feature_names.len(),
                x.nrows()
            )));
        }
        crate::linalg::ensure_finite(&x, "feature matrix")?;
        for a in &attributes {
            if a.codes.len() != n {
                return Err(Error::InvalidInput(format!(
                    "attribute {} has {} entries for {n} points",
                    a.name,
                    a.codes.len()
                )));
            }
            if a.present_groups().len() < 2 {
                warn!("attribute {} has a single group present", a.name);
            }
        }
        if let Some(y) = &labels {
            if y.len() != n {
                return Err(Error::InvalidInput(format!(
                    "{} labels for {n} points",
                    y.len()
                )));
            }
            if y.iter().any(|&v| v > 1) {
                return Err(Error::InvalidInput("labels must be 0 or 1".into()));
            }
        }
        Ok(Dataset {
            x,
            feature_names,
            attributes,
            labels,
        })
    }

    /// Dataset with generic feature names `x0, x1, …` and attribute names `z0, z1, …`.
    pub fn from_parts(x: Matrix, groups: Vec<Vec<usize>>, labels: Option<Vec<u8>>) -> Result<Self> {
        let names = (0..x.nrows()).map(|i| format!("x{i}")).collect();
        let attrs = groups
            .into_iter()
            .enumerate()
            .map(|(r, g)| Attribute::from_codes(format!("z{r}"), g))
            .collect();
        Dataset::new(x, names, attrs, labels)
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    /// Fitting needs at least two points; transforming does not.
    pub(crate) fn check_fittable(&self) -> Result<()> {
        if self.n() < 2 {
            return Err(Error::InvalidInput(format!(
                "fitting needs at least 2 points, got {}",
                self.n()
            )));
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.x.nrows()
    }

    pub fn attribute(&self, r: usize) -> Result<&Attribute> {
        self.attributes.get(r).ok_or_else(|| {
            Error::InvalidInput(format!(
                "attribute index {r} out of range ({} attributes)",
                self.attributes.len()
            ))
        })
    }

    /// Points at the given column indices, in the given order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_columns(idx),
            feature_names: self.feature_names.clone(),
            attributes: self.attributes.iter().map(|a| a.subset(idx)).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|y| idx.iter().map(|&i| y[i]).collect()),
        }
    }

    /// Copy with the feature matrix replaced (same points, new representation).
    pub fn with_features(&self, x: Matrix, names: Vec<String>) -> Result<Dataset> {
        if x.ncols() != self.n() {
            return Err(Error::dim(format!(
                "{} columns for {} points",
                x.ncols(),
                self.n()
            )));
        }
        Dataset::new(x, names, self.attributes.clone(), self.labels.clone())
    }
}

/// Column roles for [`load_csv`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnSpec {
    /// Feature columns in order; `None` takes every column without another role.
    pub features: Option<Vec<String>>,
    /// Feature columns expanded to full one-hot indicators.
    pub categorical: Vec<String>,
    pub groups: Vec<String>,
    pub label: Option<String>,
}

/// Sorted distinct values: numerically when every value parses as a number,
/// lexicographically otherwise.
fn sorted_levels<'a>(values: impl Iterator<Item = &'a str>) -> Vec<String> {
    let set: BTreeSet<&str> = values.collect();
    let mut levels: Vec<String> = set.into_iter().map(str::to_owned).collect();
    let numeric: Option<Vec<f64>> = levels.iter().map(|s| s.parse::<f64>().ok()).collect();
    if let Some(nums) = numeric {
        let mut pairs: Vec<(f64, String)> = nums.into_iter().zip(levels).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        levels = pairs.into_iter().map(|p| p.1).collect();
    }
    levels
}

/// Loads a comma-separated file with a header row.
///
/// Numeric features are parsed as `f64`; categorical features become one
/// indicator row per distinct value, named `column=value`. Group columns may
/// hold arbitrary strings; the label column must hold exactly two distinct
/// values (the smaller, by the level ordering, maps to 0). Empty cells are
/// parse errors.
pub fn load_csv(path: impl AsRef<Path>, spec: &ColumnSpec) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_owned()).collect();
    let mut rows: Vec<Vec<String>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(rec.iter().map(|c| c.trim().to_owned()).collect());
    }
    dataset_from_table(&headers, &rows, spec)
}

pub(crate) fn dataset_from_table(
    headers: &[String],
    rows: &[Vec<String>],
    spec: &ColumnSpec,
) -> Result<Dataset> {
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))
    };
    let group_cols: Vec<usize> = spec.groups.iter().map(|g| col(g)).collect::<Result<_>>()?;
    let label_col = spec.label.as_deref().map(col).transpose()?;
    let feature_names: Vec<String> = match &spec.features {
        Some(f) => f.clone(),
        None => headers
            .iter()
            .filter(|h| !spec.groups.contains(h) && spec.label.as_ref() != Some(*h))
            .cloned()
            .collect(),
    };
    for c in &spec.categorical {
        if !feature_names.contains(c) {
            return Err(Error::Schema(format!(
                "categorical column {c:?} is not a feature"
            )));
        }
    }
    for f in &feature_names {
        if spec.groups.contains(f) || spec.label.as_ref() == Some(f) {
            return Err(Error::Schema(format!(
                "column {f:?} has more than one role"
            )));
        }
    }
    let feature_cols: Vec<usize> = feature_names
        .iter()
        .map(|f| col(f))
        .collect::<Result<_>>()?;

    for (r, row) in rows.iter().enumerate() {
        if row.len() != headers.len() {
            return Err(Error::Parse {
                row: r + 1,
                col: String::new(),
                msg: format!("expected {} fields, found {}", headers.len(), row.len()),
            });
        }
        for (c, cell) in row.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::Parse {
                    row: r + 1,
                    col: headers[c].clone(),
                    msg: "missing value".into(),
                });
            }
        }
    }

    let n = rows.len();
    let mut names = Vec::new();
    let mut feature_rows: Vec<Vec<f64>> = Vec::new();
    for (&c, name) in feature_cols.iter().zip(&feature_names) {
        if spec.categorical.contains(name) {
            let levels = sorted_levels(rows.iter().map(|r| r[c].as_str()));
            for level in levels {
                names.push(format!("{name}={level}"));
                feature_rows.push(
                    rows.iter()
                        .map(|r| f64::from(u8::from(r[c] == level)))
                        .collect(),
                );
            }
        } else {
            let mut vals = Vec::with_capacity(n);
            for (r, row) in rows.iter().enumerate() {
                let v: f64 = row[c].parse().map_err(|_| Error::Parse {
                    row: r + 1,
                    col: name.clone(),
                    msg: format!("not a number: {:?}", row[c]),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row: r + 1,
                        col: name.clone(),
                        msg: "non-finite value".into(),
                    });
                }
                vals.push(v);
            }
            names.push(name.clone());
            feature_rows.push(vals);
        }
    }
    let d = feature_rows.len();
    let x = Matrix::from_fn(d, n, |i, j| feature_rows[i][j]);

    let mut attributes = Vec::new();
    for (&c, name) in group_cols.iter().zip(&spec.groups) {
        let levels = sorted_levels(rows.iter().map(|r| r[c].as_str()));
        let codes = rows
            .iter()
            .map(|r| levels.iter().position(|l| *l == r[c]).unwrap())
            .collect();
        attributes.push(Attribute::new(name.clone(), levels, codes)?);
    }

    let labels = match (label_col, &spec.label) {
        (Some(c), Some(name)) => {
            let levels = sorted_levels(rows.iter().map(|r| r[c].as_str()));
            let mapped: Vec<u8> = if levels.len() == 2 {
                rows.iter().map(|r| u8::from(r[c] == levels[1])).collect()
            } else if levels.len() == 1 && (levels[0] == "0" || levels[0] == "1") {
                rows.iter().map(|r| u8::from(r[c] == "1")).collect()
            } else {
                return Err(Error::Parse {
                    row: 0,
                    col: name.clone(),
                    msg: format!(
                        "label column needs two distinct values, found {}",
                        levels.len()
                    ),
                });
            };
            Some(mapped)
        }
        _ => None,
    };
    Dataset::new(x, names, attributes, labels)
}

/// Writes `data` so that [`load_csv`] with [`ColumnSpec::for_dataset`] reads it back unchanged.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    write_dataset(data, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes the layout of [`write_csv`] to an open CSV writer.
pub fn write_dataset<W: std::io::Write>(data: &Dataset, w: &mut csv::Writer<W>) -> Result<()> {
    let mut header: Vec<String> = data.feature_names.clone();
    header.extend(data.attributes.iter().map(|a| a.name.clone()));
    if data.labels.is_some() {
        header.push(LABEL_COLUMN.to_owned());
    }
    w.write_record(&header)?;
    for j in 0..data.n() {
        let mut rec: Vec<String> = data.x.column(j).iter().map(|v| v.to_string()).collect();
        rec.extend(data.attributes.iter().map(|a| a.levels[a.codes[j]].clone()));
        if let Some(y) = &data.labels {
            rec.push(y[j].to_string());
        }
        w.write_record(&rec)?;
    }
    Ok(())
}

/// Header used for the label column written by [`write_csv`].
pub const LABEL_COLUMN: &str = "label";

impl ColumnSpec {
    /// Column roles matching the layout produced by [`write_csv`].
    pub fn for_dataset(data: &Dataset) -> Self {
        ColumnSpec {
            features: Some(data.feature_names.clone()),
            categorical: Vec::new(),
            groups: data.attributes.iter().map(|a| a.name.clone()).collect(),
            label: data.labels.as_ref().map(|_| LABEL_COLUMN.to_owned()),
        }
    }
}

/// Per-feature affine map `(x − mean) / std` fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mean: Vector,
    /// Population standard deviation; zero for constant features.
    pub std: Vector,
}

impl Scaler {
    pub fn fit(x: &Matrix) -> Scaler {
        let n = x.ncols() as f64;
        let mean = x.column_mean();
        let std = Vector::from_iterator(
            x.nrows(),
            x.row_iter()
                .zip(mean.iter())
                .map(|(row, &m)| (row.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt()),
        );
        for (i, &s) in std.iter().enumerate() {
            if s == 0.0 {
                warn!("feature {i} is constant on the training data; it is mapped to 0");
            }
        }
        Scaler { mean, std }
    }

    /// Constant training features map to 0.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.nrows() != self.mean.len() {
            return Err(Error::dim(format!(
                "scaler expects {} features, got {}",
                self.mean.len(),
                x.nrows()
            )));
        }
        Ok(Matrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            let s = self.std[i];
            if s == 0.0 {
                0.0
            } else {
                (x[(i, j)] - self.mean[i]) / s
            }
        }))
    }

    pub fn transform_dataset(&self, data: &Dataset) -> Result<Dataset> {
        let x = self.transform(&data.x)?;
        Ok(Dataset { x, ..data.clone() })
    }
}

/// Standardizes every dataset in `others` with statistics of `train`.
pub fn standardize(train: &Dataset, others: &[&Dataset]) -> Result<(Vec<Dataset>, Scaler)> {
    let scaler = Scaler::fit(&train.x);
    let out = others
        .iter()
        .map(|d| scaler.transform_dataset(d))
        .collect::<Result<_>>()?;
    Ok((out, scaler))
}

/// Covariance of one mixture component.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    /// `s · I`
    Scalar(f64),
    Diagonal(Vec<f64>),
    Full(Matrix),
}

impl Covariance {
    fn matrix(&self, d: usize) -> Result<Matrix> {
        match self {
            Covariance::Scalar(s) => Ok(Matrix::identity(d, d) * *s),
            Covariance::Diagonal(v) => {
                if v.len() != d {
                    return Err(Error::InvalidSpec(format!(
                        "diagonal covariance has {} entries, d = {d}",
                        v.len()
                    )));
                }
                Ok(Matrix::from_diagonal(&Vector::from_column_slice(v)))
            }
            Covariance::Full(m) => {
                if m.shape() != (d, d) {
                    return Err(Error::InvalidSpec(format!(
                        "covariance is {:?}, expected {d}x{d}",
                        m.shape()
                    )));
                }
                if crate::linalg::max_abs(&(m - m.transpose()))
                    > 1e-10 * (1.0 + crate::linalg::max_abs(m))
                {
                    return Err(Error::InvalidSpec("covariance is not symmetric".into()));
                }
                Ok(m.clone())
            }
        }
    }
}

/// How the task label of generated points is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelRule {
    None,
    /// `y = group`.
    Group,
    /// `y = 1[wᵀx + b + noise·ε > 0]` with `ε ~ N(0, 1)`, drawn after all features.
    Linear {
        weights: Vec<f64>,
        bias: f64,
        noise: f64,
    },
}

/// Two-component Gaussian mixture; component `g` is demographic group `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub d: usize,
    pub n_per_group: usize,
    pub mean0: Vec<f64>,
    pub mean1: Vec<f64>,
    pub cov0: Covariance,
    pub cov1: Covariance,
    pub seed: u64,
    pub label: LabelRule,
}

impl MixtureSpec {
    /// Identical covariance `diag(d, d−1, …, 1) / d` in both groups, means `±shift·e₁`.
    ///
    /// Standard PCA picks up the mean separation along `e₁`; any projection
    /// that matches the group means makes the groups identically distributed.
    pub fn equal_covariance(d: usize, n_per_group: usize, shift: f64, seed: u64) -> Self {
        let diag: Vec<f64> = (0..d).map(|i| (d - i) as f64 / d as f64).collect();
        let mut mean0 = vec![0.0; d];
        let mut mean1 = vec![0.0; d];
        if d > 0 {
            mean0[0] = shift;
            mean1[0] = -shift;
        }
        MixtureSpec {
            d,
            n_per_group,
            mean0,
            mean1,
            cov0: Covariance::Diagonal(diag.clone()),
            cov1: Covariance::Diagonal(diag),
            seed,
            label: LabelRule::None,
        }
    }

    /// Strongly different diagonal covariances (needs `d ≥ 6`).
    ///
    /// The first `d/3` coordinates have variance 8 in group 0 and 0.5 in
    /// group 1, which makes them the highest-variance directions overall.
    /// The middle coordinates share variances between 3 and 1, and the last
    /// coordinate carries a mean shift of `±1`.
    pub fn different_covariance(d: usize, n_per_group: usize, seed: u64) -> Self {
        let split = (d / 3).max(1);
        let mut c0 = vec![1.0; d];
        let mut c1 = vec![1.0; d];
        for i in 0..d {
            if i < split {
                c0[i] = 8.0;
                c1[i] = 0.5;
            } else if i + 1 < d {
                let t = (i - split) as f64 / (d - split).max(2) as f64;
                c0[i] = 3.0 - 2.0 * t;
                c1[i] = c0[i];
            }
        }
        let mut mean0 = vec![0.0; d];
        let mut mean1 = vec![0.0; d];
        if d > 0 {
            mean0[d - 1] = 1.0;
            mean1[d - 1] = -1.0;
        }
        MixtureSpec {
            d,
            n_per_group,
            mean0,
            mean1,
            cov0: Covariance::Diagonal(c0),
            cov1: Covariance::Diagonal(c1),
            seed,
            label: LabelRule::None,
        }
    }

    pub fn with_label(mut self, label: LabelRule) -> Self {
        self.label = label;
        self
    }
}

fn cholesky_factor(cov: &Matrix) -> Result<Matrix> {
    let d = cov.nrows();
    let jittered = cov + Matrix::identity(d, d) * 1e-12;
    Cholesky::new(jittered)
        .map(|c| c.l())
        .ok_or_else(|| Error::InvalidSpec("covariance is not positive semi-definite".into()))
}

/// Samples `n_per_group` points per component: all of group 0 first, then group 1.
pub fn gen_mixture(spec: &MixtureSpec) -> Result<Dataset> {
    let d = spec.d;
    if d == 0 {
        return Err(Error::InvalidSpec("d must be positive".into()));
    }
    if spec.n_per_group < 1 {
        return Err(Error::InvalidSpec("n_per_group must be positive".into()));
    }
    if spec.mean0.len() != d || spec.mean1.len() != d {
        return Err(Error::InvalidSpec(format!(
            "means must have length d = {d}"
        )));
    }
    let factors = [
        cholesky_factor(&spec.cov0.matrix(d)?)?,
        cholesky_factor(&spec.cov1.matrix(d)?)?,
    ];
    let means = [
        Vector::from_column_slice(&spec.mean0),
        Vector::from_column_slice(&spec.mean1),
    ];
    let n = 2 * spec.n_per_group;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x = Matrix::zeros(d, n);
    let mut groups = Vec::with_capacity(n);
    for g in 0..2 {
        for i in 0..spec.n_per_group {
            let e = Vector::from_iterator(d, (0..d).map(|_| StandardNormal.sample(&mut rng)));
            let p = &means[g] + &factors[g] * e;
            x.set_column(g * spec.n_per_group + i, &p);
            groups.push(g);
        }
    }
    let labels = match &spec.label {
        LabelRule::None => None,
        LabelRule::Group => Some(groups.iter().map(|&g| g as u8).collect()),
        LabelRule::Linear {
            weights,
            bias,
            noise,
        } => {
            if weights.len() != d {
                return Err(Error::InvalidSpec(format!(
                    "label weights must have length d = {d}"
                )));
            }
            let w = Vector::from_column_slice(weights);
            Some(
                (0..n)
                    .map(|j| {
                        let eps: f64 = StandardNormal.sample(&mut rng);
                        u8::from(w.dot(&x.column(j)) + bias + noise * eps > 0.0)
                    })
                    .collect(),
            )
        }
    };
    let names = (0..d).map(|i| format!("x{i}")).collect();
    let attr = Attribute::new("group", vec!["0".into(), "1".into()], groups)?;
    Dataset::new(x, names, vec![attr], labels)
}

/// `test size = round(n · fraction)`.
fn test_size(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).round() as usize).min(n)
}

/// Seeded train/test split, stratified by the first attribute.
///
/// Each group contributes its largest-remainder share of the test set, at
/// least one point to each side when it has two or more members. Groups with
/// a single member make stratification infeasible and the split falls back to
/// a plain shuffle. Both parts keep the original point order.
pub fn split(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = data.n();
    let t = test_size(n, test_fraction);
    if t == 0 || t == n {
        return Err(Error::InvalidInput(format!(
            "split of {n} points with fraction {test_fraction} leaves an empty side"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);

    let test_idx = match data
        .attributes
        .first()
        .and_then(|a| stratified_test(a, &perm, t, test_fraction))
    {
        Some(idx) => idx,
        None => {
            if !data.attributes.is_empty() {
                warn!("a group is too small to stratify; falling back to an unstratified split");
            }
            perm[..t].to_vec()
        }
    };
    let mut in_test = vec![false; n];
    for &i in &test_idx {
        in_test[i] = true;
    }
    let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
    let test: Vec<usize> = (0..n).filter(|&i| in_test[i]).collect();
    Ok((data.subset(&train), data.subset(&test)))
}

fn stratified_test(
    attr: &Attribute,
    perm: &[usize],
    t: usize,
    fraction: f64,
) -> Option<Vec<usize>> {
    let groups = attr.present_groups();
    let members: Vec<Vec<usize>> = groups
        .iter()
        .map(|&g| {
            perm.iter()
                .copied()
                .filter(|&i| attr.codes[i] == g)
                .collect()
        })
        .collect();
    if members.iter().any(|m| m.len() < 2) || t < groups.len() || perm.len() - t < groups.len() {
        return None;
    }
    let ideal: Vec<f64> = members.iter().map(|m| m.len() as f64 * fraction).collect();
    let mut quota: Vec<usize> = ideal
        .iter()
        .zip(&members)
        .map(|(&q, m)| (q.floor() as usize).clamp(1, m.len() - 1))
        .collect();
    // largest remainder first, lowest group index on ties
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| (ideal[b] - ideal[b].floor()).total_cmp(&(ideal[a] - ideal[a].floor())));
    loop {
        let total: usize = quota.iter().sum();
        if total == t {
            break;
        }
        let adjustable = if total < t {
            order
                .iter()
                .copied()
                .find(|&g| quota[g] < members[g].len() - 1)
        } else {
            order.iter().rev().copied().find(|&g| quota[g] > 1)
        };
        let g = adjustable?;
        if total < t {
            quota[g] += 1;
        } else {
            quota[g] -= 1;
        }
    }
    Some(
        members
            .iter()
            .zip(&quota)
            .flat_map(|(m, &q)| m[..q].iter().copied())
            .collect(),
    )
}
