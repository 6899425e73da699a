//! Plain-text model files.
//!
//! ```text
//! fairpca-model 1
//! kind: projection
//! method: fair
//! d: 2
//! k: 1
//! center: true
//! ...
//! vector mean 2
//! 1.0000000000000000e0 5.0000000000000000e-1
//! matrix U 2 1
//! 7.0710678118654746e-1
//! -7.0710678118654746e-1
//! end
//! ```
//!
//! A header line with the format version is followed by `key: value` lines
//! and numeric blocks. `vector NAME LEN` is followed by one line of `LEN`
//! numbers; `matrix NAME ROWS COLS` by `ROWS` lines of `COLS` numbers
//! (row-major). Numbers are written with 17 significant digits so they read
//! back bit-identically. Sub-models of a trade-off model use the key and
//! block prefixes `fair.` and `standard.`. String lists are tab-separated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::data::Scaler;
use crate::error::{Error, Result};
use crate::fair::{
    DegeneratePolicy, FairSParams, FitOptions, Method, ProjectionModel, TradeoffModel,
};
use crate::kernel::{Gamma, KernelKind, KernelModel, KernelSpec};
use crate::linalg::{Matrix, Vector};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "fairpca-model";

/// Any persisted model.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Projection(ProjectionModel),
    Tradeoff(TradeoffModel),
    Kernel(KernelModel),
}

impl AnyModel {
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            AnyModel::Projection(m) => m.transform(x),
            AnyModel::Tradeoff(m) => m.transform(x),
            AnyModel::Kernel(m) => m.transform(x),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            AnyModel::Projection(m) => m.d(),
            AnyModel::Tradeoff(m) => m.fair.d(),
            AnyModel::Kernel(m) => m.d(),
        }
    }

    pub fn as_embedding(&self) -> &dyn crate::eval::Embedding {
        match self {
            AnyModel::Projection(m) => m,
            AnyModel::Tradeoff(m) => m,
            AnyModel::Kernel(m) => m,
        }
    }
}

/// Input schema stored alongside a model so that new CSV files can be mapped
/// onto the training features.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureSchema {
    /// Names after one-hot expansion, in model input order.
    pub feature_names: Vec<String>,
    pub categorical: Vec<String>,
    pub groups: Vec<String>,
    pub label: Option<String>,
    /// Standardization applied before the model.
    pub scaler: Option<Scaler>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: AnyModel,
    pub schema: Option<FeatureSchema>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Default)]
struct Writer {
    out: String,
}

impl Writer {
    fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.out, "{key}: {value}");
    }

    fn list(&mut self, key: &str, items: &[String]) -> Result<()> {
        if items.iter().any(|s| s.contains(['\t', '\n', '\r'])) {
            return Err(Error::Format(format!(
                "{key}: names must not contain tabs or newlines"
            )));
        }
        self.kv(key, items.join("\t"));
        Ok(())
    }

    fn vector(&mut self, name: &str, v: &Vector) {
        let _ = writeln!(self.out, "vector {name} {}", v.len());
        let line: Vec<String> = v.iter().map(|&x| num(x)).collect();
        let _ = writeln!(self.out, "{}", line.join(" "));
    }

    fn matrix(&mut self, name: &str, m: &Matrix) {
        let _ = writeln!(self.out, "matrix {name} {} {}", m.nrows(), m.ncols());
        for row in m.row_iter() {
            let line: Vec<String> = row.iter().map(|&x| num(x)).collect();
            let _ = writeln!(self.out, "{}", line.join(" "));
        }
    }

    fn projection(&mut self, p: &str, m: &ProjectionModel) {
        self.kv(&format!("{p}method"), m.method.as_str());
        self.kv(&format!("{p}d"), m.d());
        self.kv(&format!("{p}k"), m.k());
        self.kv(&format!("{p}center"), m.mean.is_some());
        let attrs: Vec<String> = m.options.attributes.iter().map(|a| a.to_string()).collect();
        self.kv(&format!("{p}attributes"), attrs.join(","));
        self.kv(&format!("{p}eo_mode"), m.options.eo_mode);
        self.kv(
            &format!("{p}eo_constraint_only"),
            m.options.eo_constraint_only,
        );
        self.kv(
            &format!("{p}degenerate"),
            match m.options.degenerate {
                DegeneratePolicy::Error => "error",
                DegeneratePolicy::Skip => "skip",
            },
        );
        self.kv(&format!("{p}nullspace_tol"), num(m.options.nullspace_tol));
        match m.fair_s {
            Some(fs) => {
                self.kv(&format!("{p}fair_s_fraction"), num(fs.fraction));
                self.kv(&format!("{p}fair_s_l"), fs.l);
            }
            None => {
                self.kv(&format!("{p}fair_s_fraction"), "-");
                self.kv(&format!("{p}fair_s_l"), "-");
            }
        }
        if let Some(mu) = &m.mean {
            self.vector(&format!("{p}mean"), mu);
        }
        self.matrix(&format!("{p}U"), &m.u);
    }
}

/// Serializes a model (and optional input schema) to the text format.
pub fn to_string(file: &ModelFile) -> Result<String> {
    let mut w = Writer::default();
    let _ = writeln!(w.out, "{MAGIC} {FORMAT_VERSION}");
    match &file.model {
        AnyModel::Projection(m) => {
            w.kv("kind", "projection");
            w.projection("", m);
        }
        AnyModel::Tradeoff(t) => {
            w.kv("kind", "tradeoff");
            w.kv("lambda", num(t.lambda));
            w.projection("fair.", &t.fair);
            w.projection("standard.", &t.standard);
        }
        AnyModel::Kernel(m) => {
            w.kv("kind", "kernel");
            match m.spec.kind {
                KernelKind::Linear => w.kv("kernel", "linear"),
                KernelKind::Gaussian(Gamma::Fixed(g)) => {
                    w.kv("kernel", "gaussian");
                    w.kv("gamma", num(g));
                }
                KernelKind::Gaussian(Gamma::Auto) => {
                    return Err(Error::Format(
                        "kernel bandwidth must be resolved before saving".into(),
                    ))
                }
            }
            w.kv("d", m.d());
            w.kv("n", m.train_x.ncols());
            w.kv("k", m.k());
            let attrs: Vec<String> = m.attributes.iter().map(|a| a.to_string()).collect();
            w.kv("attributes", attrs.join(","));
            w.kv("jitter", num(m.jitter));
            w.matrix("Lambda", &m.lambda);
            w.matrix("R", &m.r);
            w.matrix("train_X", &m.train_x);
        }
    }
    if let Some(s) = &file.schema {
        w.list("schema.features", &s.feature_names)?;
        w.list("schema.categorical", &s.categorical)?;
        w.list("schema.groups", &s.groups)?;
        w.kv("schema.label", s.label.as_deref().unwrap_or("-"));
        w.kv("schema.standardized", s.scaler.is_some());
        if let Some(sc) = &s.scaler {
            w.vector("schema.scale_mean", &sc.mean);
            w.vector("schema.scale_std", &sc.std);
        }
    }
    w.out.push_str("end\n");
    Ok(w.out)
}

pub fn save(file: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_string(file)?)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<ModelFile> {
    from_str(&std::fs::read_to_string(path)?)
}

#[derive(Default)]
struct Parsed {
    keys: BTreeMap<String, String>,
    vectors: BTreeMap<String, Vector>,
    matrices: BTreeMap<String, Matrix>,
}

fn parse_nums(line: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Format(format!("{what}: bad number {t:?}")))
        })
        .collect::<Result<_>>()?;
    if vals.len() != expected {
        return Err(Error::Format(format!(
            "{what}: expected {expected} numbers, found {}",
            vals.len()
        )));
    }
    Ok(vals)
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Format(format!("{what}: expected a count, found {s:?}")))
}

fn parse(text: &str) -> Result<Parsed> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty model file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(Error::Format("not a fairpca model file".into()));
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Format("missing format version".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {version}"
        )));
    }
    let mut p = Parsed::default();
    let mut ended = false;
    while let Some(line) = lines.next() {
        if line == "end" {
            ended = true;
            break;
        }
        if let Some(rest) = line.strip_prefix("vector ") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            let [name, len] = toks[..] else {
                return Err(Error::Format(format!("malformed vector header {line:?}")));
            };
            let len = parse_usize(len, name)?;
            let data = lines
                .next()
                .ok_or_else(|| Error::Format(format!("vector {name} truncated")))?;
            p.vectors.insert(
                name.to_owned(),
                Vector::from_vec(parse_nums(data, len, name)?),
            );
        } else if let Some(rest) = line.strip_prefix("matrix ") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            let [name, rows, cols] = toks[..] else {
                return Err(Error::Format(format!("malformed matrix header {line:?}")));
            };
            let (rows, cols) = (parse_usize(rows, name)?, parse_usize(cols, name)?);
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let l = lines
                    .next()
                    .ok_or_else(|| Error::Format(format!("matrix {name} truncated")))?;
                data.extend(parse_nums(l, cols, name)?);
            }
            p.matrices
                .insert(name.to_owned(), Matrix::from_row_slice(rows, cols, &data));
        } else if let Some((k, v)) = line.split_once(": ") {
            p.keys.insert(k.to_owned(), v.to_owned());
        } else if let Some(k) = line.strip_suffix(':') {
            p.keys.insert(k.to_owned(), String::new());
        } else {
            return Err(Error::Format(format!("unrecognized line {line:?}")));
        }
    }
    if !ended {
        return Err(Error::Format("missing end marker".into()));
    }
    Ok(p)
}

impl Parsed {
    fn key(&self, k: &str) -> Result<&str> {
        self.keys
            .get(k)
            .map(String::as_str)
            .ok_or_else(|| Error::Format(format!("missing key {k}")))
    }

    fn flag(&self, k: &str) -> Result<bool> {
        match self.key(k)? {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(Error::Format(format!(
                "{k}: expected true/false, found {other:?}"
            ))),
        }
    }

    fn float(&self, k: &str) -> Result<f64> {
        let v = self.key(k)?;
        v.parse()
            .map_err(|_| Error::Format(format!("{k}: bad number {v:?}")))
    }

    fn count(&self, k: &str) -> Result<usize> {
        parse_usize(self.key(k)?, k)
    }

    fn indices(&self, k: &str) -> Result<Vec<usize>> {
        let v = self.key(k)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',').map(|t| parse_usize(t, k)).collect()
    }

    fn list(&self, k: &str) -> Result<Vec<String>> {
        let v = self.key(k)?;
        Ok(if v.is_empty() {
            Vec::new()
        } else {
            v.split('\t').map(str::to_owned).collect()
        })
    }

    fn matrix(&self, name: &str, rows: usize, cols: usize) -> Result<Matrix> {
        let m = self
            .matrices
            .get(name)
            .ok_or_else(|| Error::Format(format!("missing matrix {name}")))?;
        if m.shape() != (rows, cols) {
            return Err(Error::Format(format!(
                "matrix {name} is {:?}, expected ({rows}, {cols})",
                m.shape()
            )));
        }
        Ok(m.clone())
    }

    fn vector(&self, name: &str, len: usize) -> Result<Vector> {
        let v = self
            .vectors
            .get(name)
            .ok_or_else(|| Error::Format(format!("missing vector {name}")))?;
        if v.len() != len {
            return Err(Error::Format(format!(
                "vector {name} has length {}, expected {len}",
                v.len()
            )));
        }
        Ok(v.clone())
    }

    fn projection(&self, p: &str) -> Result<ProjectionModel> {
        let method_s = self.key(&format!("{p}method"))?;
        let method = Method::parse(method_s)
            .ok_or_else(|| Error::Format(format!("unknown method {method_s:?}")))?;
        let d = self.count(&format!("{p}d"))?;
        let k = self.count(&format!("{p}k"))?;
        let center = self.flag(&format!("{p}center"))?;
        let mean = if center {
            Some(self.vector(&format!("{p}mean"), d)?)
        } else {
            None
        };
        let degenerate = match self.key(&format!("{p}degenerate"))? {
            "error" => DegeneratePolicy::Error,
            "skip" => DegeneratePolicy::Skip,
            other => {
                return Err(Error::Format(format!(
                    "unknown degenerate policy {other:?}"
                )))
            }
        };
        let options = FitOptions {
            center,
            attributes: self.indices(&format!("{p}attributes"))?,
            eo_mode: self.flag(&format!("{p}eo_mode"))?,
            eo_constraint_only: self.flag(&format!("{p}eo_constraint_only"))?,
            degenerate,
            nullspace_tol: self.float(&format!("{p}nullspace_tol"))?,
        };
        let fair_s = match self.key(&format!("{p}fair_s_fraction"))? {
            "-" => None,
            _ => Some(FairSParams {
                fraction: self.float(&format!("{p}fair_s_fraction"))?,
                l: self.count(&format!("{p}fair_s_l"))?,
            }),
        };
        let u = self.matrix(&format!("{p}U"), d, k)?;
        Ok(ProjectionModel {
            u,
            method,
            mean,
            options,
            fair_s,
        })
    }

    fn schema(&self) -> Result<Option<FeatureSchema>> {
        if !self.keys.contains_key("schema.features") {
            return Ok(None);
        }
        let feature_names = self.list("schema.features")?;
        let scaler = if self.flag("schema.standardized")? {
            let d = feature_names.len();
            Some(Scaler {
                mean: self.vector("schema.scale_mean", d)?,
                std: self.vector("schema.scale_std", d)?,
            })
        } else {
            None
        };
        Ok(Some(FeatureSchema {
            feature_names,
            categorical: self.list("schema.categorical")?,
            groups: self.list("schema.groups")?,
            label: match self.key("schema.label")? {
                "-" => None,
                l => Some(l.to_owned()),
            },
            scaler,
        }))
    }
}

pub fn from_str(text: &str) -> Result<ModelFile> {
    let p = parse(text)?;
    let model = match p.key("kind")? {
        "projection" => AnyModel::Projection(p.projection("")?),
        "tradeoff" => AnyModel::Tradeoff(TradeoffModel::new(
            p.projection("fair.")?,
            p.projection("standard.")?,
            p.float("lambda")?,
        )?),
        "kernel" => {
            let spec = match p.key("kernel")? {
                "linear" => KernelSpec::linear(),
                "gaussian" => KernelSpec::gaussian(Gamma::Fixed(p.float("gamma")?)),
                other => return Err(Error::Format(format!("unknown kernel {other:?}"))),
            };
            let (d, n, k) = (p.count("d")?, p.count("n")?, p.count("k")?);
            let r = p
                .matrices
                .get("R")
                .ok_or_else(|| Error::Format("missing matrix R".into()))?;
            let s = r.ncols();
            AnyModel::Kernel(KernelModel {
                lambda: p.matrix("Lambda", s, k)?,
                r: p.matrix("R", n, s)?,
                train_x: p.matrix("train_X", d, n)?,
                spec,
                attributes: p.indices("attributes")?,
                jitter: p.float("jitter")?,
            })
        }
        other => return Err(Error::Format(format!("unknown model kind {other:?}"))),
    };
    Ok(ModelFile {
        model,
        schema: p.schema()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::fair::{fit_fair_pca, fit_fair_pca_s, fit_standard_pca};
    use crate::kernel::{fit_fair_kernel_pca, KernelFitOptions};

    fn fixture() -> Dataset {
        let x = Matrix::from_fn(4, 30, |i, j| {
            ((i * 13 + j * 7) % 17) as f64 / 3.0 - 2.0 + 0.1 * (j % 2) as f64 * i as f64
        });
        Dataset::from_parts(x, vec![(0..30).map(|j| j % 2).collect()], None).unwrap()
    }

    fn round_trip(file: &ModelFile) -> ModelFile {
        let text = to_string(file).unwrap();
        from_str(&text).unwrap()
    }

    #[test]
    fn projection_round_trip_is_exact() {
        let data = fixture();
        let opts = FitOptions {
            center: true,
            ..FitOptions::default()
        };
        for model in [
            fit_fair_pca(&data, 2, &opts).unwrap(),
            fit_fair_pca_s(&data, 2, 0.5, &opts).unwrap(),
            fit_standard_pca(&data, 3, false).unwrap(),
        ] {
            let file = ModelFile {
                model: AnyModel::Projection(model.clone()),
                schema: None,
            };
            let back = round_trip(&file);
            assert_eq!(back, file);
            let (a, b) = (
                model.transform(&data.x).unwrap(),
                back.model.transform(&data.x).unwrap(),
            );
            assert!((a - b).amax() <= 1e-12);
        }
    }

    #[test]
    fn tradeoff_and_kernel_round_trip() {
        let data = fixture();
        let t = TradeoffModel::new(
            fit_fair_pca(&data, 2, &FitOptions::default()).unwrap(),
            fit_standard_pca(&data, 2, false).unwrap(),
            0.343,
        )
        .unwrap();
        let file = ModelFile {
            model: AnyModel::Tradeoff(t),
            schema: None,
        };
        assert_eq!(round_trip(&file), file);

        let km = fit_fair_kernel_pca(
            &data,
            2,
            &KernelSpec::gaussian(Gamma::Auto),
            &KernelFitOptions::default(),
        )
        .unwrap();
        let schema = FeatureSchema {
            feature_names: vec!["a".into(), "b".into(), "c=x".into(), "c=y".into()],
            categorical: vec!["c".into()],
            groups: vec!["g".into()],
            label: Some("y".into()),
            scaler: Some(Scaler {
                mean: Vector::from_vec(vec![0.5, 1.0, 0.0, 0.25]),
                std: Vector::from_vec(vec![1.0, 0.0, 2.0, 3.0]),
            }),
        };
        let file = ModelFile {
            model: AnyModel::Kernel(km.clone()),
            schema: Some(schema),
        };
        let back = round_trip(&file);
        assert_eq!(back, file);
        let (a, b) = (
            km.transform(&data.x).unwrap(),
            back.model.transform(&data.x).unwrap(),
        );
        assert!((a - b).amax() <= 1e-12);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(from_str("hello"), Err(Error::Format(_))));
        assert!(matches!(
            from_str("fairpca-model 9\nend\n"),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            from_str("fairpca-model 1\nkind: projection\n"),
            Err(Error::Format(_))
        ));
        let data = fixture();
        let m = fit_standard_pca(&data, 1, false).unwrap();
        let text = to_string(&ModelFile {
            model: AnyModel::Projection(m),
            schema: None,
        })
        .unwrap();
        let broken = text.replace("matrix U 4 1", "matrix U 4 2");
        assert!(matches!(from_str(&broken), Err(Error::Format(_))));
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
    }
}
