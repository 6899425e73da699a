//! CSV input mapped onto model schemas, and CSV output.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use fairpca::data::{load_csv, ColumnSpec};
use fairpca::persist::{AnyModel, FeatureSchema};
use fairpca::{Dataset, Error, Matrix};
use log::warn;

use crate::config::ModelConfig;
use crate::error::Result;

pub type Output = csv::Writer<Box<dyn Write>>;

pub fn open_output(path: Option<&PathBuf>) -> Result<Output> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(Error::from)?)),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::WriterBuilder::new().from_writer(sink))
}

pub fn header(path: &Path) -> Result<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).map_err(Error::from)?;
    Ok(rdr
        .headers()
        .map_err(Error::from)?
        .iter()
        .map(|h| h.trim().to_owned())
        .collect())
}

/// Raw string cells of the named columns, one vector per row.
pub fn raw_columns(path: &Path, names: &[String]) -> Result<Vec<Vec<String>>> {
    let head = header(path)?;
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            head.iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::Schema(format!("column {n:?} not found")))
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut rdr = csv::Reader::from_path(path).map_err(Error::from)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(Error::from)?;
        rows.push(
            idx.iter()
                .map(|&i| rec.get(i).unwrap_or("").trim().to_owned())
                .collect(),
        );
    }
    Ok(rows)
}

pub fn column_spec(cfg: &ModelConfig) -> ColumnSpec {
    ColumnSpec {
        features: cfg.features.clone(),
        categorical: cfg.categorical.clone(),
        groups: cfg.groups.clone(),
        label: cfg.label.clone(),
    }
}

pub fn load_training(path: &Path, cfg: &ModelConfig) -> Result<Dataset> {
    Ok(load_csv(path, &column_spec(cfg))?)
}

/// Source columns of the expanded feature names, in first-use order.
fn source_columns(schema: &FeatureSchema) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for name in &schema.feature_names {
        let src = match name.split_once('=') {
            Some((col, _)) if schema.categorical.iter().any(|c| c == col) => col.to_owned(),
            _ => name.clone(),
        };
        if seen.insert(src.clone()) {
            out.push(src);
        }
    }
    out
}

/// Loads `path` with the columns of `schema`: features are reordered to the
/// training layout, unseen categorical levels encode as all zeros, and the
/// training scaler is applied. Group and label columns are read when present
/// (groups are required when `need_groups` is set).
pub fn load_with_schema(path: &Path, schema: &FeatureSchema, need_groups: bool) -> Result<Dataset> {
    let head = header(path)?;
    let has = |c: &String| head.iter().any(|h| h == c);
    let groups: Vec<String> = if need_groups {
        schema.groups.clone()
    } else {
        schema.groups.iter().filter(|g| has(g)).cloned().collect()
    };
    let spec = ColumnSpec {
        features: Some(source_columns(schema)),
        categorical: schema.categorical.clone(),
        groups,
        label: schema.label.clone().filter(|l| has(l)),
    };
    let raw = load_csv(path, &spec)?;
    let mut x = Matrix::zeros(schema.feature_names.len(), raw.n());
    for (i, name) in schema.feature_names.iter().enumerate() {
        match raw.feature_names.iter().position(|f| f == name) {
            Some(j) => x.set_row(i, &raw.x.row(j)),
            None => warn!(
                "level {name} does not occur in {}; its indicator is 0",
                path.display()
            ),
        }
    }
    for extra in raw
        .feature_names
        .iter()
        .filter(|f| !schema.feature_names.contains(f))
    {
        warn!("{extra} was not seen in training; rows with it get an all-zero encoding");
    }
    if let Some(scaler) = &schema.scaler {
        x = scaler.transform(&x)?;
    }
    Ok(Dataset::new(
        x,
        schema.feature_names.clone(),
        raw.attributes,
        raw.labels,
    )?)
}

pub fn embedding_columns(model: &AnyModel) -> Vec<String> {
    match model {
        AnyModel::Projection(m) => (1..=m.k()).map(|i| format!("pc{i}")).collect(),
        AnyModel::Tradeoff(t) => (1..=t.fair.k())
            .map(|i| format!("fair{i}"))
            .chain((1..=t.standard.k()).map(|i| format!("std{i}")))
            .collect(),
        AnyModel::Kernel(m) => (1..=m.k()).map(|i| format!("kpc{i}")).collect(),
    }
}

pub fn write_row(out: &mut Output, cells: &[String]) -> Result<()> {
    out.write_record(cells).map_err(Error::from)?;
    Ok(())
}

pub fn finish(mut out: Output) -> Result<()> {
    out.flush().map_err(Error::from)?;
    Ok(())
}
