//! Command-line arguments, the optional TOML config file and their merge.
//!
//! Precedence: command-line flags, then the config file, then defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairpca::kernel::{Gamma, KernelSpec};
use fairpca::linalg::DEFAULT_JITTER;
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const THREADS_ENV: &str = "FAIRPCA_THREADS";
pub const DEFAULT_F: f64 = 0.5;
pub const DEFAULT_TEST_FRACTION: f64 = 0.3;
pub const DEFAULT_SEEDS: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "fairpca", version, about = "Fair principal component analysis")]
pub struct Cli {
    /// Worker threads (default: $FAIRPCA_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write it to a model file.
    Fit(FitArgs),
    /// Embed a CSV file with a fitted model.
    Transform(TransformArgs),
    /// Evaluate a model (or a method fitted per split) over random splits.
    Eval(EvalArgs),
    /// Sweep the trade-off parameter of the concatenated representation.
    Sweep(SweepArgs),
    /// Generate a synthetic two-group Gaussian dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliMethod {
    Pca,
    Fair,
    FairS,
    FairKernel,
}

impl CliMethod {
    pub fn name(self) -> &'static str {
        match self {
            CliMethod::Pca => "pca",
            CliMethod::Fair => "fair",
            CliMethod::FairS => "fair-s",
            CliMethod::FairKernel => "fair-kernel",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        <CliMethod as ValueEnum>::from_str(s, false)
            .map_err(|_| CliError::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelName {
    Gaussian,
    Linear,
}

/// Options shared by every command that fits a model.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// TOML file with default values for any of these options.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Fitting method (required except for sweep, which defaults to fair).
    #[arg(long, value_enum)]
    pub method: Option<CliMethod>,
    /// Output dimension.
    #[arg(long)]
    pub k: Option<usize>,
    /// Sensitive attribute column (repeatable; the first one drives the metrics).
    #[arg(long = "group")]
    pub groups: Vec<String>,
    /// Binary task label column.
    #[arg(long)]
    pub label: Option<String>,
    /// Feature column to one-hot encode (repeatable).
    #[arg(long = "categorical")]
    pub categorical: Vec<String>,
    /// Feature columns to use (repeatable; default: all remaining columns).
    #[arg(long = "feature")]
    pub features: Vec<String>,
    /// Equal-opportunity mode: fit on the positively labelled points.
    #[arg(long)]
    pub eo: bool,
    /// In equal-opportunity mode, take the variance objective over all points.
    #[arg(long)]
    pub eo_constraint_only: bool,
    #[arg(long, overrides_with = "no_center")]
    pub center: bool,
    /// Do not subtract the training mean.
    #[arg(long)]
    pub no_center: bool,
    /// Scale features to zero mean and unit variance on the training data.
    #[arg(long, overrides_with = "no_standardize")]
    pub standardize: bool,
    #[arg(long)]
    pub no_standardize: bool,
    /// Fair PCA-S fraction: uses l = max(k, floor(f·d)) directions.
    #[arg(long)]
    pub f: Option<f64>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelName>,
    /// Gaussian kernel bandwidth: a positive number or "auto".
    #[arg(long)]
    pub gamma: Option<String>,
    /// Ridge added in the kernel eigenproblem.
    #[arg(long)]
    pub jitter: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Training CSV.
    pub data: PathBuf,
    /// Model file to write.
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// CSV to embed.
    pub data: PathBuf,
    /// Fitted model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Output CSV (default: standard output).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// CSV to split into train and test parts.
    pub data: PathBuf,
    /// Evaluate this fitted model instead of fitting one per split.
    #[arg(long, conflicts_with_all = ["method", "k"])]
    pub model: Option<PathBuf>,
    /// Split seeds: a comma-separated list or a half-open range `a..b`.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Share of points held out for testing (default 0.3).
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Group probe behind the linear_insep column.
    #[arg(long, value_enum)]
    pub probe: Option<ProbeName>,
    /// Output CSV (default: standard output).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub fit: ModelArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeName {
    Linear,
    /// Logistic regression on degree-two monomials of the embedding.
    Quadratic,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// CSV to split into train and test parts.
    pub data: PathBuf,
    /// Trade-off values (comma-separated; default (i/10)³ for i = 0..10).
    #[arg(long)]
    pub lambdas: Option<String>,
    /// Split seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Share of points held out for testing (default 0.3).
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Omit the wall-clock column so that the output is reproducible byte for byte.
    #[arg(long)]
    pub no_timing: bool,
    /// Output CSV (default: standard output).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub fit: ModelArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Equal covariances, means differing along the first axis.
    EqualCov,
    /// Strongly different covariances on the leading coordinates.
    DiffCov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthLabel {
    None,
    /// Label equals the group.
    Group,
    /// Thresholded sum of the first two coordinates plus noise.
    Linear,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Dataset shape.
    #[arg(long, value_enum, default_value = "equal-cov")]
    pub preset: Preset,
    /// Number of features.
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    /// Points drawn per group.
    #[arg(long, default_value_t = 1000)]
    pub n_per_group: usize,
    /// Half the distance between the group means (equal-cov preset).
    #[arg(long, default_value_t = 1.0)]
    pub shift: f64,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Label column: none, the group itself, or a noisy linear rule.
    #[arg(long, value_enum, default_value = "none")]
    pub label: SynthLabel,
    /// Standard deviation of the noise in the linear label rule.
    #[arg(long, default_value_t = 0.5)]
    pub label_noise: f64,
    /// Output CSV (default: standard output).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GammaValue {
    Number(f64),
    Text(String),
}

/// Keys accepted in the config file; all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub method: Option<String>,
    pub k: Option<usize>,
    pub groups: Option<Vec<String>>,
    pub label: Option<String>,
    pub categorical: Option<Vec<String>>,
    pub features: Option<Vec<String>>,
    pub eo: Option<bool>,
    pub eo_constraint_only: Option<bool>,
    pub center: Option<bool>,
    pub standardize: Option<bool>,
    pub f: Option<f64>,
    pub kernel: Option<KernelName>,
    pub gamma: Option<GammaValue>,
    pub jitter: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub test_fraction: Option<f64>,
    pub probe: Option<ProbeName>,
    pub lambdas: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    pub fn for_args(args: &ModelArgs) -> Result<Self> {
        args.config
            .as_deref()
            .map_or_else(|| Ok(FileConfig::default()), FileConfig::load)
    }
}

/// Fully resolved and validated fitting options.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub method: CliMethod,
    pub k: usize,
    pub groups: Vec<String>,
    pub label: Option<String>,
    pub categorical: Vec<String>,
    pub features: Option<Vec<String>>,
    pub eo: bool,
    pub eo_constraint_only: bool,
    pub center: bool,
    pub standardize: bool,
    /// Set for fair-s only.
    pub f: Option<f64>,
    /// Set for fair-kernel only.
    pub kernel: Option<KernelSpec>,
    pub jitter: f64,
}

fn nonempty(v: &[String]) -> Option<Vec<String>> {
    (!v.is_empty()).then(|| v.to_vec())
}

/// Flag value if set, else the file value.
fn flag_bool(on: bool, off: bool, file: Option<bool>) -> Option<bool> {
    if on {
        Some(true)
    } else if off {
        Some(false)
    } else {
        file
    }
}

fn parse_gamma(text: &str) -> Result<Gamma> {
    if text.eq_ignore_ascii_case("auto") {
        return Ok(Gamma::Auto);
    }
    match text.parse::<f64>() {
        Ok(g) if g > 0.0 && g.is_finite() => Ok(Gamma::Fixed(g)),
        _ => Err(CliError::Config(format!(
            "gamma must be a positive number or \"auto\", got {text:?}"
        ))),
    }
}

impl ModelConfig {
    /// Merges flags over `file`; `default_method` applies when neither sets one.
    pub fn resolve(
        args: &ModelArgs,
        file: &FileConfig,
        default_method: Option<CliMethod>,
    ) -> Result<Self> {
        let method = match (args.method, &file.method) {
            (Some(m), _) => m,
            (None, Some(s)) => CliMethod::parse(s)?,
            (None, None) => {
                default_method.ok_or_else(|| CliError::Config("--method is required".into()))?
            }
        };
        let k = args
            .k
            .or(file.k)
            .ok_or_else(|| CliError::Config("--k is required".into()))?;
        if k == 0 {
            return Err(CliError::Config("k must be at least 1".into()));
        }
        let groups = nonempty(&args.groups)
            .or_else(|| file.groups.clone())
            .unwrap_or_default();
        let categorical = nonempty(&args.categorical)
            .or_else(|| file.categorical.clone())
            .unwrap_or_default();
        let features = nonempty(&args.features).or_else(|| file.features.clone());
        let label = args.label.clone().or_else(|| file.label.clone());
        let eo = args.eo || file.eo.unwrap_or(false);
        let eo_constraint_only =
            args.eo_constraint_only || file.eo_constraint_only.unwrap_or(false);
        let center = flag_bool(args.center, args.no_center, file.center).unwrap_or(true);
        let standardize =
            flag_bool(args.standardize, args.no_standardize, file.standardize).unwrap_or(false);
        let f = args.f.or(file.f);
        let kernel_name = args.kernel.or(file.kernel);
        let gamma = match (&args.gamma, &file.gamma) {
            (Some(s), _) => Some(parse_gamma(s)?),
            (None, Some(GammaValue::Text(s))) => Some(parse_gamma(s)?),
            (None, Some(GammaValue::Number(g))) => Some(parse_gamma(&g.to_string())?),
            (None, None) => None,
        };
        let jitter = args.jitter.or(file.jitter);

        if method != CliMethod::FairS && f.is_some() {
            return Err(CliError::Config("f applies to --method fair-s only".into()));
        }
        if method != CliMethod::FairKernel
            && (kernel_name.is_some() || gamma.is_some() || jitter.is_some())
        {
            return Err(CliError::Config(
                "kernel, gamma and jitter apply to --method fair-kernel only".into(),
            ));
        }
        if method != CliMethod::Pca && groups.is_empty() {
            return Err(CliError::Config(format!(
                "--method {} needs at least one --group column",
                method.name()
            )));
        }
        if eo && !matches!(method, CliMethod::Fair | CliMethod::FairS) {
            return Err(CliError::Config(
                "--eo applies to --method fair and fair-s only".into(),
            ));
        }
        if eo && label.is_none() {
            return Err(CliError::Config("--eo needs a --label column".into()));
        }
        if eo_constraint_only && !eo {
            return Err(CliError::Config("--eo-constraint-only needs --eo".into()));
        }
        if method == CliMethod::FairS && groups.len() != 1 {
            return Err(CliError::Config(
                "--method fair-s takes exactly one --group column".into(),
            ));
        }
        let f = match method {
            CliMethod::FairS => {
                let f = f.unwrap_or(DEFAULT_F);
                if !(f > 0.0 && f <= 1.0) {
                    return Err(CliError::Config(format!("f must lie in (0, 1], got {f}")));
                }
                Some(f)
            }
            _ => None,
        };
        let jitter = jitter.unwrap_or(DEFAULT_JITTER);
        if !(jitter > 0.0 && jitter.is_finite()) {
            return Err(CliError::Config(format!(
                "jitter must be positive, got {jitter}"
            )));
        }
        let kernel = (method == CliMethod::FairKernel).then(|| {
            match kernel_name.unwrap_or(KernelName::Gaussian) {
                KernelName::Gaussian => Ok(KernelSpec::gaussian(gamma.unwrap_or(Gamma::Auto))),
                KernelName::Linear if gamma.is_some() => Err(CliError::Config(
                    "gamma applies to the gaussian kernel only".into(),
                )),
                KernelName::Linear => Ok(KernelSpec::linear()),
            }
        });
        let kernel = kernel.transpose()?;
        Ok(ModelConfig {
            method,
            k,
            groups,
            label,
            categorical,
            features,
            eo,
            eo_constraint_only,
            center,
            standardize,
            f,
            kernel,
            jitter,
        })
    }
}

/// `"0,3,5"` or `"0..10"`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || {
        CliError::Config(format!(
            "seeds must be a list like 0,1,2 or a range like 0..10, got {text:?}"
        ))
    };
    let seeds: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let (a, b): (u64, u64) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        (a..b).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

pub fn parse_lambdas(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad lambda value {s:?}")))
        })
        .collect()
}

pub fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(CliError::Config("the lambda grid is empty".into()));
    }
    match lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        Some(l) => Err(CliError::Config(format!(
            "lambda values must lie in [0, 1], got {l}"
        ))),
        None => Ok(()),
    }
}

pub fn check_test_fraction(t: f64) -> Result<f64> {
    if t > 0.0 && t < 1.0 {
        Ok(t)
    } else {
        Err(CliError::Config(format!(
            "test fraction must lie in (0, 1), got {t}"
        )))
    }
}

/// Thread count from the flag, the config file or the environment, in that order.
pub fn thread_count(flag: Option<usize>, file: Option<usize>) -> Result<Option<usize>> {
    if let Some(t) = flag.or(file) {
        return if t == 0 {
            Err(CliError::Config("threads must be at least 1".into()))
        } else {
            Ok(Some(t))
        };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(CliError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(method: Option<CliMethod>, k: Option<usize>) -> ModelArgs {
        ModelArgs {
            method,
            k,
            groups: vec!["g".into()],
            ..ModelArgs::default()
        }
    }

    #[test]
    fn flags_override_file() {
        let file: FileConfig =
            toml::from_str("method = \"pca\"\nk = 3\ncenter = false\nstandardize = true").unwrap();
        let cfg = ModelConfig::resolve(&args(Some(CliMethod::Fair), None), &file, None).unwrap();
        assert_eq!(cfg.method, CliMethod::Fair);
        assert_eq!(cfg.k, 3);
        assert!(!cfg.center);
        assert!(cfg.standardize);
        let mut a = args(None, Some(2));
        a.center = true;
        let cfg = ModelConfig::resolve(&a, &file, None).unwrap();
        assert_eq!((cfg.method, cfg.k, cfg.center), (CliMethod::Pca, 2, true));
    }

    #[test]
    fn incompatible_options_rejected() {
        let file = FileConfig::default();
        let mut a = args(Some(CliMethod::Fair), Some(2));
        a.f = Some(0.5);
        assert!(ModelConfig::resolve(&a, &file, None).is_err());
        let mut a = args(Some(CliMethod::Pca), Some(2));
        a.gamma = Some("auto".into());
        assert!(ModelConfig::resolve(&a, &file, None).is_err());
        let mut a = args(Some(CliMethod::FairKernel), Some(2));
        a.kernel = Some(KernelName::Linear);
        a.gamma = Some("0.5".into());
        assert!(ModelConfig::resolve(&a, &file, None).is_err());
        let mut a = args(Some(CliMethod::Fair), Some(2));
        a.groups.clear();
        assert!(ModelConfig::resolve(&a, &file, None).is_err());
        assert!(toml::from_str::<FileConfig>("colour = 1").is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = ModelConfig::resolve(
            &args(Some(CliMethod::FairS), Some(1)),
            &FileConfig::default(),
            None,
        )
        .unwrap();
        assert_eq!(cfg.f, Some(DEFAULT_F));
        assert!(cfg.center);
        let cfg = ModelConfig::resolve(
            &args(Some(CliMethod::FairKernel), Some(1)),
            &FileConfig::default(),
            None,
        )
        .unwrap();
        assert_eq!(cfg.kernel, Some(KernelSpec::gaussian(Gamma::Auto)));
        let file: FileConfig = toml::from_str("method = \"fair-kernel\"\ngamma = 0.25").unwrap();
        let cfg = ModelConfig::resolve(&args(None, Some(1)), &file, None).unwrap();
        assert_eq!(cfg.kernel, Some(KernelSpec::gaussian(Gamma::Fixed(0.25))));
    }

    #[test]
    fn seed_syntax() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("4, 7").unwrap(), vec![4, 7]);
        assert!(parse_seeds("3..3").is_err());
        assert!(parse_seeds("x").is_err());
    }
}
