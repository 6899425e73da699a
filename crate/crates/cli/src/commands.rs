use std::time::Instant;

use fairpca::data::{
    gen_mixture, split, standardize, write_dataset, LabelRule, MixtureSpec, Scaler,
};
use fairpca::eval::{evaluate, explained_variance, EvalOptions, EvalReport, Probe};
use fairpca::fair::{
    fit_fair_pca, fit_fair_pca_s, fit_standard_pca, lambda_grid, FitOptions, TradeoffModel,
};
use fairpca::kernel::{fit_fair_kernel_pca, KernelFitOptions};
use fairpca::par::{self, Parallelism};
use fairpca::persist::{self, AnyModel, FeatureSchema, ModelFile};
use fairpca::{Dataset, Error};
use log::info;

use crate::config::{
    check_lambdas, check_test_fraction, parse_lambdas, parse_seeds, thread_count, CliMethod,
    Command, EvalArgs, FileConfig, FitArgs, ModelConfig, Preset, ProbeName, SweepArgs, SynthArgs,
    SynthLabel, TransformArgs, DEFAULT_SEEDS, DEFAULT_TEST_FRACTION,
};
use crate::error::{CliError, Result};
use crate::table::{self, Output};

pub fn run(command: Command, threads: Option<usize>) -> Result<()> {
    match command {
        Command::Fit(a) => fit(&a, threads),
        Command::Transform(a) => transform(&a, threads),
        Command::Eval(a) => eval(&a, threads),
        Command::Sweep(a) => sweep(&a, threads),
        Command::Synth(a) => synth(&a, threads),
    }
}

fn init_threads(flag: Option<usize>, file: Option<usize>) -> Result<()> {
    if let Some(t) = thread_count(flag, file)? {
        par::init_threads(t);
    }
    Ok(())
}

fn fit_options(cfg: &ModelConfig) -> FitOptions {
    FitOptions {
        center: cfg.center,
        attributes: (0..cfg.groups.len()).collect(),
        eo_mode: cfg.eo,
        eo_constraint_only: cfg.eo_constraint_only,
        ..FitOptions::default()
    }
}

fn fit_model(cfg: &ModelConfig, data: &Dataset) -> Result<AnyModel> {
    let opts = fit_options(cfg);
    Ok(match cfg.method {
        CliMethod::Pca => AnyModel::Projection(fit_standard_pca(data, cfg.k, cfg.center)?),
        CliMethod::Fair => AnyModel::Projection(fit_fair_pca(data, cfg.k, &opts)?),
        CliMethod::FairS => {
            let f = cfg.f.expect("validated: fair-s has f");
            AnyModel::Projection(fit_fair_pca_s(data, cfg.k, f, &opts)?)
        }
        CliMethod::FairKernel => {
            let spec = cfg.kernel.expect("validated: fair-kernel has a kernel");
            let kopts = KernelFitOptions {
                attributes: opts.attributes,
                jitter: cfg.jitter,
                ..KernelFitOptions::default()
            };
            AnyModel::Kernel(fit_fair_kernel_pca(data, cfg.k, &spec, &kopts)?)
        }
    })
}

/// Standardizes with training statistics when asked; returns the scaled sets.
fn prepare(
    train: Dataset,
    others: Vec<Dataset>,
    scale: bool,
) -> Result<(Dataset, Vec<Dataset>, Option<Scaler>)> {
    if !scale {
        return Ok((train, others, None));
    }
    let mut all: Vec<&Dataset> = vec![&train];
    all.extend(others.iter());
    let (mut scaled, scaler) = standardize(&train, &all)?;
    let rest = scaled.split_off(1);
    Ok((scaled.pop().expect("training set"), rest, Some(scaler)))
}

fn fit(args: &FitArgs, threads: Option<usize>) -> Result<()> {
    let file = FileConfig::for_args(&args.model)?;
    init_threads(threads, file.threads)?;
    let cfg = ModelConfig::resolve(&args.model, &file, None)?;
    let raw = table::load_training(&args.data, &cfg)?;
    let (data, _, scaler) = prepare(raw, Vec::new(), cfg.standardize)?;
    let model = fit_model(&cfg, &data)?;
    let ev = match &model {
        AnyModel::Projection(m) => Some(explained_variance(&m.u, &m.preprocess(&data.x)?)?),
        _ => None,
    };
    let schema = FeatureSchema {
        feature_names: data.feature_names.clone(),
        categorical: cfg.categorical.clone(),
        groups: cfg.groups.clone(),
        label: cfg.label.clone(),
        scaler,
    };
    persist::save(
        &ModelFile {
            model,
            schema: Some(schema),
        },
        &args.output,
    )?;
    let ev = ev.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.6}"));
    println!(
        "method={} k={} d={} n={} explained_variance={ev}",
        cfg.method.name(),
        cfg.k,
        data.d(),
        data.n()
    );
    Ok(())
}

fn load_model(path: &std::path::Path) -> Result<(AnyModel, FeatureSchema)> {
    let file = persist::load(path)?;
    let schema = file
        .schema
        .ok_or_else(|| Error::Format(format!("{} carries no input schema", path.display())))?;
    if schema.feature_names.len() != file.model.input_dim() {
        return Err(Error::Format(format!(
            "schema lists {} features but the model takes {}",
            schema.feature_names.len(),
            file.model.input_dim()
        ))
        .into());
    }
    Ok((file.model, schema))
}

fn transform(args: &TransformArgs, threads: Option<usize>) -> Result<()> {
    init_threads(threads, None)?;
    let (model, schema) = load_model(&args.model)?;
    let data = table::load_with_schema(&args.data, &schema, false)?;
    let embedding = model.transform(&data.x)?;

    let head = table::header(&args.data)?;
    let mut passthrough: Vec<String> = schema
        .groups
        .iter()
        .filter(|g| head.contains(g))
        .cloned()
        .collect();
    passthrough.extend(schema.label.iter().filter(|l| head.contains(l)).cloned());
    let raw = table::raw_columns(&args.data, &passthrough)?;

    let mut out = table::open_output(args.output.as_ref())?;
    let mut columns = table::embedding_columns(&model);
    columns.extend(passthrough.iter().cloned());
    table::write_row(&mut out, &columns)?;
    for (j, extra) in raw.iter().enumerate() {
        let mut row: Vec<String> = embedding.column(j).iter().map(|v| v.to_string()).collect();
        row.extend(extra.iter().cloned());
        table::write_row(&mut out, &row)?;
    }
    table::finish(out)
}

fn write_report_header(out: &mut Output, first: &str) -> Result<()> {
    let mut header = vec![first.to_owned()];
    header.extend(EvalReport::CSV_COLUMNS.iter().map(|c| c.to_string()));
    table::write_row(out, &header)
}

/// Runs `job` for every seed (in parallel) and returns the results in seed order.
fn per_seed<F>(seeds: &[u64], job: F) -> Result<Vec<EvalReport>>
where
    F: Fn(u64) -> Result<EvalReport> + Sync + Send,
{
    par::map_indices(seeds.len(), Parallelism::default(), |i| job(seeds[i]))
        .into_iter()
        .collect()
}

fn eval(args: &EvalArgs, threads: Option<usize>) -> Result<()> {
    let file = FileConfig::for_args(&args.fit)?;
    init_threads(threads, file.threads)?;
    let seeds = match (&args.seeds, &file.seeds) {
        (Some(s), _) => parse_seeds(s)?,
        (None, Some(v)) if !v.is_empty() => v.clone(),
        (None, Some(_)) => return Err(CliError::Config("the seed list is empty".into())),
        (None, None) => (0..DEFAULT_SEEDS as u64).collect(),
    };
    let test_fraction = check_test_fraction(
        args.test_fraction
            .or(file.test_fraction)
            .unwrap_or(DEFAULT_TEST_FRACTION),
    )?;
    let probe = match args.probe.or(file.probe).unwrap_or(ProbeName::Linear) {
        ProbeName::Linear => Probe::Linear,
        ProbeName::Quadratic => Probe::Quadratic,
    };
    let opts = EvalOptions {
        probe,
        ..EvalOptions::default()
    };

    let reports = if let Some(path) = &args.model {
        let (model, schema) = load_model(path)?;
        if schema.groups.is_empty() {
            return Err(CliError::Config(
                "the model was fitted without a group column; nothing to evaluate against".into(),
            ));
        }
        let data = table::load_with_schema(&args.data, &schema, true)?;
        per_seed(&seeds, |seed| {
            let (train, test) = split(&data, test_fraction, seed)?;
            Ok(evaluate(model.as_embedding(), &train, &test, &opts)?)
        })?
    } else {
        let cfg = ModelConfig::resolve(&args.fit, &file, None)?;
        if cfg.groups.is_empty() {
            return Err(CliError::Config("eval needs a --group column".into()));
        }
        let data = table::load_training(&args.data, &cfg)?;
        per_seed(&seeds, |seed| {
            let (train, test) = split(&data, test_fraction, seed)?;
            let (train, rest, _) = prepare(train, vec![test], cfg.standardize)?;
            let model = fit_model(&cfg, &train)?;
            Ok(evaluate(model.as_embedding(), &train, &rest[0], &opts)?)
        })?
    };
    info!("evaluated {} splits", reports.len());

    let mut out = table::open_output(args.output.as_ref())?;
    write_report_header(&mut out, "seed")?;
    for (seed, r) in seeds.iter().zip(&reports) {
        let mut row = vec![seed.to_string()];
        row.extend(r.csv_cells());
        table::write_row(&mut out, &row)?;
    }
    let (mean, std) = EvalReport::summarize(&reports);
    for (name, summary) in [("mean", mean), ("std", std)] {
        let mut row = vec![name.to_owned()];
        row.extend(summary.csv_cells());
        table::write_row(&mut out, &row)?;
    }
    table::finish(out)
}

fn sweep(args: &SweepArgs, threads: Option<usize>) -> Result<()> {
    let file = FileConfig::for_args(&args.fit)?;
    init_threads(threads, file.threads)?;
    let cfg = ModelConfig::resolve(&args.fit, &file, Some(CliMethod::Fair))?;
    if !matches!(cfg.method, CliMethod::Fair | CliMethod::FairS) {
        return Err(CliError::Config(
            "sweep pairs --method fair or fair-s with standard PCA".into(),
        ));
    }
    if cfg.label.is_none() {
        return Err(CliError::Config("sweep needs a --label column".into()));
    }
    let lambdas = match (&args.lambdas, &file.lambdas) {
        (Some(s), _) => parse_lambdas(s)?,
        (None, Some(v)) => v.clone(),
        (None, None) => lambda_grid(),
    };
    check_lambdas(&lambdas)?;
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let test_fraction = check_test_fraction(
        args.test_fraction
            .or(file.test_fraction)
            .unwrap_or(DEFAULT_TEST_FRACTION),
    )?;

    let data = table::load_training(&args.data, &cfg)?;
    let (train, test) = split(&data, test_fraction, seed)?;
    let (train, rest, _) = prepare(train, vec![test], cfg.standardize)?;
    let test = &rest[0];
    let start = Instant::now();
    let AnyModel::Projection(fair) = fit_model(&cfg, &train)? else {
        unreachable!("fair and fair-s fit projections")
    };
    let standard = fit_standard_pca(&train, cfg.k, cfg.center)?;
    let fit_seconds = start.elapsed().as_secs_f64();
    let base = TradeoffModel::new(fair, standard, 0.0)?;

    let opts = EvalOptions::default();
    let reports: Vec<EvalReport> = par::map_indices(lambdas.len(), Parallelism::default(), |i| {
        Ok(evaluate(
            &base.with_lambda(lambdas[i])?,
            &train,
            test,
            &opts,
        )?)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut out = table::open_output(args.output.as_ref())?;
    let mut header: Vec<String> = [
        "lambda",
        "downstream_accuracy",
        "delta_dp",
        "delta_eo",
        "mmd2",
        "linear_insep",
    ]
    .map(String::from)
    .to_vec();
    if !args.no_timing {
        header.push("fit_seconds".into());
    }
    table::write_row(&mut out, &header)?;
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (lambda, r) in lambdas.iter().zip(&reports) {
        let mut row = vec![
            lambda.to_string(),
            cell(r.downstream_accuracy),
            cell(r.delta_dp),
            cell(r.delta_eo),
            r.mmd2.to_string(),
            r.linear_insep.to_string(),
        ];
        if !args.no_timing {
            row.push(format!("{fit_seconds:.6}"));
        }
        table::write_row(&mut out, &row)?;
    }
    table::finish(out)
}

fn synth(args: &SynthArgs, threads: Option<usize>) -> Result<()> {
    init_threads(threads, None)?;
    let spec = match args.preset {
        Preset::EqualCov => {
            MixtureSpec::equal_covariance(args.d, args.n_per_group, args.shift, args.seed)
        }
        Preset::DiffCov => MixtureSpec::different_covariance(args.d, args.n_per_group, args.seed),
    };
    let label = match args.label {
        SynthLabel::None => LabelRule::None,
        SynthLabel::Group => LabelRule::Group,
        SynthLabel::Linear => {
            let weights = (0..args.d).map(|i| if i < 2 { 1.0 } else { 0.0 }).collect();
            LabelRule::Linear {
                weights,
                bias: 0.0,
                noise: args.label_noise,
            }
        }
    };
    let data = gen_mixture(&spec.with_label(label))?;
    let mut out = table::open_output(args.output.as_ref())?;
    write_dataset(&data, &mut out)?;
    table::finish(out)
}
