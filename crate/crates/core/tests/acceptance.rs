//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails. Run with `cargo test -p fairpca --test acceptance -- --nocapture`.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use fairpca::data::{
    gen_mixture, load_csv, split, standardize, ColumnSpec, LabelRule, MixtureSpec,
};
use fairpca::eval::{
    evaluate, quadratic_features, train_logreg, EvalOptions, EvalReport, DEFAULT_REG,
};
use fairpca::fair::{
    fit_fair_pca, fit_fair_pca_s, fit_standard_pca, lambda_grid, trace_objective, FitOptions,
    TradeoffModel,
};
use fairpca::kernel::{fit_fair_kernel_pca, KernelFitOptions, KernelSpec};
use fairpca::{Dataset, Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random data with group-dependent means and a random linear mixing, every
/// group present.
fn random_grouped(rng: &mut ChaCha8Rng, d: usize, n: usize, m: usize) -> Dataset {
    let codes: Vec<usize> = (0..n)
        .map(|i| if i < m { i } else { rng.random_range(0..m) })
        .collect();
    let means: Vec<Vector> = (0..m)
        .map(|_| Vector::from_fn(d, |_, _| 2.0 * normal(rng)))
        .collect();
    let mix = Matrix::from_fn(d, d, |_, _| normal(rng)) / (d as f64).sqrt();
    let noise = Matrix::from_fn(d, n, |_, _| normal(rng));
    let mut x = mix * noise;
    for (j, &g) in codes.iter().enumerate() {
        let mut col = x.column_mut(j);
        col += &means[g];
    }
    Dataset::from_parts(x, vec![codes], None).unwrap()
}

fn group_mean(x: &Matrix, codes: &[usize], g: usize) -> Vector {
    let idx: Vec<usize> = (0..codes.len()).filter(|&i| codes[i] == g).collect();
    x.select_columns(&idx).column_mean()
}

fn within(elapsed: Duration, bound_s: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < bound_s {
        Ok(())
    } else {
        Err(format!(
            "took {:.2}s, bound {bound_s}s",
            elapsed.as_secs_f64()
        ))
    }
}

fn constraint_exactness() -> Outcome {
    let start = Instant::now();
    let (mut worst_mean, mut worst_orth) = (0.0f64, 0.0f64);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.random_range(3..=50);
        let n = rng.random_range(10..=500);
        let m = rng.random_range(2..=4usize.min(d - 1));
        let k = rng.random_range(1..=5usize.min(d + 1 - m));
        let data = random_grouped(&mut rng, d, n, m);
        let model = fit_fair_pca(&data, k, &FitOptions::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let u = &model.u;
        let codes = &data.attributes[0].codes;
        let scale = (u.transpose() * &data.x).amax().max(f64::MIN_POSITIVE);
        let proj: Vec<Vector> = (0..m)
            .map(|g| u.transpose() * group_mean(&data.x, codes, g))
            .collect();
        for g in 1..m {
            let gap = (&proj[g] - &proj[0]).amax() / scale;
            worst_mean = worst_mean.max(gap);
        }
        worst_orth = worst_orth.max((u.transpose() * u - Matrix::identity(k, k)).amax());
    }
    within(start.elapsed(), 10.0)?;
    let detail = format!("max relative mean gap {worst_mean:.2e}, max |UᵀU − I| {worst_orth:.2e}");
    if worst_mean <= 1e-6 && worst_orth <= 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cross(a: &Vector, b: &Vector) -> Vector {
    Vector::from_vec(vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

/// Orthonormal basis of the plane orthogonal to `c` in R³, built from cross
/// products.
fn perpendicular_plane(c: &Vector) -> (Vector, Vector) {
    let j = (0..3)
        .min_by(|&i, &j| c[i].abs().total_cmp(&c[j].abs()))
        .unwrap();
    let mut e = Vector::zeros(3);
    e[j] = 1.0;
    let a = cross(c, &e).normalize();
    let b = cross(c, &a).normalize();
    (a, b)
}

fn brute_force_optimality() -> Outcome {
    const GRID: usize = 1_000_000;
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let m = if seed % 5 == 0 { 3 } else { 2 };
        let n = rng.random_range(20..=200);
        let data = random_grouped(&mut rng, 3, n, m);
        let model = fit_fair_pca(&data, 1, &FitOptions::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let fair = trace_objective(&model.u, &data.x);

        let codes = &data.attributes[0].codes;
        let mu = data.x.column_mean();
        let c: Vec<Vector> = (0..m)
            .map(|g| group_mean(&data.x, codes, g) - &mu)
            .collect();
        let sxx = &data.x * data.x.transpose();
        let quad = |v: &Vector| (v.transpose() * &sxx * v)[(0, 0)];
        let best = if m == 2 {
            // admissible unit vectors form a circle; v and −v agree, so half of it
            let (a, b) = perpendicular_plane(&c[1]);
            (0..GRID)
                .map(|i| {
                    let t = std::f64::consts::PI * i as f64 / GRID as f64;
                    quad(&(&a * t.cos() + &b * t.sin()))
                })
                .fold(f64::NEG_INFINITY, f64::max)
        } else {
            // two independent constraints leave a single direction
            quad(&cross(&c[1], &c[2]).normalize())
        };
        let gap = (fair - best).abs() / best.max(f64::MIN_POSITIVE);
        worst = worst.max(gap);
        if fair < best * (1.0 - 1e-6) {
            return Err(format!(
                "seed {seed}: fair objective {fair} below grid maximum {best}"
            ));
        }
    }
    within(start.elapsed(), 60.0)?;
    let detail = format!("max relative gap to grid maximum {worst:.2e}");
    if worst <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn majority_rate(data: &Dataset) -> f64 {
    let ones =
        data.attributes[0].codes.iter().filter(|&&c| c == 1).count() as f64 / data.n() as f64;
    ones.max(1.0 - ones)
}

fn centered() -> FitOptions {
    FitOptions {
        center: true,
        ..FitOptions::default()
    }
}

fn equal_covariance_reproduction() -> Outcome {
    let start = Instant::now();
    let data = gen_mixture(&MixtureSpec::equal_covariance(10, 10_000, 2.0, 7))
        .map_err(|e| e.to_string())?;
    let (train, test) = split(&data, 0.3, 7).map_err(|e| e.to_string())?;
    let opts = EvalOptions::default();
    let fair = fit_fair_pca(&train, 2, &centered()).map_err(|e| e.to_string())?;
    let std = fit_standard_pca(&train, 2, true).map_err(|e| e.to_string())?;
    let rf = evaluate(&fair, &train, &test, &opts).map_err(|e| e.to_string())?;
    let rs = evaluate(&std, &train, &test, &opts).map_err(|e| e.to_string())?;
    within(start.elapsed(), 30.0)?;
    let majority = majority_rate(&test);
    let (fair_acc, std_acc) = (1.0 - rf.linear_insep, 1.0 - rs.linear_insep);
    let detail = format!(
        "fair MMD² {:.4}, fair probe {fair_acc:.3} (majority {majority:.3}), standard probe {std_acc:.3}",
        rf.mmd2
    );
    if rf.mmd2 <= 0.01 && fair_acc <= majority + 0.02 && std_acc >= 0.9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn quadratic_probe_accuracy(
    model: &dyn fairpca::eval::Embedding,
    train: &Dataset,
    test: &Dataset,
) -> Result<f64, String> {
    let groups =
        |d: &Dataset| -> Vec<u8> { d.attributes[0].codes.iter().map(|&c| c as u8).collect() };
    let ftr = quadratic_features(&model.embed(&train.x).map_err(|e| e.to_string())?);
    let fte = quadratic_features(&model.embed(&test.x).map_err(|e| e.to_string())?);
    let probe = train_logreg(&ftr, &groups(train), DEFAULT_REG).map_err(|e| e.to_string())?;
    probe
        .accuracy(&fte, &groups(test))
        .map_err(|e| e.to_string())
}

fn covariance_obfuscation() -> Outcome {
    let start = Instant::now();
    let data =
        gen_mixture(&MixtureSpec::different_covariance(10, 2000, 11)).map_err(|e| e.to_string())?;
    let (train, test) = split(&data, 0.3, 11).map_err(|e| e.to_string())?;
    let fair = fit_fair_pca(&train, 2, &centered()).map_err(|e| e.to_string())?;
    let fair_s = fit_fair_pca_s(&train, 2, 0.5, &centered()).map_err(|e| e.to_string())?;
    let acc_fair = quadratic_probe_accuracy(&fair, &train, &test)?;
    let acc_s = quadratic_probe_accuracy(&fair_s, &train, &test)?;
    within(start.elapsed(), 30.0)?;
    let detail = format!("quadratic probe: fair {acc_fair:.3}, fair-S(f=0.5) {acc_s:.3}");
    if acc_fair >= 0.8 && acc_s <= 0.6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pairwise_distances(e: &Matrix) -> Matrix {
    let n = e.ncols();
    Matrix::from_fn(n, n, |i, j| (e.column(i) - e.column(j)).norm())
}

fn kernel_linear_consistency() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data = random_grouped(&mut rng, 5, 30, 2);
    let fair = fit_fair_pca(&data, 2, &FitOptions::default()).map_err(|e| e.to_string())?;
    let kern = fit_fair_kernel_pca(
        &data,
        2,
        &KernelSpec::linear(),
        &KernelFitOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let d1 = pairwise_distances(&fair.transform(&data.x).map_err(|e| e.to_string())?);
    let d2 = pairwise_distances(&kern.transform(&data.x).map_err(|e| e.to_string())?);
    let rel = (&d1 - &d2).amax() / d1.amax();
    within(start.elapsed(), 5.0)?;
    let detail = format!("max relative pairwise-distance difference {rel:.2e}");
    if rel <= 1e-4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fair_s_degeneracy() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let d = rng.random_range(4..=15);
        let k = rng.random_range(1..=3);
        let data = random_grouped(&mut rng, d, 200, 2);
        let f = (d - 1) as f64 / d as f64;
        let fair = fit_fair_pca(&data, k, &centered()).map_err(|e| e.to_string())?;
        let fs = fit_fair_pca_s(&data, k, f, &centered()).map_err(|e| e.to_string())?;
        if fs.fair_s.map(|p| p.l) != Some(d - 1) {
            return Err(format!(
                "seed {seed}: l = {:?}, expected {}",
                fs.fair_s.map(|p| p.l),
                d - 1
            ));
        }
        let diff = (&fair.u * fair.u.transpose() - &fs.u * fs.u.transpose()).amax();
        worst = worst.max(diff);
    }
    within(start.elapsed(), 5.0)?;
    let detail = format!("max projector difference {worst:.2e}");
    if worst <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn runtime_scaling() -> Outcome {
    let data = gen_mixture(&MixtureSpec::equal_covariance(800, 1000, 1.0, 3))
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let model = fit_fair_pca(&data, 5, &centered()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    assert_eq!(model.u.shape(), (800, 5));
    within(elapsed, 5.0)?;
    Ok(format!(
        "fit on d = 800, n = 2000, k = 5 took {:.3}s",
        elapsed.as_secs_f64()
    ))
}

fn tradeoff_monotonicity() -> Outcome {
    let start = Instant::now();
    let mut weights = vec![0.0; 10];
    weights[0] = 1.0;
    weights[1] = 1.0;
    let spec = MixtureSpec::equal_covariance(10, 2000, 1.0, 21).with_label(LabelRule::Linear {
        weights,
        bias: 0.0,
        noise: 0.5,
    });
    let data = gen_mixture(&spec).map_err(|e| e.to_string())?;
    let (train, test) = split(&data, 0.3, 21).map_err(|e| e.to_string())?;
    let fair = fit_fair_pca(&train, 2, &centered()).map_err(|e| e.to_string())?;
    let std = fit_standard_pca(&train, 2, true).map_err(|e| e.to_string())?;
    let base = TradeoffModel::new(fair, std, 0.0).map_err(|e| e.to_string())?;
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for lambda in lambda_grid() {
        let r = evaluate(
            &base.with_lambda(lambda).map_err(|e| e.to_string())?,
            &train,
            &test,
            &EvalOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        rows.push((lambda, r.downstream_accuracy.unwrap(), r.delta_dp.unwrap()));
    }
    within(start.elapsed(), 60.0)?;
    let drops: Vec<f64> = rows
        .windows(2)
        .map(|w| w[0].2 - w[1].2)
        .filter(|&drop| drop > 0.0)
        .collect();
    let (acc0, acc1) = (rows[0].1, rows[rows.len() - 1].1);
    let detail = format!(
        "ΔDP {:.3} → {:.3} with {} inversion(s), accuracy {acc0:.3} → {acc1:.3}",
        rows[0].2,
        rows[rows.len() - 1].2,
        drops.len()
    );
    if drops.len() <= 1 && drops.iter().all(|&d| d <= 0.01) && acc1 > acc0 {
        Ok(detail)
    } else {
        Err(format!("{detail}; rows {rows:?}"))
    }
}

fn mean_reports(reports: &[EvalReport]) -> (f64, f64, f64) {
    let n = reports.len() as f64;
    let ev = reports
        .iter()
        .map(|r| r.explained_var.unwrap())
        .sum::<f64>()
        / n;
    let mmd = reports.iter().map(|r| r.mmd2).sum::<f64>() / n;
    let dp = reports.iter().map(|r| r.delta_dp.unwrap()).sum::<f64>() / n;
    (ev, mmd, dp)
}

fn fixture_orderings() -> Outcome {
    let start = Instant::now();
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/census.csv");
    let spec = ColumnSpec {
        features: None,
        categorical: vec!["education".into()],
        groups: vec!["sex".into()],
        label: Some("income".into()),
    };
    let data = load_csv(&path, &spec).map_err(|e| e.to_string())?;
    let mut per_method: [Vec<EvalReport>; 3] = Default::default();
    for seed in 0..5u64 {
        let (train, test) = split(&data, 0.3, seed).map_err(|e| e.to_string())?;
        let (scaled, _) = standardize(&train, &[&train, &test]).map_err(|e| e.to_string())?;
        let (train, test) = (&scaled[0], &scaled[1]);
        let opts = EvalOptions::default();
        let std = fit_standard_pca(train, 2, true).map_err(|e| e.to_string())?;
        let fair = fit_fair_pca(train, 2, &centered()).map_err(|e| e.to_string())?;
        let fair_s = fit_fair_pca_s(train, 2, 0.5, &centered()).map_err(|e| e.to_string())?;
        for (slot, model) in per_method.iter_mut().zip([&std, &fair, &fair_s]) {
            slot.push(evaluate(model, train, test, &opts).map_err(|e| e.to_string())?);
        }
    }
    let [s, f, fs] = per_method.each_ref().map(|r| mean_reports(r));
    within(start.elapsed(), 60.0)?;
    let detail = format!(
        "EV/MMD²/ΔDP standard {:.3}/{:.4}/{:.3}, fair {:.3}/{:.4}/{:.3}, fair-S {:.3}/{:.4}/{:.3}",
        s.0, s.1, s.2, f.0, f.1, f.2, fs.0, fs.1, fs.2
    );
    // Fair PCA-S trades extra variance for covariance matching by design, so
    // the variance budget applies to fair PCA only.
    let fairer = |m: (f64, f64, f64)| m.1 < s.1 && m.2 < s.2;
    if fairer(f) && fairer(fs) && f.0 >= 0.5 * s.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("constraint exactness", constraint_exactness),
        ("brute-force optimality", brute_force_optimality),
        (
            "equal-covariance obfuscation",
            equal_covariance_reproduction,
        ),
        ("higher-order obfuscation", covariance_obfuscation),
        ("kernel/linear consistency", kernel_linear_consistency),
        ("fair PCA-S degeneracy", fair_s_degeneracy),
        ("runtime scaling", runtime_scaling),
        ("trade-off monotonicity", tradeoff_monotonicity),
        ("fixture orderings", fixture_orderings),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                println!("FAIL {}. {name}: {detail} [{secs:.2}s]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
