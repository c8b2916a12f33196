use std::fs;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use twinsvm::benchmark::{self, BenchConfig};
use twinsvm::dataset::{self, Dataset, Format, RawTable};
use twinsvm::estimators::{Algorithm, HyperParams};
use twinsvm::kernels::{KernelKind, KernelSpec};
use twinsvm::model::{fit_model, ModelConfig, Scheme};
use twinsvm::modelselect::{accuracy, grid_search, powers_of_two, GridSpec};
use twinsvm::ndcgen::{self, NdcConfig};
use twinsvm::persistence::{self, SavedModel};
use twinsvm::surface;

use crate::{
    AlgorithmArg, BenchArgs, CliError, DataArgs, FormatArg, GenArgs, GridArgs, HeaderArg, InspectArgs, KernelArg,
    ModelArgs, MulticlassArg, PlotArgs, PredictArgs, TrainArgs,
};

type CliResult<T = ()> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn format_of(f: FormatArg) -> Format {
    match f {
        FormatArg::Csv => Format::Csv,
        FormatArg::Libsvm => Format::Libsvm,
    }
}

fn algorithm_of(a: AlgorithmArg) -> Algorithm {
    match a {
        AlgorithmArg::Tsvm => Algorithm::Tsvm,
        AlgorithmArg::Lstsvm => Algorithm::Lstsvm,
    }
}

/// Reads a table; `labeled` decides whether the CSV label column is taken.
fn read_table(
    path: &Path,
    format: FormatArg,
    label_col: usize,
    header: HeaderArg,
    labeled: impl FnOnce(usize) -> CliResult<bool>,
) -> CliResult<RawTable> {
    let text = read_text(path)?;
    match format_of(format) {
        Format::Libsvm => Ok(dataset::read_libsvm_table(&text)?),
        Format::Csv => {
            let (width, sniffed) = dataset::sniff_csv(&text, Some(label_col))?;
            let has_header = match header {
                HeaderArg::Auto => sniffed,
                HeaderArg::Yes => true,
                HeaderArg::No => false,
            };
            let label = if labeled(width)? { Some(label_col) } else { None };
            Ok(dataset::read_csv_table(&text, label, has_header)?)
        }
    }
}

fn load_dataset(d: &DataArgs) -> CliResult<Dataset> {
    let table = read_table(&d.input, d.format, d.label_col, d.header, |_| Ok(true))?;
    let ds = Dataset::from_table(table)?;
    ds.check_trainable()?;
    Ok(ds)
}

fn hyper_params(p: &ModelArgs, seed: u64) -> CliResult<HyperParams> {
    let kernel = match p.kernel {
        KernelArg::Linear => KernelSpec::linear(),
        KernelArg::Rbf => KernelSpec::rbf(p.gamma).with_rect_fraction(p.rect),
    };
    let hp = HyperParams {
        c1: p.c1,
        c2: p.c2,
        kernel,
        epsilon: p.epsilon,
        tolerance: p.tol,
        max_iterations: p.max_iter,
        seed,
    };
    hp.validate().map_err(|e| usage(e.to_string()))?;
    Ok(hp)
}

fn model_config(p: &ModelArgs, hp: HyperParams, class_count: usize) -> CliResult<ModelConfig> {
    let algorithm = algorithm_of(p.algorithm);
    let scheme = match p.multiclass {
        None => return Ok(ModelConfig::auto(algorithm, hp, class_count)),
        Some(MulticlassArg::Ovo) => Scheme::Ovo,
        Some(MulticlassArg::Ova) => Scheme::Ova,
    };
    Ok(ModelConfig {
        algorithm,
        scheme,
        params: hp,
    })
}

fn describe_kernel(k: &KernelSpec) -> String {
    match k.kind {
        KernelKind::Linear => "linear".into(),
        KernelKind::Rbf => format!("rbf (gamma={}, rect={})", k.gamma, k.rect_fraction),
    }
}

pub fn train(a: TrainArgs) -> CliResult {
    if !(0.0..1.0).contains(&a.test_fraction) {
        return Err(usage("--test-fraction must lie in [0, 1)"));
    }
    let hp = hyper_params(&a.params, a.seed)?;
    let ds = load_dataset(&a.data)?;
    let config = model_config(&a.params, hp, ds.class_count())?;

    let (train, test) = if a.test_fraction > 0.0 {
        let (tr, te) = dataset::train_test_split(&ds, a.test_fraction, a.seed)?;
        (tr, Some(te))
    } else {
        (ds, None)
    };
    let scaler = a.normalize.then(|| dataset::fit_scaler(&train));
    let (train, test) = match &scaler {
        Some(s) => (
            dataset::apply_scaler(&train, s)?,
            test.map(|t| dataset::apply_scaler(&t, s)).transpose()?,
        ),
        None => (train, test),
    };
    train.check_trainable()?;

    let start = Instant::now();
    let model = fit_model(&train, &config)?;
    let train_seconds = start.elapsed().as_secs_f64();

    println!(
        "trained {} {} ({}) on {} samples, {} features, {} classes",
        config.algorithm.name(),
        config.scheme.name(),
        describe_kernel(&config.params.kernel),
        train.sample_count(),
        train.feature_count(),
        train.class_count()
    );
    println!("train time: {train_seconds:.6} s");
    if let Some(test) = &test {
        let start = Instant::now();
        let predicted = model.predict_batch(test.samples())?;
        let test_seconds = start.elapsed().as_secs_f64();
        let truth = align_labels(test, model.class_map());
        println!(
            "held-out accuracy: {:.2}% on {} samples",
            accuracy(&truth, &predicted.iter().map(|&c| Some(c)).collect::<Vec<_>>())?,
            test.sample_count()
        );
        println!("test time: {test_seconds:.6} s");
    }
    persistence::save_model(&SavedModel::new(model, scaler), &a.model)?;
    println!("model written to {}", a.model.display());
    Ok(())
}

/// Class index of each row in `class_map`, `None` for labels it lacks.
fn align_labels(ds: &Dataset, class_map: &[String]) -> Vec<Option<usize>> {
    ds.labels()
        .iter()
        .map(|&l| class_map.iter().position(|c| *c == ds.class_map()[l]))
        .collect()
}

pub fn predict(a: PredictArgs) -> CliResult {
    let saved = persistence::load_model(&a.model)?;
    let features = saved.model.feature_count();
    let d = &a.data;
    let table = read_table(&d.input, d.format, d.label_col, d.header, |width| {
        if width == features + 1 {
            Ok(true)
        } else if width == features {
            Ok(false)
        } else {
            Err(CliError::Data(format!(
                "model expects {features} features, input rows have {width} fields"
            )))
        }
    })?;
    let samples = match table.samples.ncols() {
        n if n == features => table.samples,
        n if n < features && d.format == FormatArg::Libsvm => {
            let mut padded = DMatrix::zeros(table.samples.nrows(), features);
            padded.columns_mut(0, n).copy_from(&table.samples);
            padded
        }
        n => {
            return Err(CliError::Data(format!(
                "model expects {features} features, input has {n}"
            )))
        }
    };
    let predicted = saved.predict_batch(&samples)?;
    let mut out = String::with_capacity(predicted.len() * 4);
    for &c in &predicted {
        out.push_str(saved.model.label_of(c)?);
        out.push('\n');
    }
    match &a.out {
        Some(path) => write_text(path, &out)?,
        None => print!("{out}"),
    }
    if let Some(labels) = &table.labels {
        let truth: Vec<Option<&str>> = labels.iter().map(|l| Some(l.as_str())).collect();
        let guessed: Vec<Option<&str>> = predicted.iter().map(|&c| saved.model.label_of(c).ok()).collect();
        let acc = accuracy(&truth, &guessed)?;
        let line = format!("accuracy: {acc:.2}% on {} samples", predicted.len());
        if a.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    Ok(())
}

/// Parses `lo:hi` (or a single `k`) into inclusive integer bounds.
fn exponent_range(flag: &str, text: &str) -> CliResult<std::ops::RangeInclusive<i32>> {
    let parse = |s: &str| {
        s.trim()
            .parse::<i32>()
            .map_err(|_| usage(format!("{flag} expects lo:hi integers, got '{text}'")))
    };
    let (lo, hi) = match text.split_once(':') {
        Some((lo, hi)) => (parse(lo)?, parse(hi)?),
        None => {
            let k = parse(text)?;
            (k, k)
        }
    };
    if lo > hi {
        return Err(usage(format!("{flag} has lo > hi in '{text}'")));
    }
    Ok(lo..=hi)
}

fn float_range(flag: &str, text: &str) -> CliResult<(f64, f64)> {
    let bad = || usage(format!("{flag} expects lo:hi numbers, got '{text}'"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub fn gridsearch(a: GridArgs) -> CliResult {
    let base = hyper_params(&a.params, a.seed)?;
    let c1_values = powers_of_two(exponent_range("--c1-range", &a.c1_range)?);
    let c2_values = powers_of_two(exponent_range("--c2-range", &a.c2_range)?);
    let gamma_values = match a.params.kernel {
        KernelArg::Linear => Vec::new(),
        KernelArg::Rbf => powers_of_two(exponent_range("--gamma-range", &a.gamma_range)?),
    };
    let ds = load_dataset(&a.data)?;
    let config = model_config(&a.params, base, ds.class_count())?;
    let spec = GridSpec {
        c1_values,
        c2_values,
        gamma_values,
        rect_fraction: a.params.rect,
        algorithm: config.algorithm,
        scheme: config.scheme,
        k_folds: a.folds,
        seed: a.seed,
        base,
    };
    spec.validate().map_err(|e| usage(e.to_string()))?;

    let scaler = a.normalize.then(|| dataset::fit_scaler(&ds));
    let ds = match &scaler {
        Some(s) => dataset::apply_scaler(&ds, s)?,
        None => ds,
    };
    let report = grid_search(&ds, &spec)?;
    write_text(&a.out, &report.to_json())?;

    let best = &report.best;
    let gamma = best.params.gamma.map_or(String::new(), |g| format!(", gamma={g}"));
    println!(
        "evaluated {} combinations ({} failed) in {:.3} s",
        report.records.len() + report.failures.len(),
        report.failures.len(),
        report.wall_time_seconds
    );
    println!(
        "best: c1={}, c2={}{gamma}: {:.2} +/- {:.2}%",
        best.params.c1, best.params.c2, best.mean, best.std
    );
    println!("report written to {}", a.out.display());

    if let Some(path) = &a.model {
        let model = fit_model(&ds, &spec.config_for(&best.params))?;
        persistence::save_model(&SavedModel::new(model, scaler), path)?;
        println!("best model written to {}", path.display());
    }
    Ok(())
}

pub fn gen_data(a: GenArgs) -> CliResult {
    let cfg = NdcConfig {
        n: a.samples,
        d: a.features,
        cluster_count: a.clusters,
        separation: a.separation,
        noise_fraction: a.noise,
        seed: a.seed,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let ds = ndcgen::generate(&cfg)?;
    let text = match a.format {
        FormatArg::Csv => ds.to_csv(),
        FormatArg::Libsvm => ds.to_libsvm(),
    };
    write_text(&a.out, &text)?;
    let counts = ds.class_counts();
    println!(
        "wrote {} samples ({} positive, {} negative), {} features to {}",
        ds.sample_count(),
        counts[0],
        counts[1],
        ds.feature_count(),
        a.out.display()
    );
    Ok(())
}

pub fn plot_grid(a: PlotArgs) -> CliResult {
    let saved = persistence::load_model(&a.model)?;
    if saved.model.feature_count() != 2 {
        return Err(CliError::Data("visualization requires 2 features".into()));
    }
    let data_bounds = match &a.input {
        Some(path) => {
            let table = read_table(path, a.format, a.label_col, a.header, |w| Ok(w == 3))?;
            Some(surface::default_bounds(&table.samples)?)
        }
        None => None,
    };
    let pick = |flag: &str, given: &Option<String>, axis: usize| -> CliResult<(f64, f64)> {
        if let Some(text) = given {
            return float_range(flag, text);
        }
        if let Some(b) = data_bounds {
            return Ok(if axis == 0 { b.0 } else { b.1 });
        }
        if let Some(s) = &saved.scaler {
            let (lo, hi) = (s.min[axis], s.max[axis]);
            let pad = if hi > lo { 0.1 * (hi - lo) } else { 0.5 };
            return Ok((lo - pad, hi + pad));
        }
        Err(usage(format!("{flag} or --input is required to bound the mesh")))
    };
    let xb = pick("--x-range", &a.x_range, 0)?;
    let yb = pick("--y-range", &a.y_range, 1)?;
    let field = surface::sample_grid(&saved, xb, yb, a.resolution).map_err(|e| usage(e.to_string()))?;
    write_text(&a.out, &field.to_csv())?;
    println!(
        "wrote {}x{} grid over x in [{}, {}], y in [{}, {}] to {}",
        a.resolution,
        a.resolution,
        xb.0,
        xb.1,
        yb.0,
        yb.1,
        a.out.display()
    );
    Ok(())
}

pub fn benchmark(a: BenchArgs) -> CliResult {
    if a.sizes.is_empty() {
        return Err(usage("--sizes needs at least one value"));
    }
    let params = HyperParams {
        c1: a.c1,
        c2: a.c2,
        seed: a.seed,
        ..Default::default()
    };
    params.validate().map_err(|e| usage(e.to_string()))?;
    let cfg = BenchConfig {
        sizes: a.sizes,
        features: a.features,
        test_fraction: a.test_fraction,
        seed: a.seed,
        algorithms: match a.algorithm {
            Some(alg) => vec![algorithm_of(alg)],
            None => vec![Algorithm::Tsvm, Algorithm::Lstsvm],
        },
        params,
        memory_budget: a.memory_budget.saturating_mul(1 << 20),
    };
    let report = benchmark::run(&cfg)?;
    print!("{}", report.to_table());
    if let Some(path) = &a.out {
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        write_text(path, &text)?;
    }
    Ok(())
}

pub fn inspect_model(a: InspectArgs) -> CliResult {
    let saved = persistence::load_model(&a.model)?;
    let m = &saved.model;
    println!("format: {} v{}", persistence::MAGIC, persistence::FORMAT_VERSION);
    println!("algorithm: {}", m.algorithm().name());
    println!("scheme: {}", m.scheme().name());
    println!("kernel: {}", describe_kernel(&m.kernel()));
    println!("features: {}", m.feature_count());
    println!("classes: {} [{}]", m.class_map().len(), m.class_map().join(", "));
    let models = m.binary_models();
    println!("binary models: {}", models.len());
    if let Some(reference) = models.first().and_then(|b| b.reference()) {
        println!("kernel reference rows: {}", reference.nrows());
    }
    println!(
        "scaler: {}",
        if saved.scaler.is_some() { "min-max to [0, 1]" } else { "none" }
    );
    Ok(())
}
