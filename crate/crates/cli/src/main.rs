use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use forgetful::datastream::{batched, load_csv, write_csv_file, Dataset, DriftConfig, Intensity, Schema};
use forgetful::evalbench::{
    compare_rebuild, default_tune_datasets, emit_report, emit_summary, run_prequential, summarize_seeds, tune,
    write_summary_csv, MeasureStart, ModelKind, ReportFormat, RunConfig, TuneParam,
};
use forgetful::splitter::Criterion;
use forgetful::Sample;

#[derive(Parser)]
#[command(
    name = "forgetful",
    version,
    about = "Forgetful decision trees and forests on data streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic concept-drift stream to CSV.
    Generate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        generator: GeneratorArgs,
        /// Output CSV path.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Prequential (test-then-train) evaluation of a tree or forest.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated model seeds. More than one produces a summary with
        /// 95% confidence intervals.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Report path. Without it only the aggregate is printed.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// csv or json. Defaults to the extension of --out.
        #[arg(long)]
        format: Option<ReportFormat>,
        /// `auto` (flatten-out detection) or a sample index.
        #[arg(long, default_value = "auto", value_parser = parse_measure_start)]
        measure_start: MeasureStart,
        /// Class index treated as positive for precision and recall.
        #[arg(long, default_value_t = 1)]
        positive: usize,
    },
    /// Time incremental updates against rebuilding the tree every batch.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Sweep one hyperparameter over three generated drift streams.
    Tune {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// iRate, tThresh or nTrees.
        #[arg(long)]
        param: TuneParam,
        /// Comma-separated values. Defaults to the usual grid for the parameter.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Samples per generated dataset.
        #[arg(long, default_value_t = 20_000)]
        n_samples: usize,
        /// CSV output path. Prints to stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// TOML file with optional `batch_size`, `[model]` and `[generator]`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    batch_size: Option<usize>,
}

#[derive(Args)]
struct SourceArgs {
    /// CSV dataset. Without it a stream is generated.
    #[arg(long)]
    data: Option<PathBuf>,
    /// TOML column schema for --data. Without it every column except
    /// --label is numeric.
    #[arg(long, requires = "data")]
    schema: Option<PathBuf>,
    /// Label column when no schema is given.
    #[arg(long, default_value = "label")]
    label: String,
}

#[derive(Args)]
struct GeneratorArgs {
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    n_features: Option<usize>,
    #[arg(long)]
    n_relevant: Option<usize>,
    #[arg(long)]
    n_drifts: Option<usize>,
    /// mild, medium or drastic.
    #[arg(long)]
    intensity: Option<Intensity>,
    #[arg(long)]
    noise_std: Option<f64>,
    #[arg(long)]
    gen_seed: Option<u64>,
}

#[derive(Args)]
struct ModelArgs {
    /// tree or forest.
    #[arg(long)]
    model: Option<ModelKind>,
    /// entropy or gini.
    #[arg(long)]
    criterion: Option<Criterion>,
    #[arg(long)]
    i_rate: Option<f64>,
    #[arg(long)]
    warm_size: Option<usize>,
    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    t_thresh: Option<f64>,
    /// Poisson bagging for forest members.
    #[arg(long)]
    bagging: bool,
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_measure_start(s: &str) -> Result<MeasureStart, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(MeasureStart::Auto);
    }
    s.parse()
        .map(MeasureStart::Fixed)
        .map_err(|_| format!("expected `auto` or a sample index, got `{s}`"))
}

fn load_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(p) => RunConfig::from_file(p).with_context(|| format!("reading {}", p.display()))?,
        None => RunConfig::default(),
    };
    if let Some(b) = common.batch_size {
        if b == 0 {
            bail!("--batch-size must be positive");
        }
        config.batch_size = b;
    }
    Ok(config)
}

impl GeneratorArgs {
    fn resolve(&self, base: Option<&DriftConfig>) -> Result<DriftConfig> {
        let mut g = base.cloned().unwrap_or_default();
        if let Some(v) = self.n_samples {
            g.n_samples = v;
        }
        if let Some(v) = self.n_features {
            g.n_features = v;
        }
        if let Some(v) = self.n_relevant {
            g.n_relevant = v;
        }
        if let Some(v) = self.n_drifts {
            g.n_drifts = v;
        }
        if let Some(v) = self.intensity {
            g.intensity = v;
        }
        if let Some(v) = self.noise_std {
            g.noise_std = v;
        }
        if let Some(v) = self.gen_seed {
            g.seed = v;
        }
        g.validate()?;
        Ok(g)
    }
}

impl ModelArgs {
    fn apply(&self, config: &mut RunConfig) {
        let m = &mut config.model;
        if let Some(v) = self.model {
            m.kind = v;
        }
        if let Some(v) = self.criterion {
            m.criterion = v;
        }
        if let Some(v) = self.i_rate {
            m.i_rate = v;
        }
        if let Some(v) = self.warm_size {
            m.warm_size = v;
        }
        if let Some(v) = self.n_trees {
            m.n_trees = v;
        }
        if let Some(v) = self.t_thresh {
            m.t_thresh = v;
        }
        if self.bagging {
            m.bagging = true;
        }
        if let Some(v) = self.seed {
            m.seed = v;
        }
    }
}

fn header_of(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let first = text.lines().next().context("dataset is empty")?;
    Ok(first.split(',').map(|c| c.trim().to_string()).collect())
}

fn load_dataset(source: &SourceArgs, data: &Path) -> Result<Dataset> {
    let schema = match &source.schema {
        Some(p) => Schema::from_file(p).with_context(|| format!("reading {}", p.display()))?,
        None => Schema::numeric_with_label(&header_of(data)?, &source.label),
    };
    let dataset = load_csv(data, &schema).with_context(|| format!("loading {}", data.display()))?;
    log::info!(
        "loaded {} samples, {} features, {} classes",
        dataset.samples.len(),
        dataset.n_features(),
        dataset.n_classes()
    );
    Ok(dataset)
}

/// Either a loaded dataset or a generator to draw streams from.
enum Source {
    Data(Dataset),
    Generator(DriftConfig),
}

impl Source {
    fn resolve(source: &SourceArgs, generator: &GeneratorArgs, config: &RunConfig) -> Result<Self> {
        match &source.data {
            Some(p) => Ok(Source::Data(load_dataset(source, p)?)),
            None => Ok(Source::Generator(generator.resolve(config.generator.as_ref())?)),
        }
    }

    fn n_classes(&self) -> usize {
        match self {
            Source::Data(d) => d.n_classes(),
            Source::Generator(_) => 2,
        }
    }

    fn samples(&self, seed: Option<u64>) -> Result<Vec<Sample>> {
        match self {
            Source::Data(d) => Ok(d.samples.clone()),
            Source::Generator(g) => {
                let mut g = g.clone();
                if let Some(s) = seed {
                    g.seed = s;
                }
                Ok(g.generate()?)
            }
        }
    }
}

fn seeded_path(out: &Path, seed: u64) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let name = match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-seed{seed}.{ext}"),
        None => format!("{stem}-seed{seed}"),
    };
    out.with_file_name(name)
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    common: CommonArgs,
    source: SourceArgs,
    generator: GeneratorArgs,
    model: ModelArgs,
    seeds: Vec<u64>,
    out: Option<PathBuf>,
    format: Option<ReportFormat>,
    measure: MeasureStart,
    positive: usize,
) -> Result<()> {
    let mut config = load_config(&common)?;
    model.apply(&mut config);
    let source = Source::resolve(&source, &generator, &config)?;
    let n_classes = source.n_classes();
    if positive >= n_classes {
        bail!("--positive {positive} is not a class index (dataset has {n_classes} classes)");
    }
    let format = format
        .or(out.as_deref().map(ReportFormat::from_path))
        .unwrap_or_default();
    let multi = seeds.len() > 1;
    let seeds = if seeds.is_empty() {
        vec![config.model.seed]
    } else {
        seeds
    };

    let mut aggregates = Vec::with_capacity(seeds.len());
    for &seed in &seeds {
        let mut m = config.model.clone();
        m.seed = seed;
        let stream = source.samples(multi.then_some(seed))?;
        let mut learner = m.build(n_classes)?;
        let report = run_prequential(&mut learner, batched(stream, config.batch_size), measure, positive)?;
        if report.records.is_empty() {
            log::warn!("seed {seed}: stream fits in one batch, nothing was evaluated");
        }
        match (&out, multi) {
            (Some(p), false) => emit_report(&report, p, format)?,
            (Some(p), true) => emit_report(&report, &seeded_path(p, seed), format)?,
            (None, _) => {}
        }
        aggregates.push(report.aggregate);
    }

    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    if multi {
        let summary = summarize_seeds(&seeds, &aggregates);
        if let Some(p) = &out {
            emit_summary(&summary, p, format)?;
        }
        write_summary_csv(&mut w, &summary)?;
    } else {
        writeln!(w, "metric,value")?;
        for (k, v) in aggregates[0].to_pairs() {
            writeln!(w, "{k},{v}")?;
        }
    }
    Ok(())
}

fn cmd_compare(common: CommonArgs, source: SourceArgs, generator: GeneratorArgs, model: ModelArgs) -> Result<()> {
    let mut config = load_config(&common)?;
    model.apply(&mut config);
    if config.model.kind == ModelKind::Forest {
        log::warn!("compare always uses a single tree");
    }
    let source = Source::resolve(&source, &generator, &config)?;
    let tree = config.model.tree_config(source.n_classes());
    let report = compare_rebuild(batched(source.samples(None)?, config.batch_size), &tree)?;
    println!("batches,{}", report.n_batches);
    println!("incremental_secs,{}", report.incremental_secs);
    println!("rebuild_secs,{}", report.rebuild_secs);
    println!("time_ratio,{}", report.time_ratio());
    println!("incremental_accuracy,{}", report.incremental_accuracy);
    println!("rebuild_accuracy,{}", report.rebuild_accuracy);
    println!("identical,{}", report.identical);
    if let Some(b) = report.first_mismatch {
        log::warn!("predictions first differ at batch {b}");
    }
    Ok(())
}

fn cmd_tune(
    common: CommonArgs,
    model: ModelArgs,
    param: TuneParam,
    values: Vec<f64>,
    n_samples: usize,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut config = load_config(&common)?;
    model.apply(&mut config);
    let values = if values.is_empty() {
        param.default_values()
    } else {
        values
    };
    let datasets = default_tune_datasets(n_samples);
    let table = tune(param, &values, &datasets, &config.model, config.batch_size)?;
    match out {
        Some(p) => {
            let f = std::fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
            table.write_csv(std::io::BufWriter::new(f), datasets.len())?;
        }
        None => table.write_csv(std::io::stdout().lock(), datasets.len())?,
    }
    if let Some(best) = table.best() {
        log::info!(
            "best {} = {} (mean accuracy {:.4})",
            param.name(),
            best.value,
            best.mean_accuracy
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Generate { common, generator, out } => {
            let config = load_config(&common)?;
            let g = generator.resolve(config.generator.as_ref())?;
            write_csv_file(&out, &g.generate()?, None).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Run {
            common,
            source,
            generator,
            model,
            seeds,
            out,
            format,
            measure_start,
            positive,
        } => cmd_run(
            common,
            source,
            generator,
            model,
            seeds,
            out,
            format,
            measure_start,
            positive,
        )?,
        Command::Compare {
            common,
            source,
            generator,
            model,
        } => cmd_compare(common, source, generator, model)?,
        Command::Tune {
            common,
            model,
            param,
            values,
            n_samples,
            out,
        } => cmd_tune(common, model, param, values, n_samples, out)?,
    }
    Ok(())
}
