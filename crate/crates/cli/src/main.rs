//! Command-line front end: reproducible anticlustering runs with
//! machine-readable artifacts.
//!
//! Exit codes: 0 success, 1 data error (unreadable input, infeasible
//! instance), 2 configuration error (also used by clap for bad flags).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use aba_core::solver::SolverError;
use aba_core::{
    build_base_batches, build_category_batches, build_interleaved_batches, compute_global_ordering,
    evaluate, load_csv, random_partition, random_partition_with_categories, run_aba,
    run_hierarchical, scale_unit_interval, standardize, CategorySpec, FeatureMatrix, HierarchyPlan,
    Partition, VariantSelector,
};

#[derive(Parser)]
#[command(
    name = "aba",
    version,
    about = "Equal-sized, maximally diverse partitions of tabular data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition the input into K maximally diverse anticlusters
    Run(RunArgs),
    /// Seeded random balanced partition (baseline comparator)
    Random(RandomArgs),
    /// Score an externally produced labels file
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Input CSV with one header row
    #[arg(long)]
    input: PathBuf,
    /// Preprocessing: standardize | scale:<float> | none
    #[arg(long, default_value = "none")]
    preprocess: String,
    /// Where to write the labels CSV
    #[arg(long, default_value = "labels.csv")]
    labels_out: PathBuf,
    /// Where to write the metrics JSON
    #[arg(long, default_value = "metrics.json")]
    metrics_out: PathBuf,
    /// Worker threads for parallel sections: an integer or "auto"
    #[arg(long, default_value = "auto")]
    threads: String,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Number of anticlusters
    #[arg(long)]
    k: usize,
    /// Batch construction: base | interleaved | category | auto
    #[arg(long, default_value = "auto")]
    variant: String,
    /// Hierarchical decomposition factors, e.g. 40x125
    #[arg(long)]
    hierarchy: Option<String>,
    /// Column holding the categorical feature to balance
    #[arg(long)]
    category_column: Option<String>,
}

#[derive(Args)]
struct RandomArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Number of anticlusters
    #[arg(long)]
    k: usize,
    /// RNG seed (the seed→labels mapping is stable across releases)
    #[arg(long)]
    seed: u64,
    /// Column holding the categorical feature to balance
    #[arg(long)]
    category_column: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Input CSV with one header row
    #[arg(long)]
    input: PathBuf,
    /// Labels CSV produced by `run`, `random`, or a third-party method
    #[arg(long)]
    labels: PathBuf,
    /// Preprocessing applied before scoring (must match the original run)
    #[arg(long, default_value = "none")]
    preprocess: String,
    /// Where to write the metrics JSON; prints to stdout when omitted
    #[arg(long)]
    metrics_out: Option<PathBuf>,
    /// Column to exclude from features (the run's --category-column)
    #[arg(long)]
    category_column: Option<String>,
}

/// Errors that decide the exit code.
enum CliError {
    /// Inconsistent flags; exit 2.
    Config(String),
    /// The data refused; exit 1.
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Random(args) => cmd_random(args),
        Command::Evaluate(args) => cmd_evaluate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

enum Preprocess {
    None,
    Standardize,
    Scale(f64),
}

fn parse_preprocess(spec: &str) -> Result<Preprocess, CliError> {
    match spec {
        "none" => Ok(Preprocess::None),
        "standardize" => Ok(Preprocess::Standardize),
        _ => match spec.strip_prefix("scale:") {
            Some(raw) => {
                let divisor: f64 = raw.parse().map_err(|_| {
                    CliError::Config(format!("scale divisor {raw:?} is not a number"))
                })?;
                if divisor <= 0.0 {
                    return Err(CliError::Config(format!(
                        "scale divisor must be positive, got {divisor}"
                    )));
                }
                Ok(Preprocess::Scale(divisor))
            }
            None => Err(CliError::Config(format!(
                "unknown preprocess {spec:?}; expected standardize, scale:<float>, or none"
            ))),
        },
    }
}

fn parse_threads(spec: &str) -> Result<Option<usize>, CliError> {
    if spec == "auto" {
        return Ok(None);
    }
    match spec.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(Some(n)),
        _ => Err(CliError::Config(format!(
            "threads must be a positive integer or \"auto\", got {spec:?}"
        ))),
    }
}

/// Runs `f` inside a worker pool capped at `threads`. Without the `parallel`
/// feature the cap is meaningless and `f` runs inline.
fn with_thread_cap<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        match threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool construction")
                .install(f),
            None => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

fn load_and_preprocess(
    input: &Path,
    category_column: Option<&str>,
    preprocess: &Preprocess,
) -> Result<(FeatureMatrix, Option<CategorySpec>), CliError> {
    let dataset =
        load_csv(input, category_column).with_context(|| format!("loading {}", input.display()))?;
    let features = match preprocess {
        Preprocess::None => dataset.features,
        Preprocess::Standardize => standardize(&dataset.features),
        Preprocess::Scale(divisor) => {
            scale_unit_interval(&dataset.features, *divisor).map_err(anyhow::Error::from)?
        }
    };
    Ok((features, dataset.categories))
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let preprocess = parse_preprocess(&args.io.preprocess)?;
    let threads = parse_threads(&args.io.threads)?;

    let hierarchy = match &args.hierarchy {
        Some(spec) => Some(HierarchyPlan::parse(spec).map_err(|e| match e {
            SolverError::MalformedHierarchy(_) | SolverError::FactorTooSmall(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Data(other.into()),
        })?),
        None => None,
    };

    enum PlanKind {
        Flat(Option<VariantSelector>), // None means the category variant
        Hierarchical(VariantSelector),
    }
    let kind = match (args.variant.as_str(), &hierarchy) {
        ("category", Some(_)) => {
            return Err(CliError::Config(
                "hierarchical decomposition cannot balance categories; \
                 drop --hierarchy or --variant category"
                    .into(),
            ))
        }
        (_, Some(_)) if args.category_column.is_some() => {
            return Err(CliError::Config(
                "hierarchical decomposition cannot balance categories; \
                 drop --hierarchy or --category-column"
                    .into(),
            ))
        }
        ("base", Some(_)) => PlanKind::Hierarchical(VariantSelector::Base),
        ("interleaved", Some(_)) => PlanKind::Hierarchical(VariantSelector::Interleaved),
        ("auto", Some(_)) => PlanKind::Hierarchical(VariantSelector::Auto),
        ("category", None) => {
            if args.category_column.is_none() {
                return Err(CliError::Config(
                    "--variant category requires --category-column".into(),
                ));
            }
            PlanKind::Flat(None)
        }
        ("auto", None) if args.category_column.is_some() => PlanKind::Flat(None),
        ("base", None) | ("interleaved", None) if args.category_column.is_some() => {
            return Err(CliError::Config(format!(
                "--category-column only applies to the category variant, \
                 but --variant {} was requested",
                args.variant
            )))
        }
        ("base", None) => PlanKind::Flat(Some(VariantSelector::Base)),
        ("interleaved", None) => PlanKind::Flat(Some(VariantSelector::Interleaved)),
        ("auto", None) => PlanKind::Flat(Some(VariantSelector::Auto)),
        (other, _) => {
            return Err(CliError::Config(format!(
                "unknown variant {other:?}; expected base, interleaved, category, or auto"
            )))
        }
    };
    if let Some(hp) = &hierarchy {
        if hp.total_k() != args.k {
            return Err(CliError::Config(format!(
                "--hierarchy factors multiply to {}, but --k is {}",
                hp.total_k(),
                args.k
            )));
        }
    }

    let (features, categories) =
        load_and_preprocess(&args.io.input, args.category_column.as_deref(), &preprocess)?;

    let started = Instant::now();
    let partition = with_thread_cap(threads, || -> Result<Partition, SolverError> {
        match &kind {
            PlanKind::Hierarchical(selector) => run_hierarchical(
                &features,
                hierarchy.as_ref().expect("checked above"),
                *selector,
            ),
            PlanKind::Flat(selector) => {
                let ordering = compute_global_ordering(&features);
                match selector {
                    None => {
                        let cats = categories.as_ref().expect("checked above");
                        let plan = build_category_batches(&ordering, args.k, cats)?;
                        run_aba(&features, &plan, args.k, Some(cats))
                    }
                    Some(VariantSelector::Base) => {
                        let plan = build_base_batches(&ordering, args.k)?;
                        run_aba(&features, &plan, args.k, None)
                    }
                    Some(VariantSelector::Interleaved) => {
                        let plan = build_interleaved_batches(&ordering, args.k)?;
                        run_aba(&features, &plan, args.k, None)
                    }
                    Some(VariantSelector::Auto) => {
                        let plan = VariantSelector::Auto.build_plan(&ordering, args.k)?;
                        run_aba(&features, &plan, args.k, None)
                    }
                }
            }
        }
    })
    .map_err(anyhow::Error::from)?;
    let runtime = started.elapsed().as_secs_f64();

    write_artifacts(
        &features,
        &partition,
        runtime,
        &args.io.labels_out,
        &args.io.metrics_out,
        categories
            .as_ref()
            .filter(|_| args.category_column.is_some()),
    )
}

fn cmd_random(args: RandomArgs) -> Result<(), CliError> {
    let preprocess = parse_preprocess(&args.io.preprocess)?;
    parse_threads(&args.io.threads)?; // accepted for interface parity
    let (features, categories) =
        load_and_preprocess(&args.io.input, args.category_column.as_deref(), &preprocess)?;

    let started = Instant::now();
    let partition = match (&categories, args.category_column.is_some()) {
        (Some(cats), true) => random_partition_with_categories(cats, args.k, args.seed),
        _ => random_partition(features.n_objects(), args.k, args.seed),
    }
    .map_err(anyhow::Error::from)?;
    let runtime = started.elapsed().as_secs_f64();

    write_artifacts(
        &features,
        &partition,
        runtime,
        &args.io.labels_out,
        &args.io.metrics_out,
        categories
            .as_ref()
            .filter(|_| args.category_column.is_some()),
    )
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let preprocess = parse_preprocess(&args.preprocess)?;
    let (features, _) =
        load_and_preprocess(&args.input, args.category_column.as_deref(), &preprocess)?;
    let (labels, k) = read_labels(&args.labels, features.n_objects())?;
    let partition = Partition::from_labels(labels, k).map_err(anyhow::Error::from)?;
    let report = evaluate(&features, &partition).map_err(anyhow::Error::from)?;
    let json = report.to_json();
    match &args.metrics_out {
        Some(path) => {
            std::fs::write(path, json + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn write_artifacts(
    features: &FeatureMatrix,
    partition: &Partition,
    runtime: f64,
    labels_out: &Path,
    metrics_out: &Path,
    categories: Option<&CategorySpec>,
) -> Result<(), CliError> {
    let mut csv = String::from("object_index,anticluster\n");
    for (i, label) in partition.labels().iter().enumerate() {
        let _ = writeln!(csv, "{i},{label}");
    }
    std::fs::write(labels_out, csv).with_context(|| format!("writing {}", labels_out.display()))?;

    let mut report = evaluate(features, partition).map_err(anyhow::Error::from)?;
    report.runtime_seconds = Some(runtime);
    std::fs::write(metrics_out, report.to_json() + "\n")
        .with_context(|| format!("writing {}", metrics_out.display()))?;

    if let Some(cats) = categories {
        let sidecar = labels_out.with_extension("category_map.json");
        std::fs::write(&sidecar, cats.category_map_json() + "\n")
            .with_context(|| format!("writing {}", sidecar.display()))?;
    }
    Ok(())
}

/// Reads a labels CSV (`object_index,anticluster`), inferring k as
/// max label + 1. Row count must match the feature matrix.
fn read_labels(path: &Path, expected_rows: usize) -> Result<(Vec<usize>, usize), CliError> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().skip(1).enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let (Some(_), Some(label), None) = (cells.next(), cells.next(), cells.next()) else {
            return Err(anyhow!("labels row {idx} is not \"object_index,anticluster\"").into());
        };
        let label: usize = label
            .trim()
            .parse()
            .map_err(|_| anyhow!("labels row {idx}: {label:?} is not an anticluster id"))?;
        labels.push(label);
    }
    if labels.len() != expected_rows {
        return Err(anyhow!(
            "labels file has {} rows but the input has {expected_rows} objects",
            labels.len()
        )
        .into());
    }
    let k = labels.iter().max().copied().unwrap_or(0) + 1;
    Ok((labels, k))
}
