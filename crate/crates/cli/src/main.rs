mod config;
mod error;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ssn_core::pipeline::{analyze, communities, Dataset};
use ssn_core::ssn::prune;
use ssn_core::{build_ssn, MeasureId, MixerId, Namespace, NetworkKind, SimilarityMatrix, WeightedNetwork};

use config::PipelineConfig;
use error::CliError;

/// Semantic similarity networks: matrices, spectral pruning and communities.
#[derive(Parser)]
#[command(name = "ssn", version)]
struct Cli {
    /// TOML file with default values for any flag (flags win).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gene product similarity matrix from an ontology and annotations.
    ComputeMatrix {
        #[command(flatten)]
        input: AnnotationFlags,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Raw network from a similarity matrix.
    Build {
        #[command(flatten)]
        matrix: MatrixFlag,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Spectrally guided pruning of the raw network of a matrix.
    Prune {
        #[command(flatten)]
        matrix: MatrixFlag,
        #[command(flatten)]
        threshold: ThresholdFlags,
        /// Where to write the per-alpha spectral report (JSON).
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Communities of a network and their semantic coherence.
    Communities {
        /// Network file (`.json`, otherwise a TSV edge list).
        #[arg(long)]
        network: Option<PathBuf>,
        #[command(flatten)]
        matrix: MatrixFlag,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Raw versus pruned communities side by side.
    Compare {
        #[command(flatten)]
        matrix: MatrixFlag,
        #[command(flatten)]
        threshold: ThresholdFlags,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputFlags,
    },
}

#[derive(Args)]
struct AnnotationFlags {
    #[arg(long)]
    obo: Option<PathBuf>,
    #[arg(long)]
    gaf: Option<PathBuf>,
    /// Organism used when the GAF taxon column is empty.
    #[arg(long)]
    organism: Option<String>,
    /// BP, MF or CC.
    #[arg(long)]
    namespace: Option<String>,
    /// A measure name, or ALL for one output file per measure.
    #[arg(long)]
    measure: Option<String>,
    /// Max, Avg or BMA.
    #[arg(long)]
    mixer: Option<String>,
}

#[derive(Args)]
struct MatrixFlag {
    /// Similarity matrix (`.json`, otherwise CSV).
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdFlags {
    #[arg(long)]
    alpha_start: Option<f64>,
    #[arg(long)]
    alpha_step: Option<f64>,
    #[arg(long)]
    alpha_max: Option<f64>,
    /// Fiedler value below which a network counts as nearly disconnected.
    #[arg(long)]
    tolerance: Option<f64>,
    /// combinatorial or symmetric-normalized.
    #[arg(long)]
    laplacian: Option<String>,
}

#[derive(Args)]
struct OutputFlags {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv, json or tsv, depending on the command.
    #[arg(long)]
    format: Option<String>,
}

impl Command {
    fn flags(&self) -> PipelineConfig {
        let mut c = PipelineConfig::default();
        let output = |o: &OutputFlags, c: &mut PipelineConfig| {
            c.out = o.out.clone();
            c.format = o.format.clone();
        };
        let threshold = |t: &ThresholdFlags, c: &mut PipelineConfig| {
            c.alpha_start = t.alpha_start;
            c.alpha_step = t.alpha_step;
            c.alpha_max = t.alpha_max;
            c.tolerance = t.tolerance;
            c.laplacian = t.laplacian.clone();
        };
        match self {
            Command::ComputeMatrix { input, output: o } => {
                c.obo = input.obo.clone();
                c.gaf = input.gaf.clone();
                c.organism = input.organism.clone();
                c.namespace = input.namespace.clone();
                c.measure = input.measure.clone();
                c.mixer = input.mixer.clone();
                output(o, &mut c);
            }
            Command::Build { matrix, output: o } => {
                c.matrix = matrix.matrix.clone();
                output(o, &mut c);
            }
            Command::Prune {
                matrix,
                threshold: t,
                report,
                output: o,
            } => {
                c.matrix = matrix.matrix.clone();
                c.report = report.clone();
                threshold(t, &mut c);
                output(o, &mut c);
            }
            Command::Communities {
                network,
                matrix,
                seed,
                output: o,
            } => {
                c.network = network.clone();
                c.matrix = matrix.matrix.clone();
                c.seed = *seed;
                output(o, &mut c);
            }
            Command::Compare {
                matrix,
                threshold: t,
                seed,
                output: o,
            } => {
                c.matrix = matrix.matrix.clone();
                c.seed = *seed;
                threshold(t, &mut c);
                output(o, &mut c);
            }
        }
        c
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ssn: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let cfg = file.overridden_by(cli.command.flags());
    match cli.command {
        Command::ComputeMatrix { .. } => compute_matrix(&cfg),
        Command::Build { .. } => {
            let format = output_format(&cfg, "tsv", &["tsv", "json"])?;
            let g = build_ssn(&read_matrix(&cfg)?);
            emit(&cfg.out, &network_text(&g, format))
        }
        Command::Prune { .. } => {
            let format = output_format(&cfg, "tsv", &["tsv", "json"])?;
            let result = prune(&build_ssn(&read_matrix(&cfg)?), &cfg.threshold()?)?;
            if let Some(report) = &cfg.report {
                write_file(report, &result.to_json())?;
            }
            emit(&cfg.out, &network_text(&result.pruned, format))
        }
        Command::Communities { .. } => {
            let format = output_format(&cfg, "json", &["json", "csv"])?;
            let g = read_network(PipelineConfig::require(&cfg.network, "network")?)?;
            let run = communities(&g, &read_matrix(&cfg)?, seed(&cfg))?;
            emit(
                &cfg.out,
                &if format == "csv" { run.to_csv() } else { run.to_json() },
            )
        }
        Command::Compare { .. } => {
            let format = output_format(&cfg, "csv", &["csv", "json"])?;
            let c = analyze(&read_matrix(&cfg)?, &cfg.threshold()?, seed(&cfg))?.comparison()?;
            emit(&cfg.out, &if format == "csv" { c.to_csv() } else { c.to_json() })
        }
    }
}

fn seed(cfg: &PipelineConfig) -> u64 {
    cfg.seed.unwrap_or(ssn_core::DEFAULT_SEED)
}

fn output_format<'a>(cfg: &PipelineConfig, default: &'a str, allowed: &[&'a str]) -> Result<&'a str, CliError> {
    match &cfg.format {
        None => Ok(default),
        Some(f) => allowed
            .iter()
            .find(|a| a.eq_ignore_ascii_case(f))
            .copied()
            .ok_or_else(|| {
                CliError::input(format!("format {f:?} not supported here (use {})", allowed.join(" or ")))
            }),
    }
}

fn compute_matrix(cfg: &PipelineConfig) -> Result<(), CliError> {
    let format = output_format(cfg, "csv", &["csv", "json"])?;
    let namespace: Namespace = match &cfg.namespace {
        Some(ns) => ns.parse().map_err(CliError::input)?,
        None => Namespace::BiologicalProcess,
    };
    let measures: Vec<MeasureId> = match cfg.measure.as_deref() {
        None => vec![MeasureId::DEFAULT],
        Some(m) if m.eq_ignore_ascii_case("all") => MeasureId::ALL.to_vec(),
        Some(m) => vec![m.parse().map_err(CliError::input)?],
    };
    let mixer: MixerId = match &cfg.mixer {
        Some(m) => m.parse().map_err(CliError::input)?,
        None => MixerId::default(),
    };
    let obo = fs::read(PipelineConfig::require(&cfg.obo, "obo")?)?;
    let gaf = fs::read(PipelineConfig::require(&cfg.gaf, "gaf")?)?;
    let data = Dataset::load(&obo[..], &gaf[..], cfg.organism.as_deref())?;
    let fan_out = measures.len() > 1;
    if fan_out && cfg.out.is_none() {
        return Err(CliError::input("--measure ALL needs --out"));
    }
    for measure in measures {
        let build = data.matrix(namespace, measure, mixer)?;
        if !build.dropped.is_empty() {
            eprintln!(
                "ssn: dropped {} products without usable annotations: {}",
                build.dropped.len(),
                build.dropped.join(", ")
            );
        }
        let text = if format == "json" {
            build.matrix.to_json()
        } else {
            build.matrix.to_csv()
        };
        let out = match &cfg.out {
            Some(path) if fan_out => Some(suffixed(path, measure.name())),
            other => other.clone(),
        };
        emit(&out, &text)?;
    }
    Ok(())
}

/// `dir/matrix.csv` with suffix `Lin` becomes `dir/matrix_Lin.csv`.
fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn read_matrix(cfg: &PipelineConfig) -> Result<SimilarityMatrix, CliError> {
    let path = PipelineConfig::require(&cfg.matrix, "matrix")?;
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(if is_json(path) {
        SimilarityMatrix::from_json(&text)?
    } else {
        SimilarityMatrix::read_csv(text.as_bytes())?
    })
}

/// TSV edge lists do not record their kind: weights all in {0.5, 1} mean pruned.
fn read_network(path: &Path) -> Result<WeightedNetwork, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if is_json(path) {
        return Ok(WeightedNetwork::from_json(&text)?);
    }
    match WeightedNetwork::read_tsv(text.as_bytes(), NetworkKind::Pruned) {
        Ok(g) => Ok(g),
        Err(_) => Ok(WeightedNetwork::read_tsv(text.as_bytes(), NetworkKind::Raw)?),
    }
}

fn network_text(g: &WeightedNetwork, format: &str) -> String {
    if format == "json" {
        g.to_json()
    } else {
        g.to_tsv()
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
