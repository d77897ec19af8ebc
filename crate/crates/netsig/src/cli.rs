//! Command-line surface.
//!
//! Every pipeline subcommand builds a [`RunConfig`] from defaults, then an
//! optional `--config` file, then explicit flags. When no paths are given the
//! commands read `expression.tsv` (and `network.tsv` if present) from the
//! working directory, which is where `synth` writes by default.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use netsig_core::evaluation::{
    cross_dataset_overlap, rank_units, run_experiment, EvaluationReport, Method, SelectionProblem,
};
use netsig_core::model::{ExpressionDataset, GeneNetwork, Signature};
use netsig_core::preprocess::{fit_preprocess, PreprocessModel};
use netsig_core::seed::{derive_seed, Stream};
use netsig_core::stability::{
    run_stability_selection, score_profile, signature_from_ranking, StabilityConfig,
    StabilityProfile, StabilityScores,
};
use netsig_core::synthetic::{generate, GroundTruth, NetworkModel, SyntheticSpec};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::exec::ThreadPoolExecutor;
use crate::io;
use crate::report;

pub const DEFAULT_EXPRESSION: &str = "expression.tsv";
pub const DEFAULT_NETWORK: &str = "network.tsv";
pub const TRUTH_FILE: &str = "truth.json";

#[derive(Debug, Parser)]
#[command(
    name = "netsig",
    version,
    about = "Sparse, network-coherent gene signatures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset, network and ground truth.
    Synth(SynthArgs),
    /// Scale, filter and write the processed expression matrix.
    Preprocess(PreprocessArgs),
    /// Rank units on the full dataset with one method.
    Select(RunArgs),
    /// Selection probabilities over random half-subsamples.
    Stability(RunArgs),
    /// Cross-validated accuracy, connectivity and stability report.
    Evaluate(RunArgs),
    /// Render an evaluation report as JSON or TSV curves.
    Report(ReportArgs),
}

/// Flags shared by the pipeline subcommands; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// lasso, lasso+ss, glasso or glasso+ss.
    #[arg(long)]
    pub method: Option<String>,
    /// Number of genes kept by the correlation filter.
    #[arg(long = "n-g")]
    pub n_g: Option<String>,
    #[arg(long)]
    pub outlier_threshold: Option<String>,
    #[arg(long)]
    pub grid_count: Option<String>,
    #[arg(long)]
    pub grid_min_ratio: Option<String>,
    #[arg(long)]
    pub ndraw: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// sg or max_prob.
    #[arg(long)]
    pub score_rule: Option<String>,
    /// Comma-separated signature sizes.
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long)]
    pub folds: Option<String>,
    #[arg(long)]
    pub stratified: Option<String>,
    #[arg(long, short = 'e')]
    pub expression: Option<PathBuf>,
    #[arg(long, short = 'n')]
    pub network: Option<PathBuf>,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Where to write the fitted preprocessing model (JSON).
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Number of genes.
    #[arg(long)]
    pub p: Option<usize>,
    /// Number of samples.
    #[arg(long)]
    pub n: Option<usize>,
    /// random_regular or preferential_attachment.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long)]
    pub component_size: Option<usize>,
    #[arg(long)]
    pub effect: Option<f64>,
    #[arg(long)]
    pub label_noise: Option<f64>,
    #[arg(long)]
    pub within_corr: Option<f64>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Evaluation report written by `evaluate`.
    #[arg(long, short = 'i', default_value = "report.json")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Directory for TSV curve files.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// JSON summary destination; standard output when absent.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Two `select` outputs from different datasets to compare.
    #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
    pub compare: Option<Vec<PathBuf>>,
}

impl RunArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            cfg.apply_file(&text)?;
        }
        let flags = [
            ("method", &self.method),
            ("n_g", &self.n_g),
            ("outlier_threshold", &self.outlier_threshold),
            ("grid_count", &self.grid_count),
            ("grid_min_ratio", &self.grid_min_ratio),
            ("ndraw", &self.ndraw),
            ("seed", &self.seed),
            ("score_rule", &self.score_rule),
            ("sizes", &self.sizes),
            ("folds", &self.folds),
            ("stratified", &self.stratified),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if let Some(p) = &self.expression {
            cfg.expression = Some(p.clone());
        }
        if let Some(p) = &self.network {
            cfg.network = Some(p.clone());
        }
        if let Some(p) = &self.output {
            cfg.output = Some(p.clone());
        }
        Ok(cfg)
    }
}

/// One ranked unit of a `select` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedUnit {
    pub genes: Vec<String>,
    pub score: f64,
}

/// Output of `select`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutput {
    pub method: Method,
    pub seed: u64,
    /// Entry penalty for plain paths, stability score otherwise.
    pub units: Vec<RankedUnit>,
    pub gene_ranking: Vec<String>,
    pub signatures: Vec<Signature>,
    pub converged: bool,
    pub preprocessing: PreprocessModel,
}

/// Output of `stability`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityOutput {
    pub method: Method,
    pub config: StabilityConfig,
    /// Genes of every unit, in profile row order.
    pub units: Vec<Vec<String>>,
    pub profile: StabilityProfile,
    pub scores: StabilityScores,
    pub signatures: Vec<Signature>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOutput {
    pub spec: SyntheticSpec,
    pub truth: GroundTruth,
}

struct Inputs {
    dataset: ExpressionDataset,
    network: Option<GeneNetwork>,
}

fn expression_path(cfg: &RunConfig) -> PathBuf {
    cfg.expression
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_EXPRESSION))
}

/// The configured network, or `network.tsv` beside the expression file.
fn network_path(cfg: &RunConfig) -> Option<PathBuf> {
    if let Some(p) = &cfg.network {
        return Some(p.clone());
    }
    let dir = expression_path(cfg)
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let candidate = dir.join(DEFAULT_NETWORK);
    candidate.is_file().then_some(candidate)
}

fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    let expr = expression_path(cfg);
    let dataset = io::load_expression(&expr)?;
    info!(
        "loaded {} samples x {} genes from {}",
        dataset.n_samples(),
        dataset.n_genes(),
        expr.display()
    );
    let network = match network_path(cfg) {
        Some(p) => {
            let net = io::load_network(&p)?;
            info!("loaded {} edges from {}", net.edges().len(), p.display());
            Some(net)
        }
        None => None,
    };
    if cfg.method.uses_graph() && network.is_none() {
        return Err(netsig_core::Error::NetworkRequired(cfg.method.to_string()).into());
    }
    Ok(Inputs { dataset, network })
}

fn output_path(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn prepared(args: &RunArgs) -> Result<RunConfig> {
    let cfg = args.resolve()?;
    cfg.validate()?;
    Ok(cfg)
}

fn warn_dropped(model: &PreprocessModel) {
    if !model.dropped_constant.is_empty() {
        warn!(
            "dropped {} constant gene(s): {}",
            model.dropped_constant.len(),
            model.dropped_constant.join(", ")
        );
    }
}

fn warn_incomplete(signatures: &[Signature]) {
    for s in signatures.iter().filter(|s| s.incomplete) {
        warn!(
            "signature of size {} is incomplete: only {} genes were ever selected",
            s.size,
            s.genes.len()
        );
    }
}

fn run_preprocess(args: &PreprocessArgs) -> Result<()> {
    let cfg = prepared(&args.run)?;
    let inputs = load_inputs(&cfg)?;
    let exp = cfg.experiment()?;
    let (model, processed) =
        fit_preprocess(&inputs.dataset, inputs.network.as_ref(), &exp.preprocess)?;
    warn_dropped(&model);
    let out = output_path(&cfg, "preprocessed.tsv");
    io::write_atomic(&out, |w| io::write_expression(&processed, w))?;
    let model_out = args
        .model_out
        .clone()
        .unwrap_or_else(|| out.with_extension("model.json"));
    io::write_json(&model_out, &model)?;
    info!(
        "kept {} of {} genes; wrote {} and {}",
        processed.n_genes(),
        inputs.dataset.n_genes(),
        out.display(),
        model_out.display()
    );
    Ok(())
}

fn run_select(args: &RunArgs, exec: &ThreadPoolExecutor) -> Result<()> {
    let cfg = prepared(args)?;
    let inputs = load_inputs(&cfg)?;
    let exp = cfg.experiment()?;
    let (model, processed) =
        fit_preprocess(&inputs.dataset, inputs.network.as_ref(), &exp.preprocess)?;
    warn_dropped(&model);
    let ranking = rank_units(
        &processed,
        inputs.network.as_ref(),
        cfg.method,
        &exp,
        derive_seed(cfg.seed, Stream::Stability, 0),
        exec,
    )?;
    if !ranking.converged {
        warn!("some penalty-path fits stopped before reaching the KKT tolerance");
    }
    let signatures = exp
        .sizes
        .iter()
        .map(|&size| {
            signature_from_ranking(&ranking.ranked, &ranking.groups, &ranking.gene_ids, size)
        })
        .collect::<netsig_core::Result<Vec<_>>>()?;
    warn_incomplete(&signatures);
    let units = ranking
        .ranked
        .iter()
        .map(|&(g, score)| RankedUnit {
            genes: ranking
                .groups
                .group(g)
                .iter()
                .map(|&c| ranking.gene_ids[c].clone())
                .collect(),
            score,
        })
        .collect();
    let out = SelectionOutput {
        method: cfg.method,
        seed: cfg.seed,
        units,
        gene_ranking: ranking.gene_order(),
        signatures,
        converged: ranking.converged,
        preprocessing: model,
    };
    let path = output_path(&cfg, "selection.json");
    io::write_json(&path, &out)?;
    info!(
        "wrote {} ranked units to {}",
        out.units.len(),
        path.display()
    );
    Ok(())
}

fn run_stability(args: &RunArgs, exec: &ThreadPoolExecutor) -> Result<()> {
    let cfg = prepared(args)?;
    let inputs = load_inputs(&cfg)?;
    let exp = cfg.experiment()?;
    let (model, processed) =
        fit_preprocess(&inputs.dataset, inputs.network.as_ref(), &exp.preprocess)?;
    warn_dropped(&model);
    let problem = SelectionProblem::new(&processed, inputs.network.as_ref(), cfg.method)?;
    let grid = problem.grid(&exp.grid)?;
    let ss = StabilityConfig {
        ndraw: exp.ndraw,
        seed: derive_seed(cfg.seed, Stream::Stability, 0),
        stratified: exp.stratified,
    };
    let profile = run_stability_selection(
        &problem.x,
        &problem.y,
        problem.selector(),
        &grid,
        &ss,
        &exp.solver,
        exec,
    )?;
    let scores = score_profile(&profile, exp.score_rule);
    let signatures = exp
        .sizes
        .iter()
        .map(|&size| {
            signature_from_ranking(&scores.ranked(), &problem.groups, &problem.gene_ids, size)
        })
        .collect::<netsig_core::Result<Vec<_>>>()?;
    warn_incomplete(&signatures);
    let units = problem
        .groups
        .groups()
        .iter()
        .map(|m| m.iter().map(|&c| problem.gene_ids[c].clone()).collect())
        .collect();
    let out = StabilityOutput {
        method: cfg.method,
        config: ss,
        units,
        profile,
        scores,
        signatures,
    };
    let path = output_path(&cfg, "stability.json");
    io::write_json(&path, &out)?;
    info!("wrote selection probabilities to {}", path.display());
    Ok(())
}

fn run_evaluate(args: &RunArgs, exec: &ThreadPoolExecutor) -> Result<()> {
    let cfg = prepared(args)?;
    let inputs = load_inputs(&cfg)?;
    let exp = cfg.experiment()?;
    let mut report = run_experiment(
        &inputs.dataset,
        inputs.network.as_ref(),
        cfg.method,
        &exp,
        exec,
    )?;
    for fold in &report.folds {
        if !fold.paths_converged {
            warn!(
                "fold {}: some penalty-path fits stopped before the KKT tolerance",
                fold.fold
            );
        }
        for s in &fold.sizes {
            if s.incomplete {
                warn!(
                    "fold {}: signature of size {} has only {} genes",
                    fold.fold,
                    s.size,
                    s.genes.len()
                );
            }
        }
    }
    let separable: Vec<String> = report
        .folds
        .iter()
        .flat_map(|f| {
            f.sizes
                .iter()
                .filter(|s| s.separable)
                .map(move |s| format!("{}/{}", f.fold, s.size))
        })
        .collect();
    if !separable.is_empty() {
        warn!(
            "training data are separable for {} fold/size pairs ({}); refit weights are capped",
            separable.len(),
            separable.join(" ")
        );
    }
    report.metadata.insert(
        "expression".into(),
        expression_path(&cfg).display().to_string(),
    );
    if let Some(p) = network_path(&cfg) {
        report
            .metadata
            .insert("network".into(), p.display().to_string());
    }
    let path = output_path(&cfg, "report.json");
    io::write_json(&path, &report)?;
    for row in &report.summary {
        info!(
            "size {:>4}: balanced accuracy {:.3} (sd {:.3})",
            row.size, row.mean_balanced_accuracy, row.sd_balanced_accuracy
        );
    }
    info!("wrote {}", path.display());
    Ok(())
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let mut spec = SyntheticSpec::default();
    if let Some(v) = args.p {
        spec.genes = v;
    }
    if let Some(v) = args.n {
        spec.samples = v;
    }
    if let Some(v) = &args.model {
        spec.model = v
            .parse::<NetworkModel>()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Some(v) = args.degree {
        spec.degree = v;
    }
    if let Some(v) = args.components {
        spec.components = v;
    }
    if let Some(v) = args.component_size {
        spec.component_size = v;
    }
    if let Some(v) = args.effect {
        spec.effect = v;
    }
    if let Some(v) = args.label_noise {
        spec.label_noise = v;
    }
    if let Some(v) = args.within_corr {
        spec.within_corr = v;
    }
    if let Some(v) = args.noise_sd {
        spec.noise_sd = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    let data = generate(&spec)?;
    let expr = args.out_dir.join(DEFAULT_EXPRESSION);
    let net = args.out_dir.join(DEFAULT_NETWORK);
    let truth = args.out_dir.join(TRUTH_FILE);
    io::write_atomic(&expr, |w| io::write_expression(&data.dataset, w))?;
    io::write_atomic(&net, |w| io::write_network(&data.network, w))?;
    io::write_json(
        &truth,
        &SynthOutput {
            spec,
            truth: data.truth,
        },
    )?;
    info!(
        "wrote {}, {} and {}",
        expr.display(),
        net.display(),
        truth.display()
    );
    Ok(())
}

fn run_report(args: &ReportArgs) -> Result<()> {
    let mut rep: EvaluationReport = io::read_json(&args.input)?;
    if let Some(pair) = &args.compare {
        let a: SelectionOutput = io::read_json(&pair[0])?;
        let b: SelectionOutput = io::read_json(&pair[1])?;
        let curve = cross_dataset_overlap(&a.gene_ranking, &b.gene_ranking, &rep.config.sizes);
        if curve.truncated {
            warn!("a compared ranking is shorter than the largest size; overlaps are truncated");
        }
        rep.cross_dataset_overlap = Some(curve);
    }
    match args.format {
        Format::Json => {
            let summary = report::summarize(&rep);
            match &args.output {
                Some(p) => io::write_json(p, &summary)?,
                None => {
                    let text = serde_json::to_string_pretty(&summary).map_err(|source| {
                        CliError::Json {
                            path: args.input.clone(),
                            source,
                        }
                    })?;
                    println!("{text}");
                }
            }
        }
        Format::Tsv => {
            for p in report::write_curves(&rep, &args.out_dir)? {
                info!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => run_synth(a),
        Command::Preprocess(a) => run_preprocess(a),
        Command::Report(a) => run_report(a),
        Command::Select(a) => run_select(a, &ThreadPoolExecutor::from_env()?),
        Command::Stability(a) => run_stability(a, &ThreadPoolExecutor::from_env()?),
        Command::Evaluate(a) => run_evaluate(a, &ThreadPoolExecutor::from_env()?),
    }
}
