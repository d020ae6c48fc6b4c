use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lgg_cli::commands::{self, FilterChoice, GraphSource};
use lgg_cli::error::CliError;
use lgg_core::{AffinitySimilarity, Metric, Similarity, SymmetrizeMode};

/// Latent geometry graphs: build similarity graphs over feature
/// embeddings and analyze, filter, denoise or score them.
///
/// Matrix inputs are auto-detected as the `LGG1` binary container or
/// headerless numeric CSV. Every command prints one JSON report line to
/// standard output. Exit codes: 0 success, 2 input error, 3 parameter
/// error, 4 numerical failure.
#[derive(Parser)]
#[command(name = "lgg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a k-nearest-neighbor similarity graph and write its edge list CSV
    Graph {
        /// Feature matrix (n x d), binary container or CSV
        #[arg(long)]
        features: PathBuf,
        /// Neighbors contributed per vertex
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = SimilarityArg::Cosine)]
        similarity: SimilarityArg,
        /// RBF decay rate (required with --similarity rbf)
        #[arg(long)]
        alpha: Option<f64>,
        /// RBF distance metric
        #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
        metric: MetricArg,
        #[arg(long, value_enum, default_value_t = SymmetrizeArg::Union)]
        symmetrize: SymmetrizeArg,
        /// Output edge list CSV `i,j,w`
        #[arg(long)]
        out: PathBuf,
    },
    /// Label smoothness of a feature matrix under a k-NN graph
    Smoothness {
        #[arg(long)]
        features: PathBuf,
        /// Single-column class labels (one integer per sample)
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = SimilarityArg::Cosine)]
        similarity: SimilarityArg,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
        metric: MetricArg,
    },
    /// Filter a graph signal and report smoothness before and after
    Filter {
        /// Signal matrix (n x channels)
        #[arg(long)]
        signal: PathBuf,
        /// Edge list CSV over the signal's vertices
        #[arg(long, conflicts_with = "features")]
        graph: Option<PathBuf>,
        /// Features to build a cosine k-NN graph from instead of --graph
        #[arg(long, requires = "k")]
        features: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum)]
        filter: FilterArg,
        /// Simoncelli threshold in (0, 1]
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        /// Diffusion step size
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        /// Diffusion power
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Per-frequency response table (vector file), for --filter table
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        /// Chebyshev polynomial order (with --method chebyshev)
        #[arg(long, default_value_t = 50)]
        order: usize,
        /// Output matrix file for the filtered signal
        #[arg(long)]
        out: PathBuf,
    },
    /// Diffuse features over their similarity graph; optionally propagate labels
    Denoise {
        #[arg(long)]
        features: PathBuf,
        /// Partial labels CSV `index,class`
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        k: usize,
        /// Self-loop weight of the diffusion operator
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Diffusion power (0 leaves features unchanged)
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Also propagate labels over the diffused features
        #[arg(long)]
        propagate: bool,
        /// Diffusion strength of the label propagation
        #[arg(long, default_value_t = 0.9)]
        propagate_alpha: f64,
        /// Solve propagation iteratively instead of in closed form
        #[arg(long)]
        iterative: bool,
        /// Number of classes (default: 1 + largest class in --labels)
        #[arg(long)]
        classes: Option<usize>,
        /// Output matrix file for the diffused features
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output CSV `index,class,omega` for pseudo-labels
        #[arg(long)]
        pseudo_out: Option<PathBuf>,
    },
    /// Batch-level graph losses
    Losses {
        #[command(subcommand)]
        loss: LossCmd,
    },
    /// Synthetic few-label benchmark: raw vs diffused features
    BenchFewlabel {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Labeled samples per class
        #[arg(long, default_value_t = 1)]
        shots: usize,
        /// JSON file overriding the blob geometry and diffusion settings
        #[arg(long)]
        blobs_config: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum LossCmd {
    /// Smoothness loss over a top-k RBF graph of the batch outputs
    SmoothnessLoss {
        #[arg(long)]
        outputs: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
        metric: MetricArg,
    },
    /// Distillation loss between teacher and student layer graphs
    Gkd {
        /// Teacher layer matrix (repeat per layer, in order)
        #[arg(long, required = true)]
        teacher: Vec<PathBuf>,
        /// Student layer matrix (repeat per layer, in order)
        #[arg(long, required = true)]
        student: Vec<PathBuf>,
        /// Remove same-class edges before differencing (needs --labels)
        #[arg(long)]
        task_specific: bool,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        lambda_kd: f64,
        /// Task loss to combine with the distillation term
        #[arg(long, default_value_t = 0.0)]
        task_loss: f64,
    },
    /// Affinity mass captured by a target pair set
    Affinity {
        #[arg(long)]
        features: PathBuf,
        /// Pair CSV `i,j` of connections to maximize
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, value_enum, default_value_t = AffinityArg::ScaledDot)]
        similarity: AffinityArg,
    },
    /// Sum of label-smoothness gaps across consecutive layer graphs
    RegGap {
        /// Edge list CSV per layer (repeat in order)
        #[arg(long, required = true)]
        graphs: Vec<PathBuf>,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Peer regularization forward pass over a bank of peer maps
    Peer {
        /// Input feature map (pixels x channels)
        #[arg(long)]
        input: PathBuf,
        /// Peer feature map (repeat per peer)
        #[arg(long, required = true)]
        peers: Vec<PathBuf>,
        /// Vector of 2d attention weights followed by the bias
        #[arg(long)]
        attention: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.01)]
        slope: f64,
        /// Output matrix file for the smoothed map
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SimilarityArg {
    Cosine,
    Rbf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    CosineDistance,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetrizeArg {
    Union,
    AddTranspose,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    Simoncelli,
    Diffusion,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Chebyshev,
}

#[derive(Clone, Copy, ValueEnum)]
enum AffinityArg {
    ScaledDot,
    Cosine,
}

fn similarity_from(
    arg: SimilarityArg,
    alpha: Option<f64>,
    metric: MetricArg,
) -> Result<Similarity, CliError> {
    match arg {
        SimilarityArg::Cosine => Ok(Similarity::Cosine),
        SimilarityArg::Rbf => {
            let alpha = alpha.ok_or_else(|| {
                CliError::Parameter("--similarity rbf requires --alpha".into())
            })?;
            Ok(Similarity::Rbf {
                alpha,
                metric: metric.into(),
            })
        }
    }
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::CosineDistance => Metric::CosineDistance,
        }
    }
}

fn run(cli: Cli) -> Result<lgg_cli::RunReport, CliError> {
    match cli.command {
        Cmd::Graph {
            features,
            k,
            similarity,
            alpha,
            metric,
            symmetrize,
            out,
        } => {
            let kind = similarity_from(similarity, alpha, metric)?;
            let mode = match symmetrize {
                SymmetrizeArg::Union => SymmetrizeMode::Union,
                SymmetrizeArg::AddTranspose => SymmetrizeMode::AddTranspose,
            };
            commands::cmd_graph(&features, k, kind, mode, &out)
        }
        Cmd::Smoothness {
            features,
            labels,
            k,
            similarity,
            alpha,
            metric,
        } => {
            let kind = similarity_from(similarity, alpha, metric)?;
            commands::cmd_smoothness(&features, &labels, k, kind)
        }
        Cmd::Filter {
            signal,
            graph,
            features,
            k,
            filter,
            tau,
            a,
            m,
            table,
            method,
            order,
            out,
        } => {
            let source = match (graph, features) {
                (Some(path), None) => GraphSource::EdgeList(path),
                (None, Some(path)) => GraphSource::Features {
                    path,
                    k: k.ok_or_else(|| {
                        CliError::Parameter("--features needs --k to build the graph".into())
                    })?,
                },
                _ => {
                    return Err(CliError::Parameter(
                        "provide exactly one of --graph or --features".into(),
                    ))
                }
            };
            let choice = match filter {
                FilterArg::Simoncelli => FilterChoice::Simoncelli { tau },
                FilterArg::Diffusion => FilterChoice::Diffusion { a, m },
                FilterArg::Table => FilterChoice::Table {
                    path: table.ok_or_else(|| {
                        CliError::Parameter("--filter table requires --table <path>".into())
                    })?,
                },
            };
            let cheb_order = match method {
                MethodArg::Exact => None,
                MethodArg::Chebyshev => Some(order),
            };
            commands::cmd_filter(&signal, source, choice, cheb_order, &out)
        }
        Cmd::Denoise {
            features,
            labels,
            k,
            alpha,
            m,
            propagate,
            propagate_alpha,
            iterative,
            classes,
            out,
            pseudo_out,
        } => commands::cmd_denoise(
            &features,
            &labels,
            k,
            alpha,
            m,
            propagate.then_some(propagate_alpha),
            iterative,
            classes,
            out.as_deref(),
            pseudo_out.as_deref(),
        ),
        Cmd::Losses { loss } => match loss {
            LossCmd::SmoothnessLoss {
                outputs,
                labels,
                alpha,
                k,
                metric,
            } => commands::cmd_loss_smoothness(&outputs, &labels, alpha, k, metric.into()),
            LossCmd::Gkd {
                teacher,
                student,
                task_specific,
                labels,
                lambda_kd,
                task_loss,
            } => commands::cmd_loss_gkd(
                &teacher,
                &student,
                task_specific,
                labels.as_deref(),
                lambda_kd,
                task_loss,
            ),
            LossCmd::Affinity {
                features,
                pairs,
                similarity,
            } => {
                let sim = match similarity {
                    AffinityArg::ScaledDot => AffinitySimilarity::ScaledDot,
                    AffinityArg::Cosine => AffinitySimilarity::Cosine,
                };
                commands::cmd_loss_affinity(&features, &pairs, sim)
            }
            LossCmd::RegGap { graphs, labels } => commands::cmd_loss_reggap(&graphs, &labels),
            LossCmd::Peer {
                input,
                peers,
                attention,
                k,
                slope,
                out,
            } => commands::cmd_loss_peer(&input, &peers, &attention, k, slope, out.as_deref()),
        },
        Cmd::BenchFewlabel {
            seed,
            trials,
            shots,
            blobs_config,
        } => commands::cmd_bench_fewlabel(seed, trials, shots, blobs_config.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::Parameter(e.to_string());
            println!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(report) => {
            println!("{}", report.to_json());
            ExitCode::SUCCESS
        }
        Err(err) => {
            println!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
