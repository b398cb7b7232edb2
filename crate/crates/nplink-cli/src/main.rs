mod config;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use nplink_core::{
    evaluate, eval::{write_compare_matrix, write_report_csv, write_report_text},
    generate, load_edge_list, write_edge_list, EdgeListOptions, EvalConfig, EvalTask,
    GraphSequence, LshIndex, Method, NpModel,
};

use config::{FileConfig, ModelOpts, SimOpts};

#[derive(Parser)]
#[command(
    name = "nplink",
    version,
    about = "Non-parametric link prediction on dynamic graph sequences"
)]
struct Cli {
    /// TOML config file; flags override file values, which override defaults
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seasonal synthetic sequence as an edge-list file
    Simulate {
        /// Output edge-list path
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        sim: SimOpts,
    },
    /// Build and persist an LSH index over training datacubes
    Index {
        /// Input edge-list path
        #[arg(long)]
        input: PathBuf,
        /// Output index path
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        model: ModelOpts,
    },
    /// Predict the probability of one directed edge at the next timestep
    Predict {
        /// Input edge-list path
        #[arg(long)]
        input: PathBuf,
        /// Source node id
        #[arg(long)]
        i: u32,
        /// Target node id
        #[arg(long)]
        j: u32,
        /// Test timestep (defaults to one past the last snapshot)
        #[arg(long)]
        t: Option<usize>,
        /// Previously built index file (implies --lsh)
        #[arg(long)]
        index: Option<PathBuf>,
        #[command(flatten)]
        model: ModelOpts,
    },
    /// Score methods with per-node AUC and write text + CSV reports
    Evaluate {
        /// Input edge-list path
        #[arg(long)]
        input: PathBuf,
        /// Report output path (a .csv side file is written next to it)
        #[arg(long)]
        out: PathBuf,
        /// Method to run: np|ll|cn|aa|katz|rnd, or a comma list (default all)
        #[arg(long)]
        method: Option<String>,
        #[command(flatten)]
        model: ModelOpts,
    },
    /// Run every method on one sequence and print a result matrix
    Compare {
        /// Input edge-list path
        #[arg(long)]
        input: PathBuf,
        /// Row label for the matrix (defaults to the input file name)
        #[arg(long)]
        label: Option<String>,
        #[command(flatten)]
        model: ModelOpts,
    },
}

fn load_sequence(path: &Path, undirected: bool) -> anyhow::Result<GraphSequence> {
    let file =
        File::open(path).with_context(|| format!("cannot open input {}", path.display()))?;
    let opts = EdgeListOptions { directed: !undirected, ..Default::default() };
    load_edge_list(BufReader::new(file), opts)
        .with_context(|| format!("cannot parse edge list {}", path.display()))
}

fn parse_methods(spec: Option<&str>) -> anyhow::Result<Vec<Method>> {
    match spec {
        None => Ok(Method::ALL.to_vec()),
        Some(s) => s.split(',').map(|tag| Ok(tag.trim().parse::<Method>()?)).collect(),
    }
}

/// Build the model and optional index the way `predict`/`evaluate` share it.
fn build_model<'a>(
    seq: &'a GraphSequence,
    t_test: usize,
    cfg: &EvalConfig,
) -> anyhow::Result<NpModel<'a>> {
    Ok(NpModel::new(seq, t_test, cfg.kernel, cfg.lag, cfg.r_max)?)
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let file_cfg = FileConfig::load(cli.config.as_deref())?;

    match cli.command {
        Command::Simulate { out, sim } => {
            let cfg = sim.resolve(&file_cfg);
            let seq = generate(&cfg)?;
            let file = File::create(&out)
                .with_context(|| format!("cannot create {}", out.display()))?;
            write_edge_list(&seq, BufWriter::new(file))?;
            eprintln!(
                "wrote {} snapshots over {} nodes to {}",
                seq.len(),
                seq.node_count(),
                out.display()
            );
        }

        Command::Index { input, out, model } => {
            let cfg = model.resolve(&file_cfg);
            let seq = load_sequence(&input, model.resolve_undirected(&file_cfg))?;
            let np = build_model(&seq, seq.len(), &cfg)?;
            let index = np.build_lsh(&cfg.lsh)?;
            let file =
                File::create(&out).with_context(|| format!("cannot create {}", out.display()))?;
            index.save(BufWriter::new(file))?;
            eprintln!(
                "indexed {} datacubes ({} vocabulary cells, {} tables x {} bits) into {}",
                index.entries().len(),
                index.vocab().len(),
                cfg.lsh.tables,
                cfg.lsh.k_bits,
                out.display()
            );
        }

        Command::Predict { input, i, j, t, index, model } => {
            let cfg = model.resolve(&file_cfg);
            let seq = load_sequence(&input, model.resolve_undirected(&file_cfg))?;
            let t_test = t.unwrap_or(seq.len());
            if (i as usize) >= seq.node_count() || (j as usize) >= seq.node_count() {
                bail!("node ids must lie in [0, {})", seq.node_count());
            }
            let np = build_model(&seq, t_test, &cfg)?;
            let loaded = match index {
                Some(path) => {
                    let file = File::open(&path)
                        .with_context(|| format!("cannot open index {}", path.display()))?;
                    let idx = LshIndex::load(BufReader::new(file))?;
                    if model.lsh_params_explicit() && *idx.params() != cfg.lsh {
                        bail!(
                            "index parameters {:?} do not match the requested {:?}",
                            idx.params(),
                            cfg.lsh
                        );
                    }
                    Some(idx)
                }
                None if cfg.kernel.use_lsh => Some(np.build_lsh(&cfg.lsh)?),
                None => None,
            };
            let p = match &loaded {
                Some(idx) => np.predict_pair_lsh(i, j, idx)?,
                None => np.predict_pair(i, j),
            };
            println!("{p}");
        }

        Command::Evaluate { input, out, method, model } => {
            let cfg = model.resolve(&file_cfg);
            let seq = load_sequence(&input, model.resolve_undirected(&file_cfg))?;
            let methods = parse_methods(method.as_deref().or(file_cfg.method.as_deref()))?;
            let task = EvalTask { seq: &seq, methods, cfg };
            let report = evaluate(&task)?;

            let file =
                File::create(&out).with_context(|| format!("cannot create {}", out.display()))?;
            write_report_text(BufWriter::new(file), &report)?;
            let csv_path = out.with_extension("csv");
            let csv = File::create(&csv_path)
                .with_context(|| format!("cannot create {}", csv_path.display()))?;
            write_report_csv(BufWriter::new(csv), &report)?;

            let mut stdout = std::io::stdout().lock();
            write_report_text(&mut stdout, &report)?;
            writeln!(stdout, "report: {}", out.display())?;
            writeln!(stdout, "csv:    {}", csv_path.display())?;
        }

        Command::Compare { input, label, model } => {
            let cfg = model.resolve(&file_cfg);
            let seq = load_sequence(&input, model.resolve_undirected(&file_cfg))?;
            let task = EvalTask { seq: &seq, methods: Method::ALL.to_vec(), cfg };
            let report = evaluate(&task)?;
            let label = label.unwrap_or_else(|| {
                input.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
            });
            write_compare_matrix(std::io::stdout().lock(), &label, &report)?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
