//! Option merging: command-line flags override the TOML config file, which
//! overrides built-in defaults.

use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

use nplink_core::{EvalConfig, KernelConfig, LshParams, SimConfig};

/// Flat TOML schema; every key is optional and mirrors a CLI flag.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    // generator
    pub n: Option<usize>,
    pub t: Option<usize>,
    pub phi: Option<f64>,
    pub seasons: Option<usize>,
    pub features: Option<usize>,
    pub eps: Option<f64>,
    // model
    pub lag: Option<usize>,
    pub r_max: Option<usize>,
    pub b: Option<f64>,
    pub topk: Option<usize>,
    pub lambda: Option<f64>,
    pub lsh: Option<bool>,
    // lsh
    pub k_bits: Option<usize>,
    pub tables: Option<usize>,
    pub b1: Option<usize>,
    pub b2: Option<usize>,
    // baselines
    pub katz_beta: Option<f64>,
    pub katz_len: Option<usize>,
    // shared
    pub seed: Option<u64>,
    pub undirected: Option<bool>,
    pub method: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }
}

/// Model/estimator flags shared by `index`, `predict`, `evaluate`, `compare`.
#[derive(Debug, Default, clap::Args)]
pub struct ModelOpts {
    /// Moving-window lag p
    #[arg(long)]
    pub lag: Option<usize>,
    /// Neighborhood size cap R_max
    #[arg(long = "r-max")]
    pub r_max: Option<usize>,
    /// Kernel bandwidth b in (0,1)
    #[arg(long)]
    pub b: Option<f64>,
    /// Nearest datacubes retrieved per query when LSH is on
    #[arg(long)]
    pub topk: Option<usize>,
    /// Cell-smoothing decay lambda in (0,1)
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Route candidate retrieval through the LSH index
    #[arg(long)]
    pub lsh: bool,
    /// Force exhaustive candidate scans
    #[arg(long = "no-lsh", conflicts_with = "lsh")]
    pub no_lsh: bool,
    /// Sampled bits per hash function
    #[arg(long = "k-bits")]
    pub k_bits: Option<usize>,
    /// Number of hash tables
    #[arg(long)]
    pub tables: Option<usize>,
    /// Histogram buckets per cell
    #[arg(long)]
    pub b1: Option<usize>,
    /// Bits per histogram bucket
    #[arg(long)]
    pub b2: Option<usize>,
    /// Katz decay beta
    #[arg(long = "katz-beta")]
    pub katz_beta: Option<f64>,
    /// Katz maximum walk length
    #[arg(long = "katz-len")]
    pub katz_len: Option<usize>,
    /// Master seed (random scorer, LSH bit sampling)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Insert both directions for every input edge
    #[arg(long)]
    pub undirected: bool,
}

impl ModelOpts {
    pub fn resolve(&self, file: &FileConfig) -> EvalConfig {
        let defaults = EvalConfig::default();
        let use_lsh = if self.no_lsh {
            false
        } else if self.lsh {
            true
        } else {
            file.lsh.unwrap_or(defaults.kernel.use_lsh)
        };
        EvalConfig {
            lag: self.lag.or(file.lag).unwrap_or(defaults.lag),
            r_max: self.r_max.or(file.r_max).unwrap_or(defaults.r_max),
            kernel: KernelConfig {
                bandwidth: self.b.or(file.b).unwrap_or(defaults.kernel.bandwidth),
                top_k: self.topk.or(file.topk).unwrap_or(defaults.kernel.top_k),
                lambda: self.lambda.or(file.lambda).unwrap_or(defaults.kernel.lambda),
                use_lsh,
            },
            lsh: LshParams {
                k_bits: self.k_bits.or(file.k_bits).unwrap_or(defaults.lsh.k_bits),
                tables: self.tables.or(file.tables).unwrap_or(defaults.lsh.tables),
                b1: self.b1.or(file.b1).unwrap_or(defaults.lsh.b1),
                b2: self.b2.or(file.b2).unwrap_or(defaults.lsh.b2),
                seed: self.seed.or(file.seed).unwrap_or(defaults.lsh.seed),
            },
            katz_beta: self.katz_beta.or(file.katz_beta).unwrap_or(defaults.katz_beta),
            katz_len: self.katz_len.or(file.katz_len).unwrap_or(defaults.katz_len),
            seed: self.seed.or(file.seed).unwrap_or(defaults.seed),
        }
    }

    pub fn resolve_undirected(&self, file: &FileConfig) -> bool {
        self.undirected || file.undirected.unwrap_or(false)
    }

    /// True when any LSH parameter was given explicitly on the command line
    /// (used to cross-check a loaded index's parameter echo).
    pub fn lsh_params_explicit(&self) -> bool {
        self.k_bits.is_some() || self.tables.is_some() || self.b1.is_some() || self.b2.is_some()
    }
}

/// Generator flags for `simulate`.
#[derive(Debug, clap::Args)]
pub struct SimOpts {
    /// Node count
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of timesteps
    #[arg(long)]
    pub t: Option<usize>,
    /// Seasonality strength phi in [0,1]
    #[arg(long)]
    pub phi: Option<f64>,
    /// Season count (1 = stationary)
    #[arg(long)]
    pub seasons: Option<usize>,
    /// Latent feature count
    #[arg(long)]
    pub features: Option<usize>,
    /// Baseline noise edge probability
    #[arg(long)]
    pub eps: Option<f64>,
    /// Generator seed
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SimOpts {
    pub fn resolve(&self, file: &FileConfig) -> SimConfig {
        let d = SimConfig::default();
        SimConfig {
            n: self.n.or(file.n).unwrap_or(d.n),
            timesteps: self.t.or(file.t).unwrap_or(d.timesteps),
            phi: self.phi.or(file.phi).unwrap_or(d.phi),
            seasons: self.seasons.or(file.seasons).unwrap_or(d.seasons),
            features: self.features.or(file.features).unwrap_or(d.features),
            noise: self.eps.or(file.eps).unwrap_or(d.noise),
            seed: self.seed.or(file.seed).unwrap_or(d.seed),
        }
    }
}
