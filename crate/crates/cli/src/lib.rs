//! Command-line front end: dataset ingestion, extraction, evaluation and
//! reports over a shared work directory.

pub mod commands;
pub mod config;
pub mod manifest;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use claimify::gateway::{ChatProvider, DiskCache, Gateway, GatewayStats, MockProvider, OpenAiProvider};
use claimify::search::{BingSearch, MockSearch, SearchClient, SearchProvider, SerperSearch};
use serde::Serialize;

use config::Config;

#[derive(Debug, Parser)]
#[command(name = "claimify", version, about = "Extract factual claims from answers and evaluate claim extractors")]
pub struct Cli {
    /// Work directory holding inputs and outputs of every command.
    #[arg(long, global = true, default_value = ".")]
    pub dir: PathBuf,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Response cache directory.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = ProviderMode::Live)]
    pub provider: ProviderMode,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProviderMode {
    Live,
    Mock,
    CacheOnly,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the extraction pipeline over a dataset.
    Extract {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Judge sentence and claim validity.
    Validate(ClaimArgs),
    #[command(subcommand)]
    Evaluate(Evaluation),
    /// Summarize evaluation outputs found in the work directory.
    Report,
    /// Krippendorff's alpha over an annotation matrix.
    Agreement {
        #[arg(long)]
        annotations: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum Evaluation {
    Entailment(ClaimArgs),
    Coverage(CoverageArgs),
    Decontext(GoldArgs),
}

#[derive(Debug, Args)]
pub struct ClaimArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Claim files, one or more per method.
    #[arg(long, required = true, num_args = 1..)]
    pub claims: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GoldArgs {
    #[command(flatten)]
    pub base: ClaimArgs,
    /// Gold sentence labels.
    #[arg(long)]
    pub gold: PathBuf,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub gold: GoldArgs,
    /// Extraction verdicts marking sentences that could not be disambiguated
    /// (defaults to verdicts.jsonl in the work directory when present).
    #[arg(long)]
    pub verdicts: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub outputs: Vec<PathBuf>,
    pub gateway: GatewayStats,
    pub search_calls: usize,
}

/// Everything a command needs besides its own arguments.
pub struct Session {
    pub dir: PathBuf,
    pub cfg: Config,
    pub config_digest: String,
    pub mode: ProviderMode,
    pub cache: Option<DiskCache>,
    pub pool: rayon::ThreadPool,
}

impl Session {
    pub fn open(cli: &Cli) -> Result<Self> {
        let cfg = match &cli.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let config_digest = manifest::sha256_hex(&serde_json::to_vec(&cfg)?);
        std::fs::create_dir_all(&cli.dir).with_context(|| format!("creating {}", cli.dir.display()))?;
        let cache = cli.cache.as_ref().map(DiskCache::open).transpose()?;
        if cli.provider == ProviderMode::CacheOnly && cache.is_none() {
            bail!("--provider cache-only needs --cache");
        }
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.workers {
            anyhow::ensure!(n > 0, "--workers must be positive");
            pool = pool.num_threads(n);
        }
        Ok(Session { dir: cli.dir.clone(), cfg, config_digest, mode: cli.provider, cache, pool: pool.build()? })
    }

    pub fn gateway(&self) -> Result<Gateway> {
        let p = &self.cfg.provider;
        let gw = match self.mode {
            ProviderMode::CacheOnly => Gateway::cache_only(self.cache.clone().expect("checked at startup")),
            ProviderMode::Mock => {
                let mock = match &p.mock_rules {
                    Some(path) => MockProvider::from_file(path)?,
                    None => MockProvider::new(Vec::new(), true),
                };
                Gateway::new(Arc::new(mock), self.cache.clone())
            }
            ProviderMode::Live => {
                let live = OpenAiProvider::from_env(&p.base_url, &p.api_key_env, Duration::from_secs(p.timeout_secs))?;
                Gateway::new(Arc::new(live) as Arc<dyn ChatProvider>, self.cache.clone())
            }
        };
        Ok(gw.with_max_in_flight(p.max_in_flight))
    }

    pub fn search(&self) -> Result<SearchClient> {
        let p = &self.cfg.provider;
        Ok(match self.mode {
            ProviderMode::CacheOnly => SearchClient::cache_only(self.cache.clone().expect("checked at startup")),
            ProviderMode::Mock => {
                let mock: MockSearch = match &p.search_mock {
                    Some(path) => {
                        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
                    }
                    None => MockSearch { rules: Vec::new(), echo: true },
                };
                SearchClient::new(Arc::new(mock), self.cache.clone())
            }
            ProviderMode::Live => {
                let timeout = Duration::from_secs(p.timeout_secs);
                let mut routes: BTreeMap<String, Arc<dyn SearchProvider>> = BTreeMap::new();
                for r in &self.cfg.eval.retrieval {
                    let provider: Arc<dyn SearchProvider> = match r.name.as_str() {
                        "google" => Arc::new(SerperSearch::from_env(timeout)?),
                        "bing" => Arc::new(BingSearch::from_env(timeout)?),
                        other => bail!("no live search backend for retrieval config {other:?}"),
                    };
                    routes.insert(r.name.clone(), provider);
                }
                SearchClient::routed(routes, self.cache.clone())
            }
        })
    }
}

pub fn run(cli: &Cli) -> Result<RunSummary> {
    let session = Session::open(cli)?;
    match &cli.command {
        Command::Extract { dataset } => commands::extract(&session, dataset),
        Command::Validate(args) => commands::validate(&session, args),
        Command::Evaluate(Evaluation::Entailment(args)) => commands::entailment(&session, args),
        Command::Evaluate(Evaluation::Coverage(args)) => commands::coverage(&session, args),
        Command::Evaluate(Evaluation::Decontext(args)) => commands::decontext(&session, args),
        Command::Report => commands::report(&session),
        Command::Agreement { annotations } => commands::agreement(&session, annotations),
    }
}
