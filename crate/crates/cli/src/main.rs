use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use classify_cli::config::{Format, Method, RunConfig};
use classify_cli::ingest::DataSource;
use classify_cli::plot::{plot_data, PlotKind};
use classify_cli::run::{debug_from_env, run};
use classify_cli::{CliError, Result};
use classify_core::Hyperparams;

#[derive(Parser)]
#[command(
    name = "classify",
    version,
    about = "Bayesian classification of ordered 1-d data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate every composition of the sorted data.
    Exact(Common),
    /// Enumerate every set partition (small n only).
    MdpExact(Common),
    /// Reversible-jump sampler over compositions.
    Mcmc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mcmc: McmcArgs,
    },
    /// Ward hierarchical clustering baseline.
    Ward {
        #[command(flatten)]
        common: Common,
        /// Number of clusters to cut the tree at.
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Run several methods on the same data and tabulate them side by side.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated: exact, mdp-exact, mcmc-m1, mcmc-m2, ward.
        #[arg(long, value_delimiter = ',', default_value = "exact,mcmc-m1,mcmc-m2")]
        methods: Vec<String>,
        #[command(flatten)]
        mcmc: McmcArgs,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Data file (one value per line, or CSV with --column), or a bundled set: small10, galaxy.
    #[arg(long)]
    data: String,
    /// Column name when the data file is CSV with a header.
    #[arg(long)]
    column: Option<String>,
    /// Multiply every observation by this factor before analysis.
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 0.1)]
    c: f64,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Number of top classifications to report.
    #[arg(long, default_value_t = 5)]
    top: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<String>,
    /// Emit plot data instead of the report: histogram, dendrogram or k-bar.
    #[arg(long)]
    plot: Option<String>,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct McmcArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::M1)]
    scheme: SchemeArg,
    /// Iterations kept after burn-in.
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
    #[arg(long, default_value_t = 1_000)]
    burnin: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Probability of proposing a split rather than a merge.
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    /// Disable the boundary shuffle move.
    #[arg(long)]
    no_shuffle: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    M1,
    M2,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

fn base_config(common: &Common, methods: Vec<Method>) -> Result<RunConfig> {
    let mut cfg = RunConfig::new(DataSource::parse(&common.data), methods);
    cfg.column = common.column.clone();
    cfg.scale = common.scale;
    cfg.hyper = Hyperparams::new(common.theta, common.a, common.b, common.c)?;
    cfg.top = common.top;
    cfg.debug_checks = debug_from_env();
    Ok(cfg)
}

fn apply_mcmc(cfg: &mut RunConfig, m: &McmcArgs) {
    cfg.mcmc.iterations = m.iters;
    cfg.mcmc.burn_in = m.burnin;
    cfg.mcmc.seed = m.seed;
    cfg.mcmc.q = m.q;
    cfg.mcmc.shuffle = !m.no_shuffle;
}

fn execute(cli: Cli) -> Result<()> {
    let (common, cfg) = match &cli.command {
        Command::Exact(common) => (common, base_config(common, vec![Method::Exact])?),
        Command::MdpExact(common) => (common, base_config(common, vec![Method::MdpExact])?),
        Command::Mcmc { common, mcmc } => {
            let method = match mcmc.scheme {
                SchemeArg::M1 => Method::McmcM1,
                SchemeArg::M2 => Method::McmcM2,
            };
            let mut cfg = base_config(common, vec![method])?;
            apply_mcmc(&mut cfg, mcmc);
            (common, cfg)
        }
        Command::Ward { common, k } => {
            let mut cfg = base_config(common, vec![Method::Ward])?;
            cfg.ward_k = *k;
            (common, cfg)
        }
        Command::Compare {
            common,
            methods,
            mcmc,
            k,
        } => {
            let mut parsed = Vec::with_capacity(methods.len());
            for m in methods {
                let m = Method::parse(m.trim())?;
                if !parsed.contains(&m) {
                    parsed.push(m);
                }
            }
            let mut cfg = base_config(common, parsed)?;
            apply_mcmc(&mut cfg, mcmc);
            cfg.ward_k = *k;
            (common, cfg)
        }
    };
    let format: Format = common.format.into();
    let report = run(&cfg, common.timing)?;
    let text = match &common.plot {
        Some(kind) => plot_data(&report, PlotKind::parse(kind)?, format)?,
        None => report.render(format),
    };
    match &common.output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
