use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cueval::config::parse_lead_times;
use cueval::error::write_file;
use cueval::pipeline;
use cueval::tables::{metrics_to_csv, read_labels, read_metrics, write_labels};
use cueval::{CliError, Dataset, Result, RunConfig};
use cueval_core::metrics::MetricKind;
use cueval_core::scenario::{generate_dataset, golden_fixtures};

#[derive(Parser)]
#[command(
    name = "cueval",
    version,
    about = "Collision-unavoidable labelling and safety metric evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the seeded synthetic dataset (or the five golden fixtures).
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        fixtures_only: bool,
    },
    /// Label every moment of every trip as collision unavoidable or not.
    Label {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compute metric series for every trip.
    Metrics {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        metric: MetricArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Sweep thresholds and lead times; write ROC / PR tables, AUCs and plots.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        metrics: PathBuf,
        /// Comma-separated seconds, e.g. `0,0.5,1.0` (default from the config).
        #[arg(long)]
        lead_times: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render the CU / alarm strip chart of one trip.
    Timeline {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        trip: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Ttc,
    Pcm,
    Mprism,
    All,
}

impl MetricArg {
    fn kinds(self) -> Vec<MetricKind> {
        match self {
            MetricArg::Ttc => vec![MetricKind::Ttc],
            MetricArg::Pcm => vec![MetricKind::Pcm],
            MetricArg::Mprism => vec![MetricKind::Mprism],
            MetricArg::All => MetricKind::ALL.to_vec(),
        }
    }
}

fn load(config: &Option<PathBuf>) -> Result<RunConfig> {
    RunConfig::load_or_default(config.as_deref())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            config,
            out,
            fixtures_only,
        } => {
            let cfg = load(&config)?;
            let data = if fixtures_only {
                Dataset::new(golden_fixtures(), None)
            } else {
                let generated = generate_dataset(&cfg.generation).map_err(|e| match e {
                    cueval_core::Error::InvalidConfig(m) => CliError::Config(m),
                    other => other.into(),
                })?;
                Dataset::from_generated(generated, Some(cfg.generation.seed))
            };
            data.write(&out)?;
            println!(
                "trips: {}, crashes: {}",
                data.trips.len(),
                data.crash_count()
            );
        }
        Command::Label { data, out, config } => {
            let cfg = load(&config)?;
            let data = Dataset::read(&data)?;
            let labels = pipeline::label_all(&data, &cfg)?;
            write_labels(&out, &labels)?;
            let cu = labels.iter().filter(|l| l.first_cu_index.is_some()).count();
            let fallback = labels.iter().filter(|l| l.fallback_used).count();
            println!(
                "trips: {}, with CU: {cu}, deadline fallbacks: {fallback}",
                labels.len()
            );
        }
        Command::Metrics {
            data,
            labels,
            metric,
            out,
            config,
        } => {
            let cfg = load(&config)?;
            let data = Dataset::read(&data)?;
            pipeline::check_labels(&data, &read_labels(&labels)?)?;
            let series = pipeline::metrics_all(&data, &cfg, &metric.kinds())?;
            write_file(&out, &metrics_to_csv(&series))?;
            println!("series: {}", series.len());
        }
        Command::Evaluate {
            data,
            labels,
            metrics,
            lead_times,
            out,
            config,
        } => {
            let cfg = load(&config)?;
            let lead_times = match lead_times {
                Some(s) => parse_lead_times(&s)?,
                None => cfg.evaluation.lead_times.clone(),
            };
            let data = Dataset::read(&data)?;
            let report = pipeline::evaluate(
                &data,
                &read_labels(&labels)?,
                &read_metrics(&metrics)?,
                &lead_times,
            )?;
            report.write(&out)?;
            for c in &report.curves {
                println!("{} lead {} s: AUC {:.3}", c.metric, c.lead_time, c.auc);
            }
        }
        Command::Timeline {
            data,
            trip,
            out,
            config,
        } => {
            let cfg = load(&config)?;
            let data = Dataset::read(&data)?;
            let t = data
                .trip(&trip)
                .ok_or_else(|| CliError::NotFound(format!("trip `{trip}`")))?;
            let svg = pipeline::timeline(t, &cfg)?.render();
            write_file(Path::new(&out), svg.as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
