//! Command-line surface: `evolve`, `analyze <sub>`, `validate`, `terrain`,
//! and `print-default-config`.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use morphevo_core::analytics::{self, ANALYSIS_SEED};
use morphevo_core::metrics;
use morphevo_core::morphology::Morphology;
use morphevo_core::rng::Stream;
use morphevo_core::terrain::{self, Env};

use crate::checkpoint;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::export;
use crate::runlog::read_log;
use crate::runner;

#[derive(Parser)]
#[command(
    name = "morphevo",
    version,
    about = "Body-plan evolution engine: asynchronous tournament search over capsule-limbed morphologies"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvArg {
    Ft,
    Vt,
    Mvt,
}

impl From<EnvArg> for Env {
    fn from(e: EnvArg) -> Env {
        match e {
            EnvArg::Ft => Env::Ft,
            EnvArg::Vt => Env::Vt,
            EnvArg::Mvt => Env::Mvt,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run (or resume) an evolution run, writing a run log and checkpoints.
    Evolve {
        /// Run configuration JSON; omitted fields take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Continue from a checkpoint file.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Override worker count.
        #[arg(long)]
        workers: Option<usize>,
        /// Override the run seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the total evaluation count.
        #[arg(long = "max-evals")]
        max_evals: Option<usize>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Resume even when the provided config does not match the
        /// checkpoint's digest.
        #[arg(long)]
        force: bool,
    },
    /// Post-hoc analysis over a run log.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCommand,
    },
    /// Validate a serialized morphology file.
    Validate { path: PathBuf },
    /// Generate a terrain heightfield and segment list.
    Terrain {
        #[arg(long, value_enum)]
        env: EnvArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid resolution in meters per cell.
        #[arg(long)]
        resolution: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the default run configuration (the embedded constants audit).
    PrintDefaultConfig,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Lineage abundance over time for the top lineages.
    Muller {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        #[arg(long, default_value_t = 50)]
        checkpoints: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phylogenetic forest as Newick and nested JSON, plus lineage table.
    Tree {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterations-to-criterion by generation.
    Baldwin {
        #[arg(long)]
        log: PathBuf,
        /// Criterion as a percentile of founder fitness.
        #[arg(long, default_value_t = 0.75)]
        percentile: f64,
        #[arg(long, default_value_t = 100)]
        top_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Morphological descriptor means over the alive set.
    Descriptors {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 50)]
        checkpoints: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Passively stable fraction of the alive set.
    Stability {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 50)]
        checkpoints: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best agents from surviving lineages across one or more runs.
    Top {
        #[arg(long, required = true)]
        log: Vec<PathBuf>,
        #[arg(long, default_value_t = 3)]
        per_lineage: usize,
        #[arg(long, default_value_t = 100)]
        final_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pearson correlations of fitness and learning speed against cost of
    /// work.
    Correlate {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 0.75)]
        percentile: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evolve {
            config,
            resume,
            workers,
            seed,
            max_evals,
            out,
            force,
        } => evolve(config, resume, workers, seed, max_evals, out, force),
        Command::Analyze { what } => analyze(what),
        Command::Validate { path } => validate(&path),
        Command::Terrain {
            env,
            seed,
            resolution,
            out,
        } => generate_terrain(env.into(), seed, resolution, &out),
        Command::PrintDefaultConfig => {
            println!("{}", RunConfig::default().to_pretty_json());
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn evolve(
    config: Option<PathBuf>,
    resume: Option<PathBuf>,
    workers: Option<usize>,
    seed: Option<u64>,
    max_evals: Option<usize>,
    out: Option<PathBuf>,
    force: bool,
) -> Result<(), CliError> {
    let (mut cfg, ckpt) = match (&config, &resume) {
        (_, Some(ckpt_path)) => {
            let ckpt = checkpoint::load(ckpt_path)?;
            if let Some(cfg_path) = &config {
                let provided = RunConfig::from_file(cfg_path)?;
                if provided.digest() != ckpt.config_digest && !force {
                    return Err(CliError::CheckpointMismatch(format!(
                        "config digest {} does not match checkpoint digest {} (use --force to override)",
                        provided.digest(),
                        ckpt.config_digest
                    )));
                }
            }
            (ckpt.config.clone(), Some(ckpt))
        }
        (Some(cfg_path), None) => (RunConfig::from_file(cfg_path)?, None),
        (None, None) => {
            return Err(CliError::Config(
                "evolve needs --config or --resume".to_string(),
            ))
        }
    };
    cfg.apply_env_overrides()?;
    if let Some(w) = workers {
        cfg.evolution.workers = w;
    }
    if let Some(s) = seed {
        cfg.evolution.run_seed = s;
    }
    if let Some(m) = max_evals {
        cfg.evolution.max_evaluations = m;
    }
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    cfg.check()?;
    eprintln!("[morphevo] effective run seed: {}", cfg.evolution.run_seed);

    let surrogate = runner::build_evaluator(&cfg);
    let evaluator: Box<dyn morphevo_core::evolution::FitnessEvaluator> = match std::env::var(
        "MORPHEVO_EVAL_DELAY_MS",
    )
    .ok()
    .and_then(|v| v.parse::<u64>().ok())
    {
        Some(ms) if ms > 0 => Box::new(runner::DelayedEvaluator::new(surrogate, ms)),
        _ => Box::new(surrogate),
    };
    let summary = match ckpt {
        Some(ckpt) => runner::resume(&cfg, evaluator.as_ref(), ckpt)?,
        None => runner::run(&cfg, evaluator.as_ref())?,
    };
    println!("{}", summary.log_path.display());
    println!("{}", summary.checkpoint_path.display());
    eprintln!(
        "[morphevo] done: {} records, {} void tournaments",
        summary.records, summary.voids
    );
    Ok(())
}

fn validate(path: &Path) -> Result<(), CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let morphology =
        Morphology::from_json(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let report = morphology.validate();
    if report.is_valid() {
        println!("valid");
        Ok(())
    } else {
        Err(CliError::InvalidMorphology(report.to_string()))
    }
}

fn generate_terrain(
    env: Env,
    seed: u64,
    resolution: Option<f64>,
    out: &Path,
) -> Result<(), CliError> {
    let resolution = resolution.unwrap_or(terrain::DEFAULT_RESOLUTION);
    if resolution <= 0.0 || !resolution.is_finite() {
        return Err(CliError::Config(format!("bad resolution {resolution}")));
    }
    let mut rng = Stream::derive(seed, "terrain", env as u64);
    let (x_len, y_len) = env.arena();
    let (segments, hf) = terrain::generate_arena(env, x_len, y_len, resolution, &mut rng);
    let id = format!("terrain-{env}-s{seed}");
    let hf_path = out.join(format!("{id}-heightfield.csv"));
    let seg_path = out.join(format!("{id}-segments.json"));
    export::write_heightfield(&hf_path, &hf)?;
    export::write_segments(&seg_path, &segments)?;
    println!("{}", hf_path.display());
    println!("{}", seg_path.display());
    Ok(())
}

fn analyze(cmd: AnalyzeCommand) -> Result<(), CliError> {
    let emit = |paths: &[PathBuf]| {
        for p in paths {
            println!("{}", p.display());
        }
    };
    match cmd {
        AnalyzeCommand::Muller {
            log,
            top_k,
            checkpoints,
            out,
        } => {
            let (data, _) = read_log(&log)?;
            let dir = out.unwrap_or_else(|| default_out(&log));
            let series =
                analytics::muller_series(&data.records, data.header.population, top_k, checkpoints);
            emit(&export::write_muller(&dir, &data.header.run_id(), &series)?);
        }
        AnalyzeCommand::Tree { log, out } => {
            let (data, _) = read_log(&log)?;
            let dir = out.unwrap_or_else(|| default_out(&log));
            let forest = analytics::build_phylogeny(&data.records)
                .map_err(|e| CliError::Log(e.to_string()))?;
            let mut paths = export::write_phylogeny(&dir, &data.header.run_id(), &forest)?;
            let table = analytics::lineage_stats(
                &data.records,
                data.header.population,
                data.header.env,
                &Default::default(),
            );
            paths.push(export::write_lineages(&dir, &data.header.run_id(), &table)?);
            emit(&paths);
        }
        AnalyzeCommand::Baldwin {
            log,
            percentile,
            top_n,
            out,
        } => {
            let (data, _) = read_log(&log)?;
            let dir = out.unwrap_or_else(|| default_out(&log));
            let curve = analytics::baldwin_curve(&data.records, percentile, top_n, ANALYSIS_SEED)
                .map_err(|e| CliError::Log(e.to_string()))?;
            if curve.insufficient_data {
                eprintln!("[morphevo] fewer than {top_n} agents; using all");
            }
            emit(&[export::write_baldwin(&dir, &data.header.run_id(), &curve)?]);
        }
        AnalyzeCommand::Descriptors {
            log,
            checkpoints,
            out,
        } => {
            let (data, _) = read_log(&log)?;
            let dir = out.unwrap_or_else(|| default_out(&log));
            let rows = analytics::descriptor_trends(
                &data.records,
                data.header.population,
                checkpoints,
                ANALYSIS_SEED,
            );
            emit(&[export::write_descriptors(&dir, &data.header.run_id(), &rows)?]);
        }
        AnalyzeCommand::Stability {
            log,
            checkpoints,
            out,
        } => {
            let (data, _) = read_log(&log)?;
            let dir = out.unwrap_or_else(|| default_out(&log));
            let trend =
                analytics::stable_fraction_trend(&data.records, data.header.population, checkpoints);
            emit(&[export::write_stability(&dir, &data.header.run_id(), &trend)?]);
        }
        AnalyzeCommand::Top {
            log,
            per_lineage,
            final_n,
            out,
        } => {
            let mut logs = Vec::new();
            for path in &log {
                let (data, _) = read_log(path)?;
                logs.push(data);
            }
            let runs: Vec<(&[morphevo_core::evolution::Record], usize)> = logs
                .iter()
                .map(|l| (l.records.as_slice(), l.header.population))
                .collect();
            let agents = analytics::select_top_agents(&runs, per_lineage, final_n);
            let dir = out.unwrap_or_else(|| default_out(&log[0]));
            emit(&[export::write_top_agents(
                &dir,
                &logs[0].header.run_id(),
                &agents,
            )?]);
        }
        AnalyzeCommand::Correlate {
            log,
            percentile,
            out,
        } => {
            let (data, _) = read_log(&log)?;
            let dir = out.unwrap_or_else(|| default_out(&log));
            let founders = analytics::founder_records(&data.records);
            if founders.is_empty() {
                return Err(CliError::Log("log has no founder records".to_string()));
            }
            let fitnesses: Vec<f64> = founders.iter().map(|r| r.report.fitness).collect();
            let criterion = metrics::percentile(&fitnesses, percentile)
                .map_err(|e| CliError::Log(e.to_string()))?;
            let agents: Vec<&morphevo_core::evolution::Record> = data.records.iter().collect();
            let report = analytics::fitness_cow_correlation(&agents, criterion)
                .map_err(|e| CliError::Log(e.to_string()))?;
            emit(&[export::write_correlation(
                &dir,
                &data.header.run_id(),
                &report,
            )?]);
        }
    }
    Ok(())
}

fn default_out(log_path: &Path) -> PathBuf {
    log_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}
