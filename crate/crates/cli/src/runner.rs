//! The asynchronous worker pool driving select-mutate-evaluate cycles over
//! a shared population store, with serialized commits, ordered log writes,
//! periodic checkpoints, and resume.
//!
//! Sequence layout: founders consume sequence slots `0..P`, tournaments
//! count on from `P`. All randomness derives from `(run_seed, slot)`, so a
//! single-worker run is bit-reproducible and resuming from a checkpoint
//! continues the exact same draw sequence. With several workers the commit
//! interleaving is scheduler-dependent; the store invariants hold under
//! any interleaving.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Mutex, RwLock};
use std::time::Instant;

use morphevo_core::evolution::{
    child_record, founder_record, plan_tournament, sample_unique_founders, EvalOutput,
    EvolutionConfig, FitnessEvaluator, PopulationStore, Record, SurrogateEvaluator,
};
use morphevo_core::evolution::EvaluatorConfig;

use crate::checkpoint::{self, Checkpoint};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::runlog::{read_log, LogHeader, LogWriter};

/// Instantiates the evaluator named by the config.
pub fn build_evaluator(cfg: &RunConfig) -> SurrogateEvaluator {
    match &cfg.evolution.evaluator {
        EvaluatorConfig::Surrogate { params } => {
            SurrogateEvaluator::new(*params, cfg.evolution.learning_budget)
        }
    }
}

/// Adds a fixed wall-time cost per evaluation. Surrogate evaluations are
/// near-instant; fault-injection tests and demos of asynchronous behavior
/// need runs that take long enough to interrupt. Enabled in the CLI via
/// `MORPHEVO_EVAL_DELAY_MS`.
pub struct DelayedEvaluator<E> {
    inner: E,
    delay: std::time::Duration,
}

impl<E> DelayedEvaluator<E> {
    pub fn new(inner: E, delay_ms: u64) -> Self {
        DelayedEvaluator {
            inner,
            delay: std::time::Duration::from_millis(delay_ms),
        }
    }
}

impl<E: FitnessEvaluator> FitnessEvaluator for DelayedEvaluator<E> {
    fn evaluate(
        &self,
        m: &morphevo_core::morphology::Morphology,
        seed: u64,
        env: morphevo_core::terrain::Env,
    ) -> Result<EvalOutput, morphevo_core::evolution::EvalFailure> {
        std::thread::sleep(self.delay);
        self.inner.evaluate(m, seed, env)
    }

    fn name(&self) -> &'static str {
        self.inner.name()
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub records: usize,
    pub voids: usize,
    pub log_path: std::path::PathBuf,
    pub checkpoint_path: std::path::PathBuf,
}

/// Fresh run: founder sampling (serial, deduplicated), parallel founder
/// evaluation, ordered founder commits, then the tournament pool.
pub fn run(cfg: &RunConfig, evaluator: &dyn FitnessEvaluator) -> Result<RunSummary, CliError> {
    let evo = &cfg.evolution;
    eprintln!(
        "[morphevo] run {} seed={} env={} P={} T={} evals={} workers={}",
        cfg.run_id(),
        evo.run_seed,
        evo.env,
        evo.population,
        evo.tournament_size,
        evo.max_evaluations,
        evo.workers
    );
    let founders = sample_unique_founders(evo).map_err(|e| CliError::Engine(e.to_string()))?;

    // Evaluate all founders in parallel; commit in index order afterwards.
    let outputs: Vec<Mutex<Option<(EvalOutput, u64)>>> =
        founders.iter().map(|_| Mutex::new(None)).collect();
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..evo.workers.max(1) {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= founders.len() {
                    break;
                }
                let started = Instant::now();
                let output = evaluator
                    .evaluate(&founders[i], evo.eval_seed(i as u64), evo.env)
                    .expect("founder evaluation must succeed");
                let wall_ms = started.elapsed().as_millis() as u64;
                *outputs[i].lock().expect("founder slot") = Some((output, wall_ms));
            });
        }
    });

    let header = LogHeader::new(cfg.digest(), evo.run_seed, evo.env, evo.population);
    let mut log = LogWriter::create(&cfg.log_path(), &header, cfg.flush_every_record)?;
    let mut store = PopulationStore::new(evo.population);
    for (i, m) in founders.into_iter().enumerate() {
        let (output, wall_ms) = outputs[i]
            .lock()
            .expect("founder slot")
            .take()
            .expect("evaluated above");
        let mut record = founder_record(evo, i as u64, m, &output);
        if cfg.record_timings {
            record.wall_ms = Some(wall_ms);
        }
        log.write_record(&record)?;
        store.push(record);
        eprintln!("[morphevo] founder {}/{}", i + 1, evo.population);
    }
    log.flush()?;
    let next_seq = evo.population as u64;
    checkpoint::save(
        &cfg.checkpoint_path(),
        &Checkpoint::new(cfg, next_seq, store.archive().to_vec()),
    )?;

    tournament_phase(cfg, evaluator, store, log, next_seq)
}

/// Resume from a checkpoint, replaying any log records committed after it.
pub fn resume(cfg: &RunConfig, evaluator: &dyn FitnessEvaluator, ckpt: Checkpoint) -> Result<RunSummary, CliError> {
    let evo = &cfg.evolution;
    let mut store = PopulationStore::from_archive(ckpt.archive, evo.population);
    let mut next_seq = ckpt.next_seq;

    let log_path = cfg.log_path();
    let log = if log_path.exists() {
        let (log_data, good_bytes) = read_log(&log_path)?;
        if log_data.records.len() > store.len() {
            for record in &log_data.records[store.len()..] {
                next_seq = next_seq.max(record.seq + 1);
                store.push(record.clone());
            }
        }
        if log_data.records.len() >= store.len() {
            LogWriter::append(&log_path, good_bytes, cfg.flush_every_record)?
        } else {
            rewrite_log(cfg, &store)?
        }
    } else {
        rewrite_log(cfg, &store)?
    };
    for r in store.archive() {
        next_seq = next_seq.max(r.seq + 1);
    }
    eprintln!(
        "[morphevo] resume {} at {} records (next seq {})",
        cfg.run_id(),
        store.len(),
        next_seq
    );
    tournament_phase(cfg, evaluator, store, log, next_seq)
}

fn rewrite_log(cfg: &RunConfig, store: &PopulationStore) -> Result<LogWriter, CliError> {
    let header = LogHeader::new(
        cfg.digest(),
        cfg.evolution.run_seed,
        cfg.evolution.env,
        cfg.evolution.population,
    );
    let mut log = LogWriter::create(&cfg.log_path(), &header, cfg.flush_every_record)?;
    for record in store.archive() {
        log.write_record(record)?;
    }
    log.flush()?;
    Ok(log)
}

fn tournament_phase(
    cfg: &RunConfig,
    evaluator: &dyn FitnessEvaluator,
    store: PopulationStore,
    log: LogWriter,
    next_seq: u64,
) -> Result<RunSummary, CliError> {
    let evo = &cfg.evolution;
    let store = RwLock::new(store);
    let log = Mutex::new(log);
    let seq = AtomicU64::new(next_seq);
    let voids = AtomicUsize::new(0);
    let failure: Mutex<Option<CliError>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..evo.workers.max(1) {
            scope.spawn(|| {
                if let Err(e) = worker_loop(cfg, evaluator, &store, &log, &seq, &voids) {
                    let mut slot = failure.lock().expect("failure slot");
                    slot.get_or_insert(e);
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().expect("failure slot") {
        return Err(e);
    }

    let store = store.into_inner().expect("store lock");
    let mut log = log.into_inner().expect("log lock");
    log.flush()?;
    checkpoint::save(
        &cfg.checkpoint_path(),
        &Checkpoint::new(cfg, seq.load(Ordering::SeqCst), store.archive().to_vec()),
    )?;
    Ok(RunSummary {
        records: store.len(),
        voids: voids.load(Ordering::SeqCst),
        log_path: cfg.log_path(),
        checkpoint_path: cfg.checkpoint_path(),
    })
}

fn worker_loop(
    cfg: &RunConfig,
    evaluator: &dyn FitnessEvaluator,
    store: &RwLock<PopulationStore>,
    log: &Mutex<LogWriter>,
    seq: &AtomicU64,
    voids: &AtomicUsize,
) -> Result<(), CliError> {
    let evo = &cfg.evolution;
    loop {
        // Selection and mutation under a shared read lock; evaluation, the
        // long step, outside any lock; commit under the write lock.
        let plan = {
            let guard = store.read().expect("store lock");
            if guard.len() >= evo.max_evaluations {
                return Ok(());
            }
            let slot = seq.fetch_add(1, Ordering::SeqCst);
            plan_tournament(guard.alive(), guard.len() as u64, evo, slot)
        };
        let started = Instant::now();
        let output = match evaluator.evaluate(&plan.child, plan.eval_seed, evo.env) {
            Ok(output) => output,
            Err(e) => {
                // Void tournament: consumes a sequence slot, no birth index.
                voids.fetch_add(1, Ordering::SeqCst);
                eprintln!("[morphevo] void tournament seq={}: {e}", plan.seq);
                continue;
            }
        };
        let wall_ms = started.elapsed().as_millis() as u64;

        let committed = {
            let mut guard = store.write().expect("store lock");
            if guard.len() >= evo.max_evaluations {
                // Archive filled while we were evaluating; discard.
                return Ok(());
            }
            let birth = guard.next_birth_index();
            let mut record = child_record(evo, plan, &output, birth);
            if cfg.record_timings {
                record.wall_ms = Some(wall_ms);
            }
            let evicted = guard.push(record.clone());
            assert_eq!(guard.alive().len(), evo.population.min(guard.len()));
            debug_assert!(evicted.is_none_or(|id| id + (evo.population as u64) == birth));
            // Log writes stay inside the commit so records land in birth
            // order; lock order is always store then log.
            log.lock().expect("log lock").write_record(&record)?;
            (birth, record.report.fitness)
        };
        let done = committed.0 + 1;
        eprintln!(
            "[morphevo] eval {done}/{} fitness={:.2}",
            evo.max_evaluations, committed.1
        );
        if cfg.checkpoint_interval > 0 && done % cfg.checkpoint_interval as u64 == 0 {
            let snapshot = {
                let guard = store.read().expect("store lock");
                guard.archive().to_vec()
            };
            checkpoint::save(
                &cfg.checkpoint_path(),
                &Checkpoint::new(cfg, seq.load(Ordering::SeqCst), snapshot),
            )?;
        }
    }
}

/// Serial reference comparison helper used by tests: the archive a
/// one-worker run must reproduce.
pub fn serial_reference(evo: &EvolutionConfig, evaluator: &dyn FitnessEvaluator) -> Vec<Record> {
    morphevo_core::evolution::run_serial(evo, evaluator).expect("serial run")
}
