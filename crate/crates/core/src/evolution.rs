//! Asynchronous tournament evolution: population store with oldest-member
//! eviction, selection, the evaluator contract, and the built-in surrogate
//! evaluator.
//!
//! The store keeps every evaluated individual forever (the archive); the
//! alive population is simply the most recent `P` by birth index, so
//! inserting a child implicitly evicts the oldest member. Selection and
//! commit are cheap and serialize through the store; evaluation, the long
//! step, runs outside it. This module is single-threaded; the worker pool
//! that drives it concurrently lives in the companion crate.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::digest;
use crate::geometry;
use crate::metrics::{
    self, BeneficialThresholds, FitnessReport, LearningCurve, FITNESS_WINDOW, LEARNING_BUDGET,
};
use crate::morphology::Morphology;
use crate::mutation::{self, MutationKind, MutationWeights, INITIAL_LIMB_RANGE};
use crate::rng::{mix64, Stream};
use crate::terrain::Env;

/// One evaluated individual; the unit stored in archives, logs, and
/// checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// Globally unique id; equals the birth index.
    pub id: u64,
    /// Position in birth order, gap-free across the archive.
    pub birth_index: u64,
    /// Tournament/founder sequence number that produced this record; seeds
    /// derive from it, and void tournaments consume one without a birth.
    pub seq: u64,
    pub parent_id: Option<u64>,
    /// Founder ancestor; equals `id` for founders.
    pub lineage_id: u64,
    /// Operator that produced this genotype; absent for founders.
    pub op: Option<MutationKind>,
    pub eval_seed: u64,
    /// Archive length when the tournament sampled its candidates.
    pub selected_at: u64,
    /// Ids of the tournament sample; empty for founders.
    pub candidates: Vec<u64>,
    pub morphology: Morphology,
    pub curve: LearningCurve,
    pub report: FitnessReport,
    /// Evaluation wall time; captured only when timing capture is enabled,
    /// since deterministic logs must not contain clock readings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

/// Evaluator outputs for one lifetime of learning.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutput {
    pub curve: LearningCurve,
    /// Forward-progress-only channel sampled at the same iterations; the
    /// tournament comparison key, so selection carries no pressure toward
    /// the energy penalty term.
    pub progress: Vec<(u64, f64)>,
    /// Lifetime energy: absolute sum of joint torques.
    pub energy: f64,
    pub dynamically_stable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalFailure(pub String);

impl fmt::Display for EvalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "evaluation failed: {}", self.0)
    }
}

impl core::error::Error for EvalFailure {}

/// Pluggable fitness evaluation: deterministic in `(morphology, seed, env)`
/// and safe to call concurrently on distinct inputs.
pub trait FitnessEvaluator: Sync {
    fn evaluate(&self, m: &Morphology, seed: u64, env: Env) -> Result<EvalOutput, EvalFailure>;

    fn name(&self) -> &'static str {
        "custom"
    }
}

/// Engine configuration. Defaults carry the reference experiment scale;
/// desk-scale runs override population and evaluation counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    /// Alive population size P.
    pub population: usize,
    /// Tournament size T.
    pub tournament_size: usize,
    /// Total evaluations (founders included).
    pub max_evaluations: usize,
    pub workers: usize,
    pub run_seed: u64,
    pub env: Env,
    /// Lifetime learning budget in agent-environment interactions.
    pub learning_budget: u64,
    /// Fitness averaging window over the end of the curve.
    pub fitness_window: u64,
    pub beneficial_thresholds: BeneficialThresholds,
    pub mutation_weights: MutationWeights,
    pub initial_limb_range: (usize, usize),
    /// Reuse one evaluation seed for every lifetime in the run.
    pub shared_eval_seed: bool,
    pub evaluator: EvaluatorConfig,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population: 576,
            tournament_size: 4,
            max_evaluations: 4000,
            workers: 8,
            run_seed: 0,
            env: Env::Ft,
            learning_budget: LEARNING_BUDGET,
            fitness_window: FITNESS_WINDOW,
            beneficial_thresholds: BeneficialThresholds::default(),
            mutation_weights: MutationWeights::default(),
            initial_limb_range: INITIAL_LIMB_RANGE,
            shared_eval_seed: false,
            evaluator: EvaluatorConfig::default(),
        }
    }
}

impl EvolutionConfig {
    /// Minutes-scale configuration for local runs and tests.
    pub fn desk_scale() -> Self {
        EvolutionConfig {
            population: 64,
            max_evaluations: 640,
            ..EvolutionConfig::default()
        }
    }

    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        digest::hex_digest(json.as_bytes())
    }

    /// Evaluation seed for a sequence slot.
    pub fn eval_seed(&self, seq: u64) -> u64 {
        if self.shared_eval_seed {
            mix64(&[self.run_seed, 0x6576616c, 0])
        } else {
            mix64(&[self.run_seed, 0x6576616c, seq])
        }
    }
}

/// Named evaluator plus parameters, as stored in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum EvaluatorConfig {
    Surrogate { params: SurrogateParams },
}

impl Default for EvaluatorConfig {
    fn default() -> Self {
        EvaluatorConfig::Surrogate {
            params: SurrogateParams::default(),
        }
    }
}

// ---------------------------------------------------------------------------
// Population store
// ---------------------------------------------------------------------------

/// Append-only archive; the alive set is the trailing window of size P.
#[derive(Debug, Clone)]
pub struct PopulationStore {
    archive: Vec<Record>,
    population: usize,
}

impl PopulationStore {
    pub fn new(population: usize) -> Self {
        assert!(population >= 1);
        PopulationStore {
            archive: Vec::new(),
            population,
        }
    }

    /// Rebuilds a store from a checkpointed archive.
    pub fn from_archive(archive: Vec<Record>, population: usize) -> Self {
        let mut store = PopulationStore::new(population);
        for record in archive {
            store.push(record);
        }
        store
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn len(&self) -> usize {
        self.archive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.archive.is_empty()
    }

    pub fn archive(&self) -> &[Record] {
        &self.archive
    }

    pub fn into_archive(self) -> Vec<Record> {
        self.archive
    }

    /// The most recent P individuals, oldest first.
    pub fn alive(&self) -> &[Record] {
        let start = self.archive.len().saturating_sub(self.population);
        &self.archive[start..]
    }

    pub fn next_birth_index(&self) -> u64 {
        self.archive.len() as u64
    }

    /// Commits a record; returns the id evicted from the alive window.
    /// Birth indices are assigned here and must arrive gap-free.
    pub fn push(&mut self, record: Record) -> Option<u64> {
        assert_eq!(record.birth_index, self.archive.len() as u64);
        assert_eq!(record.id, record.birth_index);
        let evicted = if self.archive.len() >= self.population {
            Some(self.archive[self.archive.len() - self.population].id)
        } else {
            None
        };
        self.archive.push(record);
        evicted
    }
}

// ---------------------------------------------------------------------------
// Selection
// ---------------------------------------------------------------------------

/// Samples `t` alive individuals without replacement and returns the one
/// with the highest forward progress (ties go to the younger individual),
/// along with the sampled candidate ids.
pub fn select_parent<'a>(
    alive: &'a [Record],
    t: usize,
    rng: &mut Stream,
) -> (&'a Record, Vec<u64>) {
    assert!(!alive.is_empty());
    let k = t.min(alive.len());
    let mut picks = Vec::new();
    rng.sample_indices(alive.len(), k, &mut picks);
    let candidates: Vec<u64> = picks.iter().map(|&i| alive[i].id).collect();
    let parent = picks
        .iter()
        .map(|&i| &alive[i])
        .max_by(|a, b| {
            (a.report.forward_progress, a.birth_index)
                .partial_cmp(&(b.report.forward_progress, b.birth_index))
                .expect("finite fitness")
        })
        .expect("non-empty tournament");
    (parent, candidates)
}

/// Builds the stored report from evaluator outputs plus body geometry.
pub fn build_report(m: &Morphology, output: &EvalOutput, window: u64) -> FitnessReport {
    let fitness = metrics::fitness_from_curve(&output.curve, window).expect("non-empty curve");
    let forward_progress =
        metrics::windowed_mean(&output.progress, output.curve.total_iterations, window)
            .unwrap_or(fitness);
    let mass = geometry::mass_properties(m).total_mass;
    FitnessReport {
        fitness,
        forward_progress,
        energy: output.energy,
        cow: metrics::cost_of_work(output.energy, mass, fitness).ok(),
        passively_stable: geometry::passive_stability(m).stable,
        dynamically_stable: output.dynamically_stable,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EngineError {
    /// Founder dedup exceeded its draw budget without P unique genotypes.
    UniquenessExhausted,
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::UniquenessExhausted => {
                write!(f, "could not sample enough unique founder genotypes")
            }
        }
    }
}

impl core::error::Error for EngineError {}

/// Samples P founder genotypes with unique canonical digests. Attempt `i`
/// draws from its own derived stream, so the founder set is a pure function
/// of the run seed.
pub fn sample_unique_founders(cfg: &EvolutionConfig) -> Result<Vec<Morphology>, EngineError> {
    let mut seen: Vec<String> = Vec::new();
    let mut founders = Vec::with_capacity(cfg.population);
    let budget = 100 * cfg.population as u64;
    let mut attempt = 0u64;
    while founders.len() < cfg.population {
        if attempt >= budget {
            return Err(EngineError::UniquenessExhausted);
        }
        let mut stream = Stream::derive(cfg.run_seed, "founder", attempt);
        attempt += 1;
        let m = mutation::sample_initial_morphology(&mut stream, cfg.initial_limb_range);
        let d = m.digest();
        if seen.contains(&d) {
            continue;
        }
        seen.push(d);
        founders.push(m);
    }
    Ok(founders)
}

/// Per-tournament randomness, derived from the run seed and the sequence
/// slot; workers never share streams.
pub fn tournament_stream(run_seed: u64, seq: u64) -> Stream {
    Stream::derive(run_seed, "tournament", seq)
}

/// Assembles a founder record (birth index == seq for founders).
pub fn founder_record(
    cfg: &EvolutionConfig,
    index: u64,
    m: Morphology,
    output: &EvalOutput,
) -> Record {
    Record {
        id: index,
        birth_index: index,
        seq: index,
        parent_id: None,
        lineage_id: index,
        op: None,
        eval_seed: cfg.eval_seed(index),
        selected_at: 0,
        candidates: Vec::new(),
        morphology: m.clone(),
        report: build_report(&m, output, cfg.fitness_window),
        curve: output.curve.clone(),
        wall_ms: None,
    }
}

/// Pre-evaluation phase of one tournament: the selection sample, the
/// chosen parent, and the validated child genotype.
#[derive(Debug, Clone)]
pub struct TournamentPlan {
    pub seq: u64,
    pub selected_at: u64,
    pub parent_id: u64,
    pub lineage_id: u64,
    pub candidates: Vec<u64>,
    pub op: MutationKind,
    pub child: Morphology,
    pub eval_seed: u64,
}

/// Selection plus mutation, everything before the (long) evaluation step.
/// `selected_at` must be the archive length when `alive` was read. Pure in
/// `(alive, cfg, seq)`, so any runner that feeds the same sequence numbers
/// reproduces the same plans.
pub fn plan_tournament(
    alive: &[Record],
    selected_at: u64,
    cfg: &EvolutionConfig,
    seq: u64,
) -> TournamentPlan {
    let mut stream = tournament_stream(cfg.run_seed, seq);
    let (parent, candidates) = select_parent(alive, cfg.tournament_size, &mut stream);
    // Mutation retries re-draw the operator until a child validates; the
    // density operator always succeeds, so this terminates.
    let mut guard = 0;
    let outcome = loop {
        match mutation::mutate(&parent.morphology, &mut stream, &cfg.mutation_weights) {
            Ok(out) => break out,
            Err(_) => {
                guard += 1;
                assert!(guard < 1000, "mutation cannot fail persistently");
            }
        }
    };
    TournamentPlan {
        seq,
        selected_at,
        parent_id: parent.id,
        lineage_id: parent.lineage_id,
        candidates,
        op: outcome.op,
        child: outcome.child,
        eval_seed: cfg.eval_seed(seq),
    }
}

/// Assembles the committed record for an evaluated tournament child.
pub fn child_record(
    cfg: &EvolutionConfig,
    plan: TournamentPlan,
    output: &EvalOutput,
    birth_index: u64,
) -> Record {
    let report = build_report(&plan.child, output, cfg.fitness_window);
    Record {
        id: birth_index,
        birth_index,
        seq: plan.seq,
        parent_id: Some(plan.parent_id),
        lineage_id: plan.lineage_id,
        op: Some(plan.op),
        eval_seed: plan.eval_seed,
        selected_at: plan.selected_at,
        candidates: plan.candidates,
        morphology: plan.child,
        report,
        curve: output.curve.clone(),
        wall_ms: None,
    }
}

/// One full select-mutate-evaluate cycle against an in-memory store.
/// Returns `None` on a void tournament (evaluation failure).
pub fn run_tournament(
    store: &mut PopulationStore,
    cfg: &EvolutionConfig,
    seq: u64,
    evaluator: &dyn FitnessEvaluator,
) -> Option<Record> {
    let plan = plan_tournament(store.alive(), store.len() as u64, cfg, seq);
    let output = evaluator.evaluate(&plan.child, plan.eval_seed, cfg.env).ok()?;
    let record = child_record(cfg, plan, &output, store.next_birth_index());
    store.push(record.clone());
    Some(record)
}

/// Single-threaded reference engine: evaluates founders, then runs
/// tournaments until the archive reaches `max_evaluations`. The threaded
/// runner in the companion crate follows the same sequence layout, so a
/// one-worker threaded run reproduces this archive exactly.
pub fn run_serial(
    cfg: &EvolutionConfig,
    evaluator: &dyn FitnessEvaluator,
) -> Result<Vec<Record>, EngineError> {
    let mut store = PopulationStore::new(cfg.population);
    let founders = sample_unique_founders(cfg)?;
    for (i, m) in founders.into_iter().enumerate() {
        let output = evaluator
            .evaluate(&m, cfg.eval_seed(i as u64), cfg.env)
            .expect("founder evaluation must succeed");
        store.push(founder_record(cfg, i as u64, m, &output));
    }
    let mut seq = cfg.population as u64;
    while store.len() < cfg.max_evaluations {
        run_tournament(&mut store, cfg, seq, evaluator);
        seq += 1;
    }
    Ok(store.into_archive())
}

// ---------------------------------------------------------------------------
// Surrogate evaluator
// ---------------------------------------------------------------------------

/// Constants of the analytic learning-curve surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateParams {
    /// Reward asymptote scales per environment.
    pub base_ft: f64,
    pub base_vt: f64,
    pub base_mvt: f64,
    /// Asymptote logit weights: stability margin, coverage, limb-count
    /// distance from six.
    pub alpha_stability: f64,
    pub alpha_coverage: f64,
    pub alpha_limbs: f64,
    /// Learning-rate constant as a fraction of the budget.
    pub tau0_frac: f64,
    /// Learning-speed gains from stability and from actuation economy.
    pub beta_stability: f64,
    pub beta_cost: f64,
    /// Energy per unit cost proxy per iteration.
    pub kappa_energy: f64,
    /// Relative noise amplitude; zero disables noise entirely.
    pub noise: f64,
    /// Curve sample count.
    pub curve_points: usize,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        SurrogateParams {
            base_ft: 4000.0,
            base_vt: 2000.0,
            base_mvt: 1500.0,
            alpha_stability: 4.0,
            alpha_coverage: 2.0,
            alpha_limbs: 0.25,
            tau0_frac: 0.35,
            beta_stability: 6.0,
            beta_cost: 200.0,
            kappa_energy: 2e-4,
            noise: 0.02,
            curve_points: 64,
        }
    }
}

impl SurrogateParams {
    pub fn noiseless(mut self) -> Self {
        self.noise = 0.0;
        self
    }

    fn base(&self, env: Env) -> f64 {
        match env {
            Env::Ft => self.base_ft,
            Env::Vt => self.base_vt,
            Env::Mvt => self.base_mvt,
        }
    }
}

/// Deterministic analytic stand-in for lifetime reinforcement learning.
///
/// Features of the body map to a saturating learning curve: the reward
/// asymptote rises with passive-stability margin and coverage and is
/// highest near six limbs; the learning-rate constant shrinks (faster
/// learning) with stability and with actuation economy. Selection on
/// final reward therefore implicitly selects faster learners, which is
/// the dynamic the engine's analytics are built to expose.
#[derive(Debug, Clone)]
pub struct SurrogateEvaluator {
    pub params: SurrogateParams,
    pub budget: u64,
}

/// Body features the surrogate responds to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateFeatures {
    pub stability_margin: f64,
    pub coverage: f64,
    pub limb_count: usize,
    /// Gear sum over mass: the actuation-cost proxy.
    pub cost_proxy: f64,
}

impl SurrogateFeatures {
    pub fn of(m: &Morphology) -> Self {
        let gear_sum: f64 = m
            .limbs
            .iter()
            .flat_map(|l| l.joint.hinges.iter())
            .map(|h| h.gear as f64)
            .sum();
        SurrogateFeatures {
            stability_margin: geometry::passive_stability(m).margin.clamp(-2.0, 2.0),
            coverage: geometry::descriptors(m).coverage,
            limb_count: m.limbs.len(),
            cost_proxy: (gear_sum / geometry::mass_properties(m).total_mass).max(1e-9),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

impl SurrogateEvaluator {
    pub fn new(params: SurrogateParams, budget: u64) -> Self {
        SurrogateEvaluator { params, budget }
    }

    /// Noiseless feature response: reward asymptote and learning-rate
    /// constant. The asymptote rises with stability and coverage and peaks
    /// near six limbs; tau shrinks (faster learning) with stability and
    /// with actuation economy.
    pub fn response(&self, f: &SurrogateFeatures, env: Env) -> (f64, f64) {
        let p = &self.params;
        let logit = p.alpha_stability * f.stability_margin + p.alpha_coverage * f.coverage
            - p.alpha_limbs * (f.limb_count as f64 - 6.0).abs();
        let asymptote = p.base(env) * sigmoid(logit);
        let tau = p.tau0_frac * self.budget as f64
            / (1.0 + p.beta_stability * f.stability_margin.max(0.0) + p.beta_cost / f.cost_proxy);
        (asymptote, tau)
    }
}

impl FitnessEvaluator for SurrogateEvaluator {
    fn evaluate(&self, m: &Morphology, seed: u64, env: Env) -> Result<EvalOutput, EvalFailure> {
        let p = &self.params;
        let features = SurrogateFeatures::of(m);
        let (mut asymptote, tau) = self.response(&features, env);

        let mut noise_rng = Stream::derive(seed, "surrogate", digest::fnv64(m.digest().as_bytes()));
        let mut jitter = |scale: f64| {
            if p.noise == 0.0 {
                0.0
            } else {
                p.noise * scale * (2.0 * noise_rng.next_f64() - 1.0)
            }
        };
        asymptote *= 1.0 + jitter(1.0);

        let k = p.curve_points.max(1);
        let mut samples = Vec::with_capacity(k);
        let mut progress = Vec::with_capacity(k);
        for i in 0..k {
            let t = self.budget * (i as u64 + 1) / k as u64;
            let value =
                asymptote * (1.0 - libm::exp(-(t as f64) / tau)) * (1.0 + jitter(0.25));
            samples.push((t, value));
            progress.push((t, value));
        }
        Ok(EvalOutput {
            curve: LearningCurve::new(samples, self.budget).expect("non-empty curve"),
            progress,
            energy: p.kappa_energy * features.cost_proxy * self.budget as f64,
            dynamically_stable: Some(features.stability_margin > 0.0),
        })
    }

    fn name(&self) -> &'static str {
        "surrogate"
    }
}
