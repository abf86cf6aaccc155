//! Post-hoc run analysis: phylogenetic forests with Newick export, Muller
//! abundance series, lineage tables, Baldwin learning-speed curves,
//! descriptor and stability trends, top-agent selection, and the
//! fitness/efficiency correlations.
//!
//! Everything operates on an immutable archive slice (the parsed run log);
//! the alive set at birth index `t` is the trailing population window, so
//! no engine state is needed to replay population dynamics.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;

use crate::evolution::Record;
use crate::geometry;
use crate::metrics::{self, BeneficialThresholds};
use crate::stats::{self, StatsError};
use crate::terrain::Env;

/// Bootstrap resamples behind every reported confidence interval.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Default analysis seed; analytics outputs are pure functions of
/// (archive, seed).
pub const ANALYSIS_SEED: u64 = 0x616e6c7a;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnalyticsError {
    /// A record references a parent id absent from the archive.
    MissingParent(u64),
    EmptyArchive,
}

impl fmt::Display for AnalyticsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticsError::MissingParent(id) => write!(f, "record references unknown parent {id}"),
            AnalyticsError::EmptyArchive => write!(f, "archive has no records"),
        }
    }
}

impl core::error::Error for AnalyticsError {}

/// Records with no parent; the engine always evaluates the full founder
/// population before any tournament commits.
pub fn founder_records(records: &[Record]) -> &[Record] {
    let end = records
        .iter()
        .position(|r| r.parent_id.is_some())
        .unwrap_or(records.len());
    &records[..end]
}

/// The alive set at birth index `t`: the most recent `population` records
/// among those born at or before `t`.
pub fn alive_at(records: &[Record], population: usize, t: u64) -> &[Record] {
    let end = ((t + 1) as usize).min(records.len());
    &records[end.saturating_sub(population)..end]
}

/// Evenly spaced checkpoint birth indices from the first full population
/// to the end of the archive.
pub fn checkpoint_indices(records: &[Record], population: usize, count: usize) -> Vec<u64> {
    if records.is_empty() || count == 0 {
        return Vec::new();
    }
    let lo = population.min(records.len()) as u64 - 1;
    let hi = records.len() as u64 - 1;
    if count == 1 || lo == hi {
        return alloc::vec![hi];
    }
    let mut out: Vec<u64> = (0..count)
        .map(|j| lo + ((hi - lo) as f64 * j as f64 / (count - 1) as f64 + 0.5) as u64)
        .collect();
    out.dedup();
    out
}

/// Generation (tree depth from founder) per record, indexed by birth index.
pub fn generation_index(records: &[Record]) -> Vec<u32> {
    let mut gen = Vec::with_capacity(records.len());
    for r in records {
        let g = match r.parent_id {
            None => 0,
            Some(p) => {
                debug_assert!(p < r.id);
                gen.get(p as usize).copied().unwrap_or(0) + 1
            }
        };
        gen.push(g);
    }
    gen
}

// ---------------------------------------------------------------------------
// Phylogeny
// ---------------------------------------------------------------------------

/// One individual in the phylogenetic forest.
#[derive(Debug, Clone, Serialize)]
pub struct PhylogenyNode {
    pub id: u64,
    pub fitness: f64,
    /// Total descendants in the archive (not just direct children).
    pub descendant_count: usize,
    pub children: Vec<PhylogenyNode>,
}

/// Builds the forest, one tree per founder (lineage), children in birth
/// order.
pub fn build_phylogeny(records: &[Record]) -> Result<Vec<PhylogenyNode>, AnalyticsError> {
    let index_of = |id: u64| -> Option<usize> {
        let i = id as usize;
        (i < records.len() && records[i].id == id).then_some(i)
    };
    let mut children: Vec<Vec<usize>> = alloc::vec![Vec::new(); records.len()];
    for (i, r) in records.iter().enumerate() {
        if let Some(pid) = r.parent_id {
            let p = index_of(pid).ok_or(AnalyticsError::MissingParent(pid))?;
            children[p].push(i);
        }
    }
    fn build(records: &[Record], children: &[Vec<usize>], i: usize) -> PhylogenyNode {
        let kids: Vec<PhylogenyNode> = children[i]
            .iter()
            .map(|&c| build(records, children, c))
            .collect();
        let descendant_count = kids
            .iter()
            .map(|k| k.descendant_count + 1)
            .sum::<usize>();
        PhylogenyNode {
            id: records[i].id,
            fitness: records[i].report.fitness,
            descendant_count,
            children: kids,
        }
    }
    Ok(records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.parent_id.is_none())
        .map(|(i, _)| build(records, &children, i))
        .collect())
}

/// Newick text for the forest, one tree per line, fitness carried as a
/// bracket comment on each node label.
pub fn to_newick(roots: &[PhylogenyNode]) -> String {
    fn write_node(out: &mut String, node: &PhylogenyNode) {
        if !node.children.is_empty() {
            out.push('(');
            for (i, child) in node.children.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_node(out, child);
            }
            out.push(')');
        }
        out.push_str(&format!("{}[&fitness={}]", node.id, node.fitness));
    }
    let mut out = String::new();
    for root in roots {
        write_node(&mut out, root);
        out.push_str(";\n");
    }
    out
}

// ---------------------------------------------------------------------------
// Muller series
// ---------------------------------------------------------------------------

/// Relative lineage abundance over time for the top lineages by final
/// abundance; everything else aggregates into a trailing "other" column.
#[derive(Debug, Clone)]
pub struct MullerSeries {
    pub checkpoints: Vec<u64>,
    /// Lineage ids of the tracked columns, final-abundance descending.
    pub lineage_ids: Vec<u64>,
    /// Per checkpoint: one fraction per tracked lineage plus "other" last;
    /// each row sums to 1.
    pub abundance: Vec<Vec<f64>>,
    /// Mean fitness of each tracked lineage's alive members per checkpoint
    /// (NaN when the lineage is absent at that checkpoint).
    pub mean_fitness: Vec<Vec<f64>>,
}

pub fn muller_series(
    records: &[Record],
    population: usize,
    top_k: usize,
    checkpoints: usize,
) -> MullerSeries {
    let ticks = checkpoint_indices(records, population, checkpoints);
    // Rank lineages by abundance in the final alive set.
    let final_alive = alive_at(records, population, records.len() as u64 - 1);
    let mut counts: Vec<(u64, usize)> = Vec::new();
    for r in founder_records(records) {
        counts.push((r.lineage_id, 0));
    }
    for r in final_alive {
        if let Some(entry) = counts.iter_mut().find(|(id, _)| *id == r.lineage_id) {
            entry.1 += 1;
        }
    }
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let lineage_ids: Vec<u64> = counts.iter().take(top_k).map(|&(id, _)| id).collect();

    let mut abundance = Vec::with_capacity(ticks.len());
    let mut mean_fitness = Vec::with_capacity(ticks.len());
    for &t in &ticks {
        let alive = alive_at(records, population, t);
        let total = alive.len() as f64;
        let mut row = Vec::with_capacity(lineage_ids.len() + 1);
        let mut fit_row = Vec::with_capacity(lineage_ids.len());
        let mut tracked = 0usize;
        for &lid in &lineage_ids {
            let members: Vec<&Record> = alive.iter().filter(|r| r.lineage_id == lid).collect();
            tracked += members.len();
            row.push(members.len() as f64 / total);
            if members.is_empty() {
                fit_row.push(f64::NAN);
            } else {
                fit_row.push(
                    members.iter().map(|r| r.report.fitness).sum::<f64>() / members.len() as f64,
                );
            }
        }
        row.push((alive.len() - tracked) as f64 / total);
        abundance.push(row);
        mean_fitness.push(fit_row);
    }
    MullerSeries {
        checkpoints: ticks,
        lineage_ids,
        abundance,
        mean_fitness,
    }
}

// ---------------------------------------------------------------------------
// Lineage table
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct LineageStats {
    pub lineage_id: u64,
    /// 1 = fittest founder.
    pub founder_fitness_rank: usize,
    /// Fraction of the final alive set.
    pub final_abundance: f64,
    /// Parent-to-child fitness jumps at or above the environment threshold.
    pub beneficial_mutation_count: usize,
}

pub fn lineage_stats(
    records: &[Record],
    population: usize,
    env: Env,
    thresholds: &BeneficialThresholds,
) -> Vec<LineageStats> {
    let founders = founder_records(records);
    let mut order: Vec<&Record> = founders.iter().collect();
    order.sort_by(|a, b| {
        b.report
            .fitness
            .partial_cmp(&a.report.fitness)
            .expect("finite fitness")
            .then(a.id.cmp(&b.id))
    });
    let rank_of = |id: u64| order.iter().position(|r| r.id == id).unwrap_or(0) + 1;

    let final_alive = alive_at(records, population, records.len() as u64 - 1);
    let threshold = thresholds.get(env);
    founders
        .iter()
        .map(|f| {
            let alive_members = final_alive
                .iter()
                .filter(|r| r.lineage_id == f.id)
                .count();
            let beneficial = records
                .iter()
                .filter(|r| r.lineage_id == f.id)
                .filter(|r| {
                    r.parent_id.is_some_and(|pid| {
                        metrics::beneficial_mutation_with(
                            records[pid as usize].report.fitness,
                            r.report.fitness,
                            threshold,
                        )
                    })
                })
                .count();
            LineageStats {
                lineage_id: f.id,
                founder_fitness_rank: rank_of(f.id),
                final_abundance: alive_members as f64 / final_alive.len() as f64,
                beneficial_mutation_count: beneficial,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Baldwin curve
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct BaldwinRow {
    pub generation: u32,
    /// Individuals that reached the criterion.
    pub n: usize,
    pub mean_iterations: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Individuals whose curve never reached the criterion; excluded from
    /// the mean and reported separately.
    pub not_reached: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaldwinCurve {
    /// Criterion reward: a percentile of founder fitness.
    pub criterion: f64,
    pub rows: Vec<BaldwinRow>,
    /// Fewer agents than requested existed; all were used.
    pub insufficient_data: bool,
}

/// Iterations-to-criterion versus generation for the fittest agents.
pub fn baldwin_curve(
    records: &[Record],
    criterion_percentile: f64,
    top_n: usize,
    analysis_seed: u64,
) -> Result<BaldwinCurve, AnalyticsError> {
    let founders = founder_records(records);
    if founders.is_empty() {
        return Err(AnalyticsError::EmptyArchive);
    }
    let founder_fitness: Vec<f64> = founders.iter().map(|r| r.report.fitness).collect();
    let criterion = metrics::percentile(&founder_fitness, criterion_percentile)
        .expect("non-empty founder set");

    let mut by_fitness: Vec<&Record> = records.iter().collect();
    by_fitness.sort_by(|a, b| {
        b.report
            .fitness
            .partial_cmp(&a.report.fitness)
            .expect("finite fitness")
            .then(a.id.cmp(&b.id))
    });
    let insufficient_data = by_fitness.len() < top_n;
    by_fitness.truncate(top_n);

    let generations = generation_index(records);
    let mut groups: Vec<(u32, Vec<f64>, usize)> = Vec::new();
    for r in by_fitness {
        let g = generations[r.id as usize];
        let slot = match groups.iter_mut().find(|(gen, _, _)| *gen == g) {
            Some(slot) => slot,
            None => {
                groups.push((g, Vec::new(), 0));
                groups.last_mut().expect("just pushed")
            }
        };
        match metrics::baldwin_iterations(&r.curve, criterion).expect("non-empty curve") {
            Some(it) => slot.1.push(it as f64),
            None => slot.2 += 1,
        }
    }
    groups.sort_by_key(|&(g, _, _)| g);
    let rows = groups
        .into_iter()
        .map(|(generation, iterations, not_reached)| {
            if iterations.is_empty() {
                BaldwinRow {
                    generation,
                    n: 0,
                    mean_iterations: f64::NAN,
                    ci_lo: f64::NAN,
                    ci_hi: f64::NAN,
                    not_reached,
                }
            } else {
                let (ci_lo, ci_hi) =
                    stats::bootstrap_mean_ci(&iterations, BOOTSTRAP_RESAMPLES, analysis_seed);
                BaldwinRow {
                    generation,
                    n: iterations.len(),
                    mean_iterations: stats::mean(&iterations),
                    ci_lo,
                    ci_hi,
                    not_reached,
                }
            }
        })
        .collect();
    Ok(BaldwinCurve {
        criterion,
        rows,
        insufficient_data,
    })
}

// ---------------------------------------------------------------------------
// Descriptor and stability trends
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StatSummary {
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

fn summarize(values: &[f64], analysis_seed: u64) -> StatSummary {
    let (ci_lo, ci_hi) = stats::bootstrap_mean_ci(values, BOOTSTRAP_RESAMPLES, analysis_seed);
    StatSummary {
        mean: stats::mean(values),
        ci_lo,
        ci_hi,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DescriptorTrendRow {
    pub birth_index: u64,
    pub extent_x: StatSummary,
    pub extent_y: StatSummary,
    pub extent_z: StatSummary,
    pub coverage: StatSummary,
    pub mass: StatSummary,
    pub dof: StatSummary,
}

/// Mean morphological descriptors over the alive set at each checkpoint.
pub fn descriptor_trends(
    records: &[Record],
    population: usize,
    checkpoints: usize,
    analysis_seed: u64,
) -> Vec<DescriptorTrendRow> {
    checkpoint_indices(records, population, checkpoints)
        .into_iter()
        .map(|t| {
            let alive = alive_at(records, population, t);
            let descs: Vec<geometry::Descriptors> = alive
                .iter()
                .map(|r| geometry::descriptors(&r.morphology))
                .collect();
            let col = |f: &dyn Fn(&geometry::Descriptors) -> f64| -> Vec<f64> {
                descs.iter().map(f).collect()
            };
            DescriptorTrendRow {
                birth_index: t,
                extent_x: summarize(&col(&|d| d.extent_x), analysis_seed),
                extent_y: summarize(&col(&|d| d.extent_y), analysis_seed),
                extent_z: summarize(&col(&|d| d.extent_z), analysis_seed),
                coverage: summarize(&col(&|d| d.coverage), analysis_seed),
                mass: summarize(&col(&|d| d.mass), analysis_seed),
                dof: summarize(&col(&|d| d.dof as f64), analysis_seed),
            }
        })
        .collect()
}

/// Fraction of the alive set that is passively stable, per checkpoint.
pub fn stable_fraction_trend(
    records: &[Record],
    population: usize,
    checkpoints: usize,
) -> Vec<(u64, f64)> {
    checkpoint_indices(records, population, checkpoints)
        .into_iter()
        .map(|t| {
            let alive = alive_at(records, population, t);
            let stable = alive.iter().filter(|r| r.report.passively_stable).count();
            (t, stable as f64 / alive.len() as f64)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Top-agent selection and correlations
// ---------------------------------------------------------------------------

/// From each surviving lineage (nonzero final abundance) of each run, the
/// `per_lineage` fittest members; the `final_n` best overall, fitness
/// descending. Returns (run index, record) pairs.
pub fn select_top_agents(
    runs: &[(&[Record], usize)],
    per_lineage: usize,
    final_n: usize,
) -> Vec<(usize, Record)> {
    let mut pool: Vec<(usize, &Record)> = Vec::new();
    for (run_idx, &(records, population)) in runs.iter().enumerate() {
        if records.is_empty() {
            continue;
        }
        let final_alive = alive_at(records, population, records.len() as u64 - 1);
        let mut surviving: Vec<u64> = final_alive.iter().map(|r| r.lineage_id).collect();
        surviving.sort_unstable();
        surviving.dedup();
        for lid in surviving {
            let mut members: Vec<&Record> =
                records.iter().filter(|r| r.lineage_id == lid).collect();
            members.sort_by(|a, b| {
                b.report
                    .fitness
                    .partial_cmp(&a.report.fitness)
                    .expect("finite fitness")
                    .then(a.id.cmp(&b.id))
            });
            members.truncate(per_lineage);
            pool.extend(members.into_iter().map(|r| (run_idx, r)));
        }
    }
    // Order by fitness, tie-broken on content so the result is invariant
    // to the order runs are passed in.
    pool.sort_by(|a, b| {
        b.1.report
            .fitness
            .partial_cmp(&a.1.report.fitness)
            .expect("finite fitness")
            .then_with(|| a.1.morphology.digest().cmp(&b.1.morphology.digest()))
    });
    pool.truncate(final_n);
    pool.into_iter().map(|(i, r)| (i, r.clone())).collect()
}

/// Correlations between fitness and cost of work, and between
/// iterations-to-criterion and cost of work, over agents with a defined
/// cost of work.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub fitness_cow_r: f64,
    pub fitness_cow_p: f64,
    pub fitness_cow_n: usize,
    pub baldwin_cow_r: Option<f64>,
    pub baldwin_cow_p: Option<f64>,
    pub baldwin_cow_n: usize,
}

pub fn fitness_cow_correlation(
    agents: &[&Record],
    baldwin_criterion: f64,
) -> Result<CorrelationReport, StatsError> {
    let mut fitness = Vec::new();
    let mut cow = Vec::new();
    let mut baldwin = Vec::new();
    let mut baldwin_cow = Vec::new();
    for r in agents {
        let Some(c) = r.report.cow else { continue };
        fitness.push(r.report.fitness);
        cow.push(c);
        if let Ok(Some(it)) = metrics::baldwin_iterations(&r.curve, baldwin_criterion) {
            baldwin.push(it as f64);
            baldwin_cow.push(c);
        }
    }
    let (r, p) = stats::pearson(&fitness, &cow)?;
    let baldwin_channel = stats::pearson(&baldwin, &baldwin_cow).ok();
    Ok(CorrelationReport {
        fitness_cow_r: r,
        fitness_cow_p: p,
        fitness_cow_n: fitness.len(),
        baldwin_cow_r: baldwin_channel.map(|(r, _)| r),
        baldwin_cow_p: baldwin_channel.map(|(_, p)| p),
        baldwin_cow_n: baldwin.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{
        run_serial, EvaluatorConfig, EvolutionConfig, SurrogateEvaluator,
    };

    fn toy_archive(seed: u64, population: usize, evals: usize) -> Vec<Record> {
        let cfg = EvolutionConfig {
            population,
            tournament_size: 4,
            max_evaluations: evals,
            run_seed: seed,
            ..EvolutionConfig::default()
        };
        let EvaluatorConfig::Surrogate { params } = cfg.evaluator.clone();
        let eval = SurrogateEvaluator::new(params, cfg.learning_budget);
        run_serial(&cfg, &eval).unwrap()
    }

    #[test]
    fn phylogeny_conserves_archive_size() {
        let archive = toy_archive(1, 8, 50);
        let forest = build_phylogeny(&archive).unwrap();
        let founders = founder_records(&archive).len();
        assert_eq!(forest.len(), founders);
        let total: usize = forest.iter().map(|t| t.descendant_count + 1).sum();
        assert_eq!(total, archive.len());
    }

    #[test]
    fn phylogeny_chain_depths() {
        let mut archive = toy_archive(2, 4, 6);
        // Rewire into founder -> c1 -> c2 to pin depths.
        archive[4].parent_id = Some(0);
        archive[4].lineage_id = 0;
        archive[5].parent_id = Some(4);
        archive[5].lineage_id = 0;
        let gens = generation_index(&archive);
        assert_eq!(gens[0], 0);
        assert_eq!(gens[4], 1);
        assert_eq!(gens[5], 2);
        let forest = build_phylogeny(&archive).unwrap();
        let root0 = forest.iter().find(|n| n.id == 0).unwrap();
        assert_eq!(root0.descendant_count, 2);
    }

    #[test]
    fn missing_parent_is_an_error() {
        let mut archive = toy_archive(3, 4, 5);
        archive[4].parent_id = Some(9999);
        assert_eq!(
            build_phylogeny(&archive).unwrap_err(),
            AnalyticsError::MissingParent(9999)
        );
    }

    #[test]
    fn newick_is_parseable_and_leaf_count_matches() {
        let archive = toy_archive(4, 8, 40);
        let forest = build_phylogeny(&archive).unwrap();
        let text = to_newick(&forest);
        // Minimal independent reader: leaves are labels not preceded by ')'
        // or followed by '('; count via grammar walk.
        let mut leaves = 0usize;
        let mut depth = 0i64;
        let mut prev_was_close = false;
        for token in text.split_inclusive(|c| ['(', ',', ')', ';'].contains(&c)) {
            let body = &token[..token.len() - 1];
            let delim = token.chars().last().unwrap();
            let has_label = !body.trim().is_empty();
            match delim {
                '(' => depth += 1,
                ')' => {
                    if has_label && !prev_was_close {
                        leaves += 1;
                    }
                    depth -= 1;
                    prev_was_close = true;
                    continue;
                }
                ',' | ';' if has_label && !prev_was_close => leaves += 1,
                _ => {}
            }
            prev_was_close = false;
        }
        assert_eq!(depth, 0);
        let terminal = archive
            .iter()
            .filter(|r| !archive.iter().any(|c| c.parent_id == Some(r.id)))
            .count();
        assert_eq!(leaves, terminal);
    }

    #[test]
    fn muller_columns_sum_to_one() {
        let archive = toy_archive(5, 8, 60);
        let series = muller_series(&archive, 8, 3, 12);
        assert!(!series.checkpoints.is_empty());
        for row in &series.abundance {
            assert_eq!(row.len(), series.lineage_ids.len() + 1);
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn muller_degenerate_cases() {
        // Two founders, no tournaments: each abundance 0.5.
        let archive = toy_archive(6, 2, 2);
        let series = muller_series(&archive, 2, 10, 5);
        assert_eq!(series.lineage_ids.len(), 2);
        let last = series.abundance.last().unwrap();
        assert_eq!(&last[..2], &[0.5, 0.5]);

        // Single-lineage archive: abundance 1.0 at every checkpoint.
        let mut single = toy_archive(7, 4, 20);
        for r in &mut single {
            r.lineage_id = 0;
        }
        let series = muller_series(&single, 4, 1, 6);
        for row in &series.abundance {
            assert!((row[0] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn lineage_abundances_sum_to_one() {
        let archive = toy_archive(8, 8, 60);
        let table = lineage_stats(&archive, 8, Env::Ft, &BeneficialThresholds::default());
        let total: f64 = table.iter().map(|l| l.final_abundance).sum();
        assert!((total - 1.0).abs() < 1e-9);
        // Beneficial counts are recomputable from the archive alone.
        let recount: usize = archive
            .iter()
            .filter(|r| {
                r.parent_id.is_some_and(|p| {
                    metrics::beneficial_mutation(
                        archive[p as usize].report.fitness,
                        r.report.fitness,
                        Env::Ft,
                    )
                })
            })
            .count();
        let table_total: usize = table.iter().map(|l| l.beneficial_mutation_count).sum();
        assert_eq!(recount, table_total);
    }

    #[test]
    fn baldwin_curve_flat_for_identical_curves() {
        let mut archive = toy_archive(9, 8, 40);
        let template = archive[0].curve.clone();
        let fr = archive[0].report.clone();
        for r in &mut archive {
            r.curve = template.clone();
            r.report = fr.clone();
        }
        let curve = baldwin_curve(&archive, 0.75, 40, ANALYSIS_SEED).unwrap();
        let means: Vec<f64> = curve
            .rows
            .iter()
            .filter(|r| r.n > 0)
            .map(|r| r.mean_iterations)
            .collect();
        for w in means.windows(2) {
            assert_eq!(w[0], w[1]);
        }
    }

    #[test]
    fn baldwin_curve_detects_faster_learners() {
        // Synthetic archive: generation-g curves reach the criterion at
        // iteration budget/(2+g) exactly.
        let mut archive = toy_archive(10, 8, 48);
        let gens = generation_index(&archive);
        let budget = archive[0].curve.total_iterations;
        for (i, r) in archive.iter_mut().enumerate() {
            let g = gens[i] as u64;
            let reach = budget / (2 + g);
            r.curve = crate::metrics::LearningCurve::new(
                alloc::vec![(reach, 100.0), (budget, 100.0)],
                budget,
            )
            .unwrap();
            r.report.fitness = 100.0;
        }
        let curve = baldwin_curve(&archive, 0.75, 48, ANALYSIS_SEED).unwrap();
        let means: Vec<(u32, f64)> = curve
            .rows
            .iter()
            .filter(|r| r.n > 0)
            .map(|r| (r.generation, r.mean_iterations))
            .collect();
        assert!(means.len() >= 2);
        for w in means.windows(2) {
            assert!(w[1].1 < w[0].1, "means must strictly decrease: {means:?}");
        }
    }

    #[test]
    fn baldwin_insufficient_data_flag() {
        let archive = toy_archive(11, 4, 10);
        let curve = baldwin_curve(&archive, 0.75, 100, ANALYSIS_SEED).unwrap();
        assert!(curve.insufficient_data);
    }

    #[test]
    fn descriptor_trend_mass_matches_direct_recomputation() {
        let archive = toy_archive(12, 8, 30);
        let rows = descriptor_trends(&archive, 8, 5, ANALYSIS_SEED);
        for row in &rows {
            let alive = alive_at(&archive, 8, row.birth_index);
            let direct: f64 = alive
                .iter()
                .map(|r| geometry::mass_properties(&r.morphology).total_mass)
                .sum::<f64>()
                / alive.len() as f64;
            assert!((row.mass.mean - direct).abs() < 1e-9);
            assert!(row.coverage.mean > 0.0 && row.coverage.mean <= 1.0);
        }
    }

    #[test]
    fn stable_fraction_counts() {
        let mut archive = toy_archive(13, 8, 16);
        for (i, r) in archive.iter_mut().enumerate() {
            r.report.passively_stable = i % 8 < 3;
        }
        let trend = stable_fraction_trend(&archive, 8, 1);
        assert_eq!(trend.len(), 1);
        let (_, frac) = trend[0];
        assert!((0.0..=1.0).contains(&frac));
        let alive = alive_at(&archive, 8, 15);
        let expected =
            alive.iter().filter(|r| r.report.passively_stable).count() as f64 / 8.0;
        assert_eq!(frac, expected);
    }

    #[test]
    fn top_agent_selection_contract() {
        let a = toy_archive(14, 8, 40);
        let b = toy_archive(15, 8, 40);
        let top = select_top_agents(&[(&a, 8), (&b, 8)], 3, 10);
        assert!(top.len() <= 10);
        // Sorted descending by fitness.
        for w in top.windows(2) {
            assert!(w[0].1.report.fitness >= w[1].1.report.fitness);
        }
        // Permutation invariance over input order (as a content multiset).
        let swapped = select_top_agents(&[(&b, 8), (&a, 8)], 3, 10);
        let key = |v: &[(usize, Record)]| {
            let mut k: Vec<String> = v
                .iter()
                .map(|(_, r)| alloc::format!("{}:{}", r.report.fitness, r.morphology.digest()))
                .collect();
            k.sort();
            k
        };
        assert_eq!(key(&top), key(&swapped));
        // Idempotent under repetition.
        let again = select_top_agents(&[(&a, 8), (&b, 8)], 3, 10);
        assert_eq!(key(&top), key(&again));
    }

    #[test]
    fn small_lineage_returns_fewer_than_per_lineage() {
        let archive = toy_archive(16, 2, 2);
        let top = select_top_agents(&[(&archive, 2)], 3, 10);
        // Two founders, each its own lineage with a single member.
        assert_eq!(top.len(), 2);
    }

    #[test]
    fn correlation_on_run_output() {
        let archive = toy_archive(17, 16, 80);
        let founders = founder_records(&archive);
        let criterion = metrics::percentile(
            &founders.iter().map(|r| r.report.fitness).collect::<Vec<_>>(),
            0.75,
        )
        .unwrap();
        let agents: Vec<&Record> = archive.iter().collect();
        let report = fitness_cow_correlation(&agents, criterion).unwrap();
        assert!(report.fitness_cow_r.abs() <= 1.0);
        assert!((0.0..=1.0).contains(&report.fitness_cow_p));
        assert!(report.fitness_cow_n > 0);
    }
}
