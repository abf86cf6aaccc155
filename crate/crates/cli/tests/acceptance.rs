//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured scale. Criteria cover design-space
//! conformance, mutation closure, oracle equivalence for the geometry,
//! terrain parameter conformance, reward formula spot checks, engine
//! invariants under concurrency, determinism and crash recovery, the
//! surrogate-scale learning-speed trend, analytics conservation, and the
//! default-config constants audit.

use std::path::PathBuf;
use std::process::{Command, Stdio};

use morphevo::config::RunConfig;
use morphevo::runlog::read_log;
use morphevo::runner;
use morphevo_core::evolution::{
    run_serial, EvaluatorConfig, EvolutionConfig, PopulationStore, Record, SurrogateEvaluator,
};
use morphevo_core::geometry::{self, Capsule, Vec3};
use morphevo_core::metrics;
use morphevo_core::morphology::Morphology;
use morphevo_core::mutation::{self, MutationWeights};
use morphevo_core::rng::Stream;
use morphevo_core::stats;
use morphevo_core::terrain::{self, Env, SegmentKind, TerrainSpec};

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "morphevo-acceptance-{}-{name}",
        std::process::id()
    ));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn random_parent(seed: u64) -> Morphology {
    let mut rng = Stream::derive(seed, "acceptance-parent", 0);
    mutation::sample_initial_morphology(&mut rng, mutation::INITIAL_LIMB_RANGE)
}

fn surrogate_for(cfg: &EvolutionConfig) -> SurrogateEvaluator {
    let EvaluatorConfig::Surrogate { params } = cfg.evaluator.clone();
    SurrogateEvaluator::new(params, cfg.learning_budget)
}

// ---------------------------------------------------------------------------
// Criterion 1: design-space conformance of 10,000 seeded mutations.
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_design_space_conformance() {
    // Domains restated literally so this check is independent of the
    // engine's own constant tables.
    const LENGTHS: [f64; 3] = [0.2, 0.3, 0.4];
    const DENSITIES: [u32; 6] = [500, 600, 700, 800, 900, 1000];
    const THETAS: [u16; 8] = [0, 45, 90, 135, 180, 225, 270, 315];
    const PHIS: [u16; 3] = [90, 135, 180];
    const GEARS: [u16; 4] = [150, 200, 250, 300];
    const LIMITS: [(i16, i16); 13] = [
        (-30, 0),
        (0, 30),
        (-30, 30),
        (-45, 45),
        (-45, 0),
        (0, 45),
        (-60, 0),
        (0, 60),
        (-60, 60),
        (-90, 0),
        (0, 90),
        (-60, 30),
        (-30, 60),
    ];

    let weights = MutationWeights::default();
    let mut checked = 0usize;
    let mut violations = 0usize;
    'outer: for parent_seed in 0.. {
        let mut m = random_parent(parent_seed);
        let mut rng = Stream::derive(parent_seed, "acceptance-c1", 1);
        for _ in 0..50 {
            let Ok(out) = mutation::mutate(&m, &mut rng, &weights) else {
                continue;
            };
            m = out.child;
            checked += 1;
            if m.head.radius != 0.10 || !DENSITIES.contains(&m.head.density) {
                violations += 1;
            }
            for limb in &m.limbs {
                let p = &limb.params;
                if p.radius != 0.05
                    || !LENGTHS.contains(&p.length)
                    || !DENSITIES.contains(&p.density)
                    || !THETAS.contains(&p.theta_deg)
                    || !PHIS.contains(&p.phi_deg)
                {
                    violations += 1;
                }
                for h in &limb.joint.hinges {
                    if !GEARS.contains(&h.gear) || !LIMITS.contains(&h.limit) {
                        violations += 1;
                    }
                }
            }
            if checked >= 10_000 {
                break 'outer;
            }
        }
    }
    assert!(checked >= 10_000, "only {checked} mutations produced");
    assert_eq!(violations, 0);
    eprintln!("[acceptance] criterion 1 (design-space conformance): PASS ({checked} mutations, 0 violations)");
}

// ---------------------------------------------------------------------------
// Criterion 2: mutation closure over 10,000 (parent, seed) pairs.
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_mutation_closure() {
    let weights = MutationWeights::default();
    let mut accepted = 0usize;
    let mut pairs = 0usize;
    for parent_seed in 0..1000u64 {
        let parent = random_parent(parent_seed);
        for mutation_seed in 0..10u64 {
            pairs += 1;
            let mut rng = Stream::derive(mutation_seed, "acceptance-c2", parent_seed);
            let Ok(out) = mutation::mutate(&parent, &mut rng, &weights) else {
                continue;
            };
            accepted += 1;
            let report = out.child.validate();
            assert!(
                report.is_valid(),
                "parent seed {parent_seed}, mutation seed {mutation_seed}: {report}"
            );
            let com_y = geometry::mass_properties(&out.child).com.y.abs();
            assert!(com_y <= 1e-6, "com_y = {com_y:e}");
            assert!((1..=10).contains(&out.child.limbs.len()));
            assert!(geometry::self_intersects(&out.child).is_empty());
        }
    }
    assert_eq!(pairs, 10_000);
    // Retry exhaustion is rare; the overwhelming majority must commit.
    assert!(accepted as f64 >= 0.99 * pairs as f64, "accepted {accepted}");
    eprintln!("[acceptance] criterion 2 (mutation closure): PASS ({accepted}/{pairs} accepted, all valid)");
}

// ---------------------------------------------------------------------------
// Criterion 3: geometry against brute-force oracles.
// ---------------------------------------------------------------------------

/// Two-stage dense point sampling (about 10^4 point pairs), no closed form.
fn sampled_segment_distance(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> f64 {
    let eval = |s: f64, t: f64| ((p1 + (q1 - p1) * s) - (p2 + (q2 - p2) * t)).norm();
    let n = 70;
    let mut best = f64::INFINITY;
    let mut at = (0.0, 0.0);
    for i in 0..=n {
        for j in 0..=n {
            let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
            let d = eval(s, t);
            if d < best {
                best = d;
                at = (s, t);
            }
        }
    }
    let half = 1.0 / n as f64;
    for i in 0..=n {
        for j in 0..=n {
            let s = (at.0 - half + 2.0 * half * i as f64 / n as f64).clamp(0.0, 1.0);
            let t = (at.1 - half + 2.0 * half * j as f64 / n as f64).clamp(0.0, 1.0);
            best = best.min(eval(s, t));
        }
    }
    best
}

fn naive_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let start = *pts
        .iter()
        .min_by(|a, b| (a.1, a.0).partial_cmp(&(b.1, b.0)).unwrap())
        .unwrap();
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut next = pts[0];
        for &candidate in &pts[1..] {
            if candidate == current {
                continue;
            }
            if next == current {
                next = candidate;
                continue;
            }
            let c = cross(current, next, candidate);
            let farther = {
                let d1 = (next.0 - current.0).hypot(next.1 - current.1);
                let d2 = (candidate.0 - current.0).hypot(candidate.1 - current.1);
                d2 > d1
            };
            if c < 0.0 || (c == 0.0 && farther) {
                next = candidate;
            }
        }
        if next == start {
            break;
        }
        hull.push(next);
        current = next;
        assert!(hull.len() <= pts.len() + 1);
    }
    hull
}

fn ray_cast_inside(p: (f64, f64), poly: &[(f64, f64)]) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        let within = p.0 >= a.0.min(b.0) - 1e-15
            && p.0 <= a.0.max(b.0) + 1e-15
            && p.1 >= a.1.min(b.1) - 1e-15
            && p.1 <= a.1.max(b.1) + 1e-15;
        if cross.abs() < 1e-12 && within {
            return false; // boundary counts as unstable
        }
    }
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.1 > p.1) != (b.1 > p.1) {
            let x = a.0 + (p.1 - a.1) / (b.1 - a.1) * (b.0 - a.0);
            if p.0 < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn polygon_area_abs(poly: &[(f64, f64)]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        acc += a.0 * b.1 - b.0 * a.1;
    }
    acc.abs() / 2.0
}

#[test]
fn criterion_3_geometry_oracle_equivalence() {
    // Capsule distance versus dense sampling on 1,000 random pairs.
    let mut rng = Stream::seed_from(0xc3);
    for _ in 0..1000 {
        let mut v = |scale: f64| rng.next_range(-scale, scale);
        let p1 = Vec3::new(v(0.6), v(0.6), v(0.6));
        let q1 = Vec3::new(v(0.6), v(0.6), v(0.6));
        let p2 = Vec3::new(v(0.6), v(0.6), v(0.6));
        let q2 = Vec3::new(v(0.6), v(0.6), v(0.6));
        let (ra, rb) = (rng.next_range(0.02, 0.1), rng.next_range(0.02, 0.1));
        let a = Capsule { p0: p1, p1: q1, radius: ra };
        let b = Capsule { p0: p2, p1: q2, radius: rb };
        let analytic = geometry::capsule_distance(&a, &b);
        let sampled = sampled_segment_distance(p1, q1, p2, q2) - (ra + rb);
        assert!(
            (analytic - sampled).abs() < 1e-3,
            "analytic {analytic} vs sampled {sampled}"
        );
    }

    // Passive stability versus the naive hull + ray-cast oracle on 1,000
    // random morphologies; zero disagreements allowed.
    let mut disagreements = 0usize;
    for seed in 0..1000u64 {
        let m = random_parent(seed + 50_000);
        let analytic = geometry::passive_stability(&m).stable;
        let contacts = geometry::contact_points(&m);
        let hull = naive_hull(&contacts);
        let com = geometry::mass_properties(&m).com;
        let oracle = polygon_area_abs(&hull) > 0.0 && ray_cast_inside((com.x, com.y), &hull);
        if analytic != oracle {
            disagreements += 1;
            eprintln!("seed {}: analytic {analytic}, oracle {oracle}", seed + 50_000);
        }
    }
    assert_eq!(disagreements, 0);
    eprintln!("[acceptance] criterion 3 (geometry oracle equivalence): PASS (1000 capsule pairs within 1e-3, 1000 stability cases, 0 disagreements)");
}

// ---------------------------------------------------------------------------
// Criterion 4: terrain parameter conformance over 100 seeded generations.
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_terrain_conformance() {
    for seed in 0..100u64 {
        let (segments, _) = terrain::generate_spec(&TerrainSpec::new(Env::Vt, seed));
        for seg in &segments {
            match &seg.kind {
                SegmentKind::Flat => {
                    assert!(
                        seg.length >= 1.0 - 1e-9 && seg.length <= 3.0 + 1e-9,
                        "seed {seed}: flat {}",
                        seg.length
                    );
                }
                kind => {
                    assert!(
                        seg.length >= 4.0 - 1e-9 && seg.length <= 8.0 + 1e-9,
                        "seed {seed}: obstacle {}",
                        seg.length
                    );
                    match kind {
                        SegmentKind::Hills { amplitude } => {
                            assert!((0.6..=1.2).contains(amplitude));
                        }
                        SegmentKind::Rubble { clips } => {
                            assert!(clips.iter().all(|c| (0.2..=0.3).contains(c)));
                        }
                        SegmentKind::Steps => {
                            // Exactly 8 risers of 0.2 m in the profile.
                            let step = seg.length / 8.0;
                            let mut levels = vec![0.0];
                            for i in 0..8 {
                                levels.push(seg.height_at((i as f64 + 0.5) * step));
                            }
                            levels.push(0.0);
                            let mut risers = 0;
                            for w in levels.windows(2) {
                                let dh = (w[1] - w[0]).abs();
                                if dh > 1e-9 {
                                    assert!((dh - 0.2).abs() < 1e-9, "riser {dh}");
                                    risers += 1;
                                }
                            }
                            // The final plateau is already at ground level,
                            // so the descent back to flat is inside the 8.
                            assert_eq!(risers, 8);
                        }
                        SegmentKind::Flat => unreachable!(),
                    }
                }
            }
        }
        let total: f64 = segments.iter().map(|s| s.length).sum();
        assert!((total - 100.0).abs() < 1e-9, "seed {seed}: tiling {total}");
    }
    // Flat terrain rasterizes to an identically zero field.
    let (_, hf) = terrain::generate_spec(&TerrainSpec::new(Env::Ft, 7));
    assert!(hf.heights.iter().all(|&h| h == 0.0));
    eprintln!("[acceptance] criterion 4 (terrain conformance): PASS (100 seeded generations, all ranges honored, flat field zero)");
}

// ---------------------------------------------------------------------------
// Criterion 5: reward formula spot checks, exact to 1e-12.
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_reward_spot_checks() {
    use morphevo_core::metrics::{
        beneficial_mutation, cost_of_work, reward_locomotion, reward_manipulation, StepRecord,
    };
    let loco = StepRecord {
        v_x: 2.0,
        action: vec![10.0],
        ..Default::default()
    };
    assert!((reward_locomotion(&loco) - 1.9).abs() < 1e-12);

    let manip = StepRecord {
        d_ao_delta: 0.05,
        d_og_delta: 0.02,
        ..Default::default()
    };
    assert!((reward_manipulation(&manip) - 7.0).abs() < 1e-12);

    assert!((cost_of_work(981.0, 10.0, 10.0).unwrap() - 1.0).abs() < 1e-12);

    assert!(beneficial_mutation(0.0, 300.0, Env::Ft));
    assert!(!beneficial_mutation(0.0, 299.9, Env::Ft));
    assert!(beneficial_mutation(0.0, 100.0, Env::Vt));
    assert!(!beneficial_mutation(0.0, 99.999, Env::Vt));
    assert!(beneficial_mutation(0.0, 100.0, Env::Mvt));
    eprintln!("[acceptance] criterion 5 (reward spot checks): PASS (locomotion, manipulation, cost of work, beneficial thresholds)");
}

// ---------------------------------------------------------------------------
// Criterion 6: engine invariants under concurrency, verified post hoc.
// ---------------------------------------------------------------------------

/// Shared post-hoc verifier: gap-free birth order, tournament candidates
/// drawn from the alive window at selection time, parent equal to the
/// forward-progress argmax with the younger-wins tie break, and the alive
/// window/eviction law reasserted by store reconstruction.
fn verify_engine_invariants(records: &[Record], population: usize, tournament_size: usize) {
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r.birth_index, i as u64, "birth index gap at {i}");
        assert_eq!(r.id, r.birth_index);
    }
    let founders = records.iter().take_while(|r| r.parent_id.is_none()).count();
    assert_eq!(founders, population, "founder block size");
    for r in records.iter().skip(founders) {
        assert!(r.parent_id.is_some());
        assert_eq!(r.candidates.len(), tournament_size.min(population));
        let lo = r.selected_at.saturating_sub(population as u64);
        for &c in &r.candidates {
            assert!(
                c >= lo && c < r.selected_at,
                "candidate {c} outside alive window [{lo}, {})",
                r.selected_at
            );
        }
        let best = r
            .candidates
            .iter()
            .map(|&c| &records[c as usize])
            .max_by(|a, b| {
                (a.report.forward_progress, a.birth_index)
                    .partial_cmp(&(b.report.forward_progress, b.birth_index))
                    .unwrap()
            })
            .unwrap();
        assert_eq!(
            r.parent_id,
            Some(best.id),
            "parent of {} is not the tournament argmax",
            r.id
        );
        // Lineage follows the parent.
        assert_eq!(r.lineage_id, records[r.parent_id.unwrap() as usize].lineage_id);
    }
    // Replay through the store: |alive| = P after every commit once filled,
    // and the evicted member is always the oldest alive.
    let mut store = PopulationStore::new(population);
    for (i, r) in records.iter().enumerate() {
        let evicted = store.push(r.clone());
        assert_eq!(store.alive().len(), population.min(i + 1));
        if i >= population {
            assert_eq!(evicted, Some((i - population) as u64), "eviction order");
        }
    }
}

#[test]
fn criterion_6_engine_invariants_under_concurrency() {
    let mut cfg = RunConfig::default();
    cfg.evolution.population = 64;
    cfg.evolution.tournament_size = 4;
    cfg.evolution.max_evaluations = 640;
    cfg.evolution.workers = 8;
    cfg.evolution.run_seed = 6001;
    cfg.output_dir = tmp_dir("criterion6");
    cfg.checkpoint_interval = 100;
    let evaluator = runner::build_evaluator(&cfg);
    let summary = runner::run(&cfg, &evaluator).unwrap();
    assert_eq!(summary.records, 640);
    let (log, _) = read_log(&summary.log_path).unwrap();
    verify_engine_invariants(&log.records, 64, 4);
    eprintln!("[acceptance] criterion 6 (engine invariants under concurrency): PASS (P=64, 8 workers, 640 evaluations, log-verified)");
}

// ---------------------------------------------------------------------------
// Criterion 7: determinism and fault tolerance.
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_determinism_and_fault_tolerance() {
    // (a) Three single-worker fixed-seed runs: byte-identical logs.
    let mut digests = Vec::new();
    for repeat in 0..3 {
        let mut cfg = RunConfig::default();
        cfg.evolution.population = 16;
        cfg.evolution.max_evaluations = 64;
        cfg.evolution.workers = 1;
        cfg.evolution.run_seed = 7001;
        cfg.output_dir = tmp_dir(&format!("criterion7-det-{repeat}"));
        let evaluator = runner::build_evaluator(&cfg);
        let summary = runner::run(&cfg, &evaluator).unwrap();
        digests.push(std::fs::read(&summary.log_path).unwrap());
    }
    assert_eq!(digests[0], digests[1]);
    assert_eq!(digests[1], digests[2]);

    // (b) Kill a running process at an arbitrary point and resume from its
    // checkpoint; the finished run must have the exact target record count
    // and pass the criterion-6 invariants.
    let bin = env!("CARGO_BIN_EXE_morphevo");
    let dir = tmp_dir("criterion7-kill");
    let cfg_path = dir.join("config.json");
    std::fs::write(
        &cfg_path,
        serde_json::json!({
            "population": 16,
            "max_evaluations": 120,
            "workers": 2,
            "run_seed": 7002,
            "output_dir": dir,
            "checkpoint_interval": 5
        })
        .to_string(),
    )
    .unwrap();
    let mut child = Command::new(bin)
        .args(["evolve", "--config"])
        .arg(&cfg_path)
        .env("MORPHEVO_EVAL_DELAY_MS", "15")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let log_path = dir.join("ft-s7002.log.jsonl");
    let kill_at_lines = 1 + 16 + 21; // header + founders + some tournaments
    let mut killed_mid_run = false;
    for _ in 0..4000 {
        std::thread::sleep(std::time::Duration::from_millis(5));
        if let Some(status) = child.try_wait().unwrap() {
            panic!("run finished before it could be killed: {status}");
        }
        let lines = std::fs::read_to_string(&log_path)
            .map(|t| t.lines().count())
            .unwrap_or(0);
        if lines >= kill_at_lines {
            child.kill().unwrap();
            killed_mid_run = true;
            break;
        }
    }
    child.wait().unwrap();
    assert!(killed_mid_run, "never reached the kill point");

    let ckpt_path = dir.join("ft-s7002.checkpoint.json");
    let status = Command::new(bin)
        .args(["evolve", "--resume"])
        .arg(&ckpt_path)
        .env_remove("MORPHEVO_EVAL_DELAY_MS")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert!(status.success());
    let (log, _) = read_log(&log_path).unwrap();
    assert_eq!(log.records.len(), 120, "resumed run record count");
    verify_engine_invariants(&log.records, 16, 4);
    eprintln!("[acceptance] criterion 7 (determinism and fault tolerance): PASS (3 byte-identical logs; kill/resume reached 120 records)");
}

// ---------------------------------------------------------------------------
// Criterion 8: surrogate-scale learning-speed trend.
// ---------------------------------------------------------------------------

/// Mean iterations-to-criterion over the top fitness quartile of a set;
/// individuals that never reach the criterion are excluded.
fn top_quartile_mean_baldwin(set: &[Record], criterion: f64) -> f64 {
    let mut sorted: Vec<&Record> = set.iter().collect();
    sorted.sort_by(|a, b| b.report.fitness.partial_cmp(&a.report.fitness).unwrap());
    sorted.truncate((set.len() / 4).max(1));
    let reached: Vec<f64> = sorted
        .iter()
        .filter_map(|r| {
            metrics::baldwin_iterations(&r.curve, criterion)
                .unwrap()
                .map(|it| it as f64)
        })
        .collect();
    if reached.is_empty() {
        f64::INFINITY
    } else {
        stats::mean(&reached)
    }
}

#[test]
fn criterion_8_surrogate_learning_speed_trend() {
    let mut improved = 0;
    for seed in 0..5u64 {
        let cfg = EvolutionConfig {
            population: 64,
            tournament_size: 4,
            max_evaluations: 640,
            workers: 1,
            run_seed: 8000 + seed,
            ..EvolutionConfig::default()
        };
        let evaluator = surrogate_for(&cfg);
        let archive = run_serial(&cfg, &evaluator).unwrap();
        let founders = &archive[..cfg.population];
        let founder_fitness: Vec<f64> = founders.iter().map(|r| r.report.fitness).collect();
        let criterion = metrics::percentile(&founder_fitness, 0.75).unwrap();

        let founder_mean = top_quartile_mean_baldwin(founders, criterion);
        let final_alive = &archive[archive.len() - cfg.population..];
        let final_mean = top_quartile_mean_baldwin(final_alive, criterion);
        eprintln!(
            "[acceptance]   seed {seed}: founder mean {founder_mean:.0} vs final mean {final_mean:.0}"
        );
        if final_mean < founder_mean {
            improved += 1;
        }
    }
    assert!(improved >= 4, "learning-speed trend held in only {improved}/5 seeds");
    eprintln!("[acceptance] criterion 8 (surrogate learning-speed trend): PASS ({improved}/5 seeds improved)");
}

// ---------------------------------------------------------------------------
// Criterion 9: analytics conservation and the exact correlation fixture.
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_analytics_conservation() {
    use morphevo_core::analytics;
    let cfg = EvolutionConfig {
        population: 16,
        max_evaluations: 200,
        workers: 1,
        run_seed: 9001,
        ..EvolutionConfig::default()
    };
    let evaluator = surrogate_for(&cfg);
    let archive = run_serial(&cfg, &evaluator).unwrap();

    // Muller abundance columns sum to 1 at every checkpoint.
    let series = analytics::muller_series(&archive, cfg.population, 10, 25);
    assert!(!series.checkpoints.is_empty());
    for row in &series.abundance {
        let sum: f64 = row.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9, "column sum {sum}");
    }

    // Phylogeny subtree sizes sum to the archive size.
    let forest = analytics::build_phylogeny(&archive).unwrap();
    let total: usize = forest.iter().map(|t| t.descendant_count + 1).sum();
    assert_eq!(total, archive.len());

    // Pearson r is exactly -1 on a linear fixture.
    let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| -2.0 * x).collect();
    let (r, _) = stats::pearson(&xs, &ys).unwrap();
    assert_eq!(r, -1.0);
    eprintln!("[acceptance] criterion 9 (analytics conservation): PASS (abundance sums, subtree conservation, exact r = -1)");
}

// ---------------------------------------------------------------------------
// Criterion 10: default-config constants audit via the CLI.
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_default_config_constants() {
    let bin = env!("CARGO_BIN_EXE_morphevo");
    let output = Command::new(bin).arg("print-default-config").output().unwrap();
    assert!(output.status.success());
    let cfg: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(cfg["population"], 576);
    assert_eq!(cfg["tournament_size"], 4);
    assert_eq!(cfg["learning_budget"], 5_000_000u64);
    assert_eq!(cfg["fitness_window"], 100_000u64);
    assert_eq!(cfg["max_evaluations"], 4000);
    assert_eq!(cfg["arena_sizes"]["ft"], serde_json::json!([150.0, 150.0]));
    assert_eq!(cfg["arena_sizes"]["vt"], serde_json::json!([100.0, 100.0]));
    assert_eq!(cfg["arena_sizes"]["mvt"], serde_json::json!([60.0, 40.0]));
    assert_eq!(cfg["beneficial_thresholds"]["ft"], 300.0);
    assert_eq!(cfg["beneficial_thresholds"]["vt"], 100.0);
    assert_eq!(cfg["beneficial_thresholds"]["mvt"], 100.0);
    eprintln!("[acceptance] criterion 10 (default-config constants audit): PASS (P, T, budget, window, arenas, thresholds)");
}
