//! Reward formulas, the early-termination rule, and fitness/efficiency
//! metrics computed over externally supplied step and curve data.
//!
//! Everything here is a pure function; trajectory quantities (velocities,
//! geodesic deltas, explored-cell counts) are produced by whatever
//! evaluator runs the body and handed in through [`StepRecord`].

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::terrain::Env;

/// Forward-progress weight in the locomotion reward.
pub const W_X: f64 = 1.0;
/// Actuation penalty weight, shared by every reward.
pub const W_C: f64 = 0.001;
/// Agent-to-object and object-to-goal weights in the manipulation reward.
pub const W_AO: f64 = 100.0;
pub const W_OG: f64 = 100.0;
/// Agent-to-goal weight in the patrol/point-navigation reward.
pub const W_AG: f64 = 100.0;
/// Exploration weight per newly visited cell.
pub const W_E: f64 = 1.0;
/// Escape weight per meter of geodesic gain.
pub const W_D: f64 = 1.0;
/// Sparse bonus for proximity events.
pub const SPARSE_BONUS: f64 = 10.0;
/// Radius (m) that triggers the manipulation proximity bonuses.
pub const PROXIMITY_RADIUS: f64 = 0.75;
/// Radius (m) that flips the patrol goal.
pub const GOAL_RADIUS: f64 = 0.5;
/// Standard gravity for the cost-of-work normalization.
pub const GRAVITY: f64 = 9.81;
/// Nominal lifetime learning budget (agent-environment interactions).
pub const LEARNING_BUDGET: u64 = 5_000_000;
/// Fitness averaging window: the final iterations of lifetime learning.
pub const FITNESS_WINDOW: u64 = 100_000;

/// Proximity events newly triggered at this step; each manipulation bonus
/// fires once per episode (see [`ProximityLatch`]).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProximityEvents {
    pub agent_reached_object: bool,
    pub object_reached_goal: bool,
    /// Patrol/point-navigation goal visit; flips the goal, may repeat.
    pub goal_reached: bool,
}

/// Per-step trajectory record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Velocity component along +x (m/s).
    pub v_x: f64,
    /// Actuator inputs, sized to the body's DoF.
    pub action: Vec<f64>,
    /// Absolute sum of joint torques this step (N*m).
    pub torque_abs_sum: f64,
    /// Decrease in agent-to-object geodesic distance (m).
    pub d_ao_delta: f64,
    /// Decrease in object-to-goal geodesic distance (m).
    pub d_og_delta: f64,
    /// Decrease in agent-to-goal geodesic distance (m).
    pub d_ag_delta: f64,
    /// Increase in agent-to-start geodesic distance (m).
    pub d_as_delta: f64,
    /// Newly explored grid cells.
    pub explored_delta: u32,
    /// Current head height (m).
    pub head_height: f64,
    pub events: ProximityEvents,
}

impl StepRecord {
    /// Squared actuation norm.
    pub fn action_sq(&self) -> f64 {
        self.action.iter().map(|a| a * a).sum()
    }
}

/// Locomotion reward (flat and variable terrain): forward progress minus a
/// weak torque penalty.
pub fn reward_locomotion(s: &StepRecord) -> f64 {
    W_X * s.v_x - W_C * s.action_sq()
}

/// Manipulation reward: geodesic progress of agent-to-object and
/// object-to-goal, the torque penalty, and once-per-episode sparse bonuses.
pub fn reward_manipulation(s: &StepRecord) -> f64 {
    let mut r = W_AO * s.d_ao_delta + W_OG * s.d_og_delta - W_C * s.action_sq();
    if s.events.agent_reached_object {
        r += SPARSE_BONUS;
    }
    if s.events.object_reached_goal {
        r += SPARSE_BONUS;
    }
    r
}

/// Test tasks with their own reward shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Patrol,
    PointNav,
    Exploration,
    Escape,
}

/// Per-task test rewards. Point navigation shares the patrol shape.
pub fn reward_task(s: &StepRecord, task: Task) -> f64 {
    match task {
        Task::Patrol | Task::PointNav => {
            let mut r = W_AG * s.d_ag_delta - W_C * s.action_sq();
            if s.events.goal_reached {
                r += SPARSE_BONUS;
            }
            r
        }
        Task::Exploration => W_E * s.explored_delta as f64 - W_C * s.action_sq(),
        Task::Escape => W_D * s.d_as_delta - W_C * s.action_sq(),
    }
}

/// Latches the two manipulation proximity bonuses so each fires once per
/// episode.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProximityLatch {
    agent_object_fired: bool,
    object_goal_fired: bool,
}

impl ProximityLatch {
    pub fn update(&mut self, d_agent_object: f64, d_object_goal: f64) -> ProximityEvents {
        let mut ev = ProximityEvents::default();
        if !self.agent_object_fired && d_agent_object <= PROXIMITY_RADIUS {
            self.agent_object_fired = true;
            ev.agent_reached_object = true;
        }
        if !self.object_goal_fired && d_object_goal <= PROXIMITY_RADIUS {
            self.object_goal_fired = true;
            ev.object_reached_goal = true;
        }
        ev
    }
}

/// Episode ends when the head drops strictly below half its initial height.
pub fn early_termination(head_height: f64, initial_head_height: f64) -> bool {
    head_height < 0.5 * initial_head_height
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricsError {
    EmptyCurve,
    NonPositiveReward,
    EmptyValues,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::EmptyCurve => write!(f, "learning curve has no samples"),
            MetricsError::NonPositiveReward => {
                write!(f, "cost of work undefined for non-positive reward")
            }
            MetricsError::EmptyValues => write!(f, "empty value list"),
        }
    }
}

impl core::error::Error for MetricsError {}

/// Cost of work: energy per unit mass per unit reward, dimensionless.
pub fn cost_of_work(energy: f64, mass: f64, reward: f64) -> Result<f64, MetricsError> {
    debug_assert!(mass > 0.0);
    if reward <= 0.0 {
        return Err(MetricsError::NonPositiveReward);
    }
    Ok(energy / (mass * GRAVITY * reward))
}

/// Sampled lifetime learning curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    /// (iteration, mean reward) pairs with strictly increasing iterations.
    pub samples: Vec<(u64, f64)>,
    pub total_iterations: u64,
}

impl LearningCurve {
    pub fn new(samples: Vec<(u64, f64)>, total_iterations: u64) -> Result<Self, MetricsError> {
        if samples.is_empty() {
            return Err(MetricsError::EmptyCurve);
        }
        debug_assert!(samples.windows(2).all(|w| w[0].0 < w[1].0));
        Ok(LearningCurve {
            samples,
            total_iterations,
        })
    }

    pub fn final_value(&self) -> f64 {
        self.samples.last().map(|&(_, v)| v).unwrap_or(0.0)
    }
}

/// Mean of the samples inside the final `window` iterations; if no sample
/// lands in the window, the mean of all samples.
pub fn windowed_mean(
    samples: &[(u64, f64)],
    total_iterations: u64,
    window: u64,
) -> Result<f64, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptyCurve);
    }
    let cutoff = total_iterations.saturating_sub(window);
    let tail: Vec<f64> = samples
        .iter()
        .filter(|&&(it, _)| it > cutoff)
        .map(|&(_, v)| v)
        .collect();
    let chosen = if tail.is_empty() {
        samples.iter().map(|&(_, v)| v).collect()
    } else {
        tail
    };
    Ok(chosen.iter().sum::<f64>() / chosen.len() as f64)
}

/// Fitness as the mean reward over the final window of lifetime learning.
pub fn fitness_from_curve(curve: &LearningCurve, window: u64) -> Result<f64, MetricsError> {
    windowed_mean(&curve.samples, curve.total_iterations, window)
}

/// Per-environment beneficial-mutation thresholds on the child-parent
/// fitness increase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeneficialThresholds {
    pub ft: f64,
    pub vt: f64,
    pub mvt: f64,
}

impl Default for BeneficialThresholds {
    fn default() -> Self {
        BeneficialThresholds {
            ft: 300.0,
            vt: 100.0,
            mvt: 100.0,
        }
    }
}

impl BeneficialThresholds {
    pub fn get(&self, env: Env) -> f64 {
        match env {
            Env::Ft => self.ft,
            Env::Vt => self.vt,
            Env::Mvt => self.mvt,
        }
    }
}

/// A mutation counts as beneficial when the fitness increase reaches the
/// environment threshold.
pub fn beneficial_mutation(parent_fitness: f64, child_fitness: f64, env: Env) -> bool {
    beneficial_mutation_with(parent_fitness, child_fitness, BeneficialThresholds::default().get(env))
}

pub fn beneficial_mutation_with(parent_fitness: f64, child_fitness: f64, threshold: f64) -> bool {
    child_fitness - parent_fitness >= threshold
}

/// Iterations to reach a criterion reward: the first sampled iteration at
/// or above it, `None` when the curve never reaches it.
pub fn baldwin_iterations(
    curve: &LearningCurve,
    criterion: f64,
) -> Result<Option<u64>, MetricsError> {
    if curve.samples.is_empty() {
        return Err(MetricsError::EmptyCurve);
    }
    Ok(curve
        .samples
        .iter()
        .find(|&&(_, v)| v >= criterion)
        .map(|&(it, _)| it))
}

/// Nearest-rank percentile: the ceil(p*n)-th order statistic.
pub fn percentile(values: &[f64], p: f64) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyValues);
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = sorted.len();
    let rank = libm::ceil(p * n as f64) as usize;
    Ok(sorted[rank.clamp(1, n) - 1])
}

/// Per-individual evaluation summary stored in run logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    /// Mean full reward over the final window.
    pub fitness: f64,
    /// Mean of the forward-progress-only channel over the same window; the
    /// quantity tournaments compare.
    pub forward_progress: f64,
    /// Lifetime energy: absolute sum of joint torques.
    pub energy: f64,
    /// Cost of work; absent when fitness is non-positive.
    pub cow: Option<f64>,
    pub passively_stable: bool,
    /// Reported by dynamics-capable evaluators only.
    pub dynamically_stable: Option<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn step() -> StepRecord {
        StepRecord::default()
    }

    #[test]
    fn locomotion_reward_examples() {
        assert_eq!(reward_locomotion(&step()), 0.0);
        let s = StepRecord {
            v_x: 2.0,
            action: vec![10.0],
            ..step()
        };
        assert!((reward_locomotion(&s) - 1.9).abs() < 1e-12);
        let s = StepRecord {
            action: vec![10.0, 30.0],
            ..step()
        };
        // Pure torque penalty on ||a||^2 = 1000.
        assert!((reward_locomotion(&s) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn manipulation_reward_examples() {
        assert_eq!(reward_manipulation(&step()), 0.0);
        let s = StepRecord {
            d_ao_delta: 0.05,
            d_og_delta: 0.02,
            ..step()
        };
        assert!((reward_manipulation(&s) - 7.0).abs() < 1e-12);
        let s = StepRecord {
            events: ProximityEvents {
                agent_reached_object: true,
                object_reached_goal: false,
                goal_reached: false,
            },
            ..step()
        };
        assert!((reward_manipulation(&s) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn proximity_latch_fires_once() {
        let mut latch = ProximityLatch::default();
        let first = latch.update(0.5, 5.0);
        assert!(first.agent_reached_object);
        assert!(!first.object_reached_goal);
        // Staying inside the radius adds nothing.
        let second = latch.update(0.4, 5.0);
        assert_eq!(second, ProximityEvents::default());
        let third = latch.update(0.4, 0.7);
        assert!(third.object_reached_goal);
    }

    #[test]
    fn task_reward_examples() {
        let s = StepRecord {
            explored_delta: 1,
            ..step()
        };
        assert!((reward_task(&s, Task::Exploration) - 1.0).abs() < 1e-12);

        let s = StepRecord {
            d_ag_delta: 0.03,
            events: ProximityEvents {
                goal_reached: true,
                ..Default::default()
            },
            ..step()
        };
        assert!((reward_task(&s, Task::Patrol) - 13.0).abs() < 1e-12);
        // Point navigation shares the patrol shape.
        assert_eq!(reward_task(&s, Task::PointNav), reward_task(&s, Task::Patrol));

        let s = StepRecord {
            action: vec![1.0],
            ..step()
        };
        assert!(reward_task(&s, Task::Escape) <= 0.0);
    }

    #[test]
    fn early_termination_boundaries() {
        assert!(early_termination(0.49, 1.0));
        assert!(!early_termination(0.50, 1.0));
        assert!(!early_termination(1.0, 1.0));
    }

    #[test]
    fn cost_of_work_examples() {
        assert_eq!(cost_of_work(0.0, 10.0, 5.0).unwrap(), 0.0);
        let cow = cost_of_work(981.0, 10.0, 10.0).unwrap();
        assert!((cow - 1.0).abs() < 1e-12);
        // Doubling reward halves the cost.
        let half = cost_of_work(981.0, 10.0, 20.0).unwrap();
        assert!((half - 0.5).abs() < 1e-12);
        assert_eq!(
            cost_of_work(1.0, 10.0, 0.0).unwrap_err(),
            MetricsError::NonPositiveReward
        );
        // Scale checks.
        let base = cost_of_work(100.0, 5.0, 2.0).unwrap();
        assert!((cost_of_work(300.0, 5.0, 2.0).unwrap() - 3.0 * base).abs() < 1e-12);
        assert!((cost_of_work(100.0, 10.0, 2.0).unwrap() - base / 2.0).abs() < 1e-12);
    }

    #[test]
    fn fitness_window_selects_tail_samples() {
        let curve = LearningCurve::new(
            vec![(4_900_000, 10.0), (4_950_000, 20.0), (5_000_000, 30.0)],
            5_000_000,
        )
        .unwrap();
        assert_eq!(fitness_from_curve(&curve, FITNESS_WINDOW).unwrap(), 25.0);

        let constant = LearningCurve::new(vec![(1, 5.0), (2, 5.0)], 2).unwrap();
        assert_eq!(fitness_from_curve(&constant, FITNESS_WINDOW).unwrap(), 5.0);

        let single = LearningCurve::new(vec![(100, 7.5)], 5_000_000).unwrap();
        assert_eq!(fitness_from_curve(&single, FITNESS_WINDOW).unwrap(), 7.5);
    }

    #[test]
    fn window_mean_ignores_out_of_window_order() {
        // Permuting values inside the window leaves the mean unchanged.
        let a = windowed_mean(&[(4_950_000, 20.0), (5_000_000, 30.0)], 5_000_000, 100_000)
            .unwrap();
        let b = windowed_mean(&[(4_950_000, 30.0), (5_000_000, 20.0)], 5_000_000, 100_000)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn beneficial_mutation_thresholds() {
        assert!(beneficial_mutation(100.0, 400.0, Env::Ft));
        assert!(!beneficial_mutation(100.0, 399.9, Env::Ft));
        assert!(beneficial_mutation(100.0, 250.0, Env::Vt));
        assert!(beneficial_mutation(0.0, 100.0, Env::Mvt));
        assert!(!beneficial_mutation(0.0, 99.9, Env::Mvt));
    }

    #[test]
    fn baldwin_iteration_scan() {
        let curve = LearningCurve::new(
            vec![(100, 1.0), (200, 2.0), (300, 5.0), (400, 9.0)],
            400,
        )
        .unwrap();
        assert_eq!(baldwin_iterations(&curve, 4.0).unwrap(), Some(300));
        assert_eq!(baldwin_iterations(&curve, 0.5).unwrap(), Some(100));
        assert_eq!(baldwin_iterations(&curve, 100.0).unwrap(), None);
        // Monotone: raising the criterion never lowers the iteration.
        let mut prev = 0;
        for crit in [0.5, 1.5, 3.0, 6.0] {
            let it = baldwin_iterations(&curve, crit).unwrap().unwrap();
            assert!(it >= prev);
            prev = it;
        }
    }

    #[test]
    fn nearest_rank_percentile() {
        assert_eq!(percentile(&[1.0, 2.0, 3.0, 4.0], 0.75).unwrap(), 3.0);
        assert_eq!(percentile(&[42.0], 0.1).unwrap(), 42.0);
        assert_eq!(percentile(&[42.0], 0.99).unwrap(), 42.0);
        assert_eq!(percentile(&[5.0, 1.0, 9.0], 1.0).unwrap(), 9.0);
        assert_eq!(percentile(&[5.0, 1.0, 9.0], 0.0).unwrap(), 1.0);
        assert_eq!(percentile(&[], 0.5).unwrap_err(), MetricsError::EmptyValues);
    }

    #[test]
    fn zero_input_step_rewards_are_nonpositive() {
        let s = step();
        assert!(reward_locomotion(&s) <= 0.0);
        assert!(reward_manipulation(&s) <= 0.0);
        for task in [Task::Patrol, Task::PointNav, Task::Exploration, Task::Escape] {
            assert!(reward_task(&s, task) <= 0.0);
        }
    }
}
