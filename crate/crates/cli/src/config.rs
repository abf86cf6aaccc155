//! Run configuration: the engine config plus IO policy, in its on-disk
//! JSON form. Defaults carry the reference-scale constants so
//! `print-default-config` doubles as a constants audit.

use std::path::{Path, PathBuf};

use morphevo_core::evolution::EvolutionConfig;
use morphevo_core::terrain::{self, Env};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Arena footprints per environment, emitted for audit and overridable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArenaSizes {
    pub ft: (f64, f64),
    pub vt: (f64, f64),
    pub mvt: (f64, f64),
}

impl Default for ArenaSizes {
    fn default() -> Self {
        ArenaSizes {
            ft: Env::Ft.arena(),
            vt: Env::Vt.arena(),
            mvt: Env::Mvt.arena(),
        }
    }
}

impl ArenaSizes {
    pub fn get(&self, env: Env) -> (f64, f64) {
        match env {
            Env::Ft => self.ft,
            Env::Vt => self.vt,
            Env::Mvt => self.mvt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(flatten)]
    pub evolution: EvolutionConfig,
    pub arena_sizes: ArenaSizes,
    pub terrain_resolution: f64,
    pub output_dir: PathBuf,
    /// Checkpoint every N committed evaluations.
    pub checkpoint_interval: usize,
    /// Flush the log after every record (crash-tolerant) or leave flushing
    /// to the OS.
    pub flush_every_record: bool,
    /// Capture per-evaluation wall time in log records. Off by default:
    /// deterministic runs must not embed clock readings.
    pub record_timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            evolution: EvolutionConfig::default(),
            arena_sizes: ArenaSizes::default(),
            terrain_resolution: terrain::DEFAULT_RESOLUTION,
            output_dir: PathBuf::from("runs"),
            checkpoint_interval: 25,
            flush_every_record: true,
            record_timings: false,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| {
            // Flattened sections defeat serde's path tracking, so locate the
            // offending field by probing keys against the defaults.
            match Self::locate_bad_field(&text) {
                Some(field) => CliError::Config(format!(
                    "{}: field `{field}`: {e}",
                    path.display()
                )),
                None => CliError::Config(format!("{}: {e}", path.display())),
            }
        })
    }

    fn locate_bad_field(text: &str) -> Option<String> {
        let value: serde_json::Value = serde_json::from_str(text).ok()?;
        let object = value.as_object()?;
        for (key, val) in object {
            let mut probe = serde_json::to_value(RunConfig::default()).expect("default serializes");
            probe[key] = val.clone();
            if serde_json::from_value::<RunConfig>(probe).is_err() {
                return Some(key.clone());
            }
        }
        None
    }

    /// Structural sanity: population at least one, tournaments no larger
    /// than the population.
    pub fn check(&self) -> Result<(), CliError> {
        let evo = &self.evolution;
        if evo.population == 0 {
            return Err(CliError::Config("population must be at least 1".into()));
        }
        if evo.tournament_size == 0 || evo.tournament_size > evo.population {
            return Err(CliError::Config(format!(
                "tournament_size {} must be in [1, population {}]",
                evo.tournament_size, evo.population
            )));
        }
        if evo.max_evaluations < evo.population {
            return Err(CliError::Config(format!(
                "max_evaluations {} cannot be below the founder population {}",
                evo.max_evaluations, evo.population
            )));
        }
        Ok(())
    }

    /// Environment variable overrides, applied between the file and any
    /// command-line flags.
    pub fn apply_env_overrides(&mut self) -> Result<(), CliError> {
        if let Ok(dir) = std::env::var("MORPHEVO_OUT_DIR") {
            if !dir.is_empty() {
                self.output_dir = PathBuf::from(dir);
            }
        }
        if let Ok(workers) = std::env::var("MORPHEVO_WORKERS") {
            if !workers.is_empty() {
                self.evolution.workers = workers
                    .parse()
                    .map_err(|_| CliError::Config(format!("MORPHEVO_WORKERS={workers}")))?;
            }
        }
        Ok(())
    }

    /// Digest over the experiment-defining fields (engine config, arenas,
    /// terrain resolution). IO policy fields such as the output directory
    /// stay out: relocating a run's files must not invalidate its
    /// checkpoints, and a reproduced run's log header must not depend on
    /// where it was written.
    pub fn digest(&self) -> String {
        #[derive(Serialize)]
        struct ExperimentKey<'a> {
            evolution: &'a EvolutionConfig,
            arena_sizes: &'a ArenaSizes,
            terrain_resolution: f64,
        }
        let key = ExperimentKey {
            evolution: &self.evolution,
            arena_sizes: &self.arena_sizes,
            terrain_resolution: self.terrain_resolution,
        };
        let json = serde_json::to_string(&key).expect("config serializes");
        morphevo_core::digest::hex_digest(json.as_bytes())
    }

    /// Stable identifier used in output file names.
    pub fn run_id(&self) -> String {
        format!("{}-s{}", self.evolution.env, self.evolution.run_seed)
    }

    pub fn log_path(&self) -> PathBuf {
        self.output_dir.join(format!("{}.log.jsonl", self.run_id()))
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.output_dir
            .join(format!("{}.checkpoint.json", self.run_id()))
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_carry_reference_constants() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.evolution.population, 576);
        assert_eq!(cfg.evolution.tournament_size, 4);
        assert_eq!(cfg.evolution.max_evaluations, 4000);
        assert_eq!(cfg.evolution.learning_budget, 5_000_000);
        assert_eq!(cfg.evolution.fitness_window, 100_000);
        assert_eq!(cfg.arena_sizes.ft, (150.0, 150.0));
        assert_eq!(cfg.arena_sizes.vt, (100.0, 100.0));
        assert_eq!(cfg.arena_sizes.mvt, (60.0, 40.0));
        assert_eq!(cfg.evolution.beneficial_thresholds.ft, 300.0);
        assert_eq!(cfg.evolution.beneficial_thresholds.vt, 100.0);
        assert_eq!(cfg.evolution.beneficial_thresholds.mvt, 100.0);
    }

    #[test]
    fn round_trip_and_digest() {
        let cfg = RunConfig::default();
        let text = cfg.to_pretty_json();
        let parsed: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, cfg);
        assert_eq!(parsed.digest(), cfg.digest());
        let mut other = cfg.clone();
        other.evolution.run_seed = 99;
        assert_ne!(other.digest(), cfg.digest());
    }

    #[test]
    fn partial_config_files_fill_defaults() {
        let parsed: RunConfig =
            serde_json::from_str(r#"{"population": 8, "max_evaluations": 40}"#).unwrap();
        assert_eq!(parsed.evolution.population, 8);
        assert_eq!(parsed.evolution.max_evaluations, 40);
        assert_eq!(parsed.evolution.tournament_size, 4);
    }
}
