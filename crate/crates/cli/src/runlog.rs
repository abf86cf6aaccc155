//! Append-only run log: a JSON header line followed by one JSON record per
//! line. Line framing makes the log greppable, streamable, and tolerant of
//! a torn final line after a crash.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use morphevo_core::evolution::Record;
use morphevo_core::terrain::Env;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT_NAME: &str = "morphevo-runlog";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub format: String,
    pub version: u32,
    pub engine_version: String,
    pub config_digest: String,
    pub run_seed: u64,
    pub env: Env,
    /// Alive population size; analytics rebuild alive windows from it.
    pub population: usize,
}

impl LogHeader {
    pub fn new(config_digest: String, run_seed: u64, env: Env, population: usize) -> Self {
        LogHeader {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest,
            run_seed,
            env,
            population,
        }
    }

    pub fn run_id(&self) -> String {
        format!("{}-s{}", self.env, self.run_seed)
    }
}

/// A fully parsed run log.
#[derive(Debug, Clone)]
pub struct RunLog {
    pub header: LogHeader,
    pub records: Vec<Record>,
}

/// Reads a log, tolerating exactly one torn trailing line (crash mid-write);
/// any malformed line before the end is an inconsistency error. Returns the
/// byte length of the well-formed prefix so writers can truncate torn tails.
pub fn read_log(path: &Path) -> Result<(RunLog, u64), CliError> {
    let file = File::open(path).map_err(|e| CliError::Log(format!("{}: {e}", path.display())))?;
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    let mut good_bytes = 0u64;

    let n = reader
        .read_line(&mut line)
        .map_err(|e| CliError::Log(e.to_string()))?;
    if n == 0 {
        return Err(CliError::Log(format!("{}: empty log", path.display())));
    }
    let header: LogHeader = serde_json::from_str(line.trim_end())
        .map_err(|e| CliError::Log(format!("bad header: {e}")))?;
    if header.format != FORMAT_NAME {
        return Err(CliError::Log(format!("unknown format {:?}", header.format)));
    }
    good_bytes += n as u64;

    let mut records: Vec<Record> = Vec::new();
    loop {
        line.clear();
        let n = reader
            .read_line(&mut line)
            .map_err(|e| CliError::Log(e.to_string()))?;
        if n == 0 {
            break;
        }
        let complete = line.ends_with('\n');
        match serde_json::from_str::<Record>(line.trim_end()) {
            Ok(record) => {
                // Records must arrive in birth order with no gaps.
                if record.birth_index != records.len() as u64 {
                    return Err(CliError::Log(format!(
                        "record out of order: expected birth index {}, found {}",
                        records.len(),
                        record.birth_index
                    )));
                }
                records.push(record);
                good_bytes += n as u64;
            }
            Err(e) if !complete => {
                // Torn tail from a crash; recoverable.
                let _ = e;
                break;
            }
            Err(e) => {
                return Err(CliError::Log(format!(
                    "corrupt record at line {}: {e}",
                    records.len() + 2
                )));
            }
        }
    }
    Ok((RunLog { header, records }, good_bytes))
}

/// Serialized log writer; the runner holds it behind the store commit lock
/// so records land in birth order.
pub struct LogWriter {
    writer: BufWriter<File>,
    path: PathBuf,
    flush_every_record: bool,
}

impl LogWriter {
    /// Creates a fresh log with its header line.
    pub fn create(path: &Path, header: &LogHeader, flush_every_record: bool) -> Result<Self, CliError> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let file = File::create(path)?;
        let mut w = LogWriter {
            writer: BufWriter::new(file),
            path: path.to_path_buf(),
            flush_every_record,
        };
        let line = serde_json::to_string(header).expect("header serializes");
        w.writer.write_all(line.as_bytes())?;
        w.writer.write_all(b"\n")?;
        w.writer.flush()?;
        Ok(w)
    }

    /// Opens an existing log for appending, first truncating any torn
    /// trailing bytes past `good_bytes`.
    pub fn append(path: &Path, good_bytes: u64, flush_every_record: bool) -> Result<Self, CliError> {
        let file = OpenOptions::new().write(true).open(path)?;
        file.set_len(good_bytes)?;
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(LogWriter {
            writer: BufWriter::new(file),
            path: path.to_path_buf(),
            flush_every_record,
        })
    }

    pub fn write_record(&mut self, record: &Record) -> Result<(), CliError> {
        let line = serde_json::to_string(record).expect("record serializes");
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        if self.flush_every_record {
            self.writer.flush()?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), CliError> {
        self.writer.flush()?;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use morphevo_core::evolution::{
        run_serial, EvaluatorConfig, EvolutionConfig, SurrogateEvaluator,
    };

    fn tmp(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "morphevo-test-{}-{}",
            std::process::id(),
            name
        ));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join("run.log.jsonl")
    }

    fn toy_records(n: usize) -> Vec<Record> {
        let cfg = EvolutionConfig {
            population: 4,
            max_evaluations: n,
            run_seed: 5,
            ..EvolutionConfig::default()
        };
        let EvaluatorConfig::Surrogate { params } = cfg.evaluator.clone();
        run_serial(&cfg, &SurrogateEvaluator::new(params, cfg.learning_budget)).unwrap()
    }

    #[test]
    fn round_trip_reproduces_every_field() {
        let path = tmp("roundtrip");
        let header = LogHeader::new("abc123".into(), 5, Env::Ft, 4);
        let records = toy_records(10);
        {
            let mut w = LogWriter::create(&path, &header, true).unwrap();
            for r in &records {
                w.write_record(r).unwrap();
            }
        }
        let (log, _) = read_log(&path).unwrap();
        assert_eq!(log.header, header);
        assert_eq!(log.records, records);
    }

    #[test]
    fn torn_tail_parses_up_to_boundary() {
        let path = tmp("torn");
        let header = LogHeader::new("abc123".into(), 5, Env::Ft, 4);
        let records = toy_records(6);
        {
            let mut w = LogWriter::create(&path, &header, true).unwrap();
            for r in &records {
                w.write_record(r).unwrap();
            }
        }
        // Chop the file mid-way through the final record.
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 17]).unwrap();
        let (log, good) = read_log(&path).unwrap();
        assert_eq!(log.records.len(), 5);
        // Appending after truncation continues cleanly.
        {
            let mut w = LogWriter::append(&path, good, true).unwrap();
            w.write_record(&records[5]).unwrap();
        }
        let (log, _) = read_log(&path).unwrap();
        assert_eq!(log.records, records);
    }

    #[test]
    fn corrupt_interior_line_is_an_error() {
        let path = tmp("corrupt");
        let header = LogHeader::new("abc123".into(), 5, Env::Ft, 4);
        let records = toy_records(4);
        {
            let mut w = LogWriter::create(&path, &header, true).unwrap();
            for r in &records {
                w.write_record(r).unwrap();
            }
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines[2] = "{not json";
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();
        assert!(read_log(&path).is_err());
    }
}
