//! File emitters: RFC 4180 CSV tables, Newick and nested-JSON phylogenies,
//! and heightfield grids. File names derive from the run id plus the
//! operation name.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use morphevo_core::analytics::{
    BaldwinCurve, CorrelationReport, DescriptorTrendRow, LineageStats, MullerSeries,
    PhylogenyNode,
};
use morphevo_core::evolution::Record;
use morphevo_core::geometry;
use morphevo_core::terrain::{Heightfield, ObstacleSegment};

use crate::error::CliError;

/// RFC 4180 quoting: fields containing commas, quotes, or line breaks are
/// quoted with internal quotes doubled.
pub fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

pub fn write_csv(
    path: &Path,
    header: &[String],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    let escape_row =
        |row: &[String]| row.iter().map(|f| csv_escape(f)).collect::<Vec<_>>().join(",");
    writeln!(w, "{}", escape_row(header))?;
    for row in rows {
        writeln!(w, "{}", escape_row(&row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn out_path(dir: &Path, run_id: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{run_id}-{suffix}"))
}

/// Abundance table: one row per checkpoint, one column per tracked lineage
/// plus the aggregated remainder.
pub fn write_muller(
    dir: &Path,
    run_id: &str,
    series: &MullerSeries,
) -> Result<Vec<PathBuf>, CliError> {
    let abundance_path = out_path(dir, run_id, "muller-abundance.csv");
    let mut header = vec!["birth_index".to_string()];
    header.extend(series.lineage_ids.iter().map(|id| format!("lineage_{id}")));
    header.push("other".to_string());
    write_csv(
        &abundance_path,
        &header,
        series.checkpoints.iter().zip(&series.abundance).map(|(t, row)| {
            let mut out = vec![t.to_string()];
            out.extend(row.iter().map(|v| fmt_f64(*v)));
            out
        }),
    )?;

    let fitness_path = out_path(dir, run_id, "muller-fitness.csv");
    let mut header = vec!["birth_index".to_string()];
    header.extend(series.lineage_ids.iter().map(|id| format!("lineage_{id}")));
    write_csv(
        &fitness_path,
        &header,
        series
            .checkpoints
            .iter()
            .zip(&series.mean_fitness)
            .map(|(t, row)| {
                let mut out = vec![t.to_string()];
                out.extend(row.iter().map(|v| fmt_f64(*v)));
                out
            }),
    )?;
    Ok(vec![abundance_path, fitness_path])
}

pub fn write_phylogeny(
    dir: &Path,
    run_id: &str,
    forest: &[PhylogenyNode],
) -> Result<Vec<PathBuf>, CliError> {
    let newick_path = out_path(dir, run_id, "tree.nwk");
    std::fs::create_dir_all(dir)?;
    std::fs::write(&newick_path, morphevo_core::analytics::to_newick(forest))?;
    let json_path = out_path(dir, run_id, "tree.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(forest)?)?;
    Ok(vec![newick_path, json_path])
}

pub fn write_lineages(
    dir: &Path,
    run_id: &str,
    table: &[LineageStats],
) -> Result<PathBuf, CliError> {
    let path = out_path(dir, run_id, "lineages.csv");
    let header = [
        "lineage_id",
        "founder_fitness_rank",
        "final_abundance",
        "beneficial_mutation_count",
    ]
    .map(String::from);
    write_csv(
        &path,
        &header,
        table.iter().map(|l| {
            vec![
                l.lineage_id.to_string(),
                l.founder_fitness_rank.to_string(),
                fmt_f64(l.final_abundance),
                l.beneficial_mutation_count.to_string(),
            ]
        }),
    )?;
    Ok(path)
}

pub fn write_baldwin(dir: &Path, run_id: &str, curve: &BaldwinCurve) -> Result<PathBuf, CliError> {
    let path = out_path(dir, run_id, "baldwin.csv");
    let header = [
        "generation",
        "n",
        "mean_iterations",
        "ci_lo",
        "ci_hi",
        "not_reached",
        "criterion",
    ]
    .map(String::from);
    write_csv(
        &path,
        &header,
        curve.rows.iter().map(|r| {
            vec![
                r.generation.to_string(),
                r.n.to_string(),
                fmt_f64(r.mean_iterations),
                fmt_f64(r.ci_lo),
                fmt_f64(r.ci_hi),
                r.not_reached.to_string(),
                fmt_f64(curve.criterion),
            ]
        }),
    )?;
    Ok(path)
}

pub fn write_descriptors(
    dir: &Path,
    run_id: &str,
    rows: &[DescriptorTrendRow],
) -> Result<PathBuf, CliError> {
    let path = out_path(dir, run_id, "descriptors.csv");
    let mut header = vec!["birth_index".to_string()];
    for name in ["extent_x", "extent_y", "extent_z", "coverage", "mass", "dof"] {
        header.push(format!("{name}_mean"));
        header.push(format!("{name}_ci_lo"));
        header.push(format!("{name}_ci_hi"));
    }
    write_csv(
        &path,
        &header,
        rows.iter().map(|r| {
            let mut out = vec![r.birth_index.to_string()];
            for s in [&r.extent_x, &r.extent_y, &r.extent_z, &r.coverage, &r.mass, &r.dof] {
                out.push(fmt_f64(s.mean));
                out.push(fmt_f64(s.ci_lo));
                out.push(fmt_f64(s.ci_hi));
            }
            out
        }),
    )?;
    Ok(path)
}

pub fn write_stability(
    dir: &Path,
    run_id: &str,
    trend: &[(u64, f64)],
) -> Result<PathBuf, CliError> {
    let path = out_path(dir, run_id, "stability.csv");
    let header = ["birth_index", "stable_fraction"].map(String::from);
    write_csv(
        &path,
        &header,
        trend
            .iter()
            .map(|(t, f)| vec![t.to_string(), fmt_f64(*f)]),
    )?;
    Ok(path)
}

/// Per-agent table with every column downstream significance tests need.
pub fn write_top_agents(
    dir: &Path,
    run_id: &str,
    agents: &[(usize, Record)],
) -> Result<PathBuf, CliError> {
    let path = out_path(dir, run_id, "top.csv");
    let header = [
        "rank",
        "run",
        "id",
        "lineage_id",
        "birth_index",
        "fitness",
        "forward_progress",
        "energy",
        "cow",
        "passively_stable",
        "limb_count",
        "dof",
        "mass",
    ]
    .map(String::from);
    write_csv(
        &path,
        &header,
        agents.iter().enumerate().map(|(rank, (run, r))| {
            vec![
                (rank + 1).to_string(),
                run.to_string(),
                r.id.to_string(),
                r.lineage_id.to_string(),
                r.birth_index.to_string(),
                fmt_f64(r.report.fitness),
                fmt_f64(r.report.forward_progress),
                fmt_f64(r.report.energy),
                r.report.cow.map(fmt_f64).unwrap_or_default(),
                r.report.passively_stable.to_string(),
                r.morphology.limbs.len().to_string(),
                r.morphology.dof_count().to_string(),
                fmt_f64(geometry::mass_properties(&r.morphology).total_mass),
            ]
        }),
    )?;
    Ok(path)
}

pub fn write_correlation(
    dir: &Path,
    run_id: &str,
    report: &CorrelationReport,
) -> Result<PathBuf, CliError> {
    let path = out_path(dir, run_id, "correlate.csv");
    let header = ["channel", "r", "p", "n"].map(String::from);
    let mut rows = vec![vec![
        "fitness_vs_cow".to_string(),
        fmt_f64(report.fitness_cow_r),
        fmt_f64(report.fitness_cow_p),
        report.fitness_cow_n.to_string(),
    ]];
    if let (Some(r), Some(p)) = (report.baldwin_cow_r, report.baldwin_cow_p) {
        rows.push(vec![
            "baldwin_iterations_vs_cow".to_string(),
            fmt_f64(r),
            fmt_f64(p),
            report.baldwin_cow_n.to_string(),
        ]);
    }
    write_csv(&path, &header, rows.into_iter())?;
    Ok(path)
}

/// Small header (resolution and arena) then the dense grid, row per y.
pub fn write_heightfield(path: &Path, hf: &Heightfield) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "resolution,x_len,y_len")?;
    writeln!(w, "{},{},{}", hf.resolution, hf.x_len, hf.y_len)?;
    for iy in 0..hf.ny {
        let row: Vec<String> = (0..hf.nx).map(|ix| fmt_f64(hf.at(ix, iy))).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_segments(path: &Path, segments: &[ObstacleSegment]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(segments)?)?;
    Ok(())
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}
