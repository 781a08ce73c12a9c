//! Subcommand implementations behind the `rbnedit` binary.
//!
//! Exit statuses are stable: 0 ok, 2 config or input error, 3 internal
//! invariant violation, 4 incomplete data.

pub mod chart;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use crate::experiments::figures::{figure_dataset, series_rows, FigureId, SeriesRow, SummaryRow};
use crate::experiments::{
    control_comparison, landscapes_for, run_cell, run_sweep, welch_t_test, LandscapeSet,
    SweepOutput,
};
use crate::{Error, Result};

pub use config::ConfigFile;

/// Environment variable consulted for the root seed when no flag is given.
pub const SEED_ENV: &str = "RBNEDIT_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_INCOMPLETE: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invariant(_) => EXIT_INVARIANT,
        Error::Incomplete(_) => EXIT_INCOMPLETE,
        Error::InvalidArgument(_)
        | Error::NotComputable(_)
        | Error::Parse { .. }
        | Error::Io(_) => EXIT_INPUT,
    }
}

/// Seed flag, else `RBNEDIT_SEED`, else none (the config's seed applies).
pub fn resolve_seed(flag: Option<u64>) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidArgument(format!("{SEED_ENV}={v:?} is not a u64"))),
        Err(_) => Ok(None),
    }
}

fn with_context(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

/// Runs the sweep described by `config` and writes summary.csv,
/// series.csv and aggregate.csv into `out`.
pub fn cmd_run(config: &Path, out: &Path, seed: Option<u64>, jobs: usize) -> Result<SweepOutput> {
    let grid = ConfigFile::load(config)
        .and_then(|c| c.to_grid(seed))
        .map_err(|e| with_context(config, e))?;
    let sweep = run_sweep(&grid, jobs)?;
    std::fs::create_dir_all(out)?;
    let summary: Vec<SummaryRow> = sweep.records.iter().map(SummaryRow::from).collect();
    let series: Vec<SeriesRow> = sweep.records.iter().flat_map(series_rows).collect();
    output::write_file(&out.join("summary.csv"), &output::summary_csv(&summary))?;
    output::write_file(&out.join("series.csv"), &output::series_csv(&series))?;
    output::write_file(
        &out.join("aggregate.csv"),
        &output::aggregate_csv(&sweep.aggregates),
    )?;
    Ok(sweep)
}

/// Builds a figure from a results directory, writing `<fig>.csv` and
/// `<fig>.svg` into `out`. Missing grid cells are an error unless
/// `allow_gaps`, in which case they appear as `NA`.
pub fn cmd_figure(
    figure: FigureId,
    results: &Path,
    out: &Path,
    allow_gaps: bool,
) -> Result<Vec<PathBuf>> {
    let summary_path = results.join("summary.csv");
    let series_path = results.join("series.csv");
    let summary = output::parse_summary(&std::fs::read_to_string(&summary_path)?)
        .map_err(|e| with_context(&summary_path, e))?;
    let series = if figure == FigureId::Fig8 {
        output::parse_series(&std::fs::read_to_string(&series_path)?)
            .map_err(|e| with_context(&series_path, e))?
    } else {
        Vec::new()
    };
    let d = figure_dataset(figure, &summary, &series);
    if !d.missing.is_empty() && !allow_gaps {
        return Err(Error::Incomplete(format!(
            "{figure} is missing {} cell(s): {}",
            d.missing.len(),
            d.missing.join("; ")
        )));
    }
    std::fs::create_dir_all(out)?;
    let csv = out.join(format!("{figure}.csv"));
    let svg = out.join(format!("{figure}.svg"));
    output::write_file(&csv, &output::figure_csv(&d))?;
    output::write_file(&svg, &chart::render(&d))?;
    Ok(vec![csv, svg])
}

/// Welch t-test on a named numeric column of two CSV files; returns the
/// `t=<v> df=<v> p=<v>` line.
pub fn cmd_ttest(a: &Path, b: &Path, column: &str) -> Result<String> {
    let xa = output::Table::load(a)?
        .numeric(column)
        .map_err(|e| with_context(a, e))?;
    let xb = output::Table::load(b)?
        .numeric(column)
        .map_err(|e| with_context(b, e))?;
    let r = welch_t_test(&xa, &xb)?;
    Ok(format!("t={:.6} df={:.6} p={:.6}", r.t, r.df, r.p))
}

/// Treatment vs scrambled-control comparison; writes `control.csv`.
pub fn cmd_control(config: &Path, out: &Path, seed: Option<u64>, jobs: usize) -> Result<PathBuf> {
    let grid = ConfigFile::load(config)
        .and_then(|c| c.to_grid(seed))
        .map_err(|e| with_context(config, e))?;
    let rows = control_comparison(&grid, jobs)?;
    std::fs::create_dir_all(out)?;
    let path = out.join("control.csv");
    output::write_file(&path, &output::control_csv(&rows))?;
    Ok(path)
}

/// Writes the landscapes of landscape index `index` for every grid cell of
/// `config`, one file per distinct landscape.
pub fn cmd_landscape(
    config: &Path,
    index: usize,
    out: &Path,
    seed: Option<u64>,
) -> Result<Vec<PathBuf>> {
    let grid = ConfigFile::load(config)
        .and_then(|c| c.to_grid(seed))
        .map_err(|e| with_context(config, e))?;
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for spec in &grid {
        let key = spec.key();
        let stem = format!("{}_K{}_C{}_L{index}", key.mode, key.k, key.c);
        let mut files = Vec::new();
        match landscapes_for(spec, index)? {
            LandscapeSet::Nk(ls) => {
                for (slot, l) in ls.iter().enumerate() {
                    let mut buf = Vec::new();
                    l.write_to(&mut buf)?;
                    files.push((slot, buf));
                }
            }
            LandscapeSet::Nkcs(ls) => {
                for (slot, l) in ls.iter().enumerate() {
                    let mut buf = Vec::new();
                    l.write_to(&mut buf)?;
                    files.push((slot, buf));
                }
            }
        }
        for (slot, buf) in files {
            let path = out.join(format!("{stem}_slot{slot}.txt"));
            if !written.contains(&path) {
                std::fs::write(&path, buf)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// Re-runs one cell of the first grid spec and writes its final genome.
pub fn cmd_genome(
    config: &Path,
    landscape: usize,
    run: usize,
    out: &Path,
    seed: Option<u64>,
) -> Result<()> {
    let grid = ConfigFile::load(config)
        .and_then(|c| c.to_grid(seed))
        .map_err(|e| with_context(config, e))?;
    let spec = grid
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
    if landscape >= spec.landscapes || run >= spec.runs_per_landscape {
        return Err(Error::InvalidArgument(
            "landscape/run index out of range".into(),
        ));
    }
    let res = run_cell(spec, landscape, run)?;
    let mut buf = Vec::new();
    res.final_genome.write_to(&mut buf)?;
    std::fs::write(out, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Invariant("x".into())), 3);
        assert_eq!(exit_code(&Error::Incomplete("x".into())), 4);
        assert_eq!(
            exit_code(&Error::Parse {
                line: 1,
                column: 1,
                message: "x".into()
            }),
            2
        );
    }

    #[test]
    fn flag_seed_wins() {
        assert_eq!(resolve_seed(Some(5)).unwrap(), Some(5));
    }
}
