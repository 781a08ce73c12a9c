//! CSV files written and read by the command-line tool.
//!
//! All files use LF line endings, `.` decimals and unquoted fields.

use std::io::Write;
use std::path::Path;

use crate::experiments::figures::{FigureData, FigureDataset, SeriesRow, SummaryRow};
use crate::experiments::{Aggregate, ComparisonRow, Summary};
use crate::{Error, Result};

pub const SUMMARY_HEADER: &str = "mode,B,K,C,S,landscape,run,seed,final_fitness,final_pct_grna";
pub const SERIES_HEADER: &str = "mode,B,K,C,landscape,run,generation,fitness,pct_grna";
pub const AGGREGATE_HEADER: &str = "mode,B,K,C,stat,fitness,pct_grna";
pub const CONTROL_HEADER: &str =
    "mode,B,K,C,treatment_mean,control_mean,treatment_pct_grna,control_pct_grna,t,df,p";
pub const GRID_HEADER: &str =
    "B,K,runs,fitness_mean,fitness_min,fitness_max,pct_grna_mean,pct_grna_min,pct_grna_max";

/// Marker written for cells without data.
pub const GAP: &str = "NA";

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:.9},{:.6}\n",
            r.mode,
            r.b,
            r.k,
            r.c,
            r.s,
            r.landscape,
            r.run,
            r.seed,
            r.final_fitness,
            r.final_pct_grna
        ));
    }
    s
}

pub fn series_csv(rows: &[SeriesRow]) -> String {
    let mut s = String::from(SERIES_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{:.9},{:.6}\n",
            r.mode, r.b, r.k, r.c, r.landscape, r.run, r.generation, r.fitness, r.pct_grna
        ));
    }
    s
}

pub fn aggregate_csv(aggs: &[Aggregate]) -> String {
    let mut s = String::from(AGGREGATE_HEADER);
    s.push('\n');
    for a in aggs {
        let k = &a.key;
        for (stat, f, p) in [
            ("mean", a.fitness.mean, a.pct_grna.mean),
            ("min", a.fitness.min, a.pct_grna.min),
            ("max", a.fitness.max, a.pct_grna.max),
        ] {
            s.push_str(&format!(
                "{},{},{},{},{stat},{f:.9},{p:.6}\n",
                k.mode_label(),
                k.b,
                k.k,
                k.c
            ));
        }
    }
    s
}

pub fn control_csv(rows: &[ComparisonRow]) -> String {
    let mut s = String::from(CONTROL_HEADER);
    s.push('\n');
    for r in rows {
        let (t, df, p) = match r.test {
            Some(w) => (
                format!("{:.6}", w.t),
                format!("{:.6}", w.df),
                format!("{:.6}", w.p),
            ),
            None => (GAP.into(), GAP.into(), GAP.into()),
        };
        s.push_str(&format!(
            "{},{},{},{},{:.9},{:.9},{:.6},{:.6},{t},{df},{p}\n",
            r.key.mode,
            r.key.b,
            r.key.k,
            r.key.c,
            r.treatment.mean,
            r.control.mean,
            r.treatment_pct_grna,
            r.control_pct_grna
        ));
    }
    s
}

fn summary_cells(s: Option<Summary>, decimals: usize) -> String {
    match s {
        Some(s) => format!("{:.d$},{:.d$},{:.d$}", s.mean, s.min, s.max, d = decimals),
        None => format!("{GAP},{GAP},{GAP}"),
    }
}

pub fn figure_csv(d: &FigureDataset) -> String {
    match &d.data {
        FigureData::Series(rows) => series_csv(rows),
        FigureData::Grid(rows) => {
            let mut s = String::from(GRID_HEADER);
            s.push('\n');
            for r in rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.b,
                    r.k,
                    r.runs,
                    summary_cells(r.fitness, 9),
                    summary_cells(r.pct_grna, 6)
                ));
            }
            s
        }
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

/// A loaded CSV: header names plus raw rows.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Parse {
                line: 1,
                column: 1,
                message: "empty file".into(),
            })?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, l) in lines.enumerate() {
            if l.is_empty() {
                continue;
            }
            let row: Vec<String> = l.split(',').map(str::to_string).collect();
            if row.len() != header.len() {
                return Err(Error::Parse {
                    line: i + 2,
                    column: 1,
                    message: format!("expected {} fields, found {}", header.len(), row.len()),
                });
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no column named {name:?}")))
    }

    /// Values of a numeric column.
    pub fn numeric(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row[i].parse().map_err(|_| Error::Parse {
                    line: r + 2,
                    column: 1 + row[..i].iter().map(|x| x.len() + 1).sum::<usize>(),
                    message: format!("{:?} is not a number", row[i]),
                })
            })
            .collect()
    }

    fn expect_header(&self, want: &str) -> Result<()> {
        if self.header.join(",") != want {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!("expected header {want:?}"),
            });
        }
        Ok(())
    }
}

fn field<T: std::str::FromStr>(row: &[String], i: usize, line: usize) -> Result<T> {
    row[i].parse().map_err(|_| Error::Parse {
        line,
        column: 1 + row[..i].iter().map(|x| x.len() + 1).sum::<usize>(),
        message: format!("bad field {:?}", row[i]),
    })
}

pub fn parse_summary(text: &str) -> Result<Vec<SummaryRow>> {
    let t = Table::parse(text)?;
    t.expect_header(SUMMARY_HEADER)?;
    t.rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let l = i + 2;
            Ok(SummaryRow {
                mode: r[0].clone(),
                b: field(r, 1, l)?,
                k: field(r, 2, l)?,
                c: field(r, 3, l)?,
                s: field(r, 4, l)?,
                landscape: field(r, 5, l)?,
                run: field(r, 6, l)?,
                seed: field(r, 7, l)?,
                final_fitness: field(r, 8, l)?,
                final_pct_grna: field(r, 9, l)?,
            })
        })
        .collect()
}

pub fn parse_series(text: &str) -> Result<Vec<SeriesRow>> {
    let t = Table::parse(text)?;
    t.expect_header(SERIES_HEADER)?;
    t.rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let l = i + 2;
            Ok(SeriesRow {
                mode: r[0].clone(),
                b: field(r, 1, l)?,
                k: field(r, 2, l)?,
                c: field(r, 3, l)?,
                landscape: field(r, 4, l)?,
                run: field(r, 5, l)?,
                generation: field(r, 6, l)?,
                fitness: field(r, 7, l)?,
                pct_grna: field(r, 8, l)?,
            })
        })
        .collect()
}
