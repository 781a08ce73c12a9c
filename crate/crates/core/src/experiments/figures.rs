//! Tabular datasets behind the figure reproductions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{RunRecord, Summary};
use crate::Error;

/// One row of `summary.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub mode: String,
    pub b: usize,
    pub k: usize,
    pub c: usize,
    pub s: usize,
    pub landscape: usize,
    pub run: usize,
    pub seed: u64,
    pub final_fitness: f64,
    pub final_pct_grna: f64,
}

/// One row of `series.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRow {
    pub mode: String,
    pub b: usize,
    pub k: usize,
    pub c: usize,
    pub landscape: usize,
    pub run: usize,
    pub generation: usize,
    pub fitness: f64,
    pub pct_grna: f64,
}

impl From<&RunRecord> for SummaryRow {
    fn from(r: &RunRecord) -> Self {
        SummaryRow {
            mode: r.key.mode_label(),
            b: r.key.b,
            k: r.key.k,
            c: r.key.c,
            s: r.s,
            landscape: r.landscape,
            run: r.run,
            seed: r.seed,
            final_fitness: r.result.final_fitness,
            final_pct_grna: r.result.final_pct_grna,
        }
    }
}

pub fn series_rows(r: &RunRecord) -> impl Iterator<Item = SeriesRow> + '_ {
    r.result.series.iter().map(move |p| SeriesRow {
        mode: r.key.mode_label(),
        b: r.key.b,
        k: r.key.k,
        c: r.key.c,
        landscape: r.landscape,
        run: r.run,
        generation: p.generation,
        fitness: p.fitness,
        pct_grna: p.pct_grna,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureId {
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
        }
    }

    /// Mode label and coupling degree the figure is drawn from.
    pub fn source(self) -> (&'static str, Option<usize>) {
        match self {
            FigureId::Fig4 => ("stationary", None),
            FigureId::Fig5 => ("nonstationary", None),
            FigureId::Fig6 => ("hetero_coevo", Some(1)),
            FigureId::Fig7 => ("hetero_coevo", Some(5)),
            FigureId::Fig8 => ("hetero_coevo", None),
            FigureId::Fig9 => ("homog_diff", None),
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            FigureId::Fig4 => "Stationary landscape",
            FigureId::Fig5 => "Non-stationary landscape",
            FigureId::Fig6 => "Heterogeneous coevolution, C=1",
            FigureId::Fig7 => "Heterogeneous coevolution, C=5",
            FigureId::Fig8 => "Coevolution time series",
            FigureId::Fig9 => "Two-cell (mother/daughter)",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        [
            FigureId::Fig4,
            FigureId::Fig5,
            FigureId::Fig6,
            FigureId::Fig7,
            FigureId::Fig8,
            FigureId::Fig9,
        ]
        .into_iter()
        .find(|f| f.name() == s)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown figure {s:?}")))
    }
}

/// B values on the horizontal axis of the grid figures.
pub const GRID_B: [usize; 5] = [1, 2, 3, 4, 5];
/// One curve per K.
pub const GRID_K: [usize; 6] = [0, 1, 2, 3, 4, 5];

/// One (B, K) point; `None` summaries mark cells with no runs.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    pub b: usize,
    pub k: usize,
    pub runs: usize,
    pub fitness: Option<Summary>,
    pub pct_grna: Option<Summary>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FigureData {
    Grid(Vec<GridRow>),
    Series(Vec<SeriesRow>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigureDataset {
    pub figure: FigureId,
    pub data: FigureData,
    /// Cells the figure needs but the results do not contain.
    pub missing: Vec<String>,
}

/// Builds the dataset for `figure` from loaded result rows. Gaps are kept
/// as explicit empty cells and listed in `missing`.
pub fn figure_dataset(
    figure: FigureId,
    summary: &[SummaryRow],
    series: &[SeriesRow],
) -> FigureDataset {
    let (mode, c) = figure.source();
    if figure == FigureId::Fig8 {
        let rows: Vec<SeriesRow> = series.iter().filter(|r| r.mode == mode).cloned().collect();
        let missing = if rows.is_empty() {
            vec![format!("{mode}: no time series")]
        } else {
            Vec::new()
        };
        return FigureDataset {
            figure,
            data: FigureData::Series(rows),
            missing,
        };
    }
    let mut cells: BTreeMap<(usize, usize), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in summary
        .iter()
        .filter(|r| r.mode == mode && c.is_none_or(|c| r.c == c))
    {
        let e = cells.entry((r.b, r.k)).or_default();
        e.0.push(r.final_fitness);
        e.1.push(r.final_pct_grna);
    }
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for &b in &GRID_B {
        for &k in &GRID_K {
            let (f, p) = cells.remove(&(b, k)).unwrap_or_default();
            if f.is_empty() {
                missing.push(format!(
                    "{mode} B={b} K={k}{}",
                    c.map(|c| format!(" C={c}")).unwrap_or_default()
                ));
            }
            let mut f = f;
            let mut p = p;
            f.sort_by(f64::total_cmp);
            p.sort_by(f64::total_cmp);
            rows.push(GridRow {
                b,
                k,
                runs: f.len(),
                fitness: Summary::of(&f),
                pct_grna: Summary::of(&p),
            });
        }
    }
    FigureDataset {
        figure,
        data: FigureData::Grid(rows),
        missing,
    }
}
