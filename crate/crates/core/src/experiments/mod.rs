//! Experiment definitions, seeded sweeps and aggregation.
//!
//! Random streams are laid out so that every run can be reproduced on its
//! own: landscape `i` of a configuration is drawn from `landscape/i` of the
//! root seed, and run `j` on it from `run/i` then `rep/j`. Streams do not
//! depend on B, so cells that differ only in B (or in mode, or in the
//! scramble flag) share landscapes and run seeds.

pub mod figures;
pub mod stats;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::evolution::{
    coevolve_hetero, coevolve_homog, evolve_rbnk, RunResult, RunSettings, SingleCellMode,
};
use crate::landscape::{NkLandscape, NkcsLandscape};
use crate::network::NetworkParams;
use crate::prng::RngStream;
use crate::{Error, Result};

pub use stats::{welch_t_test, WelchResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Stationary,
    Nonstationary,
    HeteroCoevo,
    HomogDiff,
    HomogSame,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Stationary,
        Mode::Nonstationary,
        Mode::HeteroCoevo,
        Mode::HomogDiff,
        Mode::HomogSame,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Stationary => "stationary",
            Mode::Nonstationary => "nonstationary",
            Mode::HeteroCoevo => "hetero_coevo",
            Mode::HomogDiff => "homog_diff",
            Mode::HomogSame => "homog_same",
        }
    }

    pub fn is_coupled(self) -> bool {
        !matches!(self, Mode::Stationary | Mode::Nonstationary)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown mode {s:?}")))
    }
}

/// One parameter configuration plus its replication counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub r: usize,
    pub n: usize,
    pub n_input: usize,
    pub b: usize,
    pub b_prime: usize,
    pub k: usize,
    pub c: usize,
    pub s: usize,
    pub generations: usize,
    pub cycles: usize,
    pub runs_per_landscape: usize,
    pub landscapes: usize,
    pub log_every: usize,
    pub seed: u64,
    pub scramble_control: bool,
    pub clamp_coupled: bool,
    pub editable_fraction: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec::paper()
    }
}

impl ExperimentSpec {
    /// Full-scale settings: R=100, N=10, 50,000 generations, 10 x 10 runs.
    pub fn paper() -> Self {
        ExperimentSpec {
            mode: Mode::Stationary,
            r: 100,
            n: 10,
            n_input: 10,
            b: 2,
            b_prime: 2,
            k: 0,
            c: 1,
            s: 1,
            generations: 50_000,
            cycles: 100,
            runs_per_landscape: 10,
            landscapes: 10,
            log_every: 50,
            seed: 1,
            scramble_control: false,
            clamp_coupled: false,
            editable_fraction: 0.5,
        }
    }

    /// Desk-scale settings: R=50, 10,000 generations, 10 runs x 5 landscapes.
    pub fn desk() -> Self {
        ExperimentSpec {
            r: 50,
            generations: 10_000,
            runs_per_landscape: 10,
            landscapes: 5,
            ..ExperimentSpec::paper()
        }
    }

    pub fn key(&self) -> CellKey {
        CellKey {
            mode: self.mode,
            scrambled: self.scramble_control,
            b: self.b,
            k: self.k,
            c: if self.mode.is_coupled() { self.c } else { 0 },
        }
    }

    pub fn network_params(&self) -> NetworkParams {
        NetworkParams {
            r: self.r,
            n: self.n,
            b: self.b,
            b_prime: self.b_prime,
            n_input: self.n_input,
            coupled: self.mode.is_coupled(),
            editable_fraction: self.editable_fraction,
        }
    }

    pub fn run_settings(&self) -> RunSettings {
        RunSettings {
            network: self.network_params(),
            generations: self.generations,
            cycles: self.cycles,
            log_every: self.log_every,
            scramble: self.scramble_control,
            clamp_coupled: self.clamp_coupled,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.network_params().validate()?;
        if self.k >= self.n {
            return Err(Error::InvalidArgument(format!(
                "need K < N (K={}, N={})",
                self.k, self.n
            )));
        }
        if self.mode.is_coupled() {
            if self.c == 0 || self.c > self.n {
                return Err(Error::InvalidArgument(format!(
                    "need 1 <= C <= N (C={})",
                    self.c
                )));
            }
            if self.s != 1 {
                return Err(Error::InvalidArgument(
                    "two-network modes need S = 1".into(),
                ));
            }
        }
        if self.cycles == 0
            || self.log_every == 0
            || self.runs_per_landscape == 0
            || self.landscapes == 0
        {
            return Err(Error::InvalidArgument(
                "cycles, log_every, runs_per_landscape and landscapes must be >= 1".into(),
            ));
        }
        Ok(())
    }

    fn root(&self) -> RngStream {
        RngStream::from_seed(self.seed)
    }
}

/// Configuration cell that aggregates are keyed by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub mode: Mode,
    pub scrambled: bool,
    pub b: usize,
    pub k: usize,
    pub c: usize,
}

impl CellKey {
    /// Mode label used in output files, `_scrambled` marking control runs.
    pub fn mode_label(&self) -> String {
        if self.scrambled {
            format!("{}_scrambled", self.mode)
        } else {
            self.mode.to_string()
        }
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} B={} K={} C={}",
            self.mode_label(),
            self.b,
            self.k,
            self.c
        )
    }
}

/// The landscapes one run needs.
#[derive(Clone, Debug, PartialEq)]
pub enum LandscapeSet {
    Nk(Vec<NkLandscape>),
    Nkcs(Vec<NkcsLandscape>),
}

/// Landscapes for landscape index `index` of `spec`.
pub fn landscapes_for(spec: &ExperimentSpec, index: usize) -> Result<LandscapeSet> {
    let base = spec.root().child("landscape", index as u64);
    let slot = |i: u64| base.child("slot", i);
    Ok(match spec.mode {
        Mode::Stationary => {
            LandscapeSet::Nk(vec![NkLandscape::generate(spec.n, spec.k, &mut slot(0))?])
        }
        Mode::Nonstationary => LandscapeSet::Nk(vec![
            NkLandscape::generate(spec.n, spec.k, &mut slot(0))?,
            NkLandscape::generate(spec.n, spec.k, &mut slot(1))?,
        ]),
        Mode::HeteroCoevo | Mode::HomogDiff => LandscapeSet::Nkcs(vec![
            NkcsLandscape::generate(spec.n, spec.k, spec.c, spec.s, &mut slot(0))?,
            NkcsLandscape::generate(spec.n, spec.k, spec.c, spec.s, &mut slot(1))?,
        ]),
        Mode::HomogSame => {
            let l = NkcsLandscape::generate(spec.n, spec.k, spec.c, spec.s, &mut slot(0))?;
            LandscapeSet::Nkcs(vec![l.clone(), l])
        }
    })
}

/// Root stream of run `run` on landscape `landscape`.
pub fn run_stream(spec: &ExperimentSpec, landscape: usize, run: usize) -> RngStream {
    spec.root()
        .child("run", landscape as u64)
        .child("rep", run as u64)
}

fn run_on(
    spec: &ExperimentSpec,
    ls: &LandscapeSet,
    landscape: usize,
    run: usize,
) -> Result<RunResult> {
    let settings = spec.run_settings();
    let stream = run_stream(spec, landscape, run);
    match (spec.mode, ls) {
        (Mode::Stationary, LandscapeSet::Nk(l)) => {
            evolve_rbnk(&settings, SingleCellMode::Stationary, l, &stream)
        }
        (Mode::Nonstationary, LandscapeSet::Nk(l)) => {
            evolve_rbnk(&settings, SingleCellMode::Nonstationary, l, &stream)
        }
        (Mode::HeteroCoevo, LandscapeSet::Nkcs(l)) => {
            coevolve_hetero(&settings, &l[0], &l[1], &stream)
        }
        (Mode::HomogDiff | Mode::HomogSame, LandscapeSet::Nkcs(l)) => {
            coevolve_homog(&settings, &l[0], &l[1], &stream)
        }
        _ => Err(Error::Invariant(
            "landscape kind does not match mode".into(),
        )),
    }
}

/// Runs a single (landscape, run) cell of `spec` in isolation.
pub fn run_cell(spec: &ExperimentSpec, landscape: usize, run: usize) -> Result<RunResult> {
    spec.validate()?;
    let ls = landscapes_for(spec, landscape)?;
    run_on(spec, &ls, landscape, run)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub key: CellKey,
    pub s: usize,
    pub landscape: usize,
    pub run: usize,
    pub seed: u64,
    pub result: RunResult,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Option<Summary> {
        if xs.is_empty() {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // keep min <= mean <= max under rounding
        Some(Summary {
            mean: mean.clamp(min, max),
            min,
            max,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub key: CellKey,
    pub runs: usize,
    pub fitness: Summary,
    pub pct_grna: Summary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
}

/// Runs every (landscape, run) cell of every spec on `jobs` threads.
///
/// Records come back sorted by (cell, landscape, run) and are identical for
/// any `jobs`.
pub fn run_sweep(grid: &[ExperimentSpec], jobs: usize) -> Result<SweepOutput> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty experiment grid".into()));
    }
    for spec in grid {
        spec.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;

    let landscape_tasks: Vec<(usize, usize)> = grid
        .iter()
        .enumerate()
        .flat_map(|(si, s)| (0..s.landscapes).map(move |i| (si, i)))
        .collect();
    let run_tasks: Vec<(usize, usize, usize)> = grid
        .iter()
        .enumerate()
        .flat_map(|(si, s)| {
            (0..s.landscapes).flat_map(move |i| (0..s.runs_per_landscape).map(move |j| (si, i, j)))
        })
        .collect();

    let mut records = pool.install(|| -> Result<Vec<RunRecord>> {
        let sets: Vec<LandscapeSet> = landscape_tasks
            .par_iter()
            .map(|&(si, i)| landscapes_for(&grid[si], i))
            .collect::<Result<_>>()?;
        let offsets: Vec<usize> = grid
            .iter()
            .scan(0, |acc, s| {
                let o = *acc;
                *acc += s.landscapes;
                Some(o)
            })
            .collect();
        run_tasks
            .par_iter()
            .map(|&(si, i, j)| {
                let spec = &grid[si];
                let result = run_on(spec, &sets[offsets[si] + i], i, j).map_err(|e| match e {
                    Error::Invariant(m) => {
                        Error::Invariant(format!("cell {} landscape={i} run={j}: {m}", spec.key()))
                    }
                    other => other,
                })?;
                Ok(RunRecord {
                    key: spec.key(),
                    s: spec.s,
                    landscape: i,
                    run: j,
                    seed: spec.seed,
                    result,
                })
            })
            .collect()
    })?;
    records.sort_by_key(|a| (a.key, a.landscape, a.run));
    let aggregates = aggregate(&records);
    Ok(SweepOutput {
        records,
        aggregates,
    })
}

/// Mean/min/max of final fitness and final %gRNA per configuration cell.
pub fn aggregate(records: &[RunRecord]) -> Vec<Aggregate> {
    let mut cells: BTreeMap<CellKey, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let e = cells.entry(r.key).or_default();
        e.0.push(r.result.final_fitness);
        e.1.push(r.result.final_pct_grna);
    }
    cells
        .into_iter()
        .map(|(key, (mut f, mut p))| {
            // order-independent sums
            f.sort_by(f64::total_cmp);
            p.sort_by(f64::total_cmp);
            Aggregate {
                key,
                runs: f.len(),
                fitness: Summary::of(&f).expect("nonempty cell"),
                pct_grna: Summary::of(&p).expect("nonempty cell"),
            }
        })
        .collect()
}

/// Treatment vs scrambled-control comparison for one configuration cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub key: CellKey,
    pub treatment: Summary,
    pub control: Summary,
    pub treatment_pct_grna: f64,
    pub control_pct_grna: f64,
    pub test: Option<WelchResult>,
}

/// Runs every spec twice, normally and with scrambled offspring
/// reconnection lists, on the same landscapes and run seeds, and compares
/// final fitness with Welch's t-test (treatment minus control).
pub fn control_comparison(grid: &[ExperimentSpec], jobs: usize) -> Result<Vec<ComparisonRow>> {
    let mut both = Vec::with_capacity(grid.len() * 2);
    for spec in grid {
        both.push(ExperimentSpec {
            scramble_control: false,
            ..spec.clone()
        });
        both.push(ExperimentSpec {
            scramble_control: true,
            ..spec.clone()
        });
    }
    let out = run_sweep(&both, jobs)?;
    let mut by_key: BTreeMap<CellKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in &out.records {
        by_key.entry(r.key).or_default().push(r);
    }
    let mut rows = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for spec in grid {
        let t_key = CellKey {
            scrambled: false,
            ..spec.key()
        };
        if !seen.insert(t_key) {
            continue;
        }
        let c_key = CellKey {
            scrambled: true,
            ..t_key
        };
        let fit = |k: &CellKey| -> Vec<f64> {
            by_key[k].iter().map(|r| r.result.final_fitness).collect()
        };
        let pct = |k: &CellKey| -> f64 {
            let v: Vec<f64> = by_key[k].iter().map(|r| r.result.final_pct_grna).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let (tf, cf) = (fit(&t_key), fit(&c_key));
        rows.push(ComparisonRow {
            key: t_key,
            treatment: Summary::of(&tf).expect("nonempty"),
            control: Summary::of(&cf).expect("nonempty"),
            treatment_pct_grna: pct(&t_key),
            control_pct_grna: pct(&c_key),
            test: welch_t_test(&tf, &cf).ok(),
        });
    }
    Ok(rows)
}
