//! Mutation, selection and the run protocols built on them.
//!
//! All protocols are single-parent hill-climbers: each generation one
//! mutant is made, scored, and kept if it is strictly fitter, or equally fit
//! with fewer editable nodes, or (on a full tie) by a coin flip.

use crate::landscape::{NkLandscape, NkcsLandscape};
use crate::network::{
    random_targets, run_coupled_episode, run_episode, GrnaGene, Input, NetworkGenome,
    NetworkParams, NodeId, Schedule, PARTNER,
};
use crate::prng::RngStream;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MutationKind {
    FlipTranscriptionBit,
    RewireBConnection,
    FlipStartState,
    ToggleEditable,
    AlterReconnectEntry,
    RewireBprimeConnection,
}

impl MutationKind {
    pub const ALL: [MutationKind; 6] = [
        MutationKind::FlipTranscriptionBit,
        MutationKind::RewireBConnection,
        MutationKind::FlipStartState,
        MutationKind::ToggleEditable,
        MutationKind::AlterReconnectEntry,
        MutationKind::RewireBprimeConnection,
    ];

    fn needs_editing(self) -> bool {
        matches!(
            self,
            MutationKind::ToggleEditable
                | MutationKind::AlterReconnectEntry
                | MutationKind::RewireBprimeConnection
        )
    }
}

/// Applies one uniformly chosen mutation kind to a copy of `g`.
///
/// Kinds that cannot apply (no editable node, or editing disabled for this
/// lineage) are redrawn, so the result always differs in exactly one gene.
pub fn mutate(
    g: &NetworkGenome,
    editing: bool,
    rng: &mut RngStream,
) -> (NetworkGenome, MutationKind) {
    let mut child = g.clone();
    let kind = loop {
        let kind = MutationKind::ALL[rng.index(MutationKind::ALL.len())];
        if applicable(g, kind, editing) {
            break kind;
        }
    };
    apply(&mut child, kind, rng);
    (child, kind)
}

fn applicable(g: &NetworkGenome, kind: MutationKind, editing: bool) -> bool {
    if kind.needs_editing() && !editing {
        return false;
    }
    match kind {
        MutationKind::FlipTranscriptionBit | MutationKind::FlipStartState => true,
        MutationKind::ToggleEditable => true,
        MutationKind::RewireBConnection => g.r() >= 2 && g.r() * g.b() > g.coupling_targets().len(),
        MutationKind::AlterReconnectEntry => g.r() >= 2 && g.editable_count() > 0,
        MutationKind::RewireBprimeConnection => g.r() >= 2 && g.editable_count() > 0,
    }
}

fn redraw_source(r: usize, old: NodeId, rng: &mut RngStream) -> NodeId {
    let x = rng.index(r - 1) as NodeId;
    if x >= old {
        x + 1
    } else {
        x
    }
}

fn random_editable(g: &NetworkGenome, rng: &mut RngStream) -> usize {
    let ids: Vec<usize> = (0..g.r()).filter(|&v| g.nodes[v].editable()).collect();
    ids[rng.index(ids.len())]
}

fn apply(g: &mut NetworkGenome, kind: MutationKind, rng: &mut RngStream) {
    let r = g.r();
    let b = g.b();
    match kind {
        MutationKind::FlipTranscriptionBit => {
            let v = rng.index(r);
            let bit = rng.index(1 << b);
            g.nodes[v].table ^= 1u64 << bit;
        }
        MutationKind::FlipStartState => {
            let v = rng.index(r);
            g.nodes[v].start = !g.nodes[v].start;
        }
        MutationKind::RewireBConnection => {
            let (u, k) = loop {
                let idx = rng.index(r * b);
                let (u, k) = (idx / b, idx % b);
                if g.nodes[u].inputs[k] != PARTNER {
                    break (u, k);
                }
            };
            let old = g.nodes[u].inputs[k];
            let new = redraw_source(r, old, rng);
            g.nodes[u].inputs[k] = new;
            shrink_reconnect(g, old as usize, rng);
            grow_reconnect(g, new as usize, rng);
        }
        MutationKind::ToggleEditable => {
            let v = rng.index(r);
            if g.nodes[v].editable() {
                g.nodes[v].grna = None;
            } else {
                let deg = g.out_degree(v as NodeId);
                g.nodes[v].grna = Some(GrnaGene::random(r, g.b_prime(), deg, rng));
            }
        }
        MutationKind::AlterReconnectEntry => {
            // A row of the editing look-up table is its gRNA output bit plus,
            // when that bit is 1, one target per out-connection. One of those
            // genes is altered.
            let v = random_editable(g, rng);
            let deg = g.out_degree(v as NodeId);
            let rows = 1usize << g.b_prime();
            let row = rng.index(rows);
            let grna = g.nodes[v].grna.as_mut().expect("editable node");
            if !grna.output(row) {
                grna.table |= 1u64 << row;
                grna.reconnect[row] = Some(random_targets(r, deg, rng));
            } else {
                let pos = rng.index(deg + 1);
                if pos == deg {
                    grna.table &= !(1u64 << row);
                    grna.reconnect[row] = None;
                } else {
                    let list = grna.reconnect[row].as_mut().expect("active row");
                    list[pos] = redraw_source(r, list[pos], rng);
                }
            }
        }
        MutationKind::RewireBprimeConnection => {
            let v = random_editable(g, rng);
            let k = rng.index(g.b_prime());
            let grna = g.nodes[v].grna.as_mut().expect("editable node");
            grna.inputs[k] = redraw_source(r, grna.inputs[k], rng);
        }
    }
}

// Out-degree of `v` just dropped by one: delete a uniform entry per list.
fn shrink_reconnect(g: &mut NetworkGenome, v: usize, rng: &mut RngStream) {
    if let Some(grna) = g.nodes[v].grna.as_mut() {
        for list in grna.reconnect.iter_mut().flatten() {
            let i = rng.index(list.len());
            list.remove(i);
        }
    }
}

// Out-degree of `v` just grew by one: append a uniform target per list.
fn grow_reconnect(g: &mut NetworkGenome, v: usize, rng: &mut RngStream) {
    let r = g.r();
    if let Some(grna) = g.nodes[v].grna.as_mut() {
        for list in grna.reconnect.iter_mut().flatten() {
            list.push(rng.index(r) as NodeId);
        }
    }
}

/// Regenerates every reconnection list uniformly at random, keeping lengths.
pub fn scramble_reconnect(g: &NetworkGenome, rng: &mut RngStream) -> NetworkGenome {
    let mut out = g.clone();
    let r = out.r();
    for node in &mut out.nodes {
        if let Some(grna) = node.grna.as_mut() {
            for list in grna.reconnect.iter_mut().flatten() {
                list.iter_mut().for_each(|t| *t = rng.index(r) as NodeId);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionReason {
    HigherFitness,
    TieFewerEditable,
    TieCoinFlip,
    Rejected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelectionOutcome {
    pub accepted: bool,
    pub reason: SelectionReason,
}

/// A scored genome: fitness and editable-node count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scored {
    pub fitness: f64,
    pub editable: usize,
}

pub fn select(parent: Scored, child: Scored, rng: &mut RngStream) -> SelectionOutcome {
    use SelectionReason::*;
    let (accepted, reason) = if child.fitness > parent.fitness {
        (true, HigherFitness)
    } else if child.fitness < parent.fitness {
        (false, Rejected)
    } else if child.editable < parent.editable {
        (true, TieFewerEditable)
    } else if child.editable > parent.editable {
        (false, Rejected)
    } else if rng.next_bool() {
        (true, TieCoinFlip)
    } else {
        (false, Rejected)
    };
    SelectionOutcome { accepted, reason }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SingleCellMode {
    Stationary,
    Nonstationary,
}

/// Settings shared by every protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub network: NetworkParams,
    pub generations: usize,
    pub cycles: usize,
    pub log_every: usize,
    /// Re-randomise reconnection lists of every offspring (control cohort).
    pub scramble: bool,
    /// Apply the all-zeros environmental input in coupled modes too.
    pub clamp_coupled: bool,
}

impl RunSettings {
    pub fn new(network: NetworkParams) -> Self {
        RunSettings {
            network,
            generations: 50_000,
            cycles: 100,
            log_every: 50,
            scramble: false,
            clamp_coupled: false,
        }
    }

    fn check(&self) -> Result<()> {
        self.network.validate()?;
        if self.cycles == 0 || self.log_every == 0 {
            return Err(Error::InvalidArgument(
                "cycles and log_every must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesPoint {
    pub generation: usize,
    pub fitness: f64,
    pub pct_grna: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub final_fitness: f64,
    pub final_pct_grna: f64,
    pub series: Vec<SeriesPoint>,
    /// Lineage parent at the end of the run (species A in coevolution).
    pub final_genome: NetworkGenome,
}

struct Recorder {
    log_every: usize,
    series: Vec<SeriesPoint>,
}

impl Recorder {
    fn record(&mut self, generation: usize, fitness: f64, g: &NetworkGenome) {
        if generation.is_multiple_of(self.log_every) {
            self.series.push(SeriesPoint {
                generation,
                fitness,
                pct_grna: g.pct_grna(),
            });
        }
    }

    fn finish(self, fitness: f64, g: &NetworkGenome) -> RunResult {
        RunResult {
            final_fitness: fitness,
            final_pct_grna: g.pct_grna(),
            series: self.series,
            final_genome: g.clone(),
        }
    }
}

struct Streams {
    init: RngStream,
    mutation: RngStream,
    editing: RngStream,
    selection: RngStream,
    scramble: RngStream,
}

impl Streams {
    fn new(run: &RngStream) -> Self {
        Streams {
            init: run.child("genome", 0),
            mutation: run.child("mutation", 0),
            editing: run.child("editing", 0),
            selection: run.child("selection", 0),
            scramble: run.child("scramble", 0),
        }
    }

    fn offspring(
        &mut self,
        parent: &NetworkGenome,
        editing: bool,
        scramble: bool,
    ) -> NetworkGenome {
        let (child, _) = mutate(parent, editing, &mut self.mutation);
        if scramble {
            scramble_reconnect(&child, &mut self.scramble)
        } else {
            child
        }
    }
}

/// Single-cell hill-climber on one (stationary) or two (non-stationary) NK
/// landscapes. `run` is the run's root stream.
pub fn evolve_rbnk(
    settings: &RunSettings,
    mode: SingleCellMode,
    landscapes: &[NkLandscape],
    run: &RngStream,
) -> Result<RunResult> {
    settings.check()?;
    let mut params = settings.network.clone();
    params.coupled = false;
    let schedule = match mode {
        SingleCellMode::Stationary => {
            if landscapes.is_empty() {
                return Err(Error::InvalidArgument(
                    "stationary mode needs a landscape".into(),
                ));
            }
            Schedule::constant(settings.cycles, Input::Zeros, 0)
        }
        SingleCellMode::Nonstationary => {
            if landscapes.len() < 2 {
                return Err(Error::InvalidArgument(
                    "non-stationary mode needs a second landscape".into(),
                ));
            }
            Schedule::switching(settings.cycles, settings.cycles / 2)
        }
    };
    let mut rs = Streams::new(run);
    let mut parent = NetworkGenome::random(&params, &mut rs.init)?;
    let mut fitness = run_episode(&parent, landscapes, &schedule, &mut rs.editing)?;
    let mut rec = Recorder {
        log_every: settings.log_every,
        series: Vec::new(),
    };
    rec.record(0, fitness, &parent);
    for gen in 1..=settings.generations {
        let child = rs.offspring(&parent, true, settings.scramble);
        let f = run_episode(&child, landscapes, &schedule, &mut rs.editing)?;
        let outcome = select(
            Scored {
                fitness,
                editable: parent.editable_count(),
            },
            Scored {
                fitness: f,
                editable: child.editable_count(),
            },
            &mut rs.selection,
        );
        if outcome.accepted {
            parent = child;
            fitness = f;
        }
        rec.record(gen, fitness, &parent);
    }
    Ok(rec.finish(fitness, &parent))
}

fn coupled_input(settings: &RunSettings) -> Input {
    if settings.clamp_coupled {
        Input::Zeros
    } else {
        Input::None
    }
}

fn check_s1(ls: &[&NkcsLandscape]) -> Result<()> {
    if ls.iter().any(|l| l.s() != 1) {
        return Err(Error::InvalidArgument(
            "two-network protocols need S = 1".into(),
        ));
    }
    Ok(())
}

/// Two species coevolving on their own NKCS landscapes. Species A can edit,
/// species B is a plain network. Metrics are reported for A.
pub fn coevolve_hetero(
    settings: &RunSettings,
    landscape_a: &NkcsLandscape,
    landscape_b: &NkcsLandscape,
    run: &RngStream,
) -> Result<RunResult> {
    settings.check()?;
    check_s1(&[landscape_a, landscape_b])?;
    let mut params = settings.network.clone();
    params.coupled = true;
    let mut plain = params.clone();
    plain.editable_fraction = 0.0;

    let mut ra = Streams::new(&run.child("species", 0));
    let mut rb = Streams::new(&run.child("species", 1));
    let mut editing = run.child("editing", 0);
    let input = coupled_input(settings);
    let cycles = settings.cycles;

    let mut a = NetworkGenome::random(&params, &mut ra.init)?;
    let mut b = NetworkGenome::random(&plain, &mut rb.init)?;
    let eval = |x: &NetworkGenome, y: &NetworkGenome, lx, ly, rng: &mut RngStream| {
        run_coupled_episode(x, y, lx, ly, cycles, 0, &input, rng).map(|e| e.first)
    };

    let mut fa = eval(&a, &b, landscape_a, landscape_b, &mut editing)?;
    let mut rec = Recorder {
        log_every: settings.log_every,
        series: Vec::new(),
    };
    rec.record(0, fa, &a);
    for gen in 1..=settings.generations {
        // (1) A against the current B
        fa = eval(&a, &b, landscape_a, landscape_b, &mut editing)?;
        // (2) mutant A against the same B
        let child = ra.offspring(&a, true, settings.scramble);
        let fc = eval(&child, &b, landscape_a, landscape_b, &mut editing)?;
        let out = select(
            Scored {
                fitness: fa,
                editable: a.editable_count(),
            },
            Scored {
                fitness: fc,
                editable: child.editable_count(),
            },
            &mut ra.selection,
        );
        if out.accepted {
            a = child;
            fa = fc;
        }
        // (3) B against the surviving A
        let fb = eval(&b, &a, landscape_b, landscape_a, &mut editing)?;
        // (4) mutant B against the same A
        let child = rb.offspring(&b, false, false);
        let fc = eval(&child, &a, landscape_b, landscape_a, &mut editing)?;
        let out = select(
            Scored {
                fitness: fb,
                editable: 0,
            },
            Scored {
                fitness: fc,
                editable: 0,
            },
            &mut rb.selection,
        );
        if out.accepted {
            b = child;
        }
        rec.record(gen, fa, &a);
    }
    Ok(rec.finish(fa, &a))
}

/// Scores a genome as a mother/daughter pair: the mother takes one extra
/// update first, then both alternate; fitness is the mean of the two cells.
pub fn evaluate_two_cell(
    g: &NetworkGenome,
    mother_landscape: &NkcsLandscape,
    daughter_landscape: &NkcsLandscape,
    cycles: usize,
    input: &Input,
    rng: &mut RngStream,
) -> Result<f64> {
    let ep = run_coupled_episode(
        g,
        g,
        mother_landscape,
        daughter_landscape,
        cycles,
        1,
        input,
        rng,
    )?;
    Ok((ep.first + ep.second) / 2.0)
}

/// One genome expressed in two coupled cells (mother and daughter).
pub fn coevolve_homog(
    settings: &RunSettings,
    landscape_1: &NkcsLandscape,
    landscape_2: &NkcsLandscape,
    run: &RngStream,
) -> Result<RunResult> {
    settings.check()?;
    check_s1(&[landscape_1, landscape_2])?;
    let mut params = settings.network.clone();
    params.coupled = true;
    let input = coupled_input(settings);
    let mut rs = Streams::new(run);
    let mut parent = NetworkGenome::random(&params, &mut rs.init)?;
    let mut fitness = evaluate_two_cell(
        &parent,
        landscape_1,
        landscape_2,
        settings.cycles,
        &input,
        &mut rs.editing,
    )?;
    let mut rec = Recorder {
        log_every: settings.log_every,
        series: Vec::new(),
    };
    rec.record(0, fitness, &parent);
    for gen in 1..=settings.generations {
        let child = rs.offspring(&parent, true, settings.scramble);
        let f = evaluate_two_cell(
            &child,
            landscape_1,
            landscape_2,
            settings.cycles,
            &input,
            &mut rs.editing,
        )?;
        let out = select(
            Scored {
                fitness,
                editable: parent.editable_count(),
            },
            Scored {
                fitness: f,
                editable: child.editable_count(),
            },
            &mut rs.selection,
        );
        if out.accepted {
            parent = child;
            fitness = f;
        }
        rec.record(gen, fitness, &parent);
    }
    Ok(rec.finish(fitness, &parent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn genome(seed: u64, b: usize, coupled: bool) -> NetworkGenome {
        let mut p = NetworkParams::new(20, 5, b);
        p.coupled = coupled;
        NetworkGenome::random(&p, &mut RngStream::from_seed(seed)).unwrap()
    }

    fn diff_nodes(a: &NetworkGenome, b: &NetworkGenome) -> Vec<usize> {
        (0..a.r())
            .filter(|&v| a.nodes()[v] != b.nodes()[v])
            .collect()
    }

    #[test]
    fn flip_start_touches_one_bit() {
        let g = genome(1, 2, false);
        let mut rng = RngStream::from_seed(2);
        let mut c = g.clone();
        apply(&mut c, MutationKind::FlipStartState, &mut rng);
        let d = diff_nodes(&g, &c);
        assert_eq!(d.len(), 1);
        let v = d[0];
        let mut restored = c.nodes()[v].clone();
        restored.start = !restored.start;
        assert_eq!(restored, g.nodes()[v]);
    }

    #[test]
    fn rewire_moves_out_degree() {
        for seed in 0..40 {
            let g = genome(seed, 3, seed % 2 == 0);
            let mut rng = RngStream::from_seed(seed + 100);
            let mut c = g.clone();
            apply(&mut c, MutationKind::RewireBConnection, &mut rng);
            let before = g.out_degrees();
            let after = c.out_degrees();
            let delta: Vec<i64> = before
                .iter()
                .zip(&after)
                .map(|(x, y)| *y as i64 - *x as i64)
                .collect();
            assert_eq!(delta.iter().filter(|&&d| d == -1).count(), 1);
            assert_eq!(delta.iter().filter(|&&d| d == 1).count(), 1);
            assert!(delta.iter().all(|&d| d.abs() <= 1));
            c.validate().unwrap();
        }
    }

    #[test]
    fn toggle_on_and_off() {
        let g = genome(3, 2, false);
        let mut rng = RngStream::from_seed(4);
        for _ in 0..50 {
            let mut c = g.clone();
            apply(&mut c, MutationKind::ToggleEditable, &mut rng);
            let d = diff_nodes(&g, &c);
            assert_eq!(d.len(), 1);
            assert_ne!(g.nodes()[d[0]].editable(), c.nodes()[d[0]].editable());
            c.validate().unwrap();
        }
    }

    #[test]
    fn kinds_are_equally_likely() {
        let g = genome(5, 2, false);
        assert!(g.editable_count() > 0);
        let mut rng = RngStream::from_seed(6);
        let mut counts: HashMap<MutationKind, usize> = HashMap::new();
        let n = 100_000;
        for _ in 0..n {
            *counts.entry(mutate(&g, true, &mut rng).1).or_default() += 1;
        }
        for k in MutationKind::ALL {
            let f = counts[&k] as f64 / n as f64;
            assert!((f - 1.0 / 6.0).abs() < 0.01, "{k:?}: {f}");
        }
    }

    #[test]
    fn editing_kinds_redrawn_when_not_applicable() {
        let mut g = genome(7, 2, false);
        g.strip_editing();
        let mut rng = RngStream::from_seed(8);
        for _ in 0..2000 {
            let (c, k) = mutate(&g, true, &mut rng);
            assert!(!matches!(
                k,
                MutationKind::AlterReconnectEntry | MutationKind::RewireBprimeConnection
            ));
            assert_ne!(c, g);
            let (_, k) = mutate(&g, false, &mut rng);
            assert!(!k.needs_editing());
        }
    }

    #[test]
    fn every_mutation_changes_exactly_one_thing() {
        let mut rng = RngStream::from_seed(9);
        for seed in 0..200 {
            let g = genome(seed, 1 + (seed as usize) % 4, seed % 3 == 0);
            let (c, _) = mutate(&g, true, &mut rng);
            assert_ne!(c, g);
            c.validate().unwrap();
        }
    }

    #[test]
    fn select_rules() {
        let mut rng = RngStream::from_seed(1);
        let s = |f, e| Scored {
            fitness: f,
            editable: e,
        };
        let o = select(s(0.5, 10), s(0.6, 99), &mut rng);
        assert_eq!(
            (o.accepted, o.reason),
            (true, SelectionReason::HigherFitness)
        );
        let o = select(s(0.5, 10), s(0.5, 9), &mut rng);
        assert_eq!(
            (o.accepted, o.reason),
            (true, SelectionReason::TieFewerEditable)
        );
        let o = select(s(0.5, 10), s(0.5, 11), &mut rng);
        assert_eq!((o.accepted, o.reason), (false, SelectionReason::Rejected));
        let o = select(s(0.5, 10), s(0.4, 0), &mut rng);
        assert!(!o.accepted);
        let mut acc = 0;
        for _ in 0..1000 {
            let o = select(s(0.5, 3), s(0.5, 3), &mut rng);
            if o.accepted {
                assert_eq!(o.reason, SelectionReason::TieCoinFlip);
                acc += 1;
            }
        }
        assert!((400..600).contains(&acc));
    }

    #[test]
    fn scramble_keeps_everything_but_targets() {
        let g = genome(11, 3, false);
        let s = scramble_reconnect(&g, &mut RngStream::from_seed(12));
        s.validate().unwrap();
        let mut changed = 0;
        for (a, b) in g.nodes().iter().zip(s.nodes()) {
            assert_eq!((a.start, a.table, &a.inputs), (b.start, b.table, &b.inputs));
            match (&a.grna, &b.grna) {
                (None, None) => {}
                (Some(x), Some(y)) => {
                    assert_eq!((x.table, &x.inputs), (y.table, &y.inputs));
                    for (p, q) in x.reconnect.iter().zip(&y.reconnect) {
                        assert_eq!(p.as_ref().map(Vec::len), q.as_ref().map(Vec::len));
                        if p != q {
                            changed += 1;
                        }
                    }
                }
                _ => panic!("editable flag changed"),
            }
        }
        assert!(changed > 0);
        let mut plain = g.clone();
        plain.strip_editing();
        assert_eq!(
            scramble_reconnect(&plain, &mut RngStream::from_seed(1)),
            plain
        );
    }

    fn settings(b: usize, gens: usize) -> RunSettings {
        let mut s = RunSettings::new(NetworkParams::new(20, 5, b));
        s.generations = gens;
        s.cycles = 30;
        s.log_every = 10;
        s
    }

    #[test]
    fn zero_generations_reports_initial_genome() {
        let l = NkLandscape::generate(5, 1, &mut RngStream::from_seed(1)).unwrap();
        let run = RngStream::from_seed(2);
        let res = evolve_rbnk(
            &settings(2, 0),
            SingleCellMode::Stationary,
            std::slice::from_ref(&l),
            &run,
        )
        .unwrap();
        assert_eq!(res.series.len(), 1);
        let mut rs = Streams::new(&run);
        let mut p = NetworkParams::new(20, 5, 2);
        p.coupled = false;
        let g = NetworkGenome::random(&p, &mut rs.init).unwrap();
        let f = run_episode(
            &g,
            &[l],
            &Schedule::constant(30, Input::Zeros, 0),
            &mut rs.editing,
        )
        .unwrap();
        assert_eq!(res.final_fitness, f);
        assert_eq!(res.final_pct_grna, g.pct_grna());
    }

    #[test]
    fn stationary_fitness_never_drops() {
        let l = NkLandscape::generate(5, 2, &mut RngStream::from_seed(3)).unwrap();
        let res = evolve_rbnk(
            &settings(2, 300),
            SingleCellMode::Stationary,
            &[l],
            &RngStream::from_seed(4),
        )
        .unwrap();
        assert_eq!(res.series.len(), 31);
        assert!(res.series.windows(2).all(|w| w[1].fitness >= w[0].fitness));
    }

    #[test]
    fn nonstationary_needs_two_landscapes() {
        let l = NkLandscape::generate(5, 2, &mut RngStream::from_seed(3)).unwrap();
        let err = evolve_rbnk(
            &settings(2, 5),
            SingleCellMode::Nonstationary,
            &[l],
            &RngStream::from_seed(4),
        );
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn hetero_rejects_s2() {
        let l2 = NkcsLandscape::generate(5, 1, 1, 2, &mut RngStream::from_seed(1)).unwrap();
        let l1 = NkcsLandscape::generate(5, 1, 1, 1, &mut RngStream::from_seed(1)).unwrap();
        assert!(coevolve_hetero(&settings(2, 3), &l1, &l2, &RngStream::from_seed(1)).is_err());
    }

    #[test]
    fn protocols_are_deterministic() {
        let mut r = RngStream::from_seed(21);
        let la = NkcsLandscape::generate(5, 1, 1, 1, &mut r).unwrap();
        let lb = NkcsLandscape::generate(5, 1, 1, 1, &mut r).unwrap();
        let s = settings(3, 40);
        let run = RngStream::from_seed(22);
        assert_eq!(
            coevolve_hetero(&s, &la, &lb, &run).unwrap(),
            coevolve_hetero(&s, &la, &lb, &run).unwrap()
        );
        assert_eq!(
            coevolve_homog(&s, &la, &lb, &run).unwrap(),
            coevolve_homog(&s, &la, &lb, &run).unwrap()
        );
    }

    #[test]
    fn homog_fitness_never_drops() {
        let mut r = RngStream::from_seed(31);
        let l1 = NkcsLandscape::generate(5, 1, 1, 1, &mut r).unwrap();
        let l2 = NkcsLandscape::generate(5, 1, 1, 1, &mut r).unwrap();
        let res = coevolve_homog(&settings(2, 200), &l1, &l2, &RngStream::from_seed(32)).unwrap();
        assert!(res.series.windows(2).all(|w| w[1].fitness >= w[0].fitness));
    }
}
