//! Boolean network genomes with optional per-node guide-RNA editing, and
//! their synchronous dynamics.
//!
//! Each node has B transcription inputs and a 2^B-row truth table. An
//! editable node also carries a gRNA element: B' inputs, a 2^B'-row gRNA
//! truth table, and for every gRNA row whose output is 1 a reconnection
//! list with one target per out-connection of the node.
//!
//! One call to [`Simulator::step`] does, in order:
//!
//! 1. overwrite nodes `0..N'` with the environmental input (if any);
//! 2. reset the wiring to the genome's wiring;
//! 3. for each editable node that is on and whose gRNA is on, move its
//!    out-connections onto the targets listed for the gRNA row that
//!    switched the gRNA on;
//! 4. resolve every node's B slots: vacated slots are refilled by new
//!    incoming edits first, remaining vacated slots read 0, and any further
//!    incoming edits are OR-folded onto a uniformly drawn slot;
//! 5. update every node and gRNA synchronously.
//!
//! Truth-table rows are indexed with slot 0 as the most significant bit.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::prng::RngStream;
use crate::{Error, Result};

pub type NodeId = u32;

/// Source id stored in a coupling slot: the slot reads a partner trait.
pub const PARTNER: NodeId = NodeId::MAX;

/// Largest supported in-degree (truth tables are packed into a `u64`).
pub const MAX_DEGREE: usize = 6;

const GENOME_MAGIC: &str = "RBNEDIT-GENOME";
const GENOME_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub r: usize,
    pub n: usize,
    pub b: usize,
    pub b_prime: usize,
    /// Number of leading nodes clamped to the environmental input (N').
    pub n_input: usize,
    /// Reserve N coupling-target nodes whose slot 0 reads a partner trait.
    pub coupled: bool,
    /// Probability that a node starts out editable.
    pub editable_fraction: f64,
}

impl NetworkParams {
    pub fn new(r: usize, n: usize, b: usize) -> Self {
        NetworkParams {
            r,
            n,
            b,
            b_prime: b,
            n_input: n,
            coupled: false,
            editable_fraction: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n == 0 || self.n > self.r {
            return bad(format!("need 1 <= N <= R (got N={}, R={})", self.n, self.r));
        }
        if self.r > PARTNER as usize {
            return bad(format!("R={} is too large", self.r));
        }
        for (name, d) in [("B", self.b), ("B'", self.b_prime)] {
            if d == 0 || d > MAX_DEGREE {
                return bad(format!("need 1 <= {name} <= {MAX_DEGREE} (got {d})"));
            }
        }
        if self.n_input > self.r {
            return bad(format!("N'={} exceeds R={}", self.n_input, self.r));
        }
        if !(0.0..=1.0).contains(&self.editable_fraction) {
            return bad("editable fraction must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// The gRNA element of an editable node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrnaGene {
    pub table: u64,
    pub inputs: Vec<NodeId>,
    /// Indexed by gRNA row; `Some` exactly for rows whose output bit is 1.
    pub reconnect: Vec<Option<Vec<NodeId>>>,
}

impl GrnaGene {
    pub fn output(&self, row: usize) -> bool {
        self.table >> row & 1 == 1
    }

    /// Random gRNA element for a node with the given out-degree.
    pub fn random(r: usize, b_prime: usize, out_degree: usize, rng: &mut RngStream) -> Self {
        let rows = 1usize << b_prime;
        let table = random_table(rows, rng);
        let inputs = (0..b_prime).map(|_| rng.index(r) as NodeId).collect();
        let reconnect = (0..rows)
            .map(|row| (table >> row & 1 == 1).then(|| random_targets(r, out_degree, rng)))
            .collect();
        GrnaGene {
            table,
            inputs,
            reconnect,
        }
    }
}

pub(crate) fn random_table(rows: usize, rng: &mut RngStream) -> u64 {
    let bits = rng.next_u64();
    if rows == 64 {
        bits
    } else {
        bits & ((1u64 << rows) - 1)
    }
}

pub(crate) fn random_targets(r: usize, len: usize, rng: &mut RngStream) -> Vec<NodeId> {
    (0..len).map(|_| rng.index(r) as NodeId).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeGene {
    pub start: bool,
    pub table: u64,
    pub inputs: Vec<NodeId>,
    pub grna: Option<GrnaGene>,
}

impl NodeGene {
    pub fn editable(&self) -> bool {
        self.grna.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkGenome {
    b: usize,
    b_prime: usize,
    n_input: usize,
    pub(crate) nodes: Vec<NodeGene>,
    trait_ids: Vec<NodeId>,
    /// j-th coupling target reads partner trait j through slot 0.
    coupling_targets: Vec<NodeId>,
}

impl NetworkGenome {
    pub fn random(params: &NetworkParams, rng: &mut RngStream) -> Result<Self> {
        params.validate()?;
        let r = params.r;
        let mut nodes: Vec<NodeGene> = (0..r)
            .map(|_| NodeGene {
                start: rng.next_bool(),
                table: random_table(1 << params.b, rng),
                inputs: (0..params.b).map(|_| rng.index(r) as NodeId).collect(),
                grna: None,
            })
            .collect();
        let all: Vec<usize> = (0..r).collect();
        let trait_ids = rng
            .sample_distinct(&all, params.n)
            .into_iter()
            .map(|x| x as NodeId)
            .collect();
        let coupling_targets: Vec<NodeId> = if params.coupled {
            rng.sample_distinct(&all, params.n)
                .into_iter()
                .map(|x| x as NodeId)
                .collect()
        } else {
            Vec::new()
        };
        for &t in &coupling_targets {
            nodes[t as usize].inputs[0] = PARTNER;
        }
        let mut g = NetworkGenome {
            b: params.b,
            b_prime: params.b_prime,
            n_input: params.n_input,
            nodes,
            trait_ids,
            coupling_targets,
        };
        let degrees = g.out_degrees();
        for (node, &deg) in g.nodes.iter_mut().zip(&degrees) {
            if rng.chance(params.editable_fraction) {
                node.grna = Some(GrnaGene::random(r, params.b_prime, deg, rng));
            }
        }
        Ok(g)
    }

    /// Assembles a genome from explicit parts and checks every invariant.
    pub fn from_parts(
        b: usize,
        b_prime: usize,
        n_input: usize,
        nodes: Vec<NodeGene>,
        trait_ids: Vec<NodeId>,
        coupling_targets: Vec<NodeId>,
    ) -> Result<Self> {
        let g = NetworkGenome {
            b,
            b_prime,
            n_input,
            nodes,
            trait_ids,
            coupling_targets,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn r(&self) -> usize {
        self.nodes.len()
    }

    pub fn n(&self) -> usize {
        self.trait_ids.len()
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn b_prime(&self) -> usize {
        self.b_prime
    }

    pub fn n_input(&self) -> usize {
        self.n_input
    }

    pub fn nodes(&self) -> &[NodeGene] {
        &self.nodes
    }

    pub fn trait_ids(&self) -> &[NodeId] {
        &self.trait_ids
    }

    pub fn coupling_targets(&self) -> &[NodeId] {
        &self.coupling_targets
    }

    pub fn is_coupled(&self) -> bool {
        !self.coupling_targets.is_empty()
    }

    pub fn editable_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.editable()).count()
    }

    /// Fraction of nodes that carry a gRNA element.
    pub fn pct_grna(&self) -> f64 {
        self.editable_count() as f64 / self.r() as f64
    }

    /// Number of intra-network input slots whose source is `v`.
    pub fn out_degree(&self, v: NodeId) -> usize {
        self.nodes
            .iter()
            .flat_map(|n| &n.inputs)
            .filter(|&&s| s == v)
            .count()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.r()];
        for s in self.nodes.iter().flat_map(|n| &n.inputs) {
            if *s != PARTNER {
                d[*s as usize] += 1;
            }
        }
        d
    }

    /// Drops every gRNA element.
    pub fn strip_editing(&mut self) {
        for n in &mut self.nodes {
            n.grna = None;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.r();
        let fail = |m: String| Err(Error::Invariant(m));
        if self.b == 0 || self.b > MAX_DEGREE || self.b_prime == 0 || self.b_prime > MAX_DEGREE {
            return fail(format!(
                "degrees out of range: B={} B'={}",
                self.b, self.b_prime
            ));
        }
        if self.trait_ids.is_empty() || self.trait_ids.len() > r {
            return fail("bad trait count".into());
        }
        if self.n_input > r {
            return fail("N' exceeds R".into());
        }
        for ids in [&self.trait_ids, &self.coupling_targets] {
            for (i, &t) in ids.iter().enumerate() {
                if t as usize >= r || ids[..i].contains(&t) {
                    return fail(format!("bad node id list {ids:?}"));
                }
            }
        }
        if self.is_coupled() && self.coupling_targets.len() != self.trait_ids.len() {
            return fail("coupling target count must equal N".into());
        }
        let degrees = self.out_degrees();
        for (v, node) in self.nodes.iter().enumerate() {
            if node.inputs.len() != self.b {
                return fail(format!("node {v} has {} inputs", node.inputs.len()));
            }
            let coupled = self.coupling_targets.contains(&(v as NodeId));
            for (k, &s) in node.inputs.iter().enumerate() {
                let want_partner = coupled && k == 0;
                if (s == PARTNER) != want_partner || (s != PARTNER && s as usize >= r) {
                    return fail(format!("node {v} slot {k} has bad source {s}"));
                }
            }
            if self.b < 6 && node.table >> (1u32 << self.b) != 0 {
                return fail(format!("node {v} truth table has stray bits"));
            }
            if let Some(g) = &node.grna {
                let rows = 1usize << self.b_prime;
                if g.inputs.len() != self.b_prime || g.inputs.iter().any(|&s| s as usize >= r) {
                    return fail(format!("node {v} has bad gRNA inputs"));
                }
                if g.reconnect.len() != rows {
                    return fail(format!("node {v} reconnect table has wrong row count"));
                }
                if self.b_prime < 6 && g.table >> rows != 0 {
                    return fail(format!("node {v} gRNA table has stray bits"));
                }
                for (row, entry) in g.reconnect.iter().enumerate() {
                    match entry {
                        Some(list) if g.output(row) => {
                            if list.len() != degrees[v] {
                                return fail(format!(
                                    "node {v} row {row}: reconnect list has {} entries, out-degree is {}",
                                    list.len(),
                                    degrees[v]
                                ));
                            }
                            if list.iter().any(|&t| t as usize >= r) {
                                return fail(format!("node {v} row {row}: bad target"));
                            }
                        }
                        None if !g.output(row) => {}
                        _ => return fail(format!("node {v} row {row}: entry/output mismatch")),
                    }
                }
            }
        }
        Ok(())
    }

    /// Initial state: genome start bits, gRNA states from the start bits.
    pub fn initial_state(&self) -> NetworkState {
        let nodes: Vec<bool> = self.nodes.iter().map(|n| n.start).collect();
        let mut st = NetworkState {
            grna: vec![false; nodes.len()],
            grna_rows: vec![0; nodes.len()],
            nodes,
        };
        for (v, node) in self.nodes.iter().enumerate() {
            if let Some(g) = &node.grna {
                let row = row_index(&st.nodes, &g.inputs);
                st.grna_rows[v] = row as u32;
                st.grna[v] = g.output(row);
            }
        }
        st
    }

    /// Trait node states of `st`, in trait order.
    pub fn traits_of(&self, st: &NetworkState) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.n());
        self.gather_traits(st, &mut out);
        out
    }

    pub(crate) fn gather_traits(&self, st: &NetworkState, out: &mut Vec<bool>) {
        out.clear();
        out.extend(self.trait_ids.iter().map(|&t| st.nodes[t as usize]));
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let mut s = format!(
            "{GENOME_MAGIC} {GENOME_VERSION}\nR={} N={} B={} Bp={} Nin={}\ntraits {}\ncoupling {}\n",
            self.r(),
            self.n(),
            self.b,
            self.b_prime,
            self.n_input,
            join_ids(&self.trait_ids),
            if self.is_coupled() {
                join_ids(&self.coupling_targets)
            } else {
                "-".into()
            }
        );
        for node in &self.nodes {
            let _ = write!(
                s,
                "{} {:x} {}",
                node.start as u8,
                node.table,
                join_ids(&node.inputs)
            );
            match &node.grna {
                None => s.push_str(" 0 - - -"),
                Some(g) => {
                    let rows: Vec<String> = g
                        .reconnect
                        .iter()
                        .enumerate()
                        .filter_map(|(row, e)| e.as_ref().map(|l| format!("{row}:{}", join_ids(l))))
                        .collect();
                    let rows = if rows.is_empty() {
                        "-".into()
                    } else {
                        rows.join(";")
                    };
                    let _ = write!(s, " 1 {:x} {} {}", g.table, join_ids(&g.inputs), rows);
                }
            }
            s.push('\n');
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
        let perr = |line: usize, m: &str| Error::Parse {
            line,
            column: 1,
            message: m.to_string(),
        };
        if lines.first().map(String::as_str) != Some(&format!("{GENOME_MAGIC} {GENOME_VERSION}")) {
            return Err(perr(1, "missing genome header"));
        }
        let dims = lines.get(1).ok_or_else(|| perr(2, "missing dimensions"))?;
        let mut get = {
            let mut it = dims.split_whitespace();
            move |name: &str| -> Result<usize> {
                it.next()
                    .and_then(|p| p.strip_prefix(name))
                    .and_then(|p| p.strip_prefix('='))
                    .and_then(|p| p.parse().ok())
                    .ok_or_else(|| perr(2, &format!("missing {name}")))
            }
        };
        let (r, _n, b, b_prime, n_input) =
            (get("R")?, get("N")?, get("B")?, get("Bp")?, get("Nin")?);
        let traits = lines
            .get(2)
            .and_then(|l| l.strip_prefix("traits "))
            .ok_or_else(|| perr(3, "missing traits line"))?;
        let trait_ids = parse_ids(traits).ok_or_else(|| perr(3, "bad trait ids"))?;
        let coupling = lines
            .get(3)
            .and_then(|l| l.strip_prefix("coupling "))
            .ok_or_else(|| perr(4, "missing coupling line"))?;
        let coupling_targets = if coupling == "-" {
            Vec::new()
        } else {
            parse_ids(coupling).ok_or_else(|| perr(4, "bad coupling ids"))?
        };
        let mut nodes = Vec::with_capacity(r);
        for v in 0..r {
            let lineno = v + 5;
            let line = lines
                .get(v + 4)
                .ok_or_else(|| perr(lineno, "truncated genome"))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 7 {
                return Err(perr(lineno, "expected 7 fields"));
            }
            let bad = || perr(lineno, "malformed node line");
            let start = match f[0] {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            };
            let table = u64::from_str_radix(f[1], 16).map_err(|_| bad())?;
            let inputs = parse_ids(f[2]).ok_or_else(bad)?;
            let grna = match f[3] {
                "0" => None,
                "1" => {
                    let table = u64::from_str_radix(f[4], 16).map_err(|_| bad())?;
                    let inputs = parse_ids(f[5]).ok_or_else(bad)?;
                    let mut reconnect = vec![None; 1 << b_prime];
                    if f[6] != "-" {
                        for entry in f[6].split(';') {
                            let (row, ids) = entry.split_once(':').ok_or_else(bad)?;
                            let row: usize = row.parse().map_err(|_| bad())?;
                            let slot = reconnect.get_mut(row).ok_or_else(bad)?;
                            *slot = Some(parse_ids(ids).ok_or_else(bad)?);
                        }
                    }
                    Some(GrnaGene {
                        table,
                        inputs,
                        reconnect,
                    })
                }
                _ => return Err(bad()),
            };
            nodes.push(NodeGene {
                start,
                table,
                inputs,
                grna,
            });
        }
        NetworkGenome::from_parts(b, b_prime, n_input, nodes, trait_ids, coupling_targets)
    }
}

fn join_ids(ids: &[NodeId]) -> String {
    if ids.is_empty() {
        return String::new();
    }
    ids.iter()
        .map(|&x| {
            if x == PARTNER {
                "P".to_string()
            } else {
                x.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_ids(s: &str) -> Option<Vec<NodeId>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',')
        .map(|x| {
            if x == "P" {
                Some(PARTNER)
            } else {
                x.parse().ok()
            }
        })
        .collect()
}

#[inline]
fn row_index(states: &[bool], inputs: &[NodeId]) -> usize {
    inputs
        .iter()
        .fold(0usize, |acc, &s| acc << 1 | states[s as usize] as usize)
}

/// Node and gRNA states between cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkState {
    pub nodes: Vec<bool>,
    pub grna: Vec<bool>,
    /// gRNA row that produced the current gRNA state (editable nodes only).
    pub grna_rows: Vec<u32>,
}

/// What one input slot presented to a truth table during a cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlotSource {
    Node(NodeId),
    /// Partner trait index.
    Partner(usize),
    /// Source was edited away and nothing replaced it; reads 0.
    Missing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectiveSlot {
    pub source: SlotSource,
    /// Extra edited-in sources OR-combined into this slot.
    pub folded: Vec<NodeId>,
}

/// Per-node effective wiring used during one cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectiveWiring {
    pub slots: Vec<Vec<EffectiveSlot>>,
}

impl EffectiveWiring {
    /// Sources (primary and folded) that fed node `v` this cycle.
    pub fn sources_of(&self, v: usize) -> Vec<NodeId> {
        let mut out = Vec::new();
        for s in &self.slots[v] {
            if let SlotSource::Node(x) = s.source {
                out.push(x);
            }
            out.extend(&s.folded);
        }
        out
    }
}

/// Precomputed adjacency plus scratch buffers for stepping one genome.
pub struct Simulator<'g> {
    genome: &'g NetworkGenome,
    /// For each node, the (target node, slot) pairs it feeds.
    out_slots: Vec<Vec<(u32, u8)>>,
    /// For each node, the partner trait its slot 0 reads.
    partner_of: Vec<Option<u32>>,
    editable: Vec<u32>,
    // scratch
    vals: Vec<bool>,
    vacated: Vec<bool>,
    incoming: Vec<Vec<NodeId>>,
    touched: Vec<u32>,
    triggered: Vec<u32>,
    next: Vec<bool>,
}

impl<'g> Simulator<'g> {
    pub fn new(genome: &'g NetworkGenome) -> Self {
        let r = genome.r();
        let b = genome.b;
        let mut out_slots = vec![Vec::new(); r];
        for (u, node) in genome.nodes.iter().enumerate() {
            for (k, &s) in node.inputs.iter().enumerate() {
                if s != PARTNER {
                    out_slots[s as usize].push((u as u32, k as u8));
                }
            }
        }
        let mut partner_of = vec![None; r];
        for (j, &t) in genome.coupling_targets.iter().enumerate() {
            partner_of[t as usize] = Some(j as u32);
        }
        let editable = (0..r as u32)
            .filter(|&v| genome.nodes[v as usize].editable())
            .collect();
        Simulator {
            genome,
            out_slots,
            partner_of,
            editable,
            vals: vec![false; r * b],
            vacated: vec![false; r * b],
            incoming: vec![Vec::new(); r],
            touched: Vec::new(),
            triggered: Vec::new(),
            next: vec![false; r],
        }
    }

    pub fn genome(&self) -> &NetworkGenome {
        self.genome
    }

    /// Advances `st` by one cycle.
    ///
    /// `input` must be given iff clamping is wanted (length N'); `external`
    /// must be given iff the genome is coupled (length N).
    pub fn step(
        &mut self,
        st: &mut NetworkState,
        input: Option<&[bool]>,
        external: Option<&[bool]>,
        rng: &mut RngStream,
    ) -> Result<()> {
        self.step_inner(st, input, external, rng, None)
    }

    /// Like [`step`](Self::step) but also reports the wiring used.
    pub fn step_traced(
        &mut self,
        st: &mut NetworkState,
        input: Option<&[bool]>,
        external: Option<&[bool]>,
        rng: &mut RngStream,
    ) -> Result<EffectiveWiring> {
        let mut w = EffectiveWiring { slots: Vec::new() };
        self.step_inner(st, input, external, rng, Some(&mut w))?;
        Ok(w)
    }

    fn step_inner(
        &mut self,
        st: &mut NetworkState,
        input: Option<&[bool]>,
        external: Option<&[bool]>,
        rng: &mut RngStream,
        mut trace: Option<&mut EffectiveWiring>,
    ) -> Result<()> {
        let g = self.genome;
        let r = g.r();
        let b = g.b;
        if st.nodes.len() != r {
            return Err(Error::Invariant("state size does not match genome".into()));
        }
        match (g.is_coupled(), external) {
            (true, Some(e)) if e.len() == g.n() => {}
            (false, None) => {}
            _ => {
                return Err(Error::InvalidArgument(
                    "external traits do not match coupling".into(),
                ))
            }
        }

        // (1) clamp
        if let Some(inp) = input {
            if inp.len() != g.n_input {
                return Err(Error::InvalidArgument(format!(
                    "input has {} bits, expected {}",
                    inp.len(),
                    g.n_input
                )));
            }
            st.nodes[..inp.len()].copy_from_slice(inp);
        }

        // (2) genome wiring
        for (u, node) in g.nodes.iter().enumerate() {
            for (k, &s) in node.inputs.iter().enumerate() {
                self.vals[u * b + k] = if s == PARTNER {
                    let j = self.partner_of[u].expect("coupling slot without partner") as usize;
                    external.is_some_and(|e| e[j])
                } else {
                    st.nodes[s as usize]
                };
            }
        }
        if let Some(w) = trace.as_deref_mut() {
            w.slots = g
                .nodes
                .iter()
                .enumerate()
                .map(|(u, node)| {
                    node.inputs
                        .iter()
                        .map(|&s| EffectiveSlot {
                            source: if s == PARTNER {
                                SlotSource::Partner(self.partner_of[u].unwrap() as usize)
                            } else {
                                SlotSource::Node(s)
                            },
                            folded: Vec::new(),
                        })
                        .collect()
                })
                .collect();
        }

        // (3) editing triggers
        self.triggered.clear();
        for &v in &self.editable {
            if st.nodes[v as usize] && st.grna[v as usize] {
                self.triggered.push(v);
            }
        }

        // (4) resolve edited wiring
        if !self.triggered.is_empty() {
            for &v in &self.triggered {
                for &(u, k) in &self.out_slots[v as usize] {
                    let idx = u as usize * b + k as usize;
                    self.vacated[idx] = true;
                    self.vals[idx] = false;
                }
                let gr = g.nodes[v as usize].grna.as_ref().expect("editable node");
                let row = st.grna_rows[v as usize] as usize;
                let targets = gr.reconnect[row].as_ref().ok_or_else(|| {
                    Error::Invariant(format!(
                        "node {v}: gRNA on but row {row} has no reconnect entry"
                    ))
                })?;
                if targets.len() != self.out_slots[v as usize].len() {
                    return Err(Error::Invariant(format!(
                        "node {v}: reconnect list length {} != out-degree {}",
                        targets.len(),
                        self.out_slots[v as usize].len()
                    )));
                }
                for &t in targets {
                    if self.incoming[t as usize].is_empty() {
                        self.touched.push(t);
                    }
                    self.incoming[t as usize].push(v);
                }
            }
            if let Some(w) = trace.as_deref_mut() {
                for (u, slots) in w.slots.iter_mut().enumerate() {
                    for (k, slot) in slots.iter_mut().enumerate() {
                        if self.vacated[u * b + k] {
                            slot.source = SlotSource::Missing;
                        }
                    }
                }
            }
            // deterministic order regardless of trigger order
            self.touched.sort_unstable();
            for &t in &self.touched {
                let t = t as usize;
                let mut pending = self.incoming[t].iter().copied();
                for k in 0..b {
                    if !self.vacated[t * b + k] {
                        continue;
                    }
                    match pending.next() {
                        Some(src) => {
                            self.vals[t * b + k] = st.nodes[src as usize];
                            if let Some(w) = trace.as_deref_mut() {
                                w.slots[t][k].source = SlotSource::Node(src);
                            }
                        }
                        None => break,
                    }
                }
                for src in pending {
                    let k = rng.index(b);
                    self.vals[t * b + k] |= st.nodes[src as usize];
                    if let Some(w) = trace.as_deref_mut() {
                        w.slots[t][k].folded.push(src);
                    }
                }
            }
            for &t in &self.touched {
                self.incoming[t as usize].clear();
            }
            self.touched.clear();
            for &v in &self.triggered {
                for &(u, k) in &self.out_slots[v as usize] {
                    self.vacated[u as usize * b + k as usize] = false;
                }
            }
        }

        // (5) synchronous update
        for (u, node) in g.nodes.iter().enumerate() {
            let row = self.vals[u * b..(u + 1) * b]
                .iter()
                .fold(0usize, |acc, &x| acc << 1 | x as usize);
            self.next[u] = node.table >> row & 1 == 1;
        }
        for &v in &self.editable {
            let gr = g.nodes[v as usize].grna.as_ref().expect("editable node");
            let row = row_index(&st.nodes, &gr.inputs);
            st.grna_rows[v as usize] = row as u32;
            st.grna[v as usize] = gr.output(row);
        }
        if let Some(inp) = input {
            // clamped nodes keep showing the environment
            self.next[..inp.len()].copy_from_slice(inp);
        }
        st.nodes.copy_from_slice(&self.next);
        Ok(())
    }
}

/// Environmental input applied during a cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    None,
    Zeros,
    Ones,
}

impl Input {
    fn bits(&self, n_input: usize) -> Option<Vec<bool>> {
        match self {
            Input::None => None,
            Input::Zeros => Some(vec![false; n_input]),
            Input::Ones => Some(vec![true; n_input]),
        }
    }
}

/// Per-cycle (input, landscape index) pairs for one lifetime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub cycles: Vec<(Input, usize)>,
}

impl Schedule {
    pub fn constant(cycles: usize, input: Input, landscape: usize) -> Self {
        Schedule {
            cycles: vec![(input, landscape); cycles],
        }
    }

    /// Zero input on landscape 0 for the first `switch_after` cycles, then
    /// all-ones input on landscape 1.
    pub fn switching(cycles: usize, switch_after: usize) -> Self {
        Schedule {
            cycles: (0..cycles)
                .map(|c| {
                    if c < switch_after {
                        (Input::Zeros, 0)
                    } else {
                        (Input::Ones, 1)
                    }
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub mean_fitness: f64,
    /// Per-cycle fitness, present when tracing.
    pub fitness: Vec<f64>,
    /// Per-cycle trait states, present when tracing.
    pub traits: Vec<Vec<bool>>,
}

/// Runs one single-cell lifetime and returns the mean per-cycle fitness.
pub fn run_episode(
    genome: &NetworkGenome,
    landscapes: &[crate::NkLandscape],
    schedule: &Schedule,
    rng: &mut RngStream,
) -> Result<f64> {
    episode_inner(genome, landscapes, schedule, rng, false).map(|e| e.mean_fitness)
}

/// [`run_episode`] keeping the per-cycle trait trace.
pub fn run_episode_traced(
    genome: &NetworkGenome,
    landscapes: &[crate::NkLandscape],
    schedule: &Schedule,
    rng: &mut RngStream,
) -> Result<Episode> {
    episode_inner(genome, landscapes, schedule, rng, true)
}

fn episode_inner(
    genome: &NetworkGenome,
    landscapes: &[crate::NkLandscape],
    schedule: &Schedule,
    rng: &mut RngStream,
    traced: bool,
) -> Result<Episode> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument(
            "episode needs at least one cycle".into(),
        ));
    }
    if genome.is_coupled() {
        return Err(Error::InvalidArgument(
            "coupled genome needs a partner".into(),
        ));
    }
    for (_, l) in &schedule.cycles {
        match landscapes.get(*l) {
            Some(ls) if ls.n() == genome.n() => {}
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "schedule names bad landscape {l}"
                )))
            }
        }
    }
    let mut sim = Simulator::new(genome);
    let mut st = genome.initial_state();
    let mut traits = Vec::with_capacity(genome.n());
    let mut ep = Episode {
        mean_fitness: 0.0,
        fitness: Vec::new(),
        traits: Vec::new(),
    };
    let mut sum = 0.0;
    let zeros = vec![false; genome.n_input];
    let ones = vec![true; genome.n_input];
    for (input, l) in &schedule.cycles {
        let inp = match input {
            Input::None => None,
            Input::Zeros => Some(&zeros[..]),
            Input::Ones => Some(&ones[..]),
        };
        sim.step(&mut st, inp, None, rng)?;
        genome.gather_traits(&st, &mut traits);
        let f = landscapes[*l].evaluate(&traits);
        sum += f;
        if traced {
            ep.fitness.push(f);
            ep.traits.push(traits.clone());
        }
    }
    ep.mean_fitness = sum / schedule.len() as f64;
    Ok(ep)
}

/// Result of a coupled two-network lifetime.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledEpisode {
    pub first: f64,
    pub second: f64,
}

/// Two coupled networks updating in turn for `cycles` cycles.
///
/// `first_pre_steps` extra updates of `first` happen before the alternation
/// starts (the mother cell's head start). Each cycle `first` updates reading
/// `second`'s trait states, then `second` updates reading `first`'s fresh
/// trait states, then both are scored on their own NKCS landscape.
#[allow(clippy::too_many_arguments)]
pub fn run_coupled_episode(
    first: &NetworkGenome,
    second: &NetworkGenome,
    first_landscape: &crate::NkcsLandscape,
    second_landscape: &crate::NkcsLandscape,
    cycles: usize,
    first_pre_steps: usize,
    input: &Input,
    rng: &mut RngStream,
) -> Result<CoupledEpisode> {
    coupled_inner(
        first,
        second,
        first_landscape,
        second_landscape,
        cycles,
        first_pre_steps,
        input,
        rng,
        None,
    )
}

/// Trace of a coupled lifetime: the state pair after every update event.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoupledTrace {
    pub first: Vec<NetworkState>,
    pub second: Vec<NetworkState>,
}

#[allow(clippy::too_many_arguments)]
pub fn run_coupled_episode_traced(
    first: &NetworkGenome,
    second: &NetworkGenome,
    first_landscape: &crate::NkcsLandscape,
    second_landscape: &crate::NkcsLandscape,
    cycles: usize,
    first_pre_steps: usize,
    input: &Input,
    rng: &mut RngStream,
) -> Result<(CoupledEpisode, CoupledTrace)> {
    let mut trace = CoupledTrace::default();
    let ep = coupled_inner(
        first,
        second,
        first_landscape,
        second_landscape,
        cycles,
        first_pre_steps,
        input,
        rng,
        Some(&mut trace),
    )?;
    Ok((ep, trace))
}

#[allow(clippy::too_many_arguments)]
fn coupled_inner(
    first: &NetworkGenome,
    second: &NetworkGenome,
    first_landscape: &crate::NkcsLandscape,
    second_landscape: &crate::NkcsLandscape,
    cycles: usize,
    first_pre_steps: usize,
    input: &Input,
    rng: &mut RngStream,
    mut trace: Option<&mut CoupledTrace>,
) -> Result<CoupledEpisode> {
    if cycles == 0 {
        return Err(Error::InvalidArgument(
            "episode needs at least one cycle".into(),
        ));
    }
    if !first.is_coupled() || !second.is_coupled() || first.n() != second.n() {
        return Err(Error::InvalidArgument(
            "coupled episode needs two coupled genomes of equal N".into(),
        ));
    }
    for l in [first_landscape, second_landscape] {
        if l.s() != 1 || l.n() != first.n() {
            return Err(Error::InvalidArgument(
                "coupled episode needs S=1 landscapes of matching N".into(),
            ));
        }
    }
    let in_a = input.bits(first.n_input);
    let in_b = input.bits(second.n_input);
    let mut sim_a = Simulator::new(first);
    let mut sim_b = Simulator::new(second);
    let mut st_a = first.initial_state();
    let mut st_b = second.initial_state();
    let mut tr_a = first.traits_of(&st_a);
    let mut tr_b = second.traits_of(&st_b);
    for _ in 0..first_pre_steps {
        sim_a.step(&mut st_a, in_a.as_deref(), Some(&tr_b), rng)?;
        first.gather_traits(&st_a, &mut tr_a);
        if let Some(t) = trace.as_deref_mut() {
            t.first.push(st_a.clone());
            t.second.push(st_b.clone());
        }
    }
    let (mut sum_a, mut sum_b) = (0.0, 0.0);
    for _ in 0..cycles {
        sim_a.step(&mut st_a, in_a.as_deref(), Some(&tr_b), rng)?;
        first.gather_traits(&st_a, &mut tr_a);
        sim_b.step(&mut st_b, in_b.as_deref(), Some(&tr_a), rng)?;
        second.gather_traits(&st_b, &mut tr_b);
        sum_a += first_landscape.evaluate_unchecked(&tr_a, &[&tr_b]);
        sum_b += second_landscape.evaluate_unchecked(&tr_b, &[&tr_a]);
        if let Some(t) = trace.as_deref_mut() {
            t.first.push(st_a.clone());
            t.second.push(st_b.clone());
        }
    }
    Ok(CoupledEpisode {
        first: sum_a / cycles as f64,
        second: sum_b / cycles as f64,
    })
}
