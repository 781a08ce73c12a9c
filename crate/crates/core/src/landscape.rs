//! NK and NKCS fitness landscapes.
//!
//! A trait's lookup key is built most-significant bit first: the trait's own
//! bit, then its K own-genome neighbours in stored order, then for each
//! partner in order its C partner-trait neighbours in stored order.
//! Tables are fully materialised; entries are uniform in `[0, 1)`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::prng::RngStream;
use crate::{Error, Result};

const MAGIC: &str = "RBNEDIT-LANDSCAPE";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct NkLandscape {
    n: usize,
    k: usize,
    neighbors: Vec<Vec<usize>>,
    tables: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NkcsLandscape {
    n: usize,
    k: usize,
    c: usize,
    s: usize,
    neighbors: Vec<Vec<usize>>,
    /// `[trait][partner]` -> C partner-trait indices.
    partner_neighbors: Vec<Vec<Vec<usize>>>,
    tables: Vec<Vec<f64>>,
}

fn draw_neighbors(n: usize, k: usize, rng: &mut RngStream) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| {
            let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            rng.sample_distinct(&others, k)
        })
        .collect()
}

fn draw_tables(n: usize, bits: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..1usize << bits).map(|_| rng.next_unit()).collect())
        .collect()
}

#[inline]
fn push_bit(key: usize, bit: bool) -> usize {
    (key << 1) | bit as usize
}

impl NkLandscape {
    pub fn generate(n: usize, k: usize, rng: &mut RngStream) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("NK landscape needs N >= 1".into()));
        }
        if k >= n {
            return Err(Error::InvalidArgument(format!(
                "NK landscape needs K < N (got N={n}, K={k})"
            )));
        }
        let neighbors = draw_neighbors(n, k, rng);
        let tables = draw_tables(n, k + 1, rng);
        Ok(NkLandscape {
            n,
            k,
            neighbors,
            tables,
        })
    }

    /// Builds a landscape from explicit parts, validating every invariant.
    pub fn from_parts(k: usize, neighbors: Vec<Vec<usize>>, tables: Vec<Vec<f64>>) -> Result<Self> {
        let n = neighbors.len();
        if n == 0 || tables.len() != n {
            return Err(Error::InvalidArgument(
                "neighbor/table count mismatch".into(),
            ));
        }
        for (i, nb) in neighbors.iter().enumerate() {
            check_neighbor_list(nb, k, n, Some(i))?;
        }
        check_tables(&tables, k + 1)?;
        Ok(NkLandscape {
            n,
            k,
            neighbors,
            tables,
        })
    }

    /// A landscape whose every table entry equals `value`.
    pub fn flat(n: usize, k: usize, value: f64, rng: &mut RngStream) -> Result<Self> {
        let mut l = Self::generate(n, k, rng)?;
        for t in &mut l.tables {
            t.iter_mut().for_each(|x| *x = value);
        }
        Ok(l)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn neighbors(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    pub fn tables_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.tables
    }

    /// Contribution of trait `i`.
    pub fn contribution(&self, traits: &[bool], i: usize) -> f64 {
        let mut key = push_bit(0, traits[i]);
        for &j in &self.neighbors[i] {
            key = push_bit(key, traits[j]);
        }
        self.tables[i][key]
    }

    /// Mean contribution over all N traits.
    pub fn evaluate(&self, traits: &[bool]) -> f64 {
        debug_assert_eq!(traits.len(), self.n);
        let sum: f64 = (0..self.n).map(|i| self.contribution(traits, i)).sum();
        sum / self.n as f64
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let mut s = format!("{MAGIC} {VERSION}\nNK N={} K={} C=0 S=0\n", self.n, self.k);
        for i in 0..self.n {
            write_trait(&mut s, &self.neighbors[i], &[], &self.tables[i]);
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let raw = read_landscape(r)?;
        if raw.kind != "NK" {
            return Err(parse_err(2, 1, "expected an NK landscape"));
        }
        NkLandscape::from_parts(raw.k, raw.neighbors, raw.tables)
    }
}

impl NkcsLandscape {
    pub fn generate(n: usize, k: usize, c: usize, s: usize, rng: &mut RngStream) -> Result<Self> {
        if n == 0 || k >= n {
            return Err(Error::InvalidArgument(format!(
                "NKCS landscape needs 0 <= K < N (got N={n}, K={k})"
            )));
        }
        if c == 0 || c > n {
            return Err(Error::InvalidArgument(format!(
                "NKCS landscape needs 1 <= C <= N (got C={c})"
            )));
        }
        if s == 0 {
            return Err(Error::InvalidArgument("NKCS landscape needs S >= 1".into()));
        }
        let bits = k + 1 + c * s;
        if bits > 30 {
            return Err(Error::InvalidArgument(format!(
                "table of 2^{bits} entries is too large"
            )));
        }
        let neighbors = draw_neighbors(n, k, rng);
        let all: Vec<usize> = (0..n).collect();
        let partner_neighbors = (0..n)
            .map(|_| (0..s).map(|_| rng.sample_distinct(&all, c)).collect())
            .collect();
        let tables = draw_tables(n, bits, rng);
        Ok(NkcsLandscape {
            n,
            k,
            c,
            s,
            neighbors,
            partner_neighbors,
            tables,
        })
    }

    pub fn from_parts(
        k: usize,
        c: usize,
        neighbors: Vec<Vec<usize>>,
        partner_neighbors: Vec<Vec<Vec<usize>>>,
        tables: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = neighbors.len();
        if n == 0 || tables.len() != n || partner_neighbors.len() != n {
            return Err(Error::InvalidArgument(
                "per-trait list count mismatch".into(),
            ));
        }
        let s = partner_neighbors[0].len();
        if s == 0 || c == 0 {
            return Err(Error::InvalidArgument(
                "NKCS landscape needs C, S >= 1".into(),
            ));
        }
        for i in 0..n {
            check_neighbor_list(&neighbors[i], k, n, Some(i))?;
            if partner_neighbors[i].len() != s {
                return Err(Error::InvalidArgument(format!(
                    "trait {i}: partner count differs"
                )));
            }
            for pn in &partner_neighbors[i] {
                check_neighbor_list(pn, c, n, None)?;
            }
        }
        check_tables(&tables, k + 1 + c * s)?;
        Ok(NkcsLandscape {
            n,
            k,
            c,
            s,
            neighbors,
            partner_neighbors,
            tables,
        })
    }

    /// Lifts an NK landscape to one whose lookups ignore every partner bit.
    pub fn ignoring_partners(
        nk: &NkLandscape,
        c: usize,
        s: usize,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let mut l = Self::generate(nk.n, nk.k, c, s, rng)?;
        l.neighbors = nk.neighbors.clone();
        let shift = c * s;
        for (i, t) in l.tables.iter_mut().enumerate() {
            for (key, x) in t.iter_mut().enumerate() {
                *x = nk.tables[i][key >> shift];
            }
        }
        Ok(l)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn neighbors(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    pub fn partner_neighbors(&self) -> &[Vec<Vec<usize>>] {
        &self.partner_neighbors
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    pub fn tables_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.tables
    }

    /// Mean contribution over all N traits given the S partners' traits.
    pub fn evaluate(&self, own: &[bool], partners: &[&[bool]]) -> Result<f64> {
        if partners.len() != self.s {
            return Err(Error::InvalidArgument(format!(
                "expected {} partner vectors, got {}",
                self.s,
                partners.len()
            )));
        }
        Ok(self.evaluate_unchecked(own, partners))
    }

    pub(crate) fn evaluate_unchecked(&self, own: &[bool], partners: &[&[bool]]) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.n {
            let mut key = push_bit(0, own[i]);
            for &j in &self.neighbors[i] {
                key = push_bit(key, own[j]);
            }
            for (p, nb) in partners.iter().zip(&self.partner_neighbors[i]) {
                for &j in nb {
                    key = push_bit(key, p[j]);
                }
            }
            sum += self.tables[i][key];
        }
        sum / self.n as f64
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let mut s = format!(
            "{MAGIC} {VERSION}\nNKCS N={} K={} C={} S={}\n",
            self.n, self.k, self.c, self.s
        );
        for i in 0..self.n {
            write_trait(
                &mut s,
                &self.neighbors[i],
                &self.partner_neighbors[i],
                &self.tables[i],
            );
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let raw = read_landscape(r)?;
        if raw.kind != "NKCS" {
            return Err(parse_err(2, 1, "expected an NKCS landscape"));
        }
        NkcsLandscape::from_parts(
            raw.k,
            raw.c,
            raw.neighbors,
            raw.partner_neighbors,
            raw.tables,
        )
    }
}

fn check_neighbor_list(nb: &[usize], len: usize, n: usize, exclude: Option<usize>) -> Result<()> {
    if nb.len() != len {
        return Err(Error::InvalidArgument(format!(
            "neighbor list {nb:?} should have {len} entries"
        )));
    }
    for (a, &x) in nb.iter().enumerate() {
        if x >= n || Some(x) == exclude || nb[..a].contains(&x) {
            return Err(Error::InvalidArgument(format!("bad neighbor list {nb:?}")));
        }
    }
    Ok(())
}

fn check_tables(tables: &[Vec<f64>], bits: usize) -> Result<()> {
    for t in tables {
        if t.len() != 1 << bits {
            return Err(Error::InvalidArgument(format!(
                "table has {} entries, expected {}",
                t.len(),
                1usize << bits
            )));
        }
        if t.iter().any(|x| !(0.0..1.0).contains(x) && *x != 1.0) {
            return Err(Error::InvalidArgument("table entry outside [0, 1]".into()));
        }
    }
    Ok(())
}

fn join(xs: &[usize]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

// One line per trait: `neighbors | partner lists ; separated | table bits as hex`.
// Tables store the raw IEEE-754 bits so a reloaded landscape is bit-identical.
fn write_trait(out: &mut String, nb: &[usize], partners: &[Vec<usize>], table: &[f64]) {
    let partners = partners
        .iter()
        .map(|p| join(p))
        .collect::<Vec<_>>()
        .join(";");
    let _ = write!(out, "{} | {} |", join(nb), partners);
    for x in table {
        let _ = write!(out, " {:016x}", x.to_bits());
    }
    out.push('\n');
}

struct RawLandscape {
    kind: String,
    k: usize,
    c: usize,
    neighbors: Vec<Vec<usize>>,
    partner_neighbors: Vec<Vec<Vec<usize>>>,
    tables: Vec<Vec<f64>>,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_list(s: &str, line: usize) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| parse_err(line, 1, format!("bad index {x:?}")))
        })
        .collect()
}

fn read_landscape(r: impl BufRead) -> Result<RawLandscape> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header != format!("{MAGIC} {VERSION}") {
        return Err(parse_err(1, 1, "missing landscape header"));
    }
    let dims = lines.next().transpose()?.unwrap_or_default();
    let mut parts = dims.split_whitespace();
    let kind = parts.next().unwrap_or_default().to_string();
    let mut get = |name: &str| -> Result<usize> {
        parts
            .next()
            .and_then(|p| p.strip_prefix(name))
            .and_then(|p| p.strip_prefix('='))
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| parse_err(2, 1, format!("missing {name}")))
    };
    let n = get("N")?;
    let k = get("K")?;
    let c = get("C")?;
    let s = get("S")?;
    let mut raw = RawLandscape {
        kind,
        k,
        c,
        neighbors: Vec::with_capacity(n),
        partner_neighbors: Vec::with_capacity(n),
        tables: Vec::with_capacity(n),
    };
    for i in 0..n {
        let lineno = i + 3;
        let line = lines
            .next()
            .transpose()?
            .ok_or_else(|| parse_err(lineno, 1, "truncated landscape"))?;
        let fields: Vec<&str> = line.splitn(3, '|').collect();
        if fields.len() != 3 {
            return Err(parse_err(lineno, 1, "expected three '|' separated fields"));
        }
        raw.neighbors.push(parse_list(fields[0], lineno)?);
        let partners = if s == 0 {
            Vec::new()
        } else {
            fields[1]
                .split(';')
                .map(|p| parse_list(p, lineno))
                .collect::<Result<Vec<_>>>()?
        };
        raw.partner_neighbors.push(partners);
        let table = fields[2]
            .split_whitespace()
            .map(|h| {
                u64::from_str_radix(h, 16)
                    .map(f64::from_bits)
                    .map_err(|_| parse_err(lineno, 1, format!("bad table entry {h:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        raw.tables.push(table);
    }
    Ok(raw)
}
