//! Flat `key = value` experiment configuration files.
//!
//! ```text
//! # Figure 4 sweep at desk scale
//! preset = desk
//! mode = stationary
//! B = 1,2,3,4,5
//! K = 0,1,2,3,4,5
//! seed = 7
//! ```
//!
//! `mode`, `B`, `K` and `C` accept comma-separated lists; the grid is their
//! Cartesian product. `preset` (`paper` or `desk`) supplies defaults that
//! explicit keys override regardless of line order. Unknown keys and
//! duplicate keys are errors.

use std::collections::HashMap;

use crate::experiments::{ExperimentSpec, Mode};
use crate::{Error, Result};

pub const KEYS: &[&str] = &[
    "mode",
    "R",
    "N",
    "B",
    "K",
    "C",
    "S",
    "generations",
    "cycles",
    "runs_per_landscape",
    "landscapes",
    "log_every",
    "seed",
    "scramble_control",
    "preset",
    "N_input",
    "B_prime",
    "clamp_coupled",
    "editable_init",
];

#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    column: usize,
    value: String,
}

/// A parsed configuration file.
#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    entries: HashMap<String, Entry>,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                let col = content.len() - content.trim_start().len() + 1;
                return Err(parse_err(line, col, "expected key = value"));
            };
            let key = content[..eq].trim();
            let key_col = content.len() - content.trim_start().len() + 1;
            if !KEYS.contains(&key) {
                return Err(parse_err(line, key_col, format!("unknown key {key:?}")));
            }
            let after = &content[eq + 1..];
            let value = after.trim();
            let value_col = eq + 2 + (after.len() - after.trim_start().len());
            if value.is_empty() {
                return Err(parse_err(
                    line,
                    value_col,
                    format!("missing value for {key}"),
                ));
            }
            let prev = entries.insert(
                key.to_string(),
                Entry {
                    line,
                    column: value_col,
                    value: value.to_string(),
                },
            );
            if prev.is_some() {
                return Err(parse_err(line, key_col, format!("duplicate key {key:?}")));
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn scalar<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|_| {
                parse_err(
                    e.line,
                    e.column,
                    format!("bad value {:?} for {key}", e.value),
                )
            }),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        let mut offset = 0;
        for part in e.value.split(',') {
            let item = part.trim();
            let col = e.column + offset + (part.len() - part.trim_start().len());
            out.push(
                item.parse()
                    .map_err(|_| parse_err(e.line, col, format!("bad value {item:?} for {key}")))?,
            );
            offset += part.len() + 1;
        }
        Ok(Some(out))
    }

    fn flag(&self, key: &str) -> Result<Option<bool>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => match e.value.as_str() {
                "true" | "1" | "yes" => Ok(Some(true)),
                "false" | "0" | "no" => Ok(Some(false)),
                v => Err(parse_err(
                    e.line,
                    e.column,
                    format!("bad boolean {v:?} for {key}"),
                )),
            },
        }
    }

    /// Expands the file into one spec per grid cell. `seed` overrides the
    /// file's seed when given.
    pub fn to_grid(&self, seed: Option<u64>) -> Result<Vec<ExperimentSpec>> {
        let mut base = match self.entries.get("preset") {
            None => ExperimentSpec::paper(),
            Some(e) => match e.value.as_str() {
                "paper" => ExperimentSpec::paper(),
                "desk" => ExperimentSpec::desk(),
                v => return Err(parse_err(e.line, e.column, format!("unknown preset {v:?}"))),
            },
        };
        macro_rules! set {
            ($key:literal, $field:ident) => {
                if let Some(v) = self.scalar($key)? {
                    base.$field = v;
                }
            };
        }
        set!("R", r);
        set!("N", n);
        set!("S", s);
        set!("generations", generations);
        set!("cycles", cycles);
        set!("runs_per_landscape", runs_per_landscape);
        set!("landscapes", landscapes);
        set!("log_every", log_every);
        set!("seed", seed);
        set!("editable_init", editable_fraction);
        base.n_input = self.scalar("N_input")?.unwrap_or(base.n);
        if let Some(v) = self.flag("scramble_control")? {
            base.scramble_control = v;
        }
        if let Some(v) = self.flag("clamp_coupled")? {
            base.clamp_coupled = v;
        }
        if let Some(s) = seed {
            base.seed = s;
        }
        let b_prime: Option<usize> = self.scalar("B_prime")?;
        let modes: Vec<Mode> = match self.entries.get("mode") {
            None => vec![Mode::Stationary],
            Some(e) => {
                let mut out = Vec::new();
                for m in e.value.split(',') {
                    out.push(m.trim().parse().map_err(|_| {
                        parse_err(e.line, e.column, format!("unknown mode {:?}", m.trim()))
                    })?);
                }
                out
            }
        };
        let bs = self.list("B")?.unwrap_or_else(|| vec![base.b]);
        let ks = self.list("K")?.unwrap_or_else(|| vec![base.k]);
        let cs = self.list("C")?.unwrap_or_else(|| vec![base.c]);
        let mut grid = Vec::new();
        for &mode in &modes {
            for &b in &bs {
                for &k in &ks {
                    // single-cell modes have no coupling; don't repeat them per C
                    let c_values: &[usize] = if mode.is_coupled() { &cs } else { &cs[..1] };
                    for &c in c_values {
                        let spec = ExperimentSpec {
                            mode,
                            b,
                            b_prime: b_prime.unwrap_or(b),
                            k,
                            c,
                            ..base.clone()
                        };
                        spec.validate()?;
                        grid.push(spec);
                    }
                }
            }
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_paper_values() {
        let g = ConfigFile::parse("").unwrap().to_grid(None).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(
            (g[0].r, g[0].n, g[0].generations, g[0].cycles),
            (100, 10, 50_000, 100)
        );
    }

    #[test]
    fn grid_expansion() {
        let text = "preset = desk\nmode = stationary, hetero_coevo\nB = 1,2\nK=0,3\nC = 1,5\n";
        let g = ConfigFile::parse(text).unwrap().to_grid(Some(77)).unwrap();
        // stationary: 2x2, hetero: 2x2x2
        assert_eq!(g.len(), 4 + 8);
        assert!(g
            .iter()
            .all(|s| s.seed == 77 && s.r == 50 && s.generations == 10_000));
        assert!(g.iter().all(|s| s.b_prime == s.b));
    }

    #[test]
    fn preset_is_overridden_by_keys_in_any_order() {
        let g = ConfigFile::parse("R = 30\npreset = desk\n")
            .unwrap()
            .to_grid(None)
            .unwrap();
        assert_eq!(g[0].r, 30);
        assert_eq!(g[0].landscapes, 5);
    }

    #[test]
    fn unknown_key_reports_position() {
        let err = ConfigFile::parse("B = 2\n  genrations = 5\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (2, 3)),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn bad_list_item_reports_column() {
        let cfg = ConfigFile::parse("B = 1, x").unwrap();
        match cfg.to_grid(None).unwrap_err() {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (1, 8)),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn duplicate_and_malformed_lines() {
        assert!(ConfigFile::parse("B=1\nB=2").is_err());
        assert!(ConfigFile::parse("just words").is_err());
        assert!(ConfigFile::parse("B =").is_err());
        assert!(ConfigFile::parse("scramble_control = maybe")
            .unwrap()
            .to_grid(None)
            .is_err());
        assert!(ConfigFile::parse("mode = sideways")
            .unwrap()
            .to_grid(None)
            .is_err());
    }

    #[test]
    fn comments_and_flags() {
        let text = "# header\nscramble_control = true # control run\nN_input = 4\nB_prime = 3\n";
        let g = ConfigFile::parse(text).unwrap().to_grid(None).unwrap();
        assert!(g[0].scramble_control);
        assert_eq!(g[0].n_input, 4);
        assert_eq!(g[0].b_prime, 3);
    }
}
