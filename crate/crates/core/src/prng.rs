//! Deterministic, labelled random streams.
//!
//! Every stream is a ChaCha8 generator whose 256-bit seed is expanded with
//! SplitMix64 from a 64-bit stream key. Deriving a child stream hashes the
//! parent key together with a `(tag, index)` label, so a child depends only
//! on where it sits in the label tree and never on how many values the
//! parent has already produced. Two runs with the same root seed therefore
//! draw identical sequences no matter how work is scheduled across threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Error;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// FNV-1a over the tag bytes.
fn hash_tag(tag: &str) -> u64 {
    tag.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Identifies a child stream: a purpose tag plus an index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StreamLabel {
    pub tag: String,
    pub index: u64,
}

impl StreamLabel {
    pub fn new(tag: impl Into<String>, index: u64) -> Self {
        StreamLabel {
            tag: tag.into(),
            index,
        }
    }
}

impl std::fmt::Display for StreamLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.tag, self.index)
    }
}

impl std::str::FromStr for StreamLabel {
    type Err = Error;

    /// Parses `tag` or `tag/index`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (tag, index) = match s.rsplit_once('/') {
            Some((tag, idx)) => match idx.parse::<u64>() {
                Ok(i) => (tag, i),
                Err(_) => (s, 0),
            },
            None => (s, 0),
        };
        if tag.is_empty() {
            return Err(Error::InvalidArgument(format!("empty stream label {s:?}")));
        }
        Ok(StreamLabel::new(tag, index))
    }
}

/// A reproducible stream of random values.
#[derive(Clone, Debug)]
pub struct RngStream {
    key: u64,
    path: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    /// Root stream for a user supplied seed.
    pub fn from_seed(seed: u64) -> Self {
        Self::with_key(seed, String::new())
    }

    fn with_key(key: u64, path: String) -> Self {
        let mut sm = key;
        let mut bytes = [0u8; 32];
        for chunk in bytes.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut sm).to_le_bytes());
        }
        RngStream {
            key,
            path,
            rng: ChaCha8Rng::from_seed(bytes),
        }
    }

    /// The 64-bit key this stream was built from.
    pub fn key(&self) -> u64 {
        self.key
    }

    /// Slash separated label path from the root, e.g. `landscape/3/slot/0`.
    pub fn path(&self) -> &str {
        &self.path
    }

    /// Child stream for `label`. Pure in (this stream's key, label).
    pub fn derive(&self, label: &StreamLabel) -> RngStream {
        let mut sm = self.key ^ hash_tag(&label.tag).rotate_left(17);
        let a = splitmix64(&mut sm);
        let mut sm = a ^ label.index.wrapping_mul(GOLDEN);
        let key = splitmix64(&mut sm);
        let path = if self.path.is_empty() {
            label.to_string()
        } else {
            format!("{}/{}", self.path, label)
        };
        RngStream::with_key(key, path)
    }

    /// Shorthand for `derive(&StreamLabel::new(tag, index))`.
    pub fn child(&self, tag: &str, index: u64) -> RngStream {
        self.derive(&StreamLabel::new(tag, index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform real in `[0, 1)` with 53 bits of precision.
    pub fn next_unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform index in `[0, n)`.
    pub fn next_index(&mut self, n: usize) -> Result<usize, Error> {
        if n == 0 {
            return Err(Error::InvalidArgument("next_index with n = 0".into()));
        }
        Ok(self.index(n))
    }

    /// Like [`next_index`](Self::next_index) for callers that have already
    /// checked `n > 0`.
    pub(crate) fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.rng.gen_range(0..n)
    }

    pub fn next_bool(&mut self) -> bool {
        self.rng.next_u64() >> 63 == 1
    }

    /// Bernoulli draw with success probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_unit() < p
    }

    /// `k` distinct values from `pool`, in draw order.
    pub(crate) fn sample_distinct(&mut self, pool: &[usize], k: usize) -> Vec<usize> {
        debug_assert!(k <= pool.len());
        let mut pool = pool.to_vec();
        // partial Fisher-Yates
        for i in 0..k {
            let j = i + self.index(pool.len() - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(s: &mut RngStream, n: usize) -> Vec<u64> {
        (0..n).map(|_| s.next_u64()).collect()
    }

    #[test]
    fn derive_is_deterministic() {
        let root = RngStream::from_seed(42);
        let mut a = root.child("landscape", 0);
        let mut b = root.child("landscape", 0);
        assert_eq!(draws(&mut a, 100), draws(&mut b, 100));
    }

    #[test]
    fn derive_ignores_parent_position() {
        let mut root = RngStream::from_seed(42);
        let before = root.child("run", 3);
        for _ in 0..17 {
            root.next_u64();
        }
        let after = root.child("run", 3);
        assert_eq!(before.key(), after.key());
    }

    #[test]
    fn sibling_labels_differ_early() {
        let root = RngStream::from_seed(7);
        let mut a = root.child("landscape", 0);
        let mut b = root.child("landscape", 1);
        let da = draws(&mut a, 64);
        let db = draws(&mut b, 64);
        assert!(da.iter().zip(&db).any(|(x, y)| x != y));
        let mut c = root.child("run", 0);
        assert_ne!(da, draws(&mut c, 64));
    }

    #[test]
    fn derive_order_matters() {
        let s = RngStream::from_seed(1);
        let ab = s.child("a", 0).child("b", 0);
        let ba = s.child("b", 0).child("a", 0);
        assert_ne!(ab.key(), ba.key());
        assert_eq!(ab.path(), "a/0/b/0");
    }

    #[test]
    fn unit_draws_in_range_and_centred() {
        let mut s = RngStream::from_seed(2024);
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = s.next_unit();
            assert!((0.0..1.0).contains(&x));
            sum += x;
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
    }

    #[test]
    fn same_seed_same_units() {
        let mut a = RngStream::from_seed(99);
        let mut b = RngStream::from_seed(99);
        for _ in 0..100 {
            assert_eq!(a.next_unit().to_bits(), b.next_unit().to_bits());
        }
    }

    #[test]
    fn index_of_one_is_zero() {
        let mut s = RngStream::from_seed(3);
        for _ in 0..100 {
            assert_eq!(s.next_index(1).unwrap(), 0);
        }
    }

    #[test]
    fn index_zero_is_an_error() {
        let mut s = RngStream::from_seed(3);
        assert!(matches!(s.next_index(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn index_chi_square_n7() {
        let mut s = RngStream::from_seed(11);
        let n = 1_000_000usize;
        let mut counts = [0usize; 7];
        for _ in 0..n {
            counts[s.next_index(7).unwrap()] += 1;
        }
        let expected = n as f64 / 7.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // chi-square critical value, 6 dof, alpha = 0.001
        assert!(chi2 < 22.458, "chi2 = {chi2}");
    }

    #[test]
    fn label_parsing() {
        let l: StreamLabel = "landscape/4".parse().unwrap();
        assert_eq!(l, StreamLabel::new("landscape", 4));
        let l: StreamLabel = "mutation".parse().unwrap();
        assert_eq!(l, StreamLabel::new("mutation", 0));
        assert!("".parse::<StreamLabel>().is_err());
        assert!("/3".parse::<StreamLabel>().is_err());
    }

    #[test]
    fn sample_distinct_has_no_repeats() {
        let mut s = RngStream::from_seed(5);
        let pool: Vec<usize> = (0..10).collect();
        for _ in 0..200 {
            let mut got = s.sample_distinct(&pool, 6);
            got.sort_unstable();
            got.dedup();
            assert_eq!(got.len(), 6);
        }
    }
}
