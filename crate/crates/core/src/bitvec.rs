//! Packed GF(2) bitstrings and index sets.
//!
//! Bits are stored LSB-first in `u64` words: bit `i` lives in word `i / 64`
//! at position `i % 64`. The byte serialization uses the same order, so byte
//! `j` carries bits `8j..8j+8` with bit `8j` in its least significant
//! position. Unused high bits of the last word (and last byte) are always
//! zero.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length string over GF(2).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut out = BitString {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        out.clear_tail();
        out
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut out = BitString::zeros(0);
        for b in bits {
            out.push(b);
        }
        out
    }

    /// Uniformly random string of the given length.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut out = BitString {
            len,
            words: (0..words_for(len)).map(|_| rng.random::<u64>()).collect(),
        };
        out.clear_tail();
        out
    }

    /// Builds a string from the low `len` bits of `value` (bit 0 first).
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD, "from_u64 takes at most 64 bits");
        let mut out = BitString::zeros(len);
        if len > 0 {
            out.words[0] = value;
            out.clear_tail();
        }
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Panics if `i >= len`, like slice indexing.
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Positions of the one bits, ascending.
    pub fn ones_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitString) -> Result<()> {
        self.check_len(other.len)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Number of positions where the two strings differ.
    pub fn distance(&self, other: &BitString) -> Result<usize> {
        self.check_len(other.len)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.words.resize(words_for(self.len + other.len), 0);
        for i in other.ones_positions() {
            let j = self.len + i;
            out.words[j / WORD] |= 1u64 << (j % WORD);
        }
        out.len = self.len + other.len;
        out
    }

    /// The substring at the positions of `set`, in increasing position order.
    pub fn restrict(&self, set: &IndexSet) -> Result<BitString> {
        if set.universe != self.len {
            return Err(Error::LengthMismatch {
                expected: set.universe,
                actual: self.len,
            });
        }
        let mut out = BitString::zeros(set.len());
        for (j, &i) in set.positions.iter().enumerate() {
            if i >= self.len {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.len,
                });
            }
            if self.get(i) {
                out.set(j, true);
            }
        }
        Ok(out)
    }

    /// Reads `width <= 64` bits starting at `start`, bit `start` in the least
    /// significant position. Positions past the end read as zero.
    pub fn extract_u64(&self, start: usize, width: usize) -> u64 {
        debug_assert!(width <= WORD);
        if width == 0 {
            return 0;
        }
        let wi = start / WORD;
        let off = start % WORD;
        let lo = self.words.get(wi).copied().unwrap_or(0) >> off;
        let hi = if off == 0 {
            0
        } else {
            self.words.get(wi + 1).copied().unwrap_or(0) << (WORD - off)
        };
        let v = lo | hi;
        if width == WORD {
            v
        } else {
            v & ((1u64 << width) - 1)
        }
    }

    /// Packed bytes, LSB-first within each byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        self.words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(nbytes)
            .collect()
    }

    /// Inverse of [`BitString::to_bytes`]. The byte count must be exactly
    /// `ceil(len / 8)` and padding bits must be zero.
    pub fn from_bytes(len: usize, bytes: &[u8]) -> Result<BitString> {
        let nbytes = len.div_ceil(8);
        if bytes.len() != nbytes {
            return Err(Error::Format(format!(
                "expected {nbytes} bytes for {len} bits, got {}",
                bytes.len()
            )));
        }
        let mut out = BitString::zeros(len);
        for (wi, chunk) in bytes.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            out.words[wi] = u64::from_le_bytes(buf);
        }
        let before = out.words.last().copied();
        out.clear_tail();
        if out.words.last().copied() != before {
            return Err(Error::Format(format!(
                "nonzero padding bits after bit {len}"
            )));
        }
        Ok(out)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(len: usize, text: &str) -> Result<BitString> {
        let bytes = hex::decode(text).map_err(|e| Error::Format(format!("bad hex: {e}")))?;
        BitString::from_bytes(len, &bytes)
    }

    fn check_len(&self, other: usize) -> Result<()> {
        if self.len != other {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: other,
            });
        }
        Ok(())
    }

    fn clear_tail(&mut self) {
        let used = self.len % WORD;
        if used != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Parses a string of `0`/`1` characters; the first character is bit 0.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Format(format!("unexpected character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString::from_bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// A sorted set of distinct positions inside `[0, universe)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexSet {
    positions: Vec<usize>,
    universe: usize,
}

impl IndexSet {
    pub fn new(positions: Vec<usize>, universe: usize) -> Result<IndexSet> {
        for w in positions.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidIndexSet(format!(
                    "positions must be strictly increasing, found {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = positions.last() {
            if last >= universe {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    len: universe,
                });
            }
        }
        Ok(IndexSet { positions, universe })
    }

    pub fn full(universe: usize) -> IndexSet {
        IndexSet {
            positions: (0..universe).collect(),
            universe,
        }
    }

    pub fn empty(universe: usize) -> IndexSet {
        IndexSet {
            positions: Vec::new(),
            universe,
        }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.positions.binary_search(&i).is_ok()
    }

    pub fn complement(&self) -> IndexSet {
        let mut rest = Vec::with_capacity(self.universe - self.len());
        let mut it = self.positions.iter().peekable();
        for i in 0..self.universe {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                rest.push(i);
            }
        }
        IndexSet {
            positions: rest,
            universe: self.universe,
        }
    }

    /// The set as a mask of length `universe`.
    pub fn to_mask(&self) -> BitString {
        let mut mask = BitString::zeros(self.universe);
        for &i in &self.positions {
            mask.set(i, true);
        }
        mask
    }

    /// Writes `values[j]` to `target[positions[j]]`; the inverse of restrict.
    pub fn scatter(&self, values: &BitString, target: &mut BitString) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: values.len(),
            });
        }
        if target.len() != self.universe {
            return Err(Error::LengthMismatch {
                expected: self.universe,
                actual: target.len(),
            });
        }
        for (j, &i) in self.positions.iter().enumerate() {
            target.set(i, values.get(j));
        }
        Ok(())
    }
}

/// Splits `[0, len(theta))` into the zero positions `I` and the one positions
/// `Ī` of a basis string.
pub fn index_sets_from_basis(theta: &BitString) -> (IndexSet, IndexSet) {
    let mut zeros = Vec::with_capacity(theta.len() - theta.weight());
    let mut ones = Vec::with_capacity(theta.weight());
    for (i, b) in theta.bits().enumerate() {
        if b {
            ones.push(i);
        } else {
            zeros.push(i);
        }
    }
    (
        IndexSet {
            positions: zeros,
            universe: theta.len(),
        },
        IndexSet {
            positions: ones,
            universe: theta.len(),
        },
    )
}
