//! Universal hashing and syndrome decoding.
//!
//! [`ToeplitzHash`] implements the universal₂ family used both for privacy
//! amplification and for the error-check hash. [`LinearCode`] provides the
//! blockwise syndrome map and the matching correction function.

use rand::Rng;

use crate::bitvec::BitString;
use crate::error::{Error, Result};

/// A `out_len x in_len` Toeplitz matrix over GF(2) defined by a seed of
/// `in_len + out_len - 1` bits. Entry `(i, j)` is `seed[in_len - 1 + i - j]`,
/// so the matrix is constant along each diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToeplitzHash {
    in_len: usize,
    out_len: usize,
    seed: BitString,
}

impl ToeplitzHash {
    pub fn new(in_len: usize, out_len: usize, seed: BitString) -> Result<ToeplitzHash> {
        if in_len == 0 || out_len == 0 {
            return Err(Error::InvalidParams(format!(
                "hash dimensions must be positive, got {in_len} -> {out_len}"
            )));
        }
        let expected = in_len + out_len - 1;
        if seed.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: seed.len(),
            });
        }
        Ok(ToeplitzHash {
            in_len,
            out_len,
            seed,
        })
    }

    pub fn in_len(&self) -> usize {
        self.in_len
    }

    pub fn out_len(&self) -> usize {
        self.out_len
    }

    pub fn seed(&self) -> &BitString {
        &self.seed
    }

    /// Seed length for the given dimensions.
    pub fn seed_len(in_len: usize, out_len: usize) -> usize {
        in_len + out_len - 1
    }

    /// Matrix-vector product over GF(2).
    pub fn eval(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.in_len {
            return Err(Error::LengthMismatch {
                expected: self.in_len,
                actual: x.len(),
            });
        }
        // Row i is seed[i .. i + in_len] read against x reversed.
        let mut reversed = BitString::zeros(self.in_len);
        for j in x.ones_positions() {
            reversed.set(self.in_len - 1 - j, true);
        }
        let rev_words = reversed.words();
        let mut out = BitString::zeros(self.out_len);
        for i in 0..self.out_len {
            let mut acc = 0u64;
            for (w, &xw) in rev_words.iter().enumerate() {
                if xw == 0 {
                    continue;
                }
                let width = (self.in_len - 64 * w).min(64);
                acc ^= self.seed.extract_u64(i + 64 * w, width) & xw;
            }
            if acc.count_ones() & 1 == 1 {
                out.set(i, true);
            }
        }
        Ok(out)
    }
}

/// Draws a hash uniformly from the Toeplitz family `{0,1}^in_len -> {0,1}^out_len`.
pub fn sample_hash<R: Rng + ?Sized>(in_len: usize, out_len: usize, rng: &mut R) -> Result<ToeplitzHash> {
    if in_len == 0 || out_len == 0 {
        return Err(Error::InvalidParams(format!(
            "hash dimensions must be positive, got {in_len} -> {out_len}"
        )));
    }
    let seed = BitString::random(ToeplitzHash::seed_len(in_len, out_len), rng);
    ToeplitzHash::new(in_len, out_len, seed)
}

/// Largest block length for which the decode table is built by enumeration.
pub const MAX_BLOCK: usize = 16;

/// A binary linear code applied independently to consecutive blocks.
///
/// The decode table maps each syndrome to its coset leader: the
/// minimum-weight error pattern with that syndrome, ties broken by the
/// lexicographically smallest list of set positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCode {
    block_in: usize,
    rows: Vec<u32>,
    decode_table: Vec<u32>,
    distance: usize,
}

fn parity(x: u32) -> bool {
    x.count_ones() & 1 == 1
}

fn positions(pattern: u32) -> Vec<u32> {
    (0..32).filter(|b| pattern >> b & 1 == 1).collect()
}

impl LinearCode {
    /// Builds a code from the rows of its parity-check matrix. The matrix
    /// must have full row rank so that every syndrome has a coset leader.
    pub fn from_parity_check(block_in: usize, rows: &[BitString]) -> Result<LinearCode> {
        if block_in == 0 || block_in > MAX_BLOCK {
            return Err(Error::InvalidParams(format!(
                "block length {block_in} not in 1..={MAX_BLOCK}"
            )));
        }
        if rows.len() > block_in {
            return Err(Error::InvalidParams(format!(
                "{} parity checks for a block of {block_in} bits",
                rows.len()
            )));
        }
        let mut masks = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != block_in {
                return Err(Error::LengthMismatch {
                    expected: block_in,
                    actual: row.len(),
                });
            }
            masks.push(row.extract_u64(0, block_in) as u32);
        }
        let syndromes = 1usize << masks.len();
        let mut patterns: Vec<u32> = (0..1u32 << block_in).collect();
        patterns.sort_by_key(|&p| (p.count_ones(), positions(p)));

        let mut table: Vec<Option<u32>> = vec![None; syndromes];
        let mut distance = block_in + 1;
        for &p in &patterns {
            let syn = Self::syndrome_with(&masks, p) as usize;
            if syn == 0 && p != 0 {
                distance = distance.min(p.count_ones() as usize);
            }
            if table[syn].is_none() {
                table[syn] = Some(p);
            }
        }
        let decode_table = table
            .into_iter()
            .collect::<Option<Vec<u32>>>()
            .ok_or_else(|| Error::InvalidParams("parity-check matrix is not full rank".into()))?;
        Ok(LinearCode {
            block_in,
            rows: masks,
            decode_table,
            distance,
        })
    }

    /// The [8,4] extended Hamming code: distance 4, corrects one error per
    /// block. Column `j` of the parity-check matrix is the 3-bit binary
    /// expansion of `j` followed by an overall parity bit.
    pub fn extended_hamming_8_4() -> LinearCode {
        let rows: Vec<BitString> = (0..4)
            .map(|r| BitString::from_bits((0..8).map(|j: usize| r == 3 || (j >> r) & 1 == 1)))
            .collect();
        LinearCode::from_parity_check(8, &rows).expect("extended Hamming matrix is valid")
    }

    /// The length-`len` repetition code (`len - 1` checks `x_0 = x_i`).
    pub fn repetition(len: usize) -> Result<LinearCode> {
        let rows: Vec<BitString> = (1..len)
            .map(|i| BitString::from_bits((0..len).map(|j| j == 0 || j == i)))
            .collect();
        LinearCode::from_parity_check(len, &rows)
    }

    /// Single-bit blocks with no checks: an empty syndrome and no correction.
    pub fn trivial() -> LinearCode {
        LinearCode::from_parity_check(1, &[]).expect("trivial code is valid")
    }

    /// Looks up one of the named built-in codes.
    pub fn by_name(name: &str) -> Result<LinearCode> {
        match name {
            "ext-hamming-8-4" | "hamming8" => Ok(LinearCode::extended_hamming_8_4()),
            "repetition-2" | "rep2" => LinearCode::repetition(2),
            "trivial" | "none" => Ok(LinearCode::trivial()),
            other => Err(Error::InvalidParams(format!("unknown code {other:?}"))),
        }
    }

    pub fn block_in(&self) -> usize {
        self.block_in
    }

    pub fn block_syn(&self) -> usize {
        self.rows.len()
    }

    /// Minimum distance; `block_in + 1` when the only codeword is zero.
    pub fn distance(&self) -> usize {
        self.distance
    }

    /// Errors per block that decoding is guaranteed to correct.
    pub fn correctable(&self) -> usize {
        (self.distance - 1) / 2
    }

    pub fn parity_check(&self) -> Vec<BitString> {
        self.rows
            .iter()
            .map(|&r| BitString::from_u64(r as u64, self.block_in))
            .collect()
    }

    /// Coset leader for a block syndrome given as an integer.
    pub fn coset_leader(&self, syndrome: u32) -> u32 {
        self.decode_table[syndrome as usize]
    }

    fn syndrome_with(rows: &[u32], block: u32) -> u32 {
        rows.iter()
            .enumerate()
            .fold(0, |acc, (i, &r)| acc | (parity(r & block) as u32) << i)
    }

    /// Syndrome of a single block packed into the low `block_in` bits.
    pub fn block_syndrome(&self, block: u32) -> u32 {
        Self::syndrome_with(&self.rows, block)
    }

    /// Syndrome length for an input of `len` bits.
    pub fn syndrome_len(&self, len: usize) -> Result<usize> {
        if !len.is_multiple_of(self.block_in) {
            return Err(Error::InvalidParams(format!(
                "length {len} is not a multiple of the code block {}",
                self.block_in
            )));
        }
        Ok(len / self.block_in * self.block_syn())
    }

    /// Concatenated per-block syndromes.
    pub fn synd(&self, x: &BitString) -> Result<BitString> {
        let total = self.syndrome_len(x.len())?;
        let (bi, bs) = (self.block_in, self.block_syn());
        let mut out = BitString::zeros(total);
        for b in 0..x.len() / bi {
            let syn = self.block_syndrome(x.extract_u64(b * bi, bi) as u32);
            for j in 0..bs {
                if syn >> j & 1 == 1 {
                    out.set(b * bs + j, true);
                }
            }
        }
        Ok(out)
    }

    /// Moves `y` to the nearest string whose syndrome is `target`, block by
    /// block: `y_b ⊕ leader(synd(y_b) ⊕ target_b)`.
    pub fn corr(&self, y: &BitString, target: &BitString) -> Result<BitString> {
        let total = self.syndrome_len(y.len())?;
        if target.len() != total {
            return Err(Error::LengthMismatch {
                expected: total,
                actual: target.len(),
            });
        }
        let (bi, bs) = (self.block_in, self.block_syn());
        let mut out = y.clone();
        for b in 0..y.len() / bi {
            let block = y.extract_u64(b * bi, bi) as u32;
            let want = target.extract_u64(b * bs, bs) as u32;
            let err = self.coset_leader(self.block_syndrome(block) ^ want);
            for j in 0..bi {
                if err >> j & 1 == 1 {
                    out.flip(b * bi + j);
                }
            }
        }
        Ok(out)
    }
}
