//! Run-length coding of zigzag-ordered 8×8 coefficient blocks, and the
//! JPEG-style mapping of `(run, level)` pairs onto Huffman symbols plus raw
//! magnitude bits.

use super::bits::{BitReader, BitWriter};
use super::huffman::{HuffmanTable, Symbol};
use crate::error::{Error, Result};

pub const BLOCK_LEN: usize = 64;

/// End-of-block symbol: run 0, size 0.
pub const EOB: Symbol = 0;

/// Largest magnitude category a level may use.
pub const MAX_SIZE: u32 = 15;

/// `(zero run, nonzero level)` pairs; the end-of-block marker is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RleSequence {
    pub pairs: Vec<(u8, i32)>,
}

impl RleSequence {
    /// Number of coefficients the pairs expand to, excluding trailing zeros.
    pub fn expanded_len(&self) -> usize {
        self.pairs.iter().map(|&(r, _)| r as usize + 1).sum()
    }
}

pub fn rle_encode(coeffs: &[i32; BLOCK_LEN]) -> RleSequence {
    let mut pairs = Vec::new();
    let mut run = 0u8;
    for &c in coeffs {
        if c == 0 {
            run += 1;
        } else {
            pairs.push((run, c));
            run = 0;
        }
    }
    RleSequence { pairs }
}

pub fn rle_decode(seq: &RleSequence) -> Result<[i32; BLOCK_LEN]> {
    let mut out = [0i32; BLOCK_LEN];
    let mut pos = 0usize;
    for (i, &(run, level)) in seq.pairs.iter().enumerate() {
        if level == 0 {
            return Err(Error::corrupt(0, format!("pair {i} has a zero level")));
        }
        pos += run as usize;
        if pos >= BLOCK_LEN {
            return Err(Error::corrupt(
                0,
                "run-length expansion exceeds 64 coefficients",
            ));
        }
        out[pos] = level;
        pos += 1;
    }
    Ok(out)
}

/// Bits needed for `|v|`; 0 for 0.
#[inline]
pub fn magnitude_size(v: i32) -> u32 {
    32 - v.unsigned_abs().leading_zeros()
}

/// Raw magnitude bits: positive values as-is, negative as `v + 2^size - 1`.
#[inline]
pub fn magnitude_bits(v: i32, size: u32) -> u32 {
    if v >= 0 {
        v as u32
    } else {
        (v + ((1i32 << size) - 1)) as u32
    }
}

#[inline]
pub fn magnitude_from_bits(bits: u32, size: u32) -> i32 {
    if size == 0 {
        0
    } else if bits >> (size - 1) == 1 {
        bits as i32
    } else {
        bits as i32 - ((1i32 << size) - 1)
    }
}

#[inline]
pub fn pair_symbol(run: u8, size: u32) -> Symbol {
    (Symbol::from(run) << 4) | size as Symbol
}

/// Huffman symbols of a block, end-of-block included.
pub fn block_symbols(seq: &RleSequence) -> impl Iterator<Item = Symbol> + '_ {
    seq.pairs
        .iter()
        .map(|&(run, level)| pair_symbol(run, magnitude_size(level)))
        .chain(std::iter::once(EOB))
}

pub fn write_block(w: &mut BitWriter, table: &HuffmanTable, seq: &RleSequence) -> Result<()> {
    for &(run, level) in &seq.pairs {
        let size = magnitude_size(level);
        if size > MAX_SIZE {
            return Err(Error::param(format!(
                "level {level} exceeds {MAX_SIZE}-bit magnitude"
            )));
        }
        table.encode_symbol(w, pair_symbol(run, size))?;
        w.push(magnitude_bits(level, size), size);
    }
    table.encode_symbol(w, EOB)
}

/// Decodes one block straight into zigzag order.
#[inline]
pub fn read_block(r: &mut BitReader<'_>, table: &HuffmanTable) -> Result<[i32; BLOCK_LEN]> {
    let mut out = [0i32; BLOCK_LEN];
    let mut pos = 0usize;
    loop {
        let at = r.bit_offset();
        let sym = table.decode_symbol(r)?;
        if sym == EOB {
            return Ok(out);
        }
        let run = (sym >> 4) as usize;
        let size = u32::from(sym & 0xf);
        if size == 0 {
            return Err(Error::corrupt(
                at,
                format!("symbol {sym} has an empty magnitude"),
            ));
        }
        pos += run;
        if pos >= BLOCK_LEN {
            return Err(Error::corrupt(
                at,
                "run-length expansion exceeds 64 coefficients",
            ));
        }
        out[pos] = magnitude_from_bits(r.get_bits(size)?, size);
        pos += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn all_zero_block_is_empty() {
        let seq = rle_encode(&[0; 64]);
        assert!(seq.pairs.is_empty());
        assert_eq!(block_symbols(&seq).collect::<Vec<_>>(), vec![EOB]);
        assert_eq!(rle_decode(&seq).unwrap(), [0; 64]);
    }

    #[test]
    fn hand_expanded_block() {
        let mut c = [0i32; 64];
        c[0] = 7;
        c[4] = -3;
        let seq = rle_encode(&c);
        assert_eq!(seq.pairs, vec![(0, 7), (3, -3)]);
        assert_eq!(rle_decode(&seq).unwrap(), c);
    }

    #[test]
    fn overlong_expansion_is_corrupt() {
        let seq = RleSequence {
            pairs: vec![(60, 1), (3, 2)],
        };
        assert!(matches!(rle_decode(&seq), Err(Error::Corrupt { .. })));
        let ok = RleSequence {
            pairs: vec![(60, 1), (2, 2)],
        };
        assert_eq!(rle_decode(&ok).unwrap()[63], 2);
    }

    #[test]
    fn magnitude_codes() {
        for v in -4000..=4000 {
            let s = magnitude_size(v);
            if v != 0 {
                assert_eq!(magnitude_from_bits(magnitude_bits(v, s), s), v);
                assert!(magnitude_bits(v, s) < 1 << s);
            } else {
                assert_eq!(s, 0);
            }
        }
        assert_eq!(magnitude_size(-1), 1);
        assert_eq!(magnitude_bits(-1, 1), 0);
        assert_eq!(magnitude_size(255), 8);
    }

    fn sparse_block() -> impl Strategy<Value = [i32; 64]> {
        prop::collection::vec((0usize..64, -2047i32..=2047), 0..12).prop_map(|entries| {
            let mut b = [0i32; 64];
            for (i, v) in entries {
                b[i] = v;
            }
            b
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn rle_roundtrip(block in sparse_block()) {
            let seq = rle_encode(&block);
            prop_assert!(seq.pairs.iter().all(|&(_, l)| l != 0));
            prop_assert!(seq.expanded_len() <= 64);
            prop_assert_eq!(rle_decode(&seq).unwrap(), block);
        }
    }

    #[test]
    fn dense_blocks_roundtrip() {
        let mut b = [0i32; 64];
        for (i, v) in b.iter_mut().enumerate() {
            *v = (i as i32 * 37) % 11 - 5;
        }
        assert_eq!(rle_decode(&rle_encode(&b)).unwrap(), b);
    }
}
