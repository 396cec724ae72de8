//! Canonical Huffman codes.
//!
//! Tables are built from symbol frequencies, then canonicalised: codewords are
//! assigned in (length, symbol) order, so a table is fully described by its
//! code lengths. Decoding uses a small direct-lookup table for short codes and
//! falls back to the per-length canonical ranges for long ones.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use super::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};

pub type Symbol = u16;

/// Longest codeword the tables will produce.
pub const MAX_CODE_LEN: u8 = 16;

const LUT_BITS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Code {
    bits: u32,
    len: u8,
}

#[derive(Debug, Clone, Copy, Default)]
struct LutEntry {
    symbol: Symbol,
    len: u8,
}

#[derive(Debug, Clone)]
pub struct HuffmanTable {
    /// `(symbol, length)` sorted by `(length, symbol)`.
    lengths: Vec<(Symbol, u8)>,
    /// Indexed by symbol; `len == 0` marks symbols outside the alphabet.
    encode: Vec<Code>,
    lut: Vec<LutEntry>,
    lut_bits: u32,
    first_code: [u32; MAX_CODE_LEN as usize + 1],
    count: [u32; MAX_CODE_LEN as usize + 1],
    offset: [u32; MAX_CODE_LEN as usize + 1],
    max_len: u8,
}

impl PartialEq for HuffmanTable {
    fn eq(&self, other: &Self) -> bool {
        self.lengths == other.lengths
    }
}

impl Eq for HuffmanTable {}

/// Builds a length-limited canonical Huffman table from symbol counts.
pub fn build_huffman(freqs: &BTreeMap<Symbol, u64>) -> Result<HuffmanTable> {
    let mut live: Vec<(Symbol, u64)> = freqs
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(&s, &c)| (s, c))
        .collect();
    if live.is_empty() {
        return Err(Error::param(
            "Huffman table needs at least one symbol with a nonzero count",
        ));
    }
    loop {
        let lengths = code_lengths(&live);
        if lengths.iter().all(|&(_, l)| l <= MAX_CODE_LEN) {
            return HuffmanTable::from_code_lengths(&lengths);
        }
        // Flatten the distribution until the tree fits.
        for (_, c) in live.iter_mut() {
            *c = (*c >> 1).max(1);
        }
    }
}

/// Unbounded Huffman code lengths; a lone symbol gets length 1.
fn code_lengths(freqs: &[(Symbol, u64)]) -> Vec<(Symbol, u8)> {
    if freqs.len() == 1 {
        return vec![(freqs[0].0, 1)];
    }
    // Nodes: leaves first, then internal nodes. Ties break on node id so the
    // result is a pure function of the input.
    let mut parent: Vec<usize> = vec![usize::MAX; freqs.len()];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = freqs
        .iter()
        .enumerate()
        .map(|(i, &(_, c))| Reverse((c, i)))
        .collect();
    while heap.len() > 1 {
        let Reverse((ca, a)) = heap.pop().unwrap();
        let Reverse((cb, b)) = heap.pop().unwrap();
        let id = parent.len();
        parent.push(usize::MAX);
        parent[a] = id;
        parent[b] = id;
        heap.push(Reverse((ca + cb, id)));
    }
    let mut depth = vec![0u32; parent.len()];
    for i in (0..parent.len()).rev() {
        if parent[i] != usize::MAX {
            depth[i] = depth[parent[i]] + 1;
        }
    }
    freqs
        .iter()
        .enumerate()
        .map(|(i, &(s, _))| (s, depth[i].min(255) as u8))
        .collect()
}

impl HuffmanTable {
    /// Rebuilds the canonical table from `(symbol, code length)` pairs.
    pub fn from_code_lengths(pairs: &[(Symbol, u8)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::param("empty code length list"));
        }
        let mut lengths = pairs.to_vec();
        lengths.sort_by_key(|&(s, l)| (l, s));
        let mut seen = BTreeMap::new();
        for &(s, l) in &lengths {
            if l == 0 || l > MAX_CODE_LEN {
                return Err(Error::param(format!(
                    "code length {l} for symbol {s} outside 1..={MAX_CODE_LEN}"
                )));
            }
            if seen.insert(s, l).is_some() {
                return Err(Error::param(format!("symbol {s} listed twice")));
            }
        }
        // Kraft inequality, scaled to 2^MAX_CODE_LEN.
        let kraft: u64 = lengths
            .iter()
            .map(|&(_, l)| 1u64 << (MAX_CODE_LEN - l))
            .sum();
        if kraft > 1u64 << MAX_CODE_LEN {
            return Err(Error::param("code lengths violate the Kraft inequality"));
        }

        let max_len = lengths.last().unwrap().1;
        let max_symbol = lengths.iter().map(|&(s, _)| s).max().unwrap();
        let mut encode = vec![Code::default(); max_symbol as usize + 1];
        let mut first_code = [0u32; MAX_CODE_LEN as usize + 1];
        let mut count = [0u32; MAX_CODE_LEN as usize + 1];
        let mut offset = [0u32; MAX_CODE_LEN as usize + 1];

        let mut code = 0u32;
        let mut prev_len = lengths[0].1;
        for (i, &(s, l)) in lengths.iter().enumerate() {
            code <<= l - prev_len;
            prev_len = l;
            if count[l as usize] == 0 {
                first_code[l as usize] = code;
                offset[l as usize] = i as u32;
            }
            count[l as usize] += 1;
            encode[s as usize] = Code { bits: code, len: l };
            code += 1;
        }

        let lut_bits = LUT_BITS.min(u32::from(max_len));
        let mut lut = vec![LutEntry::default(); 1 << lut_bits];
        for &(s, l) in &lengths {
            let l32 = u32::from(l);
            if l32 > lut_bits {
                break;
            }
            let c = encode[s as usize].bits;
            let span = 1u32 << (lut_bits - l32);
            let start = c << (lut_bits - l32);
            for e in &mut lut[start as usize..(start + span) as usize] {
                *e = LutEntry { symbol: s, len: l };
            }
        }

        Ok(Self {
            lengths,
            encode,
            lut,
            lut_bits,
            first_code,
            count,
            offset,
            max_len,
        })
    }

    /// `(symbol, length)` pairs in canonical order.
    pub fn code_lengths(&self) -> &[(Symbol, u8)] {
        &self.lengths
    }

    pub fn max_code_len(&self) -> u8 {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.encode.get(s as usize).is_some_and(|c| c.len > 0)
    }

    /// Codeword for `s` as `(bits, length)`.
    pub fn codeword(&self, s: Symbol) -> Option<(u32, u8)> {
        self.encode
            .get(s as usize)
            .filter(|c| c.len > 0)
            .map(|c| (c.bits, c.len))
    }

    /// Symbol → codeword map with codewords rendered as bit strings.
    pub fn codebook(&self) -> BTreeMap<Symbol, String> {
        self.lengths
            .iter()
            .map(|&(s, l)| {
                let c = self.encode[s as usize].bits;
                (s, format!("{:0width$b}", c, width = l as usize))
            })
            .collect()
    }

    #[inline]
    pub fn encode_symbol(&self, w: &mut BitWriter, s: Symbol) -> Result<()> {
        match self.encode.get(s as usize) {
            Some(c) if c.len > 0 => {
                w.push(c.bits, u32::from(c.len));
                Ok(())
            }
            _ => Err(Error::UnknownSymbol(s)),
        }
    }

    #[inline]
    pub fn decode_symbol(&self, r: &mut BitReader<'_>) -> Result<Symbol> {
        let remaining = r.remaining();
        if remaining == 0 {
            return Err(Error::Truncated {
                bit_offset: r.bit_offset(),
            });
        }
        let e = self.lut[r.peek_bits(self.lut_bits) as usize];
        if e.len > 0 {
            if u64::from(e.len) > remaining {
                return Err(Error::Truncated {
                    bit_offset: r.bit_offset(),
                });
            }
            r.skip(u32::from(e.len));
            return Ok(e.symbol);
        }
        for len in self.lut_bits + 1..=u32::from(self.max_len) {
            let n = self.count[len as usize];
            if n == 0 {
                continue;
            }
            let code = r.peek_bits(len);
            let idx = code.wrapping_sub(self.first_code[len as usize]);
            if idx < n {
                if u64::from(len) > remaining {
                    return Err(Error::Truncated {
                        bit_offset: r.bit_offset(),
                    });
                }
                r.skip(len);
                return Ok(self.lengths[(self.offset[len as usize] + idx) as usize].0);
            }
        }
        if u64::from(self.max_len) > remaining {
            Err(Error::Truncated {
                bit_offset: r.bit_offset(),
            })
        } else {
            Err(Error::corrupt(r.bit_offset(), "invalid Huffman prefix"))
        }
    }
}

/// Encodes `symbols` into a fresh writer.
pub fn huffman_encode(table: &HuffmanTable, symbols: &[Symbol]) -> Result<BitWriter> {
    let mut w = BitWriter::new();
    for &s in symbols {
        table.encode_symbol(&mut w, s)?;
    }
    Ok(w)
}

/// Decodes exactly `count` symbols.
pub fn huffman_decode(
    table: &HuffmanTable,
    r: &mut BitReader<'_>,
    count: usize,
) -> Result<Vec<Symbol>> {
    (0..count).map(|_| table.decode_symbol(r)).collect()
}
