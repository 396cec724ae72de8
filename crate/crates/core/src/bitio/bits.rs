use crate::error::{Error, Result};

/// MSB-first bit writer.
#[derive(Debug, Clone, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    acc_bits: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `n` bits of `value`, most significant first.
    pub fn put_bits(&mut self, value: u32, n: u32) -> Result<()> {
        if !(1..=32).contains(&n) {
            return Err(Error::param(format!("bit count {n} outside 1..=32")));
        }
        if n < 32 && value >> n != 0 {
            return Err(Error::param(format!(
                "value {value} does not fit in {n} bits"
            )));
        }
        self.push(value, n);
        Ok(())
    }

    /// Unchecked variant for callers that already validated `n` and `value`.
    #[inline]
    pub(crate) fn push(&mut self, value: u32, n: u32) {
        debug_assert!((1..=32).contains(&n));
        self.acc = (self.acc << n) | u64::from(value);
        self.acc_bits += n;
        while self.acc_bits >= 8 {
            self.acc_bits -= 8;
            self.bytes.push((self.acc >> self.acc_bits) as u8);
        }
        self.acc &= (1u64 << self.acc_bits) - 1;
    }

    #[inline]
    pub fn put_bit(&mut self, bit: bool) {
        self.push(u32::from(bit), 1);
    }

    /// Number of bits written so far.
    pub fn bit_len(&self) -> u64 {
        self.bytes.len() as u64 * 8 + u64::from(self.acc_bits)
    }

    /// Zero-pads to a byte boundary and returns the bytes plus the number of
    /// padding bits (0..=7).
    pub fn finish(mut self) -> (Vec<u8>, u8) {
        let pad = (8 - self.acc_bits % 8) % 8;
        if pad > 0 {
            self.push(0, pad);
        }
        (self.bytes, pad as u8)
    }
}

/// MSB-first bit reader over a byte slice, limited to `bit_len` valid bits.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: u64,
    end: u64,
    /// Bit offset of `data[0]` within the enclosing stream, for error reports.
    base: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self::with_len(data, data.len() as u64 * 8)
    }

    /// Reader that treats only the first `bit_len` bits as valid.
    pub fn with_len(data: &'a [u8], bit_len: u64) -> Self {
        debug_assert!(bit_len <= data.len() as u64 * 8);
        Self {
            data,
            pos: 0,
            end: bit_len,
            base: 0,
        }
    }

    pub fn with_base(mut self, base_bit_offset: u64) -> Self {
        self.base = base_bit_offset;
        self
    }

    /// Absolute bit offset (including the base) of the cursor.
    pub fn bit_offset(&self) -> u64 {
        self.base + self.pos
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.end - self.pos
    }

    /// Returns the next `n` bits without consuming them. Bits past the end
    /// read as zero.
    #[inline]
    pub fn peek_bits(&self, n: u32) -> u32 {
        debug_assert!((1..=32).contains(&n));
        let byte = (self.pos >> 3) as usize;
        let shift = (self.pos & 7) as u32;
        let window: u64 = match self.data.get(byte..byte + 8) {
            Some(s) => u64::from_be_bytes(s.try_into().unwrap()),
            None => {
                let mut w = 0u64;
                for i in 0..8 {
                    w = (w << 8) | u64::from(*self.data.get(byte + i).unwrap_or(&0));
                }
                w
            }
        };
        ((window << shift) >> (64 - n)) as u32
    }

    #[inline]
    pub(crate) fn skip(&mut self, n: u32) {
        self.pos += u64::from(n);
    }

    pub fn get_bits(&mut self, n: u32) -> Result<u32> {
        if !(1..=32).contains(&n) {
            return Err(Error::param(format!("bit count {n} outside 1..=32")));
        }
        if self.remaining() < u64::from(n) {
            return Err(Error::Truncated {
                bit_offset: self.bit_offset(),
            });
        }
        let v = self.peek_bits(n);
        self.pos += u64::from(n);
        Ok(v)
    }

    #[inline]
    pub fn get_bit(&mut self) -> Result<bool> {
        Ok(self.get_bits(1)? == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn roundtrip_three_bits() {
        let mut w = BitWriter::new();
        w.put_bits(0b101, 3).unwrap();
        let (bytes, pad) = w.finish();
        assert_eq!(bytes, vec![0b1010_0000]);
        assert_eq!(pad, 5);
        let mut r = BitReader::with_len(&bytes, 3);
        assert_eq!(r.get_bits(3).unwrap(), 0b101);
    }

    #[test]
    fn eight_zero_bits_make_one_byte() {
        let mut w = BitWriter::new();
        for _ in 0..8 {
            w.put_bits(0, 1).unwrap();
        }
        let (bytes, pad) = w.finish();
        assert_eq!(bytes, vec![0]);
        assert_eq!(pad, 0);
    }

    #[test]
    fn parameter_errors() {
        let mut w = BitWriter::new();
        assert!(matches!(w.put_bits(1, 0), Err(Error::Param(_))));
        assert!(matches!(w.put_bits(1, 33), Err(Error::Param(_))));
        assert!(matches!(w.put_bits(4, 2), Err(Error::Param(_))));
        w.put_bits(u32::MAX, 32).unwrap();
        let (bytes, _) = w.finish();
        let mut r = BitReader::new(&bytes);
        assert!(matches!(r.get_bits(0), Err(Error::Param(_))));
        assert_eq!(r.get_bits(32).unwrap(), u32::MAX);
    }

    #[test]
    fn read_past_end_is_truncation() {
        let mut r = BitReader::new(&[]);
        assert!(matches!(
            r.get_bits(1),
            Err(Error::Truncated { bit_offset: 0 })
        ));
        let data = [0xffu8];
        let mut r = BitReader::new(&data).with_base(80);
        r.get_bits(5).unwrap();
        match r.get_bits(4) {
            Err(Error::Truncated { bit_offset }) => assert_eq!(bit_offset, 85),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn interleaved_widths() {
        // naive bit-array reference
        let mut reference: Vec<bool> = Vec::new();
        let mut w = BitWriter::new();
        let mut items = Vec::new();
        for i in 0..300u32 {
            let n = [1, 7, 13][(i % 3) as usize];
            let v = (i.wrapping_mul(2654435761)) & ((1 << n) - 1);
            w.put_bits(v, n).unwrap();
            for b in (0..n).rev() {
                reference.push((v >> b) & 1 == 1);
            }
            items.push((v, n));
        }
        let len = w.bit_len();
        let (bytes, _) = w.finish();
        for (i, bit) in reference.iter().enumerate() {
            assert_eq!((bytes[i / 8] >> (7 - i % 8)) & 1 == 1, *bit);
        }
        let mut r = BitReader::with_len(&bytes, len);
        for (v, n) in items {
            assert_eq!(r.get_bits(n).unwrap(), v);
        }
        assert_eq!(r.remaining(), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn random_sequences_roundtrip(seq in prop::collection::vec((any::<u32>(), 1u32..=32), 0..24)) {
            let mut w = BitWriter::new();
            let mut reference: Vec<bool> = Vec::new();
            let items: Vec<(u32, u32)> = seq
                .into_iter()
                .map(|(v, n)| (if n == 32 { v } else { v & ((1 << n) - 1) }, n))
                .collect();
            for &(v, n) in &items {
                w.put_bits(v, n).unwrap();
                for b in (0..n).rev() {
                    reference.push((v >> b) & 1 == 1);
                }
            }
            prop_assert_eq!(w.bit_len(), reference.len() as u64);
            let len = w.bit_len();
            let (bytes, pad) = w.finish();
            prop_assert_eq!((len + u64::from(pad)) % 8, 0);
            for (i, bit) in reference.iter().enumerate() {
                prop_assert_eq!((bytes[i / 8] >> (7 - i % 8)) & 1 == 1, *bit);
            }
            let mut r = BitReader::with_len(&bytes, len);
            for &(v, n) in &items {
                prop_assert_eq!(r.get_bits(n).unwrap(), v);
            }
        }
    }
}
