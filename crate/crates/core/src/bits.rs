//! Packed, MSB-first bit strings.

use std::fmt;

use crate::error::{Error, Result};

/// An ordered sequence of bits stored packed, most significant bit first
/// within each byte. Bits past `len` in the last byte are always zero.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitStream {
    bytes: Vec<u8>,
    len: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// A stream of `len` zero bits.
    pub fn zeros(len: usize) -> Self {
        Self {
            bytes: vec![0; len.div_ceil(8)],
            len,
        }
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    /// Byte-aligned stream over `bytes`, eight bits per byte, MSB first.
    pub fn from_bytes(bytes: impl Into<Vec<u8>>) -> Self {
        let bytes = bytes.into();
        let len = bytes.len() * 8;
        Self { bytes, len }
    }

    /// Builds a stream from individual bit values.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut out = Self::new();
        for b in bits {
            out.push(b);
        }
        out
    }

    /// Parses a string of `'0'`/`'1'` characters; whitespace is ignored.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = Self::new();
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                c if c.is_whitespace() => {}
                c => return Err(Error::Contract(format!("invalid bit character {c:?}"))),
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Whether the stream covers a whole number of bytes.
    pub fn is_byte_aligned(&self) -> bool {
        self.len % 8 == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.bytes[i >> 3] >> (7 - (i & 7))) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let mask = 0x80u8 >> (i & 7);
        if bit {
            self.bytes[i >> 3] |= mask;
        } else {
            self.bytes[i >> 3] &= !mask;
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    /// Appends `count` bits of `other` starting at bit `start`.
    pub fn extend_from(&mut self, other: &BitStream, start: usize, count: usize) {
        assert!(start + count <= other.len, "range out of bounds");
        if self.len % 8 == 0 && start % 8 == 0 {
            let first = start / 8;
            let whole = count / 8;
            self.bytes.extend_from_slice(&other.bytes[first..first + whole]);
            self.len += whole * 8;
            for i in start + whole * 8..start + count {
                self.push(other.get(i));
            }
        } else {
            for i in start..start + count {
                self.push(other.get(i));
            }
        }
    }

    /// Appends `count` zero bits.
    pub fn extend_zeros(&mut self, count: usize) {
        let new_len = self.len + count;
        self.bytes.resize(new_len.div_ceil(8), 0);
        self.len = new_len;
    }

    /// Shortens the stream to `len` bits.
    pub fn truncate(&mut self, len: usize) {
        if len >= self.len {
            return;
        }
        self.len = len;
        self.bytes.truncate(len.div_ceil(8));
        if len % 8 != 0 {
            let keep = 0xFFu8 << (8 - len % 8);
            *self.bytes.last_mut().unwrap() &= keep;
        }
    }

    /// A copy of bits `start..start + count`.
    pub fn slice(&self, start: usize, count: usize) -> BitStream {
        let mut out = BitStream::with_capacity(count);
        out.extend_from(self, start, count);
        out
    }

    /// Number of one bits.
    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// The packed storage. The final byte is zero-padded when the length is
    /// not a multiple of eight.
    pub fn as_packed(&self) -> &[u8] {
        &self.bytes
    }

    /// Reassembles bytes; the length must be a multiple of eight.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if !self.is_byte_aligned() {
            return Err(Error::Contract(format!(
                "bit length {} is not a multiple of 8",
                self.len
            )));
        }
        Ok(self.bytes.clone())
    }

    pub fn into_bytes(self) -> Result<Vec<u8>> {
        if !self.is_byte_aligned() {
            return Err(Error::Contract(format!(
                "bit length {} is not a multiple of 8",
                self.len
            )));
        }
        Ok(self.bytes)
    }

    /// Mutable packed storage, for writers that fill whole bytes.
    pub(crate) fn packed_mut(&mut self) -> &mut [u8] {
        &mut self.bytes
    }
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitStream({} bits: ", self.len)?;
        for (i, b) in self.iter().take(128).enumerate() {
            if i > 0 && i % 8 == 0 {
                f.write_str("_")?;
            }
            f.write_str(if b { "1" } else { "0" })?;
        }
        if self.len > 128 {
            f.write_str("...")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromIterator<bool> for BitStream {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self::from_bits(iter)
    }
}
