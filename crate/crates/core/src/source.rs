//! Entropy sources: where every random bit in the system comes from.
//!
//! A source is a single-consumer stream of bits. Bytes are split into bits
//! most-significant first, the same convention the codecs use. Concurrent
//! use needs external serialization or one source per thread.

use std::fmt;
use std::path::Path;

use rand_chacha::ChaCha20Rng;
use rand_core::{OsRng, SeedableRng, TryRngCore};

use crate::bits::BitStream;
use crate::error::{Error, Result};

/// Which kind of supplier backs a source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    /// A finite file of externally generated (e.g. QRNG) entropy.
    QrngFile,
    /// The operating system's entropy pool.
    System,
    /// A reproducible stream: an incrementing counter or a seeded ChaCha20 stream.
    DeterministicTest,
}

enum Supply {
    File { data: Vec<u8>, next: usize, cycle: bool },
    System { buf: [u8; 64], idx: usize },
    Seeded { rng: Box<ChaCha20Rng>, buf: [u8; 64], idx: usize },
    Counter { next: u8 },
}

/// A stream of random bits with exact consumption accounting.
pub struct EntropySource {
    supply: Supply,
    position: u64,
    current: u8,
    left_in_byte: u8,
}

impl fmt::Debug for EntropySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EntropySource")
            .field("kind", &self.kind())
            .field("position", &self.position)
            .field("capacity", &self.capacity())
            .finish()
    }
}

impl EntropySource {
    fn with_supply(supply: Supply) -> Self {
        Self {
            supply,
            position: 0,
            current: 0,
            left_in_byte: 0,
        }
    }

    /// A finite source over raw entropy bytes. With `cycle` the bytes are
    /// reused from the start once exhausted, which is insecure and must be
    /// requested explicitly.
    pub fn from_entropy_bytes(data: impl Into<Vec<u8>>, cycle: bool) -> Self {
        let data = data.into();
        let cycle = cycle && !data.is_empty();
        Self::with_supply(Supply::File {
            data,
            next: 0,
            cycle,
        })
    }

    /// Reads an entropy file fully into memory.
    pub fn from_entropy_file(path: impl AsRef<Path>, cycle: bool) -> Result<Self> {
        let data = std::fs::read(path)?;
        Ok(Self::from_entropy_bytes(data, cycle))
    }

    /// Bits from the operating system's generator.
    pub fn system() -> Self {
        Self::with_supply(Supply::System {
            buf: [0; 64],
            idx: 64,
        })
    }

    /// A ChaCha20 stream keyed by `seed` (at most 32 bytes, zero-padded).
    /// Output is identical on every platform.
    pub fn seeded(seed: &[u8]) -> Result<Self> {
        if seed.len() > 32 {
            return Err(Error::Contract(format!(
                "seed is {} bytes, at most 32 allowed",
                seed.len()
            )));
        }
        let mut key = [0u8; 32];
        key[..seed.len()].copy_from_slice(seed);
        Ok(Self::with_supply(Supply::Seeded {
            rng: Box::new(ChaCha20Rng::from_seed(key)),
            buf: [0; 64],
            idx: 64,
        }))
    }

    /// Parses a hexadecimal seed, as given on the command line.
    pub fn seeded_hex(hex_seed: &str) -> Result<Self> {
        let trimmed = hex_seed.trim().trim_start_matches("0x");
        let padded;
        let digits = if trimmed.len() % 2 == 1 {
            padded = format!("0{trimmed}");
            padded.as_str()
        } else {
            trimmed
        };
        let seed = hex::decode(digits)
            .map_err(|e| Error::Contract(format!("invalid hex seed {hex_seed:?}: {e}")))?;
        Self::seeded(&seed)
    }

    /// The incrementing byte counter `start, start+1, ...` (wrapping).
    pub fn counter(start: u8) -> Self {
        Self::with_supply(Supply::Counter { next: start })
    }

    pub fn kind(&self) -> SourceKind {
        match self.supply {
            Supply::File { .. } => SourceKind::QrngFile,
            Supply::System { .. } => SourceKind::System,
            Supply::Seeded { .. } | Supply::Counter { .. } => SourceKind::DeterministicTest,
        }
    }

    /// Bits consumed so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Total bits available, `None` when unbounded.
    pub fn capacity(&self) -> Option<u64> {
        match &self.supply {
            Supply::File { data, cycle, .. } if !cycle => Some(data.len() as u64 * 8),
            _ => None,
        }
    }

    /// Bits that can still be drawn, `None` when unbounded.
    pub fn remaining(&self) -> Option<u64> {
        self.capacity().map(|c| c - self.position)
    }

    fn ensure(&self, k: u64) -> Result<()> {
        if let Some(cap) = self.capacity() {
            if self.position + k > cap {
                return Err(Error::Exhausted {
                    consumed: self.position,
                    requested: k,
                    capacity: cap,
                });
            }
        }
        Ok(())
    }

    fn next_byte(&mut self) -> u8 {
        match &mut self.supply {
            Supply::File { data, next, .. } => {
                if *next == data.len() {
                    // only reachable with cycle; `ensure` guards the rest
                    *next = 0;
                }
                let b = data[*next];
                *next += 1;
                b
            }
            Supply::System { buf, idx } => {
                if *idx == buf.len() {
                    OsRng
                        .try_fill_bytes(buf)
                        .expect("operating system entropy unavailable");
                    *idx = 0;
                }
                let b = buf[*idx];
                *idx += 1;
                b
            }
            Supply::Seeded { rng, buf, idx } => {
                if *idx == buf.len() {
                    rand_core::RngCore::fill_bytes(rng.as_mut(), buf);
                    *idx = 0;
                }
                let b = buf[*idx];
                *idx += 1;
                b
            }
            Supply::Counter { next } => {
                let b = *next;
                *next = next.wrapping_add(1);
                b
            }
        }
    }

    #[inline]
    fn take_bit(&mut self) -> bool {
        if self.left_in_byte == 0 {
            self.current = self.next_byte();
            self.left_in_byte = 8;
        }
        self.left_in_byte -= 1;
        self.position += 1;
        (self.current >> self.left_in_byte) & 1 == 1
    }

    /// Draws `k` bits in consumption order.
    pub fn next_bits(&mut self, k: usize) -> Result<BitStream> {
        self.ensure(k as u64)?;
        let mut out = BitStream::with_capacity(k);
        for _ in 0..k {
            out.push(self.take_bit());
        }
        Ok(out)
    }

    /// Draws `k <= 64` bits and reads them as an unsigned integer, first bit
    /// most significant.
    pub fn next_uint(&mut self, k: u32) -> Result<u64> {
        if k > 64 {
            return Err(Error::Contract(format!("cannot draw {k} bits into a u64")));
        }
        self.ensure(u64::from(k))?;
        let mut v = 0u64;
        for _ in 0..k {
            v = (v << 1) | u64::from(self.take_bit());
        }
        Ok(v)
    }

    /// Uniform integer on `lo..=hi` by rejection sampling on
    /// `ceil(log2(hi - lo + 1))`-bit draws. Power-of-two ranges never reject.
    pub fn random_int(&mut self, lo: u64, hi: u64) -> Result<u64> {
        if lo > hi {
            return Err(Error::Contract(format!("empty range {lo}..={hi}")));
        }
        let span = hi - lo;
        if span == 0 {
            return Ok(lo);
        }
        let width = 64 - span.leading_zeros();
        loop {
            let v = self.next_uint(width)?;
            if v <= span {
                return Ok(lo + v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_yields_incrementing_bytes() {
        let mut s = EntropySource::counter(0);
        assert_eq!(s.next_bits(8).unwrap().to_string(), "00000000");
        assert_eq!(s.next_bits(8).unwrap().to_string(), "00000001");
        assert_eq!(s.position(), 16);
    }

    #[test]
    fn zero_bits_leaves_position() {
        let mut s = EntropySource::counter(7);
        s.next_bits(3).unwrap();
        assert!(s.next_bits(0).unwrap().is_empty());
        assert_eq!(s.position(), 3);
    }

    #[test]
    fn file_exhaustion() {
        let mut s = EntropySource::from_entropy_bytes(vec![0xAB, 0xCD], false);
        assert_eq!(s.capacity(), Some(16));
        let err = s.next_bits(17).unwrap_err();
        assert!(matches!(
            err,
            Error::Exhausted {
                consumed: 0,
                requested: 17,
                capacity: 16
            }
        ));
        assert_eq!(s.position(), 0);
        assert_eq!(s.next_bits(16).unwrap().to_string(), "1010101111001101");
        assert!(s.next_bits(1).unwrap_err().is_exhaustion());
    }

    #[test]
    fn file_cycle_reuses_bytes() {
        let mut s = EntropySource::from_entropy_bytes(vec![0xF0], true);
        assert_eq!(s.capacity(), None);
        assert_eq!(s.next_bits(12).unwrap().to_string(), "111100001111");
    }

    #[test]
    fn empty_file_never_cycles() {
        let mut s = EntropySource::from_entropy_bytes(Vec::new(), true);
        assert!(s.next_bits(1).is_err());
    }

    #[test]
    fn degenerate_range_consumes_nothing() {
        let mut s = EntropySource::counter(0);
        assert_eq!(s.random_int(5, 5).unwrap(), 5);
        assert_eq!(s.position(), 0);
    }

    #[test]
    fn power_of_two_range_takes_exact_bits() {
        let mut s = EntropySource::seeded(b"x").unwrap();
        for i in 1..=100 {
            let v = s.random_int(1, 4).unwrap();
            assert!((1..=4).contains(&v));
            assert_eq!(s.position(), 2 * i);
        }
    }

    #[test]
    fn rejection_skips_out_of_range() {
        // 0b11 is rejected for a range of size 3, then 0b10 accepted
        let mut s = EntropySource::from_entropy_bytes(vec![0b1110_0000], false);
        assert_eq!(s.random_int(0, 2).unwrap(), 2);
        assert_eq!(s.position(), 4);
    }

    #[test]
    fn size_three_range_is_uniform() {
        // Each count is Binomial(n, 1/3): sigma = sqrt(n * 1/3 * 2/3).
        let n = 30_000u64;
        let mut s = EntropySource::seeded(b"uniform-three").unwrap();
        let mut counts = [0u64; 3];
        for _ in 0..n {
            counts[s.random_int(0, 2).unwrap() as usize] += 1;
        }
        let expected = n as f64 / 3.0;
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() < 4.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn seeded_is_reproducible() {
        let a = EntropySource::seeded_hex("c0ffee").unwrap().next_bits(256).unwrap();
        let b = EntropySource::seeded_hex("0xc0ffee").unwrap().next_bits(256).unwrap();
        let c = EntropySource::seeded_hex("c0ffef").unwrap().next_bits(256).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(EntropySource::seeded_hex("zz").is_err());
        assert!(EntropySource::seeded(&[0; 33]).is_err());
    }

    #[test]
    fn system_source_is_unbounded() {
        let mut s = EntropySource::system();
        assert_eq!(s.kind(), SourceKind::System);
        assert_eq!(s.capacity(), None);
        assert_eq!(s.next_bits(1000).unwrap().len(), 1000);
    }
}
