//! Versioned binary key files.
//!
//! A key file stores one or more records back to back. Each record is:
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0 | 8 | magic `PERMXKEY` |
//! | 8 | 2 | version, currently 1 |
//! | 10 | 4 | block size N |
//! | 14 | 4 | map count m |
//! | 18 | 1 | tail policy: 0 identity, 1 drop, 2 pad |
//! | 19 | 8 | original length in bits |
//! | 27 | m·N·w | maps, 0-based targets, `w` = 1, 2 or 4 bytes (smallest width holding N−1) |
//! | … | ⌈c·log2(m)/8⌉ | selections, `log2(m)` bits each, MSB first, zero-padded |
//! | … | 4 | CRC-32 of every preceding byte of the record |
//!
//! Integers are little-endian. `c` is the number of permuted chunks:
//! `⌊l/N⌋`, or `⌈l/N⌉` under the pad policy.

use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::BitStream;
use crate::error::Result;
use crate::perm::{PermutationMap, PermutationSet};
use crate::transform::{KeyTrace, TailPolicy};

pub const MAGIC: &[u8; 8] = b"PERMXKEY";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 27;
pub const CHECKSUM_LEN: usize = 4;
/// Conventional file extension.
pub const EXTENSION: &str = "pxk";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KeyFileError {
    #[error("bad magic, not a key file")]
    BadMagic,
    #[error("unsupported key file version {0} (this build reads version {VERSION})")]
    UnsupportedVersion(u16),
    #[error("key file truncated: record needs {need} bytes, {have} available")]
    Truncated { need: u64, have: u64 },
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("stored map {index} is not a permutation: {reason}")]
    InvalidMap { index: usize, reason: String },
    #[error("{0} unexpected bytes after the last record")]
    TrailingBytes(usize),
}

fn tail_code(tail: TailPolicy) -> u8 {
    match tail {
        TailPolicy::IdentityPass => 0,
        TailPolicy::Drop => 1,
        TailPolicy::PadZero => 2,
    }
}

fn tail_from_code(code: u8) -> Option<TailPolicy> {
    match code {
        0 => Some(TailPolicy::IdentityPass),
        1 => Some(TailPolicy::Drop),
        2 => Some(TailPolicy::PadZero),
        _ => None,
    }
}

/// Bytes per stored index for block size `n`.
pub fn index_width(n: usize) -> usize {
    match n.saturating_sub(1) {
        0..=0xFF => 1,
        0x100..=0xFFFF => 2,
        _ => 4,
    }
}

/// Exact record size for `m` maps of size `n` and `chunks` selections.
pub fn record_len(n: usize, m: usize, chunks: u64) -> u64 {
    let sel_bits = chunks * u64::from(m.trailing_zeros());
    HEADER_LEN as u64 + (m * n * index_width(n)) as u64 + sel_bits.div_ceil(8) + CHECKSUM_LEN as u64
}

/// Serializes one trace. Equal traces always produce identical bytes.
pub fn encode(trace: &KeyTrace) -> Vec<u8> {
    let set = &trace.set;
    let n = set.block_size();
    let m = set.count();
    let width = index_width(n);
    let mut out = Vec::with_capacity(record_len(n, m, trace.selections.len() as u64) as usize);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(m as u32).to_le_bytes());
    out.push(tail_code(trace.tail));
    out.extend_from_slice(&trace.original_length.to_le_bytes());
    for map in set.maps() {
        for &t in map.targets() {
            out.extend_from_slice(&t.to_le_bytes()[..width]);
        }
    }
    let sel_bits = set.selection_bits();
    let mut packed = BitStream::with_capacity(trace.selections.len() * sel_bits as usize);
    for &s in &trace.selections {
        for b in (0..sel_bits).rev() {
            packed.push((s >> b) & 1 == 1);
        }
    }
    out.extend_from_slice(packed.as_packed());
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

/// Parses one record at the start of `data`, returning it and the number of
/// bytes it occupied.
fn decode_record(data: &[u8]) -> Result<(KeyTrace, usize), KeyFileError> {
    if data.len() < MAGIC.len() || &data[..MAGIC.len()] != MAGIC {
        return Err(KeyFileError::BadMagic);
    }
    if data.len() < HEADER_LEN {
        return Err(KeyFileError::Truncated {
            need: HEADER_LEN as u64,
            have: data.len() as u64,
        });
    }
    let version = u16::from_le_bytes([data[8], data[9]]);
    if version != VERSION {
        return Err(KeyFileError::UnsupportedVersion(version));
    }
    let n = u32::from_le_bytes(data[10..14].try_into().unwrap()) as usize;
    let m = u32::from_le_bytes(data[14..18].try_into().unwrap()) as usize;
    let tail_byte = data[18];
    let original_length = u64::from_le_bytes(data[19..27].try_into().unwrap());
    if n == 0 || !n.is_power_of_two() || m == 0 || !m.is_power_of_two() {
        return Err(KeyFileError::InvalidHeader(format!(
            "block size {n} and count {m} must be powers of two"
        )));
    }
    let tail = tail_from_code(tail_byte)
        .ok_or_else(|| KeyFileError::InvalidHeader(format!("unknown tail policy {tail_byte}")))?;
    let chunks = tail.chunk_count(original_length, n);
    let len = record_len(n, m, chunks);
    if len > data.len() as u64 {
        return Err(KeyFileError::Truncated {
            need: len,
            have: data.len() as u64,
        });
    }
    let len = len as usize;
    let body = &data[..len - CHECKSUM_LEN];
    let stored = u32::from_le_bytes(data[len - CHECKSUM_LEN..len].try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(KeyFileError::ChecksumMismatch { stored, computed });
    }

    let width = index_width(n);
    let maps_end = HEADER_LEN + m * n * width;
    let maps = data[HEADER_LEN..maps_end]
        .chunks_exact(n * width)
        .enumerate()
        .map(|(index, raw)| {
            let targets = raw
                .chunks_exact(width)
                .map(|b| {
                    let mut le = [0u8; 4];
                    le[..width].copy_from_slice(b);
                    u32::from_le_bytes(le)
                })
                .collect();
            PermutationMap::new(targets).map_err(|e| KeyFileError::InvalidMap {
                index,
                reason: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let set = PermutationSet::new(maps).map_err(|e| KeyFileError::InvalidHeader(e.to_string()))?;

    let sel_bits = set.selection_bits() as usize;
    let packed = BitStream::from_bytes(data[maps_end..len - CHECKSUM_LEN].to_vec());
    let selections = (0..chunks as usize)
        .map(|c| {
            (0..sel_bits).fold(0u32, |acc, b| (acc << 1) | u32::from(packed.get(c * sel_bits + b)))
        })
        .collect();
    let trace = KeyTrace {
        set: Arc::new(set),
        selections,
        tail,
        original_length,
    };
    Ok((trace, len))
}

/// Parses a buffer holding exactly one record.
pub fn decode(data: &[u8]) -> Result<KeyTrace, KeyFileError> {
    let (trace, used) = decode_record(data)?;
    if used != data.len() {
        return Err(KeyFileError::TrailingBytes(data.len() - used));
    }
    Ok(trace)
}

/// Parses a buffer of one or more back-to-back records.
pub fn decode_many(mut data: &[u8]) -> Result<Vec<KeyTrace>, KeyFileError> {
    let mut out = Vec::new();
    loop {
        let (trace, used) = decode_record(data)?;
        out.push(trace);
        data = &data[used..];
        if data.is_empty() {
            return Ok(out);
        }
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never observe a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> std::io::Result<()> {
    use std::io::Write;
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn save(trace: &KeyTrace, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, &encode(trace))?;
    Ok(())
}

pub fn save_many(traces: &[KeyTrace], path: impl AsRef<Path>) -> Result<()> {
    let bytes: Vec<u8> = traces.iter().flat_map(encode).collect();
    write_atomic(path, &bytes)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<KeyTrace> {
    Ok(decode(&std::fs::read(path)?)?)
}

pub fn load_many(path: impl AsRef<Path>) -> Result<Vec<KeyTrace>> {
    Ok(decode_many(&std::fs::read(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{generate_set, ShuffleMode};
    use crate::source::EntropySource;
    use crate::transform::expand;

    fn sample_trace(n: usize, m: usize, len: usize, tail: TailPolicy) -> KeyTrace {
        let mut src = EntropySource::seeded(b"keyfile").unwrap();
        let set = Arc::new(generate_set(n, m, &mut src, ShuffleMode::Unbiased).unwrap());
        let input = src.next_bits(len).unwrap();
        expand(&input, &set, &mut src, tail).unwrap().1
    }

    #[test]
    fn widths() {
        assert_eq!(index_width(8), 1);
        assert_eq!(index_width(256), 1);
        assert_eq!(index_width(512), 2);
        assert_eq!(index_width(65536), 2);
        assert_eq!(index_width(131072), 4);
    }

    #[test]
    fn round_trip_is_canonical() {
        for (n, m, len, tail) in [
            (8, 1, 100, TailPolicy::IdentityPass),
            (256, 16, 5000, TailPolicy::PadZero),
            (512, 8, 4097, TailPolicy::Drop),
            (64, 256, 0, TailPolicy::IdentityPass),
        ] {
            let trace = sample_trace(n, m, len, tail);
            let bytes = encode(&trace);
            assert_eq!(bytes.len() as u64, record_len(n, m, trace.selections.len() as u64));
            let back = decode(&bytes).unwrap();
            assert_eq!(back, trace);
            assert_eq!(encode(&back), bytes);
        }
    }

    #[test]
    fn size_formula_for_ten_megabytes() {
        // 10 MB at N=256, m=16: 16·256·1 bytes of maps, 327680 chunks × 4 bits
        let chunks = 10 * 1024 * 1024 * 8 / 256;
        assert_eq!(record_len(256, 16, chunks), 27 + 4096 + 163_840 + 4);
    }

    #[test]
    fn every_single_byte_corruption_is_detected() {
        let bytes = encode(&sample_trace(16, 4, 300, TailPolicy::PadZero));
        for i in 0..bytes.len() {
            for flip in [0x01u8, 0x80, 0xFF] {
                let mut bad = bytes.clone();
                bad[i] ^= flip;
                assert!(decode(&bad).is_err(), "flip {flip:#x} at {i} not detected");
            }
        }
    }

    #[test]
    fn version_bump_is_explicit() {
        let mut bytes = encode(&sample_trace(8, 2, 64, TailPolicy::IdentityPass));
        bytes[8] += 1;
        assert_eq!(decode(&bytes).unwrap_err(), KeyFileError::UnsupportedVersion(2));
    }

    #[test]
    fn truncation_and_trailing() {
        let bytes = encode(&sample_trace(8, 2, 64, TailPolicy::IdentityPass));
        assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(KeyFileError::Truncated { .. })));
        assert!(matches!(decode(&bytes[..5]), Err(KeyFileError::BadMagic)));
        let mut long = bytes.clone();
        long.push(0);
        assert!(decode(&long).is_err());
    }

    #[test]
    fn tampered_map_with_fixed_checksum_is_rejected() {
        let mut bytes = encode(&sample_trace(8, 1, 0, TailPolicy::IdentityPass));
        bytes[HEADER_LEN] = bytes[HEADER_LEN + 1];
        let end = bytes.len() - CHECKSUM_LEN;
        let crc = crc32fast::hash(&bytes[..end]);
        bytes[end..].copy_from_slice(&crc.to_le_bytes());
        assert!(matches!(decode(&bytes), Err(KeyFileError::InvalidMap { index: 0, .. })));
    }

    #[test]
    fn multiple_records() {
        let a = sample_trace(8, 2, 80, TailPolicy::IdentityPass);
        let b = sample_trace(32, 4, 99, TailPolicy::Drop);
        let bytes: Vec<u8> = [encode(&a), encode(&b)].concat();
        assert_eq!(decode_many(&bytes).unwrap(), vec![a, b]);
        assert!(matches!(decode(&bytes), Err(KeyFileError::TrailingBytes(_))));
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.pxk");
        let trace = sample_trace(128, 8, 1000, TailPolicy::IdentityPass);
        save(&trace, &path).unwrap();
        assert_eq!(load(&path).unwrap(), trace);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
