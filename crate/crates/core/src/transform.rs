//! The expansion engine and its exact inverse.
//!
//! The input bit string is cut into contiguous N-bit chunks. Before each
//! chunk, `log2(m)` bits are read from the entropy source (MSB first) and
//! name the map that permutes that chunk. Permuted chunks are concatenated
//! in order. Chunk boundaries depend only on absolute bit offsets, so a
//! streamed run and an in-memory run over the same source agree exactly.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::bits::BitStream;
use crate::error::{Error, Result};
use crate::perm::PermutationSet;
use crate::source::EntropySource;

/// What happens to the final `l mod N` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum TailPolicy {
    /// Copy the partial chunk unchanged. Output length equals input length.
    #[default]
    IdentityPass,
    /// Omit the partial chunk.
    Drop,
    /// Complete the partial chunk with zeros and permute it in full.
    PadZero,
}

impl TailPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            TailPolicy::IdentityPass => "identity",
            TailPolicy::Drop => "drop",
            TailPolicy::PadZero => "pad",
        }
    }

    /// Number of chunks that receive a selection for an input of `len` bits.
    pub fn chunk_count(self, len: u64, block_size: usize) -> u64 {
        let n = block_size as u64;
        match self {
            TailPolicy::IdentityPass | TailPolicy::Drop => len / n,
            TailPolicy::PadZero => len.div_ceil(n),
        }
    }

    /// Length of the expanded output for an input of `len` bits.
    pub fn output_length(self, len: u64, block_size: usize) -> u64 {
        let n = block_size as u64;
        match self {
            TailPolicy::IdentityPass => len,
            TailPolicy::Drop => len / n * n,
            TailPolicy::PadZero => len.div_ceil(n) * n,
        }
    }
}

impl fmt::Display for TailPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TailPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" | "identity-pass" => Ok(TailPolicy::IdentityPass),
            "drop" => Ok(TailPolicy::Drop),
            "pad" | "pad-zero" => Ok(TailPolicy::PadZero),
            other => Err(Error::Contract(format!("unknown tail policy {other:?}"))),
        }
    }
}

/// Everything needed to undo one expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyTrace {
    pub set: Arc<PermutationSet>,
    /// One map index per permuted chunk, in chunk order.
    pub selections: Vec<u32>,
    pub tail: TailPolicy,
    /// Input length in bits.
    pub original_length: u64,
}

impl KeyTrace {
    pub fn block_size(&self) -> usize {
        self.set.block_size()
    }

    /// Chunks carrying a selection.
    pub fn chunk_count(&self) -> u64 {
        self.tail.chunk_count(self.original_length, self.block_size())
    }

    /// Length of the expanded stream this trace describes.
    pub fn output_length(&self) -> u64 {
        self.tail.output_length(self.original_length, self.block_size())
    }

    /// Length `invert` returns.
    pub fn restored_length(&self) -> u64 {
        match self.tail {
            TailPolicy::Drop => self.output_length(),
            TailPolicy::IdentityPass | TailPolicy::PadZero => self.original_length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.selections.len() as u64 != self.chunk_count() {
            return Err(Error::Contract(format!(
                "trace holds {} selections for {} chunks",
                self.selections.len(),
                self.chunk_count()
            )));
        }
        let m = self.set.count();
        if let Some((chunk, sel)) = self
            .selections
            .iter()
            .enumerate()
            .find(|(_, &s)| s as usize >= m)
        {
            return Err(Error::Contract(format!(
                "selection {sel} for chunk {chunk} is out of range for {m} maps"
            )));
        }
        Ok(())
    }
}

/// Draws one selection per chunk, in chunk order.
pub fn draw_selections(
    set: &PermutationSet,
    source: &mut EntropySource,
    chunks: u64,
) -> Result<Vec<u32>> {
    let width = set.selection_bits();
    (0..chunks as usize)
        .map(|chunk| {
            source
                .next_uint(width)
                .map(|v| v as u32)
                .map_err(|e| Error::ChunkSelection {
                    chunk,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Permutes `input` with pre-drawn selections. Pure: no randomness involved.
pub fn apply_selections(
    input: &BitStream,
    set: &PermutationSet,
    selections: &[u32],
    tail: TailPolicy,
) -> Result<BitStream> {
    let n = set.block_size();
    let len = input.len() as u64;
    let chunks = tail.chunk_count(len, n);
    if selections.len() as u64 != chunks {
        return Err(Error::Contract(format!(
            "{} selections given for {chunks} chunks",
            selections.len()
        )));
    }
    let padded;
    let src = if tail == TailPolicy::PadZero && input.len() % n != 0 {
        let mut p = input.clone();
        p.extend_zeros(n - input.len() % n);
        padded = p;
        &padded
    } else {
        input
    };
    let mut out = BitStream::zeros(tail.output_length(len, n) as usize);
    for (j, &sel) in selections.iter().enumerate() {
        let map = set.get(sel as usize).ok_or_else(|| {
            Error::Contract(format!("selection {sel} for chunk {j} is out of range"))
        })?;
        map.apply_into(src, j * n, &mut out, j * n);
    }
    if tail == TailPolicy::IdentityPass {
        for i in chunks as usize * n..input.len() {
            out.set(i, input.get(i));
        }
    }
    Ok(out)
}

/// Expands `input`: chunk, select a map per chunk from fresh source bits,
/// permute, concatenate.
pub fn expand(
    input: &BitStream,
    set: &Arc<PermutationSet>,
    source: &mut EntropySource,
    tail: TailPolicy,
) -> Result<(BitStream, KeyTrace)> {
    let chunks = tail.chunk_count(input.len() as u64, set.block_size());
    let selections = draw_selections(set, source, chunks)?;
    let output = apply_selections(input, set, &selections, tail)?;
    let trace = KeyTrace {
        set: Arc::clone(set),
        selections,
        tail,
        original_length: input.len() as u64,
    };
    Ok((output, trace))
}

/// Undoes [`expand`]. Under `Drop` the result is the input truncated to
/// whole chunks.
pub fn invert(input: &BitStream, trace: &KeyTrace) -> Result<BitStream> {
    trace.validate()?;
    if input.len() as u64 != trace.output_length() {
        return Err(Error::LengthMismatch {
            expected: trace.output_length(),
            actual: input.len() as u64,
        });
    }
    let inverse = trace.set.inverted();
    let n = trace.block_size();
    let mut out = BitStream::zeros(input.len());
    for (j, &sel) in trace.selections.iter().enumerate() {
        inverse.maps()[sel as usize].apply_into(input, j * n, &mut out, j * n);
    }
    let permuted = trace.selections.len() * n;
    for i in permuted..input.len() {
        out.set(i, input.get(i));
    }
    out.truncate(trace.restored_length() as usize);
    Ok(out)
}

/// Applies [`expand`] `times` times with the same set and fresh selections.
/// Traces come back in application order.
pub fn repeat_expand(
    input: &BitStream,
    set: &Arc<PermutationSet>,
    source: &mut EntropySource,
    tail: TailPolicy,
    times: usize,
) -> Result<(BitStream, Vec<KeyTrace>)> {
    if times == 0 {
        return Err(Error::Contract("repeat count must be at least 1".into()));
    }
    let mut current = input.clone();
    let mut traces = Vec::with_capacity(times);
    for _ in 0..times {
        let (next, trace) = expand(&current, set, source, tail)?;
        current = next;
        traces.push(trace);
    }
    Ok((current, traces))
}

/// Inverts a sequence of traces produced by [`repeat_expand`].
pub fn invert_all(input: &BitStream, traces: &[KeyTrace]) -> Result<BitStream> {
    traces
        .iter()
        .rev()
        .try_fold(input.clone(), |acc, trace| invert(&acc, trace))
}

/// Incremental expansion over byte buffers, for block sizes that are a
/// multiple of eight. Output bytes are emitted as soon as a chunk is full.
pub struct StreamExpander<'a> {
    set: Arc<PermutationSet>,
    source: &'a mut EntropySource,
    tail: TailPolicy,
    chunk_bytes: usize,
    pending: Vec<u8>,
    selections: Vec<u32>,
    total_bytes: u64,
}

impl<'a> StreamExpander<'a> {
    pub fn new(
        set: Arc<PermutationSet>,
        source: &'a mut EntropySource,
        tail: TailPolicy,
    ) -> Result<Self> {
        let n = set.block_size();
        if n % 8 != 0 {
            return Err(Error::Contract(format!(
                "streaming needs a block size divisible by 8, got {n}"
            )));
        }
        Ok(Self {
            set,
            source,
            tail,
            chunk_bytes: n / 8,
            pending: Vec::with_capacity(n / 8),
            selections: Vec::new(),
            total_bytes: 0,
        })
    }

    fn emit_chunk(&mut self, chunk: &[u8], out: &mut Vec<u8>) -> Result<()> {
        let index = self.selections.len();
        let sel = self
            .source
            .next_uint(self.set.selection_bits())
            .map_err(|e| Error::ChunkSelection {
                chunk: index,
                source: Box::new(e),
            })? as u32;
        self.selections.push(sel);
        let start = out.len();
        out.resize(start + self.chunk_bytes, 0);
        self.set.maps()[sel as usize].apply_bytes(chunk, &mut out[start..]);
        Ok(())
    }

    /// Feeds more input, appending any completed output to `out`.
    pub fn update(&mut self, mut data: &[u8], out: &mut Vec<u8>) -> Result<()> {
        self.total_bytes += data.len() as u64;
        if !self.pending.is_empty() {
            let need = self.chunk_bytes - self.pending.len();
            let take = need.min(data.len());
            self.pending.extend_from_slice(&data[..take]);
            data = &data[take..];
            if self.pending.len() == self.chunk_bytes {
                let chunk = std::mem::take(&mut self.pending);
                self.emit_chunk(&chunk, out)?;
                self.pending = chunk;
                self.pending.clear();
            }
        }
        let mut whole = data.chunks_exact(self.chunk_bytes);
        for chunk in &mut whole {
            self.emit_chunk(chunk, out)?;
        }
        self.pending.extend_from_slice(whole.remainder());
        Ok(())
    }

    /// Flushes the tail according to the policy and returns the trace.
    pub fn finish(mut self, out: &mut Vec<u8>) -> Result<KeyTrace> {
        if !self.pending.is_empty() {
            match self.tail {
                TailPolicy::IdentityPass => out.extend_from_slice(&self.pending),
                TailPolicy::Drop => {}
                TailPolicy::PadZero => {
                    let mut chunk = std::mem::take(&mut self.pending);
                    chunk.resize(self.chunk_bytes, 0);
                    self.emit_chunk(&chunk, out)?;
                }
            }
        }
        Ok(KeyTrace {
            set: self.set,
            selections: self.selections,
            tail: self.tail,
            original_length: self.total_bytes * 8,
        })
    }
}

/// Incremental inverse of a byte-aligned trace.
pub struct StreamInverter<'a> {
    trace: &'a KeyTrace,
    inverse: PermutationSet,
    chunk_bytes: usize,
    pending: Vec<u8>,
    chunk: usize,
    consumed: u64,
    emitted: u64,
}

impl<'a> StreamInverter<'a> {
    pub fn new(trace: &'a KeyTrace) -> Result<Self> {
        trace.validate()?;
        let n = trace.block_size();
        if n % 8 != 0 || trace.original_length % 8 != 0 {
            return Err(Error::Contract(
                "streaming inversion needs byte-aligned blocks and input".into(),
            ));
        }
        Ok(Self {
            trace,
            inverse: trace.set.inverted(),
            chunk_bytes: n / 8,
            pending: Vec::new(),
            chunk: 0,
            consumed: 0,
            emitted: 0,
        })
    }

    fn push_bytes(&mut self, bytes: &[u8], out: &mut Vec<u8>) {
        let limit = self.trace.restored_length() / 8;
        let room = (limit - self.emitted).min(bytes.len() as u64) as usize;
        out.extend_from_slice(&bytes[..room]);
        self.emitted += room as u64;
    }

    pub fn update(&mut self, data: &[u8], out: &mut Vec<u8>) -> Result<()> {
        self.consumed += data.len() as u64;
        if self.consumed * 8 > self.trace.output_length() {
            return Err(Error::LengthMismatch {
                expected: self.trace.output_length(),
                actual: self.consumed * 8,
            });
        }
        self.pending.extend_from_slice(data);
        let mut buf = vec![0u8; self.chunk_bytes];
        let mut offset = 0;
        while self.chunk < self.trace.selections.len()
            && self.pending.len() - offset >= self.chunk_bytes
        {
            let sel = self.trace.selections[self.chunk] as usize;
            self.inverse.maps()[sel]
                .apply_bytes(&self.pending[offset..offset + self.chunk_bytes], &mut buf);
            self.push_bytes(&buf, out);
            offset += self.chunk_bytes;
            self.chunk += 1;
        }
        self.pending.drain(..offset);
        if self.chunk == self.trace.selections.len() && !self.pending.is_empty() {
            let rest = std::mem::take(&mut self.pending);
            self.push_bytes(&rest, out);
        }
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        if self.consumed * 8 != self.trace.output_length() {
            return Err(Error::LengthMismatch {
                expected: self.trace.output_length(),
                actual: self.consumed * 8,
            });
        }
        Ok(())
    }
}
