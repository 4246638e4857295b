//! Sparse permutation matrices over bit blocks.
//!
//! An N×N permutation matrix `P` has exactly one 1 per row and column, so it
//! is stored as the target array `S` with `P[i][S[i]] = 1`. Multiplying a
//! bit vector by `P` only moves bits around: `y[i] = v[S[i]]`. The dense
//! matrix is never built. Indices are 0-based in memory.

use crate::bits::BitStream;
use crate::error::{Error, Result};
use crate::source::EntropySource;

/// How swap indices are drawn while shuffling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShuffleMode {
    /// Textbook Fisher-Yates: the swap partner of position `i` (1-based) is
    /// uniform on `1..=i`, so all N! permutations are equally likely.
    #[default]
    Unbiased,
    /// Every swap partner uniform on `1..=N`. This is the naive shuffle and
    /// is not uniform over permutations; kept for fidelity experiments.
    PaperLiteral,
}

/// One permutation of `size` bit positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermutationMap {
    targets: Vec<u32>,
}

impl PermutationMap {
    /// Builds a map from 0-based targets, checking it is a bijection.
    pub fn new(targets: Vec<u32>) -> Result<Self> {
        check_bijection(&targets)?;
        Ok(Self { targets })
    }

    /// Builds a map from 1-based targets (`S[i]` in `1..=N`).
    pub fn from_one_based(targets: &[u32]) -> Result<Self> {
        let zero_based = targets
            .iter()
            .map(|&t| {
                t.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("1-based target 0".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(zero_based)
    }

    pub fn identity(size: usize) -> Self {
        Self {
            targets: (0..size as u32).collect(),
        }
    }

    /// Fisher-Yates shuffle of `size` positions.
    ///
    /// All swap indices `K[1..=N]` are drawn first, in ascending `i`, then
    /// applied as `swap(S[K[i]], S[i])` for `i = N..1`.
    pub fn random(size: usize, source: &mut EntropySource, mode: ShuffleMode) -> Result<Self> {
        if size == 0 {
            return Err(Error::Contract("permutation size must be positive".into()));
        }
        let n = size as u64;
        let draws = (1..=n)
            .map(|i| match mode {
                ShuffleMode::Unbiased => source.random_int(1, i),
                ShuffleMode::PaperLiteral => source.random_int(1, n),
            })
            .collect::<Result<Vec<u64>>>()
            .map_err(|e| Error::Generation {
                consumed: source.position(),
                source: Box::new(e),
            })?;
        let mut targets: Vec<u32> = (0..size as u32).collect();
        for i in (0..size).rev() {
            targets.swap(draws[i] as usize - 1, i);
        }
        Ok(Self { targets })
    }

    /// Block length N.
    pub fn size(&self) -> usize {
        self.targets.len()
    }

    /// 0-based targets.
    pub fn targets(&self) -> &[u32] {
        &self.targets
    }

    pub fn to_one_based(&self) -> Vec<u32> {
        self.targets.iter().map(|&t| t + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.targets.iter().enumerate().all(|(i, &t)| i as u32 == t)
    }

    /// `y = P·v`, i.e. `y[i] = v[S[i]]`.
    pub fn apply(&self, block: &BitStream) -> Result<BitStream> {
        if block.len() != self.size() {
            return Err(Error::LengthMismatch {
                expected: self.size() as u64,
                actual: block.len() as u64,
            });
        }
        let mut out = BitStream::zeros(self.size());
        self.apply_into(block, 0, &mut out, 0);
        Ok(out)
    }

    /// Writes the permuted chunk `src[src_off..src_off+N]` over
    /// `dst[dst_off..dst_off+N]`. Both ranges must be in bounds.
    pub fn apply_into(&self, src: &BitStream, src_off: usize, dst: &mut BitStream, dst_off: usize) {
        let n = self.size();
        assert!(src_off + n <= src.len() && dst_off + n <= dst.len());
        if dst_off % 8 == 0 && n % 8 == 0 {
            let out = &mut dst.packed_mut()[dst_off / 8..(dst_off + n) / 8];
            for (byte, targets) in out.iter_mut().zip(self.targets.chunks_exact(8)) {
                let mut b = 0u8;
                for &t in targets {
                    b = (b << 1) | u8::from(src.get(src_off + t as usize));
                }
                *byte = b;
            }
        } else {
            for (i, &t) in self.targets.iter().enumerate() {
                dst.set(dst_off + i, src.get(src_off + t as usize));
            }
        }
    }

    /// Byte-slice form of [`apply`](Self::apply) for blocks whose length is a
    /// multiple of eight: `dst` receives the permuted bits of `src`.
    pub fn apply_bytes(&self, src: &[u8], dst: &mut [u8]) {
        let n = self.size();
        assert!(n % 8 == 0 && src.len() * 8 == n && dst.len() * 8 == n);
        for (byte, targets) in dst.iter_mut().zip(self.targets.chunks_exact(8)) {
            let mut b = 0u8;
            for &t in targets {
                let t = t as usize;
                b = (b << 1) | ((src[t >> 3] >> (7 - (t & 7))) & 1);
            }
            *byte = b;
        }
    }

    /// The inverse map, `S⁻¹[S[i]] = i`.
    pub fn invert(&self) -> Self {
        let mut inv = vec![0u32; self.size()];
        for (i, &t) in self.targets.iter().enumerate() {
            inv[t as usize] = i as u32;
        }
        Self { targets: inv }
    }
}

fn check_bijection(targets: &[u32]) -> Result<()> {
    let n = targets.len();
    let mut seen = vec![false; n];
    for (i, &t) in targets.iter().enumerate() {
        let t = t as usize;
        if t >= n {
            return Err(Error::InvalidPermutation(format!(
                "target {t} at row {i} out of range for size {n}"
            )));
        }
        if std::mem::replace(&mut seen[t], true) {
            return Err(Error::InvalidPermutation(format!(
                "target {t} appears more than once"
            )));
        }
    }
    Ok(())
}

/// Generates one map of a power-of-two size `n >= 2`.
pub fn generate_permutation(
    n: usize,
    source: &mut EntropySource,
    mode: ShuffleMode,
) -> Result<PermutationMap> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Contract(format!(
            "permutation size {n} must be a power of two >= 2"
        )));
    }
    PermutationMap::random(n, source, mode)
}

/// `m` maps of a shared block size, selectable by `log2(m)` bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationSet {
    block_size: usize,
    maps: Vec<PermutationMap>,
}

impl PermutationSet {
    pub fn new(maps: Vec<PermutationMap>) -> Result<Self> {
        let Some(first) = maps.first() else {
            return Err(Error::Contract("a permutation set needs at least one map".into()));
        };
        let block_size = first.size();
        if !block_size.is_power_of_two() {
            return Err(Error::Contract(format!(
                "block size {block_size} is not a power of two"
            )));
        }
        if !maps.len().is_power_of_two() {
            return Err(Error::Contract(format!(
                "map count {} is not a power of two",
                maps.len()
            )));
        }
        if let Some(bad) = maps.iter().find(|m| m.size() != block_size) {
            return Err(Error::Contract(format!(
                "map of size {} in a set of block size {block_size}",
                bad.size()
            )));
        }
        Ok(Self { block_size, maps })
    }

    /// A set holding only the identity of size `n`.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![PermutationMap::identity(n)])
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn count(&self) -> usize {
        self.maps.len()
    }

    /// Bits needed to pick one map: `log2(m)`.
    pub fn selection_bits(&self) -> u32 {
        self.maps.len().trailing_zeros()
    }

    pub fn maps(&self) -> &[PermutationMap] {
        &self.maps
    }

    pub fn get(&self, index: usize) -> Option<&PermutationMap> {
        self.maps.get(index)
    }

    /// The set of inverse maps, index for index.
    pub fn inverted(&self) -> Self {
        Self {
            block_size: self.block_size,
            maps: self.maps.iter().map(PermutationMap::invert).collect(),
        }
    }
}

/// Generates `m` independent maps of size `n`. Duplicates are allowed.
pub fn generate_set(
    n: usize,
    m: usize,
    source: &mut EntropySource,
    mode: ShuffleMode,
) -> Result<PermutationSet> {
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::Contract(format!("map count {m} must be a power of two >= 1")));
    }
    let maps = (0..m)
        .map(|_| generate_permutation(n, source, mode))
        .collect::<Result<Vec<_>>>()?;
    PermutationSet::new(maps)
}
