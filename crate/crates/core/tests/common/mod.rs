//! Shared fixtures for integration tests.
#![allow(dead_code)]

use permex_core::EntropySource;

pub const HARBOR: &[u8] = include_bytes!("../data/harbor.txt");
pub const GARDEN: &[u8] = include_bytes!("../data/garden.txt");
pub const RAILWAY: &[u8] = include_bytes!("../data/railway.txt");

pub fn english_texts() -> Vec<(&'static str, &'static [u8])> {
    vec![("harbor.txt", HARBOR), ("garden.txt", GARDEN), ("railway.txt", RAILWAY)]
}

/// Deterministic English-like text of exactly `len` bytes: sentences of
/// words drawn, by frequency, from the fixture texts.
pub fn text_corpus(len: usize, seed: &[u8]) -> Vec<u8> {
    let words: Vec<&[u8]> = english_texts()
        .into_iter()
        .flat_map(|(_, t)| t.split(|c| c.is_ascii_whitespace()))
        .filter(|w| !w.is_empty())
        .collect();
    let mut rng = EntropySource::seeded(seed).unwrap();
    let mut out = Vec::with_capacity(len + 64);
    while out.len() < len {
        let sentence = 6 + rng.random_int(0, 12).unwrap();
        for i in 0..sentence {
            let w = words[rng.random_int(0, words.len() as u64 - 1).unwrap() as usize];
            let w: Vec<u8> = w.iter().copied().filter(|c| c.is_ascii_alphanumeric() || *c == b'\'').collect();
            if w.is_empty() {
                continue;
            }
            if i == 0 {
                out.push(w[0].to_ascii_uppercase());
                out.extend_from_slice(&w[1..]);
            } else {
                out.push(b' ');
                out.extend_from_slice(&w);
                if rng.random_int(0, 9).unwrap() == 0 {
                    out.push(b',');
                }
            }
        }
        out.extend_from_slice(if rng.random_int(0, 5).unwrap() == 0 { b".\n\n" } else { b". " });
    }
    out.truncate(len);
    out
}

/// Bytes from a seeded ChaCha20 stream.
pub fn random_bytes(len: usize, seed: &[u8]) -> Vec<u8> {
    EntropySource::seeded(seed).unwrap().next_bits(len * 8).unwrap().into_bytes().unwrap()
}
