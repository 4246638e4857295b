//! RIFF/WAVE container for 16-bit PCM, mono or stereo. Container fields and
//! samples are little-endian on disk.

use std::path::Path;

use super::PcmAudio;
use crate::error::{Error, Result};

const PCM_FORMAT: u16 = 1;

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn u16_at(data: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([data[at], data[at + 1]])
}

fn u32_at(data: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(data[at..at + 4].try_into().unwrap())
}

/// Decodes a WAVE file. Chunks other than `fmt ` and `data` are skipped.
pub fn decode(data: &[u8]) -> Result<PcmAudio> {
    if data.len() < 12 || &data[..4] != b"RIFF" || &data[8..12] != b"WAVE" {
        return Err(format_err("not a RIFF/WAVE file"));
    }
    let mut pos = 12;
    let mut fmt: Option<(u16, u32)> = None;
    while pos + 8 <= data.len() {
        let id = &data[pos..pos + 4];
        let size = u32_at(data, pos + 4) as usize;
        let body = data
            .get(pos + 8..pos + 8 + size)
            .ok_or_else(|| format_err("truncated WAVE chunk"))?;
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(format_err("short fmt chunk"));
                }
                let format = u16_at(body, 0);
                let channels = u16_at(body, 2);
                let rate = u32_at(body, 4);
                let bits = u16_at(body, 14);
                if format != PCM_FORMAT || bits != 16 {
                    return Err(format_err(format!(
                        "only 16-bit PCM supported (format {format}, {bits} bits)"
                    )));
                }
                if channels != 1 && channels != 2 {
                    return Err(format_err(format!("unsupported channel count {channels}")));
                }
                fmt = Some((channels, rate));
            }
            b"data" => {
                let (channels, rate) = fmt.ok_or_else(|| format_err("data chunk before fmt chunk"))?;
                let frame = 2 * channels as usize;
                if body.len() % frame != 0 {
                    return Err(format_err("data chunk is not a whole number of frames"));
                }
                let samples: Vec<i16> = body
                    .chunks_exact(2)
                    .map(|s| i16::from_le_bytes([s[0], s[1]]))
                    .collect();
                return if channels == 1 {
                    Ok(PcmAudio::mono(rate, samples))
                } else {
                    let left = samples.iter().step_by(2).copied().collect();
                    let right = samples.iter().skip(1).step_by(2).copied().collect();
                    PcmAudio::stereo(rate, left, right)
                };
            }
            _ => {}
        }
        pos += 8 + size + (size & 1);
    }
    Err(format_err("no data chunk"))
}

/// Encodes a canonical 44-byte-header WAVE file.
pub fn encode(audio: &PcmAudio) -> Vec<u8> {
    let channels = audio.channels();
    let data_len = (audio.frames() * 2 * channels as usize) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&PCM_FORMAT.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&audio.sample_rate.to_le_bytes());
    out.extend_from_slice(&(audio.sample_rate * 2 * u32::from(channels)).to_le_bytes());
    out.extend_from_slice(&(2 * channels).to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    match &audio.right {
        None => {
            for s in &audio.left {
                out.extend_from_slice(&s.to_le_bytes());
            }
        }
        Some(right) => {
            for (l, r) in audio.left.iter().zip(right) {
                out.extend_from_slice(&l.to_le_bytes());
                out.extend_from_slice(&r.to_le_bytes());
            }
        }
    }
    out
}

pub fn read(path: impl AsRef<Path>) -> Result<PcmAudio> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stereo_round_trip() {
        let audio = PcmAudio::stereo(22_050, vec![0, -1, i16::MAX], vec![i16::MIN, 5, -300]).unwrap();
        let bytes = encode(&audio);
        assert_eq!(bytes.len(), 44 + 12);
        assert_eq!(&bytes[44..48], &[0, 0, 0, 0x80]);
        assert_eq!(decode(&bytes).unwrap(), audio);
    }

    #[test]
    fn mono_round_trip() {
        let audio = PcmAudio::mono(8_000, vec![1, 2, 3, -4]);
        assert_eq!(decode(&encode(&audio)).unwrap(), audio);
    }

    #[test]
    fn skips_unknown_chunks() {
        let audio = PcmAudio::mono(8_000, vec![7, -7, 9]);
        let plain = encode(&audio);
        let mut bytes = plain[..36].to_vec();
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(b"abc\0");
        bytes.extend_from_slice(&plain[36..]);
        assert_eq!(decode(&bytes).unwrap(), audio);
    }

    #[test]
    fn rejects_non_pcm16() {
        let mut bytes = encode(&PcmAudio::mono(8_000, vec![1]));
        bytes[34] = 8;
        assert!(decode(&bytes).is_err());
        assert!(decode(b"RIFX....WAVE").is_err());
        let mut odd = encode(&PcmAudio::stereo(8_000, vec![1], vec![2]).unwrap());
        odd[40] = 2;
        odd.truncate(46);
        assert!(decode(&odd).is_err());
    }
}
