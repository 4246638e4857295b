//! Conversions between media payloads and the bit strings the engine uses.
//!
//! Every sample is serialized MSB first. Images contribute their 8-bit
//! channel samples in raster order from the top-left pixel; audio
//! contributes 16-bit two's-complement amplitudes, one stream per channel.
//! Container bytes never enter the bit string.

pub mod ppm;
pub mod wav;

use crate::bits::BitStream;
use crate::error::{Error, Result};

pub fn bytes_to_bits(bytes: &[u8]) -> BitStream {
    BitStream::from_bytes(bytes.to_vec())
}

pub fn bits_to_bytes(bits: &BitStream) -> Result<Vec<u8>> {
    bits.to_bytes()
}

/// Decoded 8-bit RGB or RGBA raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    /// Row-major channel samples starting at the top-left pixel.
    pub samples: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, channels: u8, samples: Vec<u8>) -> Result<Self> {
        if channels != 3 && channels != 4 {
            return Err(Error::Format(format!("unsupported channel count {channels}")));
        }
        let expected = width as usize * height as usize * channels as usize;
        if samples.len() != expected {
            return Err(Error::Format(format!(
                "{width}x{height}x{channels} image needs {expected} samples, got {}",
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }
}

pub fn image_to_bits(image: &RasterImage) -> BitStream {
    BitStream::from_bytes(image.samples.clone())
}

pub fn bits_to_image(bits: &BitStream, width: u32, height: u32, channels: u8) -> Result<RasterImage> {
    let expected = width as u64 * height as u64 * channels as u64 * 8;
    if bits.len() as u64 != expected {
        return Err(Error::Format(format!(
            "bit stream of {} bits does not fit a {width}x{height}x{channels} image ({expected} bits)",
            bits.len()
        )));
    }
    RasterImage::new(width, height, channels, bits.to_bytes()?)
}

/// 16-bit PCM, mono or stereo.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcmAudio {
    pub sample_rate: u32,
    pub left: Vec<i16>,
    /// Present for stereo; same length as `left`.
    pub right: Option<Vec<i16>>,
}

impl PcmAudio {
    pub fn mono(sample_rate: u32, samples: Vec<i16>) -> Self {
        Self {
            sample_rate,
            left: samples,
            right: None,
        }
    }

    pub fn stereo(sample_rate: u32, left: Vec<i16>, right: Vec<i16>) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::Format(format!(
                "stereo channels differ in length: {} vs {}",
                left.len(),
                right.len()
            )));
        }
        Ok(Self {
            sample_rate,
            left,
            right: Some(right),
        })
    }

    pub fn channels(&self) -> u16 {
        if self.right.is_some() {
            2
        } else {
            1
        }
    }

    /// Frames per channel.
    pub fn frames(&self) -> usize {
        self.left.len()
    }
}

/// Amplitudes as 16-bit two's complement, MSB first.
pub fn samples_to_bits(samples: &[i16]) -> BitStream {
    BitStream::from_bytes(samples.iter().flat_map(|s| s.to_be_bytes()).collect::<Vec<_>>())
}

pub fn bits_to_samples(bits: &BitStream) -> Result<Vec<i16>> {
    if bits.len() % 16 != 0 {
        return Err(Error::Format(format!(
            "{} bits is not a whole number of 16-bit samples",
            bits.len()
        )));
    }
    Ok(bits
        .as_packed()
        .chunks_exact(2)
        .map(|p| i16::from_be_bytes([p[0], p[1]]))
        .collect())
}

/// One bit stream per channel: `(left, right)`.
pub fn audio_to_bits(audio: &PcmAudio) -> (BitStream, Option<BitStream>) {
    (
        samples_to_bits(&audio.left),
        audio.right.as_deref().map(samples_to_bits),
    )
}

pub fn bits_to_audio(sample_rate: u32, left: &BitStream, right: Option<&BitStream>) -> Result<PcmAudio> {
    let left = bits_to_samples(left)?;
    match right {
        Some(r) => PcmAudio::stereo(sample_rate, left, bits_to_samples(r)?),
        None => Ok(PcmAudio::mono(sample_rate, left)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ascii_byte() {
        assert_eq!(bytes_to_bits(b"A").to_string(), "01000001");
        assert!(bytes_to_bits(b"").is_empty());
    }

    #[test]
    fn pixel_bits() {
        let img = RasterImage::new(1, 1, 3, vec![255, 0, 128]).unwrap();
        assert_eq!(image_to_bits(&img).to_string(), "111111110000000010000000");
    }

    #[test]
    fn image_dimension_mismatch() {
        assert!(RasterImage::new(2, 2, 3, vec![0; 11]).is_err());
        assert!(RasterImage::new(1, 1, 2, vec![0; 2]).is_err());
        let bits = BitStream::from_bytes(vec![0u8; 12]);
        assert!(bits_to_image(&bits, 2, 2, 4).is_err());
        assert!(bits_to_image(&bits, 2, 2, 3).is_ok());
    }

    #[test]
    fn twos_complement() {
        assert_eq!(samples_to_bits(&[-1]).to_string(), "1111111111111111");
        assert_eq!(samples_to_bits(&[0]).to_string(), "0000000000000000");
        assert_eq!(samples_to_bits(&[i16::MIN]).to_string(), "1000000000000000");
        assert_eq!(samples_to_bits(&[258]).to_string(), "0000000100000010");
        assert!(bits_to_samples(&BitStream::zeros(24)).is_err());
    }

    #[test]
    fn stereo_length_check() {
        assert!(PcmAudio::stereo(8000, vec![1, 2], vec![3]).is_err());
    }

    proptest! {
        #[test]
        fn audio_round_trip(left in proptest::collection::vec(any::<i16>(), 0..100), seed in any::<i16>()) {
            let right: Vec<i16> = left.iter().map(|&s| s.wrapping_mul(3).wrapping_add(seed)).collect();
            let audio = PcmAudio::stereo(44_100, left, right).unwrap();
            let (l, r) = audio_to_bits(&audio);
            prop_assert_eq!(bits_to_audio(44_100, &l, r.as_ref()).unwrap(), audio);
        }

        #[test]
        fn image_round_trip(w in 1u32..8, h in 1u32..8, rgba in any::<bool>(), fill in any::<u8>()) {
            let c = if rgba { 4 } else { 3 };
            let samples: Vec<u8> = (0..w * h * c as u32).map(|i| (i as u8).wrapping_mul(fill)).collect();
            let img = RasterImage::new(w, h, c, samples).unwrap();
            prop_assert_eq!(bits_to_image(&image_to_bits(&img), w, h, c).unwrap(), img);
        }
    }
}
