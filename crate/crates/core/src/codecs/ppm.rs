//! Portable pixmap containers: binary PPM (`P6`) for RGB and PAM (`P7`)
//! for RGB or RGBA. Only 8-bit samples (maxval 255) are accepted.

use std::path::Path;

use super::RasterImage;
use crate::error::{Error, Result};

/// Which container an image came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixmapKind {
    /// `P6` binary pixmap, RGB only.
    Ppm,
    /// `P7` arbitrary map, RGB or RGB_ALPHA.
    Pam,
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.data.get(self.pos) {
            if c == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_err("malformed number in PPM header"))
    }

    fn line(&mut self) -> Result<&'a str> {
        let start = self.pos;
        let end = self.data[start..]
            .iter()
            .position(|&c| c == b'\n')
            .map(|p| start + p)
            .ok_or_else(|| format_err("unterminated PAM header"))?;
        self.pos = end + 1;
        std::str::from_utf8(&self.data[start..end])
            .map(str::trim)
            .map_err(|_| format_err("non-ASCII PAM header"))
    }
}

fn take_samples(data: &[u8], pos: usize, width: u32, height: u32, channels: u8) -> Result<RasterImage> {
    let need = width as usize * height as usize * channels as usize;
    let body = data
        .get(pos..pos + need)
        .ok_or_else(|| format_err(format!("pixel data truncated: need {need} bytes")))?;
    RasterImage::new(width, height, channels, body.to_vec())
}

fn decode_ppm(data: &[u8]) -> Result<RasterImage> {
    let mut h = Header { data, pos: 2 };
    let width = h.number()?;
    let height = h.number()?;
    let maxval = h.number()?;
    if maxval != 255 {
        return Err(format_err(format!("only 8-bit PPM supported, maxval {maxval}")));
    }
    if !data.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(format_err("missing separator after PPM maxval"));
    }
    take_samples(data, h.pos + 1, width, height, 3)
}

fn decode_pam(data: &[u8]) -> Result<RasterImage> {
    let mut h = Header { data, pos: 2 };
    h.line()?;
    let (mut width, mut height, mut depth, mut maxval) = (None, None, None, None);
    let mut tupltype = String::new();
    loop {
        let line = h.line()?;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "ENDHDR" {
            break;
        }
        let (key, value) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let value = value.trim();
        let num = || value.parse::<u32>().map_err(|_| format_err(format!("bad PAM {key} {value:?}")));
        match key {
            "WIDTH" => width = Some(num()?),
            "HEIGHT" => height = Some(num()?),
            "DEPTH" => depth = Some(num()?),
            "MAXVAL" => maxval = Some(num()?),
            "TUPLTYPE" => {
                if !tupltype.is_empty() {
                    tupltype.push(' ');
                }
                tupltype.push_str(value);
            }
            other => return Err(format_err(format!("unknown PAM header field {other:?}"))),
        }
    }
    let (Some(width), Some(height), Some(depth), Some(maxval)) = (width, height, depth, maxval) else {
        return Err(format_err("PAM header missing WIDTH, HEIGHT, DEPTH or MAXVAL"));
    };
    if maxval != 255 {
        return Err(format_err(format!("only 8-bit PAM supported, maxval {maxval}")));
    }
    let channels = match (depth, tupltype.as_str()) {
        (3, "" | "RGB") => 3,
        (4, "" | "RGB_ALPHA") => 4,
        _ => return Err(format_err(format!("unsupported PAM depth {depth} / tupltype {tupltype:?}"))),
    };
    take_samples(data, h.pos, width, height, channels)
}

/// Decodes a `P6` or `P7` container.
pub fn decode(data: &[u8]) -> Result<(RasterImage, PixmapKind)> {
    match data.get(..2) {
        Some(b"P6") => Ok((decode_ppm(data)?, PixmapKind::Ppm)),
        Some(b"P7") => Ok((decode_pam(data)?, PixmapKind::Pam)),
        _ => Err(format_err("not a binary PPM (P6) or PAM (P7) file")),
    }
}

/// Encodes an image. RGBA always goes to PAM.
pub fn encode(image: &RasterImage, kind: PixmapKind) -> Vec<u8> {
    let header = match (kind, image.channels) {
        (PixmapKind::Ppm, 3) => format!("P6\n{} {}\n255\n", image.width, image.height),
        (_, channels) => format!(
            "P7\nWIDTH {}\nHEIGHT {}\nDEPTH {}\nMAXVAL 255\nTUPLTYPE {}\nENDHDR\n",
            image.width,
            image.height,
            channels,
            if channels == 4 { "RGB_ALPHA" } else { "RGB" }
        ),
    };
    let mut out = header.into_bytes();
    out.extend_from_slice(&image.samples);
    out
}

pub fn read(path: impl AsRef<Path>) -> Result<(RasterImage, PixmapKind)> {
    decode(&std::fs::read(path)?)
}
