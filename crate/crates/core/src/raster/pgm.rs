//! PGM codec: P2 (ASCII) and P5 (binary) with `maxval <= 255`.
//!
//! Sample values are kept as-is (no rescaling to the maxval). Writing always
//! emits P5 with maxval 255, after rounding pixels to integer levels.

use std::path::Path;

use crate::error::{Error, Result};
use crate::lip::GreyScale;

use super::GreyImage;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Encoding {
    Ascii,
    Binary,
}

struct Header {
    encoding: Encoding,
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first raster byte (P5) or of the first sample token (P2).
    data_start: usize,
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.buf.len() {
            match self.buf[self.pos] {
                b'#' => {
                    while self.pos < self.buf.len() && self.buf[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.buf.len() && self.buf[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format(format!("expected {what} at byte {start}")));
        }
        std::str::from_utf8(&self.buf[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::Format(format!("{what} out of range")))
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let encoding = match bytes.get(..2) {
        Some(b"P2") => Encoding::Ascii,
        Some(b"P5") => Encoding::Binary,
        _ => return Err(Error::Format("not a P2/P5 PGM (bad magic)".into())),
    };
    let mut cur = Cursor { buf: bytes, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Format(format!("empty raster {width}x{height}")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from binary data
    match bytes.get(cur.pos) {
        Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
        _ if encoding == Encoding::Ascii => {}
        _ => return Err(Error::Format("missing whitespace after maxval".into())),
    }
    Ok(Header {
        encoding,
        width,
        height,
        maxval,
        data_start: cur.pos,
    })
}

pub fn decode_pgm(bytes: &[u8], scale: GreyScale) -> Result<GreyImage> {
    let header = parse_header(bytes)?;
    let n = header.width * header.height;
    let samples: Vec<u32> = match header.encoding {
        Encoding::Binary => {
            let data = &bytes[header.data_start..];
            if data.len() < n {
                return Err(Error::Format(format!(
                    "truncated payload: {} of {n} bytes",
                    data.len()
                )));
            }
            data[..n].iter().map(|&b| b as u32).collect()
        }
        Encoding::Ascii => {
            let mut cur = Cursor {
                buf: bytes,
                pos: header.data_start,
            };
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                cur.skip_space_and_comments();
                if cur.pos >= bytes.len() {
                    return Err(Error::Format(format!(
                        "truncated payload: {i} of {n} samples"
                    )));
                }
                out.push(cur.number("sample")?);
            }
            out
        }
    };
    if let Some(i) = samples.iter().position(|&v| v > header.maxval) {
        return Err(Error::Format(format!(
            "sample {} at index {i} exceeds maxval {}",
            samples[i], header.maxval
        )));
    }
    GreyImage::new(
        header.width,
        header.height,
        scale,
        samples.into_iter().map(f64::from).collect(),
    )
    .map_err(|e| Error::Format(e.to_string()))
}

fn levels(img: &GreyImage) -> Result<Vec<u8>> {
    img.pixels()
        .iter()
        .map(|&v| {
            let r = v.round().max(0.0);
            if r > 255.0 {
                Err(Error::Format(format!(
                    "grey level {v} does not fit in 8 bits"
                )))
            } else {
                Ok(r as u8)
            }
        })
        .collect()
}

/// Binary (P5) encoding, maxval 255.
pub fn encode_pgm(img: &GreyImage) -> Result<Vec<u8>> {
    let data = levels(img)?;
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(&data);
    Ok(out)
}

/// ASCII (P2) encoding, maxval 255.
pub fn encode_pgm_ascii(img: &GreyImage) -> Result<Vec<u8>> {
    let data = levels(img)?;
    let mut out = format!("P2\n{} {}\n255\n", img.width(), img.height());
    for row in data.chunks(img.width()) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out.into_bytes())
}

pub fn read_pgm(path: impl AsRef<Path>, scale: GreyScale) -> Result<GreyImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_pgm(&bytes, scale)
}

pub fn write_pgm(img: &GreyImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_pgm(img)?;
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
