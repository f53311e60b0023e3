//! Binary (P5) PGM images.
//!
//! Samples are mapped to `[0, 1]` by dividing by maxval. Writing clamps to
//! `[0, 1]` and rounds to the nearest code.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{Image, Tensor};

struct Header {
    width: usize,
    height: usize,
    maxval: u32,
    data_start: usize,
}

fn parse_header(buf: &[u8]) -> Result<Header> {
    if buf.len() < 2 {
        return Err(Error::format(0, "file too short for a PGM header"));
    }
    match &buf[..2] {
        b"P5" => {}
        b"P2" => return Err(Error::format(0, "ASCII PGM (P2) is not supported, expected P5")),
        m => return Err(Error::format(0, format!("bad magic {:?}, expected P5", String::from_utf8_lossy(m)))),
    }
    let mut pos = 2;
    let mut fields = [0u64; 3];
    for (k, field) in fields.iter_mut().enumerate() {
        // whitespace and comments before each field
        loop {
            match buf.get(pos) {
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while buf.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while buf.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(pos as u64, format!("expected {}", ["width", "height", "maxval"][k])));
        }
        *field = std::str::from_utf8(&buf[start..pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::format(start as u64, "header number out of range"))?;
    }
    match buf.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::format(pos as u64, "expected a single whitespace byte after maxval")),
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::format(2, "zero image extent"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(2, format!("bad maxval {maxval}")));
    }
    Ok(Header { width: width as usize, height: height as usize, maxval: maxval as u32, data_start: pos })
}

pub fn decode(buf: &[u8]) -> Result<Image> {
    let h = parse_header(buf)?;
    let bytes_per = if h.maxval < 256 { 1 } else { 2 };
    let n = h.width.checked_mul(h.height).ok_or_else(|| Error::format(2, "image too large"))?;
    let need = n * bytes_per;
    let payload = &buf[h.data_start..];
    if payload.len() < need {
        return Err(Error::format(
            buf.len() as u64,
            format!("short payload: {}x{} needs {need} bytes, found {}", h.width, h.height, payload.len()),
        ));
    }
    let scale = f64::from(h.maxval);
    let data = if bytes_per == 1 {
        payload[..need].iter().map(|&b| f64::from(b) / scale).collect()
    } else {
        payload[..need].chunks_exact(2).map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])) / scale).collect()
    };
    Tensor::new(vec![h.height, h.width], data)
}

/// Encodes an image with the given maxval (`1..=65535`).
pub fn encode_with_maxval(img: &Image, maxval: u16) -> Result<Vec<u8>> {
    if img.ndim() != 2 {
        return Err(Error::Shape(format!("PGM needs a 2-D image, got dims {:?}", img.dims())));
    }
    if maxval == 0 {
        return Err(Error::Domain("maxval must be >= 1".into()));
    }
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval).into_bytes();
    let scale = f64::from(maxval);
    let quantize = |v: f64| {
        let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        (v * scale).round() as u16
    };
    if maxval < 256 {
        out.extend(img.data().iter().map(|&v| quantize(v) as u8));
    } else {
        for &v in img.data() {
            out.extend_from_slice(&quantize(v).to_be_bytes());
        }
    }
    Ok(out)
}

pub fn encode(img: &Image) -> Result<Vec<u8>> {
    encode_with_maxval(img, 255)
}

pub fn read(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&buf)
}

pub fn write(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(img)?).map_err(|e| Error::io(path, e))
}
