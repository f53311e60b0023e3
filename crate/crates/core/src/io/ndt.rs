//! NDT tensor files.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "NDT1" | u32 ndim | ndim x u64 extent (outermost first) | prod(extents) x f64
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"NDT1";

pub fn encode(t: &Tensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 8 * t.ndim() + 8 * t.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(t.ndim() as u32).to_le_bytes());
    for &d in t.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::format(self.buf.len() as u64, format!("truncated while reading {what}")))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode(buf: &[u8]) -> Result<Tensor> {
    let mut cur = Cursor { buf, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::format(0, format!("bad magic {:?}, expected \"NDT1\"", String::from_utf8_lossy(magic))));
    }
    let ndim = cur.u32("ndim")?;
    if ndim == 0 {
        return Err(Error::format(4, "ndim must be >= 1"));
    }
    let mut dims = Vec::with_capacity(ndim.min(64) as usize);
    let mut count: u64 = 1;
    for k in 0..ndim {
        let at = cur.pos as u64;
        let d = cur.u64("extent")?;
        if d == 0 {
            return Err(Error::format(at, format!("extent {k} is zero")));
        }
        count = count
            .checked_mul(d)
            .filter(|&c| c.checked_mul(8).is_some() && usize::try_from(c).is_ok())
            .ok_or_else(|| Error::format(at, "extent product overflows"))?;
        dims.push(d as usize);
    }
    let payload_at = cur.pos as u64;
    let need = count as usize * 8;
    let have = buf.len() - cur.pos;
    if have < need {
        return Err(Error::format(
            payload_at + have as u64,
            format!("truncated payload: dims {dims:?} need {count} values, found {}", have / 8),
        ));
    }
    if have > need {
        return Err(Error::format(payload_at + need as u64, format!("{} trailing bytes", have - need)));
    }
    let data = buf[cur.pos..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Tensor::new(dims, data)
}

pub fn read(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&buf)
}

pub fn write(t: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(t)).map_err(|e| Error::io(path, e))
}
