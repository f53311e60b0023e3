//! Per-pair trace CSV:
//!
//! ```text
//! frame,ttc,foe_x,foe_y,residual,level,degenerate
//! ```
//!
//! `ttc` prints `inf` when no approach is detected and the FOE prints `nan`
//! when undefined. FOE columns are absolute pixel coordinates (origin at the
//! top-left pixel), the same convention as the generator's `truth.csv`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::TtcEstimate;

pub const HEADER: &str = "frame,ttc,foe_x,foe_y,residual,level,degenerate";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub frame: usize,
    pub ttc: f64,
    pub foe_x: f64,
    pub foe_y: f64,
    pub residual: f64,
    pub level: usize,
    pub degenerate: bool,
}

impl TraceRow {
    pub fn new(frame: usize, est: &TtcEstimate, width: usize, height: usize) -> Self {
        let (foe_x, foe_y) = est.foe_pixels(width, height);
        TraceRow {
            frame,
            ttc: est.ttc,
            foe_x,
            foe_y,
            residual: est.residual,
            level: est.level,
            degenerate: est.degenerate,
        }
    }
}

/// Trace rows for a sequence of `width x height` frames; row `i` is pair `(i, i+1)`.
pub fn rows(estimates: &[TtcEstimate], width: usize, height: usize) -> Vec<TraceRow> {
    estimates.iter().enumerate().map(|(i, e)| TraceRow::new(i, e, width, height)).collect()
}

pub(crate) fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

pub(crate) fn parse_f64(s: &str, line: usize, col: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" | "NaN" => Ok(f64::NAN),
        t => t.parse().map_err(|_| Error::Input(format!("line {line}: bad {col} value {t:?}"))),
    }
}

pub fn write_csv(mut w: impl Write, rows: &[TraceRow]) -> std::io::Result<()> {
    writeln!(w, "{HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.frame,
            fmt_f64(r.ttc),
            fmt_f64(r.foe_x),
            fmt_f64(r.foe_y),
            fmt_f64(r.residual),
            r.level,
            r.degenerate
        )?;
    }
    Ok(())
}

pub fn write(path: impl AsRef<Path>, rows: &[TraceRow]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("writing to memory");
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn parse(text: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        other => return Err(Error::Input(format!("trace header must be {HEADER:?}, got {:?}", other.map(|l| l.1)))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::Input(format!("line {n}: expected 7 fields, got {}", f.len())));
        }
        let int =
            |s: &str, col| s.trim().parse::<usize>().map_err(|_| Error::Input(format!("line {n}: bad {col} {s:?}")));
        out.push(TraceRow {
            frame: int(f[0], "frame")?,
            ttc: parse_f64(f[1], n, "ttc")?,
            foe_x: parse_f64(f[2], n, "foe_x")?,
            foe_y: parse_f64(f[3], n, "foe_y")?,
            residual: parse_f64(f[4], n, "residual")?,
            level: int(f[5], "level")?,
            degenerate: match f[6].trim() {
                "true" | "1" => true,
                "false" | "0" => false,
                s => return Err(Error::Input(format!("line {n}: bad degenerate flag {s:?}"))),
            },
        });
    }
    Ok(out)
}

pub fn read(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    let path = path.as_ref();
    parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
