//! Time to contact and focus of expansion from consecutive frames.
//!
//! Each frame pair yields brightness derivatives `ex, ey, et` and the radial
//! gradient `g = x ex + y ey`. Under pure approach toward a plane the
//! constraint `A ex + B ey + C g + et = 0` holds at every pixel; the
//! least-squares `(A, B, C)` give the FOE `(-A/C, -B/C)` and `TTC = 1/C`
//! frames.
//!
//! Coordinates are pixels with the origin at the image centre, x right and
//! y down. Approach gives `C > 0`; recession gives a negative TTC, which is
//! reported as-is.

mod derivatives;
mod normal;
mod pyramid;
pub mod trace;

use std::num::NonZeroUsize;
use std::thread;

pub use derivatives::{derivatives_3d, radial_gradient};
pub use normal::{build_normal_system, solve_ttc, NormalSystem};
pub use pyramid::{binomial3, downsample};
pub use trace::TraceRow;

use crate::error::{Error, Result};
use crate::tensor::{Image, Tensor};

/// Smallest frame extent the estimator accepts at any pyramid level.
pub const MIN_EXTENT: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TtcConfig {
    /// `|C|` below this reports an infinite TTC.
    pub c_min: f64,
    /// Relative pivot threshold for flagging a singular system.
    pub pivot_tol: f64,
    /// Pixels excluded on each side of the derivative field.
    pub border: usize,
    /// Relative improvement required to keep descending the pyramid.
    pub ms_epsilon: f64,
}

impl Default for TtcConfig {
    fn default() -> Self {
        TtcConfig { c_min: 1e-9, pivot_tol: 1e-10, border: 1, ms_epsilon: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TtcEstimate {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// FOE, centre-origin pixels of the original frame. NaN when undefined.
    pub x0: f64,
    pub y0: f64,
    /// Frames to contact; `+inf` when `|c| < c_min` or degenerate.
    pub ttc: f64,
    /// Least-squares objective per summed pixel.
    pub residual: f64,
    /// Objective over `sum et^2`: the fraction of temporal change the motion
    /// model leaves unexplained.
    pub relative_residual: f64,
    /// Standard error of `c` over `|c|`, from the residual variance and the
    /// inverse normal matrix. `+inf` when `c` is unusable.
    pub c_rel_stderr: f64,
    pub level: usize,
    pub degenerate: bool,
}

impl TtcEstimate {
    /// FOE in absolute pixel coordinates of a `width x height` frame.
    pub fn foe_pixels(&self, width: usize, height: usize) -> (f64, f64) {
        (self.x0 + (width as f64 - 1.0) / 2.0, self.y0 + (height as f64 - 1.0) / 2.0)
    }

    pub fn is_finite(&self) -> bool {
        !self.degenerate && self.ttc.is_finite()
    }
}

#[derive(Clone, Debug)]
pub struct FramePair<'a> {
    pub e0: &'a Image,
    pub e1: &'a Image,
    pub frame_index: usize,
}

impl<'a> FramePair<'a> {
    pub fn new(e0: &'a Image, e1: &'a Image, frame_index: usize) -> Result<Self> {
        if e0.dims() != e1.dims() || e0.ndim() != 2 {
            return Err(Error::Shape(format!("frame extents differ: {:?} vs {:?}", e0.dims(), e1.dims())));
        }
        if e0.height() < MIN_EXTENT || e0.width() < MIN_EXTENT {
            return Err(Error::Shape(format!(
                "frames must be at least {MIN_EXTENT}x{MIN_EXTENT}, got {:?}",
                e0.dims()
            )));
        }
        Ok(FramePair { e0, e1, frame_index })
    }
}

/// How many times an `h x w` frame can be halved while staying at least
/// `MIN_EXTENT` on both axes.
pub fn max_level_for(h: usize, w: usize) -> usize {
    let mut level = 0;
    let (mut h, mut w) = (h, w);
    while h / 2 >= MIN_EXTENT && w / 2 >= MIN_EXTENT {
        h /= 2;
        w /= 2;
        level += 1;
    }
    level
}

/// Derivatives, radial gradient, normal equations and solve at one scale.
fn estimate_raw(e0: &Image, e1: &Image, cfg: &TtcConfig) -> Result<TtcEstimate> {
    let (ex, ey, et) = derivatives_3d(e0, e1)?;
    let g = radial_gradient(&ex, &ey)?;
    let sys = build_normal_system(&ex, &ey, &g, &et, cfg.border)?;
    Ok(solve_ttc(&sys, cfg))
}

/// Rescales an estimate made `level` halvings down to original coordinates.
fn at_level(mut est: TtcEstimate, level: usize) -> TtcEstimate {
    let scale = (1u64 << level) as f64;
    est.x0 *= scale;
    est.y0 *= scale;
    est.level = level;
    est
}

/// Estimate after downsampling both frames `level` times.
pub fn estimate_fixed(pair: &FramePair<'_>, level: usize, cfg: &TtcConfig) -> Result<TtcEstimate> {
    let limit = max_level_for(pair.e0.height(), pair.e0.width());
    if level > limit {
        return Err(Error::Scale(format!(
            "{}x{} frames allow at most {limit} downsampling levels, {level} requested",
            pair.e0.width(),
            pair.e0.height()
        )));
    }
    if level == 0 {
        return estimate_raw(pair.e0, pair.e1, cfg);
    }
    let (mut e0, mut e1) = (downsample(pair.e0)?, downsample(pair.e1)?);
    for _ in 1..level {
        e0 = downsample(&e0)?;
        e1 = downsample(&e1)?;
    }
    Ok(at_level(estimate_raw(&e0, &e1, cfg)?, level))
}

/// Greedy search down the pyramid.
///
/// Starts at level 0 and descends while the relative standard error of `c`
/// drops by more than `ms_epsilon` relative to the previous level, stopping
/// at the first level that fails to improve. Returns the best level visited.
///
/// Coarser levels average away noise but the cube derivatives lose accuracy
/// as texture approaches the sampling limit. The standard error sees both:
/// noise through the residual, and lost gradient energy through the normal
/// matrix and the pixel count.
pub fn estimate_multiscale(pair: &FramePair<'_>, max_level: usize, cfg: &TtcConfig) -> Result<TtcEstimate> {
    let limit = max_level.min(max_level_for(pair.e0.height(), pair.e0.width()));
    let mut best = estimate_raw(pair.e0, pair.e1, cfg)?;
    let mut prev = best.c_rel_stderr;
    let (mut e0, mut e1) = (pair.e0.clone(), pair.e1.clone());
    for level in 1..=limit {
        e0 = downsample(&e0)?;
        e1 = downsample(&e1)?;
        let est = at_level(estimate_raw(&e0, &e1, cfg)?, level);
        if est.c_rel_stderr < best.c_rel_stderr {
            best = est;
        }
        if !(est.c_rel_stderr < prev * (1.0 - cfg.ms_epsilon)) {
            break;
        }
        prev = est.c_rel_stderr;
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Fixed(usize),
    Multiscale(usize),
}

/// One estimate per consecutive pair of a `[frames, h, w]` stack, in frame
/// order. Pairs are processed on a few threads; results do not depend on
/// the split.
pub fn run_sequence(frames: &Tensor, mode: Mode, cfg: &TtcConfig) -> Result<Vec<TtcEstimate>> {
    if frames.ndim() != 3 {
        return Err(Error::Input(format!("expected a [frames, height, width] stack, got dims {:?}", frames.dims())));
    }
    let n = frames.num_planes();
    if n < 2 {
        return Err(Error::Input(format!("need at least 2 frames, got {n}")));
    }
    let planes: Vec<Image> = (0..n).map(|i| frames.plane(i)).collect::<Result<_>>()?;
    let run = |i: usize| -> Result<TtcEstimate> {
        let pair = FramePair::new(&planes[i], &planes[i + 1], i)?;
        match mode {
            Mode::Fixed(level) => estimate_fixed(&pair, level, cfg),
            Mode::Multiscale(max) => estimate_multiscale(&pair, max, cfg),
        }
    };
    let pairs = n - 1;
    let workers = thread::available_parallelism().map_or(1, NonZeroUsize::get).min(pairs);
    if workers <= 1 {
        return (0..pairs).map(run).collect();
    }
    let chunk = pairs.div_ceil(workers);
    thread::scope(|s| {
        let handles: Vec<_> = (0..pairs)
            .step_by(chunk)
            .map(|start| {
                let run = &run;
                s.spawn(move || (start..(start + chunk).min(pairs)).map(run).collect::<Result<Vec<_>>>())
            })
            .collect();
        let mut out = Vec::with_capacity(pairs);
        for h in handles {
            out.extend(h.join().expect("estimator thread panicked")?);
        }
        Ok(out)
    })
}
