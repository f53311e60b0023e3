//! Synthetic approach sequences with known time to contact.
//!
//! A procedural texture is magnified about a fixed point by
//! `m(t) = T0 / (T0 - t)`, which is exactly what a camera closing on a
//! fronto-parallel plane at constant speed sees. Frame `t` therefore has
//! ground-truth TTC `T0 - t` frames and a stationary FOE.

use std::fs;
use std::path::Path;

use crate::conv::{xcorr_direct, BoundaryPolicy, ConvShape};
use crate::error::{Error, Result};
use crate::io::pgm;
use crate::rng::XorShift64Star;
use crate::tensor::{Image, Tensor};
use crate::ttc::binomial3;
use crate::ttc::trace::{fmt_f64, parse_f64, TraceRow};

pub const MIN_TEXTURE_EXTENT: usize = 16;
pub const TRUTH_HEADER: &str = "frame,ttc,foe_x,foe_y";

/// Spacing, in pixels, of the white-noise lattice behind [`make_texture`].
pub const TEXTURE_LATTICE: usize = 2;

/// Seeded white noise on a [`TEXTURE_LATTICE`]-pixel lattice, smoothed by two
/// binomial passes, bicubically upsampled and rescaled to `[0, 1]`.
pub fn make_texture(width: usize, height: usize, seed: u64) -> Result<Image> {
    make_texture_with_lattice(width, height, seed, TEXTURE_LATTICE)
}

/// [`make_texture`] with an explicit lattice spacing. `lattice == 1` draws the
/// noise directly on the pixel grid, which leaves most of the texture energy
/// near the sampling limit.
pub fn make_texture_with_lattice(width: usize, height: usize, seed: u64, lattice: usize) -> Result<Image> {
    if width < MIN_TEXTURE_EXTENT || height < MIN_TEXTURE_EXTENT {
        return Err(Error::Shape(format!(
            "texture must be at least {MIN_TEXTURE_EXTENT}x{MIN_TEXTURE_EXTENT}, got {width}x{height}"
        )));
    }
    if lattice == 0 {
        return Err(Error::Domain("texture lattice spacing must be >= 1".into()));
    }
    // one lattice cell of margin before and three after keep every bicubic
    // tap inside the noise field
    let (lw, lh) = if lattice == 1 { (width, height) } else { (width / lattice + 4, height / lattice + 4) };
    let mut rng = XorShift64Star::new(seed);
    let noise = Tensor::from_fn(&[lh, lw], |_| rng.uniform())?;
    let blur = binomial3();
    let once = xcorr_direct(&noise, &blur, ConvShape::Same, BoundaryPolicy::Replicate)?;
    let twice = xcorr_direct(&once, &blur, ConvShape::Same, BoundaryPolicy::Replicate)?;
    let field = if lattice == 1 {
        twice
    } else {
        let step = 1.0 / lattice as f64;
        Tensor::from_fn(&[height, width], |i| {
            sample_bicubic(&twice, i[1] as f64 * step + 1.0, i[0] as f64 * step + 1.0)
        })?
    };
    let (lo, hi) = field.data().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    Ok(field.map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 }))
}

/// Catmull-Rom cubic weight (`a = -0.5`) at distance `d`.
#[inline]
fn cubic_weight(d: f64) -> f64 {
    const A: f64 = -0.5;
    let d = d.abs();
    if d <= 1.0 {
        ((A + 2.0) * d - (A + 3.0)) * d * d + 1.0
    } else if d < 2.0 {
        ((A * d - 5.0 * A) * d + 8.0 * A) * d - 4.0 * A
    } else {
        0.0
    }
}

/// Bicubic sample at real-valued `(x, y)` with replicate boundary.
pub fn sample_bicubic(img: &Image, x: f64, y: f64) -> f64 {
    let (w, h) = (img.width() as isize, img.height() as isize);
    let (xf, yf) = (x.floor(), y.floor());
    let (tx, ty) = (x - xf, y - yf);
    let (xi, yi) = (xf as isize, yf as isize);
    let wx = [cubic_weight(1.0 + tx), cubic_weight(tx), cubic_weight(1.0 - tx), cubic_weight(2.0 - tx)];
    let wy = [cubic_weight(1.0 + ty), cubic_weight(ty), cubic_weight(1.0 - ty), cubic_weight(2.0 - ty)];
    let mut acc = 0.0;
    for (j, &wyj) in wy.iter().enumerate() {
        let yy = (yi + j as isize - 1).clamp(0, h - 1) as usize;
        let mut row = 0.0;
        for (i, &wxi) in wx.iter().enumerate() {
            let xx = (xi + i as isize - 1).clamp(0, w - 1) as usize;
            row += wxi * img.at(yy, xx);
        }
        acc += wyj * row;
    }
    acc
}

/// Magnifies `texture` about `foe_px = (x, y)`: output pixel `p` samples the
/// texture at `foe + (p - foe) / magnification`.
pub fn zoom_frame(texture: &Image, foe_px: (f64, f64), magnification: f64) -> Result<Image> {
    if texture.ndim() != 2 {
        return Err(Error::Shape(format!("zoom needs a 2-D image, got dims {:?}", texture.dims())));
    }
    if !(magnification >= 1.0) || !magnification.is_finite() {
        return Err(Error::Domain(format!("magnification must be >= 1, got {magnification}")));
    }
    let (fx, fy) = foe_px;
    let inv = 1.0 / magnification;
    Tensor::from_fn(texture.dims(), |i| {
        let sx = fx + (i[1] as f64 - fx) * inv;
        let sy = fy + (i[0] as f64 - fy) * inv;
        sample_bicubic(texture, sx, sy)
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthConfig {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    /// Time to contact at frame 0, in frames.
    pub t0: f64,
    /// FOE as fractions of width and height.
    pub foe: (f64, f64),
    pub seed: u64,
    /// Additive Gaussian noise, brightness units.
    pub noise_sigma: f64,
    /// Noise lattice spacing of the texture, see [`make_texture_with_lattice`].
    pub texture_lattice: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            width: 256,
            height: 256,
            frames: 60,
            t0: 100.0,
            foe: (0.4, 0.55),
            seed: 1,
            noise_sigma: 0.0,
            texture_lattice: TEXTURE_LATTICE,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.frames == 0 {
            return bad("frames must be >= 1".into());
        }
        if !((self.frames as f64) < self.t0) {
            return bad(format!(
                "frames ({}) must be less than t0 ({}) so contact is never reached",
                self.frames, self.t0
            ));
        }
        let (fx, fy) = self.foe;
        if !(fx > 0.0 && fx < 1.0 && fy > 0.0 && fy < 1.0) {
            return bad(format!("foe fractions must lie in (0, 1), got ({fx}, {fy})"));
        }
        if !(self.noise_sigma >= 0.0) {
            return bad(format!("noise sigma must be >= 0, got {}", self.noise_sigma));
        }
        if self.texture_lattice == 0 {
            return bad("texture lattice spacing must be >= 1".into());
        }
        if self.width < MIN_TEXTURE_EXTENT || self.height < MIN_TEXTURE_EXTENT {
            return bad(format!("size must be at least {MIN_TEXTURE_EXTENT}x{MIN_TEXTURE_EXTENT}"));
        }
        Ok(())
    }

    /// FOE in pixel coordinates.
    pub fn foe_px(&self) -> (f64, f64) {
        (self.foe.0 * self.width as f64, self.foe.1 * self.height as f64)
    }

    pub fn magnification(&self, t: usize) -> f64 {
        self.t0 / (self.t0 - t as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthRow {
    pub frame: usize,
    pub ttc: f64,
    pub foe_x: f64,
    pub foe_y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSequence {
    /// `[frames, height, width]`.
    pub frames: Tensor,
    pub truth: Vec<TruthRow>,
}

pub fn generate(cfg: &SynthConfig) -> Result<SyntheticSequence> {
    cfg.validate()?;
    let texture = make_texture_with_lattice(cfg.width, cfg.height, cfg.seed, cfg.texture_lattice)?;
    let foe = cfg.foe_px();
    let mut planes = Vec::with_capacity(cfg.frames);
    for t in 0..cfg.frames {
        let mut frame = if t == 0 { texture.clone() } else { zoom_frame(&texture, foe, cfg.magnification(t))? };
        let mut rng = XorShift64Star::with_stream(cfg.seed, t as u64);
        for v in frame.data_mut() {
            if cfg.noise_sigma > 0.0 {
                *v += cfg.noise_sigma * rng.normal();
            }
            *v = v.clamp(0.0, 1.0);
        }
        planes.push(frame);
    }
    let refs: Vec<&Tensor> = planes.iter().collect();
    let truth =
        (0..cfg.frames).map(|t| TruthRow { frame: t, ttc: cfg.t0 - t as f64, foe_x: foe.0, foe_y: foe.1 }).collect();
    Ok(SyntheticSequence { frames: Tensor::stack(&refs)?, truth })
}

pub fn frame_file_name(i: usize) -> String {
    format!("frame_{i:06}.pgm")
}

/// Writes `frame_%06d.pgm` files and `truth.csv` into `dir`.
pub fn write_sequence(seq: &SyntheticSequence, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for i in 0..seq.frames.num_planes() {
        pgm::write(&seq.frames.plane(i)?, dir.join(frame_file_name(i)))?;
    }
    let path = dir.join("truth.csv");
    fs::write(&path, truth_csv(&seq.truth)).map_err(|e| Error::io(&path, e))
}

pub fn truth_csv(rows: &[TruthRow]) -> String {
    let mut s = format!("{TRUTH_HEADER}\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.frame, fmt_f64(r.ttc), fmt_f64(r.foe_x), fmt_f64(r.foe_y)));
    }
    s
}

pub fn parse_truth(text: &str) -> Result<Vec<TruthRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRUTH_HEADER => {}
        other => {
            return Err(Error::Input(format!("truth header must be {TRUTH_HEADER:?}, got {:?}", other.map(|l| l.1))))
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let n = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(Error::Input(format!("line {n}: expected 4 fields, got {}", f.len())));
        }
        out.push(TruthRow {
            frame: f[0].trim().parse().map_err(|_| Error::Input(format!("line {n}: bad frame {:?}", f[0])))?,
            ttc: parse_f64(f[1], n, "ttc")?,
            foe_x: parse_f64(f[2], n, "foe_x")?,
            foe_y: parse_f64(f[3], n, "foe_y")?,
        });
    }
    Ok(out)
}

pub fn read_truth(path: impl AsRef<Path>) -> Result<Vec<TruthRow>> {
    let path = path.as_ref();
    parse_truth(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MseReport {
    pub mse: f64,
    pub compared: usize,
    /// Degenerate or non-finite predictions left out of the mean.
    pub excluded: usize,
}

/// Mean squared TTC error over frames with a finite, non-degenerate prediction.
pub fn score_mse(pred: &[TraceRow], truth: &[TruthRow]) -> Result<MseReport> {
    let mut sum = 0.0;
    let (mut compared, mut excluded) = (0, 0);
    for p in pred {
        let t = truth
            .iter()
            .find(|t| t.frame == p.frame)
            .ok_or_else(|| Error::Scoring(format!("no truth row for frame {}", p.frame)))?;
        if p.degenerate || !p.ttc.is_finite() {
            excluded += 1;
            continue;
        }
        sum += (p.ttc - t.ttc).powi(2);
        compared += 1;
    }
    if compared == 0 {
        return Err(Error::Scoring(format!("no comparable frames ({excluded} excluded)")));
    }
    Ok(MseReport { mse: sum / compared as f64, compared, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn texture_contract() {
        let a = make_texture(32, 24, 5).unwrap();
        let b = make_texture(32, 24, 5).unwrap();
        assert_eq!(a, b);
        let c = make_texture(32, 24, 6).unwrap();
        let differing = a.data().iter().zip(c.data()).filter(|(x, y)| x != y).count();
        assert!(differing * 2 >= a.len());
        let (lo, hi) = a.data().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(lo >= 0.0 && hi <= 1.0 && hi > lo);
        assert!(make_texture(15, 64, 1).is_err());
        assert!(make_texture_with_lattice(32, 32, 1, 0).is_err());
        let raw = make_texture_with_lattice(32, 24, 5, 1).unwrap();
        assert_eq!(raw.dims(), &[24, 32]);
        assert_ne!(raw, a);
    }

    #[test]
    fn catmull_rom_partition_of_unity() {
        for k in 0..20 {
            let t = k as f64 / 20.0;
            let s: f64 = [1.0 + t, t, 1.0 - t, 2.0 - t].iter().map(|&d| cubic_weight(d)).sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert_eq!(cubic_weight(0.0), 1.0);
        assert_eq!(cubic_weight(1.0), 0.0);
        assert_eq!(cubic_weight(2.0), 0.0);
    }

    #[test]
    fn identity_magnification() {
        let tex = make_texture(20, 17, 2).unwrap();
        let z = zoom_frame(&tex, (7.3, 9.1), 1.0).unwrap();
        assert!(z.max_abs_diff(&tex) < 1e-12);
        assert!(matches!(zoom_frame(&tex, (1.0, 1.0), 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn foe_is_fixed_point() {
        let tex = make_texture(24, 24, 9).unwrap();
        for m in [1.1, 1.7, 3.0] {
            let z = zoom_frame(&tex, (10.0, 13.0), m).unwrap();
            assert!((z.at(13, 10) - tex.at(13, 10)).abs() < 1e-12);
        }
    }

    #[test]
    fn config_checks() {
        assert!(SynthConfig::default().validate().is_ok());
        let bad = [
            SynthConfig { frames: 100, ..Default::default() },
            SynthConfig { foe: (0.0, 0.5), ..Default::default() },
            SynthConfig { foe: (0.5, 1.0), ..Default::default() },
            SynthConfig { noise_sigma: -0.1, ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(generate(&c), Err(Error::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn truth_and_first_frame() {
        let cfg = SynthConfig { width: 32, height: 32, frames: 5, t0: 10.0, ..Default::default() };
        let seq = generate(&cfg).unwrap();
        assert_eq!(seq.frames.dims(), &[5, 32, 32]);
        assert_eq!(seq.frames.plane(0).unwrap(), make_texture(32, 32, cfg.seed).unwrap());
        let ttcs: Vec<f64> = seq.truth.iter().map(|r| r.ttc).collect();
        assert_eq!(ttcs, vec![10.0, 9.0, 8.0, 7.0, 6.0]);
        assert_eq!(parse_truth(&truth_csv(&seq.truth)).unwrap(), seq.truth);
    }

    #[test]
    fn mse_scoring() {
        let truth: Vec<TruthRow> =
            (0..5).map(|i| TruthRow { frame: i, ttc: 50.0 - i as f64, foe_x: 1.0, foe_y: 2.0 }).collect();
        let pred = |off: f64| -> Vec<TraceRow> {
            truth
                .iter()
                .map(|t| TraceRow {
                    frame: t.frame,
                    ttc: t.ttc + off,
                    foe_x: 0.0,
                    foe_y: 0.0,
                    residual: 0.0,
                    level: 0,
                    degenerate: false,
                })
                .collect()
        };
        assert_eq!(score_mse(&pred(0.0), &truth).unwrap().mse, 0.0);
        assert_eq!(score_mse(&pred(1.0), &truth).unwrap().mse, 1.0);
        let mut p = pred(2.0);
        p[1].ttc = f64::INFINITY;
        p[3].degenerate = true;
        let r = score_mse(&p, &truth).unwrap();
        assert_eq!((r.mse, r.compared, r.excluded), (4.0, 3, 2));
        for row in &mut p {
            row.degenerate = true;
        }
        assert!(matches!(score_mse(&p, &truth), Err(Error::Scoring(_))));
    }
}
