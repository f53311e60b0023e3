//! Direct-vs-FFT timing sweeps and crossover calibration.
//!
//! Every timed call runs in the same process after at least one untimed
//! warmup call; times come from [`Instant`] and are reported in nanoseconds.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use crate::conv::{conv_direct, conv_fft, fast_len, Backend, BoundaryPolicy, ConvShape};
use crate::error::{Error, Result};
use crate::rng::XorShift64Star;
use crate::tensor::Tensor;
use crate::ttc::trace::{fmt_f64, parse_f64};

pub const HEADER: &str = "method,ndim,signal_extent,kernel_extent,reps,median_ns,mean_ns,stddev_ns";
pub const MIN_REPS: usize = 5;
/// Consecutive FFT wins needed before a crossover is accepted.
pub const CONFIRM_RUN: usize = 3;
/// FFT configurations whose complex work buffers would exceed this many
/// bytes are skipped instead of run.
pub const MAX_FFT_BYTES: usize = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRecord {
    pub method: Backend,
    pub ndim: usize,
    pub signal_extent: usize,
    pub kernel_extent: usize,
    pub reps: usize,
    pub median_ns: f64,
    pub mean_ns: f64,
    pub stddev_ns: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Skipped {
    pub method: Backend,
    pub kernel_extent: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub ndim: usize,
    pub signal_extent: usize,
    pub kernel_extents: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sweep {
    pub records: Vec<BenchRecord>,
    pub skipped: Vec<Skipped>,
}

impl BenchSpec {
    fn validate(&self) -> Result<()> {
        if self.ndim == 0 {
            return Err(Error::Config("ndim must be >= 1".into()));
        }
        if self.signal_extent == 0 || self.kernel_extents.contains(&0) {
            return Err(Error::Config("extents must be >= 1".into()));
        }
        if self.reps < MIN_REPS {
            return Err(Error::Config(format!("reps must be >= {MIN_REPS}, got {}", self.reps)));
        }
        Ok(())
    }
}

/// Parses `A..B` (inclusive) or a single extent.
pub fn parse_extent_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("kernel extents must look like A..B with 1 <= A <= B, got {s:?}"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let v = s.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn random_tensor(dims: &[usize], rng: &mut XorShift64Star) -> Result<Tensor> {
    Tensor::from_fn(dims, |_| rng.range(-1.0, 1.0))
}

fn fft_bytes(ndim: usize, m: usize, n: usize) -> Option<usize> {
    // two complex64 buffers on the transform grid
    let per_axis = fast_len(m + n - 1);
    (0..ndim).try_fold(32usize, |acc, _| acc.checked_mul(per_axis))
}

/// Median, mean and sample standard deviation of `samples`, which must be
/// non-empty.
pub fn summarize(samples: &[f64]) -> (f64, f64, f64) {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let median = if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) };
    let mean = s.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    (median, mean, var.sqrt())
}

fn time_one(method: Backend, signal: &Tensor, kernel: &Tensor, spec: &BenchSpec, k: usize) -> Result<BenchRecord> {
    let run = || -> Result<Tensor> {
        match method {
            Backend::Direct => conv_direct(signal, kernel, ConvShape::Same, BoundaryPolicy::Zero),
            Backend::Fft => conv_fft(signal, kernel, ConvShape::Same),
        }
    };
    std::hint::black_box(run()?);
    let mut samples = Vec::with_capacity(spec.reps);
    for _ in 0..spec.reps {
        let t = Instant::now();
        let out = run()?;
        // at least 1 ns so a record never claims zero cost
        samples.push((t.elapsed().as_nanos() as f64).max(1.0));
        std::hint::black_box(out);
    }
    let (median_ns, mean_ns, stddev_ns) = summarize(&samples);
    Ok(BenchRecord {
        method,
        ndim: spec.ndim,
        signal_extent: spec.signal_extent,
        kernel_extent: k,
        reps: spec.reps,
        median_ns,
        mean_ns,
        stddev_ns,
    })
}

/// Times both backends, SAME shape, on one seeded random signal and one
/// seeded random kernel per extent. Records come out in sweep order, direct
/// before FFT.
pub fn bench_sweep(spec: &BenchSpec) -> Result<Sweep> {
    spec.validate()?;
    let mut out = Sweep::default();
    let mut rng = XorShift64Star::new(spec.seed);
    let signal = random_tensor(&vec![spec.signal_extent; spec.ndim], &mut rng)?;
    for &k in &spec.kernel_extents {
        bench_extent(spec, &signal, k, &mut rng, &mut out)?;
    }
    Ok(out)
}

fn bench_extent(spec: &BenchSpec, signal: &Tensor, k: usize, rng: &mut XorShift64Star, out: &mut Sweep) -> Result<()> {
    let kernel = random_tensor(&vec![k; spec.ndim], rng)?;
    out.records.push(time_one(Backend::Direct, signal, &kernel, spec, k)?);
    match fft_bytes(spec.ndim, spec.signal_extent, k) {
        Some(b) if b <= MAX_FFT_BYTES => out.records.push(time_one(Backend::Fft, signal, &kernel, spec, k)?),
        _ => out.skipped.push(Skipped { method: Backend::Fft, kernel_extent: k }),
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossoverReport {
    pub records: Vec<BenchRecord>,
    /// First extent of the first run of [`CONFIRM_RUN`] consecutive extents
    /// where FFT beat direct.
    pub crossover_extent: Option<usize>,
    /// `crossover_extent ^ ndim`.
    pub recommended_threshold: Option<usize>,
}

fn median_of(records: &[BenchRecord], method: Backend, k: usize) -> Option<f64> {
    records.iter().find(|r| r.method == method && r.kernel_extent == k).map(|r| r.median_ns)
}

/// Extent where FFT starts winning for good, judged over the records.
pub fn find_crossover(records: &[BenchRecord]) -> Option<usize> {
    let mut extents: Vec<usize> = records.iter().map(|r| r.kernel_extent).collect();
    extents.dedup();
    let mut run_start = None;
    let mut run = 0;
    for &k in &extents {
        match (median_of(records, Backend::Direct, k), median_of(records, Backend::Fft, k)) {
            (Some(d), Some(f)) if f < d => {
                run_start.get_or_insert(k);
                run += 1;
                if run >= CONFIRM_RUN {
                    return run_start;
                }
            }
            _ => {
                run_start = None;
                run = 0;
            }
        }
    }
    None
}

/// Sweeps kernel extents in order and stops once the crossover is confirmed,
/// so the expensive large-kernel direct timings are only taken when needed.
pub fn calibrate(
    ndim: usize,
    signal_extent: usize,
    kernel_extents: &[usize],
    reps: usize,
    seed: u64,
) -> Result<CrossoverReport> {
    let spec = BenchSpec { ndim, signal_extent, kernel_extents: kernel_extents.to_vec(), reps, seed };
    spec.validate()?;
    if kernel_extents.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::Config("calibration extents must be contiguous and increasing".into()));
    }
    let mut rng = XorShift64Star::new(seed);
    let signal = random_tensor(&vec![signal_extent; ndim], &mut rng)?;
    let mut sweep = Sweep::default();
    let mut crossover = None;
    for &k in kernel_extents {
        bench_extent(&spec, &signal, k, &mut rng, &mut sweep)?;
        crossover = find_crossover(&sweep.records);
        if crossover.is_some() {
            break;
        }
    }
    let recommended_threshold = crossover.map(|k| k.pow(ndim as u32));
    Ok(CrossoverReport { records: sweep.records, crossover_extent: crossover, recommended_threshold })
}

/// Default calibration extents: 2..64 for 2-D, narrower in higher ranks.
pub fn default_calibration_extents(ndim: usize) -> Vec<usize> {
    match ndim {
        0..=2 => (2..=64).collect(),
        3 => (2..=24).collect(),
        _ => (2..=12).collect(),
    }
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut s = format!("{HEADER}\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.method,
            r.ndim,
            r.signal_extent,
            r.kernel_extent,
            r.reps,
            fmt_f64(r.median_ns),
            fmt_f64(r.mean_ns),
            fmt_f64(r.stddev_ns)
        );
    }
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        other => return Err(Error::Input(format!("bench header must be {HEADER:?}, got {:?}", other.map(|l| l.1)))),
    }
    let mut out = Vec::new();
    for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let n = i + 1;
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 8 {
            return Err(Error::Input(format!("line {n}: expected 8 fields, got {}", f.len())));
        }
        let int = |s: &str, col: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Input(format!("line {n}: bad {col} value {s:?}")))
        };
        out.push(BenchRecord {
            method: f[0].parse().map_err(|_| Error::Input(format!("line {n}: bad method {:?}", f[0])))?,
            ndim: int(f[1], "ndim")?,
            signal_extent: int(f[2], "signal_extent")?,
            kernel_extent: int(f[3], "kernel_extent")?,
            reps: int(f[4], "reps")?,
            median_ns: parse_f64(f[5], n, "median_ns")?,
            mean_ns: parse_f64(f[6], n, "mean_ns")?,
            stddev_ns: parse_f64(f[7], n, "stddev_ns")?,
        });
    }
    Ok(out)
}

pub fn write_csv(path: impl AsRef<Path>, records: &[BenchRecord]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_csv(records)).map_err(|e| Error::io(path, e))
}
