use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use convtact::bench::{self, BenchSpec};
use convtact::config::{Config, CONFIG_FILE};
use convtact::conv::{BoundaryPolicy, ConvMethod, ConvPlan, ConvShape};
use convtact::io::{frames, ndt, pgm};
use convtact::kernels::{gradient, kernel_lookup, KernelName};
use convtact::synth::{self, SynthConfig};
use convtact::ttc::{self, trace, Mode, TtcConfig};
use convtact::Tensor;

#[derive(Parser)]
#[command(name = "convtact", version, about = "Hybrid direct/FFT convolution and time-to-contact estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convolve an NDT tensor with an NDT kernel
    Conv(ConvArgs),
    /// Image gradient with a named kernel
    Gradient(GradientArgs),
    /// Time to contact and FOE for a frame sequence
    Ttc(TtcArgs),
    /// Write a synthetic zoom sequence with ground truth
    Synth(SynthArgs),
    /// Time the direct and FFT backends over a range of kernel extents
    Bench(BenchArgs),
    /// Find the direct/FFT crossover and store it in convtact.cfg
    Calibrate(CalibrateArgs),
    /// Score a TTC trace against ground truth
    Eval(EvalArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Direct,
    Fft,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Full,
    Same,
    Valid,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Zero,
    Replicate,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Roberts,
    Prewitt2,
    Prewitt3,
    Sobel,
}

#[derive(Args)]
struct ConvArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    kernel: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "full")]
    shape: ShapeArg,
    #[arg(long, value_enum, default_value = "zero")]
    boundary: BoundaryArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GradientArgs {
    /// PGM image or 2-D NDT tensor
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    kernel: KernelArg,
    /// Writes PREFIX_ex.ndt, PREFIX_ey.ndt, PREFIX_mag.ndt and PREFIX_dir.ndt
    #[arg(long)]
    out_prefix: PathBuf,
    /// Also write ex, ey and mag as PGM rescaled to the full grey range
    #[arg(long)]
    pgm: bool,
}

#[derive(Args)]
struct TtcArgs {
    /// Directory of frame_NNNNNN.pgm files or a 3-D NDT stack
    #[arg(long)]
    frames: PathBuf,
    /// Fixed pyramid level (default 0)
    #[arg(long, conflicts_with = "multiscale")]
    level: Option<usize>,
    #[arg(long)]
    multiscale: bool,
    #[arg(long, default_value_t = 5, requires = "multiscale")]
    max_level: usize,
    /// Trace output; stdout when omitted
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value = "256x256", value_parser = parse_size)]
    size: (usize, usize),
    #[arg(long, default_value_t = 60)]
    frames: usize,
    #[arg(long, default_value_t = 100.0)]
    t0: f64,
    #[arg(long, default_value = "0.4,0.55", value_parser = parse_pair)]
    foe: (f64, f64),
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 2)]
    ndim: usize,
    #[arg(long, default_value_t = 256)]
    signal_extent: usize,
    /// Inclusive range A..B
    #[arg(long, value_parser = parse_extents)]
    kernel_extents: Extents,
    #[arg(long, default_value_t = bench::MIN_REPS)]
    reps: usize,
    /// Bench records; stdout when omitted
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 2)]
    ndim: usize,
    #[arg(long, default_value_t = 1000)]
    signal_extent: usize,
    /// Inclusive range A..B; 2..64 in 2-D when omitted
    #[arg(long, value_parser = parse_extents)]
    kernel_extents: Option<Extents>,
    #[arg(long, default_value_t = bench::MIN_REPS)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Clone, Debug)]
struct Extents(Vec<usize>);

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WxH")?;
    let w = w.parse().map_err(|_| format!("bad width {w:?}"))?;
    let h = h.parse().map_err(|_| format!("bad height {h:?}"))?;
    Ok((w, h))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected FX,FY")?;
    let a = a.trim().parse().map_err(|_| format!("bad number {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad number {b:?}"))?;
    Ok((a, b))
}

fn parse_extents(s: &str) -> Result<Extents, String> {
    bench::parse_extent_range(s).map(Extents).map_err(|e| e.to_string())
}

/// Bad arguments that clap cannot catch on its own. Exit code 1.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(r: convtact::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| Usage(e.to_string()).into())
}

fn read_tensor(path: &Path) -> anyhow::Result<Tensor> {
    let is_pgm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    Ok(if is_pgm { pgm::read(path)? } else { ndt::read(path)? })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Linear map of `t` onto `[0, 1]`; a constant image maps to 0.
fn rescale(t: &Tensor) -> Tensor {
    let (lo, hi) = t.data().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let span = hi - lo;
    t.map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 })
}

fn cmd_conv(a: ConvArgs) -> anyhow::Result<()> {
    let signal = read_tensor(&a.input)?;
    let kernel = read_tensor(&a.kernel)?;
    let method = match a.method {
        MethodArg::Direct => ConvMethod::Direct,
        MethodArg::Fft => ConvMethod::Fft,
        MethodArg::Auto => Config::load(CONFIG_FILE)?.method(),
    };
    let shape = match a.shape {
        ShapeArg::Full => ConvShape::Full,
        ShapeArg::Same => ConvShape::Same,
        ShapeArg::Valid => ConvShape::Valid,
    };
    let boundary = match a.boundary {
        BoundaryArg::Zero => BoundaryPolicy::Zero,
        BoundaryArg::Replicate => BoundaryPolicy::Replicate,
    };
    let (out, backend) = ConvPlan { method, shape, boundary }.conv(&signal, &kernel)?;
    ndt::write(&out, &a.out)?;
    eprintln!("backend={backend}");
    Ok(())
}

fn cmd_gradient(a: GradientArgs) -> anyhow::Result<()> {
    let img = read_tensor(&a.input)?;
    let name = match a.kernel {
        KernelArg::Roberts => KernelName::Roberts,
        KernelArg::Prewitt2 => KernelName::Prewitt2,
        KernelArg::Prewitt3 => KernelName::Prewitt3,
        KernelArg::Sobel => KernelName::Sobel,
    };
    let g = gradient(&img, &kernel_lookup(name))?;
    for (tag, t) in [("ex", &g.ex), ("ey", &g.ey), ("mag", &g.mag), ("dir", &g.dir)] {
        ndt::write(t, with_suffix(&a.out_prefix, &format!("_{tag}.ndt")))?;
    }
    if a.pgm {
        for (tag, t) in [("ex", &g.ex), ("ey", &g.ey), ("mag", &g.mag)] {
            pgm::write(&rescale(t), with_suffix(&a.out_prefix, &format!("_{tag}.pgm")))?;
        }
    }
    Ok(())
}

fn cmd_ttc(a: TtcArgs) -> anyhow::Result<()> {
    let stack = frames::load(&a.frames)?;
    let mode = if a.multiscale { Mode::Multiscale(a.max_level) } else { Mode::Fixed(a.level.unwrap_or(0)) };
    let (h, w) = (stack.dims()[1], stack.dims()[2]);
    let estimates = ttc::run_sequence(&stack, mode, &TtcConfig::default())?;
    let rows = trace::rows(&estimates, w, h);
    match a.csv {
        Some(path) => trace::write(&path, &rows)?,
        None => trace::write_csv(io::stdout().lock(), &rows).context("writing trace to stdout")?,
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> anyhow::Result<()> {
    let cfg = SynthConfig {
        width: a.size.0,
        height: a.size.1,
        frames: a.frames,
        t0: a.t0,
        foe: a.foe,
        seed: a.seed,
        noise_sigma: a.noise,
        ..SynthConfig::default()
    };
    usage(cfg.validate())?;
    let seq = synth::generate(&cfg)?;
    synth::write_sequence(&seq, &a.out)?;
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> anyhow::Result<()> {
    let spec = BenchSpec {
        ndim: a.ndim,
        signal_extent: a.signal_extent,
        kernel_extents: a.kernel_extents.0,
        reps: a.reps,
        seed: a.seed,
    };
    let sweep = usage(bench::bench_sweep(&spec))?;
    for s in &sweep.skipped {
        eprintln!("skipped {} at kernel extent {}: transform buffers too large", s.method, s.kernel_extent);
    }
    match a.csv {
        Some(path) => bench::write_csv(&path, &sweep.records)?,
        None => io::stdout().write_all(bench::to_csv(&sweep.records).as_bytes()).context("writing bench records")?,
    }
    Ok(())
}

fn cmd_calibrate(a: CalibrateArgs) -> anyhow::Result<()> {
    let extents = a.kernel_extents.map_or_else(|| bench::default_calibration_extents(a.ndim), |e| e.0);
    let report = usage(bench::calibrate(a.ndim, a.signal_extent, &extents, a.reps, a.seed))?;
    let mut cfg = Config::load(CONFIG_FILE)?;
    let mut out = io::stdout().lock();
    for r in &report.records {
        writeln!(out, "extent {:>4} {:<6} median {:>14.0} ns", r.kernel_extent, r.method.to_string(), r.median_ns)?;
    }
    match (report.crossover_extent, report.recommended_threshold) {
        (Some(k), Some(t)) => {
            writeln!(out, "crossover at kernel extent {k}; auto_threshold={t}")?;
            cfg.auto_threshold = t;
        }
        _ => writeln!(out, "no crossover in the sweep; keeping auto_threshold={}", cfg.auto_threshold)?,
    }
    cfg.save(CONFIG_FILE)?;
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> anyhow::Result<()> {
    let pred = trace::read(&a.pred)?;
    let truth = synth::read_truth(&a.truth)?;
    let report = synth::score_mse(&pred, &truth)?;
    println!("mse={} compared={} excluded={}", report.mse, report.compared, report.excluded);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Conv(a) => cmd_conv(a),
        Command::Gradient(a) => cmd_gradient(a),
        Command::Ttc(a) => cmd_ttc(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("convtact: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
