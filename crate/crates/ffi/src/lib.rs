//! C ABI for `convtact`.
//!
//! Tensors cross the boundary as opaque [`CtTensor`] handles owned by the
//! caller and released with [`convtact_tensor_free`]. Every fallible call
//! returns a [`CtStatus`]; on failure [`convtact_last_error`] describes the
//! most recent error on the calling thread. Output handles are written only
//! on success.
//!
//! Arrays are row-major `double`, extents are `size_t`, paths are
//! NUL-terminated UTF-8.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use convtact::conv::{Backend, BoundaryPolicy, ConvMethod, ConvPlan, ConvShape};
use convtact::io::{ndt, pgm};
use convtact::kernels::{gradient, kernel_lookup, KernelName};
use convtact::synth::{generate, SynthConfig};
use convtact::ttc::{estimate_fixed, estimate_multiscale, FramePair, TtcConfig};
use convtact::{Error, Tensor};

/// Opaque tensor handle.
pub struct CtTensor {
    inner: Tensor,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidDimension = 2,
    Rank = 3,
    Shape = 4,
    Format = 5,
    UnknownKernel = 6,
    Domain = 7,
    Scale = 8,
    Config = 9,
    Input = 10,
    Scoring = 11,
    Io = 12,
    BufferTooSmall = 13,
    Panic = 14,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtMethod {
    Auto = 0,
    Direct = 1,
    Fft = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtShape {
    Full = 0,
    Same = 1,
    Valid = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtBoundary {
    Zero = 0,
    Replicate = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtBackend {
    Direct = 0,
    Fft = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtKernel {
    Roberts = 0,
    Prewitt2 = 1,
    Prewitt3 = 2,
    Sobel = 3,
}

/// One time-to-contact estimate. FOE is in absolute pixel coordinates.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CtTtcEstimate {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub foe_x: f64,
    pub foe_y: f64,
    pub ttc: f64,
    pub residual: f64,
    pub level: usize,
    pub degenerate: bool,
}

/// Synthetic sequence parameters. `foe_x`, `foe_y` are fractions of the
/// frame extent.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CtSynthConfig {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub t0: f64,
    pub foe_x: f64,
    pub foe_y: f64,
    pub seed: u64,
    pub noise_sigma: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CtStatus {
    match e {
        Error::InvalidDimension { .. } => CtStatus::InvalidDimension,
        Error::Rank { .. } => CtStatus::Rank,
        Error::Shape(_) => CtStatus::Shape,
        Error::Format { .. } => CtStatus::Format,
        Error::UnknownKernel(_) => CtStatus::UnknownKernel,
        Error::Domain(_) => CtStatus::Domain,
        Error::Scale(_) => CtStatus::Scale,
        Error::Config(_) => CtStatus::Config,
        Error::Input(_) => CtStatus::Input,
        Error::Scoring(_) => CtStatus::Scoring,
        Error::Io { .. } => CtStatus::Io,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Small(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CtStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("{what} is NULL"));
            CtStatus::NullPointer
        }
        Ok(Err(Fail::Small(msg))) => {
            set_error(msg);
            CtStatus::BufferTooSmall
        }
        Err(_) => {
            set_error("internal panic".into());
            CtStatus::Panic
        }
    }
}

unsafe fn tensor_ref<'a>(t: *const CtTensor, what: &'static str) -> Result<&'a Tensor, Fail> {
    t.as_ref().map(|t| &t.inner).ok_or(Fail::Null(what))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null("path"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Lib(Error::Input("path is not valid UTF-8".into())))
}

unsafe fn put<T>(out: *mut T, v: T) {
    ptr::write(out, v);
}

fn boxed(t: Tensor) -> *mut CtTensor {
    Box::into_raw(Box::new(CtTensor { inner: t }))
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn convtact_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn convtact_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New tensor with extents `dims[0..ndim]`, filled from `data` (which must
/// hold the product of the extents) or with zeros when `data` is NULL.
#[no_mangle]
pub unsafe extern "C" fn convtact_tensor_new(
    dims: *const usize,
    ndim: usize,
    data: *const f64,
    out: *mut *mut CtTensor,
) -> CtStatus {
    guard(|| {
        if dims.is_null() && ndim > 0 {
            return Err(Fail::Null("dims"));
        }
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let dims = if ndim == 0 { Vec::new() } else { slice::from_raw_parts(dims, ndim).to_vec() };
        let t = Tensor::zeros(&dims)?;
        let t = if data.is_null() { t } else { Tensor::new(dims, slice::from_raw_parts(data, t.len()).to_vec())? };
        put(out, boxed(t));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn convtact_tensor_free(t: *mut CtTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of axes, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn convtact_tensor_ndim(t: *const CtTensor) -> usize {
    t.as_ref().map_or(0, |t| t.inner.ndim())
}

/// Number of elements, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn convtact_tensor_len(t: *const CtTensor) -> usize {
    t.as_ref().map_or(0, |t| t.inner.len())
}

/// Copies the extents into `dims`, which holds `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn convtact_tensor_dims(t: *const CtTensor, dims: *mut usize, cap: usize) -> CtStatus {
    guard(|| {
        let t = tensor_ref(t, "tensor")?;
        if cap < t.ndim() {
            return Err(Fail::Small(format!("dims buffer holds {cap}, need {}", t.ndim())));
        }
        if t.ndim() > 0 {
            if dims.is_null() {
                return Err(Fail::Null("dims"));
            }
            slice::from_raw_parts_mut(dims, t.ndim()).copy_from_slice(t.dims());
        }
        Ok(())
    })
}

/// Borrowed pointer to the elements; valid while the handle lives.
#[no_mangle]
pub unsafe extern "C" fn convtact_tensor_data(t: *const CtTensor) -> *const f64 {
    t.as_ref().map_or(ptr::null(), |t| t.inner.data().as_ptr())
}

/// Reads an NDT file.
#[no_mangle]
pub unsafe extern "C" fn convtact_tensor_read(path: *const c_char, out: *mut *mut CtTensor) -> CtStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let t = ndt::read(path_arg(path)?)?;
        put(out, boxed(t));
        Ok(())
    })
}

/// Writes an NDT file.
#[no_mangle]
pub unsafe extern "C" fn convtact_tensor_write(t: *const CtTensor, path: *const c_char) -> CtStatus {
    guard(|| Ok(ndt::write(tensor_ref(t, "tensor")?, path_arg(path)?)?))
}

/// Reads a binary PGM as a `[height, width]` tensor scaled to `[0, 1]`.
#[no_mangle]
pub unsafe extern "C" fn convtact_pgm_read(path: *const c_char, out: *mut *mut CtTensor) -> CtStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let t = pgm::read(path_arg(path)?)?;
        put(out, boxed(t));
        Ok(())
    })
}

/// Writes a `[height, width]` tensor with values in `[0, 1]` as 8-bit PGM.
#[no_mangle]
pub unsafe extern "C" fn convtact_pgm_write(t: *const CtTensor, path: *const c_char) -> CtStatus {
    guard(|| Ok(pgm::write(tensor_ref(t, "tensor")?, path_arg(path)?)?))
}

/// Convolution, or cross-correlation when `correlate` is set. With
/// `CT_METHOD_AUTO` kernels of fewer than `auto_threshold` elements run
/// direct. `backend` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn convtact_conv(
    signal: *const CtTensor,
    kernel: *const CtTensor,
    method: CtMethod,
    auto_threshold: usize,
    shape: CtShape,
    boundary: CtBoundary,
    correlate: bool,
    out: *mut *mut CtTensor,
    backend: *mut CtBackend,
) -> CtStatus {
    guard(|| {
        let (s, k) = (tensor_ref(signal, "signal")?, tensor_ref(kernel, "kernel")?);
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let method = match method {
            CtMethod::Auto => ConvMethod::auto(auto_threshold)?,
            CtMethod::Direct => ConvMethod::Direct,
            CtMethod::Fft => ConvMethod::Fft,
        };
        let shape = match shape {
            CtShape::Full => ConvShape::Full,
            CtShape::Same => ConvShape::Same,
            CtShape::Valid => ConvShape::Valid,
        };
        let boundary = match boundary {
            CtBoundary::Zero => BoundaryPolicy::Zero,
            CtBoundary::Replicate => BoundaryPolicy::Replicate,
        };
        let plan = ConvPlan { method, shape, boundary };
        let (t, used) = if correlate { plan.xcorr(s, k)? } else { plan.conv(s, k)? };
        put(out, boxed(t));
        if !backend.is_null() {
            put(backend, if used == Backend::Direct { CtBackend::Direct } else { CtBackend::Fft });
        }
        Ok(())
    })
}

/// Gradient fields of a 2-D image. Each output pointer may be NULL to skip
/// that field.
#[no_mangle]
pub unsafe extern "C" fn convtact_gradient(
    image: *const CtTensor,
    kernel: CtKernel,
    ex: *mut *mut CtTensor,
    ey: *mut *mut CtTensor,
    mag: *mut *mut CtTensor,
    dir: *mut *mut CtTensor,
) -> CtStatus {
    guard(|| {
        let img = tensor_ref(image, "image")?;
        let name = match kernel {
            CtKernel::Roberts => KernelName::Roberts,
            CtKernel::Prewitt2 => KernelName::Prewitt2,
            CtKernel::Prewitt3 => KernelName::Prewitt3,
            CtKernel::Sobel => KernelName::Sobel,
        };
        let g = gradient(img, &kernel_lookup(name))?;
        for (dst, t) in [(ex, g.ex), (ey, g.ey), (mag, g.mag), (dir, g.dir)] {
            if !dst.is_null() {
                put(dst, boxed(t));
            }
        }
        Ok(())
    })
}

/// Estimate for one frame pair. `level` is the fixed pyramid level, or the
/// deepest level searched when `multiscale` is set.
#[no_mangle]
pub unsafe extern "C" fn convtact_ttc_estimate(
    e0: *const CtTensor,
    e1: *const CtTensor,
    multiscale: bool,
    level: usize,
    out: *mut CtTtcEstimate,
) -> CtStatus {
    guard(|| {
        let (a, b) = (tensor_ref(e0, "e0")?, tensor_ref(e1, "e1")?);
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let pair = FramePair::new(a, b, 0)?;
        let cfg = TtcConfig::default();
        let est =
            if multiscale { estimate_multiscale(&pair, level, &cfg)? } else { estimate_fixed(&pair, level, &cfg)? };
        let (foe_x, foe_y) = est.foe_pixels(a.width(), a.height());
        put(
            out,
            CtTtcEstimate {
                a: est.a,
                b: est.b,
                c: est.c,
                foe_x,
                foe_y,
                ttc: est.ttc,
                residual: est.residual,
                level: est.level,
                degenerate: est.degenerate,
            },
        );
        Ok(())
    })
}

/// Default synthetic configuration.
#[no_mangle]
pub extern "C" fn convtact_synth_default() -> CtSynthConfig {
    let d = SynthConfig::default();
    CtSynthConfig {
        width: d.width,
        height: d.height,
        frames: d.frames,
        t0: d.t0,
        foe_x: d.foe.0,
        foe_y: d.foe.1,
        seed: d.seed,
        noise_sigma: d.noise_sigma,
    }
}

/// Synthetic zoom sequence as a `[frames, height, width]` tensor.
#[no_mangle]
pub unsafe extern "C" fn convtact_synth_generate(cfg: *const CtSynthConfig, out: *mut *mut CtTensor) -> CtStatus {
    guard(|| {
        let c = cfg.as_ref().ok_or(Fail::Null("cfg"))?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let seq = generate(&SynthConfig {
            width: c.width,
            height: c.height,
            frames: c.frames,
            t0: c.t0,
            foe: (c.foe_x, c.foe_y),
            seed: c.seed,
            noise_sigma: c.noise_sigma,
            ..SynthConfig::default()
        })?;
        put(out, boxed(seq.frames));
        Ok(())
    })
}

/// Plane `index` of a tensor with at least two axes.
#[no_mangle]
pub unsafe extern "C" fn convtact_tensor_plane(t: *const CtTensor, index: usize, out: *mut *mut CtTensor) -> CtStatus {
    guard(|| {
        let t = tensor_ref(t, "tensor")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        put(out, boxed(t.plane(index)?));
        Ok(())
    })
}
