//! Hybrid n-dimensional convolution.
//!
//! Two backends compute the same result: [`conv_direct`] sums the sliding
//! products explicitly and wins for the small kernels used in vision work,
//! [`conv_fft`] multiplies spectra and wins once the kernel gets large.
//! [`conv_auto`] picks one by total kernel element count.
//!
//! `conv_*` is true convolution (the kernel is reflected along every axis).
//! [`xcorr_direct`] applies the kernel as written, which is how image
//! gradient masks are conventionally applied.
//!
//! Output extents per axis, with signal extent `m` and kernel extent `n`:
//!
//! | shape | extent      | `out[i]` equals        |
//! |-------|-------------|------------------------|
//! | Full  | `m + n - 1` | `full[i]`              |
//! | Same  | `m`         | `full[i + (n - 1)/2]`  |
//! | Valid | `m - n + 1` | `full[i + n - 1]`      |

mod direct;
mod fft;

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::tensor::{strides_for, Tensor};

pub use fft::fast_len;

/// Default AUTO threshold in total kernel elements (30 x 30).
pub const DEFAULT_AUTO_THRESHOLD: usize = 900;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ConvShape {
    #[default]
    Full,
    Same,
    Valid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    #[default]
    Zero,
    Replicate,
}

/// Which backend actually ran.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Direct,
    Fft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvMethod {
    Direct,
    Fft,
    /// Direct iff the kernel has fewer than `threshold` elements.
    Auto {
        threshold: usize,
    },
}

impl Default for ConvMethod {
    fn default() -> Self {
        ConvMethod::Auto { threshold: DEFAULT_AUTO_THRESHOLD }
    }
}

impl ConvMethod {
    pub fn auto(threshold: usize) -> Result<Self> {
        if threshold == 0 {
            return Err(Error::Config("auto threshold must be >= 1".into()));
        }
        Ok(ConvMethod::Auto { threshold })
    }

    pub fn choose(&self, kernel_len: usize) -> Backend {
        match *self {
            ConvMethod::Direct => Backend::Direct,
            ConvMethod::Fft => Backend::Fft,
            ConvMethod::Auto { threshold } if kernel_len < threshold => Backend::Direct,
            ConvMethod::Auto { .. } => Backend::Fft,
        }
    }
}

/// Everything needed to run one convolution besides the operands.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConvPlan {
    pub method: ConvMethod,
    pub shape: ConvShape,
    pub boundary: BoundaryPolicy,
}

impl ConvPlan {
    pub fn conv(&self, signal: &Tensor, kernel: &Tensor) -> Result<(Tensor, Backend)> {
        let backend = self.method.choose(kernel.len());
        let out = match backend {
            Backend::Direct => conv_direct(signal, kernel, self.shape, self.boundary)?,
            Backend::Fft => fft::conv(signal, kernel, self.shape, self.boundary)?,
        };
        Ok((out, backend))
    }

    pub fn xcorr(&self, signal: &Tensor, kernel: &Tensor) -> Result<(Tensor, Backend)> {
        self.conv(signal, &kernel.reflect())
    }
}

/// Direct-summation convolution.
pub fn conv_direct(signal: &Tensor, kernel: &Tensor, shape: ConvShape, boundary: BoundaryPolicy) -> Result<Tensor> {
    let win = Window::new(signal, kernel, shape)?;
    let padded = win.pad(signal, boundary);
    Ok(direct::valid_xcorr(&padded, &win.padded_dims, &kernel.reflect(), &win.out_dims))
}

/// Direct cross-correlation: the kernel is not reflected.
///
/// Equal to `conv_direct(signal, &kernel.reflect(), ..)`.
pub fn xcorr_direct(signal: &Tensor, kernel: &Tensor, shape: ConvShape, boundary: BoundaryPolicy) -> Result<Tensor> {
    let win = Window::new(signal, kernel, shape)?;
    let padded = win.pad(signal, boundary);
    Ok(direct::valid_xcorr(&padded, &win.padded_dims, kernel, &win.out_dims))
}

/// FFT convolution with zero boundary.
pub fn conv_fft(signal: &Tensor, kernel: &Tensor, shape: ConvShape) -> Result<Tensor> {
    fft::conv(signal, kernel, shape, BoundaryPolicy::Zero)
}

/// Dispatches on `method` (zero boundary) and reports the backend used.
pub fn conv_auto(signal: &Tensor, kernel: &Tensor, shape: ConvShape, method: ConvMethod) -> Result<(Tensor, Backend)> {
    ConvPlan { method, shape, boundary: BoundaryPolicy::Zero }.conv(signal, kernel)
}

/// Output geometry of one call: per axis, the output covers full-convolution
/// indices `offset[k] .. offset[k] + out_dims[k]`.
#[derive(Debug)]
pub(crate) struct Window {
    pub offset: Vec<usize>,
    pub out_dims: Vec<usize>,
    pub kernel_dims: Vec<usize>,
    pub signal_dims: Vec<usize>,
    /// Extents of the signal region read by the output, boundary included.
    pub padded_dims: Vec<usize>,
}

impl Window {
    pub fn new(signal: &Tensor, kernel: &Tensor, shape: ConvShape) -> Result<Window> {
        if signal.ndim() != kernel.ndim() {
            return Err(Error::Rank { signal: signal.ndim(), kernel: kernel.ndim() });
        }
        let mut offset = Vec::with_capacity(signal.ndim());
        let mut out_dims = Vec::with_capacity(signal.ndim());
        for (axis, (&m, &n)) in signal.dims().iter().zip(kernel.dims()).enumerate() {
            let (off, len) = match shape {
                ConvShape::Full => (0, m + n - 1),
                ConvShape::Same => ((n - 1) / 2, m),
                ConvShape::Valid if m >= n => (n - 1, m - n + 1),
                ConvShape::Valid => {
                    return Err(Error::Shape(format!(
                        "VALID needs signal extent >= kernel extent on every axis (axis {axis}: {m} < {n})"
                    )))
                }
            };
            offset.push(off);
            out_dims.push(len);
        }
        let padded_dims = out_dims.iter().zip(kernel.dims()).map(|(&l, &n)| l + n - 1).collect();
        Ok(Window {
            offset,
            out_dims,
            kernel_dims: kernel.dims().to_vec(),
            signal_dims: signal.dims().to_vec(),
            padded_dims,
        })
    }

    /// First signal index read on each axis (may be negative).
    fn origin(&self, axis: usize) -> isize {
        self.offset[axis] as isize - (self.kernel_dims[axis] as isize - 1)
    }

    /// Copies the signal region read by the output, filling out-of-range
    /// positions per `boundary`. Borrowed when no padding is needed.
    pub fn pad<'a>(&self, signal: &'a Tensor, boundary: BoundaryPolicy) -> Cow<'a, [f64]> {
        let nd = self.signal_dims.len();
        if self.padded_dims == self.signal_dims && (0..nd).all(|k| self.origin(k) == 0) {
            return Cow::Borrowed(signal.data());
        }
        let last = nd - 1;
        let row_len = self.padded_dims[last];
        let src_w = self.signal_dims[last];
        let src_strides = strides_for(&self.signal_dims);
        let x0 = self.origin(last);
        let rows = self.padded_dims[..last].iter().product::<usize>();
        let mut out = vec![0.0; rows * row_len];
        let mut idx = vec![0usize; last];
        let src = signal.data();
        for row in out.chunks_exact_mut(row_len) {
            // source row offset, or None if the whole row lies in the zero region
            let mut base = Some(0usize);
            for k in 0..last {
                let s = idx[k] as isize + self.origin(k);
                let m = self.signal_dims[k] as isize;
                let s = match boundary {
                    BoundaryPolicy::Replicate => s.clamp(0, m - 1),
                    BoundaryPolicy::Zero if (0..m).contains(&s) => s,
                    BoundaryPolicy::Zero => {
                        base = None;
                        break;
                    }
                };
                base = base.map(|b| b + s as usize * src_strides[k]);
            }
            if let Some(base) = base {
                let src_row = &src[base..base + src_w];
                for (x, v) in row.iter_mut().enumerate() {
                    let s = x as isize + x0;
                    *v = if (0..src_w as isize).contains(&s) {
                        src_row[s as usize]
                    } else {
                        match boundary {
                            BoundaryPolicy::Replicate => src_row[s.clamp(0, src_w as isize - 1) as usize],
                            BoundaryPolicy::Zero => 0.0,
                        }
                    };
                }
            }
            crate::tensor::advance(&mut idx, &self.padded_dims[..last]);
        }
        Cow::Owned(out)
    }
}

impl fmt::Display for ConvShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConvShape::Full => "full",
            ConvShape::Same => "same",
            ConvShape::Valid => "valid",
        })
    }
}

impl FromStr for ConvShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(ConvShape::Full),
            "same" => Ok(ConvShape::Same),
            "valid" => Ok(ConvShape::Valid),
            _ => Err(Error::Input(format!("unknown shape {s:?}"))),
        }
    }
}

impl FromStr for BoundaryPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(BoundaryPolicy::Zero),
            "replicate" => Ok(BoundaryPolicy::Replicate),
            _ => Err(Error::Input(format!("unknown boundary {s:?}"))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Direct => "direct",
            Backend::Fft => "fft",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(Backend::Direct),
            "fft" => Ok(Backend::Fft),
            _ => Err(Error::Input(format!("unknown backend {s:?}"))),
        }
    }
}
