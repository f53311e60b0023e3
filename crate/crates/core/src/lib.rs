//! Hybrid direct/FFT n-dimensional convolution with an image-gradient and
//! time-to-contact stack built on top.
//!
//! * [`conv`]: convolution and cross-correlation with FULL/SAME/VALID output,
//!   zero or replicate boundary, and kernel-size dispatch between backends.
//! * [`kernels`]: Roberts, Prewitt and Sobel gradients.
//! * [`ttc`]: time to contact and focus of expansion from frame pairs.
//! * [`synth`]: zoom sequences with known ground truth.
//! * [`bench`]: backend timing and crossover calibration.

// `!(x < y)` is used on purpose so NaN fails validation checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod config;
pub mod conv;
pub mod error;
pub mod io;
pub mod kernels;
pub mod rng;
pub mod synth;
pub mod tensor;
pub mod ttc;

pub use error::{Error, Result};
pub use tensor::{Image, Tensor};
