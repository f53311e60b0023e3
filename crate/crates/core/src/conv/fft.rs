//! Frequency-domain convolution.
//!
//! Both operands are zero-padded to a 7-smooth length of at least `m + n - 1`
//! per axis so the cyclic product equals the linear (FULL) convolution, then
//! the requested window is cropped out.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::{BoundaryPolicy, ConvShape, Window};
use crate::error::Result;
use crate::tensor::{advance, strides_for, Tensor};

/// Smallest `len >= n` whose prime factors are all in {2, 3, 5, 7}.
pub fn fast_len(n: usize) -> usize {
    let mut len = n.max(1);
    loop {
        let mut r = len;
        for p in [2, 3, 5, 7] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return len;
        }
        len += 1;
    }
}

pub(crate) fn conv(signal: &Tensor, kernel: &Tensor, shape: ConvShape, boundary: BoundaryPolicy) -> Result<Tensor> {
    let win = Window::new(signal, kernel, shape)?;
    let (src, src_dims, offset) = match boundary {
        BoundaryPolicy::Zero => (signal.data().into(), win.signal_dims.clone(), win.offset.clone()),
        // the padded region already holds every value the output reads; keep
        // the fully-overlapping part of its linear convolution
        BoundaryPolicy::Replicate => {
            let padded = win.pad(signal, boundary);
            (padded, win.padded_dims.clone(), win.kernel_dims.iter().map(|n| n - 1).collect())
        }
    };
    let full = full_linear(&src, &src_dims, kernel);
    Ok(crop(&full, &offset, &win.out_dims))
}

/// Linear convolution of `src` (extents `src_dims`) with `kernel`, returned
/// on the padded transform grid.
struct Grid {
    dims: Vec<usize>,
    data: Vec<f64>,
}

fn full_linear(src: &[f64], src_dims: &[usize], kernel: &Tensor) -> Grid {
    let dims: Vec<usize> = src_dims.iter().zip(kernel.dims()).map(|(m, n)| fast_len(m + n - 1)).collect();
    let mut planner = FftPlanner::<f64>::new();
    let forward: Vec<_> = dims.iter().map(|&n| planner.plan_fft(n, FftDirection::Forward)).collect();
    let inverse: Vec<_> = dims.iter().map(|&n| planner.plan_fft(n, FftDirection::Inverse)).collect();

    let mut a = embed(src, src_dims, &dims);
    let mut b = embed(kernel.data(), kernel.dims(), &dims);
    transform(&mut a, &dims, &forward);
    transform(&mut b, &dims, &forward);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    drop(b);
    transform(&mut a, &dims, &inverse);
    let norm = 1.0 / a.len() as f64;
    Grid { data: a.iter().map(|c| c.re * norm).collect(), dims }
}

fn embed(src: &[f64], src_dims: &[usize], dims: &[usize]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); dims.iter().product()];
    let last = dims.len() - 1;
    let strides = strides_for(dims);
    let w = src_dims[last];
    let mut idx = vec![0usize; last];
    for row in src.chunks_exact(w) {
        let base: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
        for (o, &v) in out[base..base + w].iter_mut().zip(row) {
            o.re = v;
        }
        advance(&mut idx, &src_dims[..last]);
    }
    out
}

/// In-place n-D transform, one axis at a time.
fn transform(buf: &mut [Complex64], dims: &[usize], plans: &[Arc<dyn Fft<f64>>]) {
    let scratch_len = plans.iter().map(|p| p.get_inplace_scratch_len()).max().unwrap_or(0);
    let mut scratch = vec![Complex64::default(); scratch_len];
    let last = dims.len() - 1;
    let mut tmp = Vec::new();
    for axis in 0..dims.len() {
        let n = dims[axis];
        if n == 1 {
            continue;
        }
        let plan = &plans[axis];
        if axis == last {
            plan.process_with_scratch(buf, &mut scratch);
            continue;
        }
        // lines along `axis` are strided; transpose each slab so they become
        // contiguous, transform, and transpose back
        let inner: usize = dims[axis + 1..].iter().product();
        tmp.resize(n * inner, Complex64::default());
        for slab in buf.chunks_exact_mut(n * inner) {
            for i in 0..n {
                for j in 0..inner {
                    tmp[j * n + i] = slab[i * inner + j];
                }
            }
            plan.process_with_scratch(&mut tmp, &mut scratch);
            for i in 0..n {
                for j in 0..inner {
                    slab[i * inner + j] = tmp[j * n + i];
                }
            }
        }
    }
}

fn crop(grid: &Grid, offset: &[usize], out_dims: &[usize]) -> Tensor {
    let strides = strides_for(&grid.dims);
    let last = out_dims.len() - 1;
    let w = out_dims[last];
    let mut out = Vec::with_capacity(out_dims.iter().product());
    let mut idx = vec![0usize; last];
    let rows: usize = out_dims[..last].iter().product();
    for _ in 0..rows {
        let base: usize = (0..last).map(|a| (idx[a] + offset[a]) * strides[a]).sum::<usize>() + offset[last];
        out.extend_from_slice(&grid.data[base..base + w]);
        advance(&mut idx, &out_dims[..last]);
    }
    Tensor::new(out_dims.to_vec(), out).expect("crop extents are valid")
}
