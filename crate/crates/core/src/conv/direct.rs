//! Direct summation over a pre-padded signal.
//!
//! Every public mode reduces to a VALID cross-correlation of the padded input
//! region with a (possibly reflected) kernel. The innermost loop is an
//! `out_row += w * in_row` update over the last axis, which walks both rows in
//! memory order through iterators so no bounds checks survive in the loop.

use crate::tensor::{advance, strides_for, Tensor};

/// `out[o] = sum_j kernel[j] * input[o + j]` for every `o` in `out_dims`.
///
/// `input` is row-major with extents `in_dims == out_dims + kernel_dims - 1`.
pub(crate) fn valid_xcorr(input: &[f64], in_dims: &[usize], kernel: &Tensor, out_dims: &[usize]) -> Tensor {
    debug_assert_eq!(input.len(), in_dims.iter().product::<usize>());
    let mut out = vec![0.0; out_dims.iter().product()];
    match in_dims.len() {
        1 => rank1(input, kernel.data(), &mut out),
        2 => rank2(input, in_dims, kernel, out_dims, &mut out),
        3 => rank3(input, in_dims, kernel, out_dims, &mut out),
        _ => rank_n(input, in_dims, kernel, out_dims, &mut out),
    }
    Tensor::new(out_dims.to_vec(), out).expect("output extents are valid")
}

#[inline(always)]
fn axpy_row(out: &mut [f64], input: &[f64], weights: &[f64]) {
    let len = out.len();
    for (j, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(&input[j..j + len]) {
            *o += w * x;
        }
    }
}

fn rank1(input: &[f64], kernel: &[f64], out: &mut [f64]) {
    axpy_row(out, input, kernel);
}

fn rank2(input: &[f64], in_dims: &[usize], kernel: &Tensor, out_dims: &[usize], out: &mut [f64]) {
    let (in_w, out_w) = (in_dims[1], out_dims[1]);
    let (kh, kw) = (kernel.dims()[0], kernel.dims()[1]);
    let k = kernel.data();
    for (oy, out_row) in out.chunks_exact_mut(out_w).enumerate() {
        for ky in 0..kh {
            let y = oy + ky;
            axpy_row(out_row, &input[y * in_w..(y + 1) * in_w], &k[ky * kw..(ky + 1) * kw]);
        }
    }
}

fn rank3(input: &[f64], in_dims: &[usize], kernel: &Tensor, out_dims: &[usize], out: &mut [f64]) {
    let (in_h, in_w) = (in_dims[1], in_dims[2]);
    let (out_h, out_w) = (out_dims[1], out_dims[2]);
    let (kd, kh, kw) = (kernel.dims()[0], kernel.dims()[1], kernel.dims()[2]);
    let k = kernel.data();
    for (oz, out_plane) in out.chunks_exact_mut(out_h * out_w).enumerate() {
        for (oy, out_row) in out_plane.chunks_exact_mut(out_w).enumerate() {
            for kz in 0..kd {
                for ky in 0..kh {
                    let row = ((oz + kz) * in_h + oy + ky) * in_w;
                    let krow = (kz * kh + ky) * kw;
                    axpy_row(out_row, &input[row..row + in_w], &k[krow..krow + kw]);
                }
            }
        }
    }
}

/// Arbitrary rank: odometer walk over every axis except the last.
fn rank_n(input: &[f64], in_dims: &[usize], kernel: &Tensor, out_dims: &[usize], out: &mut [f64]) {
    let last = in_dims.len() - 1;
    let in_strides = strides_for(in_dims);
    let kdims = &kernel.dims()[..last];
    let kw = kernel.dims()[last];
    let k = kernel.data();
    let in_w = in_dims[last];
    let mut oidx = vec![0usize; last];
    for out_row in out.chunks_exact_mut(out_dims[last]) {
        let mut kidx = vec![0usize; last];
        for krow in k.chunks_exact(kw) {
            let base: usize = (0..last).map(|a| (oidx[a] + kidx[a]) * in_strides[a]).sum();
            axpy_row(out_row, &input[base..base + in_w], krow);
            advance(&mut kidx, kdims);
        }
        advance(&mut oidx, &out_dims[..last]);
    }
}
