use crate::conv::{xcorr_direct, BoundaryPolicy, ConvShape};
use crate::error::{Error, Result};
use crate::tensor::{Image, Tensor};

/// 3x3 binomial low-pass, `[1 2 1]^T [1 2 1] / 16`.
pub fn binomial3() -> Tensor {
    const W: [f64; 3] = [1.0, 2.0, 1.0];
    Tensor::from_fn(&[3, 3], |i| W[i[0]] * W[i[1]] / 16.0).unwrap()
}

/// Binomial smoothing (replicate boundary) followed by 2x2 block averaging.
/// Output extents are `floor(h / 2) x floor(w / 2)`.
pub fn downsample(img: &Image) -> Result<Image> {
    if img.ndim() != 2 || img.height() < 2 || img.width() < 2 {
        return Err(Error::Shape(format!("downsample needs a 2-D image of at least 2x2, got {:?}", img.dims())));
    }
    let smooth = xcorr_direct(img, &binomial3(), ConvShape::Same, BoundaryPolicy::Replicate)?;
    let (h, w) = (img.height() / 2, img.width() / 2);
    Tensor::from_fn(&[h, w], |i| {
        let (y, x) = (2 * i[0], 2 * i[1]);
        0.25 * (smooth.at(y, x) + smooth.at(y, x + 1) + smooth.at(y + 1, x) + smooth.at(y + 1, x + 1))
    })
}
