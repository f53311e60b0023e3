//! Brightness derivatives of a frame pair and the radial gradient.

use crate::conv::{xcorr_direct, BoundaryPolicy, ConvShape};
use crate::error::{Error, Result};
use crate::tensor::{Image, Tensor};

/// 2x2x2 first-difference masks over `[t, y, x]`, each averaging the four
/// parallel edges of the cube so Ex, Ey and Et share one sample point.
fn cube_mask(axis: usize) -> Tensor {
    Tensor::from_fn(&[2, 2, 2], |i| if i[axis] == 1 { 0.25 } else { -0.25 }).unwrap()
}

/// `(ex, ey, et)`, each `(h - 1) x (w - 1)`, sampled at the centre of every
/// 2x2x2 cube spanning the two frames.
pub fn derivatives_3d(e0: &Image, e1: &Image) -> Result<(Image, Image, Image)> {
    if e0.dims() != e1.dims() {
        return Err(Error::Shape(format!("frame extents differ: {:?} vs {:?}", e0.dims(), e1.dims())));
    }
    if e0.ndim() != 2 || e0.height() < 2 || e0.width() < 2 {
        return Err(Error::Shape(format!("frames must be 2-D and at least 2x2, got {:?}", e0.dims())));
    }
    let stack = Tensor::stack(&[e0, e1])?;
    let plane = [e0.height() - 1, e0.width() - 1];
    let along = |axis| -> Result<Image> {
        xcorr_direct(&stack, &cube_mask(axis), ConvShape::Valid, BoundaryPolicy::Zero)?.reshape(plane.to_vec())
    };
    // Same stencil as cube_mask(0), applied to the exact frame difference so
    // that a static scene gives et == 0 without rounding residue.
    let diff = Tensor::new(e0.dims().to_vec(), e1.data().iter().zip(e0.data()).map(|(b, a)| b - a).collect())?;
    let quarter_box = Tensor::filled(&[2, 2], 0.25)?;
    let et = xcorr_direct(&diff, &quarter_box, ConvShape::Valid, BoundaryPolicy::Zero)?;
    Ok((along(2)?, along(1)?, et))
}

/// Pixel coordinates relative to the field centre `((w-1)/2, (h-1)/2)`.
#[inline]
pub(crate) fn centred(x: usize, y: usize, w: usize, h: usize) -> (f64, f64) {
    (x as f64 - (w as f64 - 1.0) / 2.0, y as f64 - (h as f64 - 1.0) / 2.0)
}

/// `G = x ex + y ey` with centre-origin coordinates, x right and y down.
pub fn radial_gradient(ex: &Image, ey: &Image) -> Result<Image> {
    if ex.dims() != ey.dims() || ex.ndim() != 2 {
        return Err(Error::Shape(format!("ex {:?} and ey {:?} must be equal 2-D extents", ex.dims(), ey.dims())));
    }
    let (h, w) = (ex.height(), ex.width());
    Tensor::from_fn(&[h, w], |i| {
        let (xc, yc) = centred(i[1], i[0], w, h);
        xc * ex.at(i[0], i[1]) + yc * ey.at(i[0], i[1])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(h: usize, w: usize, f: impl Fn(usize, usize) -> f64) -> Image {
        Tensor::from_fn(&[h, w], |i| f(i[0], i[1])).unwrap()
    }

    #[test]
    fn constant_frames() {
        let e = img(5, 6, |_, _| 0.3);
        let (ex, ey, et) = derivatives_3d(&e, &e).unwrap();
        assert_eq!(ex.dims(), &[4, 5]);
        for t in [&ex, &ey, &et] {
            assert_eq!(t.max_abs(), 0.0);
        }
    }

    #[test]
    fn temporal_step() {
        let (ex, ey, et) = derivatives_3d(&img(4, 4, |_, _| 0.0), &img(4, 4, |_, _| 1.0)).unwrap();
        assert!(et.data().iter().all(|&v| v == 1.0));
        assert_eq!(ex.max_abs() + ey.max_abs(), 0.0);
    }

    #[test]
    fn horizontal_ramp() {
        let e = img(5, 7, |_, x| x as f64);
        let (ex, ey, et) = derivatives_3d(&e, &e).unwrap();
        assert!(ex.data().iter().all(|&v| v == 1.0));
        assert_eq!(ey.max_abs() + et.max_abs(), 0.0);
        let e = img(5, 7, |y, _| 2.0 * y as f64);
        let (ex, ey, _) = derivatives_3d(&e, &e).unwrap();
        assert!(ey.data().iter().all(|&v| v == 2.0));
        assert_eq!(ex.max_abs(), 0.0);
    }

    #[test]
    fn mismatched_frames() {
        assert!(derivatives_3d(&img(4, 4, |_, _| 0.0), &img(4, 5, |_, _| 0.0)).is_err());
        assert!(derivatives_3d(&img(1, 4, |_, _| 0.0), &img(1, 4, |_, _| 0.0)).is_err());
    }

    #[test]
    fn radial_gradient_basics() {
        let ex = img(5, 5, |y, x| (x * 3 + y) as f64);
        let ey = img(5, 5, |y, x| (x + y * 7) as f64);
        let g = radial_gradient(&ex, &ey).unwrap();
        assert_eq!(g.at(2, 2), 0.0);

        let ones = img(4, 6, |_, _| 1.0);
        let zeros = img(4, 6, |_, _| 0.0);
        let g = radial_gradient(&ones, &zeros).unwrap();
        for x in 0..6 {
            assert_eq!(g.at(1, x), x as f64 - 2.5);
        }
        assert!(radial_gradient(&ones, &ex).is_err());
    }
}
