//! Edge-detection kernels and gradient fields.
//!
//! Kernels are applied by cross-correlation ([`xcorr_direct`]), not
//! convolution: `ex` at a pixel is the kernel laid over the image as printed,
//! so Sobel's `kx` gives a positive response where brightness increases to
//! the right. `y` grows downward.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::conv::{xcorr_direct, BoundaryPolicy, ConvShape};
use crate::error::{Error, Result};
use crate::tensor::{Image, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelName {
    Roberts,
    Prewitt2,
    Prewitt3,
    Sobel,
}

impl KernelName {
    pub const ALL: [KernelName; 4] =
        [KernelName::Roberts, KernelName::Prewitt2, KernelName::Prewitt3, KernelName::Sobel];
}

impl FromStr for KernelName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "roberts" => Ok(KernelName::Roberts),
            "prewitt2" => Ok(KernelName::Prewitt2),
            "prewitt3" => Ok(KernelName::Prewitt3),
            "sobel" => Ok(KernelName::Sobel),
            _ => Err(Error::UnknownKernel(s.to_string())),
        }
    }
}

impl fmt::Display for KernelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelName::Roberts => "roberts",
            KernelName::Prewitt2 => "prewitt2",
            KernelName::Prewitt3 => "prewitt3",
            KernelName::Sobel => "sobel",
        })
    }
}

/// A pair of derivative masks, `[row][col]` layout.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedKernel {
    pub name: KernelName,
    pub kx: Tensor,
    pub ky: Tensor,
}

fn mask(rows: &[&[f64]]) -> Tensor {
    Tensor::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).expect("static mask")
}

pub fn kernel_lookup(name: KernelName) -> NamedKernel {
    let (kx, ky) = match name {
        // diagonal differences; the pair is not a transpose of each other
        KernelName::Roberts => (mask(&[&[1.0, 0.0], &[0.0, -1.0]]), mask(&[&[0.0, 1.0], &[-1.0, 0.0]])),
        KernelName::Prewitt2 => {
            let kx = mask(&[&[-0.5, 0.5], &[-0.5, 0.5]]);
            let ky = kx.transpose().unwrap();
            (kx, ky)
        }
        KernelName::Prewitt3 => {
            let kx = mask(&[&[-1.0, 0.0, 1.0], &[-1.0, 0.0, 1.0], &[-1.0, 0.0, 1.0]]);
            let ky = kx.transpose().unwrap();
            (kx, ky)
        }
        KernelName::Sobel => {
            let kx = mask(&[&[-1.0, 0.0, 1.0], &[-2.0, 0.0, 2.0], &[-1.0, 0.0, 1.0]]);
            let ky = kx.transpose().unwrap();
            (kx, ky)
        }
    };
    NamedKernel { name, kx, ky }
}

/// Looks a kernel up by its lowercase name.
pub fn kernel_by_name(name: &str) -> Result<NamedKernel> {
    name.parse().map(kernel_lookup)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    pub ex: Image,
    pub ey: Image,
    pub mag: Image,
    /// Radians in `[-pi, pi]`.
    pub dir: Image,
}

/// Gradient magnitude.
pub fn magnitude(ex: f64, ey: f64) -> f64 {
    ex.hypot(ey)
}

/// Four-quadrant direction with `direction(0, 0) == 0`.
pub fn direction(ex: f64, ey: f64) -> f64 {
    if ex == 0.0 && ey == 0.0 {
        0.0
    } else {
        ey.atan2(ex).clamp(-PI, PI)
    }
}

pub fn gradient(img: &Image, kernel: &NamedKernel) -> Result<GradientField> {
    if img.ndim() != 2 {
        return Err(Error::Shape(format!("gradient needs a 2-D image, got dims {:?}", img.dims())));
    }
    let (kh, kw) = (kernel.kx.height(), kernel.kx.width());
    if img.height() < kh.max(2) || img.width() < kw.max(2) {
        return Err(Error::Shape(format!(
            "image {}x{} is smaller than the {}x{} {} kernel",
            img.width(),
            img.height(),
            kw,
            kh,
            kernel.name
        )));
    }
    // every mask sums to zero, so a brightness offset does not change the
    // result; removing one makes flat regions come out exactly zero
    let base = img.data()[0];
    let shifted = img.map(|v| v - base);
    let ex = xcorr_direct(&shifted, &kernel.kx, ConvShape::Same, BoundaryPolicy::Replicate)?;
    let ey = xcorr_direct(&shifted, &kernel.ky, ConvShape::Same, BoundaryPolicy::Replicate)?;
    let mag =
        Tensor::new(ex.dims().to_vec(), ex.data().iter().zip(ey.data()).map(|(&x, &y)| magnitude(x, y)).collect())?;
    let dir =
        Tensor::new(ex.dims().to_vec(), ex.data().iter().zip(ey.data()).map(|(&x, &y)| direction(x, y)).collect())?;
    Ok(GradientField { ex, ey, mag, dir })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sums(t: &Tensor) -> (Vec<f64>, Vec<f64>) {
        let rows = (0..t.height()).map(|y| (0..t.width()).map(|x| t.at(y, x)).sum()).collect();
        let cols = (0..t.width()).map(|x| (0..t.height()).map(|y| t.at(y, x)).sum()).collect();
        (rows, cols)
    }

    #[test]
    fn sobel_weights() {
        let k = kernel_lookup(KernelName::Sobel);
        let (rows, cols) = sums(&k.kx);
        assert_eq!(rows, vec![0.0, 0.0, 0.0]);
        assert_eq!(cols, vec![-4.0, 0.0, 4.0]);
    }

    #[test]
    fn zero_sum_and_transpose() {
        for name in KernelName::ALL {
            let k = kernel_lookup(name);
            assert_eq!(k.kx.data().iter().sum::<f64>(), 0.0, "{name}");
            assert_eq!(k.ky.data().iter().sum::<f64>(), 0.0, "{name}");
            if name != KernelName::Roberts {
                assert_eq!(k.ky, k.kx.transpose().unwrap(), "{name}");
            }
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(kernel_by_name("canny"), Err(Error::UnknownKernel(_))));
        assert_eq!(kernel_by_name("SOBEL").unwrap().name, KernelName::Sobel);
    }

    fn interior_max(t: &Tensor) -> f64 {
        (1..t.height()).flat_map(|y| (1..t.width()).map(move |x| (y, x))).fold(0.0, |m, (y, x)| m.max(t.at(y, x).abs()))
    }

    #[test]
    fn roberts_diagonal_response() {
        let roberts = kernel_lookup(KernelName::Roberts);
        // step along the main diagonal: only the anti-diagonal mask responds
        let img = Tensor::from_fn(&[6, 6], |i| if i[0] > i[1] { 1.0 } else { 0.0 }).unwrap();
        let g = gradient(&img, &roberts).unwrap();
        assert_eq!(interior_max(&g.ex), 0.0);
        assert_eq!(interior_max(&g.ey), 1.0);
        // step along the anti-diagonal: the other way round
        let img = Tensor::from_fn(&[6, 6], |i| if i[0] + i[1] > 5 { 1.0 } else { 0.0 }).unwrap();
        let g = gradient(&img, &roberts).unwrap();
        assert_eq!(interior_max(&g.ey), 0.0);
        assert_eq!(interior_max(&g.ex), 1.0);
        // a vertical step excites both diagonals equally
        let img = Tensor::from_fn(&[6, 6], |i| if i[1] > 2 { 1.0 } else { 0.0 }).unwrap();
        let g = gradient(&img, &roberts).unwrap();
        assert_eq!(g.ex.max_abs(), 1.0);
        assert_eq!(g.ey.max_abs(), 1.0);
    }

    #[test]
    fn sobel_vertical_step() {
        let img = Tensor::from_fn(&[5, 4], |i| if i[1] >= 2 { 1.0 } else { 0.0 }).unwrap();
        let g = gradient(&img, &kernel_lookup(KernelName::Sobel)).unwrap();
        for y in 0..5 {
            assert_eq!(g.ex.at(y, 1), 4.0);
            assert_eq!(g.ex.at(y, 2), 4.0);
            for x in 0..4 {
                assert_eq!(g.ey.at(y, x), 0.0);
            }
        }
    }

    #[test]
    fn magnitude_and_direction() {
        assert_eq!(magnitude(3.0, 4.0), 5.0);
        assert_eq!(direction(0.0, 1.0), PI / 2.0);
        assert_eq!(direction(0.0, 0.0), 0.0);
        assert_eq!(direction(-0.0, -0.0), 0.0);
        assert_eq!(direction(-1.0, 0.0), PI);
    }

    #[test]
    fn undersized_image() {
        let img = Tensor::zeros(&[2, 5]).unwrap();
        assert!(matches!(gradient(&img, &kernel_lookup(KernelName::Sobel)), Err(Error::Shape(_))));
        assert!(gradient(&img, &kernel_lookup(KernelName::Prewitt2)).is_ok());
        assert!(gradient(&Tensor::zeros(&[1, 5]).unwrap(), &kernel_lookup(KernelName::Roberts)).is_err());
    }
}
