//! Dense row-major n-dimensional arrays of `f64`.
//!
//! Dims are stored outermost first and the last index varies fastest. A video
//! stack is a 3-D tensor `[frames, height, width]`; a grayscale image is a 2-D
//! tensor `[height, width]` addressed as `(y, x)`.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

/// Row-major strides for `dims`.
pub fn strides_for(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}

fn checked_len(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidDimension { dims: vec![], reason: "at least one axis is required" });
    }
    let as_i64 = || dims.iter().map(|&d| d as i64).collect::<Vec<_>>();
    if dims.contains(&0) {
        return Err(Error::InvalidDimension { dims: as_i64(), reason: "every extent must be >= 1" });
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::InvalidDimension { dims: as_i64(), reason: "element count overflows" })
}

impl Tensor {
    /// Builds a tensor from its extents and a row-major payload.
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = checked_len(&dims)?;
        if data.len() != len {
            return Err(Error::Shape(format!("dims {dims:?} need {len} elements, got {}", data.len())));
        }
        Ok(Tensor { dims, data })
    }

    pub fn filled(dims: &[usize], fill: f64) -> Result<Self> {
        let len = checked_len(dims)?;
        Ok(Tensor { dims: dims.to_vec(), data: vec![fill; len] })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        Self::filled(dims, 0.0)
    }

    /// Signed-extent constructor used by external callers that cannot
    /// express `usize` (the C API, config-driven tooling).
    pub fn create(dims: &[i64], fill: f64) -> Result<Self> {
        if dims.iter().any(|&d| d < 1) {
            return Err(Error::InvalidDimension { dims: dims.to_vec(), reason: "every extent must be >= 1" });
        }
        let dims: Vec<usize> =
            dims.iter().map(|&d| usize::try_from(d)).collect::<std::result::Result<_, _>>().map_err(|_| {
                Error::InvalidDimension { dims: dims.to_vec(), reason: "extent does not fit in memory" }
            })?;
        Self::filled(&dims, fill)
    }

    /// Evaluates `f` at every multi-index, in memory order.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = checked_len(dims)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..len {
            data.push(f(&idx));
            advance(&mut idx, dims);
        }
        Ok(Tensor { dims: dims.to_vec(), data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let h = rows.len();
        let w = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != w) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(vec![h, w], rows.concat())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_for(&self.dims)
    }

    /// Flat offset of a multi-index, or `None` if it is out of range.
    pub fn offset(&self, idx: &[usize]) -> Option<usize> {
        if idx.len() != self.dims.len() {
            return None;
        }
        let mut off = 0;
        for (&i, &d) in idx.iter().zip(&self.dims) {
            if i >= d {
                return None;
            }
            off = off * d + i;
        }
        Some(off)
    }

    pub fn get(&self, idx: &[usize]) -> Option<f64> {
        self.offset(idx).map(|o| self.data[o])
    }

    /// Multi-index of a flat offset.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            idx[k] = flat % self.dims[k];
            flat /= self.dims[k];
        }
        idx
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor { dims: self.dims.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Same payload, new extents.
    pub fn reshape(self, dims: Vec<usize>) -> Result<Tensor> {
        Tensor::new(dims, self.data)
    }

    /// Reverses every axis.
    pub fn reflect(&self) -> Tensor {
        let mut data = self.data.clone();
        data.reverse();
        Tensor { dims: self.dims.clone(), data }
    }

    /// Plane `i` of the outermost axis, as a tensor of rank `ndim - 1`.
    pub fn plane(&self, i: usize) -> Result<Tensor> {
        if self.ndim() < 2 {
            return Err(Error::Shape("plane() needs a tensor of rank >= 2".into()));
        }
        if i >= self.dims[0] {
            return Err(Error::Shape(format!("plane {i} out of range 0..{}", self.dims[0])));
        }
        let step = self.len() / self.dims[0];
        Ok(Tensor { dims: self.dims[1..].to_vec(), data: self.data[i * step..(i + 1) * step].to_vec() })
    }

    pub fn num_planes(&self) -> usize {
        self.dims[0]
    }

    /// Stacks equally-shaped tensors along a new outermost axis.
    pub fn stack(planes: &[&Tensor]) -> Result<Tensor> {
        let first = planes.first().ok_or_else(|| Error::Shape("cannot stack zero planes".into()))?;
        if planes.iter().any(|p| p.dims != first.dims) {
            return Err(Error::Shape("stacked planes must share extents".into()));
        }
        let mut dims = vec![planes.len()];
        dims.extend_from_slice(&first.dims);
        let data = planes.iter().flat_map(|p| p.data.iter().copied()).collect();
        Tensor::new(dims, data)
    }

    // 2-D helpers. Images are [height, width].

    pub fn height(&self) -> usize {
        self.dims[0]
    }

    pub fn width(&self) -> usize {
        self.dims[self.ndim() - 1]
    }

    #[inline]
    pub fn at(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.width() + x]
    }

    pub fn transpose(&self) -> Result<Tensor> {
        if self.ndim() != 2 {
            return Err(Error::Shape("transpose needs a 2-D tensor".into()));
        }
        let (h, w) = (self.height(), self.width());
        Tensor::from_fn(&[w, h], |i| self.data[i[1] * w + i[0]])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        assert_eq!(self.dims, other.dims, "extent mismatch");
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Row-major odometer step. Wraps to all zeros after the last index.
#[inline]
pub(crate) fn advance(idx: &mut [usize], dims: &[usize]) {
    for k in (0..dims.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return;
        }
        idx[k] = 0;
    }
}

/// A 2-D tensor.
pub type Image = Tensor;
