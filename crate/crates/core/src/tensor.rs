//! Dense single-image tensors.
//!
//! [`Tensor`] is a `C×H×W` array stored row-major with index `(c, h, w)`.
//! [`Matrix`] is the token view `T×C` used by the attention blocks, where
//! `T = H·W` and tokens are ordered row-major over the spatial grid.

use crate::error::{shape_err, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Tensor {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        assert!(
            channels >= 1 && height >= 1 && width >= 1,
            "tensor dims must be >= 1, got {channels}x{height}x{width}"
        );
        Self {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f32) -> Self {
        let mut t = Self::zeros(channels, height, width);
        t.data.fill(value);
        t
    }

    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return shape_err(format!(
                "tensor dims must be >= 1, got {channels}x{height}x{width}"
            ));
        }
        if data.len() != channels * height * width {
            return shape_err(format!(
                "data length {} does not match {channels}x{height}x{width}",
                data.len()
            ));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Self {
        let mut t = Self::zeros(channels, height, width);
        for c in 0..channels {
            for h in 0..height {
                for w in 0..width {
                    t.data[(c * height + h) * width + w] = f(c, h, w);
                }
            }
        }
        t
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// `(channels, height, width)`
    #[inline]
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    pub fn index(&self, c: usize, h: usize, w: usize) -> usize {
        (c * self.height + h) * self.width + w
    }

    #[inline]
    pub fn get(&self, c: usize, h: usize, w: usize) -> f32 {
        self.data[self.index(c, h, w)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, h: usize, w: usize, v: f32) {
        let i = self.index(c, h, w);
        self.data[i] = v;
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f32] {
        let n = self.plane_len();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Self {
        Self {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    pub fn max_abs(&self) -> f32 {
        self.data.iter().fold(0.0f32, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Channels `[start, end)` as a new tensor.
    pub fn slice_channels(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.channels {
            return shape_err(format!(
                "channel slice {start}..{end} out of range for {} channels",
                self.channels
            ));
        }
        let n = self.plane_len();
        Tensor::from_vec(
            end - start,
            self.height,
            self.width,
            self.data[start * n..end * n].to_vec(),
        )
    }

    /// Overwrites channels starting at `start` with `src`.
    pub fn write_channels(&mut self, start: usize, src: &Tensor) -> Result<()> {
        if src.height != self.height || src.width != self.width {
            return shape_err("spatial dims differ in write_channels");
        }
        if start + src.channels > self.channels {
            return shape_err("write_channels exceeds channel count");
        }
        let n = self.plane_len();
        self.data[start * n..(start + src.channels) * n].copy_from_slice(&src.data);
        Ok(())
    }

    /// Channel-wise concatenation of tensors sharing spatial dims.
    pub fn concat(parts: &[&Tensor]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Shape("concat of zero tensors".into()))?;
        let (h, w) = (first.height, first.width);
        let mut data = Vec::new();
        let mut channels = 0;
        for p in parts {
            if p.height != h || p.width != w {
                return shape_err(format!(
                    "concat spatial mismatch: {}x{} vs {}x{}",
                    p.height, p.width, h, w
                ));
            }
            channels += p.channels;
            data.extend_from_slice(&p.data);
        }
        Tensor::from_vec(channels, h, w, data)
    }

    /// Elementwise sum; shapes must match.
    pub fn add(&self, other: &Tensor) -> Result<Self> {
        if self.shape() != other.shape() {
            return shape_err(format!(
                "add shape mismatch {:?} vs {:?}",
                self.shape(),
                other.shape()
            ));
        }
        Ok(Self {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
            ..*self
        })
    }

    /// `(H·W)×C` token view.
    pub fn to_tokens(&self) -> Matrix {
        let t = self.plane_len();
        let c = self.channels;
        let mut data = vec![0.0f32; t * c];
        for ch in 0..c {
            let plane = self.plane(ch);
            for (i, &v) in plane.iter().enumerate() {
                data[i * c + ch] = v;
            }
        }
        Matrix {
            rows: t,
            cols: c,
            data,
        }
    }

    /// Inverse of [`Tensor::to_tokens`].
    pub fn from_tokens(m: &Matrix, height: usize, width: usize) -> Result<Self> {
        if m.rows != height * width {
            return shape_err(format!(
                "{} tokens cannot fill a {height}x{width} grid",
                m.rows
            ));
        }
        let c = m.cols;
        let mut t = Tensor::zeros(c, height, width);
        let n = height * width;
        for i in 0..n {
            let row = m.row(i);
            for ch in 0..c {
                t.data[ch * n + i] = row[ch];
            }
        }
        Ok(t)
    }
}

/// Row-major `rows×cols` matrix of tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return shape_err(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            ));
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f32] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f32 {
        self.data[r * self.cols + c]
    }

    pub fn add_assign(&mut self, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return shape_err("matrix add shape mismatch");
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }
}
