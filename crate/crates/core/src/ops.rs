//! Deterministic inference kernels.
//!
//! Reductions inside convolutions and linear maps accumulate in `f64` and
//! are stored as `f32`. Every output element is reduced in a fixed order, so
//! results are bit-identical across runs.

use crate::error::{shape_err, Result};
use crate::tensor::{Matrix, Tensor};

/// Convolution weights laid out `(out, in, kh, kw)`.
///
/// The same layout is used for transposed convolutions: `weights[o][i]` is
/// the kernel that carries input channel `i` into output channel `o`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel {
    out_channels: usize,
    in_channels: usize,
    k: usize,
    stride: usize,
    weights: Vec<f32>,
    bias: Vec<f32>,
}

impl ConvKernel {
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        k: usize,
        stride: usize,
        weights: Vec<f32>,
        bias: Vec<f32>,
    ) -> Result<Self> {
        if ![1, 3, 5].contains(&k) {
            return shape_err(format!("kernel size {k} not in {{1, 3, 5}}"));
        }
        if ![1, 2].contains(&stride) {
            return shape_err(format!("stride {stride} not in {{1, 2}}"));
        }
        if out_channels == 0 || in_channels == 0 {
            return shape_err("kernel channel counts must be >= 1");
        }
        if weights.len() != out_channels * in_channels * k * k {
            return shape_err(format!(
                "kernel weights have {} values, expected {}x{}x{}x{}",
                weights.len(),
                out_channels,
                in_channels,
                k,
                k
            ));
        }
        if bias.len() != out_channels {
            return shape_err(format!(
                "kernel bias has {} values, expected {out_channels}",
                bias.len()
            ));
        }
        Ok(Self {
            out_channels,
            in_channels,
            k,
            stride,
            weights,
            bias,
        })
    }

    pub fn zeros(out_channels: usize, in_channels: usize, k: usize, stride: usize) -> Result<Self> {
        Self::new(
            out_channels,
            in_channels,
            k,
            stride,
            vec![0.0; out_channels * in_channels * k * k],
            vec![0.0; out_channels],
        )
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn kernel_size(&self) -> usize {
        self.k
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn padding(&self) -> usize {
        (self.k - 1) / 2
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f32] {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f32] {
        &mut self.bias
    }

    #[inline]
    fn w(&self, o: usize, i: usize, kh: usize, kw: usize) -> f32 {
        self.weights[((o * self.in_channels + i) * self.k + kh) * self.k + kw]
    }

    /// Output `(height, width)` of [`conv2d`] for an input of the given size.
    pub fn conv_output_dims(&self, height: usize, width: usize) -> (usize, usize) {
        let p = self.padding();
        let f = |d: usize| (d + 2 * p - self.k) / self.stride + 1;
        (f(height), f(width))
    }

    /// Output `(height, width)` of [`tconv2d`]; output padding is `stride − 1`.
    pub fn tconv_output_dims(&self, height: usize, width: usize) -> (usize, usize) {
        let p = self.padding();
        let op = self.stride - 1;
        let f = |d: usize| (d - 1) * self.stride + self.k + op - 2 * p;
        (f(height), f(width))
    }
}

/// Zero-padded 2-D convolution.
pub fn conv2d(x: &Tensor, kernel: &ConvKernel) -> Result<Tensor> {
    if x.channels() != kernel.in_channels {
        return shape_err(format!(
            "conv2d expects {} input channels, got {}",
            kernel.in_channels,
            x.channels()
        ));
    }
    let (h, w) = (x.height(), x.width());
    if h + 2 * kernel.padding() < kernel.k || w + 2 * kernel.padding() < kernel.k {
        return shape_err("conv2d input smaller than kernel");
    }
    let (oh, ow) = kernel.conv_output_dims(h, w);
    let s = kernel.stride;
    let p = kernel.padding() as isize;
    let mut out = Tensor::zeros(kernel.out_channels, oh, ow);
    let mut acc = vec![0.0f64; oh * ow];

    // valid output range for a kernel tap at offset `kk` along a dim of size `d`
    let valid = |kk: usize, d: usize, od: usize| -> (usize, usize) {
        let off = kk as isize - p;
        // need 0 <= o*s + off < d
        let lo = if off >= 0 {
            0
        } else {
            ((-off) as usize).div_ceil(s)
        };
        let hi_excl = {
            let lim = d as isize - off; // o*s < lim
            if lim <= 0 {
                0
            } else {
                ((lim as usize).div_ceil(s)).min(od)
            }
        };
        (lo, hi_excl.max(lo))
    };

    for o in 0..kernel.out_channels {
        acc.fill(kernel.bias[o] as f64);
        for i in 0..kernel.in_channels {
            let plane = x.plane(i);
            for kh in 0..kernel.k {
                let (y0, y1) = valid(kh, h, oh);
                for kw in 0..kernel.k {
                    let wv = kernel.w(o, i, kh, kw) as f64;
                    if wv == 0.0 {
                        continue;
                    }
                    let (x0, x1) = valid(kw, w, ow);
                    for oy in y0..y1 {
                        let iy = (oy * s) as isize + kh as isize - p;
                        let row = &plane[iy as usize * w..(iy as usize + 1) * w];
                        let arow = &mut acc[oy * ow..(oy + 1) * ow];
                        for ox in x0..x1 {
                            let ix = ((ox * s) as isize + kw as isize - p) as usize;
                            arow[ox] += wv * row[ix] as f64;
                        }
                    }
                }
            }
        }
        for (dst, &a) in out.plane_mut(o).iter_mut().zip(&acc) {
            *dst = a as f32;
        }
    }
    Ok(out)
}

/// Transposed convolution with output padding `stride − 1`, so a stride-2
/// layer exactly doubles each spatial dim.
pub fn tconv2d(x: &Tensor, kernel: &ConvKernel) -> Result<Tensor> {
    if x.channels() != kernel.in_channels {
        return shape_err(format!(
            "tconv2d expects {} input channels, got {}",
            kernel.in_channels,
            x.channels()
        ));
    }
    let (h, w) = (x.height(), x.width());
    let (oh, ow) = kernel.tconv_output_dims(h, w);
    let s = kernel.stride;
    let p = kernel.padding() as isize;
    let mut out = Tensor::zeros(kernel.out_channels, oh, ow);
    let mut acc = vec![0.0f64; oh * ow];

    for o in 0..kernel.out_channels {
        acc.fill(kernel.bias[o] as f64);
        for i in 0..kernel.in_channels {
            let plane = x.plane(i);
            for kh in 0..kernel.k {
                for kw in 0..kernel.k {
                    let wv = kernel.w(o, i, kh, kw) as f64;
                    if wv == 0.0 {
                        continue;
                    }
                    for iy in 0..h {
                        let y = (iy * s) as isize - p + kh as isize;
                        if y < 0 || y >= oh as isize {
                            continue;
                        }
                        let arow = &mut acc[y as usize * ow..(y as usize + 1) * ow];
                        let row = &plane[iy * w..(iy + 1) * w];
                        for (ix, &v) in row.iter().enumerate() {
                            let xo = (ix * s) as isize - p + kw as isize;
                            if xo < 0 || xo >= ow as isize {
                                continue;
                            }
                            arow[xo as usize] += wv * v as f64;
                        }
                    }
                }
            }
        }
        for (dst, &a) in out.plane_mut(o).iter_mut().zip(&acc) {
            *dst = a as f32;
        }
    }
    Ok(out)
}

pub const LAYER_NORM_EPS: f32 = 1e-6;

/// Per-token layer normalization over the channel axis.
pub fn layer_norm(tokens: &Matrix, gamma: &[f32], beta: &[f32], eps: f32) -> Result<Matrix> {
    let c = tokens.cols();
    if gamma.len() != c || beta.len() != c {
        return shape_err(format!(
            "layer_norm affine has {}/{} values for {c} channels",
            gamma.len(),
            beta.len()
        ));
    }
    let mut out = Matrix::zeros(tokens.rows(), c);
    for r in 0..tokens.rows() {
        let row = tokens.row(r);
        let mean = row.iter().map(|&v| v as f64).sum::<f64>() / c as f64;
        let var = row
            .iter()
            .map(|&v| {
                let d = v as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / c as f64;
        let inv = 1.0 / (var + eps as f64).sqrt();
        for (j, dst) in out.row_mut(r).iter_mut().enumerate() {
            *dst = ((row[j] as f64 - mean) * inv * gamma[j] as f64 + beta[j] as f64) as f32;
        }
    }
    Ok(out)
}

/// Exact-erf GELU.
#[inline]
pub fn gelu(x: f32) -> f32 {
    let x = x as f64;
    (0.5 * x * (1.0 + libm::erf(x * std::f64::consts::FRAC_1_SQRT_2))) as f32
}

pub fn gelu_tensor(x: &Tensor) -> Tensor {
    x.map(gelu)
}

pub fn gelu_matrix(x: &Matrix) -> Matrix {
    let mut out = x.clone();
    for v in out.data_mut() {
        *v = gelu(*v);
    }
    out
}

/// Fully connected layer, weights `out×in` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    out_features: usize,
    in_features: usize,
    weight: Vec<f32>,
    bias: Vec<f32>,
}

impl Linear {
    pub fn new(
        out_features: usize,
        in_features: usize,
        weight: Vec<f32>,
        bias: Vec<f32>,
    ) -> Result<Self> {
        if weight.len() != out_features * in_features || bias.len() != out_features {
            return shape_err(format!(
                "linear {out_features}x{in_features} got {} weights, {} biases",
                weight.len(),
                bias.len()
            ));
        }
        Ok(Self {
            out_features,
            in_features,
            weight,
            bias,
        })
    }

    pub fn zeros(out_features: usize, in_features: usize) -> Self {
        Self {
            out_features,
            in_features,
            weight: vec![0.0; out_features * in_features],
            bias: vec![0.0; out_features],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut l = Self::zeros(n, n);
        for i in 0..n {
            l.weight[i * n + i] = 1.0;
        }
        l
    }

    pub fn out_features(&self) -> usize {
        self.out_features
    }

    pub fn in_features(&self) -> usize {
        self.in_features
    }

    pub fn weight(&self) -> &[f32] {
        &self.weight
    }

    pub fn weight_mut(&mut self) -> &mut [f32] {
        &mut self.weight
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f32] {
        &mut self.bias
    }
}

/// Dot product in `f64` with four fixed interleaved partial sums.
#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        s[0] += x[0] as f64 * y[0] as f64;
        s[1] += x[1] as f64 * y[1] as f64;
        s[2] += x[2] as f64 * y[2] as f64;
        s[3] += x[3] as f64 * y[3] as f64;
    }
    let mut tail = 0.0f64;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += *x as f64 * *y as f64;
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

/// Four [`dot`]s against a shared right-hand side, each summed in exactly
/// the same order as [`dot`].
#[inline]
fn dot4(a: [&[f32]; 4], b: &[f32]) -> [f64; 4] {
    let n = b.len();
    let full = n / 4 * 4;
    let mut s = [[0.0f64; 4]; 4];
    let mut i = 0;
    while i < full {
        let y = [b[i] as f64, b[i + 1] as f64, b[i + 2] as f64, b[i + 3] as f64];
        for (acc, x) in s.iter_mut().zip(&a) {
            acc[0] += x[i] as f64 * y[0];
            acc[1] += x[i + 1] as f64 * y[1];
            acc[2] += x[i + 2] as f64 * y[2];
            acc[3] += x[i + 3] as f64 * y[3];
        }
        i += 4;
    }
    let mut out = [0.0f64; 4];
    for (j, x) in a.iter().enumerate() {
        let mut tail = 0.0f64;
        for k in full..n {
            tail += x[k] as f64 * b[k] as f64;
        }
        let acc = s[j];
        out[j] = (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail;
    }
    out
}

pub fn linear(x: &Matrix, layer: &Linear) -> Result<Matrix> {
    if x.cols() != layer.in_features {
        return shape_err(format!(
            "linear expects {} input features, got {}",
            layer.in_features,
            x.cols()
        ));
    }
    let n = layer.in_features;
    let mut out = Matrix::zeros(x.rows(), layer.out_features);
    let blocked = x.rows() / 4 * 4;
    for r in (0..blocked).step_by(4) {
        let rows = [x.row(r), x.row(r + 1), x.row(r + 2), x.row(r + 3)];
        for o in 0..layer.out_features {
            let sums = dot4(rows, &layer.weight[o * n..(o + 1) * n]);
            for (j, s) in sums.iter().enumerate() {
                out.row_mut(r + j)[o] = (layer.bias[o] as f64 + s) as f32;
            }
        }
    }
    for r in blocked..x.rows() {
        let xr = x.row(r);
        let dst = out.row_mut(r);
        for (o, d) in dst.iter_mut().enumerate() {
            *d = (layer.bias[o] as f64 + dot(xr, &layer.weight[o * n..(o + 1) * n])) as f32;
        }
    }
    Ok(out)
}

/// Numerically stable softmax.
pub fn softmax(x: &[f32]) -> Vec<f32> {
    let mut out = vec![0.0f32; x.len()];
    softmax_into(x, &mut out);
    out
}

pub(crate) fn softmax_into(x: &[f32], out: &mut [f32]) {
    if x.is_empty() {
        return;
    }
    let m = x.iter().fold(f32::NEG_INFINITY, |a, &b| a.max(b)) as f64;
    let mut sum = 0.0f64;
    for (o, &v) in out.iter_mut().zip(x) {
        let e = (v as f64 - m).exp();
        *o = e as f32;
        sum += e;
    }
    for (o, &v) in out.iter_mut().zip(x) {
        *o = ((v as f64 - m).exp() / sum) as f32;
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f32) -> f32 {
    let x = x as f64;
    let v = if x > 30.0 { x } else { x.max(0.0) + (-x.abs()).exp().ln_1p() };
    v as f32
}
