//! Multi-head neighborhood attention.
//!
//! Each query at `(i, j)` attends to a `w×w` window centred on it. Near the
//! borders the window is shifted inwards so it still holds `w²` in-bounds
//! keys. Along an axis shorter than `w` the window spans the whole axis.
//! The relative-position bias is indexed by the true offset
//! `key − query`, which always lies in `[−(w−1), w−1]` per axis.

use crate::error::{shape_err, Result};
use crate::ops::{dot, linear, softmax_into, Linear};
use crate::tensor::{Matrix, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct NaParams {
    pub heads: usize,
    pub window: usize,
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
    pub o: Linear,
    /// `heads × (2w−1) × (2w−1)`, row offset major.
    pub rpb: Vec<f32>,
}

impl NaParams {
    pub fn zeros(channels: usize, heads: usize, window: usize) -> Result<Self> {
        let p = Self {
            heads,
            window,
            q: Linear::zeros(channels, channels),
            k: Linear::zeros(channels, channels),
            v: Linear::zeros(channels, channels),
            o: Linear::zeros(channels, channels),
            rpb: vec![0.0; heads * (2 * window - 1) * (2 * window - 1)],
        };
        p.validate(channels)?;
        Ok(p)
    }

    pub fn channels(&self) -> usize {
        self.o.out_features()
    }

    pub fn head_dim(&self) -> usize {
        self.q.out_features() / self.heads
    }

    pub fn bias_side(&self) -> usize {
        2 * self.window - 1
    }

    pub fn validate(&self, channels: usize) -> Result<()> {
        if self.window == 0 || self.window % 2 == 0 {
            return shape_err(format!("attention window {} must be odd", self.window));
        }
        if self.heads == 0 || channels % self.heads != 0 {
            return shape_err(format!(
                "{} heads do not divide {channels} channels",
                self.heads
            ));
        }
        for (name, l) in [("q", &self.q), ("k", &self.k), ("v", &self.v)] {
            if l.in_features() != channels || l.out_features() != channels {
                return shape_err(format!(
                    "{name} projection is {}x{}, expected {channels}x{channels}",
                    l.out_features(),
                    l.in_features()
                ));
            }
        }
        if self.o.in_features() != channels || self.o.out_features() != channels {
            return shape_err("output projection has wrong shape");
        }
        let side = self.bias_side();
        if self.rpb.len() != self.heads * side * side {
            return shape_err(format!(
                "bias table has {} entries, expected {}",
                self.rpb.len(),
                self.heads * side * side
            ));
        }
        Ok(())
    }

    #[inline]
    fn bias(&self, head: usize, dy: isize, dx: isize) -> f32 {
        let side = self.bias_side();
        let r = (dy + self.window as isize - 1) as usize;
        let c = (dx + self.window as isize - 1) as usize;
        self.rpb[(head * side + r) * side + c]
    }
}

/// First index and length of the neighborhood window along one axis.
#[inline]
pub(crate) fn window_range(pos: usize, len: usize, window: usize) -> (usize, usize) {
    if len <= window {
        (0, len)
    } else {
        let half = window / 2;
        let start = pos.saturating_sub(half).min(len - window);
        (start, window)
    }
}

/// Attention weights of one query for one head, as `((row, col), weight)`.
///
/// `tokens` are the normalized input tokens of an `height×width` grid.
pub fn attention_weights(
    tokens: &Matrix,
    height: usize,
    width: usize,
    p: &NaParams,
    query: (usize, usize),
    head: usize,
) -> Result<Vec<((usize, usize), f32)>> {
    p.validate(tokens.cols())?;
    let q = linear(tokens, &p.q)?;
    let k = linear(tokens, &p.k)?;
    let d = p.head_dim();
    let (i, j) = query;
    let (r0, nr) = window_range(i, height, p.window);
    let (c0, nc) = window_range(j, width, p.window);
    let qi = &q.row(i * width + j)[head * d..(head + 1) * d];
    let scale = 1.0 / (d as f64).sqrt();
    let mut positions = Vec::with_capacity(nr * nc);
    let mut scores = Vec::with_capacity(nr * nc);
    for r in r0..r0 + nr {
        for c in c0..c0 + nc {
            let kr = &k.row(r * width + c)[head * d..(head + 1) * d];
            let b = p.bias(head, r as isize - i as isize, c as isize - j as isize) as f64;
            scores.push(((dot(qi, kr) + b) * scale) as f32);
            positions.push((r, c));
        }
    }
    let mut w = vec![0.0; scores.len()];
    softmax_into(&scores, &mut w);
    Ok(positions.into_iter().zip(w).collect())
}

/// Neighborhood attention over tokens of an `height×width` grid.
pub(crate) fn attend_tokens(
    tokens: &Matrix,
    height: usize,
    width: usize,
    p: &NaParams,
) -> Result<Matrix> {
    let c = tokens.cols();
    p.validate(c)?;
    if tokens.rows() != height * width {
        return shape_err("token count does not match grid");
    }
    let q = linear(tokens, &p.q)?;
    let k = linear(tokens, &p.k)?;
    let v = linear(tokens, &p.v)?;
    let d = p.head_dim();
    let scale = 1.0 / (d as f64).sqrt();

    let mut heads_out = Matrix::zeros(tokens.rows(), c);
    let mut scores = Vec::with_capacity(p.window * p.window);
    let mut weights = Vec::with_capacity(p.window * p.window);
    let mut acc = vec![0.0f64; d];
    for i in 0..height {
        let (r0, nr) = window_range(i, height, p.window);
        for j in 0..width {
            let (c0, nc) = window_range(j, width, p.window);
            let t = i * width + j;
            for h in 0..p.heads {
                let span = h * d..(h + 1) * d;
                let qi = &q.row(t)[span.clone()];
                scores.clear();
                for r in r0..r0 + nr {
                    for cc in c0..c0 + nc {
                        let kr = &k.row(r * width + cc)[span.clone()];
                        let b = p.bias(h, r as isize - i as isize, cc as isize - j as isize);
                        scores.push(((dot(qi, kr) + b as f64) * scale) as f32);
                    }
                }
                weights.resize(scores.len(), 0.0);
                softmax_into(&scores, &mut weights);
                acc.fill(0.0);
                let mut n = 0;
                for r in r0..r0 + nr {
                    for cc in c0..c0 + nc {
                        let wgt = weights[n] as f64;
                        n += 1;
                        let vr = &v.row(r * width + cc)[span.clone()];
                        for (a, &x) in acc.iter_mut().zip(vr) {
                            *a += wgt * x as f64;
                        }
                    }
                }
                for (dst, &a) in heads_out.row_mut(t)[span].iter_mut().zip(&acc) {
                    *dst = a as f32;
                }
            }
        }
    }
    linear(&heads_out, &p.o)
}

/// Neighborhood attention on a `C×H×W` tensor; output has the input's shape.
pub fn neighborhood_attention(x: &Tensor, p: &NaParams) -> Result<Tensor> {
    let tokens = x.to_tokens();
    let out = attend_tokens(&tokens, x.height(), x.width(), p)?;
    Tensor::from_tokens(&out, x.height(), x.width())
}
