//! Residual neighborhood attention block.

use crate::error::{shape_err, Result};
use crate::nn::attention::{attend_tokens, NaParams};
use crate::ops::{gelu_matrix, layer_norm, linear, Linear, LAYER_NORM_EPS};
use crate::tensor::{Matrix, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNormParams {
    pub gamma: Vec<f32>,
    pub beta: Vec<f32>,
}

impl LayerNormParams {
    pub fn identity(channels: usize) -> Self {
        Self {
            gamma: vec![1.0; channels],
            beta: vec![0.0; channels],
        }
    }

    pub fn apply(&self, tokens: &Matrix) -> Result<Matrix> {
        layer_norm(tokens, &self.gamma, &self.beta, LAYER_NORM_EPS)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnabParams {
    pub ln1: LayerNormParams,
    pub na: NaParams,
    pub ln2: LayerNormParams,
    /// `C → 2C`
    pub fc1: Linear,
    /// `2C → C`
    pub fc2: Linear,
}

impl RnabParams {
    pub fn zeros(channels: usize, heads: usize, window: usize) -> Result<Self> {
        Ok(Self {
            ln1: LayerNormParams::identity(channels),
            na: NaParams::zeros(channels, heads, window)?,
            ln2: LayerNormParams::identity(channels),
            fc1: Linear::zeros(2 * channels, channels),
            fc2: Linear::zeros(channels, 2 * channels),
        })
    }

    pub fn channels(&self) -> usize {
        self.ln1.gamma.len()
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.channels();
        if self.ln1.beta.len() != c || self.ln2.gamma.len() != c || self.ln2.beta.len() != c {
            return shape_err("layer norm widths disagree");
        }
        self.na.validate(c)?;
        if self.fc1.in_features() != c
            || self.fc1.out_features() != 2 * c
            || self.fc2.in_features() != 2 * c
            || self.fc2.out_features() != c
        {
            return shape_err(format!("MLP must be {c} -> {} -> {c}", 2 * c));
        }
        Ok(())
    }
}

pub(crate) fn rnab_tokens(
    mut t: Matrix,
    height: usize,
    width: usize,
    p: &RnabParams,
) -> Result<Matrix> {
    let attn = attend_tokens(&p.ln1.apply(&t)?, height, width, &p.na)?;
    t.add_assign(&attn)?;
    let hidden = gelu_matrix(&linear(&p.ln2.apply(&t)?, &p.fc1)?);
    let mlp = linear(&hidden, &p.fc2)?;
    t.add_assign(&mlp)?;
    Ok(t)
}

/// `t = t + NA(LN1(t)); t = t + MLP(LN2(t))` on the token view of `x`.
pub fn rnab_forward(x: &Tensor, p: &RnabParams) -> Result<Tensor> {
    if x.channels() != p.channels() {
        return shape_err(format!(
            "RNAB width {} applied to {} channels",
            p.channels(),
            x.channels()
        ));
    }
    p.validate()?;
    let t = rnab_tokens(x.to_tokens(), x.height(), x.width(), p)?;
    Tensor::from_tokens(&t, x.height(), x.width())
}
