//! Per-channel Gaussian model for the hyper latents `ẑ`.
//!
//! Each channel `c` has a fixed `(μ_c, σ_c)`; `ẑ = round(z)` is coded under
//! the discretized `N(μ_c, σ_c²)` on `[−L, L]`. Symbols are written in
//! channel, row, column order.

use super::gaussian::{clamp_scale, CdfTable};
use super::quantize::round_symbol;
use super::range_coder::{RangeDecoder, RangeEncoder};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::weights::{ParamInit, ParamSpec, WeightStore};

pub const MEAN_NAME: &str = "entropy.z.mean";
pub const SCALE_NAME: &str = "entropy.z.scale";

pub fn factorized_demands(cfg: &NetworkConfig) -> Vec<ParamSpec> {
    let c = cfg.hyper_channels[1];
    vec![
        ParamSpec::new(MEAN_NAME, vec![c], ParamInit::Zeros),
        ParamSpec::new(SCALE_NAME, vec![c], ParamInit::Ones),
    ]
}

#[derive(Debug, Clone)]
pub struct FactorizedModel {
    mean: Vec<f32>,
    scale: Vec<f32>,
    tables: Vec<CdfTable>,
}

impl FactorizedModel {
    pub fn new(mean: Vec<f32>, scale: Vec<f32>) -> Result<Self> {
        if mean.len() != scale.len() || mean.is_empty() {
            return Err(Error::Shape("factorized mean/scale lengths differ".into()));
        }
        if let Some(s) = scale.iter().find(|&&s| !(s > 0.0)) {
            return Err(Error::Config(format!("factorized scale {s} must be positive")));
        }
        let tables = mean
            .iter()
            .zip(&scale)
            .map(|(&m, &s)| CdfTable::gaussian(m as f64, clamp_scale(s as f64)))
            .collect();
        Ok(Self { mean, scale, tables })
    }

    pub fn from_store(store: &WeightStore, channels: usize) -> Result<Self> {
        Self::new(store.vector(MEAN_NAME, channels)?, store.vector(SCALE_NAME, channels)?)
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f32] {
        &self.mean
    }

    pub fn scale(&self) -> &[f32] {
        &self.scale
    }

    pub fn table(&self, channel: usize) -> &CdfTable {
        &self.tables[channel]
    }

    fn check(&self, z: &Tensor) -> Result<()> {
        if z.channels() != self.channels() {
            return Err(Error::Shape(format!(
                "factorized model has {} channels, tensor has {}",
                self.channels(),
                z.channels()
            )));
        }
        Ok(())
    }

    /// Integer symbols of `round(z)` in coding order.
    pub fn quantize(&self, z: &Tensor) -> Result<Vec<i32>> {
        self.check(z)?;
        Ok(z.data().iter().map(|&v| round_symbol(v as f64)).collect())
    }

    /// Returns the coded segment and `ẑ`.
    pub fn encode(&self, z: &Tensor) -> Result<(Vec<u8>, Tensor)> {
        let symbols = self.quantize(z)?;
        let plane = z.plane_len();
        let mut enc = RangeEncoder::new();
        for (i, &s) in symbols.iter().enumerate() {
            enc.encode(s, &self.tables[i / plane])?;
        }
        let (c, h, w) = z.shape();
        let z_hat = Tensor::from_vec(c, h, w, symbols.iter().map(|&s| s as f32).collect())?;
        Ok((enc.finish(), z_hat))
    }

    pub fn decode(&self, bytes: &[u8], height: usize, width: usize) -> Result<Tensor> {
        let c = self.channels();
        let mut dec = RangeDecoder::new(bytes)?;
        let mut data = Vec::with_capacity(c * height * width);
        for ch in 0..c {
            for _ in 0..height * width {
                data.push(dec.decode(&self.tables[ch])? as f32);
            }
        }
        dec.finish()?;
        Tensor::from_vec(c, height, width, data)
    }

    /// `Σ −log2 p` of the symbols under the quantized tables.
    pub fn estimate_bits(&self, z_hat: &Tensor) -> Result<f64> {
        self.check(z_hat)?;
        let plane = z_hat.plane_len();
        let mut bits = 0.0;
        for (i, &v) in z_hat.data().iter().enumerate() {
            bits += self.tables[i / plane]
                .bits(v as i32)
                .ok_or_else(|| Error::Shape(format!("symbol {v} outside alphabet")))?;
        }
        Ok(bits)
    }
}
