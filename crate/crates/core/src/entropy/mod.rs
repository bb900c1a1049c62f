//! Quantization, probability tables, range coding and rate estimation.

pub mod factorized;
pub mod gaussian;
pub mod quantize;
pub mod range_coder;

pub use factorized::FactorizedModel;
pub use gaussian::{build_cdf, gaussian_pmf, scale_lookup, CdfTable, GaussianParams, ScaleTable};
pub use quantize::{dequantize, quantize_mixed};
pub use range_coder::{decode_next, decode_stream, encode_stream, RangeDecoder, RangeEncoder};

use crate::error::{Error, Result};

/// Symbols are saturated to `[−MAX_SYMBOL, MAX_SYMBOL]`.
pub const MAX_SYMBOL: i32 = 63;
pub const SCALE_MIN: f64 = 0.11;
pub const SCALE_MAX: f64 = 256.0;
pub const SCALE_TABLE_LEN: usize = 64;
/// Bits of frequency precision; tables total `2^16`.
pub const CDF_PRECISION: u32 = 16;

/// Probability model a symbol sequence is measured against.
#[derive(Debug, Clone, Copy)]
pub enum RateModel<'a> {
    /// Mean-removed symbols, aligned elementwise with `params.sigma`.
    Gaussian(&'a GaussianParams),
    /// `ẑ` symbols in channel-major order.
    Factorized(&'a FactorizedModel),
}

/// `Σ −log2 p(sᵢ)` using the same quantized tables the coder uses.
pub fn estimate_rate(symbols: &[i32], model: RateModel<'_>) -> Result<f64> {
    let outside = |s: i32| Error::Shape(format!("symbol {s} outside alphabet"));
    match model {
        RateModel::Gaussian(p) => {
            let sigma = p.sigma.data();
            if sigma.len() != symbols.len() {
                return Err(Error::Shape(format!(
                    "{} symbols for {} scale values",
                    symbols.len(),
                    sigma.len()
                )));
            }
            let st = ScaleTable::shared();
            symbols
                .iter()
                .zip(sigma)
                .map(|(&s, &sg)| st.table_for(sg as f64).bits(s).ok_or_else(|| outside(s)))
                .sum()
        }
        RateModel::Factorized(m) => {
            if symbols.len() % m.channels() != 0 {
                return Err(Error::Shape("symbol count not a multiple of channels".into()));
            }
            let plane = symbols.len() / m.channels();
            symbols
                .iter()
                .enumerate()
                .map(|(i, &s)| m.table(i / plane).bits(s).ok_or_else(|| outside(s)))
                .sum()
        }
    }
}

/// `Σ −log2 p` for symbols coded under explicit tables.
pub fn estimate_rate_tables(symbols: &[i32], tables: &[&CdfTable]) -> Result<f64> {
    symbols
        .iter()
        .zip(tables)
        .map(|(&s, t)| {
            t.bits(s)
                .ok_or_else(|| Error::Shape(format!("symbol {s} outside alphabet")))
        })
        .sum()
}
