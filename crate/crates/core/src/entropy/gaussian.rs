//! Discretized Gaussian model and its quantized CDF tables.

use std::sync::OnceLock;

use super::{CDF_PRECISION, MAX_SYMBOL, SCALE_MAX, SCALE_MIN, SCALE_TABLE_LEN};
use crate::error::{shape_err, Error, Result};
use crate::tensor::Tensor;

/// Standard normal CDF.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

#[inline]
pub fn clamp_scale(sigma: f64) -> f64 {
    if sigma.is_nan() {
        return SCALE_MAX;
    }
    sigma.clamp(SCALE_MIN, SCALE_MAX)
}

/// Probability of integer `s` under `N(mean, σ²)` discretized to unit bins
/// on `[−L, L]`; the end bins absorb the tails.
pub fn discretized_pmf(s: i32, mean: f64, sigma: f64) -> f64 {
    let l = MAX_SYMBOL;
    if s < -l || s > l {
        return 0.0;
    }
    let sigma = clamp_scale(sigma);
    let upper = if s == l {
        1.0
    } else {
        std_normal_cdf((s as f64 + 0.5 - mean) / sigma)
    };
    let lower = if s == -l {
        0.0
    } else {
        std_normal_cdf((s as f64 - 0.5 - mean) / sigma)
    };
    // evaluate on the lighter tail to keep precision
    if s as f64 > mean && s != l && s != -l {
        let su = std_normal_cdf(-(s as f64 - 0.5 - mean) / sigma);
        let sl = std_normal_cdf(-(s as f64 + 0.5 - mean) / sigma);
        return su - sl;
    }
    upper - lower
}

/// Zero-mean discretized Gaussian probability of symbol `s`.
pub fn gaussian_pmf(s: i32, sigma: f64) -> f64 {
    discretized_pmf(s, 0.0, sigma)
}

/// Mean and scale maps for a group of latents.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParams {
    pub mu: Tensor,
    pub sigma: Tensor,
}

impl GaussianParams {
    pub fn new(mu: Tensor, sigma: Tensor) -> Result<Self> {
        if mu.shape() != sigma.shape() {
            return shape_err(format!(
                "mu {:?} and sigma {:?} differ in shape",
                mu.shape(),
                sigma.shape()
            ));
        }
        if sigma.data().iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Shape("sigma must be positive".into()));
        }
        Ok(Self { mu, sigma })
    }
}

/// Cumulative frequencies with `2^16` total. Index `i` encodes the symbol
/// value `offset + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdfTable {
    cdf: Vec<u32>,
    offset: i32,
}

pub const CDF_TOTAL: u32 = 1 << CDF_PRECISION;

impl CdfTable {
    /// Frequencies must be `≥ 1` and sum to exactly `2^16`.
    pub fn from_frequencies(freqs: &[u32], offset: i32) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::Config("empty frequency table".into()));
        }
        if freqs.iter().any(|&f| f == 0) {
            return Err(Error::Config("zero frequency in table".into()));
        }
        let mut cdf = Vec::with_capacity(freqs.len() + 1);
        let mut acc = 0u64;
        cdf.push(0);
        for &f in freqs {
            acc += f as u64;
            if acc > CDF_TOTAL as u64 {
                break;
            }
            cdf.push(acc as u32);
        }
        if acc != CDF_TOTAL as u64 || cdf.len() != freqs.len() + 1 {
            return Err(Error::Config(format!(
                "frequencies sum to {acc}, expected {CDF_TOTAL}"
            )));
        }
        Ok(Self { cdf, offset })
    }

    /// Quantizes a probability vector: `max(1, round(p·2^16))`, then the
    /// most probable symbol (first on ties) absorbs the rounding residue.
    pub fn from_probabilities(probs: &[f64], offset: i32) -> Result<Self> {
        let mut freqs: Vec<i64> = probs
            .iter()
            .map(|&p| ((p * CDF_TOTAL as f64).round() as i64).max(1))
            .collect();
        let sum: i64 = freqs.iter().sum();
        let mode = freqs
            .iter()
            .enumerate()
            .fold(0, |best, (i, &f)| if f > freqs[best] { i } else { best });
        freqs[mode] += CDF_TOTAL as i64 - sum;
        if freqs[mode] < 1 {
            return Err(Error::Config("alphabet too large for 16-bit table".into()));
        }
        let f: Vec<u32> = freqs.into_iter().map(|f| f as u32).collect();
        Self::from_frequencies(&f, offset)
    }

    /// Table for the discretized `N(mean, σ²)` on `[−L, L]`.
    pub fn gaussian(mean: f64, sigma: f64) -> Self {
        let probs: Vec<f64> = (-MAX_SYMBOL..=MAX_SYMBOL)
            .map(|s| discretized_pmf(s, mean, sigma))
            .collect();
        Self::from_probabilities(&probs, -MAX_SYMBOL).expect("127-symbol table always fits")
    }

    pub fn symbol_count(&self) -> usize {
        self.cdf.len() - 1
    }

    pub fn offset(&self) -> i32 {
        self.offset
    }

    pub fn cumulative(&self) -> &[u32] {
        &self.cdf
    }

    /// Index of `value`, if it is in the alphabet.
    #[inline]
    pub fn index_of(&self, value: i32) -> Option<usize> {
        let i = value.checked_sub(self.offset)?;
        (i >= 0 && (i as usize) < self.symbol_count()).then_some(i as usize)
    }

    #[inline]
    pub fn value_of(&self, index: usize) -> i32 {
        self.offset + index as i32
    }

    /// `(cum_low, freq)` of symbol index `i`.
    #[inline]
    pub fn range(&self, i: usize) -> (u32, u32) {
        (self.cdf[i], self.cdf[i + 1] - self.cdf[i])
    }

    /// Symbol index whose interval contains `target` (`< 2^16`).
    #[inline]
    pub fn find(&self, target: u32) -> usize {
        self.cdf.partition_point(|&c| c <= target) - 1
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.range(i).1 as f64 / CDF_TOTAL as f64
    }

    /// `−log2 p` of symbol `value` under this table.
    pub fn bits(&self, value: i32) -> Option<f64> {
        self.index_of(value).map(|i| -self.probability(i).log2())
    }
}

/// Log-spaced σ grid with one zero-mean table per entry.
#[derive(Debug)]
pub struct ScaleTable {
    scales: Vec<f64>,
    tables: Vec<CdfTable>,
}

impl ScaleTable {
    pub fn new() -> Self {
        let n = SCALE_TABLE_LEN;
        let (lo, hi) = (SCALE_MIN.ln(), SCALE_MAX.ln());
        let scales: Vec<f64> = (0..n)
            .map(|i| match i {
                0 => SCALE_MIN,
                i if i == n - 1 => SCALE_MAX,
                i => (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp(),
            })
            .collect();
        let tables = scales.iter().map(|&s| CdfTable::gaussian(0.0, s)).collect();
        Self { scales, tables }
    }

    /// Process-wide instance.
    pub fn shared() -> &'static ScaleTable {
        static TABLE: OnceLock<ScaleTable> = OnceLock::new();
        TABLE.get_or_init(ScaleTable::new)
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Smallest grid σ that is `≥` the clamped `sigma`.
    pub fn lookup(&self, sigma: f64) -> usize {
        let s = clamp_scale(sigma);
        self.scales.partition_point(|&v| v < s).min(self.scales.len() - 1)
    }

    pub fn table(&self, index: usize) -> &CdfTable {
        &self.tables[index]
    }

    pub fn table_for(&self, sigma: f64) -> &CdfTable {
        self.table(self.lookup(sigma))
    }
}

impl Default for ScaleTable {
    fn default() -> Self {
        Self::new()
    }
}

/// Table for `sigma` from the scale grid.
pub fn build_cdf(sigma: f64) -> CdfTable {
    ScaleTable::shared().table_for(sigma).clone()
}

pub fn scale_lookup(sigma: f64) -> usize {
    ScaleTable::shared().lookup(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Φ by composite Simpson integration of the density, independent of erf.
    fn phi_simpson(x: f64) -> f64 {
        if x < 0.0 {
            return 1.0 - phi_simpson(-x);
        }
        let n = 20_000;
        let h = x / n as f64;
        let f = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = f(0.0) + f(x);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        0.5 + s * h / 3.0
    }

    #[test]
    fn pmf_at_zero_unit_sigma() {
        let oracle = phi_simpson(0.5) - phi_simpson(-0.5);
        assert!((oracle - 0.382925).abs() < 1e-5);
        assert!((gaussian_pmf(0, 1.0) - 0.382925).abs() < 1e-5);
        assert!((gaussian_pmf(0, 1.0) - oracle).abs() < 1e-9);
    }

    #[test]
    fn pmf_symmetric_and_normalized() {
        for &sigma in &[0.11, 0.5, 1.0, 3.7, 40.0, 256.0] {
            let mut total = 0.0;
            for s in -MAX_SYMBOL..=MAX_SYMBOL {
                let p = gaussian_pmf(s, sigma);
                assert!((p - gaussian_pmf(-s, sigma)).abs() < 1e-15);
                total += p;
            }
            assert!((total - 1.0).abs() < 1e-9, "sigma {sigma}: {total}");
        }
    }

    #[test]
    fn min_sigma_is_nearly_deterministic() {
        let oracle = 2.0 * phi_simpson(0.5 / 0.11) - 1.0;
        assert!(oracle > 0.99);
        assert!(gaussian_pmf(0, 0.11) > 0.99);
        assert!(gaussian_pmf(0, 0.01) == gaussian_pmf(0, 0.11));
    }

    #[test]
    fn pmf_at_zero_decreases_with_sigma() {
        let mut prev = gaussian_pmf(0, 0.5);
        let mut s = 0.5;
        while s < 256.0 {
            s *= 1.1;
            let p = gaussian_pmf(0, s);
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn tables_are_valid() {
        let st = ScaleTable::shared();
        for i in 0..SCALE_TABLE_LEN {
            let t = st.table(i);
            let c = t.cumulative();
            assert_eq!(c[0], 0);
            assert_eq!(*c.last().unwrap(), CDF_TOTAL);
            assert!(c.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(t.symbol_count(), 127);
        }
        assert!(st.scales().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(st.scales()[0], 0.11);
        assert_eq!(st.scales()[SCALE_TABLE_LEN - 1], 256.0);
    }

    #[test]
    fn scale_lookup_rules() {
        let st = ScaleTable::shared();
        assert_eq!(st.lookup(0.001), 0);
        assert_eq!(st.lookup(0.11), 0);
        assert_eq!(build_cdf(0.05), build_cdf(0.11));
        assert_eq!(st.lookup(1e9), SCALE_TABLE_LEN - 1);
        for &s in &[0.2, 1.0, 7.3, 100.0] {
            let i = st.lookup(s);
            assert!(st.scales()[i] >= s);
            assert!(i == 0 || st.scales()[i - 1] < s);
        }
    }

    /// Independent construction: Simpson-integrated bin masses, integer
    /// rounding, residue to the mode.
    #[test]
    fn unit_sigma_table_matches_oracle() {
        let sigma = ScaleTable::shared().scales()[ScaleTable::shared().lookup(1.0)];
        let l = MAX_SYMBOL as i64;
        let mut freqs: Vec<i64> = (-l..=l)
            .map(|s| {
                let hi = if s == l { 1.0 } else { phi_simpson((s as f64 + 0.5) / sigma) };
                let lo = if s == -l { 0.0 } else { phi_simpson((s as f64 - 0.5) / sigma) };
                (((hi - lo) * 65536.0).round() as i64).max(1)
            })
            .collect();
        let sum: i64 = freqs.iter().sum();
        freqs[l as usize] += 65536 - sum;
        let mut cdf = vec![0u32];
        for f in &freqs {
            cdf.push(cdf.last().unwrap() + *f as u32);
        }
        assert_eq!(build_cdf(1.0).cumulative(), &cdf[..]);
    }

    #[test]
    fn find_locates_intervals() {
        let t = CdfTable::from_frequencies(&[1, 65534, 1], 5).unwrap();
        assert_eq!(t.find(0), 0);
        assert_eq!(t.find(1), 1);
        assert_eq!(t.find(65534), 1);
        assert_eq!(t.find(65535), 2);
        assert_eq!(t.index_of(7), Some(2));
        assert_eq!(t.index_of(8), None);
        assert_eq!(t.value_of(1), 6);
    }

    #[test]
    fn frequency_validation() {
        assert!(CdfTable::from_frequencies(&[0, 65536], 0).is_err());
        assert!(CdfTable::from_frequencies(&[1, 2], 0).is_err());
        assert!(CdfTable::from_frequencies(&[], 0).is_err());
    }

    #[test]
    fn shifted_mean_table() {
        let t = CdfTable::gaussian(2.0, 0.5);
        let best = (0..t.symbol_count()).max_by_key(|&i| t.range(i).1).unwrap();
        assert_eq!(t.value_of(best), 2);
    }
}
