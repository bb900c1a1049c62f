//! Channel grouping of the latent tensor.

use std::f64::consts::PI;
use std::ops::Range;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceSpec {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl SliceSpec {
    /// Group sizes must be `≥ 1`, nondecreasing and sum to `channels`.
    pub fn new(sizes: Vec<usize>, channels: usize) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Config("slice spec needs at least one group".into()));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::Config(format!("empty channel group in {sizes:?}")));
        }
        if sizes.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config(format!("group sizes {sizes:?} must be nondecreasing")));
        }
        let total: usize = sizes.iter().sum();
        if total != channels {
            return Err(Error::Config(format!(
                "group sizes {sizes:?} sum to {total}, expected {channels}"
            )));
        }
        let mut offsets = vec![0];
        for s in &sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        Ok(Self { sizes, offsets })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn group_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn channels(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Channel range of group `g` (0-based).
    pub fn range(&self, g: usize) -> Range<usize> {
        self.offsets[g]..self.offsets[g + 1]
    }

    /// Channels in groups before `g`.
    pub fn prefix_channels(&self, g: usize) -> usize {
        self.offsets[g]
    }
}

/// Cumulative boundaries `⌊C·(1 − cos(π·i/2K))⌋`, last boundary `C`.
pub fn cosine_slice(channels: usize, groups: usize) -> Result<SliceSpec> {
    if groups == 0 {
        return Err(Error::Config("need at least one group".into()));
    }
    let mut bounds: Vec<usize> = (0..groups)
        .map(|i| {
            let frac = 1.0 - (PI * i as f64 / (2.0 * groups as f64)).cos();
            (channels as f64 * frac).floor() as usize
        })
        .collect();
    bounds.push(channels);
    let sizes: Vec<usize> = bounds.windows(2).map(|w| w[1].saturating_sub(w[0])).collect();
    SliceSpec::new(sizes, channels)
}

/// Equal groups; the remainder goes one channel each to the last groups.
pub fn linear_slice(channels: usize, groups: usize) -> Result<SliceSpec> {
    if groups == 0 {
        return Err(Error::Config("need at least one group".into()));
    }
    let base = channels / groups;
    let rem = channels % groups;
    let sizes = (0..groups)
        .map(|g| base + usize::from(g >= groups - rem))
        .collect();
    SliceSpec::new(sizes, channels)
}
