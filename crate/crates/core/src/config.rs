//! Network width/depth profile.
//!
//! A profile serializes to plain `key = value` lines. The text is embedded
//! in weight files and hashed into the bitstream's model hash, so the
//! serialization is canonical: fixed key order, comma-separated integers.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mcm::slice::{cosine_slice, linear_slice, SliceSpec};

/// How the latent channels are divided into the four context-model groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slicing {
    Cosine,
    Linear,
    Explicit([usize; 4]),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkConfig {
    pub main_channels: [usize; 4],
    pub main_depths: [usize; 4],
    pub main_heads: [usize; 4],
    pub main_window: usize,
    pub hyper_channels: [usize; 2],
    pub hyper_depths: [usize; 2],
    pub hyper_heads: usize,
    pub hyper_window: usize,
    pub prior_channels: usize,
    pub first_kernel: usize,
    pub inner_kernel: usize,
    pub slicing: Slicing,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            main_channels: [128, 192, 256, 320],
            main_depths: [2, 2, 6, 2],
            main_heads: [8, 12, 16, 20],
            main_window: 7,
            hyper_channels: [192, 192],
            hyper_depths: [2, 2],
            hyper_heads: 12,
            hyper_window: 3,
            prior_channels: 384,
            first_kernel: 5,
            inner_kernel: 3,
            slicing: Slicing::Cosine,
        }
    }
}

impl NetworkConfig {
    /// Small profile used by tests and the self-test: every structural
    /// feature of the default profile at a fraction of the cost.
    pub fn tiny() -> Self {
        let main_channels = [8, 12, 16, 20];
        Self {
            main_channels,
            main_depths: [1, 1, 2, 1],
            main_heads: [2, 3, 4, 5],
            main_window: 7,
            hyper_channels: [12, 12],
            hyper_depths: [1, 1],
            hyper_heads: 3,
            hyper_window: 3,
            prior_channels: 2 * main_channels[3],
            first_kernel: 5,
            inner_kernel: 3,
            slicing: Slicing::Cosine,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default()),
            "tiny" => Ok(Self::tiny()),
            other => Err(Error::Config(format!("unknown profile `{other}`"))),
        }
    }

    pub fn latent_channels(&self) -> usize {
        self.main_channels[3]
    }

    pub fn slice_spec(&self) -> Result<SliceSpec> {
        let c = self.latent_channels();
        match self.slicing {
            Slicing::Cosine => cosine_slice(c, 4),
            Slicing::Linear => linear_slice(c, 4),
            Slicing::Explicit(sizes) => SliceSpec::new(sizes.to_vec(), c),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let odd = |w: usize| w % 2 == 1;
        for (i, (&c, &h)) in self.main_channels.iter().zip(&self.main_heads).enumerate() {
            if c == 0 || h == 0 || c % h != 0 {
                return Err(Error::Config(format!(
                    "main stage {}: {h} heads do not divide {c} channels",
                    i + 1
                )));
            }
        }
        for &c in &self.hyper_channels {
            if c == 0 || self.hyper_heads == 0 || c % self.hyper_heads != 0 {
                return Err(Error::Config(format!(
                    "hyper: {} heads do not divide {c} channels",
                    self.hyper_heads
                )));
            }
        }
        if !odd(self.main_window) || !odd(self.hyper_window) {
            return Err(Error::Config("attention windows must be odd".into()));
        }
        for k in [self.first_kernel, self.inner_kernel] {
            if k != 3 && k != 5 {
                return Err(Error::Config(format!("kernel size {k} not in {{3, 5}}")));
            }
        }
        if self.prior_channels == 0 {
            return Err(Error::Config("prior_channels must be >= 1".into()));
        }
        self.slice_spec()?;
        Ok(())
    }

    pub fn to_profile_text(&self) -> String {
        fn list(v: &[usize]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        let mut s = String::new();
        let _ = writeln!(s, "main_channels = {}", list(&self.main_channels));
        let _ = writeln!(s, "main_depths = {}", list(&self.main_depths));
        let _ = writeln!(s, "main_heads = {}", list(&self.main_heads));
        let _ = writeln!(s, "main_window = {}", self.main_window);
        let _ = writeln!(s, "hyper_channels = {}", list(&self.hyper_channels));
        let _ = writeln!(s, "hyper_depths = {}", list(&self.hyper_depths));
        let _ = writeln!(s, "hyper_heads = {}", self.hyper_heads);
        let _ = writeln!(s, "hyper_window = {}", self.hyper_window);
        let _ = writeln!(s, "prior_channels = {}", self.prior_channels);
        let _ = writeln!(s, "first_kernel = {}", self.first_kernel);
        let _ = writeln!(s, "inner_kernel = {}", self.inner_kernel);
        let slicing = match self.slicing {
            Slicing::Cosine => "cosine".to_string(),
            Slicing::Linear => "linear".to_string(),
            Slicing::Explicit(g) => list(&g),
        };
        let _ = writeln!(s, "slicing = {slicing}");
        s
    }

    /// Parses profile text. Keys missing from the text keep their default
    /// values; unknown keys are rejected.
    pub fn from_profile_text(text: &str) -> Result<Self> {
        fn ints<const N: usize>(key: &str, v: &str) -> Result<[usize; N]> {
            let parts: Vec<usize> = v
                .split(',')
                .map(|p| p.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("{key}: {e}")))?;
            parts
                .try_into()
                .map_err(|p: Vec<usize>| Error::Config(format!("{key}: expected {N} values, got {}", p.len())))
        }
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "main_channels" => cfg.main_channels = ints(key, value)?,
                "main_depths" => cfg.main_depths = ints(key, value)?,
                "main_heads" => cfg.main_heads = ints(key, value)?,
                "main_window" => cfg.main_window = ints::<1>(key, value)?[0],
                "hyper_channels" => cfg.hyper_channels = ints(key, value)?,
                "hyper_depths" => cfg.hyper_depths = ints(key, value)?,
                "hyper_heads" => cfg.hyper_heads = ints::<1>(key, value)?[0],
                "hyper_window" => cfg.hyper_window = ints::<1>(key, value)?[0],
                "prior_channels" => cfg.prior_channels = ints::<1>(key, value)?[0],
                "first_kernel" => cfg.first_kernel = ints::<1>(key, value)?[0],
                "inner_kernel" => cfg.inner_kernel = ints::<1>(key, value)?[0],
                "slicing" => {
                    cfg.slicing = match value {
                        "cosine" => Slicing::Cosine,
                        "linear" => Slicing::Linear,
                        explicit => Slicing::Explicit(ints(key, explicit)?),
                    }
                }
                other => return Err(Error::Config(format!("unknown profile key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
