//! Spatial coding schedules (generalized checkerboard patterns).
//!
//! * 4 steps: the grid is tiled by 2×2 blocks; block offsets (row, col)
//!   `(0,0)`, `(1,1)`, `(0,1)`, `(1,0)` form steps 0–3.
//! * 2 steps: checkerboard, step 0 where `row + col` is even. The
//!   complementary arrangement swaps the two steps.
//! * 1 step: every position at once.
//!
//! Stage 1 uses 4 steps, stage 2 the plain 2-step pattern, stage 3 the
//! complementary 2-step pattern, stage 4 a single step.

use crate::error::{Error, Result};

/// Steps per context-model stage.
pub const STAGE_STEPS: [usize; 4] = [4, 2, 2, 1];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl StepMask {
    pub fn empty(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            bits: vec![false; height * width],
        }
    }

    pub fn full(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            bits: vec![true; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(height * width);
        for h in 0..height {
            for w in 0..width {
                bits.push(f(h, w));
            }
        }
        Self { height, width, bits }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn contains(&self, h: usize, w: usize) -> bool {
        self.bits[h * self.width + w]
    }

    /// Flat spatial indices of the selected positions, row-major.
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn union(&self, other: &StepMask) -> StepMask {
        StepMask {
            height: self.height,
            width: self.width,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect(),
        }
    }

    pub fn is_disjoint(&self, other: &StepMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !(*a && *b))
    }
}

pub fn gcp_masks(height: usize, width: usize, steps: usize, complementary: bool) -> Result<Vec<StepMask>> {
    if height % 2 != 0 || width % 2 != 0 || height == 0 || width == 0 {
        return Err(Error::Config(format!(
            "checkerboard schedules need even dims, got {height}x{width}"
        )));
    }
    let mut masks = match steps {
        4 => [(0, 0), (1, 1), (0, 1), (1, 0)]
            .iter()
            .map(|&(dy, dx)| StepMask::from_fn(height, width, |h, w| h % 2 == dy && w % 2 == dx))
            .collect::<Vec<_>>(),
        2 => vec![
            StepMask::from_fn(height, width, |h, w| (h + w) % 2 == 0),
            StepMask::from_fn(height, width, |h, w| (h + w) % 2 == 1),
        ],
        1 => vec![StepMask::full(height, width)],
        other => return Err(Error::Config(format!("unsupported step count {other}"))),
    };
    if complementary && steps == 2 {
        masks.swap(0, 1);
    }
    Ok(masks)
}

/// Step masks for all four stages of a latent grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcpSchedule {
    height: usize,
    width: usize,
    stages: Vec<Vec<StepMask>>,
}

impl GcpSchedule {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        let stages = vec![
            gcp_masks(height, width, 4, false)?,
            gcp_masks(height, width, 2, false)?,
            gcp_masks(height, width, 2, true)?,
            gcp_masks(height, width, 1, false)?,
        ];
        Ok(Self { height, width, stages })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Masks of stage `s` (0-based).
    pub fn steps(&self, stage: usize) -> &[StepMask] {
        &self.stages[stage]
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// Positions decoded before `step` of `stage`.
    pub fn available(&self, stage: usize, step: usize) -> StepMask {
        self.stages[stage][..step]
            .iter()
            .fold(StepMask::empty(self.height, self.width), |acc, m| acc.union(m))
    }

    /// Number of strictly sequential coding passes.
    pub fn total_passes(&self) -> usize {
        self.stages.iter().map(Vec::len).sum()
    }
}
