//! Integrated convolution and self-attention unit: a stride-2 resampling
//! convolution paired with a stack of RNABs.

use crate::error::{shape_err, Result};
use crate::nn::rnab::{rnab_tokens, RnabParams};
use crate::ops::{conv2d, tconv2d, ConvKernel};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Convolution (halving dims), then the RNAB stack.
    Analysis,
    /// RNAB stack, then transposed convolution (doubling dims).
    Synthesis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcsaParams {
    pub resample: ConvKernel,
    pub blocks: Vec<RnabParams>,
}

impl IcsaParams {
    /// Channel width the RNAB stack runs at.
    pub fn block_width(&self, direction: Direction) -> usize {
        match direction {
            Direction::Analysis => self.resample.out_channels(),
            Direction::Synthesis => self.resample.in_channels(),
        }
    }

    pub fn output_shape(
        &self,
        input: (usize, usize, usize),
        direction: Direction,
    ) -> (usize, usize, usize) {
        let (_, h, w) = input;
        let (oh, ow) = match direction {
            Direction::Analysis => self.resample.conv_output_dims(h, w),
            Direction::Synthesis => self.resample.tconv_output_dims(h, w),
        };
        (self.resample.out_channels(), oh, ow)
    }
}

fn run_blocks(x: Tensor, blocks: &[RnabParams]) -> Result<Tensor> {
    if blocks.is_empty() {
        return Ok(x);
    }
    let (h, w) = (x.height(), x.width());
    let mut t = x.to_tokens();
    for b in blocks {
        if b.channels() != t.cols() {
            return shape_err(format!(
                "RNAB width {} in a stack running at {}",
                b.channels(),
                t.cols()
            ));
        }
        b.validate()?;
        t = rnab_tokens(t, h, w, b)?;
    }
    Tensor::from_tokens(&t, h, w)
}

pub fn icsa_forward(x: &Tensor, p: &IcsaParams, direction: Direction) -> Result<Tensor> {
    match direction {
        Direction::Analysis => {
            let y = conv2d(x, &p.resample)?;
            run_blocks(y, &p.blocks)
        }
        Direction::Synthesis => {
            if x.channels() != p.resample.in_channels() {
                return shape_err(format!(
                    "synthesis ICSA expects {} channels, got {}",
                    p.resample.in_channels(),
                    x.channels()
                ));
            }
            let y = run_blocks(x.clone(), &p.blocks)?;
            tconv2d(&y, &p.resample)
        }
    }
}
