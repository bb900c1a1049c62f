//! Entropy parameters of one context-model stage.

use super::schedule::StepMask;
use super::weights::{McmWeights, StageNets};
use crate::entropy::gaussian::GaussianParams;
use crate::entropy::{SCALE_MAX, SCALE_MIN};
use crate::error::{shape_err, Result};
use crate::ops::{conv2d, gelu_tensor, softplus};
use crate::tensor::Tensor;

/// Inputs for one stage: the prior, the finished groups before it and the
/// partially reconstructed current group with its availability mask.
#[derive(Debug, Clone, Copy)]
pub struct StageContext<'a> {
    pub psi: &'a Tensor,
    pub previous: &'a [Tensor],
    pub current: &'a Tensor,
    pub available: &'a StepMask,
}

/// `g_cc(concat(ψ, ŷ¹..ŷ^{i−1}))`.
pub fn channel_context(nets: &StageNets, psi: &Tensor, previous: &[Tensor]) -> Result<Tensor> {
    let mut parts = vec![psi];
    parts.extend(previous.iter());
    let x = Tensor::concat(&parts)?;
    let h = gelu_tensor(&conv2d(&x, &nets.cc[0])?);
    conv2d(&h, &nets.cc[1])
}

/// Zeroes every position outside `mask`.
pub fn apply_mask(x: &Tensor, mask: &StepMask) -> Result<Tensor> {
    if (x.height(), x.width()) != (mask.height(), mask.width()) {
        return shape_err(format!(
            "mask {}x{} does not match tensor {:?}",
            mask.height(),
            mask.width(),
            x.shape()
        ));
    }
    let mut out = x.clone();
    let bits = mask.bits();
    for c in 0..out.channels() {
        for (v, &keep) in out.plane_mut(c).iter_mut().zip(bits) {
            if !keep {
                *v = 0.0;
            }
        }
    }
    Ok(out)
}

/// `g_sc(ŷᵖ ⊙ mask)`, or `None` for a stage without spatial context.
pub fn spatial_context(nets: &StageNets, current: &Tensor, available: &StepMask) -> Result<Option<Tensor>> {
    match &nets.sc {
        Some(sc) => Ok(Some(conv2d(&apply_mask(current, available)?, sc)?)),
        None => Ok(None),
    }
}

/// `split(g_ep(concat(ψ, φ_cc, φ_sc)))` with `σ = clamp(softplus(·))`.
pub fn parameter_head(
    nets: &StageNets,
    psi: &Tensor,
    phi_cc: &Tensor,
    phi_sc: Option<&Tensor>,
) -> Result<GaussianParams> {
    let mut parts = vec![psi, phi_cc];
    parts.extend(phi_sc);
    let x = Tensor::concat(&parts)?;
    let h = gelu_tensor(&conv2d(&x, &nets.ep[0])?);
    let h = gelu_tensor(&conv2d(&h, &nets.ep[1])?);
    let e = conv2d(&h, &nets.ep[2])?;
    let n = nets.group_width();
    let mu = e.slice_channels(0, n)?;
    let sigma = e
        .slice_channels(n, 2 * n)?
        .map(|v| softplus(v).clamp(SCALE_MIN as f32, SCALE_MAX as f32));
    GaussianParams::new(mu, sigma)
}

/// Full-map parameters for stage `stage` (0-based) given its context.
pub fn stage_entropy_params(stage: usize, ctx: &StageContext<'_>, w: &McmWeights) -> Result<GaussianParams> {
    let nets = &w.stages[stage];
    let phi_cc = channel_context(nets, ctx.psi, ctx.previous)?;
    let phi_sc = spatial_context(nets, ctx.current, ctx.available)?;
    parameter_head(nets, ctx.psi, &phi_cc, phi_sc.as_ref())
}

/// Values of `t` at the positions of `mask`, in channel, row, column order.
pub fn gather(t: &Tensor, mask: &StepMask) -> Vec<f32> {
    let mut out = Vec::with_capacity(t.channels() * mask.count());
    for c in 0..t.channels() {
        let plane = t.plane(c);
        out.extend(mask.positions().map(|p| plane[p]));
    }
    out
}
