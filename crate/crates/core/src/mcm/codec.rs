//! Coding the latent groups.
//!
//! The encoder first reconstructs each group step by step (every `ŷ` value
//! depends on its own `μ`). It then recomputes the parameters of all steps
//! from the finished group, each under the availability mask the decoder
//! will see, and codes with those. Symbols within a segment are ordered by
//! step, then channel, then row, then column.

use super::context::{channel_context, gather, parameter_head, spatial_context};
use super::schedule::{GcpSchedule, StepMask};
use super::slice::SliceSpec;
use super::weights::{McmWeights, StageNets};
use crate::entropy::gaussian::{GaussianParams, ScaleTable};
use crate::entropy::quantize::{dequantize, quantize_mixed};
use crate::entropy::range_coder::{RangeDecoder, RangeEncoder};
use crate::error::{shape_err, Error, Result};
use crate::tensor::Tensor;

/// Entropy parameters used for one step, gathered at the step's positions.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub stage: usize,
    pub step: usize,
    pub mu: Vec<f32>,
    pub sigma: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmEncoded {
    pub segments: Vec<Vec<u8>>,
    pub y_hat: Tensor,
    /// `Σ −log2 p` of each segment's symbols under the coding tables.
    pub estimated_bits: Vec<f64>,
    pub trace: Vec<StepTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmDecoded {
    pub y_hat: Tensor,
    /// Groups actually decoded; the rest hold predicted means.
    pub decoded_groups: usize,
    /// Sequential coding passes performed.
    pub passes: usize,
    pub bytes_consumed: Vec<usize>,
    pub trace: Vec<StepTrace>,
}

fn check_inputs(
    channels: usize,
    height: usize,
    width: usize,
    psi: &Tensor,
    slice: &SliceSpec,
    sched: &GcpSchedule,
    w: &McmWeights,
) -> Result<()> {
    if slice.channels() != channels {
        return shape_err(format!("slice covers {} channels, latent has {channels}", slice.channels()));
    }
    if slice.sizes() != w.group_sizes.as_slice() || slice.group_count() != sched.stage_count() {
        return Err(Error::Config(format!(
            "slice {:?} does not match context model groups {:?}",
            slice.sizes(),
            w.group_sizes
        )));
    }
    if (psi.height(), psi.width()) != (height, width) || psi.channels() != w.prior_channels {
        return shape_err(format!(
            "prior {:?} does not align with latent {channels}x{height}x{width}",
            psi.shape()
        ));
    }
    if (sched.height(), sched.width()) != (height, width) {
        return shape_err("schedule dims differ from latent dims");
    }
    Ok(())
}

fn step_params(
    nets: &StageNets,
    psi: &Tensor,
    phi_cc: &Tensor,
    current: &Tensor,
    available: &StepMask,
) -> Result<GaussianParams> {
    let phi_sc = spatial_context(nets, current, available)?;
    parameter_head(nets, psi, phi_cc, phi_sc.as_ref())
}

fn trace_step(stage: usize, step: usize, p: &GaussianParams, mask: &StepMask) -> StepTrace {
    StepTrace {
        stage,
        step,
        mu: gather(&p.mu, mask),
        sigma: gather(&p.sigma, mask),
    }
}

pub fn mcm_encode(
    y: &Tensor,
    psi: &Tensor,
    slice: &SliceSpec,
    sched: &GcpSchedule,
    w: &McmWeights,
) -> Result<McmEncoded> {
    let (c, h, wd) = y.shape();
    check_inputs(c, h, wd, psi, slice, sched, w)?;
    let scales = ScaleTable::shared();
    let mut groups: Vec<Tensor> = Vec::with_capacity(slice.group_count());
    let mut segments = Vec::with_capacity(slice.group_count());
    let mut estimated_bits = Vec::with_capacity(slice.group_count());
    let mut trace = Vec::new();

    for s in 0..slice.group_count() {
        let nets = &w.stages[s];
        let r = slice.range(s);
        let n = r.len();
        let y_s = y.slice_channels(r.start, r.end)?;
        let phi_cc = channel_context(nets, psi, &groups)?;

        let mut cur = Tensor::zeros(n, h, wd);
        for (k, mask) in sched.steps(s).iter().enumerate() {
            let p = step_params(nets, psi, &phi_cc, &cur, &sched.available(s, k))?;
            for ch in 0..n {
                let mu = p.mu.plane(ch);
                let src = y_s.plane(ch);
                let dst = cur.plane_mut(ch);
                for pos in mask.positions() {
                    dst[pos] = quantize_mixed(src[pos], mu[pos]).1;
                }
            }
        }

        let mut enc = RangeEncoder::new();
        let mut bits = 0.0;
        for (k, mask) in sched.steps(s).iter().enumerate() {
            let p = step_params(nets, psi, &phi_cc, &cur, &sched.available(s, k))?;
            for ch in 0..n {
                let (mu, sigma, src) = (p.mu.plane(ch), p.sigma.plane(ch), y_s.plane(ch));
                for pos in mask.positions() {
                    let (sym, _) = quantize_mixed(src[pos], mu[pos]);
                    let table = scales.table_for(sigma[pos] as f64);
                    enc.encode(sym, table)?;
                    bits += table.bits(sym).unwrap_or(f64::INFINITY);
                }
            }
            trace.push(trace_step(s, k, &p, mask));
        }
        segments.push(enc.finish());
        estimated_bits.push(bits);
        groups.push(cur);
    }

    let refs: Vec<&Tensor> = groups.iter().collect();
    Ok(McmEncoded {
        segments,
        y_hat: Tensor::concat(&refs)?,
        estimated_bits,
        trace,
    })
}

pub fn mcm_decode(
    segments: &[&[u8]],
    psi: &Tensor,
    slice: &SliceSpec,
    sched: &GcpSchedule,
    w: &McmWeights,
) -> Result<McmDecoded> {
    if segments.len() != slice.group_count() {
        return Err(Error::Decode(format!(
            "{} segments for {} groups",
            segments.len(),
            slice.group_count()
        )));
    }
    progressive_decode(segments, psi, slice, sched, w)
}

/// Decodes the groups whose segments are given and fills the remaining
/// groups with their predicted means under zeroed spatial context.
pub fn progressive_decode(
    segments: &[&[u8]],
    psi: &Tensor,
    slice: &SliceSpec,
    sched: &GcpSchedule,
    w: &McmWeights,
) -> Result<McmDecoded> {
    let k = segments.len();
    if k == 0 || k > slice.group_count() {
        return Err(Error::Config(format!(
            "progressive decode needs 1..={} segments, got {k}",
            slice.group_count()
        )));
    }
    let (h, wd) = (sched.height(), sched.width());
    check_inputs(slice.channels(), h, wd, psi, slice, sched, w)?;
    let scales = ScaleTable::shared();
    let mut groups: Vec<Tensor> = Vec::with_capacity(slice.group_count());
    let mut passes = 0;
    let mut bytes_consumed = Vec::with_capacity(k);
    let mut trace = Vec::new();

    for (s, seg) in segments.iter().enumerate() {
        let nets = &w.stages[s];
        let n = slice.sizes()[s];
        let phi_cc = channel_context(nets, psi, &groups)?;
        let mut dec = RangeDecoder::new(seg)?;
        let mut cur = Tensor::zeros(n, h, wd);
        for (step, mask) in sched.steps(s).iter().enumerate() {
            let p = step_params(nets, psi, &phi_cc, &cur, &sched.available(s, step))?;
            for ch in 0..n {
                let (mu, sigma) = (p.mu.plane(ch), p.sigma.plane(ch));
                let mut vals = Vec::with_capacity(mask.count());
                for pos in mask.positions() {
                    let sym = dec.decode(scales.table_for(sigma[pos] as f64))?;
                    vals.push((pos, dequantize(sym, mu[pos])));
                }
                let dst = cur.plane_mut(ch);
                for (pos, v) in vals {
                    dst[pos] = v;
                }
            }
            passes += 1;
            trace.push(trace_step(s, step, &p, mask));
        }
        bytes_consumed.push(dec.bytes_consumed());
        dec.finish()
            .map_err(|e| Error::Decode(format!("stage {}: {e}", s + 1)))?;
        groups.push(cur);
    }

    for s in k..slice.group_count() {
        let nets = &w.stages[s];
        let n = slice.sizes()[s];
        let phi_cc = channel_context(nets, psi, &groups)?;
        let zeros = Tensor::zeros(n, h, wd);
        let p = step_params(nets, psi, &phi_cc, &zeros, &StepMask::empty(h, wd))?;
        groups.push(p.mu);
    }

    let refs: Vec<&Tensor> = groups.iter().collect();
    Ok(McmDecoded {
        y_hat: Tensor::concat(&refs)?,
        decoded_groups: k,
        passes,
        bytes_consumed,
        trace,
    })
}
