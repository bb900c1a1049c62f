//! Context-model parameters.
//!
//! Per stage `i` with group width `n`:
//!
//! * `mcm.stage{i}.cc.{1,2}`: 5×5 convs, `P + Σ earlier groups → 2n → 2n`
//! * `mcm.stage{i}.sc`: 3×3 conv, `n → 2n` (stages 1–3 only)
//! * `mcm.stage{i}.ep.{1,2,3}`: 1×1 convs, `P + 2n [+ 2n] → 4n → 3n → 2n`
//!
//! Hidden widths are only defaults for [`seeded_init`](crate::weights::seeded_init);
//! [`McmWeights::from_store`] reads them from the stored shapes.

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::ops::ConvKernel;
use crate::transform::conv_demands;
use crate::weights::{ParamSpec, WeightStore};

pub const CC_KERNEL: usize = 5;
pub const SC_KERNEL: usize = 3;
pub const STAGES: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct StageNets {
    pub cc: [ConvKernel; 2],
    pub sc: Option<ConvKernel>,
    pub ep: [ConvKernel; 3],
}

impl StageNets {
    pub fn channel_context_width(&self) -> usize {
        self.cc[1].out_channels()
    }

    pub fn spatial_context_width(&self) -> usize {
        self.sc.as_ref().map_or(0, ConvKernel::out_channels)
    }

    /// Number of latent channels this stage predicts.
    pub fn group_width(&self) -> usize {
        self.ep[2].out_channels() / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmWeights {
    pub prior_channels: usize,
    pub group_sizes: Vec<usize>,
    pub stages: Vec<StageNets>,
}

pub(crate) fn stage_prefix(stage: usize) -> String {
    format!("mcm.stage{}", stage + 1)
}

pub fn mcm_demands(cfg: &NetworkConfig) -> Result<Vec<ParamSpec>> {
    let sizes = cfg.slice_spec()?.sizes().to_vec();
    let p = cfg.prior_channels;
    let mut out = Vec::new();
    let mut prev = 0;
    for (s, &n) in sizes.iter().enumerate() {
        let pre = stage_prefix(s);
        conv_demands(&mut out, &format!("{pre}.cc.1"), 2 * n, p + prev, CC_KERNEL);
        conv_demands(&mut out, &format!("{pre}.cc.2"), 2 * n, 2 * n, CC_KERNEL);
        let has_sc = s + 1 < STAGES;
        if has_sc {
            conv_demands(&mut out, &format!("{pre}.sc"), 2 * n, n, SC_KERNEL);
        }
        let ep_in = p + 2 * n + if has_sc { 2 * n } else { 0 };
        conv_demands(&mut out, &format!("{pre}.ep.1"), 4 * n, ep_in, 1);
        conv_demands(&mut out, &format!("{pre}.ep.2"), 3 * n, 4 * n, 1);
        conv_demands(&mut out, &format!("{pre}.ep.3"), 2 * n, 3 * n, 1);
        prev += n;
    }
    Ok(out)
}

fn expect(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Shape(msg()))
    }
}

impl McmWeights {
    pub fn from_store(store: &WeightStore, cfg: &NetworkConfig) -> Result<Self> {
        let sizes = cfg.slice_spec()?.sizes().to_vec();
        if sizes.len() != STAGES {
            return Err(Error::Config(format!("context model needs {STAGES} groups")));
        }
        let p = cfg.prior_channels;
        let mut stages = Vec::with_capacity(STAGES);
        let mut prev = 0;
        for (s, &n) in sizes.iter().enumerate() {
            let pre = stage_prefix(s);
            let cc = [
                store.conv_any(&format!("{pre}.cc.1"), 1)?,
                store.conv_any(&format!("{pre}.cc.2"), 1)?,
            ];
            let sc = if s + 1 < STAGES {
                Some(store.conv_any(&format!("{pre}.sc"), 1)?)
            } else {
                None
            };
            let ep = [
                store.conv_any(&format!("{pre}.ep.1"), 1)?,
                store.conv_any(&format!("{pre}.ep.2"), 1)?,
                store.conv_any(&format!("{pre}.ep.3"), 1)?,
            ];
            let nets = StageNets { cc, sc, ep };
            nets_check(&nets, &pre, p, p + prev, n)?;
            stages.push(nets);
            prev += n;
        }
        Ok(Self {
            prior_channels: p,
            group_sizes: sizes,
            stages,
        })
    }
}

fn nets_check(nets: &StageNets, pre: &str, prior: usize, cc_in: usize, n: usize) -> Result<()> {
    let [cc1, cc2] = &nets.cc;
    expect(cc1.in_channels() == cc_in, || {
        format!("`{pre}.cc.1` takes {} channels, expected {cc_in}", cc1.in_channels())
    })?;
    expect(cc2.in_channels() == cc1.out_channels(), || {
        format!("`{pre}.cc.2` input does not match `{pre}.cc.1` output")
    })?;
    if let Some(sc) = &nets.sc {
        expect(sc.in_channels() == n, || {
            format!("`{pre}.sc` takes {} channels, expected {n}", sc.in_channels())
        })?;
    }
    let [ep1, ep2, ep3] = &nets.ep;
    let ep_in = prior + nets.channel_context_width() + nets.spatial_context_width();
    expect(ep1.in_channels() == ep_in, || {
        format!("`{pre}.ep.1` takes {} channels, expected {ep_in}", ep1.in_channels())
    })?;
    expect(ep2.in_channels() == ep1.out_channels() && ep3.in_channels() == ep2.out_channels(), || {
        format!("`{pre}.ep` layers do not chain")
    })?;
    expect(ep3.out_channels() == 2 * n, || {
        format!("`{pre}.ep.3` produces {} channels, expected {}", ep3.out_channels(), 2 * n)
    })?;
    for k in nets.cc.iter().chain(nets.sc.iter()).chain(nets.ep.iter()) {
        expect(k.stride() == 1, || format!("{pre}: context convs must have stride 1"))?;
    }
    Ok(())
}
