//! The four transform networks: main analysis/synthesis (`g_a`, `g_s`) and
//! hyper analysis/synthesis (`h_a`, `h_s`), each a chain of ICSA units.
//!
//! Layer order (default profile):
//!
//! | g_a              | g_s              | h_a              | h_s              |
//! |------------------|------------------|------------------|------------------|
//! | Conv k5 c128 s2  | RNAB×2 @320      | Conv k3 c192 s2  | RNAB×2 @192      |
//! | RNAB×2           | TConv k3 c256 s2 | RNAB×2           | TConv k3 c192 s2 |
//! | Conv k3 c192 s2  | RNAB×6 @256      | Conv k3 c192 s2  | RNAB×2 @192      |
//! | RNAB×2           | TConv k3 c192 s2 | RNAB×2           | TConv k3 c384 s2 |
//! | Conv k3 c256 s2  | RNAB×2 @192      |                  |                  |
//! | RNAB×6           | TConv k3 c128 s2 |                  |                  |
//! | Conv k3 c320 s2  | RNAB×2 @128      |                  |                  |
//! | RNAB×2           | TConv k5 c3 s2   |                  |                  |

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::nn::{icsa_forward, Direction, IcsaParams, LayerNormParams, NaParams, RnabParams};
use crate::tensor::Tensor;
use crate::weights::{ParamInit, ParamSpec, WeightStore};

/// Input images must be padded to a multiple of this on both axes.
pub const PAD_MULTIPLE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Network {
    MainAnalysis,
    MainSynthesis,
    HyperAnalysis,
    HyperSynthesis,
}

impl Network {
    pub fn prefix(self) -> &'static str {
        match self {
            Network::MainAnalysis => "ga",
            Network::MainSynthesis => "gs",
            Network::HyperAnalysis => "ha",
            Network::HyperSynthesis => "hs",
        }
    }

    fn direction(self) -> Direction {
        match self {
            Network::MainAnalysis | Network::HyperAnalysis => Direction::Analysis,
            Network::MainSynthesis | Network::HyperSynthesis => Direction::Synthesis,
        }
    }
}

/// Widths and depths of one ICSA unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StagePlan {
    pub network: Network,
    /// 1-based
    pub stage: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub block_width: usize,
    pub depth: usize,
    pub heads: usize,
    pub window: usize,
}

impl StagePlan {
    pub fn prefix(&self) -> String {
        format!("{}.stage{}", self.network.prefix(), self.stage)
    }

    fn resample_name(&self) -> String {
        match self.network.direction() {
            Direction::Analysis => format!("{}.conv", self.prefix()),
            Direction::Synthesis => format!("{}.tconv", self.prefix()),
        }
    }
}

pub fn stage_plans(cfg: &NetworkConfig, network: Network) -> Vec<StagePlan> {
    let c = cfg.main_channels;
    let d = cfg.main_depths;
    let h = cfg.main_heads;
    let [c5, c6] = cfg.hyper_channels;
    let [d5, d6] = cfg.hyper_depths;
    let main = |stage, in_channels, out_channels, kernel, width_idx: usize| StagePlan {
        network,
        stage,
        in_channels,
        out_channels,
        kernel,
        block_width: c[width_idx],
        depth: d[width_idx],
        heads: h[width_idx],
        window: cfg.main_window,
    };
    let hyper = |stage, in_channels, out_channels, block_width, depth| StagePlan {
        network,
        stage,
        in_channels,
        out_channels,
        kernel: cfg.inner_kernel,
        block_width,
        depth,
        heads: cfg.hyper_heads,
        window: cfg.hyper_window,
    };
    let (k1, k) = (cfg.first_kernel, cfg.inner_kernel);
    match network {
        Network::MainAnalysis => vec![
            main(1, 3, c[0], k1, 0),
            main(2, c[0], c[1], k, 1),
            main(3, c[1], c[2], k, 2),
            main(4, c[2], c[3], k, 3),
        ],
        Network::MainSynthesis => vec![
            main(1, c[3], c[2], k, 3),
            main(2, c[2], c[1], k, 2),
            main(3, c[1], c[0], k, 1),
            main(4, c[0], 3, k1, 0),
        ],
        Network::HyperAnalysis => vec![hyper(1, c[3], c5, c5, d5), hyper(2, c5, c6, c6, d6)],
        Network::HyperSynthesis => vec![
            hyper(1, c6, c5, c6, d6),
            hyper(2, c5, cfg.prior_channels, c5, d5),
        ],
    }
}

fn rnab_demands(out: &mut Vec<ParamSpec>, prefix: &str, c: usize, heads: usize, window: usize) {
    let side = 2 * window - 1;
    out.push(ParamSpec::new(format!("{prefix}.ln1.weight"), vec![c], ParamInit::Ones));
    out.push(ParamSpec::new(format!("{prefix}.ln1.bias"), vec![c], ParamInit::Zeros));
    for proj in ["q", "k", "v", "o"] {
        out.push(ParamSpec::new(
            format!("{prefix}.na.{proj}.weight"),
            vec![c, c],
            ParamInit::Uniform { fan_in: c },
        ));
        out.push(ParamSpec::new(format!("{prefix}.na.{proj}.bias"), vec![c], ParamInit::Zeros));
    }
    out.push(ParamSpec::new(
        format!("{prefix}.na.rpb"),
        vec![heads, side, side],
        ParamInit::Uniform { fan_in: 1 },
    ));
    out.push(ParamSpec::new(format!("{prefix}.ln2.weight"), vec![c], ParamInit::Ones));
    out.push(ParamSpec::new(format!("{prefix}.ln2.bias"), vec![c], ParamInit::Zeros));
    out.push(ParamSpec::new(
        format!("{prefix}.mlp.fc1.weight"),
        vec![2 * c, c],
        ParamInit::Uniform { fan_in: c },
    ));
    out.push(ParamSpec::new(format!("{prefix}.mlp.fc1.bias"), vec![2 * c], ParamInit::Zeros));
    out.push(ParamSpec::new(
        format!("{prefix}.mlp.fc2.weight"),
        vec![c, 2 * c],
        ParamInit::Uniform { fan_in: 2 * c },
    ));
    out.push(ParamSpec::new(format!("{prefix}.mlp.fc2.bias"), vec![c], ParamInit::Zeros));
}

pub(crate) fn conv_demands(out: &mut Vec<ParamSpec>, prefix: &str, o: usize, i: usize, k: usize) {
    out.push(ParamSpec::new(
        format!("{prefix}.weight"),
        vec![o, i, k, k],
        ParamInit::Uniform { fan_in: i * k * k },
    ));
    out.push(ParamSpec::new(format!("{prefix}.bias"), vec![o], ParamInit::Zeros));
}

/// Parameters of g_a, g_s, h_a and h_s in canonical order.
pub fn transform_demands(cfg: &NetworkConfig) -> Vec<ParamSpec> {
    let mut out = Vec::new();
    for net in [
        Network::MainAnalysis,
        Network::MainSynthesis,
        Network::HyperAnalysis,
        Network::HyperSynthesis,
    ] {
        for plan in stage_plans(cfg, net) {
            let conv = |out: &mut Vec<ParamSpec>| {
                conv_demands(out, &plan.resample_name(), plan.out_channels, plan.in_channels, plan.kernel)
            };
            if net.direction() == Direction::Analysis {
                conv(&mut out);
            }
            for j in 1..=plan.depth {
                rnab_demands(
                    &mut out,
                    &format!("{}.rnab{j}", plan.prefix()),
                    plan.block_width,
                    plan.heads,
                    plan.window,
                );
            }
            if net.direction() == Direction::Synthesis {
                conv(&mut out);
            }
        }
    }
    out
}

fn load_rnab(store: &WeightStore, prefix: &str, c: usize, heads: usize, window: usize) -> Result<RnabParams> {
    let side = 2 * window - 1;
    let ln = |n: &str| -> Result<LayerNormParams> {
        Ok(LayerNormParams {
            gamma: store.vector(&format!("{prefix}.{n}.weight"), c)?,
            beta: store.vector(&format!("{prefix}.{n}.bias"), c)?,
        })
    };
    let proj = |p: &str| store.linear(&format!("{prefix}.na.{p}"), c, c);
    let rpb = store.get(&format!("{prefix}.na.rpb"))?;
    if rpb.dims != [heads as u32, side as u32, side as u32] {
        return Err(Error::Shape(format!(
            "`{prefix}.na.rpb` has dims {:?}, expected [{heads}, {side}, {side}]",
            rpb.dims
        )));
    }
    let p = RnabParams {
        ln1: ln("ln1")?,
        na: NaParams {
            heads,
            window,
            q: proj("q")?,
            k: proj("k")?,
            v: proj("v")?,
            o: proj("o")?,
            rpb: rpb.data.clone(),
        },
        ln2: ln("ln2")?,
        fc1: store.linear(&format!("{prefix}.mlp.fc1"), 2 * c, c)?,
        fc2: store.linear(&format!("{prefix}.mlp.fc2"), c, 2 * c)?,
    };
    p.validate()?;
    Ok(p)
}

fn load_network(store: &WeightStore, cfg: &NetworkConfig, net: Network) -> Result<Vec<IcsaParams>> {
    stage_plans(cfg, net)
        .into_iter()
        .map(|plan| {
            let resample = store.conv(&plan.resample_name(), plan.out_channels, plan.in_channels, plan.kernel, 2)?;
            let blocks = (1..=plan.depth)
                .map(|j| {
                    load_rnab(
                        store,
                        &format!("{}.rnab{j}", plan.prefix()),
                        plan.block_width,
                        plan.heads,
                        plan.window,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(IcsaParams { resample, blocks })
        })
        .collect()
}

/// Resolved parameters of all four transform networks.
#[derive(Debug, Clone)]
pub struct TransformWeights {
    config: NetworkConfig,
    pub ga: Vec<IcsaParams>,
    pub gs: Vec<IcsaParams>,
    pub ha: Vec<IcsaParams>,
    pub hs: Vec<IcsaParams>,
}

impl TransformWeights {
    pub fn from_store(store: &WeightStore, cfg: &NetworkConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            config: cfg.clone(),
            ga: load_network(store, cfg, Network::MainAnalysis)?,
            gs: load_network(store, cfg, Network::MainSynthesis)?,
            ha: load_network(store, cfg, Network::HyperAnalysis)?,
            hs: load_network(store, cfg, Network::HyperSynthesis)?,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    fn network(&self, net: Network) -> &[IcsaParams] {
        match net {
            Network::MainAnalysis => &self.ga,
            Network::MainSynthesis => &self.gs,
            Network::HyperAnalysis => &self.ha,
            Network::HyperSynthesis => &self.hs,
        }
    }

    /// Shape a network produces for a given input shape, walking the same
    /// layer list the forward pass runs.
    pub fn output_shape(&self, net: Network, input: (usize, usize, usize)) -> (usize, usize, usize) {
        self.network(net)
            .iter()
            .fold(input, |s, p| p.output_shape(s, net.direction()))
    }

    fn run(&self, net: Network, x: &Tensor) -> Result<Tensor> {
        let mut stages = self.network(net).iter();
        let first = stages.next().expect("networks have at least one stage");
        let mut t = icsa_forward(x, first, net.direction())?;
        for p in stages {
            t = icsa_forward(&t, p, net.direction())?;
        }
        Ok(t)
    }

    /// `g_a`: `3×H×W → C4×H/16×W/16`; `H` and `W` must be multiples of 64.
    pub fn analysis_main(&self, x: &Tensor) -> Result<Tensor> {
        if x.channels() != 3 {
            return Err(Error::Shape(format!("g_a expects 3 channels, got {}", x.channels())));
        }
        if x.height() % PAD_MULTIPLE != 0 || x.width() % PAD_MULTIPLE != 0 {
            return Err(Error::Dimension(format!(
                "image {}x{} is not a multiple of {PAD_MULTIPLE}",
                x.width(),
                x.height()
            )));
        }
        self.run(Network::MainAnalysis, x)
    }

    /// `g_s`, clamped to `[0, 1]`.
    pub fn synthesis_main(&self, y_hat: &Tensor) -> Result<Tensor> {
        Ok(self.run(Network::MainSynthesis, y_hat)?.map(|v| v.clamp(0.0, 1.0)))
    }

    /// `h_a`: `C4×h×w → C6×h/4×w/4`.
    pub fn analysis_hyper(&self, y: &Tensor) -> Result<Tensor> {
        if y.height() % 4 != 0 || y.width() % 4 != 0 {
            return Err(Error::Dimension(format!(
                "latent {}x{} is not a multiple of 4",
                y.height(),
                y.width()
            )));
        }
        self.run(Network::HyperAnalysis, y)
    }

    /// `h_s`: `C6×h×w → P×4h×4w`, spatially aligned with `y`.
    pub fn synthesis_hyper(&self, z_hat: &Tensor) -> Result<Tensor> {
        self.run(Network::HyperSynthesis, z_hat)
    }
}
