//! Attention blocks built from the tensor kernels.

pub mod attention;
pub mod icsa;
pub mod rnab;

pub use attention::{attention_weights, neighborhood_attention, NaParams};
pub use icsa::{icsa_forward, Direction, IcsaParams};
pub use rnab::{rnab_forward, LayerNormParams, RnabParams};
