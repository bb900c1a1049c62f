//! Learned image codec: attention-based transforms, a multistage context
//! model with checkerboard scheduling, and a range-coded bitstream.

pub mod bitstream;
pub mod codec;
pub mod config;
pub mod entropy;
pub mod error;
pub mod image;
pub mod mcm;
pub mod metrics;
pub mod nn;
pub mod ops;
pub mod selftest;
pub mod tensor;
pub mod transform;
pub mod weights;

pub use bitstream::{read_container, write_container, Container, Header};
pub use codec::{decode_image, encode_image, Model};
pub use config::{NetworkConfig, Slicing};
pub use error::{Error, Result};
pub use image::ImageBuffer;
pub use tensor::{Matrix, Tensor};
pub use weights::{seeded_init, WeightStore};
