//! Multistage context model: four channel groups coded in sequence, each
//! with a checkerboard-style spatial schedule.

pub mod codec;
pub mod context;
pub mod schedule;
pub mod slice;
pub mod weights;

pub use codec::{mcm_decode, mcm_encode, progressive_decode, McmDecoded, McmEncoded, StepTrace};
pub use context::{stage_entropy_params, StageContext};
pub use schedule::{gcp_masks, GcpSchedule, StepMask, STAGE_STEPS};
pub use slice::{cosine_slice, linear_slice, SliceSpec};
pub use weights::{mcm_demands, McmWeights, StageNets};
