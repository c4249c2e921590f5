//! Minimal dense neural-network stack with explicit forward/backward passes.
//!
//! Each layer's forward returns whatever its backward needs; [`crate::model`]
//! chains them into the link predictor. All arithmetic is `f64`.

pub mod init;
pub mod layers;
pub mod loss;
pub mod optim;
pub mod tensor;

pub use init::{init_params, InitScheme};
pub use layers::{
    combine, combine_backward, dropout, gcn_forward, mean_aggregate, mean_aggregate_backward, CombineMode, GcnLayer,
    Linear,
};
pub use loss::{bce_with_logits, sigmoid};
pub use optim::{clip_grad_norm, Adam, LrSchedule};
pub use tensor::{Param, Tensor};
