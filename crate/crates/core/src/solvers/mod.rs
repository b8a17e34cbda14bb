//! The aggregation method and the baselines it is compared against.

mod algorithm1;
mod baselines;

pub use algorithm1::{
    algorithm1, reconstruct_weights, u_next, Algo1Config, Checkpoint, PointRecord, Schedule,
    StepRecord, Trace, TraceMode, STREAMING_THRESHOLD,
};
pub use baselines::{epoch_gd, erm, sgd, EpochGdParams, EpochGdResult, ErmResult, SgdResult};
