pub mod blocks;
pub mod catalog;
pub mod decay;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod matrix;
pub mod report;

pub use engine::{
    init_uniform, iterate, step, Engine, EngineParams, IterationState, MciRule, RankAxis,
    RunOutcome, StopReason, StoppingRule, Trajectory,
};
pub use error::{Error, Result};
pub use matrix::BipartiteMatrix;
