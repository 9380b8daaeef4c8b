use crate::mdp::MdpViolation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("discount factor {gamma} outside {expected}")]
    InvalidDiscount { gamma: f64, expected: &'static str },

    #[error("horizon must be at least 1, got {0}")]
    InvalidHorizon(usize),

    #[error("parameter `{name}` must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{what} index {index} out of range (< {bound} required)")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("reward {reward} outside [0, {r_max}]")]
    RewardOutOfRange { reward: f64, r_max: f64 },

    #[error("invalid MDP: {}", format_violations(.0))]
    InvalidMdp(Vec<MdpViolation>),

    #[error("weights invalid: {0}")]
    InvalidWeights(String),

    #[error("MDP set must contain at least one member")]
    EmptySet,

    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("instance too large: estimated size {estimated} exceeds limit {limit}")]
    InstanceTooLarge { estimated: u64, limit: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_violations(violations: &[MdpViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
