use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 2")]
    InvalidGrid(usize),
    #[error("shear {shear} out of range for scale {j}")]
    ShearOutOfRange { j: u32, shear: i64 },
    #[error("scale {j} exceeds grid capacity {j_max}")]
    ScaleExceedsGrid { j: u32, j_max: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
