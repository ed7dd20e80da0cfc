use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("determinant space of {0} exceeds the 2^26 limit")]
    DimensionOverflow(usize),
    #[error("excitation rank {rank} exceeds the {n_elec} active electrons")]
    RankTooHigh { rank: usize, n_elec: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("exponential action did not converge (residual {residual:e})")]
    ExpmvNotConverged { residual: f64 },
    #[error("invalid method configuration: {0}")]
    Method(String),
    #[error("metric is numerically singular")]
    SingularMetric,
    #[error("frequency {omega} is within 1e-6 of excitation energy {omega_k}")]
    NearResonance { omega: f64, omega_k: f64 },
    #[error("shifted response matrix is singular at frequency {0}")]
    SingularResponse(f64),
    #[error("{block} block of A is non-Hermitian by {violation:e}")]
    NonHermitian { block: &'static str, violation: f64 },
    #[error("eigensolver failed: {0}")]
    Eigen(String),
}

pub type Result<T> = core::result::Result<T, Error>;
