use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("loss of parametrization: dphi = {value:e} at cell {cell} (t = {time})")]
    ParametrizationLoss { cell: usize, value: f64, time: f64 },

    #[error("non-positive Icos = {value:e} at interior node {node}")]
    InvalidProfile { node: usize, value: f64 },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("singular linear system at row {row}")]
    Singular { row: usize },

    #[error("degree of nonlinearity undefined: F(mu) = 0")]
    ZeroCoupling,

    #[error("solution blows up near t = {time}")]
    BlowUp { time: f64 },

    #[error("sign change of the mode coefficient inside the fit window")]
    Oscillatory,

    #[error("poor exponential fit: R^2 = {r_squared}")]
    PoorFit { r_squared: f64 },

    #[error("fit window holds {points} samples, need at least 3")]
    TooFewSamples { points: usize },
}
