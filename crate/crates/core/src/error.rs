use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("basis has {basis} modes but the system needs {expected}")]
    ModeCountMismatch { basis: usize, expected: usize },

    #[error("mode index {index} out of range for a {n_modes}-mode basis")]
    InvalidMode { index: usize, n_modes: usize },

    #[error("operators live on different bases")]
    BasisMismatch,

    #[error("singular linear system at {context}")]
    Singular { context: String },

    #[error("g2 undefined: {0}")]
    Undefined(String),

    #[error("perfect blockade infeasible: (4*delta + 3*K)*K = {value:.6e} <= 0")]
    Infeasible { value: f64 },

    #[error("Kerr coefficient is zero; {0}")]
    ZeroKerr(&'static str),

    #[error("pole in blockade residual: delta_m' + 2K = 0")]
    ResidualPole,

    #[error("steady state not unique (smallest singular values {s0:.3e}, {s1:.3e})")]
    DegenerateNullSpace { s0: f64, s1: f64 },

    #[error("integration unstable at t = {time:.4}: {diagnostic}")]
    StepTooLarge { time: f64, diagnostic: String },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("optimizer: {0}")]
    Optimizer(String),
}

pub type Result<T> = std::result::Result<T, Error>;
