use thiserror::Error;

/// Where in the nested solve a non-finite value showed up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Inner,
    Outer,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stage::Inner => f.write_str("inner"),
            Stage::Outer => f.write_str("outer"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("lambda must exceed 1, got {0}")]
    LambdaTooSmall(f64),

    #[error("degenerate {block} block, PL modulus undefined")]
    DegenerateBlock { block: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite {what} in {stage} loop at iterate {iteration}")]
    NonFinite {
        stage: Stage,
        iteration: u64,
        what: &'static str,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
