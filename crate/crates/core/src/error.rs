use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid hyper-edge shape: {0}")]
    InvalidShape(String),

    #[error("invalid intensity measure: {0}")]
    InvalidMeasure(String),

    #[error("symmetry orbit assigns conflicting weights {first} and {second} to shape {shape}")]
    WeightConflict {
        shape: String,
        first: f64,
        second: f64,
    },

    #[error("malformed measure specification: {0}")]
    Spec(String),

    #[error("window needs about {estimate} {what}, over the budget of {budget}")]
    TooLarge {
        what: &'static str,
        estimate: u128,
        budget: u128,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("vertex {0} lies outside the window")]
    OutsideWindow(String),

    #[error("partition error: {0}")]
    Partition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
