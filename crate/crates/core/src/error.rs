use thiserror::Error;

/// Errors raised by image operations and the ciphers built on them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected_h}x{expected_w}, got {found_h}x{found_w}")]
    ShapeMismatch {
        expected_h: usize,
        expected_w: usize,
        found_h: usize,
        found_w: usize,
    },

    #[error("invalid dimensions {height}x{width} for {pixels} pixels")]
    InvalidDimensions {
        height: usize,
        width: usize,
        pixels: usize,
    },

    #[error("image is {height}x{width}, at least {min}x{min} is required")]
    TooSmall {
        height: usize,
        width: usize,
        min: usize,
    },

    #[error("the cipher requires a square image (M = N), got {height}x{width}")]
    NotSquare { height: usize, width: usize },

    #[error("scrambling region {region}x{region} does not fit a {height}x{width} image")]
    RegionTooLarge {
        region: usize,
        height: usize,
        width: usize,
    },

    #[error("linear combination needs at least one image")]
    EmptyCombination,

    #[error("{coeffs} coefficients given for {images} images")]
    CoefficientCount { images: usize, coeffs: usize },

    #[error("malformed PGM ({field}): {reason}")]
    Pgm { field: &'static str, reason: String },

    #[error("invalid master key: {0}")]
    Key(String),

    #[error("round count {rounds} is below the minimum of {min}")]
    Rounds { rounds: usize, min: usize },

    #[error("filter mask is not invertible on {height}x{width} images")]
    SingularFilter { height: usize, width: usize },

    #[error("pixel sum changed while inverting round {round}: {expected} before, {found} after")]
    SumInvariant {
        round: usize,
        expected: u64,
        found: u64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
