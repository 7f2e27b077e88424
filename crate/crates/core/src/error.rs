use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 8")]
    InvalidGrid(usize),

    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error(
        "alpha = {0} is not a positive integer; the martingale problem has no solution \
         for non-integer parameters, so there is nothing to sample"
    )]
    NonIntegerAlpha(f64),

    #[error("initial measure has {atoms} atoms but alpha = {alpha} requires exactly {alpha} atoms of weight 1/{alpha}")]
    AtomCountMismatch { alpha: usize, atoms: usize },

    #[error("{0}")]
    InvalidMeasure(String),

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("need at least {required} {what}, got {got}")]
    TooFew {
        what: &'static str,
        required: usize,
        got: usize,
    },

    #[error("series order {0} exceeds the supported maximum of 64")]
    SeriesOrder(usize),

    #[error("time step {dt} violates the diffusive stability bound {bound}")]
    Unstable { dt: f64, bound: f64 },

    #[error("coefficient extraction aborted: {0}")]
    PrecisionExhausted(PrecisionReport),
}

/// Diagnostic emitted when limit extraction runs out of working precision
/// before a coefficient stabilizes.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionReport {
    pub order: usize,
    pub level: usize,
    pub s: f64,
    /// Bound on the rounding noise of the rescaled remainder at `s`.
    pub noise_floor: f64,
    /// The last few extrapolated estimates of the coefficient.
    pub recent_estimates: Vec<f64>,
}

impl std::fmt::Display for PrecisionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "order {} did not stabilize by level {} (s = {:e}); remainder noise floor {:e}, recent estimates {:?}",
            self.order, self.level, self.s, self.noise_floor, self.recent_estimates
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require(cond: bool, name: &'static str, requirement: &'static str, value: f64) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            requirement,
            value,
        })
    }
}
