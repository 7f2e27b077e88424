//! Generating function of `X = αμ_t(A)` and extraction of its atom
//! probabilities `p_k`.

pub mod expansion;
pub mod generating;
pub mod limit;
pub mod monte_carlo;
pub mod occupation;
pub mod series;
pub mod verdict;

pub use expansion::{
    extract_coefficients_series, poisson_binomial, series_from_h, DivergenceFlag, ExtractionMethod, NegativityFlag,
    PgfExpansion, MAX_SERIES_ORDER,
};
pub use generating::{
    build_g, FnGenerating, GeneratingFunction, InitialMeasure, OccupationPgf, Polynomial, PowerLaw, WeightedAtoms,
};
pub use limit::{extract_coefficients_limit, LimitGrid};
pub use monte_carlo::{chi_square_test, monte_carlo_pgf, ChiSquareTest, MonteCarloPgf};
pub use occupation::{IntervalSet, OccupationFunction};
pub use verdict::{atomicity_verdict, log_log_slope, mass_probe, verdict_from_expansion, MassProbe, Verdict, VerdictReport};
