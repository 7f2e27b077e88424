//! Numerical laboratory for the Dean-Kawasaki martingale problem on the
//! unit torus: particle solutions, the dual Cole-Hopf semigroup, Laplace
//! duality, generating-function coefficient extraction and a naive SPDE
//! integrator.

pub mod dd;
pub mod duality;
pub mod error;
pub mod fourier;
pub mod particles;
pub mod pgf;
pub mod rng;
pub mod spde;
pub mod spectral;
pub mod stats;
pub mod torus;
pub mod vhj;

pub use error::{Error, PrecisionReport, Result};
pub use fourier::{carre_du_champ, CarreDuChamp, FourierFunction};
pub use particles::{EmpiricalMeasure, ParticlePath};
pub use rng::RngStream;
pub use torus::TorusDomain;
pub use vhj::{cole_hopf, VhjField};
