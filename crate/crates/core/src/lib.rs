//! Numerical workbench for diffeomorphism groups of the line.
//!
//! The generic layers (jets, series, Hermite cells, moduli, hulls) work over
//! any [`Scalar`]; the map-level machinery uses `f64`.

pub mod config;
pub mod diffeo;
pub mod error;
pub mod flow;
pub mod hermite;
pub mod hull;
pub mod jetcalc;
pub mod map;
pub mod mather;
pub mod modulus;
pub mod norms;
pub mod ode;
pub mod perfect;
pub mod scalar;
pub mod series;
pub mod suite;
pub mod smooth;

pub use config::Tolerances;
pub use diffeo::{Diffeo1, TailClass};
pub use error::{Error, Result};
pub use map::Map1;
pub use jetcalc::{compose_jets, invert_jet, CompositionTable, Jet};
pub use modulus::ConcaveModulus;
pub use scalar::Scalar;

pub type Jet64 = Jet<f64>;
pub type Jet32 = Jet<f32>;
pub type Modulus = ConcaveModulus<f64>;
pub type Modulus32 = ConcaveModulus<f32>;
