//! Radial pressureless Euler-Poisson flows with a quadratic confining
//! potential: the radial effective potential, its period function,
//! classification of initial data and characteristic simulation.

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bulk;
pub mod characteristic;
pub mod error;
pub mod initial_data;
pub mod io;
pub mod numerics;
pub mod period;
pub mod potential;
pub mod profile;

pub use error::{Error, Result};
pub use potential::{Dimension, EffectivePotential, NormalizedPotential, Potential, PotentialSpec};
