//! Averaging, resonant fixed-point analysis and long-time simulation for
//! planar isochronous oscillators under decaying oscillatory perturbations.

pub mod analysis;
pub mod averaging;
pub mod bench;
pub mod campaign;
pub mod cli;
pub mod error;
pub mod figures;
pub mod hashing;
pub mod integrate;
pub mod model;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
