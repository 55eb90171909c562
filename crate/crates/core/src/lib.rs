//! Single-photon scattering by a two-level emitter at the centre of a
//! rectangular waveguide, with every coupled TM channel kept exactly.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod modes;
pub mod numerics;
pub mod scattering;
pub mod self_energy;
pub mod spectra;

pub use error::{Error, Result};
