//! Fine structure of a neutral quantum-dot exciton in an in-plane magnetic
//! field.
//!
//! * [`model`]: exchange + Zeeman Hamiltonian, closed-form eigenstates,
//!   perturbative curvature of the bright splitting.
//! * [`spectra`]: polarization-resolved PL synthesis with seeded noise.
//! * [`extraction`]: peak finding, splitting fits, g-factor solving and
//!   crossing-field search.
//! * [`io`] and [`cli`]: CSV/JSON formats and the `finestruct` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod extraction;
pub mod io;
pub mod model;
pub mod params;
pub mod spectra;

pub use params::{DotParameters, ParamError, Polarization, MU_B};
