//! Photon statistics of a weakly driven microwave cavity coupled to one or
//! two Kerr magnon modes.
//!
//! * [`model`]: parameters, Fock bases, Hamiltonians.
//! * [`weakdrive`]: few-excitation amplitude solve and g²(0).
//! * [`lindblad`]: full master-equation solver used as an oracle.
//! * [`optimal`]: closed-form blockade conditions and numeric optimum search.
//! * [`nonreciprocity`]: contrast ratios, parameter sweeps, level contours.
//! * [`verify`]: the numerical acceptance checks, shared by tests and the CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contour;
pub mod error;
pub mod linalg;
pub mod lindblad;
pub mod model;
pub mod nonreciprocity;
pub mod optimal;
pub mod sparse;
pub mod verify;
pub mod weakdrive;

pub use error::{Error, Result};
pub use model::{
    annihilation, build_basis, hamiltonian_eff, hamiltonian_rf, ComplexOperator, FockBasis, MagnonSpec,
    SweepParam, SystemSpec, C64,
};
