//! Truncated Fock-space simulation of conditional state preparation with a
//! cross-Kerr coupling.
//!
//! Two coherent modes `a` and `b` pick up a photon-number dependent phase
//! `exp(i γ n_a n_b)`. Mode `b` is measured with a homodyne detector (outcome
//! `x` of the quadrature `(b + b†)/√2`), which leaves mode `a` in a
//! photon-number squeezed, crescent-shaped state. An outcome-dependent
//! displacement then pulls the conditional states back onto a common output,
//! so the mixture over many runs stays close to pure.
//!
//! The crate is `no_std` (it needs `alloc`). Enable `std` for
//! `std::error::Error` integration and `parallel` to spread grid work over a
//! rayon pool. Results are bit-identical with and without `parallel`.
//!
//! Conventions: `x̂ = (a + a†)/√2`, `p̂ = (a - a†)/(√2 i)`, vacuum quadrature
//! variance ½, Wigner functions normalized to `∫∫ W dx dp = 1`.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;

pub mod density;
pub mod ensemble;
pub mod fock;
pub mod observables;
pub mod protocol;
pub mod special;
pub mod wigner;

pub use num_complex::Complex64;

pub use density::DensityMatrix;
pub use ensemble::{ensemble_state, ensemble_state_converged, EnsembleState, XGrid};
pub use error::{Error, Result};
pub use fock::{
    choose_dim, coherent_fock, coherent_fock_with_tol, displacement_operator, fock_basis,
    number_moments, FockOperator, FockVector, NumberMoments,
};
pub use observables::{
    photon_statistics, purity, quadrature_variance, squeezing_factor, PhotonStatistics,
    QuantumState,
};
pub use protocol::{
    conditional_state_approx, conditional_state_exact, displacement_param, fidelity_profile,
    homodyne_overlap, oracle_conditional_state, outcome_density, output_state, Displacement,
    FidelityReference, ProtocolParams,
};
pub use wigner::{negativity_volume, quadrature_density, wigner, GridSpec, WignerGrid};

/// Default tail tolerance for truncated physical states.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Default hard-fail threshold for norm lost to truncation.
pub const DEFAULT_LEAK_TOL: f64 = 1e-6;
