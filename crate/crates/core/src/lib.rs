//! Numerical toolkit for the Fermi two-atom problem on discrete bosonic
//! systems: periodic harmonic chains and linear ion traps.
//!
//! Two two-level "atoms" sit on sites `A` and `B` of a quadratic bosonic
//! system and couple to the local displacement `q_n`. The crate computes
//!
//! * the mode decomposition `(ω_k, λ_nk)` of the chain and the trap ([`modes`]),
//! * the vacuum anticommutator/commutator functions and the emergent light
//!   cone ([`causality`]),
//! * the bare second-order swap amplitude split into its correlation and
//!   commutator parts ([`amplitude`]),
//! * dressed initial states and dressed amplitudes ([`dressing`]),
//! * the non-perturbative two-ion swap probability ([`ion`]),
//! * the site-resolved phonon cloud ([`cloud`]),
//! * and an exact truncated-Fock evolution used as ground truth ([`oracle`]).
//!
//! Units: `ħ = 1`; every frequency is an angular frequency.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod amplitude;
pub mod causality;
pub mod cloud;
pub mod dressing;
mod error;
pub mod ion;
pub mod kernels;
pub mod linalg;
pub mod modes;
pub mod opening;
pub mod oracle;
pub mod quadrature;
pub mod scenario;
pub mod spin;

pub use error::{Error, Result};
pub use modes::{ChainParams, ModeBasis, SystemKind, TrapParams};
pub use opening::OpeningFunction;
pub use scenario::Scenario;

pub use num_complex::Complex64;
