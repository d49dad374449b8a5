//! One-dimensional two-speed lattice gases for the Burgers equation.
//!
//! A site of the lattice holds two particle channels, one moving right (`+`)
//! and one moving left (`-`), with occupation probabilities `p_+` and `p_-`.
//! Each time step applies a site-local collision term `Ω(p_+, p_-)` followed
//! by streaming to the neighbouring sites:
//!
//! ```text
//! p_±(x ± δx, t + δt) = p_±(x, t) ± Ω(p_+, p_-)
//! ```
//!
//! Three collision rules are implemented ([`CollisionModel`]): the classical
//! three-bit rule biased by a random bit of mean `α`, its degenerate two-bit
//! special case, and a two-qubit rule whose collision term is the expectation
//! value of number operators after a conservative unitary gate. All three
//! conserve the site density `ρ = p_+ + p_-`, whose coarse-grained dynamics
//! is a Burgers-type equation with tunable sound speed and viscosity.
//!
//! The crate provides four levels of description and the tools to cross-check
//! them against each other:
//!
//! * [`field`] / [`collision`] — the mesoscopic (lattice-Boltzmann) evolution
//!   of occupation probabilities;
//! * [`micro`] — stochastic bit-level realizations, ensemble averaging, and
//!   shot-noise measurement;
//! * [`theory`] — equilibria, collision Jacobians, transport coefficients,
//!   and the coefficient functions of the effective macroscopic equation;
//! * [`pde`] — explicit finite-difference integration of the macroscopic
//!   targets, used as a validation reference;
//! * [`compare`] — profile norms and empirical coefficient fitting.

pub mod collision;
pub mod compare;
pub mod error;
pub mod field;
pub mod grid;
pub mod micro;
pub mod pde;
pub mod rng;
pub mod theory;

pub use collision::{CollisionModel, UnitaryGate};
pub use error::{Error, Result};
pub use field::{DensityProfile, OccupancyField, SplitMode};
pub use grid::GridSpec;
