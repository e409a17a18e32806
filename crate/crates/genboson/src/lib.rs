//! Exact simulation and numerics for boson sampling with *generalized bosons*:
//! particle species that keep the standard cross-mode commutators but carry an
//! arbitrary diagonal single-mode commutator `[b, b†] = Σ_n F(n) |n⟩⟨n|`.
//!
//! The crate covers five layers:
//!
//! * [`algebra`] — species catalog (standard, pair-boson, spin-S, q-deformed,
//!   m-paraboson, custom tables), the bosonic factor `f(n)`, the commutator
//!   function `F(n)`, and ladder matrix elements.
//! * [`linalg`] — complex matrices, permanents (naive and Gray-code), a
//!   matching-sum Hafnian, repeated submatrices, and seeded Haar unitaries.
//! * [`fbs`] — exact Fock boson-sampling output probabilities, full output
//!   distributions, inverse-CDF sampling, and an independent
//!   polynomial-expansion amplitude oracle.
//! * [`gbs`] — generalized coherent states, Gaussian states, and
//!   Hafnian-formula threshold probabilities with a Taylor-coefficient oracle.
//! * [`dynamics`] — truncated Fock spaces, sparse quadratic Hamiltonians,
//!   exact/Krylov time evolution, the π/2 mode-mixing protocol, and the
//!   dilution-scaling experiment, plus platform coupling formulas.
//!
//! Start from the runnable examples, one per capability:
//!
//! ```text
//! cargo run --release -p genboson --example catalog
//! cargo run --release -p genboson --example hong_ou_mandel
//! cargo run --release -p genboson --example output_distribution
//! cargo run --release -p genboson --example exact_sampling
//! cargo run --release -p genboson --example gaussian_hafnian
//! cargo run --release -p genboson --example mode_mixing_dynamics
//! cargo run --release -p genboson --example dilution_scaling
//! ```
//!
//! The same functionality is scriptable through the thin `genboson` binary
//! (subcommands `catalog`, `prob`, `distribution`, `sample`, `dynamics`,
//! `scaling`, `gbs`); see [`cli`].

pub mod algebra;
pub mod cli;
pub mod dynamics;
pub mod fbs;
pub mod gbs;
mod krylov;
pub mod linalg;

pub use algebra::{BosonKind, GeneralizedBoson, LadderElements};
pub use dynamics::{FockSpace, FockState, SparseOperator};
pub use fbs::{Distribution, NumericalPolicy, OccupationVector};
pub use gbs::GaussianState;
pub use linalg::{ComplexMatrix, ModeUnitary};
