//! Numerical laboratory for quasifree (Gaussian) states of bosons and fermions
//! on truncated Fock spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`fock`]: concrete truncated Fock spaces, ladder operators and dense
//!   state arithmetic. Everything else is checked against it.
//! * [`gaussian`]: the `(γ, α, b)` data model, generalized one-particle
//!   density matrices and the purity characterizations.
//! * [`bogoliubov`]: Bogoliubov maps, their unitary implementation, Weyl
//!   operators and second quantization `Γ(C)`.
//! * [`wick`]: ladder-polynomial parsing and quasifree expectations
//!   (Pfaffian for fermions, pairing sums with first moments for bosons).
//! * [`representability`]: 2-pdm extraction, P/G/Q conditions and the
//!   generalized 2-pdm `Γ̂`.
//! * [`bhf`]: energy functionals and the variational solver over pure and
//!   mixed quasifree states.
//!
//! Conventions used throughout: modes are 0-based internally, the complex
//! conjugation is entrywise in the mode basis, `γ_ij = ω(a*_j a_i)`,
//! `α_ij = ω(a_j a_i)` and `b_i = ω(a_i)`.

pub mod bhf;
pub mod bogoliubov;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod json;
pub mod linalg;
pub mod representability;
pub mod states;
pub mod wick;

pub use error::{QfError, Result};
pub use fock::{FockOperator, FockVector, ModeSpace, Statistics};
pub use gaussian::GaussianData;
pub use bogoliubov::BogoliubovMap;
