//! Verification engine for the action of Sturm's operator on Maass-shifted
//! Siegel cusp forms.
//!
//! The crate computes, and cross-checks against independent numerical
//! oracles, the ingredients of the phantom term produced by Sturm's operator
//! at weight `κ = m + 1`:
//!
//! * [`exterior`]: compound matrices `M^[q]`, the `⊓` product and the
//!   `trace((Y^{1/2} T Y^{1/2})^[q])` reduction;
//! * [`special`]: half-step Pochhammer products, `Γ_m`, the normalisation
//!   `c(m, κ)`, the polynomial `P_m(s, z)` and the exact `s → 0` limit;
//! * [`maass`]: half-integral forms, Fourier expansions and the closed-form
//!   action of `det(∂_Z)` and the Maass shift operator;
//! * [`sturm`]: closed-form Sturm coefficients, the phantom coefficient and
//!   the Monte Carlo Sturm integral;
//! * [`cone`]: importance-sampled integration over the positive-definite cone
//!   with the invariant measure;
//! * [`finite_diff`]: finite-difference oracles for symmetric-matrix
//!   derivative operators.

pub mod cone;
pub mod error;
pub mod exterior;
pub mod finite_diff;
pub mod maass;
pub mod matrix;
pub mod random;
pub mod special;
pub mod sturm;

pub use error::{Error, Result};
pub use matrix::{SiegelPoint, SymmetricMatrix};
