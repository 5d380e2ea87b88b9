//! Free rotation groups built from Lipschitz quaternions, the exact
//! convergence rates of their sphere and ball averages, and finite
//! Koopman-operator computations that check those rates on the 2-sphere
//! and the 2-torus.
//!
//! Module map:
//!
//! - [`quaternion`], [`rotation`], [`generators`]: the symmetric generating
//!   set of `p + 1` rotations for a prime `p ≡ 1 mod 4`.
//! - [`words`]: reduced words, word-metric spheres and balls, exact
//!   evaluation and finite-radius freeness certificates.
//! - [`spectral`]: Hecke polynomials, the Harish-Chandra function of the
//!   `(q+1)`-regular tree and the regular-representation norms.
//! - [`harmonic`], [`koopman`]: exact Koopman blocks on spherical harmonics.
//! - [`torus`]: windowed Koopman operators on the characters of the 2-torus.

pub mod error;
pub mod exact;
pub mod generators;
pub mod harmonic;
pub mod jacobi;
pub mod koopman;
pub mod quaternion;
pub mod rotation;
pub mod spectral;
pub mod torus;
pub mod words;

pub use error::{Error, Result};
pub use generators::{build_generator_set, GeneratorSet};
pub use quaternion::LipschitzQuaternion;
pub use rotation::ExactRotation;
pub use spectral::Shape;
pub use words::{Word, WordGroup};
