//! Spectral Barron scales at desk scale: sparse Fourier-atom functions on
//! the torus, multiplier forward maps with link-condition certification,
//! Monte-Carlo two-layer-network approximation, Barron-penalized Tikhonov
//! regularization, and the 2-D Radon sinogram-norm identity.

pub mod error;
pub mod nn;
pub mod pdo;
pub mod quad;
pub mod radon;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod tikhonov;

pub use error::{CoreError, Result};
pub use spectral::{bracket, Frequency, InterpolationTriple, SpectralFunction};
