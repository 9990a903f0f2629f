//! Cone-adapted shearlet frames on the periodic grid, anisotropic and dyadic
//! Triebel-Lizorkin norms, and numerical audits of the associated estimates.

pub mod error;
pub mod experiments;
pub mod fourier;
pub mod frame;
pub mod generators;
pub mod lattice;
pub mod spaces;
pub mod transform;

pub use error::{Error, Result};
pub use frame::{Frame, FrequencyGrid, SpectralWindow};
pub use lattice::{Band, Cone, ShearletIndex, System};
pub use transform::{CoefficientMap, PeriodicSignal};
