//! Discrete-measure diagnostics: ball, tube and sector masses, Riesz
//! energies, dimension estimators and explicit scale constants.

mod boxdim;
mod constants;
mod energy;
mod fit;
mod mass;

pub use boxdim::*;
pub use constants::*;
pub use energy::*;
pub use fit::*;
pub use mass::*;
