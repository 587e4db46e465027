//! Numerical verification of the sphere covering inequality and the radial
//! mean field machinery around it.

pub mod error;
pub mod kernel;
pub mod meanfield;
pub mod ode;
pub mod quadrature;
pub mod bol;
pub mod radial_core;
pub mod rearrange;
pub mod sci;
pub mod transforms;
pub mod tridiag;

pub use error::{Error, Result};
pub use kernel::KernelSpec;
pub use quadrature::Quadrature;
pub use radial_core::{
    LiouvilleBubble, RadialField, RadialGrid, RadialProfile, EIGHT_PI, FOUR_PI,
};
