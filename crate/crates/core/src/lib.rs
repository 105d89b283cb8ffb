//! Periodic geometric Pitman transforms, the jointly invariant measures they
//! generate for the periodic semi-discrete stochastic Burgers system and the
//! periodic KPZ horizon, the associated chains and SDE integrators, heat-kernel
//! utilities, and a statistical verification harness.

pub mod cyclic;
pub mod dynamics;
pub mod error;
pub mod kernels;
pub mod numeric;
pub mod rng;
pub mod samplers;
pub mod verify;

pub use cyclic::{CyclicVector, SlopedFamily};
pub use error::{Error, Result};
pub use rng::RngStream;
pub use samplers::{BridgeFamily, BridgePath, McmcConfig};
