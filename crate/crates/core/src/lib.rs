//! Generalized robustness of quantum states against non-convex free sets.
//!
//! A free set is a finite union of closed convex pieces. The crate computes
//! the generalized robustness against such unions, builds the multi-copy
//! witness families that certify it, and simulates the channel
//! discrimination tasks in which the robustness shows up as an advantage.
//!
//! Every numerical type is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`, which is what the tolerances quoted
//! in the docs assume.

pub mod discrimination;
pub mod error;
pub mod optim;
pub mod freesets;
pub mod io;
pub mod qcore;
pub mod robustness;
pub mod scalar;
pub mod witness;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix = qcore::Matrix<f64>;
pub type Hermitian = qcore::HermitianMatrix<f64>;
pub type Density = qcore::DensityMatrix<f64>;
pub type Bloch = qcore::BlochVector<f64>;
pub type ConvexFreeSet = freesets::ConvexFreeSet<f64>;
pub type FreeSet = freesets::FreeSet<f64>;
pub type Certificate = robustness::RobustnessCertificate<f64>;
pub type WitnessFamily = witness::WitnessFamily<f64>;
pub type ShiftedWitnessFamily = witness::ShiftedWitnessFamily<f64>;
pub type ChannelEnsemble = discrimination::ChannelEnsemble<f64>;
pub type Povm = discrimination::Povm<f64>;
