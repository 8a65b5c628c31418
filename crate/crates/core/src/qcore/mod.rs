//! Dense complex linear algebra, Gell-Mann/Bloch coordinates, tensor powers
//! and seeded random states.

pub mod eigen;
pub mod gellmann;
pub mod linalg;
pub mod matrix;
pub mod random;
pub mod tensor;

pub use eigen::{eig_hermitian, Eigen};
pub use gellmann::{bloch_from_hermitian, bloch_from_state, gell_mann_basis, state_from_bloch, BlochVector, GellMannBasis};
pub use matrix::{DensityMatrix, HermitianMatrix, Matrix};
pub use random::{random_density, random_density_with, random_hermitian, random_pure, random_state, random_unitary, seeded_rng};
pub use tensor::{swap_operator, symmetrize, tensor_power, tensor_power_capped, DEFAULT_DIM_CAP};
