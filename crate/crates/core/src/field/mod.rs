//! Scalars, matrices and bases over R, C and H.

mod basis;
mod eigen;
mod matrix;
mod quaternion;
mod sample;

pub use basis::{
    ambient_dim, canonical_basis, coordinates, e_check, e_hat, e_hat_diag, imaginary_e_check,
    orthonormal_basis, pairs, BasisElement, BasisFamily, BasisKind,
};
pub use eigen::{balanced_normal_form, half_index, hermitian_eigen, BalancedForm, HermitianEigen};
pub use matrix::{frobenius_inner, FMatrix, MatrixJson};
pub use quaternion::{Field, Quaternion};
pub use sample::{
    balanced_diagonal, random_unitary, sample_lambdas, sample_orbit, sample_point, OrbitSample,
    Region,
};
