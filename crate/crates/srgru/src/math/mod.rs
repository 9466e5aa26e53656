//! Dense linear algebra, stable activations, parameter storage, seeded RNG,
//! and the finite-difference gradient oracle.

pub mod check;
pub mod matrix;
pub mod ops;
pub mod rng;
pub mod store;

pub use check::{finite_diff_grad, relative_error, DEFAULT_EPS};
pub use matrix::Matrix;
pub use ops::{add, add_assign, dot, hadamard, sigmoid, softmax, tanh, ONE_MINUS};
pub use rng::Rng;
pub use store::ParamStore;
