//! Grassmann algebras, supermatrices, superprojective spaces and the
//! moment-map matrices of balanced embeddings.

pub mod balance;
pub mod cli;
pub mod closed_form;
pub mod error;
pub mod even_linalg;
pub mod exec;
pub mod grassmann;
pub mod integrate;
pub mod projective;
pub mod random;
pub mod supermatrix;

pub use error::{Error, Result};
pub use exec::Execution;
pub use grassmann::{AlgebraContext, Complex, EvenElement, Multivector, OddElement, Parity};
pub use projective::{AffineChartPoint, ProjectivePoint};
pub use supermatrix::SuperMatrix;
