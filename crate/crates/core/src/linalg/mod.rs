//! Dense real linear algebra: tensors, pivoted LU, power iteration and the
//! Cayley map.

mod cayley;
mod lu;
mod spectral;
mod tensor;

pub use cayley::{cayley, cayley_generator, orthogonality_defect};
pub use lu::{solve, Lu};
pub use spectral::{power_iteration, spectral_norm, PowerIteration, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use tensor::{distance, dot, matmul, norm, Tensor};
