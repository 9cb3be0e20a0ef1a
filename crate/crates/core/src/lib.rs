//! Learning Lipschitz-minimal interpolants with certified Lipschitz-bounded
//! networks.
//!
//! The crate is generic over the floating-point type through [`Scalar`]; the
//! `*64` aliases at the root fix it to `f64`, which is what the command-line
//! tool and the experiments use.

pub mod autodiff;
pub mod bounds;
pub mod data;
pub mod dynamics;
pub mod error;
pub mod extension;
pub mod layers;
pub mod linalg;
pub mod map;
pub mod network;
pub mod rng;
pub mod scalar;
pub mod training;

pub use error::{Error, Result};
pub use linalg::Tensor;
pub use map::BatchMap;
pub use scalar::Scalar;

pub type Tensor64 = Tensor<f64>;
pub type Domain64 = data::Domain<f64>;
pub type Dataset64 = data::LabeledDataset<f64>;
pub type LipNet64 = network::LipNet<f64>;
pub type MlpNet64 = network::MlpNet<f64>;
pub type Model64 = network::Model<f64>;
pub type Extension64 = extension::LipschitzExtension<f64>;
