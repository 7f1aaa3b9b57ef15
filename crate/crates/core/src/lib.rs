//! Shot budgets, concentration analysis and resource estimates for quantum
//! kernel estimation with ZZ feature maps, on an exact statevector simulator.
//!
//! The library is organised bottom-up:
//!
//! * [`statevector`] and [`feature_map`] produce embedded states;
//! * [`kernels`] builds fidelity and projected Gram matrices;
//! * [`measurement`] samples them with finite shots and depolarizing noise;
//! * [`shots`] bounds the shots needed per entry and per dataset;
//! * [`concentration`] and [`characteristics`] fit scaling laws in `n`;
//! * [`resources`] turns shot counts into runtime and energy;
//! * [`dataset`] loads, synthesizes and prepares data.

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod cli;
pub mod concentration;
pub mod dataset;
pub mod error;
pub mod feature_map;
pub mod kernels;
pub mod measurement;
pub mod resources;
pub mod shots;
pub mod statevector;
pub mod stats;

pub use error::{Error, Result};
pub use feature_map::{embed, DataPoint, Entanglement, FeatureMapConfig};
pub use kernels::{gram_matrix, KernelFamily, KernelMatrix};
pub use measurement::NoiseModel;
pub use shots::{ShotBudget, ShotCount, SpreadTarget};
pub use statevector::{ReducedDensityMatrix, StateVector};
