//! Two-qubit entanglement and discord under classical static and
//! random-telegraph noise.

pub mod error;
pub mod evolver;
pub mod matcore;
pub mod noisegen;
pub mod qcorr;
pub mod quadrature;
pub mod runner;

pub use error::{Error, Result};
pub use evolver::{HamiltonianSpec, McSettings, Topology};
pub use matcore::{DensityMatrix, Mat2, Mat4, Subsystem};
pub use noisegen::{RtnSpec, StaticNoiseSpec};
pub use qcorr::{CorrelationReport, OptimizerSettings};
pub use runner::{Curve, CurveFeatures, Method, NoiseKind, ScenarioConfig};
