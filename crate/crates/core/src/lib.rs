//! Nonlocal Jordan-Moore-Gibson-Thompson wave equations with two memory kernels.

pub mod error;
pub mod experiments;
pub mod grid;
pub mod kernels;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use kernels::{Kernel, KernelPair, ScenarioTag};
pub use solver::{InitialData, ScenarioConfig, Trajectory};
pub use spectral::{Domain, ModalField, NonlinearityMode};
