//! Anisotropic Rabi model toolkit for circuit QED.
//!
//! * [`operators`]: truncated qubit ⊗ resonator operator algebra
//! * [`arm_model`]: Hamiltonians in the three coupling parameterizations
//! * [`circuit`]: closed-form circuit quantization to model parameters
//! * [`lindblad`]: Liouvillian, steady state, linear response, time evolution
//! * [`spectra`]: transmission maps, dispersive shifts and Purcell rates
//!
//! Frequencies are linear (GHz) and times are in ns throughout.

pub mod arm_model;
pub mod circuit;
pub mod error;
pub mod lindblad;
pub mod linalg;
pub mod operators;
pub mod spectra;

pub use arm_model::{ArmParams, Coupling};
pub use error::{ArmError, Result};
pub use operators::{HilbertDims, Operator, C64};
