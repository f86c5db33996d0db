pub mod applications;
pub mod contour;
pub mod costmodel;
pub mod error;
pub mod fourier;
pub mod functions;
pub mod operators;
pub mod random;
pub mod spectral;

pub use applications::{run_application, AppOptions, Application, ConvergenceRecord};
pub use contour::ContourPlan;
pub use error::{PsfError, Result};
pub use fourier::{AccessMode, FourierPlan, Regime, SpectralProfile, TimeKernel};
pub use functions::FunctionSpec;
pub use operators::{DiracOperator, GridSpec};
pub use random::InstanceGenerator;
pub use spectral::{eig, eig_auto, DenseMatrix, SpectralDecomposition, StateVector};
