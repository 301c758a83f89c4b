//! Recursive multidimensional smoothing filters built from exponentially
//! weighted least-squares polynomial fits, and a two-stage enhance-before-detect
//! pipeline for dim point targets in correlated clutter.
//!
//! * [`basis`]: discrete Laguerre (causal) and two-sided orthonormal bases.
//! * [`synth`]: difference-equation coefficients, responses and design metrics.
//! * [`engine`]: streaming 1-D, separable spatial and temporal recursion.
//! * [`pipeline`]: background subtraction, Laguerre-spectrum power accumulation,
//!   and velocity estimation.
//! * [`scenario`]: synthetic clutter/target scenes, SNR metrics and a
//!   matched-filter baseline.
//! * [`io`]: frame file format and CSV helpers shared with the CLI.

pub mod basis;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod io;
pub mod pipeline;
mod poly;
pub mod scenario;
pub mod synth;

pub use basis::{AlphaMatrix, BasisSpec, Sidedness};
pub use engine::{Frame, FrameRole};
pub use error::{Error, Result};
pub use pipeline::{LaguerreSpectrum, Omega, PipelineConfig};
pub use scenario::{GroundTruth, ScenarioConfig};
pub use synth::{FilterSpec, LdeCoeffs, RationalTf, Realization, Role};
