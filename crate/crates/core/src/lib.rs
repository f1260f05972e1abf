//! Hardy-space numerics for the focusing Calogero-Sutherland derivative NLS on the torus.

pub mod closed_form;
pub mod error;
pub mod explicit;
pub mod finite_gap;
pub mod hardy;
pub mod json;
pub mod lax;
pub mod oracle;
pub mod resonance;
pub mod verify;

pub use closed_form::{LimitProfile, PoleState};
pub use error::{LabError, Result};
pub use explicit::{ExplicitSolver, ResolventState};
pub use finite_gap::{CoreBlock, FiniteGapData};
pub use hardy::{HardyCoeffs, LaurentCoeffs, Shift};
pub use lax::{LaxMatrix, LaxSpectrum, Propagator};
pub use num_complex::Complex64;
pub use oracle::Trajectory;
pub use resonance::{Classification, SpectralData};
