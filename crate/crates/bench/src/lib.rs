//! Shared inputs for the benchmarks.

use cslab_core::closed_form::blowup_time;
use cslab_core::finite_gap::{make_resonant, synthesize_coeffs};
use cslab_core::{Complex64, FiniteGapData, HardyCoeffs};

/// Truncations exercised by the dense-matrix benchmarks.
pub const TRUNCATIONS: [usize; 3] = [64, 128, 256];

pub fn resonant_datum() -> FiniteGapData {
    make_resonant(0.0, 0, Complex64::new(0.5, 0.0)).expect("valid pole")
}

pub fn resonant_coeffs(n: usize) -> HardyCoeffs {
    synthesize_coeffs(&resonant_datum(), n)
}

/// Half the blow-up time of [`resonant_datum`].
pub fn half_blowup_time() -> f64 {
    blowup_time(resonant_datum().p()).expect("valid pole") / 2.0
}
