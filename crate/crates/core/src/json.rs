//! JSON shapes shared by configs and reports: complex numbers are `{"re": .., "im": ..}`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::LabError;
use crate::hardy::HardyCoeffs;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for JsonComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<JsonComplex> for Complex64 {
    fn from(z: JsonComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexVec(pub Vec<JsonComplex>);

impl From<HardyCoeffs> for ComplexVec {
    fn from(f: HardyCoeffs) -> Self {
        ComplexVec(f.into_vec().into_iter().map(JsonComplex::from).collect())
    }
}

impl TryFrom<ComplexVec> for HardyCoeffs {
    type Error = LabError;

    fn try_from(v: ComplexVec) -> Result<Self, Self::Error> {
        HardyCoeffs::new(v.0.into_iter().map(Complex64::from).collect())
    }
}

/// `#[serde(with = "complex")]` adapter for a single `Complex64` field.
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        JsonComplex::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        JsonComplex::deserialize(d).map(Complex64::from)
    }
}
