//! The rational finite-gap family
//! `u0(z) = e^{i theta} z^m beta_p(z) (a + c / (1 - conj(p) z))`
//! with the constraint `a conj(c) + |c|^2 / (1 - |p|^2) = 2`, and the exact
//! `2 x 2` matrices of `L_u` and `S*` on the model space spanned by
//! `e0 = 1/(1 - conj(p) z)` and `e1 = z/(1 - conj(p) z)^2`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::hardy::HardyCoeffs;
use crate::json;

/// Maximum admissible residual of the quadratic constraint.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// Validated parameters of a finite-gap initial datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFiniteGap", into = "RawFiniteGap")]
pub struct FiniteGapData {
    theta: f64,
    m: u32,
    p: Complex64,
    a: Complex64,
    c: Complex64,
    r: f64,
    rho: f64,
}

/// Unvalidated wire form of [`FiniteGapData`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawFiniteGap {
    pub theta: f64,
    pub m: u32,
    #[serde(with = "json::complex")]
    pub p: Complex64,
    #[serde(with = "json::complex")]
    pub a: Complex64,
    #[serde(with = "json::complex")]
    pub c: Complex64,
}

/// `[L_u | K_psi]` and `[S* | K_psi]` in the `(e0, e1)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreBlock {
    pub l_block: Matrix2<Complex64>,
    pub sstar_block: Matrix2<Complex64>,
    pub alpha: Complex64,
    pub beta: f64,
    pub kappa: f64,
}

impl TryFrom<RawFiniteGap> for FiniteGapData {
    type Error = LabError;

    fn try_from(raw: RawFiniteGap) -> Result<Self> {
        make_finite_gap(raw.theta, raw.m, raw.p, raw.a, raw.c)
    }
}

impl From<FiniteGapData> for RawFiniteGap {
    fn from(d: FiniteGapData) -> Self {
        RawFiniteGap {
            theta: d.theta,
            m: d.m,
            p: d.p,
            a: d.a,
            c: d.c,
        }
    }
}

fn check_pole(p: Complex64) -> Result<(f64, f64)> {
    let rho = p.norm();
    if !(rho > 0.0 && rho < 1.0) {
        return Err(LabError::PoleOutOfDisk(rho));
    }
    Ok((rho * rho, rho))
}

/// `|a conj(c) + |c|^2/(1 - r) - 2|`.
pub fn constraint_residual(p: Complex64, a: Complex64, c: Complex64) -> f64 {
    let r = p.norm_sqr();
    (a * c.conj() + c.norm_sqr() / (1.0 - r) - 2.0).norm()
}

pub fn make_finite_gap(theta: f64, m: u32, p: Complex64, a: Complex64, c: Complex64) -> Result<FiniteGapData> {
    let (r, rho) = check_pole(p)?;
    let residual = constraint_residual(p, a, c);
    if residual.is_nan() || residual > CONSTRAINT_TOL {
        return Err(LabError::ConstraintViolation { residual });
    }
    Ok(FiniteGapData {
        theta: theta.rem_euclid(std::f64::consts::TAU),
        m,
        p,
        a,
        c,
        r,
        rho,
    })
}

/// Resonant datum `2a + c = 0`; the phase `theta` is carried by `a`.
pub fn make_resonant(theta: f64, m: u32, p: Complex64) -> Result<FiniteGapData> {
    let (r, _) = check_pole(p)?;
    let a = Complex64::from_polar(((1.0 - r) / (1.0 + r)).sqrt(), theta);
    make_finite_gap(0.0, m, p, a, -2.0 * a)
}

/// Datum with real ratio `a / c = ratio` and `arg c = phi`.
///
/// Every solution of the constraint has this form; `ratio` must exceed
/// `-1/(1 - r)`. The resonant member is `ratio = -1/2`.
pub fn from_ratio(theta: f64, m: u32, p: Complex64, ratio: f64, phi: f64) -> Result<FiniteGapData> {
    let (r, _) = check_pole(p)?;
    let denom = ratio + 1.0 / (1.0 - r);
    if denom.is_nan() || denom <= 0.0 {
        return Err(LabError::InvalidArgument(format!(
            "ratio {ratio} must exceed -1/(1-|p|^2) = {}",
            -1.0 / (1.0 - r)
        )));
    }
    let c = Complex64::from_polar((2.0 / denom).sqrt(), phi);
    make_finite_gap(theta, m, p, c * ratio, c)
}

impl FiniteGapData {
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn p(&self) -> Complex64 {
        self.p
    }
    pub fn a(&self) -> Complex64 {
        self.a
    }
    pub fn c(&self) -> Complex64 {
        self.c
    }
    /// `|p|^2`
    pub fn r(&self) -> f64 {
        self.r
    }
    /// `|p|`
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `e^{i theta} a`, the coefficient seen by the core datum once the phase is absorbed.
    pub fn phased_a(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta) * self.a
    }

    pub fn phased_c(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta) * self.c
    }

    /// `|2a + c|`
    pub fn resonance_defect(&self) -> f64 {
        (2.0 * self.a + self.c).norm()
    }

    pub fn with_m(&self, m: u32) -> FiniteGapData {
        FiniteGapData { m, ..*self }
    }

    /// Closed-form `||u0||^2`, obtained from the Gram matrix of `(1, z e0, e0, e1)`.
    pub fn mass(&self) -> f64 {
        // w_0 = -(a + c) p and w_n = pbar^{n-1} (A + B n), A = a(1-r) - c r, B = c(1-r).
        let r = self.r;
        let w0 = -(self.a + self.c) * self.p;
        let big_a = self.a * (1.0 - r) - self.c * r;
        let big_b = self.c * (1.0 - r);
        // sum_{n>=1} r^{n-1} n^k for k = 0, 1, 2
        let s0 = 1.0 / (1.0 - r);
        let s1 = s0 * s0;
        let s2 = (1.0 + r) * s0 * s0 * s0;
        w0.norm_sqr() + big_a.norm_sqr() * s0 + 2.0 * (big_a * big_b.conj()).re * s1 + big_b.norm_sqr() * s2
    }
}

/// Coefficients of `e0 = 1/(1 - conj(p) z)`.
pub fn e0_coeffs(p: Complex64, n: usize) -> HardyCoeffs {
    let pb = p.conj();
    let mut acc = Complex64::new(1.0, 0.0);
    HardyCoeffs::from_fn(n, |_| {
        let out = acc;
        acc *= pb;
        out
    })
}

/// Coefficients of `e1 = z/(1 - conj(p) z)^2`, i.e. `n conj(p)^{n-1}`.
pub fn e1_coeffs(p: Complex64, n: usize) -> HardyCoeffs {
    let pb = p.conj();
    let mut pow = Complex64::new(1.0, 0.0);
    HardyCoeffs::from_fn(n, |k| {
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            let out = pow * k as f64;
            pow *= pb;
            out
        }
    })
}

fn synthesize_core(a: Complex64, c: Complex64, p: Complex64, n: usize, m: usize) -> HardyCoeffs {
    let r = p.norm_sqr();
    let pb = p.conj();
    let big_a = a * (1.0 - r) - c * r;
    let big_b = c * (1.0 - r);
    let mut pow = Complex64::new(1.0, 0.0);
    HardyCoeffs::from_fn(n, |k| {
        if k < m {
            return Complex64::new(0.0, 0.0);
        }
        let j = k - m;
        if j == 0 {
            -(a + c) * p
        } else {
            let out = pow * (big_a + big_b * j as f64);
            pow *= pb;
            out
        }
    })
}

/// Fourier coefficients `0..=n` of the datum.
///
/// Uses `beta_p = -p + (1 - r) z e0` and `beta_p e0 = -p e0 + (1 - r) e1`, so for
/// the core part `w_0 = -(a + c) p` and `w_j = conj(p)^{j-1} (a(1-r) - c r + c(1-r) j)`.
pub fn synthesize_coeffs(data: &FiniteGapData, n: usize) -> HardyCoeffs {
    synthesize_core(data.phased_a(), data.phased_c(), data.p, n, data.m as usize)
}

/// Exact core-block matrices.
pub fn core_block_matrices(data: &FiniteGapData) -> CoreBlock {
    let (p, a, c, r) = (data.p, data.a, data.c, data.r);
    let pb = p.conj();
    let denom = c * (1.0 - r);
    let alpha = 2.0 * p * (a + c) / denom;
    let beta_c = (2.0 * r * (a + c) - 2.0 * a - c * (1.0 - r)) / denom;
    let kappa_c = alpha * pb;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    CoreBlock {
        l_block: Matrix2::new(zero, alpha, pb, Complex64::new(beta_c.re, 0.0)),
        sstar_block: Matrix2::new(pb, one, zero, pb),
        alpha,
        beta: beta_c.re,
        kappa: kappa_c.re,
    }
}
