//! Solution through the explicit formula
//! `u(t, z) = <(I - z Sigma_t*)^{-1} u0, 1>`, `Sigma_t* = e^{-it} e^{-2itL} S*`,
//! on modes `0..=N`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::hardy::HardyCoeffs;
use crate::lax::{LaxMatrix, LaxSpectrum};

/// Condition estimate beyond which a pointwise solve is rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// `e^{-it} U(t) S*` with `U(t) = exp(-2itL)`. Column `k` is `e^{-it}` times column
/// `k - 1` of `U(t)`; column 0 vanishes.
pub fn sigma_matrix(spec: &LaxSpectrum, t: f64) -> DMatrix<Complex64> {
    let u = spec.propagator(t).matrix;
    let n = u.nrows();
    let phase = Complex64::from_polar(1.0, -t);
    DMatrix::from_fn(n, n, |j, k| {
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            phase * u[(j, k - 1)]
        }
    })
}

/// Datum together with its Lax spectrum, so that many times share one eigensolve.
#[derive(Debug, Clone)]
pub struct ExplicitSolver {
    u0: HardyCoeffs,
    lax: LaxMatrix,
    spectrum: LaxSpectrum,
}

/// The explicit-formula operator at a fixed physical time.
#[derive(Debug, Clone)]
pub struct ResolventState {
    pub u0: HardyCoeffs,
    pub lax: LaxMatrix,
    pub t: f64,
    pub sigma_matrix: DMatrix<Complex64>,
}

/// Coefficients from the Neumann series plus the size of the first omitted iterate.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub coeffs: HardyCoeffs,
    /// `||(Sigma_t*)^{M+1} u0||`
    pub tail: f64,
}

/// The same reconstruction at truncations `N` and `2N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementCheck {
    pub truncation: usize,
    pub max_diff: f64,
    pub flagged: bool,
}

impl ExplicitSolver {
    pub fn new(u0: HardyCoeffs) -> Result<Self> {
        let lax = LaxMatrix::build(&u0);
        let spectrum = lax.spectrum()?;
        Ok(Self { u0, lax, spectrum })
    }

    pub fn u0(&self) -> &HardyCoeffs {
        &self.u0
    }

    pub fn lax(&self) -> &LaxMatrix {
        &self.lax
    }

    pub fn spectrum(&self) -> &LaxSpectrum {
        &self.spectrum
    }

    pub fn state(&self, t: f64) -> ResolventState {
        ResolventState {
            u0: self.u0.clone(),
            lax: self.lax.clone(),
            t,
            sigma_matrix: sigma_matrix(&self.spectrum, t),
        }
    }

    /// Modes `0..=N` of `u(t)` for each requested time.
    pub fn coeffs_at(&self, times: &[f64]) -> Vec<HardyCoeffs> {
        let n = self.u0.truncation();
        times
            .par_iter()
            .map(|&t| reconstruct_coeffs(&self.state(t), n).expect("M = N is admissible"))
            .collect()
    }
}

impl ResolventState {
    pub fn new(u0: HardyCoeffs, t: f64) -> Result<Self> {
        Ok(ExplicitSolver::new(u0)?.state(t))
    }

    pub fn truncation(&self) -> usize {
        self.u0.truncation()
    }

    pub fn apply_sigma(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.sigma_matrix * v
    }
}

/// Pointwise value `w[0]` where `(I - z Sigma) w = u0`.
pub fn evaluate(state: &ResolventState, z: Complex64) -> Result<Complex64> {
    let mod_z = z.norm();
    if mod_z > 1.0 + 1e-15 || !mod_z.is_finite() {
        return Err(LabError::OutsideDisk { re: z.re, im: z.im });
    }
    let n = state.sigma_matrix.nrows();
    let a = DMatrix::<Complex64>::identity(n, n) - &state.sigma_matrix * z;
    let norm_a = one_norm(&a);
    let lu = a.lu();
    let inv = lu
        .try_inverse()
        .ok_or(LabError::IllConditioned { cond: f64::INFINITY })?;
    let cond = norm_a * one_norm(&inv);
    if cond.is_nan() || cond >= CONDITION_LIMIT {
        return Err(LabError::IllConditioned { cond });
    }
    let rhs = DVector::from_column_slice(state.u0.as_slice());
    let w = inv * rhs;
    Ok(w[0])
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Coefficient `n` is the first entry of `Sigma^n u0`, for `n = 0..=M`.
pub fn reconstruct_coeffs(state: &ResolventState, m: usize) -> Result<HardyCoeffs> {
    Ok(reconstruct_with_tail(state, m)?.coeffs)
}

pub fn reconstruct_with_tail(state: &ResolventState, m: usize) -> Result<Reconstruction> {
    if m > state.truncation() {
        return Err(LabError::InvalidArgument(format!(
            "requested {m} coefficients beyond truncation {}",
            state.truncation()
        )));
    }
    let mut v = DVector::from_column_slice(state.u0.as_slice());
    let mut out = Vec::with_capacity(m + 1);
    for _ in 0..=m {
        out.push(v[0]);
        v = state.apply_sigma(&v);
    }
    Ok(Reconstruction {
        coeffs: HardyCoeffs::new(out)?,
        tail: v.norm(),
    })
}

/// Reconstructs modes `0..=n` from `u0` truncated at `n` and at `2n` (the datum must be
/// supplied at `2n`), flagging disagreement above `10 * tol`.
pub fn refinement_check(u0_fine: &HardyCoeffs, t: f64, tol: f64) -> Result<RefinementCheck> {
    let fine_n = u0_fine.truncation();
    if fine_n < 2 || !fine_n.is_multiple_of(2) {
        return Err(LabError::InvalidArgument(format!(
            "fine truncation {fine_n} must be even and at least 2"
        )));
    }
    let n = fine_n / 2;
    let coarse = ResolventState::new(u0_fine.resized(n), t)?;
    let fine = ResolventState::new(u0_fine.clone(), t)?;
    let a = reconstruct_coeffs(&coarse, n)?;
    let b = reconstruct_coeffs(&fine, n)?;
    let max_diff = a.max_abs_diff(&b);
    Ok(RefinementCheck {
        truncation: n,
        max_diff,
        flagged: max_diff > 10.0 * tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn smooth_datum(seed: u64, n: usize) -> HardyCoeffs {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        HardyCoeffs::from_fn(n, |k| {
            let d = 0.5f64.powi(k as i32);
            c(rng.random_range(-1.0..1.0) * d, rng.random_range(-1.0..1.0) * d)
        })
    }

    #[test]
    fn time_zero_reproduces_power_series() {
        let u0 = smooth_datum(1, 64);
        let st = ResolventState::new(u0.clone(), 0.0).unwrap();
        for z in [c(0.3, 0.2), c(-0.5, 0.6), Complex64::from_polar(0.95, 2.0)] {
            let got = evaluate(&st, z).unwrap();
            assert!((got - u0.eval_disk(z).unwrap()).norm() < 1e-10);
        }
        let rec = reconstruct_coeffs(&st, 64).unwrap();
        assert!(rec.max_abs_diff(&u0) < 1e-12);
    }

    #[test]
    fn plane_wave() {
        let u0 = HardyCoeffs::monomial(32, 1);
        for t in [0.1, 1.3, 7.0] {
            let st = ResolventState::new(u0.clone(), t).unwrap();
            for z in [c(0.2, 0.1), Complex64::from_polar(0.9, -1.0)] {
                let want = Complex64::from_polar(1.0, -t) * z;
                assert!((evaluate(&st, z).unwrap() - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn mean_invariance_and_contraction() {
        let u0 = smooth_datum(7, 48);
        let solver = ExplicitSolver::new(u0.clone()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for t in [0.0, 0.4, 2.5, 11.0] {
            let st = solver.state(t);
            let rec = reconstruct_coeffs(&st, 10).unwrap();
            assert_eq!(rec.get(0), u0.get(0));
            for _ in 0..5 {
                let v = DVector::from_fn(49, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                let sv = st.apply_sigma(&v);
                let defect = sv.norm_squared() - (v.norm_squared() - v[0].norm_sqr());
                assert!(defect.abs() < 1e-12 * v.norm_squared());
            }
        }
    }

    #[test]
    fn rejects_points_outside_disk() {
        let st = ResolventState::new(HardyCoeffs::zeros(4), 0.5).unwrap();
        assert!(matches!(evaluate(&st, c(1.5, 0.0)), Err(LabError::OutsideDisk { .. })));
        let st = ResolventState::new(HardyCoeffs::monomial(4, 1), 0.5).unwrap();
        assert!(reconstruct_coeffs(&st, 5).is_err());
    }

    #[test]
    fn refinement_of_polynomial_data_is_clean() {
        let u0 = smooth_datum(3, 8).resized(64);
        let chk = refinement_check(&u0, 0.8, 1e-10).unwrap();
        assert!(!chk.flagged, "{chk:?}");
    }
}
