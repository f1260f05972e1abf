//! Truncated Hardy-space arithmetic on the torus.
//!
//! A function `f(z) = sum_{n >= 0} f_n z^n` is stored through its first `N + 1`
//! Fourier coefficients. Pairings use the normalized convention
//! `<f, g> = sum_n f_n conj(g_n)`, so the constant function has unit norm.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::json::ComplexVec;

/// Default truncation order for Hardy-space vectors.
pub const DEFAULT_TRUNCATION: usize = 256;

/// Coefficients `f_0, ..., f_N` of a truncated Hardy-space function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexVec", into = "ComplexVec")]
pub struct HardyCoeffs {
    coeffs: Vec<Complex64>,
}

/// Coefficients `f_{-N}, ..., f_N` of a trigonometric polynomial on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentCoeffs {
    coeffs: Vec<Complex64>,
    half_width: usize,
}

/// Direction of the shift operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    /// `S f = z f`, top mode dropped.
    Forward,
    /// `S* f = (f - f(0)) / z`.
    Adjoint,
}

impl HardyCoeffs {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(LabError::NonFinite);
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(truncation: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); truncation + 1],
        }
    }

    pub fn from_fn(truncation: usize, f: impl FnMut(usize) -> Complex64) -> Self {
        Self {
            coeffs: (0..=truncation).map(f).collect(),
        }
    }

    /// The monomial `z^k` at truncation `N`.
    pub fn monomial(truncation: usize, k: usize) -> Self {
        Self::from_fn(truncation, |n| {
            if n == k {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Truncation order `N` (the vector holds `N + 1` modes).
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn get(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    /// Resize to a new truncation, zero-padding or dropping top modes.
    pub fn resized(&self, truncation: usize) -> Self {
        Self::from_fn(truncation, |n| self.get(n))
    }

    /// Squared L2 norm by Parseval.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn inner_product(&self, other: &HardyCoeffs) -> Result<Complex64> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(LabError::TruncationMismatch {
                left: self.truncation(),
                right: other.truncation(),
            });
        }
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(f, g)| f * g.conj()).sum())
    }

    /// `(sum_n (1 + n^2)^s |f_n|^2)^{1/2}`.
    pub fn hs_norm(&self, s: f64) -> Result<f64> {
        if s < 0.0 || s.is_nan() {
            return Err(LabError::NegativeSobolevIndex(s));
        }
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| sobolev_weight(n, s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn shift(&self, direction: Shift) -> HardyCoeffs {
        let len = self.coeffs.len();
        let zero = Complex64::new(0.0, 0.0);
        let coeffs = match direction {
            Shift::Adjoint => (0..len)
                .map(|n| self.coeffs.get(n + 1).copied().unwrap_or(zero))
                .collect(),
            Shift::Forward => (0..len)
                .map(|n| if n == 0 { zero } else { self.coeffs[n - 1] })
                .collect(),
        };
        HardyCoeffs { coeffs }
    }

    /// Horner evaluation of `sum_n f_n z^n` for `|z| <= 1`.
    pub fn eval_disk(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() > 1.0 + 1e-15 {
            return Err(LabError::OutsideDisk { re: z.re, im: z.im });
        }
        Ok(horner(&self.coeffs, z))
    }

    /// View as a Laurent vector with zero negative modes.
    pub fn embed(&self) -> LaurentCoeffs {
        let n = self.truncation();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        coeffs[n..].copy_from_slice(&self.coeffs);
        LaurentCoeffs { coeffs, half_width: n }
    }

    /// Symbol of `conj(f)` on the torus: mode `-n` carries `conj(f_n)`.
    pub fn conj_symbol(&self) -> LaurentCoeffs {
        let n = self.truncation();
        LaurentCoeffs::from_fn(n, |k| {
            if k <= 0 {
                self.coeffs[(-k) as usize].conj()
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `|f|^2` on the torus as a Laurent vector of half-width `N` (exact, no aliasing).
    pub fn abs_square(&self) -> LaurentCoeffs {
        let n = self.truncation();
        let c = &self.coeffs;
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        // mode k >= 0: sum_j c_{j+k} conj(c_j); mode -k is its conjugate.
        for k in 0..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..=(n - k) {
                acc += c[j + k] * c[j].conj();
            }
            out[n + k] = acc;
            if k > 0 {
                out[n - k] = acc.conj();
            }
        }
        LaurentCoeffs {
            coeffs: out,
            half_width: n,
        }
    }

    /// Truncated Cauchy product `(f g)_n` for `n <= N`.
    pub fn product(&self, other: &HardyCoeffs) -> Result<HardyCoeffs> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(LabError::TruncationMismatch {
                left: self.truncation(),
                right: other.truncation(),
            });
        }
        let n = self.truncation();
        Ok(HardyCoeffs::from_fn(n, |k| {
            (0..=k).map(|j| self.coeffs[j] * other.coeffs[k - j]).sum()
        }))
    }

    pub fn scale(&self, factor: Complex64) -> HardyCoeffs {
        HardyCoeffs {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Max-modulus difference, assuming equal truncation.
    pub fn max_abs_diff(&self, other: &HardyCoeffs) -> f64 {
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len)
            .map(|n| (self.get(n) - other.get(n)).norm())
            .fold(0.0, f64::max)
    }

    /// L2 distance over the union of supports.
    pub fn l2_distance(&self, other: &HardyCoeffs) -> f64 {
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len)
            .map(|n| (self.get(n) - other.get(n)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl LaurentCoeffs {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) || coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(LabError::NonFinite);
        }
        let half_width = coeffs.len() / 2;
        Ok(Self { coeffs, half_width })
    }

    pub fn from_fn(half_width: usize, mut f: impl FnMut(isize) -> Complex64) -> Self {
        let h = half_width as isize;
        Self {
            coeffs: (-h..=h).map(&mut f).collect(),
            half_width,
        }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Coefficient of mode `k`, zero outside the stored window.
    pub fn get(&self, k: isize) -> Complex64 {
        let idx = k + self.half_width as isize;
        if idx < 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs.get(idx as usize).copied().unwrap_or_default()
    }

    /// Szegő projection: keep modes `0..=N`.
    pub fn project_szego(&self) -> HardyCoeffs {
        HardyCoeffs {
            coeffs: self.coeffs[self.half_width..].to_vec(),
        }
    }
}

/// Matrix of `T_phi` on modes `0..=n`: entry `(j, k)` is `phi_{j-k}`.
pub fn toeplitz_matrix(symbol: &LaurentCoeffs, n: usize) -> Result<DMatrix<Complex64>> {
    if symbol.half_width() < n {
        return Err(LabError::InvalidArgument(format!(
            "symbol half-width {} smaller than truncation {n}",
            symbol.half_width()
        )));
    }
    Ok(DMatrix::from_fn(n + 1, n + 1, |j, k| {
        symbol.get(j as isize - k as isize)
    }))
}

pub(crate) fn sobolev_weight(n: usize, s: f64) -> f64 {
    let base = 1.0 + (n as f64) * (n as f64);
    if s == 0.0 {
        1.0
    } else if s == 1.0 {
        base
    } else if s == 2.0 {
        base * base
    } else if s == 0.5 {
        base.sqrt()
    } else {
        base.powf(s)
    }
}

pub(crate) fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e0(p: Complex64, n: usize) -> HardyCoeffs {
        HardyCoeffs::from_fn(n, |k| p.conj().powu(k as u32))
    }

    fn e1(p: Complex64, n: usize) -> HardyCoeffs {
        HardyCoeffs::from_fn(n, |k| {
            if k == 0 {
                c(0.0, 0.0)
            } else {
                p.conj().powu(k as u32 - 1) * k as f64
            }
        })
    }

    #[test]
    fn szego_projection_drops_negative_modes() {
        let f = LaurentCoeffs::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        let g = f.project_szego();
        assert_eq!(g.as_slice(), &[c(2.0, 0.0), c(3.0, 0.0)]);
        let zero = LaurentCoeffs::from_fn(3, |_| c(0.0, 0.0)).project_szego();
        assert!(zero.as_slice().iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn abs_square_of_one_plus_z() {
        // (1 + z)(1 + 1/z) = 1/z + 2 + z by hand.
        let u = HardyCoeffs::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let sq = u.abs_square();
        assert_eq!(sq.get(-1), c(1.0, 0.0));
        assert_eq!(sq.get(0), c(2.0, 0.0));
        assert_eq!(sq.get(1), c(1.0, 0.0));
        let proj = sq.project_szego();
        assert_eq!(proj.as_slice(), &[c(2.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn inner_products() {
        let one = HardyCoeffs::monomial(4, 0);
        let z = HardyCoeffs::monomial(4, 1);
        assert_eq!(one.inner_product(&one).unwrap(), c(1.0, 0.0));
        assert_eq!(z.inner_product(&one).unwrap(), c(0.0, 0.0));
        let k = e0(c(0.5, 0.0), 256);
        let v = k.inner_product(&k).unwrap();
        assert!((v.re - 4.0 / 3.0).abs() < 1e-12 && v.im.abs() < 1e-15);
        assert!(matches!(
            one.inner_product(&HardyCoeffs::zeros(3)),
            Err(LabError::TruncationMismatch { .. })
        ));
    }

    #[test]
    fn sobolev_norms() {
        let one = HardyCoeffs::monomial(8, 0);
        for s in [0.0, 0.5, 1.0, 2.0, 3.7] {
            assert!((one.hs_norm(s).unwrap() - 1.0).abs() < 1e-15);
        }
        let z = HardyCoeffs::monomial(8, 1);
        assert!((z.hs_norm(1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(z.hs_norm(-0.1), Err(LabError::NegativeSobolevIndex(_))));
    }

    #[test]
    fn backward_shift_on_reproducing_kernels() {
        let p = c(0.5, 0.0);
        let n = 256;
        let k0 = e0(p, n);
        let k1 = e1(p, n);
        assert!(HardyCoeffs::monomial(n, 0)
            .shift(Shift::Adjoint)
            .as_slice()
            .iter()
            .all(|x| x.norm() == 0.0));
        let s0 = k0.shift(Shift::Adjoint);
        let s1 = k1.shift(Shift::Adjoint);
        // compare away from the truncation tail
        for j in 0..200 {
            assert!((s0.get(j) - p.conj() * k0.get(j)).norm() < 1e-12);
            assert!((s1.get(j) - (k0.get(j) + p.conj() * k1.get(j))).norm() < 1e-12);
        }
    }

    #[test]
    fn toeplitz_basics() {
        let n = 5;
        let one = HardyCoeffs::monomial(n, 0).embed();
        let id = toeplitz_matrix(&one, n).unwrap();
        assert_eq!(id, DMatrix::identity(n + 1, n + 1));
        let z = HardyCoeffs::monomial(n, 1).embed();
        let sh = toeplitz_matrix(&z, n).unwrap();
        for j in 0..=n {
            for k in 0..=n {
                let want = if j == k + 1 { 1.0 } else { 0.0 };
                assert_eq!(sh[(j, k)], c(want, 0.0));
            }
        }
        assert!(toeplitz_matrix(&z, n + 1).is_err());
    }

    #[test]
    fn horner_evaluation() {
        let f = HardyCoeffs::new(vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(f.eval_disk(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(f.eval_disk(c(-1.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(matches!(f.eval_disk(c(1.1, 0.0)), Err(LabError::OutsideDisk { .. })));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(HardyCoeffs::new(vec![]).is_err());
        assert!(HardyCoeffs::new(vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn json_shape() {
        let f = HardyCoeffs::new(vec![c(1.0, -2.0)]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"[{"re":1.0,"im":-2.0}]"#);
        let back: HardyCoeffs = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    fn arb_coeffs(len: usize) -> impl Strategy<Value = HardyCoeffs> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
            .prop_map(|v| HardyCoeffs::new(v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn parseval_is_exact(f in arb_coeffs(17)) {
            let ip = f.inner_product(&f).unwrap();
            prop_assert_eq!(ip.im, 0.0);
            prop_assert!((ip.re - f.norm_sqr()).abs() <= 1e-15 * f.norm_sqr().max(1.0));
        }

        #[test]
        fn shift_adjointness(f in arb_coeffs(12), g in arb_coeffs(12)) {
            let mut gv = g.into_vec();
            *gv.last_mut().unwrap() = c(0.0, 0.0);
            let g = HardyCoeffs::new(gv).unwrap();
            let lhs = f.shift(Shift::Adjoint).inner_product(&g).unwrap();
            let rhs = f.inner_product(&g.shift(Shift::Forward)).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-13);
        }

        #[test]
        fn shift_defect_identity(f in arb_coeffs(12)) {
            let lhs = f.shift(Shift::Adjoint).norm_sqr();
            let rhs = f.norm_sqr() - f.get(0).norm_sqr();
            prop_assert!((lhs - rhs).abs() < 1e-13);
        }

        #[test]
        fn szego_idempotent(f in arb_coeffs(9)) {
            let once = f.embed().project_szego();
            prop_assert_eq!(once.embed().project_szego(), once.clone());
            prop_assert_eq!(once, f);
        }

        #[test]
        fn eval_is_linear_and_bounded(f in arb_coeffs(10), g in arb_coeffs(10),
                                      r in 0.0f64..1.0, th in 0.0f64..6.3) {
            let z = Complex64::from_polar(r, th);
            let sum = HardyCoeffs::new(f.as_slice().iter().zip(g.as_slice()).map(|(a, b)| a + b).collect()).unwrap();
            let lhs = sum.eval_disk(z).unwrap();
            let rhs = f.eval_disk(z).unwrap() + g.eval_disk(z).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12);
            let bound: f64 = f.as_slice().iter().map(|x| x.norm()).sum();
            prop_assert!(f.eval_disk(z).unwrap().norm() <= bound + 1e-12);
        }
    }
}
