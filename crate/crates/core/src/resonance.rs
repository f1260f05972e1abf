//! Spectral dichotomy on the core block: eigen-data of `L` on the model space,
//! the scalar function `x(tau)`, unimodular times, and the spectral radius of
//! `e^{-it} e^{-2itL} S*` on the three-dimensional space spanned by `e0, e1, psi`.
//!
//! Functions suffixed `_tau` take Lax time `tau = 2 t`; everything else takes
//! physical time.

use std::f64::consts::PI;

use nalgebra::{DVector, Matrix2, Matrix3, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::explicit::sigma_matrix;
use crate::finite_gap::{core_block_matrices, FiniteGapData};
use crate::hardy::HardyCoeffs;
use crate::lax::LaxMatrix;

/// Tolerance on `|2a + c|`.
pub const RESONANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Resonant,
    NonResonant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub kappa: f64,
    pub beta: f64,
    pub b_plus: f64,
    pub b_minus: f64,
    pub classification: Classification,
    pub delta: f64,
}

impl SpectralData {
    /// `lambda_+ - lambda_-`
    pub fn gap(&self) -> f64 {
        self.lambda_plus - self.lambda_minus
    }

    /// Period of `|x(tau)|` in Lax time.
    pub fn beat_period_tau(&self) -> f64 {
        2.0 * PI / self.gap()
    }
}

pub fn classify(data: &FiniteGapData) -> Classification {
    if data.resonance_defect() <= RESONANCE_TOL {
        Classification::Resonant
    } else {
        Classification::NonResonant
    }
}

/// Real roots of `l^2 - beta l - kappa`, larger first, without cancellation.
fn real_roots(beta: f64, kappa: f64) -> (f64, f64) {
    let disc = beta * beta + 4.0 * kappa;
    assert!(disc > 0.0, "core block has a double eigenvalue (disc = {disc})");
    let sq = disc.sqrt();
    if beta >= 0.0 {
        let lp = 0.5 * (beta + sq);
        (lp, -kappa / lp)
    } else {
        let lm = 0.5 * (beta - sq);
        (-kappa / lm, lm)
    }
}

pub fn block_eigen(data: &FiniteGapData) -> SpectralData {
    let blk = core_block_matrices(data);
    let (lp, lm) = real_roots(blk.beta, blk.kappa);
    let b_plus = (blk.kappa - lm) / (lp - lm);
    let b_minus = (lp - blk.kappa) / (lp - lm);
    SpectralData {
        lambda_plus: lp,
        lambda_minus: lm,
        kappa: blk.kappa,
        beta: blk.beta,
        b_plus,
        b_minus,
        classification: classify(data),
        delta: (b_plus.abs() - b_minus.abs()).abs(),
    }
}

/// `x(tau) = b_+ e^{-i lambda_+ tau} + b_- e^{-i lambda_- tau}`.
pub fn x_of_tau(spec: &SpectralData, tau: f64) -> Complex64 {
    spec.b_plus * Complex64::from_polar(1.0, -spec.lambda_plus * tau)
        + spec.b_minus * Complex64::from_polar(1.0, -spec.lambda_minus * tau)
}

/// Minimum of `|x|` over one beat period: grid scan followed by golden-section
/// refinement around the best grid point. Returns `(tau, |x(tau)|)`.
pub fn min_abs_x_tau(spec: &SpectralData, samples: usize) -> (f64, f64) {
    let period = spec.beat_period_tau();
    let h = period / samples as f64;
    let f = |tau: f64| x_of_tau(spec, tau).norm();
    let (k, _) = (0..=samples)
        .map(|k| (k, f(k as f64 * h)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let centre = k as f64 * h;
    let (tau, val) = golden_min(f, centre - h, centre + h, 200);
    if val < f(centre) {
        (tau, val)
    } else {
        (centre, f(centre))
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Lax time `t_ell = (2 ell + 1) pi (1 - r) / (2 rho)` of the `ell`-th unimodular eigenvalue.
pub fn unimodular_times_tau(data: &FiniteGapData, ell: u32) -> Result<f64> {
    if classify(data) == Classification::NonResonant {
        return Err(LabError::NotResonant(data.resonance_defect()));
    }
    Ok((2 * ell + 1) as f64 * PI * (1.0 - data.r()) / (2.0 * data.rho()))
}

/// `exp(-i tau L_block)` from the spectral projectors `P_pm = (L - lambda_mp)/(lambda_pm - lambda_mp)`.
pub fn block_exp_tau(data: &FiniteGapData, spec: &SpectralData, tau: f64) -> Matrix2<Complex64> {
    let l = core_block_matrices(data).l_block;
    let id = Matrix2::<Complex64>::identity();
    let gap = spec.gap();
    let p_plus = (l - id * Complex64::from(spec.lambda_minus)) / Complex64::from(gap);
    let p_minus = (id * Complex64::from(spec.lambda_plus) - l) / Complex64::from(gap);
    p_plus * Complex64::from_polar(1.0, -spec.lambda_plus * tau)
        + p_minus * Complex64::from_polar(1.0, -spec.lambda_minus * tau)
}

/// Matrix of `e^{-it} e^{-2itL} S*` on the basis `(e0, e1, psi)`, `psi = beta_p^2`.
///
/// `S* psi = -2p(1-r) e0 + (1-r)^2 e1`, and the third row vanishes because the
/// range of `S*` on this space lies in the span of `e0, e1`.
pub fn sigma_block(data: &FiniteGapData, t: f64) -> Matrix3<Complex64> {
    let spec = block_eigen(data);
    sigma_block_with(data, &spec, t)
}

fn sigma_block_with(data: &FiniteGapData, spec: &SpectralData, t: f64) -> Matrix3<Complex64> {
    let blk = core_block_matrices(data);
    let u = block_exp_tau(data, spec, 2.0 * t) * Complex64::from_polar(1.0, -t);
    let top = u * blk.sstar_block;
    let r = data.r();
    let coupling = u * Vector2::new(-2.0 * data.p() * (1.0 - r), Complex64::from((1.0 - r) * (1.0 - r)));
    let zero = Complex64::new(0.0, 0.0);
    Matrix3::new(
        top[(0, 0)],
        top[(0, 1)],
        coupling[0],
        top[(1, 0)],
        top[(1, 1)],
        coupling[1],
        zero,
        zero,
        zero,
    )
}

/// Largest eigenvalue modulus, from a complex Schur decomposition.
pub fn spectral_radius(m: &Matrix3<Complex64>) -> f64 {
    let schur = m.schur();
    let (_, tri) = schur.unpack();
    (0..3).map(|k| tri[(k, k)].norm()).fold(0.0, f64::max)
}

/// Dominant eigenvalue of the upper-left `2 x 2` block and `d|lambda|^2/dt`.
fn dominant_with_slope(data: &FiniteGapData, spec: &SpectralData, t: f64) -> (Complex64, f64) {
    let s = sigma_block_with(data, spec, t);
    let a = s.fixed_view::<2, 2>(0, 0).into_owned();
    let tr = a.trace();
    let det = a.determinant();
    let root = (tr * tr - 4.0 * det).sqrt();
    let (r1, r2) = ((tr + root) / 2.0, (tr - root) / 2.0);
    let lam = if r1.norm() >= r2.norm() { r1 } else { r2 };
    // A' = -i (I + 2 L) A, so tr' = tr(-i(I + 2L)A) and det' = -i(2 + 2 beta) det.
    let l = core_block_matrices(data).l_block;
    let da = (Matrix2::identity() + l * Complex64::from(2.0)) * a * Complex64::new(0.0, -1.0);
    let dtr = da.trace();
    let ddet = Complex64::new(0.0, -(2.0 + 2.0 * spec.beta)) * det;
    let dlam = (dtr * lam - ddet) / (2.0 * lam - tr);
    (lam, 2.0 * (lam.conj() * dlam).re)
}

/// Result of scanning the spectral radius over one period in physical time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusScan {
    /// Period of the eigenvalue moduli, `pi / (lambda_+ - lambda_-)`.
    pub period: f64,
    /// Refined location of the first maximum.
    pub t_peak: f64,
    /// Maximal spectral radius; this is the measured `q0` when it is below one.
    pub peak: f64,
    pub samples: usize,
}

pub fn radius_scan(data: &FiniteGapData, samples: usize) -> RadiusScan {
    let spec = block_eigen(data);
    let period = PI / spec.gap();
    let h = period / samples as f64;
    let radii: Vec<f64> = (0..=samples)
        .into_par_iter()
        .map(|k| spectral_radius(&sigma_block_with(data, &spec, k as f64 * h)))
        .collect();
    let mut k_best = 0;
    for (k, &v) in radii.iter().enumerate() {
        if v > radii[k_best] * (1.0 + 1e-13) {
            k_best = k;
        }
    }
    let (t_peak, peak) = refine_peak(data, &spec, k_best as f64 * h, h);
    let grid_peak = radii[k_best];
    if peak >= grid_peak {
        RadiusScan {
            period,
            t_peak,
            peak,
            samples,
        }
    } else {
        RadiusScan {
            period,
            t_peak: k_best as f64 * h,
            peak: grid_peak,
            samples,
        }
    }
}

/// Bisection on the sign of `d|lambda_dom|^2/dt`; golden section when the bracket
/// does not straddle a sign change.
fn refine_peak(data: &FiniteGapData, spec: &SpectralData, centre: f64, h: f64) -> (f64, f64) {
    let slope = |t: f64| dominant_with_slope(data, spec, t).1;
    let radius = |t: f64| spectral_radius(&sigma_block_with(data, spec, t));
    let (mut lo, mut hi) = (centre - h, centre + h);
    if slope(lo) > 0.0 && slope(hi) < 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        (t, radius(t))
    } else {
        let (t, neg) = golden_min(|t| -radius(t), lo, hi, 200);
        (t, -neg)
    }
}

/// First physical time at which the spectral radius reaches one, or `None` if the
/// maximum over a period stays below `1 - 1e-8`.
pub fn first_unimodular_time(data: &FiniteGapData) -> Option<f64> {
    let scan = radius_scan(data, 4096);
    (scan.peak >= 1.0 - UNIMODULAR_TOL).then_some(scan.t_peak)
}

/// `s_n = ||(e^{-it} e^{-2itL} S*)^n u0||` for `n = 0..=n_max` on the truncated space.
pub fn stability_iterate_decay(u0: &HardyCoeffs, lax: &LaxMatrix, t: f64, n_max: usize) -> Result<Vec<f64>> {
    if u0.truncation() != lax.truncation() {
        return Err(LabError::TruncationMismatch {
            left: u0.truncation(),
            right: lax.truncation(),
        });
    }
    let sigma = sigma_matrix(&lax.spectrum()?, t);
    let mut v = DVector::from_column_slice(u0.as_slice());
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(v.norm());
    for _ in 0..n_max {
        v = &sigma * v;
        out.push(v.norm());
    }
    Ok(out)
}

/// Threshold for "the spectral radius reaches one" and "x vanishes".
pub const UNIMODULAR_TOL: f64 = 1e-8;
/// Iterates below this size count as decayed.
pub const DECAY_TOL: f64 = 1e-6;

/// All three faces of the dichotomy for one datum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DichotomyAssessment {
    pub classification: Classification,
    pub spectral: SpectralData,
    pub tau_min: f64,
    pub min_abs_x: f64,
    pub scan: RadiusScan,
    pub radius_hits_one: bool,
    pub x_vanishes: bool,
    /// `s_n` at the time of the radius peak, for `n = 0..=iterations`.
    pub iterates: Vec<f64>,
    pub consistent: bool,
}

/// Classifies `data` and checks the classification against the radius scan,
/// `min |x|`, and the decay of `s_n` at the worst time.
pub fn assess_dichotomy(
    data: &FiniteGapData,
    scan_samples: usize,
    truncation: usize,
    iterations: usize,
) -> Result<DichotomyAssessment> {
    let spectral = block_eigen(data);
    let (tau_min, min_abs_x) = min_abs_x_tau(&spectral, scan_samples);
    let scan = radius_scan(data, scan_samples);
    let u0 = crate::finite_gap::synthesize_coeffs(data, truncation);
    let iterates = stability_iterate_decay(&u0, &LaxMatrix::build(&u0), scan.t_peak, iterations)?;
    let radius_hits_one = scan.peak >= 1.0 - UNIMODULAR_TOL;
    let x_vanishes = min_abs_x <= UNIMODULAR_TOL;
    let classification = classify(data);
    let consistent = match classification {
        Classification::Resonant => radius_hits_one && x_vanishes,
        Classification::NonResonant => {
            !radius_hits_one && !x_vanishes && scan.peak < 1.0 && *iterates.last().unwrap() < DECAY_TOL
        }
    };
    Ok(DichotomyAssessment {
        classification,
        spectral,
        tau_min,
        min_abs_x,
        scan,
        radius_hits_one,
        x_vanishes,
        iterates,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_gap::{e0_coeffs, e1_coeffs, from_ratio, make_finite_gap, make_resonant, synthesize_coeffs};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn nonres() -> FiniteGapData {
        make_finite_gap(0.0, 0, c(0.5, 0.0), c(2.0 / 3.0, 0.0), c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify(&make_resonant(0.0, 0, c(0.5, 0.0)).unwrap()),
            Classification::Resonant
        );
        assert_eq!(
            classify(&make_resonant(1.3, 0, c(0.5, 0.0)).unwrap()),
            Classification::Resonant
        );
        assert_eq!(classify(&nonres()), Classification::NonResonant);
        assert!((nonres().resonance_defect() - 7.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_examples() {
        let s = block_eigen(&make_resonant(0.0, 0, c(0.5, 0.0)).unwrap());
        assert!((s.lambda_plus - 1.0).abs() < 1e-14);
        assert!((s.lambda_minus + 1.0 / 3.0).abs() < 1e-14);
        assert!((s.b_plus - 0.5).abs() < 1e-14 && (s.b_minus - 0.5).abs() < 1e-14);
        assert!(s.delta < 1e-14);

        // Oracle: plain quadratic formula on l^2 + (5/3) l - 10/9 = 0.
        let disc = (25.0f64 / 9.0 + 40.0 / 9.0).sqrt();
        let (lp, lm) = ((-5.0 / 3.0 + disc) / 2.0, (-5.0 / 3.0 - disc) / 2.0);
        let s = block_eigen(&nonres());
        assert!((s.lambda_plus - lp).abs() < 1e-14);
        assert!((s.lambda_minus - lm).abs() < 1e-14);
        assert!((s.lambda_plus - 0.5103763).abs() < 1e-7);
        assert!((s.lambda_minus + 2.1770430).abs() < 1e-7);
        assert!((s.b_plus - 1.2235360).abs() < 1e-7);
        assert!((s.b_minus + 0.2235360).abs() < 1e-7);
        assert!((s.delta - 1.0).abs() < 1e-14);
    }

    #[test]
    fn resonant_gap_formula() {
        for rho in [0.1, 0.3, 0.5, 0.77, 0.95] {
            let d = make_resonant(0.4, 0, Complex64::from_polar(rho, 2.0)).unwrap();
            let s = block_eigen(&d);
            let r = rho * rho;
            assert!((s.gap() - 2.0 * rho / (1.0 - r)).abs() < 1e-12 * s.gap());
        }
    }

    #[test]
    fn roots_match_block_eigenvalues() {
        for d in [nonres(), from_ratio(0.0, 0, c(0.2, -0.6), 2.0, 1.0).unwrap()] {
            let s = block_eigen(&d);
            let l = core_block_matrices(&d).l_block;
            let ev = l.eigenvalues_check();
            assert!((ev.0 - s.lambda_plus).abs() < 1e-12 && (ev.1 - s.lambda_minus).abs() < 1e-12);
            assert!((s.lambda_plus + s.lambda_minus - s.beta).abs() < 1e-12);
            assert!((s.lambda_plus * s.lambda_minus + s.kappa).abs() < 1e-12);
            assert!((s.b_plus + s.b_minus - 1.0).abs() < 1e-12);
        }
    }

    trait EigCheck {
        fn eigenvalues_check(&self) -> (f64, f64);
    }
    impl EigCheck for Matrix2<Complex64> {
        // Independent route: complex Schur form of the 2 x 2 block.
        fn eigenvalues_check(&self) -> (f64, f64) {
            let (_, t) = self.schur().unpack();
            let (x, y) = (t[(0, 0)].re, t[(1, 1)].re);
            (x.max(y), x.min(y))
        }
    }

    #[test]
    fn x_function() {
        let res = block_eigen(&make_resonant(0.0, 0, c(0.5, 0.0)).unwrap());
        assert_eq!(x_of_tau(&res, 0.0), c(1.0, 0.0));
        assert!(x_of_tau(&res, 0.75 * PI).norm() < 1e-12);
        let non = block_eigen(&nonres());
        assert!((x_of_tau(&non, 0.0) - 1.0).norm() < 1e-15);
        let h = 1e-6;
        let dx = (x_of_tau(&non, h) - x_of_tau(&non, -h)) / (2.0 * h);
        assert!((dx - c(0.0, -non.kappa)).norm() < 1e-8);
        let grid_min = (0..20000)
            .map(|k| x_of_tau(&non, k as f64 * 0.001).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(grid_min >= 1.0 - 1e-9);
        let (tau, v) = min_abs_x_tau(&res, 2000);
        assert!(v < 1e-12, "{v:e}");
        assert!((tau - 0.75 * PI).abs() < 1e-9);
    }

    #[test]
    fn unimodular_times_examples() {
        let d = make_resonant(0.0, 0, c(0.5, 0.0)).unwrap();
        assert!((unimodular_times_tau(&d, 0).unwrap() - 0.75 * PI).abs() < 1e-15);
        assert!((unimodular_times_tau(&d, 0).unwrap() / 2.0 - 3.0 * PI / 8.0).abs() < 1e-15);
        assert!((unimodular_times_tau(&d, 2).unwrap() - 5.0 * 0.75 * PI).abs() < 1e-13);
        assert!(matches!(
            unimodular_times_tau(&nonres(), 0),
            Err(LabError::NotResonant(_))
        ));
    }

    #[test]
    fn sigma_block_at_zero_is_triangular() {
        for d in [nonres(), make_resonant(0.0, 0, c(0.3, 0.4)).unwrap()] {
            let s = sigma_block(&d, 0.0);
            assert!((spectral_radius(&s) - d.rho()).abs() < 1e-7);
            assert_eq!(s[(1, 0)], c(0.0, 0.0));
        }
    }

    #[test]
    fn resonant_radius_hits_one_at_blowup_time() {
        let d = make_resonant(0.0, 0, c(0.5, 0.0)).unwrap();
        let big_t = 3.0 * PI / 8.0;
        assert!((spectral_radius(&sigma_block(&d, big_t)) - 1.0).abs() < 1e-10);
        let t = first_unimodular_time(&d).unwrap();
        assert!((t - big_t).abs() < 1e-10, "{t} vs {big_t}");
    }

    #[test]
    fn nonresonant_radius_stays_below_one() {
        let d = nonres();
        let worst = (0..=2000)
            .map(|k| spectral_radius(&sigma_block(&d, k as f64 * 0.01)))
            .fold(0.0, f64::max);
        let scan = radius_scan(&d, 4096);
        assert!(scan.peak < 1.0);
        assert!(worst <= scan.peak + 1e-12, "{worst} vs {}", scan.peak);
        assert!(first_unimodular_time(&d).is_none());
    }

    /// The 3 x 3 block must agree with the truncated big matrix acting on e0, e1, psi.
    #[test]
    fn sigma_block_matches_truncated_operator() {
        let n = 200;
        for d in [nonres(), make_resonant(0.9, 0, c(-0.2, 0.5)).unwrap()] {
            let u = synthesize_coeffs(&d, n);
            let spec = LaxMatrix::build(&u).spectrum().unwrap();
            let t = 0.7;
            let big = sigma_matrix(&spec, t);
            let k0 = e0_coeffs(d.p(), n);
            let k1 = e1_coeffs(d.p(), n);
            let blaschke = HardyCoeffs::from_fn(n, |j| if j == 0 { -d.p() } else { (1.0 - d.r()) * k0.get(j - 1) });
            let psi = blaschke.product(&blaschke).unwrap();
            let blk = sigma_block(&d, t);
            for (col, v) in [&k0, &k1, &psi].into_iter().enumerate() {
                let got = &big * DVector::from_column_slice(v.as_slice());
                let want: Vec<Complex64> = (0..=n)
                    .map(|j| blk[(0, col)] * k0.get(j) + blk[(1, col)] * k1.get(j) + blk[(2, col)] * psi.get(j))
                    .collect();
                let err = got
                    .iter()
                    .zip(&want)
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(err < 1e-9, "column {col}: {err:e}");
            }
        }
    }

    #[test]
    fn stability_iterates() {
        let d = nonres();
        let u0 = synthesize_coeffs(&d, 256);
        let lax = LaxMatrix::build(&u0);
        let s = stability_iterate_decay(&u0, &lax, 1.0, 60).unwrap();
        assert!((s[0] - u0.l2_norm()).abs() < 1e-15);
        assert!(s.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        assert!(s[50] <= 1e-6, "s_50 = {:e}", s[50]);

        let d = make_resonant(0.0, 0, c(0.5, 0.0)).unwrap();
        let u0 = synthesize_coeffs(&d, 256);
        let lax = LaxMatrix::build(&u0);
        let s = stability_iterate_decay(&u0, &lax, 3.0 * PI / 8.0, 200).unwrap();
        assert!(s.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        assert!((s[200] - 1.0).abs() < 1e-6, "s_200 = {}", s[200]);
    }
}
