//! Exact solution for resonant data `2a + c = 0`.
//!
//! For the core datum (`m = 0`)
//! `v(t, z) = ap + a zeta (N(t) - (1+r) conj(p) zeta) / D_t(zeta)`, `zeta = z e^{-i Theta(t)}`,
//! with `D_t(zeta) = 1 - conj(p) q(t) zeta + conj(p)^2 zeta^2 = (1 - alpha1 zeta)(1 - alpha2 zeta)`.
//! Shifted data follow from `u(t, z) = e^{-i m^2 t} z^m v(t, e^{-2imt} z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{LabError, Result};
use crate::finite_gap::FiniteGapData;
use crate::hardy::{horner, sobolev_weight, HardyCoeffs};
use crate::resonance::{classify, Classification};

/// Upper bound for the adaptive truncation.
pub const MAX_ADAPTIVE_TRUNCATION: usize = 1 << 20;

/// Below this separation of the two poles the residues are not used.
const POLE_SEPARATION_MIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleState {
    pub t: f64,
    pub omega: f64,
    pub theta: f64,
    #[serde(with = "crate::json::complex")]
    pub n_t: Complex64,
    #[serde(with = "crate::json::complex")]
    pub q_t: Complex64,
    #[serde(with = "crate::json::complex")]
    pub delta: Complex64,
    #[serde(with = "crate::json::complex")]
    pub alpha1: Complex64,
    #[serde(with = "crate::json::complex")]
    pub alpha2: Complex64,
    /// Residues; `None` at `t = 0` where the pole is double.
    pub b1: Option<crate::json::JsonComplex>,
    pub b2: Option<crate::json::JsonComplex>,
}

impl PoleState {
    pub fn residues(&self) -> Option<(Complex64, Complex64)> {
        Some((self.b1?.into(), self.b2?.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitProfile {
    pub m: u32,
    /// Coefficient of `z^m`.
    #[serde(with = "crate::json::complex")]
    pub constant_term: Complex64,
    /// Coefficient of `z^{m+1}`; higher modes are `residue * pole_param^{k-1}`.
    #[serde(with = "crate::json::complex")]
    pub residue: Complex64,
    #[serde(with = "crate::json::complex")]
    pub pole_param: Complex64,
    pub theta_star: f64,
}

impl LimitProfile {
    pub fn coeffs(&self, n: usize) -> HardyCoeffs {
        let m = self.m as usize;
        let mut pow = Complex64::new(1.0, 0.0);
        HardyCoeffs::from_fn(n, |k| {
            if k < m {
                Complex64::new(0.0, 0.0)
            } else if k == m {
                self.constant_term
            } else {
                let out = self.residue * pow;
                pow *= self.pole_param;
                out
            }
        })
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        z.powu(self.m) * (self.constant_term + self.residue * z / (1.0 - self.pole_param * z))
    }

    /// `|constant|^2 + |residue|^2 / (1 - |pole|^2)`.
    pub fn norm_sqr(&self) -> f64 {
        self.constant_term.norm_sqr() + self.residue.norm_sqr() / (1.0 - self.pole_param.norm_sqr())
    }
}

fn require_resonant(data: &FiniteGapData) -> Result<()> {
    match classify(data) {
        Classification::Resonant => Ok(()),
        Classification::NonResonant => Err(LabError::NotResonant(data.resonance_defect())),
    }
}

/// `T = pi (1 - r) / (4 rho)`.
pub fn blowup_time(p: Complex64) -> Result<f64> {
    let rho = p.norm();
    if !(rho > 0.0 && rho < 1.0) {
        return Err(LabError::PoleOutOfDisk(rho));
    }
    Ok(PI * (1.0 - rho * rho) / (4.0 * rho))
}

/// `c0 = 4r(1-r)/(1+r)^3`.
pub fn pole_constant(r: f64) -> f64 {
    4.0 * r * (1.0 - r) / (1.0 + r).powi(3)
}

/// `sqrt(Gamma(2s+1)) ((1+r)^3 / (4r(1-r)))^s`.
pub fn hs_rate_constant(r: f64, s: f64) -> f64 {
    gamma(2.0 * s + 1.0).sqrt() * (1.0 / pole_constant(r)).powf(s)
}

/// `(1+3r)/(1+r)`
pub fn initial_mass(r: f64) -> f64 {
    (1.0 + 3.0 * r) / (1.0 + r)
}

/// `2r/(1+r)`
pub fn limit_mass(r: f64) -> f64 {
    2.0 * r / (1.0 + r)
}

/// `Theta_* = (1+r) pi / (4 rho)`.
pub fn theta_star(data: &FiniteGapData) -> f64 {
    (1.0 + data.r()) * PI / (4.0 * data.rho())
}

/// The branch `Delta = sqrt(q^2 - 4)` continuous on `(0, T]` with `Delta(T) = i(1+r)/rho`.
///
/// `4 - q^2 = (4 + sigma^2) sin^2 + 4 i sigma cos sin` has non-negative real and
/// imaginary parts for `Omega` in `[0, pi/2]`, so it stays off the cut of the
/// principal root and `i sqrt(4 - q^2)` is that branch.
fn delta_branch(q: Complex64) -> Complex64 {
    Complex64::new(0.0, 1.0) * (4.0 - q * q).sqrt()
}

pub fn pole_state(data: &FiniteGapData, t: f64) -> Result<PoleState> {
    require_resonant(data)?;
    let big_t = blowup_time(data.p())?;
    if !(0.0..=big_t).contains(&t) {
        return Err(LabError::TimeOutOfRange { t, lo: 0.0, hi: big_t });
    }
    let (r, rho) = (data.r(), data.rho());
    let pb = data.p().conj();
    let a = data.phased_a();
    let omega = 2.0 * rho * t / (1.0 - r);
    let theta = (1.0 + r) * t / (1.0 - r);
    let (sn, cs) = omega.sin_cos();
    let n_t = Complex64::new((3.0 * r - 1.0) * cs, rho * (1.0 + r) * sn);
    let q_t = Complex64::new(2.0 * cs, -(1.0 - r) / rho * sn);
    let delta = if t == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        delta_branch(q_t)
    };
    let alpha1 = pb / 2.0 * (q_t - delta);
    let alpha2 = pb / 2.0 * (q_t + delta);
    let (b1, b2) = if t == 0.0 {
        (None, None)
    } else {
        let sep = alpha1 - alpha2;
        let b1 = a * (n_t * alpha1 - (1.0 + r) * pb) / sep;
        let b2 = a * ((1.0 + r) * pb - n_t * alpha2) / sep;
        (Some(b1.into()), Some(b2.into()))
    };
    Ok(PoleState {
        t,
        omega,
        theta,
        n_t,
        q_t,
        delta,
        alpha1,
        alpha2,
        b1,
        b2,
    })
}

fn core_value(data: &FiniteGapData, ps: &PoleState, z: Complex64) -> Complex64 {
    let a = data.phased_a();
    let pb = data.p().conj();
    let r = data.r();
    let zeta = z * Complex64::from_polar(1.0, -ps.theta);
    let denom = 1.0 - pb * ps.q_t * zeta + pb * pb * zeta * zeta;
    a * data.p() + a * zeta * (ps.n_t - (1.0 + r) * pb * zeta) / denom
}

/// `u(t, z)` for `0 <= t < T`, `|z| <= 1`.
pub fn closed_form_value(data: &FiniteGapData, t: f64, z: Complex64) -> Result<Complex64> {
    if z.norm() > 1.0 + 1e-15 {
        return Err(LabError::OutsideDisk { re: z.re, im: z.im });
    }
    let big_t = blowup_time(data.p())?;
    if t >= big_t {
        return Err(LabError::TimeOutOfRange { t, lo: 0.0, hi: big_t });
    }
    let ps = pole_state(data, t)?;
    Ok(galilean_shift(|w| core_value(data, &ps, w), data.m(), t, z))
}

/// `e^{-i m^2 t} z^m v(e^{-2imt} z)`.
pub fn galilean_shift(core: impl Fn(Complex64) -> Complex64, m: u32, t: f64, z: Complex64) -> Complex64 {
    if m == 0 {
        return core(z);
    }
    let mf = m as f64;
    Complex64::from_polar(1.0, -mf * mf * t) * z.powu(m) * core(Complex64::from_polar(1.0, -2.0 * mf * t) * z)
}

/// Coefficient form: `u_{n+m} = e^{-i(m^2 + 2mn)t} v_n`; the result has truncation `N + m`.
pub fn galilean_shift_coeffs(core: &HardyCoeffs, m: u32, t: f64) -> HardyCoeffs {
    let m = m as usize;
    let mf = m as f64;
    HardyCoeffs::from_fn(core.truncation() + m, |k| {
        if k < m {
            Complex64::new(0.0, 0.0)
        } else {
            let n = (k - m) as f64;
            Complex64::from_polar(1.0, -(mf * mf + 2.0 * mf * n) * t) * core.get(k - m)
        }
    })
}

/// Core coefficients from the linear recurrence of `D_t`:
/// `g_n - conj(p) q g_{n-1} + conj(p)^2 g_{n-2} = numerator_n`, then `v_n = e^{-i n Theta} g_n`.
pub fn core_coeffs_recurrence(data: &FiniteGapData, t: f64, n: usize) -> Result<HardyCoeffs> {
    let ps = pole_state(data, t)?;
    let a = data.phased_a();
    let pb = data.p().conj();
    let c1 = pb * ps.q_t;
    let c2 = pb * pb;
    let num1 = a * ps.n_t;
    let num2 = -a * (1.0 + data.r()) * pb;
    let mut g = vec![Complex64::new(0.0, 0.0); n + 1];
    g[0] = a * data.p();
    let rot = Complex64::from_polar(1.0, -ps.theta);
    let (mut gm1, mut gm2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let mut phase = Complex64::new(1.0, 0.0);
    for (k, slot) in g.iter_mut().enumerate().skip(1) {
        let rhs = match k {
            1 => num1,
            2 => num2,
            _ => Complex64::new(0.0, 0.0),
        };
        let gk = rhs + c1 * gm1 - c2 * gm2;
        gm2 = gm1;
        gm1 = gk;
        phase *= rot;
        *slot = gk * phase;
    }
    HardyCoeffs::new(g)
}

fn core_coeffs_partial_fractions(
    data: &FiniteGapData,
    ps: &PoleState,
    b1: Complex64,
    b2: Complex64,
    n: usize,
) -> HardyCoeffs {
    let rot = Complex64::from_polar(1.0, -ps.theta);
    let (x1, x2) = (ps.alpha1 * rot, ps.alpha2 * rot);
    let (mut p1, mut p2) = (b1 * rot, b2 * rot);
    let a0 = data.phased_a() * data.p();
    HardyCoeffs::from_fn(n, |k| {
        if k == 0 {
            a0
        } else {
            let out = p1 + p2;
            p1 *= x1;
            p2 *= x2;
            out
        }
    })
}

/// Modes `0..=N` of `u(t)` for `0 <= t < T`.
///
/// Pole terms are expanded geometrically; at `t = 0`, or whenever the two poles are
/// too close for the residues to be accurate, the recurrence is used instead.
pub fn solution_coeffs(data: &FiniteGapData, t: f64, n: usize) -> Result<HardyCoeffs> {
    let big_t = blowup_time(data.p())?;
    if t >= big_t {
        return Err(LabError::TimeOutOfRange { t, lo: 0.0, hi: big_t });
    }
    let ps = pole_state(data, t)?;
    let m = data.m() as usize;
    let core_len = n.saturating_sub(m);
    let core = match ps.residues() {
        Some((b1, b2)) if (ps.alpha1 - ps.alpha2).norm() >= POLE_SEPARATION_MIN * data.rho() => {
            core_coeffs_partial_fractions(data, &ps, b1, b2, core_len)
        }
        _ => core_coeffs_recurrence(data, t, core_len)?,
    };
    Ok(galilean_shift_coeffs(&core, data.m(), t).resized(n))
}

/// `ceil(log(1e-14) / log|alpha1|) + m`, capped.
pub fn adaptive_truncation(data: &FiniteGapData, t: f64) -> Result<usize> {
    let ps = pole_state(data, t)?;
    let lead = ps.alpha1.norm().max(ps.alpha2.norm());
    let core = if lead <= 0.0 {
        1
    } else {
        let k = (1e-14f64.ln() / lead.ln()).ceil();
        if k.is_finite() {
            (k as usize).max(1)
        } else {
            MAX_ADAPTIVE_TRUNCATION
        }
    };
    Ok((core + data.m() as usize).min(MAX_ADAPTIVE_TRUNCATION))
}

pub fn solution_coeffs_adaptive(data: &FiniteGapData, t: f64) -> Result<HardyCoeffs> {
    solution_coeffs(data, t, adaptive_truncation(data, t)?)
}

pub fn limit_profile(data: &FiniteGapData) -> Result<LimitProfile> {
    require_resonant(data)?;
    let big_t = blowup_time(data.p())?;
    let (r, rho) = (data.r(), data.rho());
    let m = data.m() as f64;
    let a = data.phased_a();
    let th = theta_star(data);
    let rot = Complex64::from_polar(1.0, -(th + 2.0 * m * big_t));
    let outer = Complex64::from_polar(1.0, -m * m * big_t);
    let i = Complex64::new(0.0, 1.0);
    Ok(LimitProfile {
        m: data.m(),
        constant_term: outer * a * data.p(),
        residue: outer * i * a * rho * (1.0 + r) * rot,
        pole_param: i * rho * data.p().conj() * rot,
        theta_star: th,
    })
}

/// `sum_{k>=1} (1 + (k+m)^2)^s x^{k-1}` for `0 <= x < 1`, stopped once the
/// remaining tail is provably below `abs_tol`.
fn weighted_geometric_real(x: f64, s: f64, m: usize, abs_tol: f64) -> f64 {
    if x == 0.0 {
        return sobolev_weight(1 + m, s);
    }
    let k_end = geometric_cutoff(x.ln(), s, m, abs_tol);
    const CHUNK: usize = 1 << 14;
    let chunks = k_end.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = 1 + c * CHUNK;
            let hi = (lo + CHUNK).min(k_end + 1);
            let mut pow = x.powf((lo - 1) as f64);
            let mut acc = 0.0;
            for k in lo..hi {
                acc += sobolev_weight(k + m, s) * pow;
                pow *= x;
            }
            acc
        })
        .sum()
}

fn weighted_geometric_complex(y: Complex64, s: f64, m: usize, abs_tol: f64) -> Complex64 {
    let my = y.norm();
    if my == 0.0 {
        return Complex64::from(sobolev_weight(1 + m, s));
    }
    let k_end = geometric_cutoff(my.ln(), s, m, abs_tol);
    let mut pow = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..=k_end {
        acc += sobolev_weight(k + m, s) * pow;
        pow *= y;
        if k % 4096 == 0 {
            // keep the running power accurate over long sums
            pow = Complex64::from_polar(my.powf(k as f64), y.arg() * k as f64);
        }
    }
    acc
}

/// Smallest `K` with `sum_{k>K} w(k+m) e^{(k-1) ln_x} <= abs_tol`, using that the term
/// ratio is non-increasing for `k + m >= 1`.
fn geometric_cutoff(ln_x: f64, s: f64, m: usize, abs_tol: f64) -> usize {
    let log_term = |k: usize| s * (1.0 + ((k + m) as f64).powi(2)).ln() + (k as f64 - 1.0) * ln_x;
    let tail_ok = |k: usize| {
        let next = k + 1;
        let ratio = (log_term(next + 1) - log_term(next)).exp();
        ratio < 1.0 && log_term(next).exp() / (1.0 - ratio) <= abs_tol
    };
    let mut hi = 1usize;
    while !tail_ok(hi) {
        hi *= 2;
        assert!(hi < 1 << 40, "geometric series does not converge (ln x = {ln_x})");
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail_ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `||u(t)||_{H^s}` by exact summation of the two-pole series, `0 < t < T`.
pub fn hs_norm_closed(data: &FiniteGapData, t: f64, s: f64) -> Result<f64> {
    if s < 0.0 || s.is_nan() {
        return Err(LabError::NegativeSobolevIndex(s));
    }
    let big_t = blowup_time(data.p())?;
    if !(t > 0.0 && t < big_t) {
        return Err(LabError::TimeOutOfRange { t, lo: 0.0, hi: big_t });
    }
    let ps = pole_state(data, t)?;
    let (b1, b2) = ps.residues().expect("residues exist for t > 0");
    let m = data.m() as usize;
    let a0 = data.phased_a() * data.p();
    // Every H^s norm dominates the mass, so this is a relative 1e-12 cutoff.
    let budget = 1e-13 * initial_mass(data.r());
    let mut total = sobolev_weight(m, s) * a0.norm_sqr();
    let (n1, n2) = (b1.norm_sqr(), b2.norm_sqr());
    if n1 > 0.0 {
        total += n1 * weighted_geometric_real(ps.alpha1.norm_sqr(), s, m, budget / n1);
    }
    if n2 > 0.0 {
        total += n2 * weighted_geometric_real(ps.alpha2.norm_sqr(), s, m, budget / n2);
    }
    let cross = b1 * b2.conj();
    if cross.norm() > 0.0 {
        let y = ps.alpha1 * ps.alpha2.conj();
        total += 2.0 * (cross * weighted_geometric_complex(y, s, m, budget / cross.norm())).re;
    }
    Ok(total.sqrt())
}

/// `((1 - |alpha_m|^2)/(T-t)^2, |beta_m|^2/(T-t)^2)` where `beta_m = tilde beta alpha^{-m}`,
/// so `|beta_m|^2 = |B1|^2 |alpha1|^{-2m}`.
pub fn pole_asymptotics(data: &FiniteGapData, t: f64) -> Result<(f64, f64)> {
    let big_t = blowup_time(data.p())?;
    if !(t > 0.0 && t < big_t) {
        return Err(LabError::TimeOutOfRange { t, lo: 0.0, hi: big_t });
    }
    let ps = pole_state(data, t)?;
    let (b1, _) = ps.residues().expect("residues exist for t > 0");
    let h2 = (big_t - t).powi(2);
    let mod2 = ps.alpha1.norm_sqr();
    let beta_m = b1.norm_sqr() / mod2.powi(data.m() as i32);
    Ok(((1.0 - mod2) / h2, beta_m / h2))
}

/// Evaluates the rational core formula through its numerator and denominator
/// polynomials; used by tests as a second route to `closed_form_value`.
pub fn core_value_polynomial(data: &FiniteGapData, t: f64, z: Complex64) -> Result<Complex64> {
    let ps = pole_state(data, t)?;
    let a = data.phased_a();
    let pb = data.p().conj();
    let zeta = z * Complex64::from_polar(1.0, -ps.theta);
    let num = [Complex64::new(0.0, 0.0), a * ps.n_t, -a * (1.0 + data.r()) * pb];
    let den = [Complex64::new(1.0, 0.0), -pb * ps.q_t, pb * pb];
    Ok(a * data.p() + horner(&num, zeta) / horner(&den, zeta))
}
