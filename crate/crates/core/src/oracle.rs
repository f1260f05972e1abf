//! Direct integration of `i u_t = -u_xx - 2 (D Pi |u|^2) u` on modes `0..=N` with an
//! integrating-factor RK4 scheme (Lawson form), exact on the linear part.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::hardy::HardyCoeffs;
use crate::lax::conserved_quantities;

pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_TRUNCATION: usize = 128;
/// Mass drift beyond which a run is abandoned.
pub const MASS_DRIFT_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<HardyCoeffs>,
    /// `(I0, I1, I2)` at each output time.
    pub conserved: Vec<[f64; 3]>,
}

impl Trajectory {
    /// Largest `|I_k(t) - I_k(0)|` for each `k`.
    pub fn conserved_drift(&self) -> [f64; 3] {
        let first = self.conserved[0];
        let mut out = [0.0f64; 3];
        for row in &self.conserved {
            for k in 0..3 {
                out[k] = out[k].max((row[k] - first[k]).abs());
            }
        }
        out
    }

    pub fn last(&self) -> (f64, &HardyCoeffs) {
        (*self.times.last().unwrap(), self.states.last().unwrap())
    }
}

/// `2 (D Pi |u|^2) u`, with `|u|^2` formed at full Laurent width so nothing aliases.
pub fn nonlinearity(u: &HardyCoeffs) -> HardyCoeffs {
    HardyCoeffs::new(nonlinearity_slice(u.as_slice())).expect("finite input gives finite output")
}

fn nonlinearity_slice(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    // modes k >= 1 of |u|^2 times 2k; mode 0 is killed by D
    let mut dg = vec![Complex64::new(0.0, 0.0); n + 1];
    for (k, slot) in dg.iter_mut().enumerate().skip(1) {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..=(n - k) {
            acc += c[l + k] * c[l].conj();
        }
        *slot = acc * (2.0 * k as f64);
    }
    (0..=n)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 1..=j {
                acc += dg[k] * c[j - k];
            }
            acc
        })
        .collect()
}

/// `i F(u)`
fn rhs(u: &[Complex64]) -> Vec<Complex64> {
    nonlinearity_slice(u)
        .into_iter()
        .map(|z| Complex64::new(-z.im, z.re))
        .collect()
}

/// Integrating-factor stepper with precomputed phases.
#[derive(Debug, Clone)]
pub struct Stepper {
    dt: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    linear_only: bool,
}

impl Stepper {
    pub fn new(truncation: usize, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(LabError::InvalidArgument(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let phase = |h: f64| -> Vec<Complex64> {
            (0..=truncation)
                .map(|n| Complex64::from_polar(1.0, -((n * n) as f64) * h))
                .collect()
        };
        Ok(Self {
            dt,
            half: phase(dt / 2.0),
            full: phase(dt),
            linear_only: false,
        })
    }

    /// Drops the nonlinearity; only the exact linear propagation remains.
    pub fn linear(truncation: usize, dt: f64) -> Result<Self> {
        Ok(Self {
            linear_only: true,
            ..Self::new(truncation, dt)?
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, u: &HardyCoeffs) -> Result<HardyCoeffs> {
        if u.truncation() + 1 != self.full.len() {
            return Err(LabError::TruncationMismatch {
                left: self.full.len() - 1,
                right: u.truncation(),
            });
        }
        let h = self.dt;
        let u0 = u.as_slice();
        let mul =
            |e: &[Complex64], v: &[Complex64]| -> Vec<Complex64> { e.iter().zip(v).map(|(a, b)| a * b).collect() };
        if self.linear_only {
            return HardyCoeffs::new(mul(&self.full, u0)).map_err(|_| LabError::NonFinite);
        }
        let axpy = |x: &[Complex64], s: f64, y: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(y).map(|(a, b)| a + b * s).collect()
        };
        let k1 = rhs(u0);
        let k2 = rhs(&mul(&self.half, &axpy(u0, h / 2.0, &k1)));
        let eu_half = mul(&self.half, u0);
        let k3 = rhs(&axpy(&eu_half, h / 2.0, &k2));
        let eu_full = mul(&self.full, u0);
        let k4 = rhs(&axpy(&eu_full, h, &mul(&self.half, &k3)));
        let out: Vec<Complex64> = (0..u0.len())
            .map(|n| eu_full[n] + (self.full[n] * k1[n] + 2.0 * self.half[n] * (k2[n] + k3[n]) + k4[n]) * (h / 6.0))
            .collect();
        HardyCoeffs::new(out).map_err(|_| LabError::NonFinite)
    }
}

/// One step of size `dt`.
pub fn step(u: &HardyCoeffs, dt: f64) -> Result<HardyCoeffs> {
    Stepper::new(u.truncation(), dt)?.step(u)
}

/// Integrates to `t_end`, recording every step.
pub fn evolve(u0: &HardyCoeffs, t_end: f64, dt: f64) -> Result<Trajectory> {
    evolve_with_stride(u0, t_end, dt, 1)
}

/// Integrates to `t_end` with `ceil(t_end / dt)` equal steps (so the last step lands on
/// `t_end`), recording every `stride`-th step and the final state.
pub fn evolve_with_stride(u0: &HardyCoeffs, t_end: f64, dt: f64, stride: usize) -> Result<Trajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(LabError::InvalidArgument(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    if dt.is_nan() || dt <= 0.0 {
        return Err(LabError::InvalidArgument(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let stepper = Stepper::new(u0.truncation(), h)?;
    let stride = stride.max(1);
    let first = conserved_triple(u0)?;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![u0.clone()],
        conserved: vec![first],
    };
    let mut u = u0.clone();
    for k in 1..=steps {
        let t = k as f64 * h;
        u = stepper.step(&u).map_err(|_| LabError::BlowupSuspected {
            t,
            reason: "non-finite coefficients".into(),
        })?;
        if k % stride == 0 || k == steps {
            let cons = conserved_triple(&u)?;
            if (cons[0] - first[0]).abs() > MASS_DRIFT_LIMIT {
                return Err(LabError::BlowupSuspected {
                    t,
                    reason: format!("mass drifted by {:e}", (cons[0] - first[0]).abs()),
                });
            }
            traj.times.push(t);
            traj.states.push(u.clone());
            traj.conserved.push(cons);
        }
    }
    Ok(traj)
}

fn conserved_triple(u: &HardyCoeffs) -> Result<[f64; 3]> {
    let q = conserved_quantities(u, 2)?;
    Ok([q[0], q[1], q[2]])
}
