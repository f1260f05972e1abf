//! The truncated Lax operator `L_u = D - T_u T_{conj u}`, its unitary group and the
//! conserved quantities `I_k[u] = <u, L_u^k u>`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::hardy::HardyCoeffs;

/// Hermitian `(N+1) x (N+1)` matrix of `L_u` on modes `0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaxMatrix {
    entries: DMatrix<Complex64>,
}

/// `exp(-2 i t L)` at a fixed physical time.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub matrix: DMatrix<Complex64>,
    pub t: f64,
}

/// Eigendecomposition `L = V diag(lambda) V^H`, reused across time grids.
#[derive(Debug, Clone)]
pub struct LaxSpectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl LaxMatrix {
    /// `diag(0, 1, ..., N) - M M^H` with `M` the lower-triangular Toeplitz matrix of `u`.
    ///
    /// Because `T_u` is lower triangular, `M M^H` coincides with the compression of
    /// the full product `T_u T_{conj u}` to modes `0..=N`. Only the lower triangle is
    /// accumulated; the upper one is its mirror, so the result is Hermitian bit for bit.
    pub fn build(u: &HardyCoeffs) -> Self {
        let c = u.as_slice();
        let dim = c.len();
        let mut entries = DMatrix::<Complex64>::zeros(dim, dim);
        for j in 0..dim {
            for k in 0..=j {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..=k {
                    acc += c[j - l] * c[k - l].conj();
                }
                if j == k {
                    entries[(j, j)] = Complex64::new(j as f64 - acc.re, 0.0);
                } else {
                    entries[(j, k)] = -acc;
                    entries[(k, j)] = -acc.conj();
                }
            }
        }
        Self { entries }
    }

    pub fn truncation(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn apply(&self, v: &HardyCoeffs) -> Result<HardyCoeffs> {
        if v.truncation() != self.truncation() {
            return Err(LabError::TruncationMismatch {
                left: self.truncation(),
                right: v.truncation(),
            });
        }
        let x = DVector::from_column_slice(v.as_slice());
        HardyCoeffs::new((&self.entries * x).as_slice().to_vec())
    }

    /// Max-entry deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.entries - self.entries.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn spectrum(&self) -> Result<LaxSpectrum> {
        LaxSpectrum::new(self)
    }
}

impl LaxSpectrum {
    pub fn new(lax: &LaxMatrix) -> Result<Self> {
        let defect = lax.hermiticity_defect();
        if defect > 1e-12 {
            return Err(LabError::Eigen(format!("matrix not Hermitian (defect {defect:e})")));
        }
        let eig = SymmetricEigen::try_new(lax.entries.clone(), f64::EPSILON, 0)
            .ok_or_else(|| LabError::Eigen("QR iteration did not converge".into()))?;
        if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(LabError::Eigen("non-finite eigenvalue".into()));
        }
        Ok(Self {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Phases `exp(-2 i t lambda_k)`.
    pub fn phases(&self, t: f64) -> DVector<Complex64> {
        self.eigenvalues.map(|lam| Complex64::from_polar(1.0, -2.0 * t * lam))
    }

    pub fn propagator(&self, t: f64) -> Propagator {
        let phases = self.phases(t);
        let mut scaled = self.eigenvectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[k];
        }
        Propagator {
            matrix: scaled * self.eigenvectors.adjoint(),
            t,
        }
    }

    /// `exp(-2 i t L) v` without forming the matrix.
    pub fn apply_propagator(&self, v: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let mut w = self.eigenvectors.ad_mul(v);
        for (k, lam) in self.eigenvalues.iter().enumerate() {
            w[k] *= Complex64::from_polar(1.0, -2.0 * t * lam);
        }
        &self.eigenvectors * w
    }
}

impl Propagator {
    /// `max |U^H U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let d = self.matrix.adjoint() * &self.matrix - DMatrix::<Complex64>::identity(n, n);
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Unitary group `exp(-2 i t L)` via Hermitian eigendecomposition.
pub fn propagator(lax: &LaxMatrix, t: f64) -> Result<Propagator> {
    Ok(lax.spectrum()?.propagator(t))
}

/// `I_k[u] = Re <u, L_u^k u>`.
pub fn conserved_quantity(u: &HardyCoeffs, k: usize) -> Result<f64> {
    Ok(conserved_quantities(u, k)?[k])
}

/// `I_0, ..., I_kmax` from a single Lax matrix and repeated mat-vecs.
pub fn conserved_quantities(u: &HardyCoeffs, kmax: usize) -> Result<Vec<f64>> {
    let lax = LaxMatrix::build(u);
    let u_vec = DVector::from_column_slice(u.as_slice());
    let mut v = u_vec.clone();
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        if k > 0 {
            v = lax.entries() * v;
        }
        // <u, v> = sum u_n conj(v_n)
        let ip: Complex64 = u_vec.iter().zip(v.iter()).map(|(a, b)| a * b.conj()).sum();
        if ip.im.abs() > 1e-10 * ip.re.abs().max(1.0) {
            return Err(LabError::InvalidArgument(format!(
                "I_{k} has imaginary part {:e}; Lax matrix not Hermitian",
                ip.im
            )));
        }
        out.push(ip.re);
    }
    Ok(out)
}
