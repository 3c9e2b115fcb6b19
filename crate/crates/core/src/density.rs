//! Density matrices in the truncated Fock basis.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fock::{check_dim, FockVector};
use crate::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Hermitian, unit-trace matrix `ρ_{mn} = ⟨m|ρ|n⟩`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|ψ⟩⟨ψ|` for the normalized `ψ`.
    pub fn from_pure(v: &FockVector) -> Result<Self> {
        let v = v.normalized()?;
        let dim = v.dim();
        let a = v.amps();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for m in 0..dim {
            for n in 0..dim {
                entries[m * dim + n] = a[m] * a[n].conj();
            }
        }
        Ok(DensityMatrix { dim, entries })
    }

    /// Validates Hermiticity and trace, then symmetrizes away rounding noise.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_dim(dim * dim, entries.len())?;
        if dim == 0 {
            return Err(Error::InvalidDensityMatrix("empty matrix"));
        }
        if entries
            .iter()
            .any(|e| !e.re.is_finite() || !e.im.is_finite())
        {
            return Err(Error::InvalidDensityMatrix("non-finite entry"));
        }
        let mut rho = DensityMatrix { dim, entries };
        for m in 0..dim {
            for n in m..dim {
                let a = rho.get(m, n);
                let b = rho.get(n, m).conj();
                if (a - b).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidDensityMatrix("not Hermitian"));
                }
            }
        }
        rho.symmetrize();
        if (rho.trace() - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix("trace differs from 1"));
        }
        Ok(rho)
    }

    /// Hermitian-symmetrizes and rescales to unit trace. Returns the matrix
    /// and the trace it had before rescaling.
    pub(crate) fn normalize_raw(dim: usize, entries: Vec<Complex64>) -> Result<(Self, f64)> {
        let mut rho = DensityMatrix { dim, entries };
        rho.symmetrize();
        let tr = rho.trace();
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::ZeroState);
        }
        let s = 1.0 / tr;
        rho.entries.iter_mut().for_each(|e| *e *= s);
        Ok((rho, tr))
    }

    fn symmetrize(&mut self) {
        let d = self.dim;
        for m in 0..d {
            let diag = &mut self.entries[m * d + m];
            *diag = Complex64::new(diag.re, 0.0);
            for n in m + 1..d {
                let avg = 0.5 * (self.entries[m * d + n] + self.entries[n * d + m].conj());
                self.entries[m * d + n] = avg;
                self.entries[n * d + m] = avg.conj();
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[m * self.dim + n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim)
            .map(|n| self.entries[n * self.dim + n].re)
            .sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|n| self.entries[n * self.dim + n].re)
            .collect()
    }

    /// `Tr ρ²`, which for a Hermitian matrix is the sum of `|ρ_{mn}|²`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum()
    }

    /// `⟨ψ|ρ|ψ⟩` for normalized `ψ`.
    pub fn expectation_in(&self, v: &FockVector) -> Result<f64> {
        check_dim(self.dim, v.dim())?;
        let v = v.normalized()?;
        let a = v.amps();
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..self.dim {
            let row = &self.entries[m * self.dim..(m + 1) * self.dim];
            let rv: Complex64 = row.iter().zip(a).map(|(r, x)| r * x).sum();
            acc += a[m].conj() * rv;
        }
        Ok(acc.re)
    }

    /// Largest elementwise difference to another matrix of equal dimension.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Whether every eigenvalue is at least `-tol`.
    ///
    /// Runs a Cholesky factorization of `ρ + tol·I`, which succeeds exactly
    /// when the smallest eigenvalue of `ρ` exceeds `-tol`.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let d = self.dim;
        let mut l = self.entries.clone();
        for n in 0..d {
            l[n * d + n] += tol;
        }
        for j in 0..d {
            let mut diag = l[j * d + j].re;
            for k in 0..j {
                diag -= l[j * d + k].norm_sqr();
            }
            if !(diag > 0.0) {
                return false;
            }
            let ljj = crate::math::sqrt(diag);
            l[j * d + j] = Complex64::new(ljj, 0.0);
            for i in j + 1..d {
                let mut s = l[i * d + j];
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k].conj();
                }
                l[i * d + j] = s / ljj;
            }
        }
        true
    }

    /// Checks the Hermitian, trace and positivity invariants.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        for m in 0..d {
            for n in m..d {
                if (self.get(m, n) - self.get(n, m).conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidDensityMatrix("not Hermitian"));
                }
            }
        }
        if (self.trace() - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix("trace differs from 1"));
        }
        if !self.is_positive_semidefinite(POSITIVITY_TOL) {
            return Err(Error::InvalidDensityMatrix(
                "negative eigenvalue below -1e-8",
            ));
        }
        Ok(())
    }
}
