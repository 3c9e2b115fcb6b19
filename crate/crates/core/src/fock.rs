//! Truncated Fock-space states and operators.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Index;

use num_complex::Complex64;

use crate::math::{cis, ln, polar_exp};
use crate::special::{laguerre_kernel_into, ln_factorial};
use crate::{Error, Result, DEFAULT_TAIL_TOL};

/// Number of top basis states inspected for truncation tail mass.
pub const TAIL_WINDOW: usize = 5;

/// Complex amplitudes over the basis `|0⟩ … |dim-1⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<Complex64>,
}

impl FockVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParams("Fock vector needs dim >= 1"));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidParams("non-finite amplitude"));
        }
        Ok(FockVector { amps })
    }

    pub(crate) fn from_vec_unchecked(amps: Vec<Complex64>) -> Self {
        FockVector { amps }
    }

    pub fn zeros(dim: usize) -> Self {
        FockVector {
            amps: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Hermitian inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(u, v)| u.conj() * v)
            .sum())
    }

    pub fn normalized(&self) -> Result<FockVector> {
        let n = self.norm_sq();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::ZeroState);
        }
        let s = 1.0 / crate::math::sqrt(n);
        Ok(FockVector {
            amps: self.amps.iter().map(|a| a * s).collect(),
        })
    }

    pub fn scaled(&self, factor: Complex64) -> FockVector {
        FockVector {
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// Probability mass in the top [`TAIL_WINDOW`] basis states, relative to
    /// the squared norm.
    pub fn relative_tail_mass(&self) -> f64 {
        let total = self.norm_sq();
        if total == 0.0 {
            return 0.0;
        }
        let start = self.dim().saturating_sub(TAIL_WINDOW);
        let tail: f64 = self.amps[start..].iter().map(|a| a.norm_sqr()).sum();
        tail / total
    }

    /// `|⟨self|other⟩|² / (⟨self|self⟩⟨other|other⟩)`.
    pub fn fidelity(&self, other: &FockVector) -> Result<f64> {
        let ov = self.inner(other)?;
        let n = self.norm_sq() * other.norm_sq();
        if n <= 0.0 {
            return Err(Error::ZeroState);
        }
        Ok(ov.norm_sqr() / n)
    }
}

impl Index<usize> for FockVector {
    type Output = Complex64;

    fn index(&self, n: usize) -> &Complex64 {
        &self.amps[n]
    }
}

/// Dense `dim × dim` matrix in the Fock basis, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    dim: usize,
    entries: Vec<Complex64>,
    leakage: f64,
}

impl FockOperator {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for n in 0..dim {
            entries[n * dim + n] = Complex64::new(1.0, 0.0);
        }
        FockOperator {
            dim,
            entries,
            leakage: 0.0,
        }
    }

    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_dim(dim * dim, entries.len())?;
        Ok(FockOperator {
            dim,
            entries,
            leakage: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    /// Largest norm deficit `1 - ‖column‖²` over all columns. Zero for
    /// operators that are not truncations of a unitary.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn column_norm_sq(&self, col: usize) -> f64 {
        (0..self.dim).map(|r| self.get(r, col).norm_sqr()).sum()
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        check_dim(self.dim, v.dim())?;
        let d = self.dim;
        // skip negligible input amplitudes; states here are narrow bands
        let peak = v.amps.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
        let cutoff = peak * 1e-36;
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        for (n, a) in v.amps.iter().enumerate() {
            if a.norm_sqr() <= cutoff {
                continue;
            }
            for (m, o) in out.iter_mut().enumerate() {
                *o += self.entries[m * d + n] * a;
            }
        }
        Ok(FockVector { amps: out })
    }

    pub fn matmul(&self, other: &FockOperator) -> Result<FockOperator> {
        check_dim(self.dim, other.dim)?;
        let d = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.entries[k * d..(k + 1) * d];
                for (e, b) in entries[i * d..(i + 1) * d].iter_mut().zip(row) {
                    *e += a * b;
                }
            }
        }
        Ok(FockOperator {
            dim: d,
            entries,
            leakage: 0.0,
        })
    }
}

pub fn apply(op: &FockOperator, v: &FockVector) -> Result<FockVector> {
    op.apply(v)
}

pub fn inner(u: &FockVector, v: &FockVector) -> Result<Complex64> {
    u.inner(v)
}

pub fn norm_sq(v: &FockVector) -> f64 {
    v.norm_sq()
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `⌈|α|² + safety·|α| + 20⌉`, a cutoff that leaves a negligible Poissonian
/// tail (below 1e-12 for `safety = 10`).
pub fn choose_dim(alpha_mag: f64, safety: f64) -> usize {
    let a = alpha_mag.abs();
    libm::ceil(a * a + safety * a + 20.0) as usize
}

/// The number state `|n⟩` in a `dim`-dimensional basis.
pub fn fock_basis(n: usize, dim: usize) -> Result<FockVector> {
    if n >= dim {
        return Err(Error::InvalidParams(
            "Fock index outside the truncated basis",
        ));
    }
    let mut v = FockVector::zeros(dim);
    v.amps[n] = Complex64::new(1.0, 0.0);
    Ok(v)
}

/// Log-magnitude and phase of the coherent-state coefficient
/// `e^{-|α|²/2} α^n / √n!`.
#[inline]
pub(crate) fn coherent_log_coeff(alpha: Complex64, n: usize) -> Option<(f64, f64)> {
    let r = alpha.norm();
    if r == 0.0 {
        return if n == 0 { Some((0.0, 0.0)) } else { None };
    }
    let nf = n as f64;
    let log_mag = -0.5 * r * r + nf * ln(r) - 0.5 * ln_factorial(n);
    Some((log_mag, nf * alpha.arg()))
}

/// Coherent state `|α⟩` truncated to `dim` with the default tail tolerance.
pub fn coherent_fock(alpha: Complex64, dim: usize) -> Result<FockVector> {
    coherent_fock_with_tol(alpha, dim, DEFAULT_TAIL_TOL)
}

/// Coherent state `|α⟩`, built in log space so `|α|` in the tens is safe.
///
/// Fails when the probability missing from the truncated basis (or sitting
/// in its top few states) reaches `tail_tol`.
pub fn coherent_fock_with_tol(alpha: Complex64, dim: usize, tail_tol: f64) -> Result<FockVector> {
    if dim == 0 {
        return Err(Error::InvalidParams("dim must be >= 1"));
    }
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::InvalidParams("non-finite coherent amplitude"));
    }
    let amps: Vec<Complex64> = (0..dim)
        .map(|n| match coherent_log_coeff(alpha, n) {
            Some((lm, ph)) => polar_exp(lm, ph),
            None => Complex64::new(0.0, 0.0),
        })
        .collect();
    let v = FockVector { amps };
    let missing = (1.0 - v.norm_sq()).max(0.0);
    let start = dim.saturating_sub(TAIL_WINDOW);
    let tail: f64 = v.amps[start..].iter().map(|a| a.norm_sqr()).sum();
    let tail_mass = if alpha.norm() == 0.0 {
        missing
    } else {
        missing.max(tail)
    };
    if tail_mass >= tail_tol {
        return Err(Error::Truncation {
            dim,
            tail_mass,
            tol: tail_tol,
        });
    }
    Ok(v)
}

/// Truncated matrix of `D(d) = exp(d a† - d* a)`.
///
/// Elements come from the Laguerre closed form
/// `⟨m+k|D|m⟩ = √(m!/(m+k)!) d^k e^{-|d|²/2} L_m^{(k)}(|d|²)` and its mirror
/// above the diagonal, one diagonal at a time, so the cost is `O(dim²)`.
/// Norm lost off the top of the basis is recorded in [`FockOperator::leakage`].
pub fn displacement_operator(d: Complex64, dim: usize) -> FockOperator {
    let x = d.norm_sqr();
    let theta = d.arg();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut kernel = vec![0.0; dim];
    for k in 0..dim {
        let len = dim - k;
        laguerre_kernel_into(k, x, &mut kernel[..len]);
        let lower = cis(k as f64 * theta);
        let upper = if k % 2 == 0 {
            lower.conj()
        } else {
            -lower.conj()
        };
        for (m, f) in kernel[..len].iter().enumerate() {
            entries[(m + k) * dim + m] = lower * f;
            if k > 0 {
                entries[m * dim + m + k] = upper * f;
            }
        }
    }
    let mut op = FockOperator {
        dim,
        entries,
        leakage: 0.0,
    };
    op.leakage = (0..dim)
        .map(|n| 1.0 - op.column_norm_sq(n))
        .fold(0.0, f64::max)
        .max(0.0);
    op
}

/// Mean and variance of the photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumberMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Photon-number mean and variance of `v` after normalization.
pub fn number_moments(v: &FockVector) -> Result<NumberMoments> {
    let total = v.norm_sq();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::ZeroState);
    }
    Ok(moments_from_populations(
        v.amps.iter().map(|a| a.norm_sqr() / total),
    ))
}

pub(crate) fn moments_from_populations<I: Iterator<Item = f64>>(probs: I) -> NumberMoments {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (n, p) in probs.enumerate() {
        let nf = n as f64;
        m1 += nf * p;
        m2 += nf * nf * p;
    }
    NumberMoments {
        mean: m1,
        variance: (m2 - m1 * m1).max(0.0),
    }
}
