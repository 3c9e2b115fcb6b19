//! Photon statistics, quadrature moments and purity.

use alloc::borrow::Cow;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::fock::{moments_from_populations, FockVector};
use crate::math::{cis, sqrt};
use crate::protocol::ProtocolParams;
use crate::{Error, Result};

/// Normalized ladder-operator moments `⟨a⟩`, `⟨a²⟩`, `⟨a†a⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderMoments {
    pub a: Complex64,
    pub a2: Complex64,
    pub n: f64,
}

/// Anything that can be handed to the observables: a pure state vector or a
/// density matrix.
pub trait QuantumState {
    fn dim(&self) -> usize;
    /// Normalized photon-number distribution.
    fn populations(&self) -> Result<Vec<f64>>;
    fn ladder_moments(&self) -> Result<LadderMoments>;
    /// Unit-trace density matrix of the state.
    fn density(&self) -> Result<Cow<'_, DensityMatrix>>;
}

impl QuantumState for FockVector {
    fn dim(&self) -> usize {
        FockVector::dim(self)
    }

    fn populations(&self) -> Result<Vec<f64>> {
        let total = self.norm_sq();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::ZeroState);
        }
        Ok(self.amps().iter().map(|a| a.norm_sqr() / total).collect())
    }

    fn ladder_moments(&self) -> Result<LadderMoments> {
        let v = self.normalized()?;
        let c = v.amps();
        let mut a = Complex64::new(0.0, 0.0);
        let mut a2 = Complex64::new(0.0, 0.0);
        let mut n = 0.0;
        for k in 0..c.len() {
            let kf = k as f64;
            n += kf * c[k].norm_sqr();
            if k >= 1 {
                a += c[k - 1].conj() * c[k] * sqrt(kf);
            }
            if k >= 2 {
                a2 += c[k - 2].conj() * c[k] * sqrt(kf * (kf - 1.0));
            }
        }
        Ok(LadderMoments { a, a2, n })
    }

    fn density(&self) -> Result<Cow<'_, DensityMatrix>> {
        Ok(Cow::Owned(DensityMatrix::from_pure(self)?))
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn populations(&self) -> Result<Vec<f64>> {
        let tr = self.trace();
        if !(tr > 0.0) {
            return Err(Error::ZeroState);
        }
        Ok(DensityMatrix::populations(self)
            .into_iter()
            .map(|p| (p / tr).max(0.0))
            .collect())
    }

    fn ladder_moments(&self) -> Result<LadderMoments> {
        let tr = self.trace();
        if !(tr > 0.0) {
            return Err(Error::ZeroState);
        }
        let mut a = Complex64::new(0.0, 0.0);
        let mut a2 = Complex64::new(0.0, 0.0);
        let mut n = 0.0;
        for k in 0..self.dim() {
            let kf = k as f64;
            n += kf * self.get(k, k).re;
            if k >= 1 {
                a += self.get(k, k - 1) * sqrt(kf);
            }
            if k >= 2 {
                a2 += self.get(k, k - 2) * sqrt(kf * (kf - 1.0));
            }
        }
        Ok(LadderMoments {
            a: a / tr,
            a2: a2 / tr,
            n: n / tr,
        })
    }

    fn density(&self) -> Result<Cow<'_, DensityMatrix>> {
        Ok(Cow::Borrowed(self))
    }
}

/// Photon-number distribution and its first two moments.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStatistics {
    pub probs: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// `variance / mean`; NaN for the vacuum.
    pub fano: f64,
}

impl PhotonStatistics {
    pub fn std_dev(&self) -> f64 {
        sqrt(self.variance)
    }
}

pub fn photon_statistics<S: QuantumState + ?Sized>(state: &S) -> Result<PhotonStatistics> {
    let probs = state.populations()?;
    let m = moments_from_populations(probs.iter().copied());
    let fano = if m.mean > 0.0 {
        m.variance / m.mean
    } else {
        f64::NAN
    };
    Ok(PhotonStatistics {
        probs,
        mean: m.mean,
        variance: m.variance,
        fano,
    })
}

/// Predicted photon-number squeezing `2|α||β|γ`: the ratio of the coherent
/// photon-number standard deviation to that of the conditional state.
pub fn squeezing_factor(p: &ProtocolParams) -> f64 {
    2.0 * p.alpha.norm() * p.beta_mag * p.gamma
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// Variance of `x̂_θ = (a e^{-iθ} + a† e^{iθ})/√2`. The vacuum gives ½.
pub fn quadrature_variance<S: QuantumState + ?Sized>(state: &S, theta: f64) -> Result<f64> {
    let m = state.ladder_moments()?;
    Ok(variance_from_moments(&m, theta))
}

pub(crate) fn variance_from_moments(m: &LadderMoments, theta: f64) -> f64 {
    let cov_a2 = m.a2 - m.a * m.a;
    let cov_n = m.n - m.a.norm_sqr();
    (cov_a2 * cis(-2.0 * theta)).re + cov_n + 0.5
}

/// Largest quadrature variance over all angles, `N + ½ + |A|` in terms of
/// the centered moments.
pub(crate) fn max_quadrature_variance(m: &LadderMoments) -> f64 {
    let cov_a2 = m.a2 - m.a * m.a;
    let cov_n = m.n - m.a.norm_sqr();
    cov_n + 0.5 + cov_a2.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_fock, fock_basis};
    use crate::protocol::conditional_state_exact;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coherent_state_is_poissonian() {
        let s = photon_statistics(&coherent_fock(c(6.0, 0.0), 116).unwrap()).unwrap();
        assert!((s.fano - 1.0).abs() < 1e-4);
        assert!((s.probs.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn conditional_state_is_squeezed() {
        let p = ProtocolParams::new(c(6.0, 0.0), 360.0, 1e-3);
        let s0 = photon_statistics(&conditional_state_exact(&p, 0.0).unwrap()).unwrap();
        assert!((s0.variance - 1.93).abs() < 0.193, "{}", s0.variance);
        let ratio = 6.0 / s0.std_dev();
        assert!((ratio - 4.32).abs() < 0.3, "ratio {ratio}");
        let s4 = photon_statistics(&conditional_state_exact(&p, 4.0).unwrap()).unwrap();
        assert!((s4.mean - 28.1).abs() < 0.5, "{}", s4.mean);
    }

    #[test]
    fn vector_and_matrix_agree() {
        let v = conditional_state_exact(&ProtocolParams::new(c(2.0, 1.0), 4.0, 0.1), 0.3).unwrap();
        let rho = DensityMatrix::from_pure(&v).unwrap();
        let a = photon_statistics(&v).unwrap();
        let b = photon_statistics(&rho).unwrap();
        assert!((a.mean - b.mean).abs() < 1e-10 && (a.variance - b.variance).abs() < 1e-10);
        let ma = v.ladder_moments().unwrap();
        let mb = rho.ladder_moments().unwrap();
        assert!((ma.a - mb.a).norm() < 1e-10 && (ma.a2 - mb.a2).norm() < 1e-10);
    }

    #[test]
    fn squeezing_factor_values() {
        let p = ProtocolParams::from_coupling(c(6.0, 0.0), 0.36, 1e-3);
        assert!((squeezing_factor(&p) - 4.32).abs() < 1e-9);
        let p = ProtocolParams::from_coupling(c(30.0, 0.0), 0.066, 1e-3);
        assert!((squeezing_factor(&p) - 3.96).abs() < 1e-9);
        let p = ProtocolParams::new(c(6.0, 0.0), 360.0, 0.0);
        assert_eq!(squeezing_factor(&p), 0.0);
    }

    #[test]
    fn vacuum_and_coherent_quadratures() {
        let vac = fock_basis(0, 10).unwrap();
        let coh = coherent_fock(c(1.3, -2.1), 80).unwrap();
        for k in 0..8 {
            let th = k as f64 * 0.4;
            assert!((quadrature_variance(&vac, th).unwrap() - 0.5).abs() < 1e-14);
            assert!((quadrature_variance(&coh, th).unwrap() - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn fock_state_quadrature_variance() {
        // ⟨n|x²|n⟩ = n + ½
        let v = fock_basis(3, 10).unwrap();
        assert!((quadrature_variance(&v, 0.7).unwrap() - 3.5).abs() < 1e-12);
    }
}
