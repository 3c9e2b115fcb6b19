//! Cross-Kerr entanglement, homodyne conditioning and feed-forward
//! displacement for a single measurement outcome.
//!
//! After the interaction `exp(i γ n_a n_b)` the joint state is
//! `Σ_n c_n |n⟩_a |β e^{iγn}⟩_b` with coherent coefficients `c_n` of `|α⟩`.
//! Projecting mode `b` onto the quadrature eigenstate `⟨x|` leaves the
//! unnormalized mode-`a` state `|ψ(x)⟩ = Σ_n c_n ⟨x|β e^{iγn}⟩ |n⟩`, whose
//! squared norm is the outcome density `P(x)`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fock::{choose_dim, coherent_log_coeff, displacement_operator, FockVector, TAIL_WINDOW};
use crate::math::{cis, ln, polar_exp, sqrt, PI, SQRT_2};
use crate::special::hermite_functions;
use crate::{Error, Result, DEFAULT_LEAK_TOL, DEFAULT_TAIL_TOL};

/// Physical knobs of one protocol run plus numerical tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    /// Coherent amplitude of mode `a`.
    pub alpha: Complex64,
    /// `|β|`, amplitude of the probe mode `b`.
    pub beta_mag: f64,
    /// Phase of `β`. `None` selects `π/2 - γ|α|²`, the phase that aligns the
    /// spread of probe states with the measured quadrature.
    pub beta_phase_override: Option<f64>,
    /// Cross-phase shift per photon pair, in radians.
    pub gamma: f64,
    /// Truncation of mode `a`.
    pub dim: usize,
    /// Truncation of mode `b`, only used by the brute-force two-mode oracle.
    pub dim_b: usize,
    pub tail_tol: f64,
    pub leak_tol: f64,
}

impl ProtocolParams {
    /// Parameters with automatic truncations and default tolerances.
    pub fn new(alpha: Complex64, beta_mag: f64, gamma: f64) -> Self {
        ProtocolParams {
            alpha,
            beta_mag,
            beta_phase_override: None,
            gamma,
            dim: choose_dim(alpha.norm(), 10.0),
            dim_b: choose_dim(beta_mag, 10.0),
            tail_tol: DEFAULT_TAIL_TOL,
            leak_tol: DEFAULT_LEAK_TOL,
        }
    }

    /// Parameters given the coupling product `γ|β|` and `γ` separately.
    pub fn from_coupling(alpha: Complex64, gamma_beta: f64, gamma: f64) -> Self {
        let beta_mag = if gamma > 0.0 { gamma_beta / gamma } else { 0.0 };
        Self::new(alpha, beta_mag, gamma)
    }

    pub fn with_beta_phase(mut self, phase: f64) -> Self {
        self.beta_phase_override = Some(phase);
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.alpha.re,
            self.alpha.im,
            self.beta_mag,
            self.gamma,
            self.tail_tol,
            self.leak_tol,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite parameter"));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParams("gamma must be >= 0"));
        }
        if self.beta_mag < 0.0 {
            return Err(Error::InvalidParams("beta_mag must be >= 0"));
        }
        if let Some(ph) = self.beta_phase_override {
            if !ph.is_finite() {
                return Err(Error::InvalidParams("non-finite beta phase"));
            }
        }
        if self.dim < choose_dim(self.alpha.norm(), 10.0) {
            return Err(Error::InvalidParams("dim below choose_dim(|alpha|, 10)"));
        }
        if !(self.tail_tol > 0.0) || !(self.leak_tol > 0.0) {
            return Err(Error::InvalidParams("tolerances must be positive"));
        }
        Ok(())
    }

    /// `π/2 - γ|α|²`.
    pub fn default_beta_phase(&self) -> f64 {
        0.5 * PI - self.gamma * self.alpha.norm_sqr()
    }

    pub fn beta_phase(&self) -> f64 {
        self.beta_phase_override
            .unwrap_or_else(|| self.default_beta_phase())
    }

    pub fn beta(&self) -> Complex64 {
        cis(self.beta_phase()) * self.beta_mag
    }

    /// Probe amplitude correlated with `n` photons in mode `a`: `β e^{iγn}`.
    pub fn beta_n(&self, n: usize) -> Complex64 {
        cis(self.beta_phase() + self.gamma * n as f64) * self.beta_mag
    }

    /// `γ|β|`, which together with `|α|` fixes the shape of the output state.
    pub fn coupling(&self) -> f64 {
        self.gamma * self.beta_mag
    }

    /// Outcome where the displacement radicand `|α|² - x/(√2 γ|β|)` vanishes.
    pub fn clamp_threshold(&self) -> f64 {
        SQRT_2 * self.coupling() * self.alpha.norm_sqr()
    }

    fn uses_default_phase(&self) -> bool {
        match self.beta_phase_override {
            None => true,
            Some(ph) => {
                let diff = libm::remainder(ph - self.default_beta_phase(), 2.0 * PI);
                diff.abs() <= 1e-12
            }
        }
    }
}

/// Log-magnitude and phase of `⟨x|μ⟩`.
#[inline]
fn homodyne_log(x: f64, mu: Complex64) -> (f64, f64) {
    let shift = x - SQRT_2 * mu.re;
    (
        -0.25 * ln(PI) - 0.5 * shift * shift,
        SQRT_2 * mu.im * x - mu.re * mu.im,
    )
}

/// Position wavefunction of the coherent state `|μ⟩`:
/// `π^{-1/4} exp[-(x - √2 Re μ)²/2 + i√2 Im μ · x - i Re μ Im μ]`.
pub fn homodyne_overlap(x: f64, mu: Complex64) -> Complex64 {
    let (lm, ph) = homodyne_log(x, mu);
    polar_exp(lm, ph)
}

pub(crate) fn conditional_state_unchecked(p: &ProtocolParams, x: f64) -> FockVector {
    let amps: Vec<Complex64> = (0..p.dim)
        .map(|n| match coherent_log_coeff(p.alpha, n) {
            Some((lc, pc)) => {
                let (lh, ph) = homodyne_log(x, p.beta_n(n));
                polar_exp(lc + lh, pc + ph)
            }
            None => Complex64::new(0.0, 0.0),
        })
        .collect();
    FockVector::from_vec_unchecked(amps)
}

fn check_tail(v: &FockVector, tol: f64) -> Result<()> {
    let tail = v.relative_tail_mass();
    if tail >= tol {
        return Err(Error::Truncation {
            dim: v.dim(),
            tail_mass: tail,
            tol,
        });
    }
    Ok(())
}

/// Unnormalized conditional state `|ψ(x)⟩` of mode `a`, assembled termwise
/// in log space. Its squared norm is the outcome density.
pub fn conditional_state_exact(p: &ProtocolParams, x: f64) -> Result<FockVector> {
    p.validate()?;
    if !x.is_finite() {
        return Err(Error::InvalidParams("non-finite homodyne outcome"));
    }
    let v = conditional_state_unchecked(p, x);
    check_tail(&v, p.tail_tol)?;
    Ok(v)
}

/// Conditional state with `β e^{iγn}` linearized around `n = |α|²`:
///
/// `e^{iφ-|α|²/2} π^{-1/4} Σ_n α^n/√n! · exp[iγ|β|² n - (γ|β|(n-|α|²) + x/√2)²] |n⟩`
///
/// with `φ = √2 x|β| - γ|α|²|β|²`, the global phase that makes this agree
/// with [`conditional_state_exact`] to first order. Only meaningful with the
/// default probe phase.
pub fn conditional_state_approx(p: &ProtocolParams, x: f64) -> Result<FockVector> {
    p.validate()?;
    if !p.uses_default_phase() {
        return Err(Error::InvalidParams(
            "linearized state requires beta phase pi/2 - gamma |alpha|^2",
        ));
    }
    let a2 = p.alpha.norm_sqr();
    let gb = p.coupling();
    let bb = p.beta_mag * p.beta_mag;
    let phi = SQRT_2 * x * p.beta_mag - p.gamma * a2 * bb;
    let amps: Vec<Complex64> = (0..p.dim)
        .map(|n| match coherent_log_coeff(p.alpha, n) {
            Some((lc, pc)) => {
                let nf = n as f64;
                let g = gb * (nf - a2) + x / SQRT_2;
                let lm = lc - 0.25 * ln(PI) - g * g;
                polar_exp(lm, pc + p.gamma * bb * nf + phi)
            }
            None => Complex64::new(0.0, 0.0),
        })
        .collect();
    let v = FockVector::from_vec_unchecked(amps);
    check_tail(&v, p.tail_tol)?;
    Ok(v)
}

/// Outcome density `P(x) = ⟨ψ(x)|ψ(x)⟩`.
pub fn outcome_density(p: &ProtocolParams, x: f64) -> Result<f64> {
    Ok(conditional_state_exact(p, x)?.norm_sq())
}

/// Feed-forward displacement for one outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub value: Complex64,
    /// Set when `x` lies beyond the point where the radicand turns negative;
    /// the magnitude is then held at `|α|`.
    pub clamped: bool,
}

/// `d(x) = (|α| - √(|α|² - x/(√2 γ|β|))) · e^{i(γ|β|² + arg α)}`.
///
/// The conditional state has mean photon number `|α|² - x/(√2 γ|β|)`; `d(x)`
/// moves its mean amplitude back to `|α|` along its own phase. Without
/// coupling (`γ|β| = 0`) nothing depends on `x` and the displacement is zero.
pub fn displacement_param(p: &ProtocolParams, x: f64) -> Displacement {
    let gb = p.coupling();
    if gb <= 0.0 || x == 0.0 {
        return Displacement {
            value: Complex64::new(0.0, 0.0),
            clamped: false,
        };
    }
    let a = p.alpha.norm();
    let a2 = a * a;
    let mut radicand = a2 - x / (SQRT_2 * gb);
    let mut clamped = false;
    if radicand < 0.0 {
        if radicand < -1e-12 * a2.max(1.0) {
            clamped = true;
        }
        radicand = 0.0;
    }
    let mag = a - sqrt(radicand);
    let phase = p.gamma * p.beta_mag * p.beta_mag + p.alpha.arg();
    Displacement {
        value: cis(phase) * mag,
        clamped,
    }
}

/// Displaced output `|Φ(x)⟩ = D[d(x)] |ψ(x)⟩`, unnormalized.
///
/// Fails when the truncated displacement loses more than `leak_tol` of the
/// (relative) norm.
pub fn output_state(p: &ProtocolParams, x: f64) -> Result<FockVector> {
    let psi = conditional_state_exact(p, x)?;
    let d = displacement_param(p, x);
    displace_checked(p, &psi, d.value)
}

pub(crate) fn displace_checked(
    p: &ProtocolParams,
    psi: &FockVector,
    d: Complex64,
) -> Result<FockVector> {
    if d == Complex64::new(0.0, 0.0) {
        return Ok(psi.clone());
    }
    let op = displacement_operator(d, psi.dim());
    let phi = op.apply(psi)?;
    let before = psi.norm_sq();
    if before > 0.0 {
        let leaked = (before - phi.norm_sq()) / before;
        if leaked.abs() > p.leak_tol {
            return Err(Error::Leakage {
                leaked,
                tol: p.leak_tol,
            });
        }
    }
    Ok(phi)
}

/// Cached `|Φ(0)⟩` for evaluating the normalized overlap at many outcomes.
#[derive(Debug, Clone)]
pub struct FidelityReference {
    params: ProtocolParams,
    reference: FockVector,
    norm_sq: f64,
}

impl FidelityReference {
    pub fn new(p: &ProtocolParams) -> Result<Self> {
        let reference = output_state(p, 0.0)?;
        let norm_sq = reference.inner(&reference)?.re;
        if !(norm_sq > 0.0) {
            return Err(Error::ZeroState);
        }
        Ok(FidelityReference {
            params: p.clone(),
            reference,
            norm_sq,
        })
    }

    /// Complex `F(x) = ⟨Φ(0)|Φ(x)⟩ / √(⟨Φ(0)|Φ(0)⟩⟨Φ(x)|Φ(x)⟩)`.
    pub fn at(&self, x: f64) -> Result<Complex64> {
        self.overlap_with(&output_state(&self.params, x)?)
    }

    /// `F` for an already computed (unnormalized) output state.
    ///
    /// Evaluated literally as written, so `F(0)` is exactly one; falls back
    /// to normalizing first when the norm product underflows.
    pub fn overlap_with(&self, phi: &FockVector) -> Result<Complex64> {
        let n = phi.inner(phi)?.re;
        if !(n > 0.0) {
            return Err(Error::ZeroState);
        }
        let denom = self.norm_sq * n;
        if denom.is_normal() {
            Ok(self.reference.inner(phi)? / sqrt(denom))
        } else {
            self.reference.normalized()?.inner(&phi.normalized()?)
        }
    }
}

/// Normalized overlap `F(x)` between the displaced outputs at `x` and at `0`.
/// The modulus is what measures outcome independence; the phase is kept so
/// callers can inspect either convention.
pub fn fidelity_profile(p: &ProtocolParams, x: f64) -> Result<Complex64> {
    FidelityReference::new(p)?.at(x)
}

/// Brute-force conditional state on the truncated two-mode product space.
///
/// Builds `|α⟩ ⊗ |β⟩` by direct recursion of the coherent coefficients,
/// applies the diagonal phase `e^{iγ n m}`, and projects mode `b` with the
/// Hermite functions `⟨x|m⟩`. Shares no code path with
/// [`conditional_state_exact`]; cost is `O(dim · dim_b)`.
pub fn oracle_conditional_state(p: &ProtocolParams, x: f64) -> Result<FockVector> {
    p.validate()?;
    if p.dim_b < choose_dim(p.beta_mag, 10.0) {
        return Err(Error::InvalidParams("dim_b below choose_dim(|beta|, 10)"));
    }
    let ca = direct_coherent(p.alpha, p.dim);
    let cb = direct_coherent(p.beta(), p.dim_b);
    for (c, dim) in [(&ca, p.dim), (&cb, p.dim_b)] {
        let norm: f64 = c.iter().map(|v| v.norm_sqr()).sum();
        let start = dim.saturating_sub(TAIL_WINDOW);
        let tail: f64 = c[start..].iter().map(|v| v.norm_sqr()).sum();
        let lost = (1.0 - norm).max(tail);
        if lost >= p.tail_tol {
            return Err(Error::Truncation {
                dim,
                tail_mass: lost,
                tol: p.tail_tol,
            });
        }
    }
    let hx = hermite_functions(x, p.dim_b);
    let amps: Vec<Complex64> = ca
        .iter()
        .enumerate()
        .map(|(n, an)| {
            let proj: Complex64 = cb
                .iter()
                .zip(&hx)
                .enumerate()
                .map(|(m, (bm, h))| bm * cis(p.gamma * (n * m) as f64) * *h)
                .sum();
            an * proj
        })
        .collect();
    Ok(FockVector::from_vec_unchecked(amps))
}

fn direct_coherent(alpha: Complex64, dim: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(dim);
    let mut c = Complex64::new(libm::exp(-0.5 * alpha.norm_sqr()), 0.0);
    for n in 0..dim {
        if n > 0 {
            c = c * alpha / sqrt(n as f64);
        }
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_fock, number_moments};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn working_point() -> ProtocolParams {
        ProtocolParams::new(c(6.0, 0.0), 360.0, 1e-3)
    }

    #[test]
    fn vacuum_wavefunction_at_origin() {
        let v = homodyne_overlap(0.0, c(0.0, 0.0));
        assert!((v.re - PI.powf(-0.25)).abs() < 1e-15 && v.im == 0.0);
        assert!((v.re - 0.751126).abs() < 1e-6);
    }

    #[test]
    fn homodyne_density_is_normalized_and_centered() {
        let mu = c(1.0, 2.0);
        let h = 1e-3;
        let mut total = 0.0;
        for i in 0..=20000 {
            let x = -10.0 + i as f64 * h;
            let w = if i == 0 || i == 20000 { 0.5 } else { 1.0 };
            total += w * h * homodyne_overlap(x, mu).norm_sqr();
        }
        assert!((total - 1.0).abs() < 1e-12);

        let mu = c(1.0, 3.0);
        let peak = SQRT_2 * mu.re;
        let at = homodyne_overlap(peak, mu).norm_sqr();
        assert!(at > homodyne_overlap(peak + 1e-3, mu).norm_sqr());
        assert!(at > homodyne_overlap(peak - 1e-3, mu).norm_sqr());
    }

    #[test]
    fn no_coupling_gives_product_state() {
        let p = ProtocolParams::new(c(1.5, 0.5), 2.0, 0.0);
        for x in [-1.0, 0.3, 2.2] {
            let psi = conditional_state_exact(&p, x).unwrap();
            let coh = coherent_fock(p.alpha, p.dim).unwrap();
            let h = homodyne_overlap(x, p.beta());
            for n in 0..p.dim {
                assert!((psi[n] - coh[n] * h).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn conditional_variance_follows_coupling_law() {
        let psi = conditional_state_exact(&working_point(), 0.0).unwrap();
        let m = number_moments(&psi).unwrap();
        assert!((m.mean - 36.0).abs() < 0.5, "mean {}", m.mean);
        let want = 1.0 / (2.0f64 * 0.36).powi(2);
        assert!(
            (m.variance - want).abs() < 0.1 * want,
            "variance {}",
            m.variance
        );
    }

    #[test]
    fn exact_matches_oracle_small_instance() {
        let p = ProtocolParams::new(c(1.2, 0.0), 1.5, 0.3);
        let exact = conditional_state_exact(&p, 0.7).unwrap();
        let oracle = oracle_conditional_state(&p, 0.7).unwrap();
        assert!(exact.fidelity(&oracle).unwrap() >= 1.0 - 1e-8);
        let err: f64 = exact
            .amps()
            .iter()
            .zip(oracle.amps())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        assert!((err / oracle.norm_sq()).sqrt() < 1e-7);
    }

    #[test]
    fn oracle_without_coupling_is_product() {
        let p = ProtocolParams::new(c(0.8, -0.3), 2.0, 0.0);
        let o = oracle_conditional_state(&p, -0.4).unwrap();
        let coh = coherent_fock(p.alpha, p.dim).unwrap();
        let h = homodyne_overlap(-0.4, p.beta());
        for n in 0..p.dim {
            assert!((o[n] - coh[n] * h).norm() < 1e-12);
        }
    }

    #[test]
    fn hermite_projection_reproduces_coherent_density() {
        let beta = c(1.1, -0.6);
        let dim = choose_dim(beta.norm(), 10.0);
        let cb = direct_coherent(beta, dim);
        for x in [-1.5, 0.0, 0.9, 2.5] {
            let hx = hermite_functions(x, dim);
            let proj: Complex64 = cb.iter().zip(&hx).map(|(b, h)| b * *h).sum();
            assert!((proj.norm_sqr() - homodyne_overlap(x, beta).norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn approx_reduces_to_coherent_without_coupling() {
        let p = ProtocolParams::new(c(2.0, 0.0), 1e-6, 1e-3);
        let v = conditional_state_approx(&p, 0.0).unwrap();
        let coh = coherent_fock(p.alpha, p.dim).unwrap();
        assert!(v.fidelity(&coh).unwrap() >= 1.0 - 1e-6);
    }

    #[test]
    fn approx_mean_shift() {
        let v = conditional_state_approx(&working_point(), 4.0).unwrap();
        let m = number_moments(&v).unwrap();
        let want = 36.0 - 4.0 / (SQRT_2 * 0.36);
        assert!((want - 28.14).abs() < 0.01);
        assert!((m.mean - want).abs() < 0.5, "mean {}", m.mean);
    }

    #[test]
    fn approx_tracks_exact() {
        let p = working_point();
        let e = conditional_state_exact(&p, 0.0).unwrap();
        let a = conditional_state_approx(&p, 0.0).unwrap();
        assert!(e.fidelity(&a).unwrap() >= 0.99);
    }

    #[test]
    fn approx_rejects_foreign_phase() {
        let p = working_point().with_beta_phase(0.3);
        assert!(matches!(
            conditional_state_approx(&p, 0.0),
            Err(Error::InvalidParams(_))
        ));
        let p = working_point();
        let same = p.clone().with_beta_phase(p.default_beta_phase());
        assert!(conditional_state_approx(&same, 0.0).is_ok());
    }

    #[test]
    fn outcome_density_without_coupling_is_vacuum_gaussian() {
        let p = ProtocolParams::new(c(2.0, 0.0), 1.3, 0.0).with_beta_phase(0.4);
        for x in [-1.0, 0.5, 1.7] {
            let want = homodyne_overlap(x, p.beta()).norm_sqr();
            assert!((outcome_density(&p, x).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn displacement_zero_at_origin() {
        assert_eq!(displacement_param(&working_point(), 0.0).value, c(0.0, 0.0));
    }

    #[test]
    fn displacement_phase() {
        let d = displacement_param(&working_point(), 1.0);
        let want = libm::remainder(129.6, 2.0 * PI);
        let got = libm::remainder(d.value.arg() - want, 2.0 * PI);
        assert!(got.abs() < 1e-9);
        assert!(d.value.norm() > 0.0);
    }

    #[test]
    fn displacement_clamps_past_threshold() {
        let p = working_point();
        let xs = p.clamp_threshold();
        assert!((xs - SQRT_2 * 0.36 * 36.0).abs() < 1e-9);
        let at = displacement_param(&p, xs);
        assert!(!at.clamped);
        assert!((at.value.norm() - 6.0).abs() < 1e-6);
        let past = displacement_param(&p, 1.01 * xs);
        assert!(past.clamped);
        assert!((past.value.norm() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn output_at_origin_is_conditional_state() {
        let p = working_point();
        assert_eq!(
            output_state(&p, 0.0).unwrap(),
            conditional_state_exact(&p, 0.0).unwrap()
        );
    }

    #[test]
    fn output_preserves_norm() {
        let p = working_point();
        for x in [-5.3, -1.1, 2.0, 6.4] {
            let phi = output_state(&p, x).unwrap();
            let dens = outcome_density(&p, x).unwrap();
            assert!((phi.norm_sq() - dens).abs() <= p.leak_tol * dens);
        }
    }

    #[test]
    fn displacement_restores_mean() {
        let p = working_point();
        let m0 = number_moments(&output_state(&p, 0.0).unwrap())
            .unwrap()
            .mean;
        let m2 = number_moments(&output_state(&p, 2.0).unwrap())
            .unwrap()
            .mean;
        assert!((m0 - m2).abs() < 0.5, "{m0} vs {m2}");
    }

    #[test]
    fn fidelity_is_one_at_origin() {
        let f = fidelity_profile(&working_point(), 0.0).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn params_validation() {
        let mut p = working_point();
        p.gamma = -1.0;
        assert!(p.validate().is_err());
        let p = working_point().with_dim(50);
        assert!(matches!(
            conditional_state_exact(&p, 0.0),
            Err(Error::InvalidParams(_))
        ));
    }
}
