//! Wigner functions on rectangular phase-space grids.
//!
//! `W(x, p) = (1/π) Σ_{m,n} ρ_{mn} W_{mn}(x, p)` with the Fock-basis kernels
//! written through generalized Laguerre polynomials of `B = 2(x² + p²)`:
//!
//! `W_{m,m+k} = (-1)^m e^{ikθ} √(m!/(m+k)!) B^{k/2} e^{-B/2} L_m^{(k)}(B)`,
//!
//! where `θ = atan2(p, x)`. The kernels are evaluated with the scaled
//! recurrence from [`crate::special`], so photon numbers near 1000 do not
//! overflow. Normalization is `∫∫ W dx dp = 1`, so the vacuum peaks at `1/π`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::math::{atan2, cis, sqrt, PI, SQRT_2};
use crate::observables::{max_quadrature_variance, QuantumState};
use crate::special::{hermite_functions, LaguerreTable};
use crate::{Error, Result};

/// Minimum integrated mass for a grid to count as covering the state.
pub const MIN_COVERAGE: f64 = 0.999;

/// Entries of `ρ` below this fraction of the largest one are dropped.
const RHO_CUTOFF: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// Centered on the mean amplitude, half-width `5 + 2·max quadrature std`.
    Auto,
    /// Centered on the mean amplitude with a fixed half-width.
    Centered { half_width: f64 },
    Fixed {
        x_min: f64,
        x_max: f64,
        p_min: f64,
        p_max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub window: Window,
    pub points_x: usize,
    pub points_p: usize,
}

impl GridSpec {
    pub fn auto(points: usize) -> Self {
        GridSpec {
            window: Window::Auto,
            points_x: points,
            points_p: points,
        }
    }

    /// Same spacing and point count for every state; only the center moves.
    pub fn centered(half_width: f64, points: usize) -> Self {
        GridSpec {
            window: Window::Centered { half_width },
            points_x: points,
            points_p: points,
        }
    }

    pub fn fixed(x: (f64, f64), p: (f64, f64), points_x: usize, points_p: usize) -> Self {
        GridSpec {
            window: Window::Fixed {
                x_min: x.0,
                x_max: x.1,
                p_min: p.0,
                p_max: p.1,
            },
            points_x,
            points_p,
        }
    }
}

/// Samples `W(x_i, p_j)` stored row-major (`values[i * p_axis.len() + j]`).
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p_axis.len() + j]
    }

    pub fn dx(&self) -> f64 {
        axis_step(&self.x_axis)
    }

    pub fn dp(&self) -> f64 {
        axis_step(&self.p_axis)
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dp()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Riemann sum of `W` over the grid.
    pub fn integrated_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// `Σ_j W(x_i, p_j) Δp`, the x-quadrature density at `x_axis[i]`.
    pub fn marginal_x(&self, i: usize) -> f64 {
        let np = self.p_axis.len();
        self.values[i * np..(i + 1) * np].iter().sum::<f64>() * self.dp()
    }
}

fn axis_step(axis: &[f64]) -> f64 {
    if axis.len() < 2 {
        1.0
    } else {
        (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| lo + i as f64 * h).collect()
        }
    }
}

/// Fock-basis Wigner kernel sums prepared from a density matrix.
pub struct WignerEvaluator {
    diagonals: Vec<(usize, LaguerreTable, Vec<Complex64>)>,
}

impl WignerEvaluator {
    pub fn new(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        let tr = rho.trace();
        let peak = rho.entries().iter().map(|e| e.norm()).fold(0.0, f64::max);
        let cutoff = peak * RHO_CUTOFF;
        let mut diagonals = Vec::new();
        for k in 0..d {
            let mut coeffs: Vec<Complex64> = (0..d - k)
                .map(|m| {
                    let r = rho.get(m, m + k);
                    if r.norm() <= cutoff {
                        return Complex64::new(0.0, 0.0);
                    }
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    let mult = if k == 0 { 1.0 } else { 2.0 };
                    r * (sign * mult / tr)
                })
                .collect();
            while coeffs.last().is_some_and(|c| c.re == 0.0 && c.im == 0.0) {
                coeffs.pop();
            }
            if !coeffs.is_empty() {
                let table = LaguerreTable::new(k, coeffs.len());
                diagonals.push((k, table, coeffs));
            }
        }
        WignerEvaluator { diagonals }
    }

    pub fn eval(&self, x: f64, p: f64) -> f64 {
        let b = 2.0 * (x * x + p * p);
        let theta = atan2(p, x);
        let mut w = 0.0;
        for (k, table, coeffs) in &self.diagonals {
            let s = table.dot(b, coeffs);
            w += if *k == 0 {
                s.re
            } else {
                (cis(*k as f64 * theta) * s).re
            };
        }
        w / PI
    }
}

/// `W(x, p)` at a single phase-space point.
pub fn wigner_point<S: QuantumState + ?Sized>(state: &S, x: f64, p: f64) -> Result<f64> {
    let rho = state.density()?;
    Ok(WignerEvaluator::new(&rho).eval(x, p))
}

/// `W` along an arbitrary list of `(x, p)` points, e.g. a radial cut.
pub fn wigner_along<S: QuantumState + ?Sized>(
    state: &S,
    points: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let rho = state.density()?;
    let ev = WignerEvaluator::new(&rho);
    Ok(points.iter().map(|&(x, p)| ev.eval(x, p)).collect())
}

/// Phase-space center `√2 (Re⟨a⟩, Im⟨a⟩)` and largest quadrature standard
/// deviation of a state.
pub fn phase_space_extent<S: QuantumState + ?Sized>(state: &S) -> Result<((f64, f64), f64)> {
    let m = state.ladder_moments()?;
    let center = (SQRT_2 * m.a.re, SQRT_2 * m.a.im);
    Ok((center, sqrt(max_quadrature_variance(&m).max(0.0))))
}

/// Resolves a grid specification against a state into axes.
pub fn grid_axes<S: QuantumState + ?Sized>(
    state: &S,
    spec: &GridSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if spec.points_x == 0 || spec.points_p == 0 {
        return Err(Error::InvalidParams(
            "Wigner grid needs at least one point per axis",
        ));
    }
    let (xr, pr) = match spec.window {
        Window::Fixed {
            x_min,
            x_max,
            p_min,
            p_max,
        } => {
            if !(x_max > x_min) || !(p_max > p_min) {
                return Err(Error::InvalidParams("empty Wigner window"));
            }
            ((x_min, x_max), (p_min, p_max))
        }
        Window::Auto | Window::Centered { .. } => {
            let ((cx, cp), std) = phase_space_extent(state)?;
            let hw = match spec.window {
                Window::Centered { half_width } => half_width,
                _ => 5.0 + 2.0 * std,
            };
            if !(hw > 0.0) {
                return Err(Error::InvalidParams("Wigner half-width must be positive"));
            }
            ((cx - hw, cx + hw), (cp - hw, cp + hw))
        }
    };
    Ok((
        linspace(xr.0, xr.1, spec.points_x),
        linspace(pr.0, pr.1, spec.points_p),
    ))
}

/// Samples the Wigner function on a grid. Fails if the grid holds less than
/// [`MIN_COVERAGE`] of the quasi-probability.
pub fn wigner<S: QuantumState + ?Sized>(state: &S, spec: &GridSpec) -> Result<WignerGrid> {
    let grid = wigner_unchecked(state, spec)?;
    let mass = grid.integrated_mass();
    if mass < MIN_COVERAGE {
        return Err(Error::PhaseSpaceCoverage { mass });
    }
    Ok(grid)
}

/// [`wigner`] without the coverage check, for cuts and zoomed windows.
pub fn wigner_unchecked<S: QuantumState + ?Sized>(
    state: &S,
    spec: &GridSpec,
) -> Result<WignerGrid> {
    let (x_axis, p_axis) = grid_axes(state, spec)?;
    let rho = state.density()?;
    let ev = WignerEvaluator::new(&rho);
    let row = |x: &f64| -> Vec<f64> { p_axis.iter().map(|p| ev.eval(*x, *p)).collect() };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        x_axis.par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = x_axis.iter().map(row).collect();
    let values = rows.into_iter().flatten().collect();
    Ok(WignerGrid {
        x_axis,
        p_axis,
        values,
    })
}

/// `Σ |min(W, 0)| Δx Δp`. Only comparable between grids of equal spacing.
pub fn negativity_volume(w: &WignerGrid) -> f64 {
    w.values.iter().map(|v| (-v).max(0.0)).sum::<f64>() * w.cell_area()
}

/// `⟨x|ρ|x⟩`, the distribution of homodyne outcomes for `x̂ = (a + a†)/√2`.
pub fn quadrature_density<S: QuantumState + ?Sized>(state: &S, x: f64) -> Result<f64> {
    let rho = state.density()?;
    let d = rho.dim();
    let h = hermite_functions(x, d);
    let mut acc = 0.0;
    for m in 0..d {
        if h[m] == 0.0 {
            continue;
        }
        let row = &rho.entries()[m * d..(m + 1) * d];
        let s: f64 = row.iter().zip(&h).map(|(r, hn)| r.re * hn).sum();
        acc += h[m] * s;
    }
    Ok(acc / rho.trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_fock, fock_basis};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_peak() {
        let w = wigner_point(&fock_basis(0, 5).unwrap(), 0.0, 0.0).unwrap();
        assert!((w - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn single_photon_origin() {
        let w = wigner_point(&fock_basis(1, 5).unwrap(), 0.0, 0.0).unwrap();
        assert!((w + 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn coherent_state_gaussian() {
        let beta = c(0.7, -1.9);
        let v = coherent_fock(beta, 60).unwrap();
        for &(x, p) in &[(0.0, 0.0), (1.0, -2.7), (-0.5, 1.0), (2.0, -3.0)] {
            let want =
                (-(x - SQRT_2 * beta.re).powi(2) - (p - SQRT_2 * beta.im).powi(2)).exp() / PI;
            let got = wigner_point(&v, x, p).unwrap();
            assert!((got - want).abs() < 1e-12, "({x},{p}): {got} vs {want}");
        }
    }

    #[test]
    fn fock_state_closed_form() {
        // W_n = (-1)^n/π e^{-r²} L_n(2r²)
        let v = fock_basis(3, 8).unwrap();
        for &r2 in &[0.1, 0.8, 2.5, 6.0] {
            let l3 = |y: f64| 1.0 - 3.0 * y + 1.5 * y * y - y * y * y / 6.0;
            let want = -f64::exp(-r2) * l3(2.0 * r2) / PI;
            let got = wigner_point(&v, r2.sqrt(), 0.0).unwrap();
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn vacuum_has_no_negativity() {
        let g = wigner(&fock_basis(0, 4).unwrap(), &GridSpec::auto(61)).unwrap();
        assert_eq!(negativity_volume(&g), 0.0);
        assert!(g.min() > 0.0);
    }

    #[test]
    fn auto_window_is_centered_on_mean_amplitude() {
        let v = coherent_fock(c(2.0, 1.0), 60).unwrap();
        let (x, p) = grid_axes(&v, &GridSpec::auto(11)).unwrap();
        assert!((x[5] - 2.0 * SQRT_2).abs() < 1e-9);
        assert!((p[5] - SQRT_2).abs() < 1e-9);
        assert!((x[10] - x[0] - 2.0 * (5.0 + 2.0 * 0.5f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn clipped_grid_is_rejected() {
        let v = coherent_fock(c(3.0, 0.0), 60).unwrap();
        let spec = GridSpec::fixed((-2.0, 2.0), (-2.0, 2.0), 21, 21);
        assert!(matches!(
            wigner(&v, &spec),
            Err(Error::PhaseSpaceCoverage { .. })
        ));
    }

    #[test]
    fn quadrature_density_of_coherent_state() {
        let beta = c(1.0, 0.5);
        let v = coherent_fock(beta, 40).unwrap();
        for x in [-1.0, 0.4, 1.414, 3.0] {
            let want = (-(x - SQRT_2 * beta.re).powi(2)).exp() / PI.sqrt();
            assert!((quadrature_density(&v, x).unwrap() - want).abs() < 1e-12);
        }
    }
}
