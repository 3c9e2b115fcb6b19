//! Averaging the displaced outputs over homodyne outcomes:
//! `ρ = ∫ |Φ(x)⟩⟨Φ(x)| dx`.
//!
//! The integral runs on a composite Simpson grid placed over the bulk of the
//! outcome density. Outer products are accumulated row by row with a fixed
//! summation order, so the result does not depend on how many workers ran.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::math::{sqrt, SQRT_2};
use crate::protocol::{
    conditional_state_unchecked, displacement_param, output_state, ProtocolParams,
};
use crate::{Error, FockVector, Result};

/// Simpson points on the first adapted grid.
pub const BASE_POINTS: usize = 401;
/// Largest allowed change of any `ρ` entry between successive refinements.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Allowed deficit of `Σ w P(x)` below one.
pub const COVERAGE_TOL: f64 = 1e-4;
/// Allowed distance of the raw (pre-normalization) trace from one.
pub const RAW_TRACE_TOL: f64 = 1e-3;
const MAX_REFINEMENTS: usize = 5;
const COARSE_POINTS: usize = 4001;
const WIDTHS: [f64; 3] = [6.0, 8.0, 10.0];

/// Outcome points with quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct XGrid {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl XGrid {
    /// Composite Simpson rule on `[lo, hi]`; `n` is rounded up to odd.
    pub fn simpson(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParams("empty integration interval"));
        }
        let n = if n < 3 {
            3
        } else if n.is_multiple_of(2) {
            n + 1
        } else {
            n
        };
        let h = (hi - lo) / (n - 1) as f64;
        let points = (0..n).map(|i| lo + i as f64 * h).collect();
        let weights = (0..n)
            .map(|i| {
                let c = if i == 0 || i == n - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect();
        Ok(XGrid { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.points[0], self.points[self.points.len() - 1])
    }

    /// Same interval with twice the density (`2n - 1` points).
    pub fn refined(&self) -> Result<Self> {
        let (lo, hi) = self.bounds();
        XGrid::simpson(lo, hi, 2 * self.len() - 1)
    }

    /// `Σ w_i P(x_i)`.
    pub fn captured_probability(&self, p: &ProtocolParams) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * conditional_state_unchecked(p, *x).norm_sq())
            .sum()
    }

    /// Places a [`BASE_POINTS`]-point Simpson grid over the outcome density.
    ///
    /// A coarse scan spans every probe center `√2 Re(β e^{iγn})` that carries
    /// Poissonian weight, padded by 8 vacuum widths. The mean `μ` and spread
    /// `σ` of `P(x)` from that scan set the window `[μ - 6σ, μ + 6σ]`, widened
    /// to 8σ and 10σ if the captured probability falls short.
    pub fn adapt(p: &ProtocolParams) -> Result<Self> {
        p.validate()?;
        let (lo, hi) = probe_center_range(p);
        let h = (hi - lo) / (COARSE_POINTS - 1) as f64;
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for i in 0..COARSE_POINTS {
            let x = lo + i as f64 * h;
            let dens = conditional_state_unchecked(p, x).norm_sq();
            m0 += dens;
            m1 += dens * x;
            m2 += dens * x * x;
        }
        if !(m0 > 0.0) {
            return Err(Error::GridCoverage { captured: 0.0 });
        }
        let mu = m1 / m0;
        let sigma = sqrt((m2 / m0 - mu * mu).max(0.0)).max(1e-3);
        let mut captured = 0.0;
        for width in WIDTHS {
            let grid = XGrid::simpson(mu - width * sigma, mu + width * sigma, BASE_POINTS)?;
            captured = grid.captured_probability(p);
            if (captured - 1.0).abs() <= COVERAGE_TOL {
                return Ok(grid);
            }
        }
        Err(Error::GridCoverage { captured })
    }
}

fn probe_center_range(p: &ProtocolParams) -> (f64, f64) {
    let a = p.alpha.norm();
    let a2 = a * a;
    let n_lo = (a2 - 10.0 * a - 5.0).max(0.0) as usize;
    let n_hi = ((a2 + 10.0 * a + 5.0) as usize).min(p.dim - 1);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for n in n_lo..=n_hi {
        let c = SQRT_2 * p.beta_n(n).re;
        lo = lo.min(c);
        hi = hi.max(c);
    }
    (lo - 8.0, hi + 8.0)
}

/// Averaged output state with integration diagnostics.
#[derive(Debug, Clone)]
pub struct EnsembleState {
    pub rho: DensityMatrix,
    /// `Tr ρ` before rescaling to one.
    pub raw_trace: f64,
    /// Grid points whose displacement had to be clamped.
    pub clamped_points: usize,
    pub grid: XGrid,
    /// Largest entry change against the previous refinement, when one ran.
    pub last_change: Option<f64>,
}

/// Outputs `|Φ(x_i)⟩` with their nonnegligible index ranges.
struct Outputs {
    states: Vec<FockVector>,
    ranges: Vec<(usize, usize)>,
    clamped: usize,
}

fn compute_outputs(p: &ProtocolParams, xs: &[f64]) -> Result<Outputs> {
    let one = |x: &f64| -> Result<(FockVector, bool)> {
        let clamped = displacement_param(p, *x).clamped;
        Ok((output_state(p, *x)?, clamped))
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<(FockVector, bool)>> = {
        use rayon::prelude::*;
        xs.par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(FockVector, bool)>> = xs.iter().map(one).collect();

    let mut states = Vec::with_capacity(xs.len());
    let mut ranges = Vec::with_capacity(xs.len());
    let mut clamped = 0;
    for r in results {
        let (v, c) = r?;
        clamped += c as usize;
        ranges.push(support(&v));
        states.push(v);
    }
    Ok(Outputs {
        states,
        ranges,
        clamped,
    })
}

/// Index range outside which amplitudes are below 1e-16 of the peak.
fn support(v: &FockVector) -> (usize, usize) {
    let a = v.amps();
    let peak = a.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    let cut = peak * 1e-32;
    let first = a.iter().position(|c| c.norm_sqr() > cut);
    match first {
        None => (0, 0),
        Some(s) => {
            let e = a.iter().rposition(|c| c.norm_sqr() > cut).unwrap_or(s) + 1;
            (s, e)
        }
    }
}

/// Adds `Σ_i w_i |v_i⟩⟨v_i|` to the upper triangle of `acc`, one row per
/// task, summing over `i` in index order.
fn accumulate(acc: &mut [Complex64], dim: usize, out: &Outputs, weights: &[f64]) {
    let row_task = |(m, row): (usize, &mut [Complex64])| {
        for ((v, &(s, e)), w) in out.states.iter().zip(&out.ranges).zip(weights) {
            if m < s || m >= e {
                continue;
            }
            let a = v.amps();
            let am = a[m] * *w;
            for n in m..e {
                row[n] += am * a[n].conj();
            }
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        acc.par_chunks_mut(dim).enumerate().for_each(row_task);
    }
    #[cfg(not(feature = "parallel"))]
    acc.chunks_mut(dim).enumerate().for_each(row_task);
}

fn mirror_upper(acc: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut full = acc.to_vec();
    for m in 0..dim {
        for n in 0..m {
            full[m * dim + n] = acc[n * dim + m].conj();
        }
    }
    full
}

fn finish(
    dim: usize,
    raw: Vec<Complex64>,
    grid: XGrid,
    clamped: usize,
    change: Option<f64>,
) -> Result<EnsembleState> {
    let (rho, raw_trace) = DensityMatrix::normalize_raw(dim, raw)?;
    if (raw_trace - 1.0).abs() > RAW_TRACE_TOL {
        return Err(Error::GridCoverage {
            captured: raw_trace,
        });
    }
    Ok(EnsembleState {
        rho,
        raw_trace,
        clamped_points: clamped,
        grid,
        last_change: change,
    })
}

/// `ρ = Σ_i w_i |Φ(x_i)⟩⟨Φ(x_i)|` on a given grid, rescaled to unit trace.
pub fn ensemble_state(p: &ProtocolParams, grid: &XGrid) -> Result<EnsembleState> {
    p.validate()?;
    let captured = grid.captured_probability(p);
    if (captured - 1.0).abs() > COVERAGE_TOL {
        return Err(Error::GridCoverage { captured });
    }
    let dim = p.dim;
    let out = compute_outputs(p, &grid.points)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
    accumulate(&mut acc, dim, &out, &grid.weights);
    finish(
        dim,
        mirror_upper(&acc, dim),
        grid.clone(),
        out.clamped,
        None,
    )
}

/// Adapted grid followed by Simpson refinements until no entry of `ρ`
/// moves by more than [`CONVERGENCE_TOL`].
///
/// Each refinement only evaluates the new midpoints: the running sums over
/// endpoints, odd and even points are kept separately and recombined with
/// the Simpson weights of the current spacing.
pub fn ensemble_state_converged(p: &ProtocolParams) -> Result<EnsembleState> {
    let base = XGrid::adapt(p)?;
    let dim = p.dim;
    let (lo, hi) = base.bounds();
    let mut n = base.len();
    let mut h = (hi - lo) / (n - 1) as f64;

    let zero = Complex64::new(0.0, 0.0);
    let mut ends = vec![zero; dim * dim];
    let mut odd = vec![zero; dim * dim];
    let mut even = vec![zero; dim * dim];
    let mut clamped;

    {
        let out = compute_outputs(p, &base.points)?;
        clamped = out.clamped;
        let w_end: Vec<f64> = (0..n)
            .map(|i| if i == 0 || i == n - 1 { 1.0 } else { 0.0 })
            .collect();
        let w_odd: Vec<f64> = (0..n).map(|i| if i % 2 == 1 { 1.0 } else { 0.0 }).collect();
        let w_even: Vec<f64> = (0..n)
            .map(|i| {
                if i % 2 == 0 && i != 0 && i != n - 1 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        accumulate(&mut ends, dim, &out, &w_end);
        accumulate(&mut odd, dim, &out, &w_odd);
        accumulate(&mut even, dim, &out, &w_even);
    }
    let combine =
        |h: f64, ends: &[Complex64], odd: &[Complex64], even: &[Complex64]| -> Vec<Complex64> {
            ends.iter()
                .zip(odd)
                .zip(even)
                .map(|((e, o), v)| (e + o * 4.0 + v * 2.0) * (h / 3.0))
                .collect()
        };
    let mut current = combine(h, &ends, &odd, &even);
    let mut last_change = f64::INFINITY;

    for _ in 0..MAX_REFINEMENTS {
        let mids: Vec<f64> = (0..n - 1).map(|i| lo + (i as f64 + 0.5) * h).collect();
        let out = compute_outputs(p, &mids)?;
        clamped += out.clamped;
        for (e, o) in even.iter_mut().zip(odd.iter_mut()) {
            *e += *o;
            *o = zero;
        }
        accumulate(&mut odd, dim, &out, &vec![1.0; mids.len()]);
        n = 2 * n - 1;
        h *= 0.5;
        let next = combine(h, &ends, &odd, &even);
        last_change = next
            .iter()
            .zip(&current)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        current = next;
        if last_change < CONVERGENCE_TOL {
            let grid = XGrid::simpson(lo, hi, n)?;
            return finish(
                dim,
                mirror_upper(&current, dim),
                grid,
                clamped,
                Some(last_change),
            );
        }
    }
    Err(Error::NotConverged {
        change: last_change,
        tol: CONVERGENCE_TOL,
    })
}
