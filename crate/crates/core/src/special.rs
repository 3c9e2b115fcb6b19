//! Special functions evaluated in scaled form.
//!
//! Everything here is a three-term recurrence whose values span hundreds of
//! orders of magnitude for photon numbers near 1000. The recurrences run on
//! mantissas kept near unity; the magnitude lives in a separate log-scale
//! that is only folded back in when a value is read out.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math::{exp, ln, sqrt, PI};

const LN_2: f64 = core::f64::consts::LN_2;
const RESCALE_BITS: i32 = 128;
const UPPER: f64 = 3.402823669209385e38; // 2^128
const LOWER: f64 = 2.938735877055719e-39; // 2^-128

/// `ln n!` via the log-gamma function.
#[inline]
pub fn ln_factorial(n: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// Running state of a three-term recurrence `y[n+1] = a_n y[n] - b_n y[n-1]`
/// whose true values are `mantissa · exp(log_base) · 2^exp2`.
struct ScaledRecurrence {
    prev: f64,
    cur: f64,
    log_base: f64,
    exp2: i32,
    multiplier: f64,
}

impl ScaledRecurrence {
    fn new(log_base: f64, first: f64, second: f64) -> Self {
        let mut r = ScaledRecurrence {
            prev: first,
            cur: second,
            log_base,
            exp2: 0,
            multiplier: 0.0,
        };
        r.refresh_multiplier();
        r
    }

    fn log_scale(&self) -> f64 {
        self.log_base + self.exp2 as f64 * LN_2
    }

    fn refresh_multiplier(&mut self) {
        let l = self.log_scale();
        self.multiplier = if (-700.0..=700.0).contains(&l) {
            exp(l)
        } else {
            f64::NAN
        };
    }

    #[inline]
    fn value(&self, mantissa: f64) -> f64 {
        if self.multiplier.is_nan() {
            if mantissa == 0.0 {
                0.0
            } else {
                let v = exp(ln(mantissa.abs()) + self.log_scale());
                if mantissa < 0.0 {
                    -v
                } else {
                    v
                }
            }
        } else {
            mantissa * self.multiplier
        }
    }

    #[inline]
    fn step(&mut self, a: f64, b: f64) {
        let next = a * self.cur - b * self.prev;
        self.prev = self.cur;
        self.cur = next;
        let big = self.cur.abs().max(self.prev.abs());
        if big > UPPER {
            self.prev *= LOWER;
            self.cur *= LOWER;
            self.exp2 += RESCALE_BITS;
            self.refresh_multiplier();
        } else if big < LOWER && big > 0.0 {
            self.prev *= UPPER;
            self.cur *= UPPER;
            self.exp2 -= RESCALE_BITS;
            self.refresh_multiplier();
        }
    }
}

/// Normalized generalized Laguerre kernel
///
/// `f_m(x) = sqrt(m! / (m+k)!) · x^(k/2) · e^(-x/2) · L_m^(k)(x)`
///
/// for `m = 0..len`. These are the moduli (up to sign) of the Fock-basis
/// matrix elements `⟨m+k|D(d)|m⟩` with `x = |d|²`, so every value lies in
/// `[-1, 1]`. The same kernel gives the Fock-basis Wigner functions.
pub fn laguerre_kernel(k: usize, x: f64, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    laguerre_kernel_into(k, x, &mut out);
    out
}

/// In-place variant of [`laguerre_kernel`]; fills all of `out`.
pub fn laguerre_kernel_into(k: usize, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    if x == 0.0 {
        let fill = if k == 0 { 1.0 } else { 0.0 };
        out.iter_mut().for_each(|v| *v = fill);
        return;
    }
    let kf = k as f64;
    let log_base = -0.5 * x + 0.5 * kf * ln(x) - 0.5 * ln_factorial(k);
    let g1 = (1.0 + kf - x) / sqrt(kf + 1.0);
    let mut rec = ScaledRecurrence::new(log_base, 1.0, g1);
    out[0] = rec.value(1.0);
    if out.len() == 1 {
        return;
    }
    out[1] = rec.value(g1);
    for m in 1..out.len() - 1 {
        let n = m as f64;
        let denom = sqrt((n + 1.0) * (n + kf + 1.0));
        let a = (2.0 * n + 1.0 + kf - x) / denom;
        let b = sqrt(n * (n + kf)) / denom;
        rec.step(a, b);
        out[m + 1] = rec.value(rec.cur);
    }
}

/// Point-independent recurrence coefficients of the order-`k` Laguerre
/// kernel, for evaluating `Σ_m c_m f_m(x)` at many `x`.
pub(crate) struct LaguerreTable {
    k: usize,
    log_norm: f64,
    // step m -> m+1 uses a = c1[m] - x·inv[m], b = b[m]
    c1: Vec<f64>,
    inv: Vec<f64>,
    b: Vec<f64>,
}

impl LaguerreTable {
    pub(crate) fn new(k: usize, len: usize) -> Self {
        let kf = k as f64;
        let steps = len.saturating_sub(1);
        let mut c1 = Vec::with_capacity(steps);
        let mut inv = Vec::with_capacity(steps);
        let mut b = Vec::with_capacity(steps);
        for m in 0..steps {
            let n = m as f64;
            let d = 1.0 / sqrt((n + 1.0) * (n + kf + 1.0));
            c1.push((2.0 * n + 1.0 + kf) * d);
            inv.push(d);
            b.push(sqrt(n * (n + kf)) * d);
        }
        LaguerreTable {
            k,
            log_norm: -0.5 * ln_factorial(k),
            c1,
            inv,
            b,
        }
    }

    /// `Σ_m coeffs[m] f_m(x)`; `coeffs` may be shorter than the table.
    pub(crate) fn dot(&self, x: f64, coeffs: &[Complex64]) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        if coeffs.is_empty() {
            return zero;
        }
        if x == 0.0 {
            return if self.k == 0 {
                coeffs.iter().sum()
            } else {
                zero
            };
        }
        let log_base = -0.5 * x + 0.5 * self.k as f64 * ln(x) + self.log_norm;
        let mut rec = ScaledRecurrence::new(log_base, 0.0, 1.0);
        let mut acc = coeffs[0] * rec.value(1.0);
        for m in 0..coeffs.len() - 1 {
            rec.step(self.c1[m] - x * self.inv[m], self.b[m]);
            let c = coeffs[m + 1];
            if c.re != 0.0 || c.im != 0.0 {
                acc += c * rec.value(rec.cur);
            }
        }
        acc
    }
}

/// Normalized Hermite functions `⟨x|n⟩` for `n = 0..len`, i.e. the
/// position-space wavefunctions of the Fock states with `x̂ = (a + a†)/√2`.
pub fn hermite_functions(x: f64, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    if len == 0 {
        return out;
    }
    let log_base = -0.5 * x * x - 0.25 * ln(PI);
    let g1 = core::f64::consts::SQRT_2 * x;
    let mut rec = ScaledRecurrence::new(log_base, 1.0, g1);
    out[0] = rec.value(1.0);
    if len == 1 {
        return out;
    }
    out[1] = rec.value(g1);
    for m in 1..len - 1 {
        let n = m as f64;
        let a = sqrt(2.0 / (n + 1.0)) * x;
        let b = sqrt(n / (n + 1.0));
        rec.step(a, b);
        out[m + 1] = rec.value(rec.cur);
    }
    out
}
