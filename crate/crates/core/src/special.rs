//! Modified Bessel K₀, K₁ and modified Struve L₋₁, L₀.
//!
//! Bessel K: power series for x ≤ 2, Steed's continued fraction (CF2) above.
//! Struve L: power series for x < 30, `L = I + M` with the asymptotic series
//! for `M` above. Both families also come exponentially scaled
//! (`e^x K`, `e^{-x} L`) so that products like `K·L` never overflow.

use core::f64::consts::{FRAC_2_PI, PI};

#[allow(unused_imports)] // float math is inherent in core on recent toolchains
use num_traits::Float;

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_MAX: f64 = 2.0;
pub(crate) const STRUVE_ASYMPTOTIC_MIN: f64 = 30.0;

fn check_k(order: i32, x: f64) -> Result<()> {
    if order != 0 && order != 1 {
        return Err(Error::domain("order", order as f64, "order in {0, 1}"));
    }
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::domain("x", x, "x > 0"));
    }
    Ok(())
}

fn check_l(order: i32, x: f64) -> Result<()> {
    if order != -1 && order != 0 {
        return Err(Error::domain("order", order as f64, "order in {-1, 0}"));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain("x", x, "finite and x >= 0"));
    }
    Ok(())
}

/// `K_order(x)` for order 0 or 1.
pub fn bessel_k(order: i32, x: f64) -> Result<f64> {
    check_k(order, x)?;
    if x > 745.0 {
        return Ok(0.0);
    }
    let (k0, k1) = bessel_k01(x);
    Ok(if order == 0 { k0 } else { k1 })
}

/// `e^x K_order(x)`.
pub fn bessel_k_scaled(order: i32, x: f64) -> Result<f64> {
    check_k(order, x)?;
    let (k0, k1) = bessel_k01_scaled(x);
    Ok(if order == 0 { k0 } else { k1 })
}

/// `L_order(x)` for order -1 or 0.
pub fn struve_l(order: i32, x: f64) -> Result<f64> {
    check_l(order, x)?;
    let (lm1, l0) = struve_lm1_l0(x);
    Ok(if order == -1 { lm1 } else { l0 })
}

/// `e^{-x} L_order(x)`.
pub fn struve_l_scaled(order: i32, x: f64) -> Result<f64> {
    check_l(order, x)?;
    let (lm1, l0) = struve_lm1_l0_scaled(x);
    Ok(if order == -1 { lm1 } else { l0 })
}

/// `(K₀(x), K₁(x))`, x > 0.
pub(crate) fn bessel_k01(x: f64) -> (f64, f64) {
    if x <= SERIES_MAX {
        k01_series(x)
    } else {
        let (k0, k1) = k01_steed_scaled(x);
        let e = (-x).exp();
        (k0 * e, k1 * e)
    }
}

/// `(e^x K₀(x), e^x K₁(x))`, x > 0.
pub(crate) fn bessel_k01_scaled(x: f64) -> (f64, f64) {
    if x <= SERIES_MAX {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k01_steed_scaled(x)
    }
}

fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let ln_half = (0.5 * x).ln();

    // I₀, I₁ and the harmonic/digamma sums share the same power of y.
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    // t = y^k / (k!)², u = y^k / (k!(k+1)!)
    let mut t = 1.0;
    let mut u = 1.0;
    let mut h = 0.0; // H_k
    for k in 0..60 {
        let kf = k as f64;
        i0 += t;
        i1 += u;
        s0 += h * t;
        // ψ(k+1) + ψ(k+2) = -2γ + 2H_k + 1/(k+1)
        s1 += (2.0 * h - 2.0 * EULER_GAMMA + 1.0 / (kf + 1.0)) * u;
        if t < 1e-18 * i0 && k > 2 {
            break;
        }
        h += 1.0 / (kf + 1.0);
        t *= y / ((kf + 1.0) * (kf + 1.0));
        u *= y / ((kf + 1.0) * (kf + 2.0));
    }
    i1 *= 0.5 * x;
    let k0 = -(ln_half + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + i1 * ln_half - 0.25 * x * s1;
    (k0, k1)
}

/// Steed's method for the second continued fraction, order 0 and 1, scaled by e^x.
fn k01_steed_scaled(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// Power series, returned unscaled. Used for x < 30 where nothing overflows.
fn struve_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    // L₋₁: Σ y^k / (Γ(k+3/2)Γ(k+1/2)),  first term 2/π
    // L₀:  Σ (x/2)^{2k+1} / Γ(k+3/2)²,  first term 2x/π
    let mut tm = FRAC_2_PI;
    let mut t0 = FRAC_2_PI * x;
    let mut lm1 = 0.0;
    let mut l0 = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        lm1 += tm;
        l0 += t0;
        if tm <= 1e-17 * lm1 && t0 <= 1e-17 * l0.max(f64::MIN_POSITIVE) {
            break;
        }
        tm *= y / ((kf + 1.5) * (kf + 0.5));
        t0 *= y / ((kf + 1.5) * (kf + 1.5));
    }
    (lm1, l0)
}

/// `(e^{-x} I₀(x), e^{-x} I₁(x))` from the Hankel asymptotic series, x ≥ 30.
fn i01_asymptotic_scaled(x: f64) -> (f64, f64) {
    let pref = 1.0 / (2.0 * PI * x).sqrt();
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut t0: f64 = 1.0;
    let mut t1: f64 = 1.0;
    let z = 8.0 * x;
    for k in 1..200 {
        let kf = k as f64;
        let odd = (2.0 * kf - 1.0) * (2.0 * kf - 1.0);
        let n0 = -(0.0 - odd) / (kf * z);
        let n1 = -(4.0 - odd) / (kf * z);
        let prev0 = t0;
        let prev1 = t1;
        s0 += t0;
        s1 += t1;
        t0 *= n0;
        t1 *= n1;
        if t0.abs() < 1e-17 * s0.abs() && t1.abs() < 1e-17 * s1.abs() {
            break;
        }
        if t0.abs() > prev0.abs() || t1.abs() > prev1.abs() {
            break;
        }
    }
    (pref * s0, pref * s1)
}

/// `M = L - I` asymptotic series for order -1 and 0, x ≥ 30.
pub(crate) fn struve_minus_i(x: f64) -> (f64, f64) {
    // L₋₁ - I₁ ~ (1/π²) Σ Γ(k+½)Γ(k+3/2)(2/x)^{2k+2}
    // L₀  - I₀ ~ -(1/π²) Σ Γ(k+½)²(2/x)^{2k+1}
    let w = 2.0 / x;
    let mut tm = 0.5 * PI * w * w / (PI * PI);
    let mut t0 = PI * w / (PI * PI);
    let mut mm1 = 0.0;
    let mut m0 = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        mm1 += tm;
        m0 -= t0;
        let rm = (kf + 0.5) * (kf + 1.5) * w * w;
        let r0 = (kf + 0.5) * (kf + 0.5) * w * w;
        if rm >= 1.0 || r0 >= 1.0 || tm < 1e-17 * mm1 {
            break;
        }
        tm *= rm;
        t0 *= r0;
    }
    (mm1, m0)
}

/// `(L₋₁(x), L₀(x))`, x ≥ 0; overflows to ∞ past x ≈ 709.
pub(crate) fn struve_lm1_l0(x: f64) -> (f64, f64) {
    if x < STRUVE_ASYMPTOTIC_MIN {
        struve_series(x)
    } else {
        let (i0s, i1s) = i01_asymptotic_scaled(x);
        let (mm1, m0) = struve_minus_i(x);
        let half = (0.5 * x).exp();
        // split the exponential to postpone overflow
        ((i1s * half) * half + mm1, (i0s * half) * half + m0)
    }
}

/// `(e^{-x} L₋₁(x), e^{-x} L₀(x))`, x ≥ 0.
pub(crate) fn struve_lm1_l0_scaled(x: f64) -> (f64, f64) {
    if x < STRUVE_ASYMPTOTIC_MIN {
        let (lm1, l0) = struve_series(x);
        let e = (-x).exp();
        (lm1 * e, l0 * e)
    } else {
        let (i0s, i1s) = i01_asymptotic_scaled(x);
        let (mm1, m0) = struve_minus_i(x);
        let e = (-x).exp();
        (i1s + mm1 * e, i0s + m0 * e)
    }
}
