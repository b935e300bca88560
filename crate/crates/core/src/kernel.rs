//! Position-space time kernel of the relativistic TOA operator.
//!
//! ```text
//! K(q, q') = (μ / iħ) · (q + q')/4 · T_c(|q - q'|) · sgn(q - q')
//! T_c      = 1 + (2/π) ∫₁^∞ e^{-a z} √(z² - 1)/z dz,   a = μc|Δq|/ħ
//!          = (2/π) K₁(a) + a K₀(a) L₋₁(a) + a K₁(a) L₀(a)
//! ```
//!
//! `T_c` behaves like `2/(πa)` for small `a`, which makes the kernel Cauchy
//! singular on the diagonal. Pointwise values off the diagonal are exact.

use core::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;
#[allow(unused_imports)] // float math is inherent in core on recent toolchains
use num_traits::Float;

use crate::quad::{self, Tolerance};
use crate::special::{bessel_k01_scaled, struve_lm1_l0_scaled, struve_minus_i};

// Past this point the truncation error of the M series (about e^{-2a}) is
// below rounding, and the Wronskian form keeps T_c - 1 from cancelling.
const TC_ASYMPTOTIC_MIN: f64 = 20.0;
use crate::{Error, PhysicalParams, Result};

/// Sign with `sgn(0) = 0`, which puts zeros on the kernel diagonal.
#[inline]
pub fn sgn(x: f64) -> i32 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// A kernel value; purely imaginary for real arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue(pub Complex64);

impl KernelValue {
    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn is_purely_imaginary(&self) -> bool {
        self.0.re == 0.0
    }
}

fn check_delta(delta_q: f64) -> Result<()> {
    if !(delta_q > 0.0) || !delta_q.is_finite() {
        return Err(Error::domain("delta_q", delta_q, "finite and > 0"));
    }
    Ok(())
}

/// `T_c` from its integral representation (cross-check path).
///
/// Uses `z = cosh u`, so the integrand `e^{-a cosh u} sinh²u / cosh u` has no
/// endpoint singularity, and integrates `e^{a}`-scaled to survive large `a`.
pub fn tc_integral(delta_q: f64, params: &PhysicalParams, rel_tol: f64) -> Result<f64> {
    check_delta(delta_q)?;
    if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
        return Err(Error::domain("rel_tol", rel_tol, "0 < rel_tol <= 1e-3"));
    }
    let a = params.compton_wavenumber() * delta_q;
    if !a.is_finite() {
        return Err(Error::domain("mu*c*delta_q/hbar", a, "finite"));
    }
    // cut where the scaled integrand is below e^{-50} relative to its bulk
    let x = 50.0 + a.ln().abs();
    let u_max = (1.0 + x / a).acosh();
    let est = quad::integrate(
        |u: f64| {
            let ch = u.cosh();
            let sh = u.sinh();
            // e^{-a(cosh u - 1)} with cosh u - 1 = 2 sinh²(u/2)
            let s2 = (0.5 * u).sinh();
            (-2.0 * a * s2 * s2).exp() * sh * sh / ch
        },
        0.0,
        u_max,
        Tolerance::new(0.0, rel_tol * 0.1),
    )?;
    Ok(1.0 + FRAC_2_PI * (-a).exp() * est.value)
}

/// `T_c` as a function of the dimensionless argument `a = μc|Δq|/ħ > 0`.
pub fn tc_of_a(a: f64) -> f64 {
    let (k0, k1) = bessel_k01_scaled(a);
    if a >= TC_ASYMPTOTIC_MIN {
        // L = I + M and a(K₀I₁ + K₁I₀) = 1 exactly, which keeps T_c >= 1
        // once the remainder is down at e^{-a}.
        let (mm1, m0) = struve_minus_i(a);
        let rest = FRAC_2_PI * k1 + a * (k0 * mm1 + k1 * m0);
        return 1.0 + rest.max(0.0) * (-a).exp();
    }
    let (lm1, l0) = struve_lm1_l0_scaled(a);
    // (e^a K)(e^{-a} L) = K L, and the first term carries e^{-a}
    FRAC_2_PI * k1 * (-a).exp() + a * (k0 * lm1 + k1 * l0)
}

/// `T_c` from the Bessel/Struve closed form (production path).
pub fn tc_closed(delta_q: f64, params: &PhysicalParams) -> Result<f64> {
    check_delta(delta_q)?;
    Ok(tc_of_a(params.compton_wavenumber() * delta_q))
}

/// Relativistic time kernel `K(q, q')`; exactly zero on the diagonal.
pub fn time_kernel(q: f64, q_prime: f64, params: &PhysicalParams) -> KernelValue {
    let s = sgn(q - q_prime);
    let sum = q + q_prime;
    if s == 0 || sum == 0.0 {
        return KernelValue(Complex64::new(0.0, 0.0));
    }
    let a = params.compton_wavenumber() * (q - q_prime).abs();
    let mag = params.mass() / params.hbar() * 0.25 * sum * tc_of_a(a) * s as f64;
    // 1/i = -i
    KernelValue(Complex64::new(0.0, -mag))
}

/// Aharonov–Bohm kernel, the `c → ∞` limit of [`time_kernel`].
pub fn time_kernel_nonrel(q: f64, q_prime: f64, params: &PhysicalParams) -> KernelValue {
    let s = sgn(q - q_prime);
    if s == 0 {
        return KernelValue(Complex64::new(0.0, 0.0));
    }
    let mag = params.mass() / params.hbar() * 0.25 * (q + q_prime) * s as f64;
    KernelValue(Complex64::new(0.0, -mag))
}

/// Principal value of `∫dp e^{iΔq p/ħ} (1/p) √(1 + p²/μ²c²) / (2πħ)`.
///
/// Test oracle for the closed kernel, which predicts `(i/2ħ) T_c sgn(Δq)`.
/// The odd part cancels the pole, leaving
/// `(i/πħ) ∫₀^∞ sin(Δq p/ħ) √(1 + p²/μ²c²)/p dp`. The growing tail is tamed
/// with `e^{-δp²}`; the O(δ) bias is removed by Richardson extrapolation
/// between δ and 2δ.
pub fn pv_momentum_kernel_oracle(
    delta_q: f64,
    params: &PhysicalParams,
    p_max: f64,
    n_points: usize,
) -> Result<Complex64> {
    if delta_q == 0.0 || !delta_q.is_finite() {
        return Err(Error::domain("delta_q", delta_q, "finite and nonzero"));
    }
    if !(p_max > 0.0) || !p_max.is_finite() {
        return Err(Error::domain("p_max", p_max, "finite and > 0"));
    }
    if n_points < 64 {
        return Err(Error::domain("n_points", n_points as f64, ">= 64"));
    }
    let hbar = params.hbar();
    let mc = params.rest_momentum();
    let k = delta_q / hbar;
    let delta = 40.0 / (p_max * p_max);
    // the δ-expansion of the damped integral runs in powers of δ/k²
    if delta / (k * k) > 1e-3 {
        return Err(Error::Convergence {
            estimate: 0.0,
            error: delta / (k * k),
            evaluations: 0,
        });
    }

    let (gx, gw) = quad::gauss_legendre(16)?;
    let panels = (n_points / 16).max(4);
    let run = |d: f64| {
        quad::composite_gauss(
            |p: f64| (k * p).sin() / p * (1.0 + (p / mc).powi(2)).sqrt() * (-d * p * p).exp(),
            0.0,
            p_max,
            panels,
            &gx,
            &gw,
        )
    };
    let i1: f64 = run(delta);
    let i2: f64 = run(2.0 * delta);
    let i3: f64 = run(4.0 * delta);
    let extrapolated = 2.0 * i1 - i2;
    // what survives extrapolation, plus the part of the regularized tail cut at p_max
    let bias = (extrapolated - (2.0 * i2 - i3)).abs();
    let tail = (1.0 + (p_max / mc).powi(2)).sqrt() / p_max * (-delta * p_max * p_max).exp() / (2.0 * delta * p_max);
    if bias + tail > 1e-6 * extrapolated.abs().max(1.0) {
        return Err(Error::Convergence {
            estimate: extrapolated.abs(),
            error: bias + tail,
            evaluations: 3 * panels * 16,
        });
    }
    Ok(Complex64::new(0.0, extrapolated / (PI * hbar)))
}
