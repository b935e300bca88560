//! Wavepackets, Fourier transforms on uniform grids, free relativistic
//! evolution and the analytic time-of-arrival eigenfunctions.
//!
//! Transforms are direct quadratures with explicit phases. The destination
//! grid is always uniform, so each source point contributes a geometric
//! sequence of phases; the sequence is re-seeded from an exact `sin_cos`
//! every [`PHASOR_RESEED`] steps to keep the recurrence error bounded.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // float math is inherent in core on recent toolchains
use num_traits::Float;

use crate::grid::UniformGrid;
use crate::nystrom::{EigenSystem, InterpolationMethod};
use crate::quad::gauss_legendre;
use crate::{Error, PhysicalParams, Result};

/// Converging factor used when plotting eigenfunctions in position space.
pub const DEFAULT_CONVERGING_DELTA: f64 = 1e-3;

const PHASOR_RESEED: usize = 256;
const COVERAGE_WIDTHS: f64 = 8.0;

/// Gaussian packet `ψ(q) ∝ e^{-(q-q₀)²/4σ²} e^{ip₀q/ħ}`, optionally cut to `[q₀-a, q₀+a]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketSpec {
    pub center: f64,
    pub momentum: f64,
    pub width: f64,
    pub support_half_width: Option<f64>,
}

impl WavepacketSpec {
    pub fn gaussian(center: f64, momentum: f64, width: f64) -> Result<Self> {
        let s = WavepacketSpec {
            center,
            momentum,
            width,
            support_half_width: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_support(mut self, half_width: f64) -> Result<Self> {
        self.support_half_width = Some(half_width);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() {
            return Err(Error::domain("center", self.center, "finite"));
        }
        if !self.momentum.is_finite() {
            return Err(Error::domain("momentum", self.momentum, "finite"));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::domain("sigma", self.width, "finite and > 0"));
        }
        if let Some(a) = self.support_half_width {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::domain("support_half_width", a, "finite and > 0"));
            }
        }
        Ok(())
    }

    /// Interval outside which the packet is zero or negligible (beyond 8σ).
    pub fn extent(&self) -> (f64, f64) {
        let h = match self.support_half_width {
            Some(a) => a.min(COVERAGE_WIDTHS * self.width),
            None => COVERAGE_WIDTHS * self.width,
        };
        (self.center - h, self.center + h)
    }

    /// Fraction of the untruncated norm² kept by the support, `erf(a/√2σ)`.
    pub fn truncated_norm_fraction(&self) -> f64 {
        match self.support_half_width {
            Some(a) => libm::erf(a / (core::f64::consts::SQRT_2 * self.width)),
            None => 1.0,
        }
    }

    /// Real envelope `φ(q)`, normalized in the continuum (including the cut).
    pub fn envelope(&self, q: f64) -> f64 {
        let x = q - self.center;
        if let Some(a) = self.support_half_width {
            if x.abs() > a {
                return 0.0;
            }
        }
        let s = self.width;
        let norm = (s * (2.0 * PI).sqrt() * self.truncated_norm_fraction()).sqrt();
        (-x * x / (4.0 * s * s)).exp() / norm
    }

    /// `ψ(q) = φ(q) e^{ip₀q/ħ}`.
    pub fn psi(&self, q: f64, params: &PhysicalParams) -> Complex64 {
        let phase = self.momentum * q / params.hbar();
        Complex64::from_polar(self.envelope(q), phase)
    }

    /// Closed-form transform of the untruncated packet,
    /// `(2σ²/πħ²)^{1/4} e^{-σ²(p-p₀)²/ħ²} e^{-i(p-p₀)q₀/ħ}`.
    pub fn gaussian_momentum_amplitude(&self, p: f64, params: &PhysicalParams) -> Complex64 {
        let h = params.hbar();
        let s = self.width;
        let dp = p - self.momentum;
        let mag = (2.0 * s * s / (PI * h * h)).powf(0.25) * (-s * s * dp * dp / (h * h)).exp();
        Complex64::from_polar(mag, -dp * self.center / h)
    }

    /// `max(10ħ/σ, 10μc + |p₀|)`.
    pub fn default_p_max(&self, params: &PhysicalParams) -> f64 {
        (10.0 * params.hbar() / self.width).max(10.0 * params.rest_momentum() + self.momentum.abs())
    }
}

/// Samples of a wavefunction on a uniform position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionFunction {
    pub grid: UniformGrid,
    pub values: Vec<Complex64>,
}

/// Samples on a uniform momentum grid symmetric about 0.
///
/// `converging_delta` is the δ of the factor `e^{-δp²}` applied whenever the
/// function is transformed back to position space.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumFunction {
    pub grid: UniformGrid,
    pub values: Vec<Complex64>,
    pub converging_delta: f64,
}

fn weighted_norm(grid: &UniformGrid, values: &[Complex64]) -> f64 {
    let s: f64 = values
        .iter()
        .enumerate()
        .map(|(i, v)| grid.weight(i) * v.norm_sqr())
        .sum();
    s.sqrt()
}

impl PositionFunction {
    pub fn new(grid: UniformGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid("value count does not match the position grid".into()));
        }
        Ok(PositionFunction { grid, values })
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(grid: UniformGrid, mut f: impl FnMut(f64) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        PositionFunction { grid, values }
    }

    pub fn norm(&self) -> f64 {
        weighted_norm(&self.grid, &self.values)
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `∫ q |ψ|² / ∫ |ψ|²`.
    pub fn mean_position(&self) -> f64 {
        let d = self.density();
        let w: Vec<f64> = (0..d.len()).map(|i| d[i] * self.grid.point(i)).collect();
        self.grid.trapezoid(&w) / self.grid.trapezoid(&d)
    }
}

impl MomentumFunction {
    pub fn new(grid: UniformGrid, values: Vec<Complex64>, converging_delta: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid("value count does not match the momentum grid".into()));
        }
        if !grid.is_symmetric() {
            return Err(Error::Grid("momentum grid must be symmetric about p = 0".into()));
        }
        if !(converging_delta >= 0.0 && converging_delta.is_finite()) {
            return Err(Error::domain("converging_delta", converging_delta, "finite and >= 0"));
        }
        Ok(MomentumFunction {
            grid,
            values,
            converging_delta,
        })
    }

    pub fn with_converging_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::domain("converging_delta", delta, "finite and >= 0"));
        }
        self.converging_delta = delta;
        Ok(self)
    }

    pub fn norm(&self) -> f64 {
        weighted_norm(&self.grid, &self.values)
    }

    /// `Σ w_j conj(self_j) other_j` on a shared grid.
    pub fn inner(&self, other: &MomentumFunction) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::Grid("inner product needs identical momentum grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| a.conj() * b * self.grid.weight(i))
            .sum())
    }
}

fn momentum_grid(p_grid: UniformGrid) -> Result<UniformGrid> {
    if !p_grid.is_symmetric() {
        return Err(Error::Grid("momentum grid must be symmetric about p = 0".into()));
    }
    Ok(p_grid)
}

/// Checks `Δq·p_max/ħ < π` and `Δp·max|q|/ħ < π`.
pub fn check_sampling(q_grid: &UniformGrid, p_grid: &UniformGrid, hbar: f64) -> Result<()> {
    let a = q_grid.step() * p_grid.max_abs() / hbar;
    if !(a < PI) {
        return Err(Error::Sampling {
            grid: "position",
            product: a,
        });
    }
    let b = p_grid.step() * q_grid.max_abs() / hbar;
    if !(b < PI) {
        return Err(Error::Sampling {
            grid: "momentum",
            product: b,
        });
    }
    Ok(())
}

/// `out_j = Σ_k c_k e^{i s y_j x_k / ħ}` for a uniform destination grid `y`.
///
/// Loops over sources and advances the phase along the destination grid by a
/// constant factor, re-seeding exactly every `PHASOR_RESEED` steps.
fn phase_sum(xs: &[f64], coeffs: &[Complex64], dst: &UniformGrid, sign: f64, hbar: f64) -> Vec<Complex64> {
    let n = dst.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (x, c) in xs.iter().zip(coeffs) {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let k = sign * x / hbar;
        let step = Complex64::from_polar(1.0, k * dst.step());
        let mut j = 0;
        while j < n {
            let mut ph = Complex64::from_polar(1.0, k * dst.point(j)) * c;
            let end = (j + PHASOR_RESEED).min(n);
            for o in &mut out[j..end] {
                *o += ph;
                ph *= step;
            }
            j = end;
        }
    }
    out
}

/// `ψ̃(p) = (2πħ)^{-1/2} ∫ e^{-ipq/ħ} ψ(q) dq` by trapezoid quadrature.
pub fn to_momentum(f: &PositionFunction, p_grid: UniformGrid, params: &PhysicalParams) -> Result<MomentumFunction> {
    let p_grid = momentum_grid(p_grid)?;
    let h = params.hbar();
    check_sampling(&f.grid, &p_grid, h)?;
    let xs = f.grid.points();
    let pref = 1.0 / (2.0 * PI * h).sqrt();
    let coeffs: Vec<Complex64> = f
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * (f.grid.weight(i) * pref))
        .collect();
    let values = phase_sum(&xs, &coeffs, &p_grid, -1.0, h);
    MomentumFunction::new(p_grid, values, 0.0)
}

fn momentum_coefficients(g: &MomentumFunction, t: f64, params: &PhysicalParams) -> Vec<Complex64> {
    let h = params.hbar();
    let pref = 1.0 / (2.0 * PI * h).sqrt();
    let d = g.converging_delta;
    g.values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let p = g.grid.point(j);
            let damp = if d > 0.0 { (-d * p * p).exp() } else { 1.0 };
            let phase = Complex64::from_polar(1.0, -params.energy(p) * t / h);
            v * phase * (g.grid.weight(j) * pref * damp)
        })
        .collect()
}

/// `ψ(q, t) = (2πħ)^{-1/2} ∫ e^{ipq/ħ} e^{-iE_p t/ħ} e^{-δp²} ψ̃(p) dp`.
pub fn to_position(
    g: &MomentumFunction,
    q_grid: UniformGrid,
    t: f64,
    params: &PhysicalParams,
) -> Result<PositionFunction> {
    let h = params.hbar();
    check_sampling(&q_grid, &g.grid, h)?;
    let ps = g.grid.points();
    let coeffs = momentum_coefficients(g, t, params);
    let values = phase_sum(&ps, &coeffs, &q_grid, 1.0, h);
    PositionFunction::new(q_grid, values)
}

/// `ψ(q, t)` at a single point, same quadrature as [`to_position`].
pub fn position_value(g: &MomentumFunction, q: f64, t: f64, params: &PhysicalParams) -> Complex64 {
    let h = params.hbar();
    let coeffs = momentum_coefficients(g, t, params);
    coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| c * Complex64::from_polar(1.0, g.grid.point(j) * q / h))
        .sum()
}

/// Multiplies by `e^{-iE_p t/ħ}`.
pub fn evolve(g: &MomentumFunction, t: f64, params: &PhysicalParams) -> MomentumFunction {
    let h = params.hbar();
    let values = g
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| v * Complex64::from_polar(1.0, -params.energy(g.grid.point(j)) * t / h))
        .collect();
    MomentumFunction {
        grid: g.grid,
        values,
        converging_delta: g.converging_delta,
    }
}

/// Samples the packet on `q_grid`, renormalized to unit discrete norm.
pub fn gaussian_position(
    spec: &WavepacketSpec,
    q_grid: UniformGrid,
    params: &PhysicalParams,
) -> Result<PositionFunction> {
    spec.validate()?;
    let (lo, hi) = spec.extent();
    if q_grid.start() > lo || q_grid.stop() < hi {
        return Err(Error::Grid(alloc::format!(
            "position grid [{}, {}] does not cover the packet extent [{lo}, {hi}]",
            q_grid.start(),
            q_grid.stop()
        )));
    }
    let mut f = PositionFunction::from_fn(q_grid, |q| spec.psi(q, params));
    let n = f.norm();
    if !(n > 0.0) {
        return Err(Error::Grid("position grid does not resolve the packet support".into()));
    }
    for v in f.values.iter_mut() {
        *v /= n;
    }
    Ok(f)
}

/// Momentum representation of the packet on `p_grid`.
///
/// Untruncated packets use the closed form. Truncated ones are integrated
/// with composite Gauss–Legendre over the support, which has no jumps.
pub fn gaussian_momentum(
    spec: &WavepacketSpec,
    p_grid: UniformGrid,
    params: &PhysicalParams,
) -> Result<MomentumFunction> {
    spec.validate()?;
    let p_grid = momentum_grid(p_grid)?;
    let values = match spec.support_half_width {
        None => p_grid
            .points()
            .iter()
            .map(|p| spec.gaussian_momentum_amplitude(*p, params))
            .collect(),
        Some(_) => {
            let h = params.hbar();
            let (lo, hi) = spec.extent();
            // at least one panel per half oscillation at the largest |p|
            let periods = (hi - lo) * p_grid.max_abs() / (2.0 * PI * h);
            let panels = ((2.0 * periods).ceil() as usize).max(8) + 8;
            let (x, w) = gauss_legendre(16)?;
            let hw = 0.5 * (hi - lo) / panels as f64;
            let pref = 1.0 / (2.0 * PI * h).sqrt();
            let mut xs = Vec::with_capacity(panels * 16);
            let mut cs = Vec::with_capacity(panels * 16);
            for k in 0..panels {
                let mid = lo + (2 * k + 1) as f64 * hw;
                for (xi, wi) in x.iter().zip(&w) {
                    let q = mid + hw * xi;
                    xs.push(q);
                    cs.push(spec.psi(q, params) * (hw * wi * pref));
                }
            }
            phase_sum(&xs, &cs, &p_grid, -1.0, h)
        }
    };
    MomentumFunction::new(p_grid, values, 0.0)
}

/// Momentum representation of a coarse-grained eigenmode, zero outside the box.
///
/// The spline interpolant is integrated node interval by node interval with
/// Gauss–Legendre panels short enough to resolve `e^{-ipq/ħ}` at the largest |p|.
pub fn eigenmode_momentum(system: &EigenSystem, index: usize, p_grid: UniformGrid) -> Result<MomentumFunction> {
    let p_grid = momentum_grid(p_grid)?;
    let h = system.params.hbar();
    let it = system.interpolant(index, InterpolationMethod::Spline)?;
    let l = system.grid.half_length();
    let mut breaks = Vec::with_capacity(system.grid.len() + 2);
    breaks.push(-l);
    breaks.extend_from_slice(system.grid.nodes());
    breaks.push(l);
    let (x, w) = gauss_legendre(8)?;
    let pref = 1.0 / (2.0 * PI * h).sqrt();
    let kmax = p_grid.max_abs() / h;
    let mut xs = Vec::new();
    let mut cs = Vec::new();
    for seg in breaks.windows(2) {
        let len = seg[1] - seg[0];
        if !(len > 0.0) {
            continue;
        }
        let panels = (kmax * len / 2.0).ceil() as usize + 1;
        let hw = 0.5 * len / panels as f64;
        for k in 0..panels {
            let mid = seg[0] + (2 * k + 1) as f64 * hw;
            for (xi, wi) in x.iter().zip(&w) {
                let q = mid + hw * xi;
                xs.push(q);
                cs.push(it.eval(q)? * (hw * wi * pref));
            }
        }
    }
    let values = phase_sum(&xs, &cs, &p_grid, -1.0, h);
    MomentumFunction::new(p_grid, values, 0.0)
}

/// `√(|p|c/E_p)`, the common relativistic factor of all eigenfunctions.
fn velocity_factor(p: f64, params: &PhysicalParams) -> f64 {
    (p.abs() * params.light_speed() / params.energy(p)).sqrt()
}

/// `√(c/4πħ) √(|p|c/E_p) e^{iE_pτ/ħ}`.
pub fn nonnodal_amplitude(p: f64, tau: f64, params: &PhysicalParams) -> Complex64 {
    let pref = (params.light_speed() / (4.0 * PI * params.hbar())).sqrt();
    Complex64::from_polar(
        pref * velocity_factor(p, params),
        params.energy(p) * tau / params.hbar(),
    )
}

/// `sgn(p)` times the non-nodal amplitude.
pub fn nodal_amplitude(p: f64, tau: f64, params: &PhysicalParams) -> Complex64 {
    nonnodal_amplitude(p, tau, params) * crate::sgn(p) as f64
}

/// `√(ħ/πε) (sin(εE_p/ħ)/E_p) √(|p|c/E_p) e^{iE_pτ/ħ}`.
pub fn razavi_real_amplitude(p: f64, tau: f64, epsilon: f64, params: &PhysicalParams) -> Complex64 {
    let h = params.hbar();
    let e = params.energy(p);
    let mag = (h / (PI * epsilon)).sqrt() * (epsilon * e / h).sin() / e * velocity_factor(p, params);
    Complex64::from_polar(1.0, e * tau / h) * mag
}

fn sample(p_grid: UniformGrid, f: impl Fn(f64) -> Complex64) -> Result<MomentumFunction> {
    let p_grid = momentum_grid(p_grid)?;
    let values = p_grid.points().iter().map(|p| f(*p)).collect();
    MomentumFunction::new(p_grid, values, 0.0)
}

pub fn nonnodal_eigenfunction(p_grid: UniformGrid, tau: f64, params: &PhysicalParams) -> Result<MomentumFunction> {
    sample(p_grid, |p| nonnodal_amplitude(p, tau, params))
}

pub fn nodal_eigenfunction(p_grid: UniformGrid, tau: f64, params: &PhysicalParams) -> Result<MomentumFunction> {
    sample(p_grid, |p| nodal_amplitude(p, tau, params))
}

pub fn razavi_real_eigenfunction(
    p_grid: UniformGrid,
    tau: f64,
    epsilon: f64,
    params: &PhysicalParams,
) -> Result<MomentumFunction> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain("epsilon", epsilon, "finite and > 0"));
    }
    sample(p_grid, |p| razavi_real_amplitude(p, tau, epsilon, params))
}

/// Complex-τ eigenfunction and whether it could be normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct RazaviComplex {
    pub function: MomentumFunction,
    pub normalized: bool,
}

/// `N √(|p|c/E_p) e^{iE_pτ/ħ}`.
///
/// `|φ| ∝ e^{-E_p Im τ/ħ}`, so the function decays only for `Im τ > 0`; it is
/// then scaled to unit discrete norm. Otherwise `N = 1`.
pub fn razavi_complex_eigenfunction(
    p_grid: UniformGrid,
    tau: Complex64,
    params: &PhysicalParams,
) -> Result<RazaviComplex> {
    if !(tau.re.is_finite() && tau.im.is_finite()) {
        return Err(Error::domain("tau", tau.re, "finite"));
    }
    let h = params.hbar();
    let mut f = sample(p_grid, |p| {
        let e = params.energy(p);
        (Complex64::i() * tau * (e / h)).exp() * velocity_factor(p, params)
    })?;
    let normalized = tau.im > 0.0;
    if normalized {
        let n = f.norm();
        if n > 0.0 && n.is_finite() {
            for v in f.values.iter_mut() {
                *v /= n;
            }
        }
    }
    Ok(RazaviComplex {
        function: f,
        normalized,
    })
}

/// Per-snapshot localization measures around an arrival point.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalReport {
    pub times: Vec<f64>,
    /// `∫ (q - q_a)² |ψ|² / ∫ |ψ|²` over the window.
    pub spreads: Vec<f64>,
    pub t_min_spread: f64,
    /// Largest density on each side of the arrival point, if both sides have one.
    pub peaks: Vec<Option<(f64, f64)>>,
    /// Time of closest approach of the two peaks; `None` if untracked or at the boundary.
    pub t_closest_approach: Option<f64>,
}

// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if !(a > 0.0) {
        return x[1];
    }
    // y' = d1 + a(2x - x0 - x1) = 0
    let v = 0.5 * (x[0] + x[1] - d1 / a);
    v.clamp(x[0], x[2])
}

/// Index of the minimum and the refined abscissa, `None` at the boundary.
fn refined_min(x: &[f64], y: &[f64]) -> Option<f64> {
    let i = (0..y.len()).min_by(|a, b| y[*a].total_cmp(&y[*b]))?;
    if i == 0 || i + 1 == y.len() {
        return None;
    }
    Some(parabola_vertex([x[i - 1], x[i], x[i + 1]], [y[i - 1], y[i], y[i + 1]]))
}

fn refined_peak(q: &[f64], d: &[f64], idx: &[usize]) -> Option<f64> {
    let &best = idx.iter().max_by(|a, b| d[**a].total_cmp(&d[**b]))?;
    if !(d[best] > 0.0) {
        return None;
    }
    if best == 0 || best + 1 >= d.len() {
        return Some(q[best]);
    }
    let neg = [-d[best - 1], -d[best], -d[best + 1]];
    Some(parabola_vertex([q[best - 1], q[best], q[best + 1]], neg))
}

/// Windowed spread and two-peak tracking over time-ordered snapshots.
pub fn arrival_diagnostic(
    snapshots: &[(f64, PositionFunction)],
    arrival_point: f64,
    window_half_width: f64,
) -> Result<ArrivalReport> {
    if snapshots.len() < 3 {
        return Err(Error::Grid("arrival diagnostic needs at least three snapshots".into()));
    }
    if !(window_half_width > 0.0) {
        return Err(Error::domain("window_half_width", window_half_width, "> 0"));
    }
    if !snapshots.windows(2).all(|w| w[0].0 < w[1].0) {
        return Err(Error::Grid("snapshot times must be strictly increasing".into()));
    }
    let mut times = Vec::with_capacity(snapshots.len());
    let mut spreads = Vec::with_capacity(snapshots.len());
    let mut peaks = Vec::with_capacity(snapshots.len());
    for (t, f) in snapshots {
        let idx: Vec<usize> = (0..f.grid.len())
            .filter(|&i| (f.grid.point(i) - arrival_point).abs() <= window_half_width)
            .collect();
        if idx.len() < 3 {
            return Err(Error::Grid("analysis window holds fewer than three grid points".into()));
        }
        let q: Vec<f64> = idx.iter().map(|&i| f.grid.point(i)).collect();
        let d: Vec<f64> = idx.iter().map(|&i| f.values[i].norm_sqr()).collect();
        let h = f.grid.step();
        let trap = |v: &[f64]| -> f64 {
            let n = v.len();
            h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1]))
        };
        let mass = trap(&d);
        let m2: Vec<f64> = q
            .iter()
            .zip(&d)
            .map(|(x, p)| (x - arrival_point) * (x - arrival_point) * p)
            .collect();
        spreads.push(if mass > 0.0 { trap(&m2) / mass } else { f64::INFINITY });
        times.push(*t);

        let left: Vec<usize> = (0..q.len()).filter(|&k| q[k] < arrival_point).collect();
        let right: Vec<usize> = (0..q.len()).filter(|&k| q[k] > arrival_point).collect();
        peaks.push(match (refined_peak(&q, &d, &left), refined_peak(&q, &d, &right)) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        });
    }
    let t_min_spread = refined_min(&times, &spreads)
        .ok_or_else(|| Error::Inconclusive("spread minimum lies at the boundary of the time window".into()))?;
    let t_closest_approach = if peaks.iter().all(Option::is_some) {
        let sep: Vec<f64> = peaks.iter().map(|p| p.map_or(0.0, |(a, b)| b - a)).collect();
        refined_min(&times, &sep)
    } else {
        None
    };
    Ok(ArrivalReport {
        times,
        spreads,
        t_min_spread,
        peaks,
        t_closest_approach,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_of_exact_parabola() {
        let f = |x: f64| 3.0 * (x - 0.37) * (x - 0.37) + 1.0;
        let v = parabola_vertex([0.0, 0.5, 1.5], [f(0.0), f(0.5), f(1.5)]);
        assert!((v - 0.37).abs() < 1e-14);
    }

    #[test]
    fn phase_sum_matches_direct_sum() {
        let dst = UniformGrid::symmetric(7.0, 1001).unwrap();
        let xs = [0.3, -1.7, 2.25];
        let cs = [
            Complex64::new(1.0, 0.5),
            Complex64::new(-0.2, 1.0),
            Complex64::new(0.7, 0.0),
        ];
        let out = phase_sum(&xs, &cs, &dst, -1.0, 1.3);
        for (j, o) in out.iter().enumerate() {
            let y = dst.point(j);
            let want: Complex64 = xs
                .iter()
                .zip(&cs)
                .map(|(x, c)| c * Complex64::from_polar(1.0, -x * y / 1.3))
                .sum();
            assert!((o - want).norm() < 1e-13);
        }
    }
}
