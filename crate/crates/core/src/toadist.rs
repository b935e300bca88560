//! Arrival-time distributions `Π(τ) = |⟨Φ_τ|ψ⟩|²` from the analytic
//! eigenfunctions (momentum quadrature) or the coarse-grained Nyström modes.
//!
//! Only non-nodal eigenfunctions enter by default. Their raw integral is not
//! 1, so every distribution is normalized on its own τ window and keeps the
//! raw integral in its metadata.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
#[allow(unused_imports)] // float math is inherent in core on recent toolchains
use num_traits::Float;

use crate::grid::UniformGrid;
use crate::interp::Pchip;
use crate::nystrom::{EigenSystem, ParityClass};
use crate::waves::{gaussian_momentum, nonnodal_amplitude, razavi_real_amplitude, WavepacketSpec};
use crate::{Error, PhysicalParams, Result};

/// Largest mass the packet may have outside the confinement box.
pub const SUPPORT_LEAK: f64 = 1e-6;
/// Relative size of `|ψ̃|` allowed at the ends of the momentum grid.
pub const MOMENTUM_COVERAGE: f64 = 1e-8;
/// Fewest coarse modes accepted inside a τ window.
pub const MIN_MODES: usize = 4;

const ZETA_MINUS_HALF: f64 = -0.207_886_224_977_354_56;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionSource {
    CoarseNonNodal,
    AnalyticNonNodal,
    RazaviReal,
}

impl DistributionSource {
    pub fn name(&self) -> &'static str {
        match self {
            DistributionSource::CoarseNonNodal => "coarse_nonnodal",
            DistributionSource::AnalyticNonNodal => "analytic_nonnodal",
            DistributionSource::RazaviReal => "razavi_real",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionMetadata {
    pub spec: WavepacketSpec,
    pub params: PhysicalParams,
    /// Free-form description of the grids used.
    pub provenance: String,
    /// Trapezoid integral of the raw density over the τ window.
    pub raw_integral: f64,
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToaDistribution {
    pub tau_grid: UniformGrid,
    /// `|⟨Φ_τ|ψ⟩|²` before normalization.
    pub raw: Vec<f64>,
    /// `raw / raw_integral` when normalized, otherwise `raw`.
    pub density: Vec<f64>,
    pub source: DistributionSource,
    pub metadata: DistributionMetadata,
}

impl ToaDistribution {
    /// Wraps a raw density and normalizes it on the τ window.
    pub fn from_raw(
        tau_grid: UniformGrid,
        raw: Vec<f64>,
        source: DistributionSource,
        spec: WavepacketSpec,
        params: PhysicalParams,
        provenance: String,
    ) -> Result<Self> {
        if raw.len() != tau_grid.len() {
            return Err(Error::Grid("density length does not match the τ grid".into()));
        }
        if let Some(v) = raw.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Inconclusive(alloc::format!(
                "density sample {v} is not a finite non-negative number"
            )));
        }
        let raw_integral = tau_grid.trapezoid(&raw);
        let normalized = raw_integral > 0.0;
        let density = if normalized {
            raw.iter().map(|v| v / raw_integral).collect()
        } else {
            raw.clone()
        };
        Ok(ToaDistribution {
            tau_grid,
            raw,
            density,
            source,
            metadata: DistributionMetadata {
                spec,
                params,
                provenance,
                raw_integral,
                normalized,
            },
        })
    }

    pub fn taus(&self) -> Vec<f64> {
        self.tau_grid.points()
    }

    pub fn max_raw(&self) -> f64 {
        self.raw.iter().copied().fold(0.0, f64::max)
    }

    /// `∫ τ Π(τ) dτ` of the normalized density.
    pub fn mean(&self) -> f64 {
        let w: Vec<f64> = (0..self.tau_grid.len())
            .map(|i| self.tau_grid.point(i) * self.density[i])
            .collect();
        self.tau_grid.trapezoid(&w)
    }

    /// Location of the maximum, refined by a parabola through the top three samples.
    pub fn peak(&self) -> f64 {
        let n = self.density.len();
        let mut k = 0;
        for i in 1..n {
            if self.density[i] > self.density[k] {
                k = i;
            }
        }
        let t = self.tau_grid.point(k);
        if k == 0 || k + 1 == n {
            return t;
        }
        let (a, b, c) = (self.density[k - 1], self.density[k], self.density[k + 1]);
        let den = a - 2.0 * b + c;
        if den == 0.0 {
            return t;
        }
        t + 0.5 * (a - c) / den * self.tau_grid.step()
    }

    /// Trapezoid mass of the normalized density on `[a, b] ∩ window`, with
    /// linear interpolation in the cut cells.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let g = &self.tau_grid;
        let lo = a.max(g.start());
        let hi = b.min(g.stop());
        if !(hi > lo) {
            return 0.0;
        }
        let at = |t: f64| {
            let x = ((t - g.start()) / g.step()).clamp(0.0, (g.len() - 1) as f64);
            let i = (x.floor() as usize).min(g.len() - 2);
            let u = x - i as f64;
            self.density[i] * (1.0 - u) + self.density[i + 1] * u
        };
        let mut pts = Vec::new();
        pts.push((lo, at(lo)));
        for i in 0..g.len() {
            let t = g.point(i);
            if t > lo && t < hi {
                pts.push((t, self.density[i]));
            }
        }
        pts.push((hi, at(hi)));
        pts.windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum()
    }

    /// Same samples on the grid moved by `-t`: `Π'(τ) = Π(τ + t)`.
    pub fn shifted(&self, t: f64) -> Result<Self> {
        let g = UniformGrid::new(self.tau_grid.start() - t, self.tau_grid.stop() - t, self.tau_grid.len())?;
        let mut out = self.clone();
        out.tau_grid = g;
        Ok(out)
    }

    /// `∫|Π_a - Π_b| dτ` of the normalized densities on a common grid.
    pub fn l1_distance(&self, other: &ToaDistribution) -> Result<f64> {
        let (g, h) = (&self.tau_grid, &other.tau_grid);
        let scale = g.max_abs().max(g.step());
        let same = g.len() == h.len()
            && (g.start() - h.start()).abs() <= 1e-9 * scale
            && (g.stop() - h.stop()).abs() <= 1e-9 * scale;
        if !same {
            return Err(Error::Grid("distributions are sampled on different τ grids".into()));
        }
        let d: Vec<f64> = self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .collect();
        Ok(g.trapezoid(&d))
    }
}

/// `∫_{τ < t_photon} Π(τ) dτ` of a normalized distribution.
pub fn superluminal_mass(dist: &ToaDistribution, t_photon: f64) -> Result<f64> {
    if !dist.metadata.normalized {
        return Err(Error::Inconclusive(
            "distribution has zero raw mass and cannot be normalized".into(),
        ));
    }
    Ok(dist.mass_between(f64::NEG_INFINITY, t_photon).clamp(0.0, 1.0))
}

/// `O(τ) = Σ_j c_j e^{iE_jτ/ħ}`: the overlap `∫ψ̃*(p)Φ_τ(p)dp` on a momentum grid,
/// with the quadrature weight, `ψ̃*` and the τ-independent part of `Φ_τ` folded into `c_j`.
#[derive(Debug, Clone)]
pub struct OverlapKernel {
    energies: Vec<f64>,
    coeffs: Vec<Complex64>,
    hbar: f64,
}

impl OverlapKernel {
    /// Overlap with the non-nodal eigenfunctions.
    pub fn nonnodal(
        spec: &WavepacketSpec,
        p_grid: UniformGrid,
        tau_grid: &UniformGrid,
        params: &PhysicalParams,
    ) -> Result<Self> {
        Self::build(spec, p_grid, tau_grid, params, |p| nonnodal_amplitude(p, 0.0, params))
    }

    /// Overlap with the real Razavi eigenfunctions of width `ε`.
    pub fn razavi_real(
        spec: &WavepacketSpec,
        p_grid: UniformGrid,
        tau_grid: &UniformGrid,
        epsilon: f64,
        params: &PhysicalParams,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::domain("epsilon", epsilon, "finite and > 0"));
        }
        Self::build(spec, p_grid, tau_grid, params, |p| {
            razavi_real_amplitude(p, 0.0, epsilon, params)
        })
    }

    fn build(
        spec: &WavepacketSpec,
        p_grid: UniformGrid,
        tau_grid: &UniformGrid,
        params: &PhysicalParams,
        amplitude: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        spec.validate()?;
        check_overlap_sampling(spec, &p_grid, tau_grid, params)?;
        let psi = gaussian_momentum(spec, p_grid, params)?;
        let grid = psi.grid;
        let mut energies = Vec::with_capacity(grid.len() + 1);
        let mut coeffs = Vec::with_capacity(grid.len() + 1);
        for (i, v) in psi.values.iter().enumerate() {
            let p = grid.point(i);
            energies.push(params.energy(p));
            coeffs.push(v.conj() * amplitude(p) * grid.weight(i));
        }
        // Every amplitude vanishes like √|p| at p = 0, which limits the
        // trapezoid rule to O(h^{3/2}). The leading error term on each side is
        // ζ(-½, θ) h^{3/2} g(0) with g = integrand/√|p| and θ the offset of the
        // grid from 0 in steps; subtract it as one extra source at E(0).
        let h = grid.step();
        let theta = if grid.len() % 2 == 1 { 0.0 } else { 0.5 };
        let zeta = if theta == 0.0 {
            ZETA_MINUS_HALF
        } else {
            (FRAC_1_SQRT_2 - 1.0) * ZETA_MINUS_HALF
        };
        let psi0 = gaussian_momentum(spec, UniformGrid::symmetric(h, 3)?, params)?.values[1];
        let d = 1e-12 * params.rest_momentum().max(h);
        let g0 = psi0.conj() * (amplitude(d) + amplitude(-d)) / d.sqrt();
        energies.push(params.energy(0.0));
        coeffs.push(-g0 * zeta * h.powf(1.5));
        Ok(OverlapKernel {
            energies,
            coeffs,
            hbar: params.hbar(),
        })
    }

    /// Replaces `ψ̃` by the state evolved for time `t`, `e^{-iE_pt/ħ}ψ̃`.
    pub fn evolved(mut self, t: f64) -> Self {
        for (c, e) in self.coeffs.iter_mut().zip(&self.energies) {
            *c *= Complex64::from_polar(1.0, e * t / self.hbar);
        }
        self
    }

    pub fn overlap(&self, tau: f64) -> Complex64 {
        self.energies
            .iter()
            .zip(&self.coeffs)
            .map(|(e, c)| c * Complex64::from_polar(1.0, e * tau / self.hbar))
            .sum()
    }

    /// `|O(τ)|²` at each τ; every value is computed independently.
    pub fn raw_density(&self, taus: &[f64]) -> Vec<f64> {
        taus.iter().map(|t| self.overlap(*t).norm_sqr()).collect()
    }
}

/// The overlap integrand oscillates in p at most as fast as `(|q| + c|τ|)/ħ`,
/// and an untruncated packet has to fit on the grid.
fn check_overlap_sampling(
    spec: &WavepacketSpec,
    p_grid: &UniformGrid,
    tau_grid: &UniformGrid,
    params: &PhysicalParams,
) -> Result<()> {
    let (lo, hi) = spec.extent();
    let reach = lo.abs().max(hi.abs()) + params.light_speed() * tau_grid.max_abs();
    let product = p_grid.step() * reach / params.hbar();
    if !(product < PI) {
        return Err(Error::Sampling {
            grid: "momentum",
            product,
        });
    }
    if spec.support_half_width.is_none() {
        let peak = spec.gaussian_momentum_amplitude(spec.momentum, params).norm();
        let edge = spec
            .gaussian_momentum_amplitude(p_grid.start(), params)
            .norm()
            .max(spec.gaussian_momentum_amplitude(p_grid.stop(), params).norm());
        let inside = spec.momentum > p_grid.start() && spec.momentum < p_grid.stop();
        if !inside || edge > MOMENTUM_COVERAGE * peak {
            return Err(Error::Grid(alloc::format!(
                "momentum grid [{}, {}] does not cover the packet (|ψ̃| at the ends is {:e} of the peak)",
                p_grid.start(),
                p_grid.stop(),
                edge / peak
            )));
        }
    }
    Ok(())
}

fn provenance(p_grid: &UniformGrid, tau_grid: &UniformGrid) -> String {
    alloc::format!(
        "p_grid=[{},{}]x{} tau_grid=[{},{}]x{}",
        p_grid.start(),
        p_grid.stop(),
        p_grid.len(),
        tau_grid.start(),
        tau_grid.stop(),
        tau_grid.len()
    )
}

/// Distribution from the analytic non-nodal eigenfunctions.
pub fn dist_analytic(
    spec: &WavepacketSpec,
    tau_grid: UniformGrid,
    params: &PhysicalParams,
    p_grid: UniformGrid,
) -> Result<ToaDistribution> {
    let k = OverlapKernel::nonnodal(spec, p_grid, &tau_grid, params)?;
    let raw = k.raw_density(&tau_grid.points());
    ToaDistribution::from_raw(
        tau_grid,
        raw,
        DistributionSource::AnalyticNonNodal,
        *spec,
        *params,
        provenance(&p_grid, &tau_grid),
    )
}

/// Distribution of the packet evolved for `t_shift`; equals `dist_analytic` at `τ + t_shift`.
pub fn dist_translated(
    spec: &WavepacketSpec,
    t_shift: f64,
    tau_grid: UniformGrid,
    params: &PhysicalParams,
    p_grid: UniformGrid,
) -> Result<ToaDistribution> {
    if !t_shift.is_finite() {
        return Err(Error::domain("t_shift", t_shift, "finite"));
    }
    let k = OverlapKernel::nonnodal(spec, p_grid, &tau_grid, params)?.evolved(t_shift);
    let raw = k.raw_density(&tau_grid.points());
    let mut prov = provenance(&p_grid, &tau_grid);
    prov.push_str(&alloc::format!(" t_shift={t_shift}"));
    ToaDistribution::from_raw(
        tau_grid,
        raw,
        DistributionSource::AnalyticNonNodal,
        *spec,
        *params,
        prov,
    )
}

/// Distribution built with the real Razavi eigenfunctions.
pub fn dist_razavi_real(
    spec: &WavepacketSpec,
    tau_grid: UniformGrid,
    epsilon: f64,
    params: &PhysicalParams,
    p_grid: UniformGrid,
) -> Result<ToaDistribution> {
    let k = OverlapKernel::razavi_real(spec, p_grid, &tau_grid, epsilon, params)?;
    let raw = k.raw_density(&tau_grid.points());
    let mut prov = provenance(&p_grid, &tau_grid);
    prov.push_str(&alloc::format!(" epsilon={epsilon}"));
    ToaDistribution::from_raw(tau_grid, raw, DistributionSource::RazaviReal, *spec, *params, prov)
}

/// Packet mass outside `[-l, l]`.
pub fn mass_outside_box(spec: &WavepacketSpec, l: f64) -> f64 {
    let s = SQRT_2 * spec.width;
    let cdf = |x: f64| 0.5 * libm::erfc(-(x - spec.center) / s);
    let (a, b) = match spec.support_half_width {
        Some(h) => (spec.center - h, spec.center + h),
        None => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let inside_support = cdf(b) - cdf(a);
    let lo = a.max(-l);
    let hi = b.min(l);
    let inside_box = if hi > lo { cdf(hi) - cdf(lo) } else { 0.0 };
    ((inside_support - inside_box) / inside_support).max(0.0)
}

/// A coarse mode's eigenvalue and overlap `|O|²`, before density-of-states weighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeOverlap {
    pub tau: f64,
    pub weight: f64,
}

/// `|Σ_k w_k ψ*(q_k) v_k|²` for each selected mode, sorted by τ, with modes
/// closer than `merge` binned into one (eigenvalue averaged by weight).
pub fn coarse_overlaps(
    spec: &WavepacketSpec,
    system: &EigenSystem,
    merge: f64,
    include_nodal: bool,
) -> Result<Vec<ModeOverlap>> {
    spec.validate()?;
    let l = system.grid.half_length();
    let leak = mass_outside_box(spec, l);
    if leak > SUPPORT_LEAK {
        return Err(Error::Support(alloc::format!(
            "wavepacket has mass {leak:e} outside the box [-{l}, {l}]"
        )));
    }
    let nodes = system.grid.nodes();
    let w = system.grid.weights();
    let psi: Vec<Complex64> = nodes.iter().map(|q| spec.psi(*q, &system.params).conj()).collect();
    let mut list: Vec<ModeOverlap> = system
        .modes
        .iter()
        .filter(|m| include_nodal || m.parity_class == ParityClass::NonNodal)
        .map(|m| {
            let o: Complex64 = (0..nodes.len()).map(|k| psi[k] * m.vector[k] * w[k]).sum();
            ModeOverlap {
                tau: m.tau,
                weight: o.norm_sqr(),
            }
        })
        .collect();
    list.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    let mut binned: Vec<ModeOverlap> = Vec::with_capacity(list.len());
    let mut prev = f64::NEG_INFINITY;
    for m in list {
        match binned.last_mut() {
            Some(last) if m.tau - prev < merge => {
                let total = last.weight + m.weight;
                if total > 0.0 {
                    last.tau = (last.tau * last.weight + m.tau * m.weight) / total;
                }
                last.weight = total;
            }
            _ => binned.push(m),
        }
        prev = m.tau;
    }
    Ok(binned)
}

/// Distribution from the coarse-grained non-nodal modes: `|O_τ|²/Δτ` at each
/// eigenvalue, with Δτ the local eigenvalue spacing, resampled by monotone cubics.
pub fn dist_coarse(spec: &WavepacketSpec, system: &EigenSystem, tau_grid: UniformGrid) -> Result<ToaDistribution> {
    dist_coarse_with(spec, system, tau_grid, false)
}

/// [`dist_coarse`], optionally adding nodal overlaps for diagnostics.
pub fn dist_coarse_with(
    spec: &WavepacketSpec,
    system: &EigenSystem,
    tau_grid: UniformGrid,
    include_nodal: bool,
) -> Result<ToaDistribution> {
    let modes = coarse_overlaps(spec, system, tau_grid.step(), include_nodal)?;
    if modes.len() < 2 {
        return Err(Error::Inconclusive("fewer than two coarse modes".into()));
    }
    let (first, last) = (modes[0].tau, modes[modes.len() - 1].tau);
    if tau_grid.start() < first || tau_grid.stop() > last {
        return Err(Error::Grid(alloc::format!(
            "τ window [{}, {}] extends beyond the coarse spectrum [{first}, {last}]",
            tau_grid.start(),
            tau_grid.stop()
        )));
    }
    let inside = modes
        .iter()
        .filter(|m| m.tau >= tau_grid.start() && m.tau <= tau_grid.stop())
        .count();
    if inside < MIN_MODES {
        return Err(Error::Grid(alloc::format!(
            "only {inside} coarse modes fall in the τ window; at least {MIN_MODES} are needed"
        )));
    }
    let n = modes.len();
    let taus: Vec<f64> = modes.iter().map(|m| m.tau).collect();
    let dens: Vec<f64> = (0..n)
        .map(|i| {
            let spacing = match i {
                0 => taus[1] - taus[0],
                _ if i + 1 == n => taus[n - 1] - taus[n - 2],
                _ => 0.5 * (taus[i + 1] - taus[i - 1]),
            };
            modes[i].weight / spacing
        })
        .collect();
    let interp = Pchip::new(&taus, &dens)?;
    let raw = tau_grid
        .points()
        .iter()
        .map(|t| {
            interp
                .eval(*t)
                .map(|v| v.max(0.0))
                .ok_or_else(|| Error::Grid("τ outside the coarse spectrum".into()))
        })
        .collect::<Result<Vec<f64>>>()?;
    let prov = alloc::format!(
        "nodes={} box_half_length={} modes_in_window={inside} tau_grid=[{},{}]x{} include_nodal={include_nodal}",
        system.grid.len(),
        system.grid.half_length(),
        tau_grid.start(),
        tau_grid.stop(),
        tau_grid.len()
    );
    ToaDistribution::from_raw(
        tau_grid,
        raw,
        DistributionSource::CoarseNonNodal,
        *spec,
        system.params,
        prov,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_between_matches_trapezoid_on_nodes() {
        let g = UniformGrid::new(0.0, 4.0, 41).unwrap();
        let raw: Vec<f64> = g.points().iter().map(|t| (-(t - 2.0) * (t - 2.0)).exp()).collect();
        let spec = WavepacketSpec::gaussian(-3.0, 5.0, 0.5).unwrap();
        let d = ToaDistribution::from_raw(
            g,
            raw,
            DistributionSource::AnalyticNonNodal,
            spec,
            PhysicalParams::default(),
            String::new(),
        )
        .unwrap();
        assert!((d.mass_between(-1.0, 10.0) - 1.0).abs() < 1e-14);
        let half = d.mass_between(0.0, 2.0);
        assert!((half - 0.5).abs() < 1e-12);
        // a cut inside a cell is linear in the cut position
        let a = d.mass_between(0.0, 2.05);
        let b = d.mass_between(0.0, 2.1);
        assert!(a > half && b > a);
    }

    #[test]
    fn box_leak_of_gaussian() {
        let spec = WavepacketSpec::gaussian(-3.0, 5.0, 0.5).unwrap();
        assert!(mass_outside_box(&spec, 10.0) < 1e-40);
        let leak = mass_outside_box(&spec, 4.0);
        // one-sided tail beyond 2σ
        assert!((leak - 0.5 * libm::erfc(2.0 / SQRT_2)).abs() < 1e-15);
        let cut = spec.with_support(0.6).unwrap();
        assert_eq!(mass_outside_box(&cut, 3.6), 0.0);
    }
}
