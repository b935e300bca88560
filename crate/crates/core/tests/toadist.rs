use std::f64::consts::PI;

use proptest::prelude::*;
use reltoa_core::expectation::{classical_rel_toa, qc_borel, toa_exact};
use reltoa_core::grid::{QuadratureGrid, UniformGrid};
use reltoa_core::nystrom::{solve_box, EigenSystem, NystromRule};
use reltoa_core::toadist::*;
use reltoa_core::waves::WavepacketSpec;
use reltoa_core::{Error, PhysicalParams};

fn unit() -> PhysicalParams {
    PhysicalParams::default()
}

fn p_grid() -> UniformGrid {
    UniformGrid::symmetric(40.0, 4001).unwrap()
}

fn box_system(n_half: usize, l: f64) -> EigenSystem {
    let grid = QuadratureGrid::gauss_legendre(n_half, l).unwrap();
    solve_box(&grid, &unit(), NystromRule::AlternatingPoint).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `Π(τ)` for a Gaussian from the textbook formulas, integrated with Simpson in p.
fn gaussian_oracle(q0: f64, p0: f64, s: f64, tau: f64) -> f64 {
    let amp = |p: f64| {
        let e = (1.0 + p * p).sqrt();
        let psi = (2.0 * s * s / PI).powf(0.25) * (-s * s * (p - p0) * (p - p0)).exp();
        let phi = (1.0 / (4.0 * PI)).sqrt() * (p.abs() / e).sqrt();
        // ψ̃*(p) Φ_τ(p): phases (p - p₀)q₀ and E τ
        let ph = (p - p0) * q0 + e * tau;
        (psi * phi * ph.cos(), psi * phi * ph.sin())
    };
    // p = ±u² on each side of 0 removes the √|p| endpoint behaviour
    let (lo, hi) = (p0 - 12.0 / s, p0 + 12.0 / s);
    let mut re = 0.0;
    let mut im = 0.0;
    for (sign, end) in [(1.0, hi), (-1.0, lo)] {
        if sign * end <= 0.0 {
            continue;
        }
        let umax = (sign * end).sqrt();
        re += simpson(|u| 2.0 * u * amp(sign * u * u).0, 0.0, umax, 40_000);
        im += simpson(|u| 2.0 * u * amp(sign * u * u).1, 0.0, umax, 40_000);
    }
    re * re + im * im
}

#[test]
fn analytic_density_against_oracle() {
    let spec = WavepacketSpec::gaussian(-3.0, 5.0, 0.5).unwrap();
    let tg = UniformGrid::new(1.0, 6.0, 11).unwrap();
    let d = dist_analytic(&spec, tg, &unit(), p_grid()).unwrap();
    for (i, t) in d.taus().iter().enumerate() {
        let want = gaussian_oracle(-3.0, 5.0, 0.5, *t);
        assert!(
            (d.raw[i] - want).abs() < 1e-10 + 1e-8 * want,
            "τ={t}: {} vs {want}",
            d.raw[i]
        );
    }
}

#[test]
fn analytic_peak_and_mean() {
    let p = unit();
    let spec = WavepacketSpec::gaussian(-3.0, 5.0, 0.5).unwrap();
    let d = dist_analytic(&spec, UniformGrid::new(0.0, 12.0, 1201).unwrap(), &p, p_grid()).unwrap();
    let tqc = classical_rel_toa(-3.0, 5.0, &p).unwrap() * qc_borel(5.0, 0.5, &p, 1e-10).unwrap();
    assert!(((d.peak() - tqc) / tqc).abs() < 0.02, "peak {} vs {tqc}", d.peak());
    let exact = toa_exact(&spec, &p, 1e-9).unwrap().tau;
    assert!(
        ((d.mean() - exact) / exact).abs() < 0.02,
        "mean {} vs {exact}",
        d.mean()
    );
    // the non-nodal family carries half of the packet
    assert!((d.metadata.raw_integral - 0.5).abs() < 1e-4);
    assert!((d.tau_grid.trapezoid(&d.density) - 1.0).abs() < 1e-12);
}

#[test]
fn mirror_and_time_reversal() {
    let p = unit();
    let tg = UniformGrid::symmetric(8.0, 801).unwrap();
    let d = dist_analytic(&WavepacketSpec::gaussian(-3.0, 5.0, 0.5).unwrap(), tg, &p, p_grid()).unwrap();
    // reflecting the packet through the detector leaves the arrival times unchanged
    let m = dist_analytic(&WavepacketSpec::gaussian(3.0, -5.0, 0.5).unwrap(), tg, &p, p_grid()).unwrap();
    // reversing the momentum alone maps τ to -τ
    let r = dist_analytic(&WavepacketSpec::gaussian(-3.0, -5.0, 0.5).unwrap(), tg, &p, p_grid()).unwrap();
    let n = tg.len();
    let peak = d.max_raw();
    for i in 0..n {
        assert!((m.raw[i] - d.raw[i]).abs() < 1e-12 * peak);
        assert!((r.raw[i] - d.raw[n - 1 - i]).abs() < 1e-12 * peak);
    }
}

#[test]
fn peak_ordering_with_momentum() {
    let p = unit();
    let tg = UniformGrid::new(0.0, 10.0, 2001).unwrap();
    let mut last_peak = f64::INFINITY;
    let mut last_width = f64::INFINITY;
    for p0 in [3.0, 5.0, 8.0] {
        let spec = WavepacketSpec::gaussian(-3.0, p0, 0.5).unwrap();
        let d = dist_analytic(&spec, tg, &p, p_grid()).unwrap();
        let peak = d.peak();
        let mean = d.mean();
        let var: Vec<f64> = d
            .taus()
            .iter()
            .zip(&d.density)
            .map(|(t, v)| (t - mean) * (t - mean) * v)
            .collect();
        let width = tg.trapezoid(&var).sqrt();
        assert!(peak > 3.0 && peak < last_peak, "p₀={p0}: {peak}");
        assert!(width < last_width, "p₀={p0}: {width}");
        last_peak = peak;
        last_width = width;
    }
}

#[test]
fn superluminal_mass_of_gaussian() {
    let p = unit();
    let spec = WavepacketSpec::gaussian(-3.0, 5.0, 0.5).unwrap();
    let d = dist_analytic(&spec, UniformGrid::new(0.0, 12.0, 1201).unwrap(), &p, p_grid()).unwrap();
    let m = superluminal_mass(&d, 3.0).unwrap();
    assert!(m > 0.0 && m < 0.5, "{m}");
    assert!(d.peak() > 3.0);
    // a window that starts after the photon has nothing before it
    let late = dist_analytic(&spec, UniformGrid::new(3.5, 12.0, 851).unwrap(), &p, p_grid()).unwrap();
    assert_eq!(superluminal_mass(&late, 3.0).unwrap(), 0.0);
}

#[test]
fn compact_support_is_bounded() {
    let p = unit();
    let qc = qc_borel(7.0, 0.5, &p, 1e-10).unwrap();
    let lo = classical_rel_toa(-1.0, 7.0, &p).unwrap() * qc;
    let hi = classical_rel_toa(-5.0, 7.0, &p).unwrap() * qc;
    assert!((lo - 1.011).abs() < 0.005 * 1.011);
    assert!((hi - 5.054).abs() < 0.005 * 5.054);
    let spec = WavepacketSpec::gaussian(-3.0, 7.0, 0.5)
        .unwrap()
        .with_support(2.0)
        .unwrap();
    let tg = UniformGrid::new(0.0, 12.0, 1201).unwrap();
    let d = dist_analytic(&spec, tg, &p, UniformGrid::symmetric(100.0, 20001).unwrap()).unwrap();
    let inside = d.mass_between(0.99 * lo, 1.01 * hi);
    assert!(inside >= 0.98, "{inside}");
}

#[test]
fn momentum_grid_checks() {
    let p = unit();
    let spec = WavepacketSpec::gaussian(-3.0, 5.0, 0.5).unwrap();
    let tg = UniformGrid::new(0.0, 10.0, 101).unwrap();
    let coarse = UniformGrid::symmetric(40.0, 201).unwrap();
    assert!(matches!(
        dist_analytic(&spec, tg, &p, coarse),
        Err(Error::Sampling { grid: "momentum", .. })
    ));
    let narrow = UniformGrid::symmetric(6.0, 1201).unwrap();
    assert!(matches!(dist_analytic(&spec, tg, &p, narrow), Err(Error::Grid(_))));
}

#[test]
fn translation_covariance() {
    let p = unit();
    let spec = WavepacketSpec::gaussian(-3.0, 2.0, 0.5).unwrap();
    let tg = UniformGrid::new(-2.0, 12.0, 1401).unwrap();
    let zero = dist_translated(&spec, 0.0, tg, &p, p_grid()).unwrap();
    let base = dist_analytic(&spec, tg, &p, p_grid()).unwrap();
    assert_eq!(zero.raw, base.raw);
    for t in [0.5, 1.0, 2.0] {
        let moved = dist_translated(&spec, t, tg, &p, p_grid()).unwrap();
        let later = UniformGrid::new(tg.start() + t, tg.stop() + t, tg.len()).unwrap();
        let shifted = dist_analytic(&spec, later, &p, p_grid()).unwrap().shifted(t).unwrap();
        let l1 = moved.l1_distance(&shifted).unwrap();
        assert!(l1 <= 1e-3, "t={t}: {l1}");
    }
}

#[test]
fn successive_translations_compose() {
    let p = unit();
    let spec = WavepacketSpec::gaussian(-3.0, 2.0, 0.5).unwrap();
    let tg = UniformGrid::new(0.0, 8.0, 81).unwrap();
    let k = OverlapKernel::nonnodal(&spec, p_grid(), &tg, &p).unwrap();
    let a = k.clone().evolved(0.7).evolved(1.1).raw_density(&tg.points());
    let b = k.evolved(1.8).raw_density(&tg.points());
    let peak = b.iter().copied().fold(0.0, f64::max);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-6 * peak);
    }
}

#[test]
fn razavi_real_flattens() {
    // q₀ = -3, p₀ = 3, σ = 0.5; at p₀ = 5 the maximum is not monotone in ε
    let p = unit();
    let spec = WavepacketSpec::gaussian(-3.0, 3.0, 0.5).unwrap();
    let tg = UniformGrid::new(0.0, 10.0, 1001).unwrap();
    let max: Vec<f64> = [0.5, 0.1, 0.02]
        .iter()
        .map(|e| dist_razavi_real(&spec, tg, *e, &p, p_grid()).unwrap().max_raw())
        .collect();
    assert!(max[0] > max[1] && max[1] > max[2], "{max:?}");
    // sin(εE/ħ)/√ε → √ε E/ħ: the density is linear in ε for small ε
    let a = dist_razavi_real(&spec, tg, 2e-3, &p, p_grid()).unwrap();
    let b = dist_razavi_real(&spec, tg, 1e-3, &p, p_grid()).unwrap();
    for (x, y) in a.raw.iter().zip(&b.raw) {
        assert!((x - 2.0 * y).abs() <= 1e-3 * x.max(1e-300));
    }
    assert!(b.max_raw() < 0.01 * max[0]);
    assert!(dist_razavi_real(&spec, tg, 0.0, &p, p_grid()).is_err());
}

#[test]
fn coarse_matches_analytic() {
    let p = unit();
    let spec = WavepacketSpec::gaussian(-3.0, 5.0, 0.5).unwrap();
    let tg = UniformGrid::new(0.0, 8.0, 801).unwrap();
    let sys = box_system(200, 10.0);
    let c = dist_coarse(&spec, &sys, tg).unwrap();
    let a = dist_analytic(&spec, tg, &p, p_grid()).unwrap();
    let l1 = c.l1_distance(&a).unwrap();
    assert!(l1 <= 0.05, "{l1}");
    assert!(c.density.iter().all(|v| *v >= 0.0));
    assert!((tg.trapezoid(&c.density) - 1.0).abs() < 1e-6);

    // doubling the box at fixed node density
    let wide = dist_coarse(&spec, &box_system(400, 20.0), tg).unwrap();
    let l1 = c.l1_distance(&wide).unwrap();
    assert!(l1 < 0.01, "{l1}");

    // nodal overlaps add mass
    let both = dist_coarse_with(&spec, &sys, tg, true).unwrap();
    assert!(both.metadata.raw_integral > c.metadata.raw_integral);
}

#[test]
fn coarse_contract_errors() {
    let sys = box_system(50, 5.0);
    let tg = UniformGrid::new(0.0, 3.0, 31).unwrap();
    let outside = WavepacketSpec::gaussian(-4.5, 5.0, 0.5).unwrap();
    assert!(matches!(dist_coarse(&outside, &sys, tg), Err(Error::Support(_))));
    let spec = WavepacketSpec::gaussian(-2.0, 5.0, 0.3).unwrap();
    let beyond = UniformGrid::new(0.0, 50.0, 31).unwrap();
    assert!(matches!(dist_coarse(&spec, &sys, beyond), Err(Error::Grid(_))));
    let sliver = UniformGrid::new(1.0, 1.0 + 1e-6, 3).unwrap();
    assert!(matches!(dist_coarse(&spec, &sys, sliver), Err(Error::Grid(_))));
}

#[test]
fn binning_conserves_weight() {
    let spec = WavepacketSpec::gaussian(-2.0, 5.0, 0.3).unwrap();
    let sys = box_system(50, 5.0);
    let fine = coarse_overlaps(&spec, &sys, 0.0, true).unwrap();
    let merged = coarse_overlaps(&spec, &sys, 0.05, true).unwrap();
    assert!(merged.len() < fine.len());
    let total = |v: &[ModeOverlap]| v.iter().map(|m| m.weight).sum::<f64>();
    assert!((total(&fine) - total(&merged)).abs() < 1e-14 * total(&fine));
    assert!(merged.windows(2).all(|w| w[0].tau < w[1].tau));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn densities_are_normalized_and_non_negative(q0 in -4.0f64..-1.0, p0 in 1.0f64..8.0, s in 0.3f64..1.0) {
        let spec = WavepacketSpec::gaussian(q0, p0, s).unwrap();
        let tg = UniformGrid::new(-2.0, 12.0, 281).unwrap();
        let d = dist_analytic(&spec, tg, &unit(), p_grid()).unwrap();
        prop_assert!(d.density.iter().all(|v| *v >= 0.0));
        prop_assert!(d.metadata.normalized);
        prop_assert!((tg.trapezoid(&d.density) - 1.0).abs() < 1e-6);
        let m = superluminal_mass(&d, -q0).unwrap();
        prop_assert!((0.0..=1.0).contains(&m));
    }
}
