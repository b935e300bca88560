//! Wavepackets, transforms, evolution and analytic eigenfunctions.

use std::f64::consts::PI;

use proptest::prelude::*;
use reltoa_core::grid::{QuadratureGrid, UniformGrid};
use reltoa_core::nystrom::{solve_box, NystromRule, ParityClass};
use reltoa_core::waves::*;
use reltoa_core::{Complex64, Error, PhysicalParams};

fn unit() -> PhysicalParams {
    PhysicalParams::default()
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

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn gaussian_position_contract() {
    let p = unit();
    let spec = WavepacketSpec::gaussian(-3.0, 5.0, 0.5).unwrap();
    let f = gaussian_position(&spec, UniformGrid::new(-8.0, 2.0, 2001).unwrap(), &p).unwrap();
    assert!((f.norm() - 1.0).abs() < 1e-8);
    assert!((f.mean_position() + 3.0).abs() < 1e-10);
    // pointwise against the formula
    let k = 1234;
    let q = f.grid.point(k);
    let want = (0.5 * (2.0 * PI).sqrt()).powf(-0.5) * (-(q + 3.0f64).powi(2) / 1.0).exp();
    assert!((f.values[k] - Complex64::from_polar(want, 5.0 * q)).norm() < 1e-12);

    let short = UniformGrid::new(-6.0, 0.0, 1001).unwrap();
    assert!(matches!(gaussian_position(&spec, short, &p), Err(Error::Grid(_))));
    assert!(WavepacketSpec::gaussian(0.0, 0.0, -1.0).is_err());
    assert!(spec.with_support(0.0).is_err());
}

#[test]
fn truncated_gaussian_norm_fraction() {
    let spec = WavepacketSpec::gaussian(1.0, 0.0, 0.5)
        .unwrap()
        .with_support(1.0)
        .unwrap();
    let s = 0.5f64;
    let raw = simpson(
        |x| (-x * x / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt()),
        -1.0,
        1.0,
        20000,
    );
    assert!((spec.truncated_norm_fraction() - raw).abs() < 1e-12);
    assert!((raw - 0.9545).abs() < 1e-4);
    let f = gaussian_position(&spec, UniformGrid::new(-1.0, 3.0, 4001).unwrap(), &unit()).unwrap();
    assert!((f.norm() - 1.0).abs() < 1e-8);
    // continuum envelope is normalized including the cut
    let n2 = simpson(|q| spec.envelope(q).powi(2), 0.0, 2.0, 20000);
    assert!((n2 - 1.0).abs() < 1e-10);
}

#[test]
fn round_trip_and_parseval() {
    let p = unit();
    let spec = WavepacketSpec::gaussian(0.7, 2.0, 0.6).unwrap();
    let qg = UniformGrid::symmetric(8.0, 801).unwrap();
    let pg = UniformGrid::symmetric(40.0, 1201).unwrap();
    let f = gaussian_position(&spec, qg, &p).unwrap();
    let g = to_momentum(&f, pg, &p).unwrap();
    assert!((g.norm() - f.norm()).abs() < 1e-6);
    let back = to_position(&g, qg, 0.0, &p).unwrap();
    assert!(max_diff(&back.values, &f.values) < 1e-6);
}

#[test]
fn gaussian_transform_matches_closed_form() {
    let p = PhysicalParams::new(1.0, 1.0, 0.8).unwrap();
    let sigma = 0.4;
    let spec = WavepacketSpec::gaussian(0.0, 0.0, sigma).unwrap();
    let f = gaussian_position(&spec, UniformGrid::symmetric(6.0, 1201).unwrap(), &p).unwrap();
    let pg = UniformGrid::symmetric(12.0, 481).unwrap();
    let g = to_momentum(&f, pg, &p).unwrap();
    // width ħ/2σ in p: |ψ̃|² = e^{-p²/2(ħ/2σ)²}/(√(2π)ħ/2σ)
    let w = 0.8 / (2.0 * sigma);
    for (j, v) in g.values.iter().enumerate() {
        let pp = pg.point(j);
        let want = ((-pp * pp / (4.0 * w * w)).exp()) / (w * (2.0 * PI).sqrt()).sqrt();
        assert!((v - want).norm() < 1e-6);
    }
    // and with momentum and offset against the library closed form
    let spec = WavepacketSpec::gaussian(-1.0, 3.0, sigma).unwrap();
    let f = gaussian_position(&spec, UniformGrid::new(-6.0, 4.0, 2001).unwrap(), &p).unwrap();
    let pg = UniformGrid::symmetric(20.0, 801).unwrap();
    let g = to_momentum(&f, pg, &p).unwrap();
    let c = gaussian_momentum(&spec, pg, &p).unwrap();
    assert!(max_diff(&g.values, &c.values) < 1e-6);
}

#[test]
fn truncated_momentum_against_simpson() {
    let p = unit();
    let spec = WavepacketSpec::gaussian(-3.0, 7.0, 0.5)
        .unwrap()
        .with_support(2.0)
        .unwrap();
    let pg = UniformGrid::symmetric(60.0, 601).unwrap();
    let g = gaussian_momentum(&spec, pg, &p).unwrap();
    for j in [0usize, 77, 300, 370, 512, 600] {
        let pp = pg.point(j);
        let re = simpson(
            |q| (spec.psi(q, &p) * Complex64::from_polar(1.0, -pp * q)).re,
            -5.0,
            -1.0,
            40000,
        );
        let im = simpson(
            |q| (spec.psi(q, &p) * Complex64::from_polar(1.0, -pp * q)).im,
            -5.0,
            -1.0,
            40000,
        );
        let want = Complex64::new(re, im) / (2.0 * PI).sqrt();
        assert!((g.values[j] - want).norm() < 1e-9, "p = {pp}");
    }
    assert!((g.norm() - 1.0).abs() < 1e-3);
}

#[test]
fn sampling_violations_reported() {
    let p = unit();
    let spec = WavepacketSpec::gaussian(0.0, 0.0, 0.5).unwrap();
    let f = gaussian_position(&spec, UniformGrid::symmetric(5.0, 101).unwrap(), &p).unwrap();
    let e = to_momentum(&f, UniformGrid::symmetric(40.0, 401).unwrap(), &p).unwrap_err();
    assert!(matches!(e, Error::Sampling { grid: "position", .. }));
    let e = to_momentum(&f, UniformGrid::symmetric(5.0, 11).unwrap(), &p).unwrap_err();
    assert!(matches!(e, Error::Sampling { grid: "momentum", .. }));
    assert!(to_momentum(&f, UniformGrid::new(-1.0, 3.0, 41).unwrap(), &p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // phases up to ~10³ rad, where rounding of E·t/ħ stays below 1e-12
    #[test]
    fn evolution_is_a_phase(t1 in -10.0f64..10.0, t2 in -10.0f64..10.0, c in 0.3f64..8.0) {
        let p = PhysicalParams::new(1.3, c, 0.9).unwrap();
        let spec = WavepacketSpec::gaussian(0.4, -1.0, 0.8).unwrap();
        let pg = UniformGrid::symmetric(10.0, 201).unwrap();
        let g = gaussian_momentum(&spec, pg, &p).unwrap();
        prop_assert_eq!(&evolve(&g, 0.0, &p).values, &g.values);
        let a = evolve(&g, t1, &p);
        prop_assert!((a.norm() - g.norm()).abs() < 1e-13);
        let b = evolve(&a, t2, &p);
        let c12 = evolve(&g, t1 + t2, &p);
        prop_assert!(max_diff(&b.values, &c12.values) < 1e-12);
    }
}

#[test]
fn razavi_complex_properties() {
    let p = unit();
    let pg = UniformGrid::symmetric(30.0, 601).unwrap();
    let r = razavi_complex_eigenfunction(pg, Complex64::new(1.0, 1.0), &p).unwrap();
    assert!(r.normalized);
    assert!((r.function.norm() - 1.0).abs() < 1e-12);
    assert_eq!(r.function.values[300].norm(), 0.0);
    let n = pg.len();
    for j in 0..n {
        assert!((r.function.values[j].norm() - r.function.values[n - 1 - j].norm()).abs() < 1e-15);
    }
    // direct evaluation: |φ| ∝ √(|p|/E) e^{-E}
    let oracle = |pp: f64| {
        let e = (pp * pp + 1.0).sqrt();
        (pp.abs() / e).sqrt() * (-e).exp()
    };
    let scale = r.function.values[400].norm() / oracle(pg.point(400));
    for j in [310usize, 350, 420, 500, 599] {
        let want = oracle(pg.point(j)) * scale;
        assert!((r.function.values[j].norm() - want).abs() < 1e-12 * scale);
    }
    assert!(r.function.values[599].norm() < r.function.values[350].norm());

    let g = razavi_complex_eigenfunction(pg, Complex64::new(1.0, -1.0), &p).unwrap();
    assert!(!g.normalized);
    assert!(g.function.values[599].norm() > g.function.values[350].norm());
}

#[test]
fn razavi_real_properties() {
    let p = unit();
    let eps = 1e-6;
    for &pp in &[0.3, -2.0, 7.5] {
        let e = (pp * pp + 1.0f64).sqrt();
        let v = razavi_real_amplitude(pp, 0.4, eps, &p).norm();
        // sin x ≈ x: √(ε/π) · √(|p|/E)
        let lead = (eps / PI).sqrt() * (pp.abs() / e).sqrt();
        assert!((v / lead - 1.0).abs() < 1e-3);
    }
    assert_eq!(razavi_real_amplitude(0.0, 0.4, 0.5, &p).norm(), 0.0);
    // zeros at εE = kπ
    let eps = 0.5;
    for k in 1..4 {
        let e = k as f64 * PI / eps;
        let pp = (e * e - 1.0).sqrt();
        let v = razavi_real_amplitude(pp, 1.0, eps, &p).norm();
        assert!(v < 1e-14, "k={k}: {v}");
    }
    let pg = UniformGrid::symmetric(10.0, 101).unwrap();
    assert!(razavi_real_eigenfunction(pg, 1.0, 0.0, &p).is_err());
}

#[test]
fn nonnodal_and_nodal_structure() {
    let p = unit();
    let pg = UniformGrid::symmetric(10.0, 201).unwrap();
    let non = nonnodal_eigenfunction(pg, 0.7, &p).unwrap();
    let nod = nodal_eigenfunction(pg, 0.7, &p).unwrap();
    let n = pg.len();
    assert_eq!(nod.values[100].norm(), 0.0);
    for j in 0..n {
        assert_eq!(non.values[j], non.values[n - 1 - j]);
        let pp = pg.point(j);
        let plus = non.values[j] + nod.values[j];
        let minus = non.values[j] - nod.values[j];
        if pp > 0.0 {
            assert_eq!(minus.norm(), 0.0);
            assert!((plus - non.values[j] * 2.0).norm() < 1e-15);
        } else if pp < 0.0 {
            assert_eq!(plus.norm(), 0.0);
        }
    }
    // prefactor √(c/4πħ)√(|p|c/E)
    let pp = pg.point(150);
    let want = (1.0 / (4.0 * PI)).sqrt() * (pp / (pp * pp + 1.0).sqrt()).sqrt();
    assert!((non.values[150].norm() - want).abs() < 1e-15);
}

#[test]
fn nonrelativistic_limit_of_eigenfunctions() {
    let p = PhysicalParams::new(1.0, 1e4, 1.0).unwrap();
    let tau = 0.8;
    let mut phase = None;
    for i in 1..=40 {
        let pp = -10.0 + 0.5 * i as f64;
        if pp == 0.0 {
            continue;
        }
        let rel = nonnodal_amplitude(pp, tau, &p);
        // free non-relativistic non-nodal form √(|p|/4πμħ) e^{ip²τ/2μħ}
        let ab = Complex64::from_polar((pp.abs() / (4.0 * PI)).sqrt(), pp * pp * tau / 2.0);
        assert!((rel.norm() / ab.norm() - 1.0).abs() < 1e-4);
        let ph = rel / ab / (rel / ab).norm();
        let first = *phase.get_or_insert(ph);
        assert!((ph - first).norm() < 1e-4);
    }
}

#[test]
fn eigenfunctions_are_not_orthogonal() {
    let p = unit();
    let pg = UniformGrid::symmetric(20.0, 801).unwrap();
    let a = nonnodal_eigenfunction(pg, 0.5, &p).unwrap();
    let b = nonnodal_eigenfunction(pg, 1.5, &p).unwrap();
    let c = nodal_eigenfunction(pg, 1.5, &p).unwrap();
    assert!(a.inner(&b).unwrap().norm() > 1e-8);
    // non-nodal vs nodal overlaps cancel by parity on a symmetric grid
    assert!(a.inner(&c).unwrap().norm() < 1e-14);
}

fn snapshots(m: &MomentumFunction, q: UniformGrid, times: &[f64], p: &PhysicalParams) -> Vec<(f64, PositionFunction)> {
    times.iter().map(|&t| (t, to_position(m, q, t, p).unwrap())).collect()
}

#[test]
fn diagnostic_against_dense_scan() {
    let p = unit();
    let spec = WavepacketSpec::gaussian(-2.0, 3.0, 0.3).unwrap();
    let pg = UniformGrid::symmetric(40.0, 801).unwrap();
    let g = gaussian_momentum(&spec, pg, &p).unwrap();
    let qg = UniformGrid::symmetric(1.5, 301).unwrap();
    let dt = 0.1;
    let coarse: Vec<f64> = (0..31).map(|k| 1.0 + dt * k as f64).collect();
    let r = arrival_diagnostic(&snapshots(&g, qg, &coarse, &p), 0.0, 1.5).unwrap();
    let dense: Vec<f64> = (0..3001).map(|k| 1.0 + 0.001 * k as f64).collect();
    let rd = arrival_diagnostic(&snapshots(&g, qg, &dense, &p), 0.0, 1.5).unwrap();
    let i = (0..rd.spreads.len())
        .min_by(|a, b| rd.spreads[*a].total_cmp(&rd.spreads[*b]))
        .unwrap();
    assert!((r.t_min_spread - dense[i]).abs() < dt);
    // classical estimate -q₀E/(pc²)
    let t_cl = 2.0 * (10.0f64).sqrt() / 3.0;
    assert!((r.t_min_spread - t_cl).abs() < 0.1);

    // time-mirrored snapshots of a symmetric evolution (packet at rest on the origin)
    let rest = gaussian_momentum(&WavepacketSpec::gaussian(0.0, 0.0, 0.3).unwrap(), pg, &p).unwrap();
    let times: Vec<f64> = (0..21).map(|k| -1.0 + 0.1 * k as f64).collect();
    let a = arrival_diagnostic(&snapshots(&rest, qg, &times, &p), 0.0, 1.5).unwrap();
    let mirrored: Vec<(f64, PositionFunction)> = snapshots(&rest, qg, &times, &p)
        .into_iter()
        .rev()
        .map(|(t, f)| (-t, f))
        .collect();
    let b = arrival_diagnostic(&mirrored, 0.0, 1.5).unwrap();
    assert!((a.t_min_spread + b.t_min_spread).abs() < 1e-12);
    assert!(a.t_min_spread.abs() < 1e-12);

    let early: Vec<f64> = (0..5).map(|k| 0.1 * k as f64).collect();
    let e = arrival_diagnostic(&snapshots(&g, qg, &early, &p), 0.0, 1.5).unwrap_err();
    assert!(matches!(e, Error::Inconclusive(_)));
}

#[test]
fn analytic_pair_localizes_at_eigenvalue() {
    let p = unit();
    let tau = 1.0;
    let pg = UniformGrid::symmetric(150.0, 3001).unwrap();
    let qg = UniformGrid::symmetric(0.5, 201).unwrap();
    let times: Vec<f64> = (0..41).map(|k| 0.8 + 0.01 * k as f64).collect();
    let non = nonnodal_eigenfunction(pg, tau, &p)
        .unwrap()
        .with_converging_delta(DEFAULT_CONVERGING_DELTA)
        .unwrap();
    let r = arrival_diagnostic(&snapshots(&non, qg, &times, &p), 0.0, 0.5).unwrap();
    assert!(
        (r.t_min_spread - tau).abs() < 0.05 * tau,
        "non-nodal {}",
        r.t_min_spread
    );
    // single peak at the origin at t = τ
    let f = to_position(&non, qg, tau, &p).unwrap();
    let d = f.density();
    let imax = (0..d.len()).max_by(|a, b| d[*a].total_cmp(&d[*b])).unwrap();
    assert_eq!(imax, 100);

    let nod = nodal_eigenfunction(pg, tau, &p)
        .unwrap()
        .with_converging_delta(DEFAULT_CONVERGING_DELTA)
        .unwrap();
    let r = arrival_diagnostic(&snapshots(&nod, qg, &times, &p), 0.0, 0.5).unwrap();
    let tc = r.t_closest_approach.expect("two peaks tracked");
    assert!((tc - tau).abs() < 0.05 * tau, "nodal {tc}");
    let f = to_position(&nod, qg, tau, &p).unwrap();
    assert!(f.values[100].norm() < 1e-12 * f.values.iter().map(|v| v.norm()).fold(0.0, f64::max));
}

#[test]
fn razavi_real_peaks_merge_as_epsilon_shrinks() {
    let p = unit();
    let tau = 1.0;
    let pg = UniformGrid::symmetric(150.0, 3001).unwrap();
    let mut seps = Vec::new();
    for eps in [0.5, 0.2, 0.05] {
        let f = razavi_real_eigenfunction(pg, tau, eps, &p)
            .unwrap()
            .with_converging_delta(DEFAULT_CONVERGING_DELTA)
            .unwrap();
        let ts: Vec<f64> = (0..1601).map(|k| 0.2 + 0.001 * k as f64).collect();
        let d: Vec<f64> = ts.iter().map(|&t| position_value(&f, 0.0, t, &p).norm_sqr()).collect();
        let before = (0..ts.len())
            .filter(|&k| ts[k] < tau)
            .max_by(|a, b| d[*a].total_cmp(&d[*b]))
            .unwrap();
        let after = (0..ts.len())
            .filter(|&k| ts[k] > tau)
            .max_by(|a, b| d[*a].total_cmp(&d[*b]))
            .unwrap();
        let sep = ts[after] - ts[before];
        seps.push(sep);
    }
    assert!(seps.windows(2).all(|w| w[1] < w[0]), "{seps:?}");
    // well separated peaks sit near τ ± ε; at small ε they have merged
    assert!((seps[0] - 1.0).abs() < 0.05, "{seps:?}");
    assert!(seps[2] < 0.01, "{seps:?}");
}

#[test]
fn complex_tau_does_not_sharpen() {
    let p = unit();
    let pg = UniformGrid::symmetric(150.0, 3001).unwrap();
    let qg = UniformGrid::symmetric(0.5, 201).unwrap();
    let times: Vec<f64> = (0..41).map(|k| 0.8 + 0.01 * k as f64).collect();
    let min_spread = |m: &MomentumFunction| {
        let s = snapshots(m, qg, &times, &p);
        let r = arrival_diagnostic(&s, 0.0, 0.5);
        let spreads: Vec<f64> = s
            .iter()
            .map(|(_, f)| {
                let d = f.density();
                let w: Vec<f64> = (0..d.len()).map(|i| qg.point(i).powi(2) * d[i]).collect();
                qg.trapezoid(&w) / qg.trapezoid(&d)
            })
            .collect();
        (r.is_ok(), spreads.iter().cloned().fold(f64::INFINITY, f64::min))
    };
    let non = nonnodal_eigenfunction(pg, 1.0, &p)
        .unwrap()
        .with_converging_delta(DEFAULT_CONVERGING_DELTA)
        .unwrap();
    let cx = razavi_complex_eigenfunction(pg, Complex64::new(1.0, 0.2), &p)
        .unwrap()
        .function
        .with_converging_delta(DEFAULT_CONVERGING_DELTA)
        .unwrap();
    let (_, bench) = min_spread(&non);
    let (_, s) = min_spread(&cx);
    assert!(s > bench, "complex {s} vs non-nodal {bench}");
}

#[test]
fn coarse_mode_arrives_at_its_eigenvalue() {
    let p = unit();
    let g = QuadratureGrid::gauss_legendre(100, 1.0).unwrap();
    let s = solve_box(&g, &p, NystromRule::AlternatingPoint).unwrap();
    let i = s.nearest(0.9944, Some(ParityClass::NonNodal)).unwrap();
    let tau = s.modes[i].tau;
    let pg = UniformGrid::symmetric(1500.0, 30001).unwrap();
    let m = eigenmode_momentum(&s, i, pg)
        .unwrap()
        .with_converging_delta(1e-7)
        .unwrap();
    let qg = UniformGrid::symmetric(0.3, 301).unwrap();
    let times: Vec<f64> = (0..21).map(|k| 0.8 + 0.02 * k as f64).collect();
    let r = arrival_diagnostic(&snapshots(&m, qg, &times, &p), 0.0, 0.3).unwrap();
    assert!((r.t_min_spread - tau).abs() < 0.05 * tau, "{} vs {tau}", r.t_min_spread);
}
