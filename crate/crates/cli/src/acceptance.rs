//! The ten acceptance criteria, each at its stated tolerance.

use reltoa_core::expectation::{classical_rel_toa, gamma_c, qc_borel, toa_exact};
use reltoa_core::grid::{QuadratureGrid, UniformGrid};
use reltoa_core::kernel::{pv_momentum_kernel_oracle, tc_closed, tc_integral};
use reltoa_core::nystrom::{solve_box, NystromRule, ParityClass};
use reltoa_core::toadist::{dist_analytic, dist_coarse, dist_razavi_real, dist_translated};
use reltoa_core::waves::{arrival_diagnostic, eigenmode_momentum, to_position, WavepacketSpec};
use reltoa_core::{Complex64, PhysicalParams};

use crate::parallel;

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("{verdict} [{:>2}] {}: {}", self.id, self.name, self.detail)
    }
}

type Outcome = Result<(bool, String), reltoa_core::Error>;
type Criterion = (&'static str, fn() -> Outcome);

pub const CRITERIA: [Criterion; 10] = [
    ("box eigenvalue near 0.9944", box_eigenvalue),
    ("kernel closed form vs integral and oracle", kernel_paths),
    ("gamma identity", gamma_identity),
    ("exact expectation vs t*Q_c", expectation_equivalence),
    ("compact-support bounds", compact_support),
    ("photon bound", photon_bound),
    ("unitary arrival of coarse modes", unitary_arrival),
    ("translation covariance", translation_covariance),
    ("coarse vs analytic distribution", coarse_vs_analytic),
    ("razavi-real flattening", razavi_flattening),
];

pub fn run_one(id: usize) -> CriterionResult {
    let (name, f) = CRITERIA[id - 1];
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name,
        passed,
        detail,
    }
}

/// Runs every criterion (in parallel) and returns them in order.
pub fn run_all() -> Vec<CriterionResult> {
    let ids: Vec<usize> = (1..=CRITERIA.len()).collect();
    parallel::map(&ids, |id| run_one(*id))
}

fn unit() -> PhysicalParams {
    PhysicalParams::default()
}

fn box_eigenvalue() -> Outcome {
    let grid = QuadratureGrid::gauss_legendre(100, 1.0)?;
    let s = solve_box(&grid, &unit(), NystromRule::AlternatingPoint)?;
    let i = s.nearest(0.9944, None).unwrap_or(0);
    let tau = s.modes[i].tau;
    let d = (tau - 0.9944).abs();
    Ok((
        d <= 1e-2,
        format!("{} nodes, nearest tau = {tau:.6}, |diff| = {d:.2e}", grid.len()),
    ))
}

fn kernel_paths() -> Outcome {
    let p = unit();
    let mut worst = 0.0f64;
    for i in 0..61 {
        let a = 1e-3 * (30.0f64 / 1e-3).powf(i as f64 / 60.0);
        let c = tc_closed(a, &p)?;
        let q = tc_integral(a, &p, 1e-12)?;
        worst = worst.max(((c - q) / q).abs());
    }
    let mut oracle = 0.0f64;
    for dq in [0.5, 1.0, 2.0, -0.5, -1.0, -2.0] {
        let got = pv_momentum_kernel_oracle(dq, &p, 2000.0, 64_000)?;
        let want = Complex64::new(0.0, 0.5 / p.hbar() * tc_closed(dq.abs(), &p)? * dq.signum());
        oracle = oracle.max((got - want).norm());
    }
    Ok((
        worst <= 1e-8 && oracle <= 1e-4,
        format!("max relative diff {worst:.2e} (<= 1e-8), oracle max abs diff {oracle:.2e} (<= 1e-4)"),
    ))
}

fn gamma_identity() -> Outcome {
    let p = unit();
    let mut worst = 0.0f64;
    for m in [0.5, 1.0, 2.0, 5.0, 20.0] {
        let want = (1.0f64 + m * m).sqrt();
        worst = worst.max((gamma_c(0, m, &p)? - want).abs());
    }
    Ok((
        worst <= 1e-10,
        format!("max |gamma0 - sqrt(1+p^2)| = {worst:.2e} (<= 1e-10)"),
    ))
}

fn expectation_equivalence() -> Outcome {
    let p = unit();
    let momenta = [2.0, 3.0, 5.0, 8.0, 10.0];
    let rows = parallel::map(&momenta, |&m| -> reltoa_core::Result<f64> {
        let spec = WavepacketSpec::gaussian(-3.0, m, 0.5)?;
        let exact = toa_exact(&spec, &p, 1e-9)?.tau;
        let tq = classical_rel_toa(-3.0, m, &p)? * qc_borel(m, 0.5, &p, 1e-12)?;
        Ok(((exact - tq) / exact).abs())
    });
    let mut worst = 0.0f64;
    for r in rows {
        worst = worst.max(r?);
    }
    Ok((
        worst <= 1e-3,
        format!("max relative diff {worst:.2e} over p in {momenta:?} (<= 1e-3)"),
    ))
}

fn compact_support() -> Outcome {
    let p = unit();
    let qc = qc_borel(7.0, 0.5, &p, 1e-10)?;
    let lo = classical_rel_toa(-1.0, 7.0, &p)? * qc;
    let hi = classical_rel_toa(-5.0, 7.0, &p)? * qc;
    let bounds_ok = (lo - 1.011).abs() <= 0.005 * 1.011 && (hi - 5.054).abs() <= 0.005 * 5.054;
    let spec = WavepacketSpec::gaussian(-3.0, 7.0, 0.5)?.with_support(2.0)?;
    let tg = UniformGrid::new(0.0, 12.0, 1201)?;
    let d = dist_analytic(&spec, tg, &p, UniformGrid::symmetric(100.0, 20001)?)?;
    let inside = d.mass_between(0.99 * lo, 1.01 * hi);
    Ok((
        bounds_ok && inside >= 0.98,
        format!("bounds {lo:.4} and {hi:.4}, mass inside widened window {inside:.5} (>= 0.98)"),
    ))
}

fn photon_bound() -> Outcome {
    let p = unit();
    let mut above = true;
    for k in -20..=30 {
        let m = 10f64.powf(k as f64 / 10.0);
        above &= classical_rel_toa(-3.0, m, &p)? > 3.0;
    }
    let far = classical_rel_toa(-3.0, 1e3, &p)?;
    let d = (far - 3.0).abs();
    Ok((
        above && d <= 1e-5,
        format!("t > 3 on p in [1e-2, 1e3]: {above}, |t(1e3) - 3| = {d:.2e} (<= 1e-5)"),
    ))
}

fn unitary_arrival() -> Outcome {
    let p = unit();
    let grid = QuadratureGrid::gauss_legendre(100, 1.0)?;
    let s = solve_box(&grid, &p, NystromRule::AlternatingPoint)?;
    let pg = UniformGrid::symmetric(1500.0, 30001)?;
    let qg = UniformGrid::symmetric(0.3, 301)?;
    let times: Vec<f64> = (0..41).map(|k| 0.8 + 0.01 * k as f64).collect();
    let mut detail = Vec::new();
    let mut passed = true;
    for class in [ParityClass::NonNodal, ParityClass::Nodal] {
        let i = s
            .nearest(0.9944, Some(class))
            .ok_or_else(|| reltoa_core::Error::Inconclusive("no mode of the requested class".into()))?;
        let tau = s.modes[i].tau;
        let m = eigenmode_momentum(&s, i, pg)?.with_converging_delta(1e-7)?;
        let snaps = parallel::map(&times, |t| to_position(&m, qg, *t, &p).map(|f| (*t, f)));
        let snaps = snaps.into_iter().collect::<reltoa_core::Result<Vec<_>>>()?;
        let r = arrival_diagnostic(&snaps, 0.0, 0.3)?;
        let (label, t) = match class {
            ParityClass::NonNodal => ("non-nodal minimum spread", Some(r.t_min_spread)),
            ParityClass::Nodal => ("nodal closest approach", r.t_closest_approach),
        };
        match t {
            Some(t) => {
                let rel = (t - tau).abs() / tau;
                passed &= rel <= 0.05;
                detail.push(format!("{label} at t = {t:.4} vs tau = {tau:.4} ({:.2}%)", 100.0 * rel));
            }
            None => {
                passed = false;
                detail.push(format!("{label}: not found"));
            }
        }
    }
    Ok((passed, detail.join(", ")))
}

fn translation_covariance() -> Outcome {
    let p = unit();
    let spec = WavepacketSpec::gaussian(-3.0, 2.0, 0.5)?;
    let pg = UniformGrid::symmetric(40.0, 4001)?;
    let tg = UniformGrid::new(-2.0, 12.0, 1401)?;
    let moved = dist_translated(&spec, 1.0, tg, &p, pg)?;
    let later = UniformGrid::new(tg.start() + 1.0, tg.stop() + 1.0, tg.len())?;
    let shifted = dist_analytic(&spec, later, &p, pg)?.shifted(1.0)?;
    let l1 = moved.l1_distance(&shifted)?;
    Ok((l1 <= 1e-3, format!("L1 = {l1:.2e} (<= 1e-3)")))
}

fn coarse_vs_analytic() -> Outcome {
    let p = unit();
    let spec = WavepacketSpec::gaussian(-3.0, 5.0, 0.5)?;
    let tg = UniformGrid::new(0.0, 8.0, 801)?;
    let grid = QuadratureGrid::gauss_legendre(200, 10.0)?;
    let s = solve_box(&grid, &p, NystromRule::AlternatingPoint)?;
    let c = dist_coarse(&spec, &s, tg)?;
    let a = dist_analytic(&spec, tg, &p, UniformGrid::symmetric(40.0, 4001)?)?;
    let l1 = c.l1_distance(&a)?;
    Ok((
        l1 <= 0.05,
        format!("{} nodes on [-10, 10], L1 = {l1:.4} (<= 0.05)", grid.len()),
    ))
}

fn razavi_flattening() -> Outcome {
    let p = unit();
    let spec = WavepacketSpec::gaussian(-3.0, 3.0, 0.5)?;
    let pg = UniformGrid::symmetric(40.0, 4001)?;
    let tg = UniformGrid::new(0.0, 10.0, 1001)?;
    let mut max = Vec::new();
    for eps in [0.5, 0.1, 0.02] {
        max.push(dist_razavi_real(&spec, tg, eps, &p, pg)?.max_raw());
    }
    let ok = max.windows(2).all(|w| w[1] < w[0]);
    Ok((
        ok,
        format!(
            "max raw density {:.4}, {:.4}, {:.4} for eps = 0.5, 0.1, 0.02",
            max[0], max[1], max[2]
        ),
    ))
}
