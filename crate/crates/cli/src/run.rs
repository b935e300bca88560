//! Subcommand execution: each scenario computes its tables, then all files are
//! committed together with the resolved configuration, a plot script and the manifest.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use reltoa_core::expectation::{chi_moments_gaussian, classical_rel_toa, qc_borel, qc_series, toa_exact, toa_series};
use reltoa_core::grid::UniformGrid;
use reltoa_core::kernel::{pv_momentum_kernel_oracle, tc_closed, tc_integral};
use reltoa_core::nystrom::{solve_box, EigenSystem, ParityClass};
use reltoa_core::toadist::{dist_coarse_with, superluminal_mass, DistributionSource, OverlapKernel, ToaDistribution};
use reltoa_core::waves::{
    arrival_diagnostic, eigenmode_momentum, nodal_eigenfunction, nonnodal_eigenfunction, razavi_complex_eigenfunction,
    razavi_real_eigenfunction, to_position, MomentumFunction, PositionFunction, WavepacketSpec,
};
use reltoa_core::{Complex64, PhysicalParams};

use crate::acceptance;
use crate::config::{ConfigError, EvolveSource, RunConfig};
use crate::output::{num, OutputSet, Table};
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Kernel,
    Spectrum,
    Evolve,
    Expectation,
    Qfactor,
    Dist,
    Translate,
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::Spectrum => "spectrum",
            Command::Evolve => "evolve",
            Command::Expectation => "expectation",
            Command::Qfactor => "qfactor",
            Command::Dist => "dist",
            Command::Translate => "translate",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(reltoa_core::Error),
    Io(io::Error),
    /// The self-test ran but at least one criterion failed.
    CriteriaFailed(usize),
}

impl RunError {
    /// 2 for invalid input, 3 for numerical non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(e) if e.is_nonconvergence() => 3,
            RunError::Numerical(_) => 2,
            RunError::Io(_) | RunError::CriteriaFailed(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerical(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
            RunError::CriteriaFailed(n) => write!(f, "{n} acceptance criteria failed"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<reltoa_core::Error> for RunError {
    fn from(e: reltoa_core::Error) -> Self {
        RunError::Numerical(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

#[derive(Debug, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// Human-readable result lines for stdout.
    pub summary: Vec<String>,
}

/// Files produced by a scenario before they are committed.
#[derive(Default)]
struct Artifacts {
    files: Vec<(String, String)>,
    plots: Vec<String>,
    summary: Vec<String>,
}

impl Artifacts {
    fn add(&mut self, name: &str, table: &Table) {
        self.files.push((name.to_string(), table.render()));
    }

    fn plot(&mut self, line: String) {
        self.plots.push(line);
    }

    fn say(&mut self, line: String) {
        self.summary.push(line);
    }
}

/// Runs a subcommand and writes its artifacts into `out`.
pub fn run(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<RunReport, RunError> {
    cfg.validate()?;
    if cmd == Command::Selftest {
        let results = acceptance::run_all();
        let failed = results.iter().filter(|r| !r.passed).count();
        let summary = results.iter().map(|r| r.line()).collect();
        if failed > 0 {
            for r in &results {
                println!("{}", r.line());
            }
            return Err(RunError::CriteriaFailed(failed));
        }
        return Ok(RunReport {
            files: Vec::new(),
            summary,
        });
    }
    let params = cfg.physical();
    let mut a = Artifacts::default();
    match cmd {
        Command::Kernel => kernel(cfg, &params, &mut a)?,
        Command::Spectrum => spectrum(cfg, &params, &mut a)?,
        Command::Evolve => evolve(cfg, &params, &mut a)?,
        Command::Expectation => expectation(cfg, &params, &mut a)?,
        Command::Qfactor => qfactor(cfg, &params, &mut a)?,
        Command::Dist => dist(cfg, &params, &mut a)?,
        Command::Translate => translate(cfg, &params, &mut a)?,
        Command::Selftest => unreachable!(),
    }
    let mut set = OutputSet::create(out)?;
    for (name, body) in &a.files {
        set.write(name, body)?;
    }
    set.write("config.toml", &cfg.to_document())?;
    let mut gp = format!(
        "# gnuplot script for `rel-toa {}`\nset datafile separator ','\nset key autotitle columnhead\n",
        cmd.name()
    );
    for p in &a.plots {
        gp.push_str(p);
        gp.push('\n');
    }
    set.write("plot.gp", &gp)?;
    let files = set.commit()?;
    Ok(RunReport {
        files,
        summary: a.summary,
    })
}

fn spec_meta(t: Table, spec: &WavepacketSpec, params: &PhysicalParams) -> Table {
    let t = t
        .meta("mass", params.mass())
        .meta("light_speed", params.light_speed())
        .meta("hbar", params.hbar())
        .meta("q0", spec.center)
        .meta("p0", spec.momentum)
        .meta("sigma", spec.width);
    match spec.support_half_width {
        Some(a) => t.meta("support_half_width", a),
        None => t,
    }
}

fn kernel(cfg: &RunConfig, params: &PhysicalParams, a: &mut Artifacts) -> Result<(), RunError> {
    let k = &cfg.kernel;
    let n = k.points;
    let ratio = k.a_max / k.a_min;
    let mc = params.compton_wavenumber();
    let rows: Vec<f64> = (0..n)
        .map(|i| k.a_min * ratio.powf(i as f64 / (n - 1) as f64))
        .collect();
    let values = parallel::map(&rows, |&x| -> reltoa_core::Result<[f64; 3]> {
        let dq = x / mc;
        let c = tc_closed(dq, params)?;
        let q = tc_integral(dq, params, k.rel_tol)?;
        Ok([c, q, ((c - q) / q).abs()])
    });
    let mut t = Table::new(&["a", "delta_q", "tc_closed", "tc_integral", "rel_diff"])
        .meta("mass", params.mass())
        .meta("light_speed", params.light_speed())
        .meta("hbar", params.hbar());
    let mut worst = 0.0f64;
    for (x, v) in rows.iter().zip(values) {
        let v = v?;
        worst = worst.max(v[2]);
        t.numbers(&[*x, x / mc, v[0], v[1], v[2]]);
    }
    a.add("kernel_tc.csv", &t);
    a.say(format!(
        "T_c closed vs integral: max relative difference {worst:e} over {n} points"
    ));

    let oracle = parallel::map(&k.oracle_offsets, |&dq| -> reltoa_core::Result<(Complex64, f64)> {
        let got = pv_momentum_kernel_oracle(dq, params, 2000.0 * params.rest_momentum(), 64_000)?;
        let want = 0.5 / params.hbar() * tc_closed(dq.abs(), params)? * dq.signum();
        Ok((got, want))
    });
    let mut t = Table::new(&["delta_q", "oracle_re", "oracle_im", "closed_im", "abs_diff"]);
    for (dq, v) in k.oracle_offsets.iter().zip(oracle) {
        let (got, want) = v?;
        let d = (got - Complex64::new(0.0, want)).norm();
        t.numbers(&[*dq, got.re, got.im, want, d]);
    }
    a.add("kernel_oracle.csv", &t);
    a.plot("set logscale xy\nplot 'kernel_tc.csv' using 1:3 with lines, '' using 1:4 with points".into());
    Ok(())
}

fn class_name(c: ParityClass) -> &'static str {
    match c {
        ParityClass::NonNodal => "non_nodal",
        ParityClass::Nodal => "nodal",
    }
}

fn solve(cfg: &RunConfig, params: &PhysicalParams) -> Result<EigenSystem, RunError> {
    let grid = cfg.quadrature_grid()?;
    Ok(solve_box(&grid, params, cfg.rule())?)
}

fn spectrum(cfg: &RunConfig, params: &PhysicalParams, a: &mut Artifacts) -> Result<(), RunError> {
    let sys = solve(cfg, params)?;
    let mut t = Table::new(&["index", "tau", "parity_class", "center_magnitude"])
        .meta("nodes", sys.grid.len())
        .meta("half_length", sys.grid.half_length())
        .meta("rule", format!("{:?}", sys.rule));
    for (i, m) in sys.modes.iter().enumerate() {
        t.row(vec![
            i.to_string(),
            num(m.tau),
            class_name(m.parity_class).into(),
            num(m.center_magnitude),
        ]);
    }
    a.add("spectrum.csv", &t);
    let target = cfg.evolve.target_tau;
    for class in [ParityClass::NonNodal, ParityClass::Nodal] {
        let Some(i) = sys.nearest(target, Some(class)) else {
            continue;
        };
        let m = &sys.modes[i];
        let mut t = Table::new(&["q", "re", "im", "abs2"])
            .meta("tau", num(m.tau))
            .meta("parity_class", class_name(class));
        for (q, v) in sys.grid.nodes().iter().zip(&m.vector) {
            t.numbers(&[*q, v.re, v.im, v.norm_sqr()]);
        }
        a.add(&format!("mode_{}.csv", class_name(class)), &t);
        a.say(format!(
            "{} mode nearest {target}: tau = {}",
            class_name(class),
            num(m.tau)
        ));
    }
    a.say(format!("spectral radius {}", num(sys.spectral_radius())));
    a.plot("plot 'spectrum.csv' using 1:2 with points".into());
    a.plot("plot 'mode_non_nodal.csv' using 1:4 with lines, 'mode_nodal.csv' using 1:4 with lines".into());
    Ok(())
}

fn snapshots(
    g: &MomentumFunction,
    q_grid: UniformGrid,
    times: &[f64],
    params: &PhysicalParams,
) -> Result<Vec<(f64, PositionFunction)>, RunError> {
    let snaps = parallel::map(times, |t| to_position(g, q_grid, *t, params).map(|f| (*t, f)));
    Ok(snaps.into_iter().collect::<reltoa_core::Result<Vec<_>>>()?)
}

fn density_table(snaps: &[(f64, PositionFunction)], label: &str) -> Table {
    let mut t = Table::new(&["t", "q", "re", "im", "density"]).meta("function", label);
    for (time, f) in snaps {
        for (i, v) in f.values.iter().enumerate() {
            t.numbers(&[*time, f.grid.point(i), v.re, v.im, v.norm_sqr()]);
        }
    }
    t
}

/// Evolves one eigenfunction, writes its density and (optionally) arrival tables.
fn evolve_one(
    cfg: &RunConfig,
    params: &PhysicalParams,
    a: &mut Artifacts,
    label: &str,
    tau: f64,
    g: MomentumFunction,
    diagnose: bool,
) -> Result<(), RunError> {
    let e = &cfg.evolve;
    let g = g.with_converging_delta(e.converging_delta)?;
    let q_grid = UniformGrid::symmetric(e.q_half_width, e.q_points)?;
    let tg = UniformGrid::new(e.t_start, e.t_stop, e.t_points)?;
    let snaps = snapshots(&g, q_grid, &tg.points(), params)?;
    a.add(
        &format!("evolve_{label}.csv"),
        &density_table(&snaps, label).meta("tau", num(tau)),
    );
    a.plot(format!("splot 'evolve_{label}.csv' using 1:2:5 with lines"));
    if diagnose {
        let r = arrival_diagnostic(&snaps, 0.0, e.window_half_width)?;
        let mut t = Table::new(&["t", "spread", "left_peak", "right_peak"])
            .meta("tau", num(tau))
            .meta("t_min_spread", num(r.t_min_spread))
            .meta("t_closest_approach", r.t_closest_approach.map_or("none".into(), num));
        for (i, time) in r.times.iter().enumerate() {
            let (l, rr) = r.peaks[i].unwrap_or((f64::NAN, f64::NAN));
            t.numbers(&[*time, r.spreads[i], l, rr]);
        }
        a.add(&format!("arrival_{label}.csv"), &t);
        a.say(format!(
            "{label}: tau = {}, minimum spread at t = {}, peaks closest at t = {}",
            num(tau),
            num(r.t_min_spread),
            r.t_closest_approach.map_or("none".into(), num)
        ));
    }
    Ok(())
}

fn evolve(cfg: &RunConfig, params: &PhysicalParams, a: &mut Artifacts) -> Result<(), RunError> {
    let e = &cfg.evolve;
    let p_grid = UniformGrid::symmetric(e.p_max, e.p_points)?;
    match e.source {
        EvolveSource::Coarse => {
            let sys = solve(cfg, params)?;
            for class in [ParityClass::NonNodal, ParityClass::Nodal] {
                let i = sys.nearest(e.target_tau, Some(class)).ok_or_else(|| {
                    reltoa_core::Error::Inconclusive(format!("no {} mode in the spectrum", class_name(class)))
                })?;
                let g = eigenmode_momentum(&sys, i, p_grid)?;
                evolve_one(cfg, params, a, class_name(class), sys.modes[i].tau, g, true)?;
            }
        }
        EvolveSource::Analytic => {
            let g = nonnodal_eigenfunction(p_grid, e.target_tau, params)?;
            evolve_one(cfg, params, a, "non_nodal", e.target_tau, g, true)?;
            let g = nodal_eigenfunction(p_grid, e.target_tau, params)?;
            evolve_one(cfg, params, a, "nodal", e.target_tau, g, true)?;
        }
        EvolveSource::RazaviReal => {
            for eps in &e.epsilons {
                let g = razavi_real_eigenfunction(p_grid, e.target_tau, *eps, params)?;
                evolve_one(cfg, params, a, &format!("razavi_real_eps{eps}"), e.target_tau, g, false)?;
            }
        }
        EvolveSource::RazaviComplex => {
            for (label, sign) in [("minus", -1.0), ("plus", 1.0)] {
                let tau = Complex64::new(e.target_tau, sign * e.tau_imag);
                let r = razavi_complex_eigenfunction(p_grid, tau, params)?;
                a.say(format!(
                    "razavi_complex_{label}: tau = {} {:+}i, normalized = {}",
                    tau.re, tau.im, r.normalized
                ));
                evolve_one(
                    cfg,
                    params,
                    a,
                    &format!("razavi_complex_{label}"),
                    e.target_tau,
                    r.function,
                    false,
                )?;
            }
        }
    }
    Ok(())
}

fn expectation(cfg: &RunConfig, params: &PhysicalParams, a: &mut Artifacts) -> Result<(), RunError> {
    let base = cfg.wavepacket()?;
    let x = &cfg.expectation;
    let rows = parallel::map(&x.momenta, |&p| -> reltoa_core::Result<[f64; 7]> {
        let spec = WavepacketSpec { momentum: p, ..base };
        let t = classical_rel_toa(spec.center, p, params)?;
        let qc = qc_borel(p, spec.width, params, 1e-12)?;
        let exact = toa_exact(&spec, params, x.tolerance)?.tau;
        // the moment series is only defined for the untruncated Gaussian
        let (series, n_opt) = match chi_moments_gaussian(&spec, x.n_max) {
            Ok(m) => {
                let s = toa_series(&m, p, params, x.n_max)?;
                (s.optimal_value, s.optimal_truncation_index as f64)
            }
            Err(_) => (f64::NAN, f64::NAN),
        };
        Ok([p, spec.width, t, qc, exact, series, n_opt])
    });
    let mut t = spec_meta(
        Table::new(&[
            "p",
            "sigma",
            "t_classical",
            "qc",
            "tau_exact",
            "tau_series_optimal",
            "n_optimal",
        ]),
        &base,
        params,
    );
    for r in rows {
        let r = r?;
        let rel = ((r[4] - r[2] * r[3]) / r[4]).abs();
        a.say(format!(
            "p = {}: tau_exact = {}, t*Q_c = {}, relative difference {rel:e}",
            r[0],
            num(r[4]),
            num(r[2] * r[3])
        ));
        let mut cells: Vec<String> = r[..6].iter().map(|v| num(*v)).collect();
        cells.push(if r[6].is_nan() {
            "nan".into()
        } else {
            (r[6] as usize).to_string()
        });
        t.row(cells);
    }
    a.add("expectation.csv", &t);
    a.plot(
        "plot 'expectation.csv' using 1:5 with points, '' using 1:($3*$4) with lines, '' using 1:6 with points".into(),
    );
    Ok(())
}

fn qfactor(cfg: &RunConfig, params: &PhysicalParams, a: &mut Artifacts) -> Result<(), RunError> {
    let q = &cfg.qfactor;
    let pairs: Vec<(f64, f64)> = q
        .sigmas
        .iter()
        .flat_map(|s| q.momenta.iter().map(move |p| (*p, *s)))
        .collect();
    let rows = parallel::map(&pairs, |&(p, s)| -> reltoa_core::Result<(f64, f64, f64, usize, f64)> {
        let b = qc_borel(p, s, params, q.tolerance)?;
        let ser = qc_series(p, s, params, q.n_max)?;
        let smallest = ser.terms[ser.optimal_truncation_index].abs();
        Ok((p, s, b, ser.optimal_truncation_index, smallest))
    });
    let mut t = Table::new(&[
        "p",
        "sigma",
        "qc_borel",
        "qc_series_optimal",
        "n_optimal",
        "smallest_term",
    ])
    .meta("mass", params.mass())
    .meta("light_speed", params.light_speed())
    .meta("hbar", params.hbar());
    let (mut above, mut below) = (0, 0);
    for (r, &(p, s)) in rows.into_iter().zip(&pairs) {
        let (_, _, b, n, smallest) = r?;
        let ser = qc_series(p, s, params, q.n_max)?;
        if b > 1.0 {
            above += 1;
        } else if b < 1.0 {
            below += 1;
        }
        t.row(vec![
            num(p),
            num(s),
            num(b),
            num(ser.optimal_value),
            n.to_string(),
            num(smallest),
        ]);
    }
    a.add("qfactor.csv", &t);
    a.say(format!(
        "Q_c > 1 (delayed) at {above} points, Q_c < 1 (advanced) at {below} points"
    ));
    a.plot("plot 'qfactor.csv' using 1:3 with points".into());
    Ok(())
}

fn dist_table(d: &ToaDistribution) -> Table {
    let m = &d.metadata;
    let mut t = spec_meta(
        Table::new(&["tau", "density_raw", "density_normalized"]),
        &m.spec,
        &m.params,
    )
    .meta("source", d.source.name())
    .meta("grid", &m.provenance)
    .meta("raw_integral", num(m.raw_integral))
    .meta("normalized", m.normalized);
    for (i, tau) in d.taus().iter().enumerate() {
        t.numbers(&[*tau, d.raw[i], d.density[i]]);
    }
    t
}

/// `raw_density` split over τ chunks; each τ is independent.
fn parallel_density(k: &OverlapKernel, tau_grid: &UniformGrid) -> Vec<f64> {
    let taus = tau_grid.points();
    let chunks: Vec<&[f64]> = taus.chunks(64).collect();
    parallel::map(&chunks, |c| k.raw_density(c)).concat()
}

fn analytic(
    spec: &WavepacketSpec,
    tau_grid: UniformGrid,
    params: &PhysicalParams,
    p_grid: UniformGrid,
    kernel: OverlapKernel,
    source: DistributionSource,
    note: &str,
) -> Result<ToaDistribution, RunError> {
    let raw = parallel_density(&kernel, &tau_grid);
    let prov = format!(
        "p_grid=[{},{}]x{} tau_grid=[{},{}]x{}{note}",
        p_grid.start(),
        p_grid.stop(),
        p_grid.len(),
        tau_grid.start(),
        tau_grid.stop(),
        tau_grid.len()
    );
    Ok(ToaDistribution::from_raw(tau_grid, raw, source, *spec, *params, prov)?)
}

fn describe(a: &mut Artifacts, name: &str, d: &ToaDistribution, t_photon: f64) -> Result<(), RunError> {
    a.say(format!(
        "{name}: peak {}, mean {}, raw integral {}, mass before the photon time {}",
        num(d.peak()),
        num(d.mean()),
        num(d.metadata.raw_integral),
        num(superluminal_mass(d, t_photon)?)
    ));
    Ok(())
}

fn dist(cfg: &RunConfig, params: &PhysicalParams, a: &mut Artifacts) -> Result<(), RunError> {
    let spec = cfg.wavepacket()?;
    let tau_grid = cfg.tau_grid()?;
    let p_grid = cfg.momentum_grid()?;
    let t_photon = -spec.center / params.light_speed();
    let d = &cfg.dist;
    if d.analytic {
        let k = OverlapKernel::nonnodal(&spec, p_grid, &tau_grid, params)?;
        let dist = analytic(
            &spec,
            tau_grid,
            params,
            p_grid,
            k,
            DistributionSource::AnalyticNonNodal,
            "",
        )?;
        describe(a, "analytic", &dist, t_photon)?;
        a.add("toadist_analytic.csv", &dist_table(&dist));
        a.plot("plot 'toadist_analytic.csv' using 1:3 with lines".into());
    }
    if d.coarse {
        let sys = solve(cfg, params)?;
        let dist = dist_coarse_with(&spec, &sys, tau_grid, d.include_nodal)?;
        describe(a, "coarse", &dist, t_photon)?;
        a.add("toadist_coarse.csv", &dist_table(&dist));
        a.plot("plot 'toadist_coarse.csv' using 1:3 with lines".into());
    }
    for eps in &d.epsilons {
        let k = OverlapKernel::razavi_real(&spec, p_grid, &tau_grid, *eps, params)?;
        let note = format!(" epsilon={eps}");
        let dist = analytic(
            &spec,
            tau_grid,
            params,
            p_grid,
            k,
            DistributionSource::RazaviReal,
            &note,
        )?;
        a.say(format!(
            "razavi_real epsilon={eps}: max raw density {}",
            num(dist.max_raw())
        ));
        let name = format!("toadist_razavi_eps{eps}.csv");
        a.add(&name, &dist_table(&dist));
        a.plot(format!("plot '{name}' using 1:2 with lines"));
    }
    Ok(())
}

fn translate(cfg: &RunConfig, params: &PhysicalParams, a: &mut Artifacts) -> Result<(), RunError> {
    let spec = cfg.wavepacket()?;
    let tau_grid = cfg.tau_grid()?;
    let p_grid = cfg.momentum_grid()?;
    let base = OverlapKernel::nonnodal(&spec, p_grid, &tau_grid, params)?;
    let d0 = analytic(
        &spec,
        tau_grid,
        params,
        p_grid,
        base.clone(),
        DistributionSource::AnalyticNonNodal,
        "",
    )?;
    a.add("toadist_t0.csv", &dist_table(&d0));
    let mut summary = Table::new(&["t_shift", "l1_to_shifted_analytic"]);
    for &t in &cfg.translate.shifts {
        let note = format!(" t_shift={t}");
        let moved = analytic(
            &spec,
            tau_grid,
            params,
            p_grid,
            base.clone().evolved(t),
            DistributionSource::AnalyticNonNodal,
            &note,
        )?;
        let later = UniformGrid::new(tau_grid.start() + t, tau_grid.stop() + t, tau_grid.len())?;
        let k = OverlapKernel::nonnodal(&spec, p_grid, &later, params)?;
        let shifted = analytic(
            &spec,
            later,
            params,
            p_grid,
            k,
            DistributionSource::AnalyticNonNodal,
            "",
        )?
        .shifted(t)?;
        let l1 = moved.l1_distance(&shifted)?;
        summary.numbers(&[t, l1]);
        a.say(format!("t_shift = {t}: L1 distance to the shifted distribution {l1:e}"));
        let name = format!("toadist_t{t}.csv");
        a.add(&name, &dist_table(&moved));
        a.plot(format!(
            "plot 'toadist_t0.csv' using 1:3 with lines, '{name}' using 1:3 with lines"
        ));
    }
    a.add("translate_summary.csv", &summary);
    Ok(())
}
