//! Run configuration: a TOML document of `[section]` headers and `key = value`
//! lines. Every section and key is optional; unknown or repeated keys are errors.

use std::fmt;
use std::path::PathBuf;

use reltoa_core::grid::{QuadratureGrid, UniformGrid};
use reltoa_core::nystrom::NystromRule;
use reltoa_core::waves::WavepacketSpec;
use reltoa_core::PhysicalParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// Syntax, duplicate or unknown keys; the message carries the line number.
    Parse(String),
    Invalid {
        field: String,
        value: String,
        constraint: &'static str,
    },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Invalid {
                field,
                value,
                constraint,
            } => write!(f, "invalid config: {field} = {value}: must be {constraint}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    pub packet: PacketSection,
    #[serde(rename = "box")]
    pub confinement: BoxSection,
    pub momentum: MomentumSection,
    pub tau: TauSection,
    pub kernel: KernelSection,
    pub evolve: EvolveSection,
    pub expectation: ExpectationSection,
    pub qfactor: QfactorSection,
    pub dist: DistSection,
    pub translate: TranslateSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub mass: f64,
    pub light_speed: f64,
    pub hbar: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        ParamsSection {
            mass: 1.0,
            light_speed: 1.0,
            hbar: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacketSection {
    pub q0: f64,
    pub p0: f64,
    pub sigma: f64,
    /// Half-width of a compact support around `q0`; absent for a plain Gaussian.
    pub support_half_width: Option<f64>,
}

impl Default for PacketSection {
    fn default() -> Self {
        PacketSection {
            q0: -3.0,
            p0: 5.0,
            sigma: 0.5,
            support_half_width: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    Alternating,
    Plain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoxSection {
    pub half_length: f64,
    /// Odd number of Gauss–Legendre nodes.
    pub nodes: usize,
    pub rule: RuleName,
}

impl Default for BoxSection {
    fn default() -> Self {
        BoxSection {
            half_length: 10.0,
            nodes: 401,
            rule: RuleName::Alternating,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentumSection {
    pub p_max: f64,
    pub points: usize,
}

impl Default for MomentumSection {
    fn default() -> Self {
        MomentumSection {
            p_max: 40.0,
            points: 4001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TauSection {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for TauSection {
    fn default() -> Self {
        TauSection {
            start: 0.0,
            stop: 8.0,
            points: 801,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    /// Log-spaced `a = μcΔq/ħ` range for the `T_c` table.
    pub a_min: f64,
    pub a_max: f64,
    pub points: usize,
    pub rel_tol: f64,
    /// Δq values for the momentum-space cross-check.
    pub oracle_offsets: Vec<f64>,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            a_min: 1e-3,
            a_max: 30.0,
            points: 61,
            rel_tol: 1e-12,
            oracle_offsets: vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolveSource {
    /// Coarse-grained Nyström modes nearest `target_tau`, both parity classes.
    Coarse,
    /// Analytic non-nodal and nodal eigenfunctions at `target_tau`.
    Analytic,
    /// Real Razavi eigenfunctions at `target_tau`, one run per epsilon.
    RazaviReal,
    /// Complex Razavi eigenfunctions at `target_tau ± i·tau_imag`.
    RazaviComplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    pub source: EvolveSource,
    pub target_tau: f64,
    pub tau_imag: f64,
    pub epsilons: Vec<f64>,
    pub converging_delta: f64,
    pub p_max: f64,
    pub p_points: usize,
    pub q_half_width: f64,
    pub q_points: usize,
    pub t_start: f64,
    pub t_stop: f64,
    pub t_points: usize,
    pub window_half_width: f64,
}

impl Default for EvolveSection {
    fn default() -> Self {
        EvolveSection {
            source: EvolveSource::Coarse,
            target_tau: 0.9944,
            tau_imag: 1.0,
            epsilons: vec![0.5, 0.2, 0.05],
            converging_delta: 1e-7,
            p_max: 1500.0,
            p_points: 30001,
            q_half_width: 0.3,
            q_points: 301,
            t_start: 0.8,
            t_stop: 1.2,
            t_points: 41,
            window_half_width: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpectationSection {
    pub momenta: Vec<f64>,
    pub n_max: usize,
    pub tolerance: f64,
}

impl Default for ExpectationSection {
    fn default() -> Self {
        ExpectationSection {
            momenta: vec![2.0, 3.0, 5.0, 8.0, 10.0],
            n_max: 40,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QfactorSection {
    pub momenta: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub n_max: usize,
    pub tolerance: f64,
}

impl Default for QfactorSection {
    fn default() -> Self {
        QfactorSection {
            momenta: vec![0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0],
            sigmas: vec![0.1, 0.3, 0.5, 1.0, 3.0],
            n_max: 40,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistSection {
    pub analytic: bool,
    pub coarse: bool,
    pub include_nodal: bool,
    /// One Razavi-real distribution per entry.
    pub epsilons: Vec<f64>,
}

impl Default for DistSection {
    fn default() -> Self {
        DistSection {
            analytic: true,
            coarse: true,
            include_nodal: false,
            epsilons: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TranslateSection {
    pub shifts: Vec<f64>,
}

impl Default for TranslateSection {
    fn default() -> Self {
        TranslateSection {
            shifts: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("rel-toa-out"),
        }
    }
}

fn invalid(field: &str, value: impl fmt::Display, constraint: &'static str) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        value: value.to_string(),
        constraint,
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, v, "finite and > 0"))
    }
}

fn finite(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, v, "finite"))
    }
}

fn at_least(field: &str, v: usize, min: usize, constraint: &'static str) -> Result<(), ConfigError> {
    if v >= min {
        Ok(())
    } else {
        Err(invalid(field, v, constraint))
    }
}

fn ordered(field: &str, start: f64, stop: f64) -> Result<(), ConfigError> {
    if stop > start {
        Ok(())
    } else {
        Err(invalid(field, stop, "greater than the start"))
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Checks every numeric field against the preconditions of the operation using it.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.params;
        positive("params.mass", p.mass)?;
        positive("params.light_speed", p.light_speed)?;
        positive("params.hbar", p.hbar)?;

        let k = &self.packet;
        finite("packet.q0", k.q0)?;
        finite("packet.p0", k.p0)?;
        positive("packet.sigma", k.sigma)?;
        if let Some(a) = k.support_half_width {
            positive("packet.support_half_width", a)?;
        }

        let b = &self.confinement;
        positive("box.half_length", b.half_length)?;
        if b.nodes < 3 || b.nodes.is_multiple_of(2) {
            return Err(invalid("box.nodes", b.nodes, "odd and >= 3"));
        }

        positive("momentum.p_max", self.momentum.p_max)?;
        at_least("momentum.points", self.momentum.points, 3, ">= 3")?;

        let t = &self.tau;
        finite("tau.start", t.start)?;
        finite("tau.stop", t.stop)?;
        ordered("tau.stop", t.start, t.stop)?;
        at_least("tau.points", t.points, 2, ">= 2")?;

        let kn = &self.kernel;
        positive("kernel.a_min", kn.a_min)?;
        positive("kernel.a_max", kn.a_max)?;
        ordered("kernel.a_max", kn.a_min, kn.a_max)?;
        at_least("kernel.points", kn.points, 2, ">= 2")?;
        if !(kn.rel_tol > 0.0 && kn.rel_tol <= 1e-3) {
            return Err(invalid("kernel.rel_tol", kn.rel_tol, "in (0, 1e-3]"));
        }
        for (i, d) in kn.oracle_offsets.iter().enumerate() {
            if !(d.is_finite() && *d != 0.0) {
                return Err(invalid(&format!("kernel.oracle_offsets[{i}]"), d, "finite and nonzero"));
            }
        }

        let e = &self.evolve;
        finite("evolve.target_tau", e.target_tau)?;
        finite("evolve.tau_imag", e.tau_imag)?;
        for (i, v) in e.epsilons.iter().enumerate() {
            positive(&format!("evolve.epsilons[{i}]"), *v)?;
        }
        if !(e.converging_delta >= 0.0 && e.converging_delta.is_finite()) {
            return Err(invalid(
                "evolve.converging_delta",
                e.converging_delta,
                "finite and >= 0",
            ));
        }
        positive("evolve.p_max", e.p_max)?;
        at_least("evolve.p_points", e.p_points, 3, ">= 3")?;
        positive("evolve.q_half_width", e.q_half_width)?;
        at_least("evolve.q_points", e.q_points, 3, ">= 3")?;
        finite("evolve.t_start", e.t_start)?;
        finite("evolve.t_stop", e.t_stop)?;
        ordered("evolve.t_stop", e.t_start, e.t_stop)?;
        at_least("evolve.t_points", e.t_points, 3, ">= 3")?;
        positive("evolve.window_half_width", e.window_half_width)?;

        let x = &self.expectation;
        for (i, v) in x.momenta.iter().enumerate() {
            if !(v.is_finite() && *v != 0.0) {
                return Err(invalid(&format!("expectation.momenta[{i}]"), v, "finite and nonzero"));
            }
        }
        positive("expectation.tolerance", x.tolerance)?;

        let q = &self.qfactor;
        for (i, v) in q.momenta.iter().enumerate() {
            if !(v.is_finite() && *v != 0.0) {
                return Err(invalid(&format!("qfactor.momenta[{i}]"), v, "finite and nonzero"));
            }
        }
        for (i, v) in q.sigmas.iter().enumerate() {
            positive(&format!("qfactor.sigmas[{i}]"), *v)?;
        }
        positive("qfactor.tolerance", q.tolerance)?;

        for (i, v) in self.dist.epsilons.iter().enumerate() {
            positive(&format!("dist.epsilons[{i}]"), *v)?;
        }
        for (i, v) in self.translate.shifts.iter().enumerate() {
            finite(&format!("translate.shifts[{i}]"), *v)?;
        }
        Ok(())
    }

    /// The resolved configuration, defaults included, as a TOML document.
    pub fn to_document(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn physical(&self) -> PhysicalParams {
        PhysicalParams::new(self.params.mass, self.params.light_speed, self.params.hbar).expect("validated parameters")
    }

    pub fn wavepacket(&self) -> reltoa_core::Result<WavepacketSpec> {
        let k = &self.packet;
        let spec = WavepacketSpec::gaussian(k.q0, k.p0, k.sigma)?;
        match k.support_half_width {
            Some(a) => spec.with_support(a),
            None => Ok(spec),
        }
    }

    pub fn quadrature_grid(&self) -> reltoa_core::Result<QuadratureGrid> {
        QuadratureGrid::gauss_legendre(self.confinement.nodes / 2, self.confinement.half_length)
    }

    pub fn rule(&self) -> NystromRule {
        match self.confinement.rule {
            RuleName::Alternating => NystromRule::AlternatingPoint,
            RuleName::Plain => NystromRule::Plain,
        }
    }

    pub fn momentum_grid(&self) -> reltoa_core::Result<UniformGrid> {
        UniformGrid::symmetric(self.momentum.p_max, self.momentum.points)
    }

    pub fn tau_grid(&self) -> reltoa_core::Result<UniformGrid> {
        UniformGrid::new(self.tau.start, self.tau.stop, self.tau.points)
    }
}
