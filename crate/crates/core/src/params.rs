#[allow(unused_imports)] // float math is inherent in core on recent toolchains
use num_traits::Float;

use crate::{Error, Result};

/// Mass μ, speed of light c and reduced Planck constant ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    mass: f64,
    light_speed: f64,
    hbar: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            mass: 1.0,
            light_speed: 1.0,
            hbar: 1.0,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::domain(name, v, "finite and > 0"))
    }
}

impl PhysicalParams {
    pub fn new(mass: f64, light_speed: f64, hbar: f64) -> Result<Self> {
        let p = PhysicalParams {
            mass: positive("mass", mass)?,
            light_speed: positive("light_speed", light_speed)?,
            hbar: positive("hbar", hbar)?,
        };
        let l = p.compton_length();
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::domain("hbar/(mass*light_speed)", l, "finite and > 0"));
        }
        let k = p.compton_wavenumber();
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::domain("mass*light_speed/hbar", k, "finite and > 0"));
        }
        Ok(p)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn light_speed(&self) -> f64 {
        self.light_speed
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Reduced Compton length ħ/(μc).
    pub fn compton_length(&self) -> f64 {
        (self.hbar / self.mass) / self.light_speed
    }

    /// μc/ħ, the scale that turns |Δq| into the Bessel argument.
    pub fn compton_wavenumber(&self) -> f64 {
        (self.mass / self.hbar) * self.light_speed
    }

    /// μc.
    pub fn rest_momentum(&self) -> f64 {
        self.mass * self.light_speed
    }

    /// E_p = √(p²c² + μ²c⁴).
    pub fn energy(&self, p: f64) -> f64 {
        self.light_speed * p.hypot(self.rest_momentum())
    }

    /// √(1 + p²/μ²c²), the ratio E_p/(μc²).
    pub fn lorentz_factor(&self, p: f64) -> f64 {
        1.0.hypot(p / self.rest_momentum())
    }

    /// The same parameters with a different speed of light.
    pub fn with_light_speed(&self, c: f64) -> Result<Self> {
        PhysicalParams::new(self.mass, c, self.hbar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive() {
        assert!(PhysicalParams::new(0.0, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, f64::NAN).is_err());
        assert!(PhysicalParams::new(1.0, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn compton_scale_without_overflow() {
        let p = PhysicalParams::new(1e-300, 1e-300, 1e-300).unwrap();
        assert!((p.compton_length() - 1e300).abs() / 1e300 < 1e-12);
        assert!(PhysicalParams::new(1e-300, 1e-300, 1e300).is_err());
    }

    #[test]
    fn energy_and_lorentz() {
        let p = PhysicalParams::default();
        assert!((p.energy(1.0) - 2f64.sqrt()).abs() < 1e-15);
        assert!((p.lorentz_factor(0.0) - 1.0).abs() < 1e-15);
    }
}
