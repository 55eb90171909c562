//! Conversion of dimensionless designs to a physical cross-section.
//!
//! In SI units `Ω_mn = c·sqrt((mπ/a)² + (nπ/b)²)` is an angular frequency.
//! Frequencies quoted in Hz are ambiguous between `f` and `ω = 2πf`, so every
//! reported value carries both.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modes::{ModeOrdering, OrderingPolicy, WaveguideGeometry};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// How a target frequency is to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyConvention {
    /// Cycles per second, `f`.
    Ordinary,
    /// Radians per second, `ω = 2πf`.
    Angular,
}

impl std::str::FromStr for FrequencyConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordinary" | "hz" => Ok(Self::Ordinary),
            "angular" | "rad" => Ok(Self::Angular),
            other => Err(Error::InvalidInput(format!("unknown frequency convention `{other}`"))),
        }
    }
}

/// Where the target frequency sits in the dimensionless spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Midway between the two lowest coupled cutoffs.
    MidGap12,
    /// At the given energy in units of `π/a`.
    Explicit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyPair {
    pub ordinary_hz: f64,
    pub angular_rad_per_s: f64,
}

impl FrequencyPair {
    fn from_angular(angular: f64) -> Self {
        Self {
            ordinary_hz: angular / (2.0 * PI),
            angular_rad_per_s: angular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffReport {
    pub m: u32,
    pub n: u32,
    pub dimensionless: f64,
    pub frequency: FrequencyPair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicalSizing {
    pub target: FrequencyPair,
    pub convention: FrequencyConvention,
    pub placement: Placement,
    pub aspect_ratio: f64,
    pub computed_a: f64,
    pub computed_b: f64,
    pub cutoff_report: Vec<CutoffReport>,
}

/// Number of cutoffs listed in a sizing report.
pub const REPORTED_CUTOFFS: usize = 6;

/// Guide dimensions placing `target` at `placement`.
pub fn physical_sizing(
    target: f64,
    convention: FrequencyConvention,
    placement: Placement,
    geom: &WaveguideGeometry,
) -> Result<PhysicalSizing> {
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::InvalidInput(format!("target frequency must be positive, got {target}")));
    }
    let angular = match convention {
        FrequencyConvention::Ordinary => 2.0 * PI * target,
        FrequencyConvention::Angular => target,
    };
    let modes = ModeOrdering::lowest(geom, OrderingPolicy::Physical, REPORTED_CUTOFFS)?;
    let dimensionless = match placement {
        Placement::MidGap12 => 0.5 * (modes.modes[0].cutoff + modes.modes[1].cutoff),
        Placement::Explicit(e) if e.is_finite() && e > 0.0 => e,
        Placement::Explicit(e) => {
            return Err(Error::InvalidInput(format!("placement energy must be positive, got {e}")))
        }
    };
    // Energy unit π/a ↔ angular frequency π c / a.
    let a = dimensionless * PI * SPEED_OF_LIGHT / angular;
    let unit = PI * SPEED_OF_LIGHT / a;
    Ok(PhysicalSizing {
        target: FrequencyPair::from_angular(angular),
        convention,
        placement,
        aspect_ratio: geom.aspect_ratio(),
        computed_a: a,
        computed_b: a / geom.aspect_ratio(),
        cutoff_report: modes
            .modes
            .iter()
            .map(|m| CutoffReport {
                m: m.m,
                n: m.n,
                dimensionless: m.cutoff,
                frequency: FrequencyPair::from_angular(m.cutoff * unit),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_gigahertz_switch() {
        let s = physical_sizing(
            10.2e9,
            FrequencyConvention::Ordinary,
            Placement::MidGap12,
            &WaveguideGeometry::default(),
        )
        .unwrap();
        // (√5 + √13)/2 · c/(2a) = 10.2 GHz
        let a = (5f64.sqrt() + 13f64.sqrt()) / 2.0 * SPEED_OF_LIGHT / (2.0 * 10.2e9);
        assert!((s.computed_a - a).abs() < 1e-12);
        assert!(s.computed_b > 0.020 && s.computed_b < 0.022, "{}", s.computed_b);
        assert!((s.computed_a - 2.0 * s.computed_b).abs() < 1e-15);
        let omega2 = s.cutoff_report[1].frequency.angular_rad_per_s;
        assert!(omega2 > 79e9 && omega2 < 81e9, "{omega2}");
    }

    #[test]
    fn terahertz_scales_inversely() {
        let geom = WaveguideGeometry::default();
        let low = physical_sizing(10.2e9, FrequencyConvention::Ordinary, Placement::MidGap12, &geom).unwrap();
        let high = physical_sizing(1000e9, FrequencyConvention::Ordinary, Placement::MidGap12, &geom).unwrap();
        assert!((high.computed_b - low.computed_b * 10.2 / 1000.0).abs() < 1e-15);
        assert!(high.computed_b > 200e-6 && high.computed_b < 230e-6);
    }

    #[test]
    fn angular_convention_and_validation() {
        let geom = WaveguideGeometry::default();
        let ord = physical_sizing(1e9, FrequencyConvention::Ordinary, Placement::Explicit(3.0), &geom).unwrap();
        let ang = physical_sizing(2.0 * PI * 1e9, FrequencyConvention::Angular, Placement::Explicit(3.0), &geom).unwrap();
        assert!((ord.computed_a - ang.computed_a).abs() < 1e-15);
        assert!(physical_sizing(-1.0, FrequencyConvention::Ordinary, Placement::MidGap12, &geom).is_err());
    }
}
