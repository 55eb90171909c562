//! JSON run configuration. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{cutoff_frequency, CouplingConfig, OrderingPolicy, WaveguideGeometry};
use crate::self_energy::{LambTruncation, TlsParams};
use crate::spectra::{IncidentSpec, ScanSpec, DEFAULT_POINTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidInput(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub format: OutputFormat,
    /// Standard output when absent.
    pub path: Option<PathBuf>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            format: OutputFormat::Csv,
            path: None,
        }
    }
}

/// Everything needed to reproduce one reflectance scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub e_min: f64,
    pub e_max: f64,
    pub points: usize,
    pub incident: IncidentSpec,
    pub omega_a: f64,
    pub g_squared: f64,
    pub aspect_ratio: f64,
    pub ordering: OrderingPolicy,
    pub lamb: LambTruncation,
    pub output: OutputConfig,
    pub emit_plot_script: bool,
}

impl Default for RunConfig {
    /// The CC curve of the two-channel window `(Ω₂, Ω₃)` at `g² = 0.01`.
    fn default() -> Self {
        let geom = WaveguideGeometry::default();
        let (o2, o3) = (cutoff_frequency(3, 1, &geom), cutoff_frequency(1, 3, &geom));
        Self {
            e_min: o2,
            e_max: o3,
            points: DEFAULT_POINTS,
            incident: IncidentSpec::Cc,
            omega_a: 0.5 * (o2 + o3),
            g_squared: 0.01,
            aspect_ratio: 2.0,
            ordering: OrderingPolicy::PaperFigure,
            lamb: LambTruncation::OpenChannels,
            output: OutputConfig::default(),
            emit_plot_script: false,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("reading {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn scan_spec(&self) -> Result<ScanSpec> {
        let spec = ScanSpec {
            e_min: self.e_min,
            e_max: self.e_max,
            points: self.points,
            incident: self.incident.clone(),
            tls: TlsParams::new(self.omega_a)?,
            coupling: CouplingConfig::new(self.g_squared)?,
            geometry: WaveguideGeometry::new(self.aspect_ratio)?,
            policy: self.ordering,
            truncation: self.lamb,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_scan_spec(spec: &ScanSpec) -> Self {
        Self {
            e_min: spec.e_min,
            e_max: spec.e_max,
            points: spec.points,
            incident: spec.incident.clone(),
            omega_a: spec.tls.omega_a(),
            g_squared: spec.coupling.g_squared(),
            aspect_ratio: spec.geometry.aspect_ratio(),
            ordering: spec.policy,
            lamb: spec.truncation,
            output: OutputConfig::default(),
            emit_plot_script: false,
        }
    }
}

/// Parses `cc`, `mode:M,N` or `vector:re,im;re,im;...`.
pub fn parse_incident(text: &str) -> Result<IncidentSpec> {
    let bad = || Error::InvalidInput(format!("bad incident `{text}`"));
    if text == "cc" {
        return Ok(IncidentSpec::Cc);
    }
    if let Some(rest) = text.strip_prefix("mode:") {
        let (m, n) = rest.split_once(',').ok_or_else(bad)?;
        return Ok(IncidentSpec::Mode(
            m.trim().parse().map_err(|_| bad())?,
            n.trim().parse().map_err(|_| bad())?,
        ));
    }
    if let Some(rest) = text.strip_prefix("vector:") {
        let amps = rest
            .split(';')
            .map(|pair| {
                let (re, im) = pair.split_once(',').unwrap_or((pair, "0"));
                Ok(num_complex::Complex64::new(
                    re.trim().parse().map_err(|_| bad())?,
                    im.trim().parse().map_err(|_| bad())?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(IncidentSpec::Vector(amps));
    }
    Err(bad())
}
