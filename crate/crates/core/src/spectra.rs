//! Reflectance/transmittance scans over an energy grid and the parameter
//! sets of the published spectra.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{
    cutoff_frequency, CouplingConfig, OrderingPolicy, WaveguideGeometry, PAPER_FIGURE_MODES,
};
use crate::scattering::{cc_from_channels, scatter_with, transport_summary, ChannelVector};
use crate::self_energy::{self_energy, LambTruncation, SystemContext, TlsParams};

/// Default grid size of the figure presets.
pub const DEFAULT_POINTS: usize = 4000;

/// Coupling strengths swept for the figures whose `g²` is not stated.
pub const UNSPECIFIED_G2_SWEEP: [f64; 3] = [0.005, 0.01, 0.02];

const PEAK_REFINEMENT_PASSES: usize = 4;

/// Which channel superposition the photon arrives in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncidentSpec {
    /// A single TM mode.
    Mode(u32, u32),
    /// The controllable channel at each energy.
    Cc,
    /// Fixed amplitudes over the open channels, normalized at each energy.
    Vector(Vec<Complex64>),
}

impl IncidentSpec {
    pub fn label(&self) -> String {
        match self {
            IncidentSpec::Mode(m, n) => format!("TM{m}{n}"),
            IncidentSpec::Cc => "CC".into(),
            IncidentSpec::Vector(v) => format!("vector[{}]", v.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSpec {
    pub e_min: f64,
    pub e_max: f64,
    pub points: usize,
    pub incident: IncidentSpec,
    pub tls: TlsParams,
    pub coupling: CouplingConfig,
    pub geometry: WaveguideGeometry,
    pub policy: OrderingPolicy,
    pub truncation: LambTruncation,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_min.is_finite() && self.e_max.is_finite() && self.e_min < self.e_max) {
            return Err(Error::InvalidInput(format!(
                "scan needs finite e_min < e_max, got [{}, {}]",
                self.e_min, self.e_max
            )));
        }
        if self.e_min <= 0.0 {
            return Err(Error::InvalidInput("scan energies must be positive".into()));
        }
        if self.points < 2 {
            return Err(Error::InvalidInput(format!(
                "scan needs at least 2 points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    pub fn context(&self) -> SystemContext {
        SystemContext::new(self.geometry, self.coupling, self.policy)
    }

    /// Grid energy `i`; the last point is exactly `e_max`.
    pub fn energy_at(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.e_max
        } else {
            self.e_min + (self.e_max - self.e_min) * i as f64 / (self.points - 1) as f64
        }
    }

    pub fn step(&self) -> f64 {
        (self.e_max - self.e_min) / (self.points - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowValues {
    pub total_r: f64,
    pub total_t: f64,
    pub loss: Option<f64>,
    pub delta: f64,
    pub gamma: f64,
    pub open_count: usize,
}

/// Why a grid point carries no values. `kind` is the library error name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowFlag {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub energy: f64,
    pub values: Option<RowValues>,
    pub flag: Option<RowFlag>,
}

impl SpectrumRow {
    fn flagged(energy: f64, err: &Error) -> Self {
        Self {
            energy,
            values: None,
            flag: Some(RowFlag {
                kind: err.kind().into(),
                message: err.to_string(),
            }),
        }
    }
}

/// A local maximum of `total_R` refined below the grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub grid_index: usize,
    pub grid_energy: f64,
    pub grid_total_r: f64,
    pub energy: f64,
    pub total_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanOutput {
    pub rows: Vec<SpectrumRow>,
    pub peaks: Vec<Peak>,
}

/// Transport at a single energy.
pub fn evaluate(spec: &ScanSpec, ctx: &SystemContext, energy: f64) -> Result<RowValues> {
    let channels = ctx.channel_set(energy)?;
    let incident = match &spec.incident {
        IncidentSpec::Cc => cc_from_channels(&channels),
        IncidentSpec::Mode(m, n) => {
            let index = channels
                .channels
                .iter()
                .position(|c| c.mode.m == *m && c.mode.n == *n);
            match index {
                Some(i) => ChannelVector::basis(energy, channels.len(), i)?,
                None => {
                    let mode = crate::modes::TmMode::new(*m, *n, &spec.geometry)?;
                    return Err(if mode.cutoff >= energy {
                        Error::Evanescent {
                            energy,
                            cutoff: mode.cutoff,
                            m: *m,
                            n: *n,
                        }
                    } else {
                        Error::InvalidInput(format!(
                            "{} is not a channel of the {:?} ordering",
                            mode.label(),
                            spec.policy
                        ))
                    });
                }
            }
        }
        IncidentSpec::Vector(amplitudes) => {
            if amplitudes.len() != channels.len() {
                return Err(Error::DimensionMismatch {
                    expected: channels.len(),
                    got: amplitudes.len(),
                });
            }
            ChannelVector::incident(energy, amplitudes.clone())?
        }
    };
    let se = self_energy(energy, ctx, spec.truncation)?;
    let outcome = scatter_with(&incident, &spec.tls, &channels, &se)?;
    let summary = transport_summary(&outcome, &incident)?;
    Ok(RowValues {
        total_r: summary.total_r,
        total_t: summary.total_t,
        loss: summary.loss_from_incident_channel,
        delta: se.delta,
        gamma: se.gamma,
        open_count: se.open_count,
    })
}

/// Evaluates every grid point. Rows are computed in parallel and returned in
/// grid order; points that cannot be evaluated are kept and flagged.
pub fn scan(spec: &ScanSpec) -> Result<ScanOutput> {
    spec.validate()?;
    let ctx = spec.context();
    let rows: Vec<SpectrumRow> = (0..spec.points)
        .into_par_iter()
        .map(|i| {
            let energy = spec.energy_at(i);
            match evaluate(spec, &ctx, energy) {
                Ok(values) => SpectrumRow {
                    energy,
                    values: Some(values),
                    flag: None,
                },
                Err(err) => SpectrumRow::flagged(energy, &err),
            }
        })
        .collect();
    let peaks = find_peaks(spec, &ctx, &rows);
    Ok(ScanOutput { rows, peaks })
}

fn vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d2 - d1) / (x[2] - x[0]);
    if !(curvature < 0.0) {
        return None;
    }
    Some(0.5 * (x[0] + x[1]) - d1 / (2.0 * curvature))
}

/// Interior local maxima of `total_R` within cutoff-free stretches, each
/// refined by successive parabolic interpolation with exact re-evaluation.
pub fn find_peaks(spec: &ScanSpec, ctx: &SystemContext, rows: &[SpectrumRow]) -> Vec<Peak> {
    let value = |i: usize| rows[i].values.map(|v| (v.total_r, v.open_count));
    let mut peaks = Vec::new();
    for i in 1..rows.len().saturating_sub(1) {
        let (Some((r0, n0)), Some((r1, n1)), Some((r2, n2))) = (value(i - 1), value(i), value(i + 1))
        else {
            continue;
        };
        if n0 != n1 || n1 != n2 || !(r1 > r0 && r1 >= r2) {
            continue;
        }
        let (lo, hi) = (rows[i - 1].energy, rows[i + 1].energy);
        let mut best = (rows[i].energy, r1);
        let mut x = [lo, rows[i].energy, hi];
        let mut y = [r0, r1, r2];
        for _ in 0..PEAK_REFINEMENT_PASSES {
            let Some(candidate) = vertex(x, y) else { break };
            if !(candidate > lo && candidate < hi) || candidate == best.0 {
                break;
            }
            let Ok(values) = evaluate(spec, ctx, candidate) else { break };
            if values.open_count != n1 {
                break;
            }
            // Keep the three best points around the maximum.
            let mut pts = [(x[0], y[0]), (x[1], y[1]), (x[2], y[2]), (candidate, values.total_r)];
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let top = (0..4).max_by(|&a, &b| pts[a].1.total_cmp(&pts[b].1)).unwrap();
            let centre = top.clamp(1, 2);
            x = [pts[centre - 1].0, pts[centre].0, pts[centre + 1].0];
            y = [pts[centre - 1].1, pts[centre].1, pts[centre + 1].1];
            if values.total_r > best.1 {
                best = (candidate, values.total_r);
            }
        }
        peaks.push(Peak {
            grid_index: i,
            grid_energy: rows[i].energy,
            grid_total_r: r1,
            energy: best.0,
            total_r: best.1,
        });
    }
    peaks
}

/// A named curve of a figure preset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledSpec {
    pub label: String,
    pub spec: ScanSpec,
}

pub const PRESET_NAMES: [&str; 9] = [
    "fig4a", "fig4b", "fig5a_tm11", "fig5a_cc", "fig5b_A", "fig5b_B", "fig5b_C", "fig6a", "fig6b",
];

/// Figure groups accepted by [`figure_curves`].
pub const FIGURE_NAMES: [&str; 6] = ["fig4a", "fig4b", "fig5a", "fig5b", "fig6a", "fig6b"];

/// `Ω₁ … Ω₅` of the five-mode figure sequence.
pub fn paper_cutoffs(geom: &WaveguideGeometry) -> [f64; 5] {
    PAPER_FIGURE_MODES.map(|(m, n)| cutoff_frequency(m, n, geom))
}

fn preset_spec(
    range: (f64, f64),
    incident: IncidentSpec,
    omega_a: f64,
    g_squared: f64,
) -> Result<ScanSpec> {
    Ok(ScanSpec {
        e_min: range.0,
        e_max: range.1,
        points: DEFAULT_POINTS,
        incident,
        tls: TlsParams::new(omega_a)?,
        coupling: CouplingConfig::new(g_squared)?,
        geometry: WaveguideGeometry::default(),
        policy: OrderingPolicy::PaperFigure,
        truncation: LambTruncation::OpenChannels,
    })
}

/// Curves of a preset. `fig4a` and `fig4b` give no coupling strength and
/// expand into one labelled curve per entry of [`UNSPECIFIED_G2_SWEEP`].
pub fn figure_preset(name: &str) -> Result<Vec<LabeledSpec>> {
    let o = paper_cutoffs(&WaveguideGeometry::default());
    let tm11 = || IncidentSpec::Mode(1, 1);
    let single = |label: &str, spec: Result<ScanSpec>| -> Result<Vec<LabeledSpec>> {
        Ok(vec![LabeledSpec {
            label: label.into(),
            spec: spec?,
        }])
    };
    let sweep = |prefix: &str, range: (f64, f64), omega_a: f64| -> Result<Vec<LabeledSpec>> {
        UNSPECIFIED_G2_SWEEP
            .iter()
            .map(|&g2| {
                Ok(LabeledSpec {
                    label: format!("{prefix}_g2_{g2}"),
                    spec: preset_spec(range, tm11(), omega_a, g2)?,
                })
            })
            .collect()
    };
    match name {
        "fig4a" => sweep("fig4a", (o[0], o[1]), 0.5 * (o[0] + o[1])),
        "fig4b" => sweep("fig4b", (o[1], o[2]), 0.5 * (o[1] + o[2])),
        "fig5a_tm11" => single(name, preset_spec((o[1], o[2]), tm11(), 0.5 * (o[1] + o[2]), 0.01)),
        "fig5a_cc" => single(name, preset_spec((o[1], o[2]), IncidentSpec::Cc, 0.5 * (o[1] + o[2]), 0.01)),
        "fig5b_A" => single(name, preset_spec((o[1], o[2]), IncidentSpec::Cc, 0.8 * o[1] + 0.2 * o[2], 0.01)),
        "fig5b_B" => single(name, preset_spec((o[1], o[2]), IncidentSpec::Cc, 0.5 * (o[1] + o[2]), 0.01)),
        "fig5b_C" => single(name, preset_spec((o[1], o[2]), IncidentSpec::Cc, 0.5 * (o[1] + o[2]), 0.02)),
        "fig6a" => single(name, preset_spec((o[0], o[4]), IncidentSpec::Cc, 0.5 * (o[0] + o[4]), 0.01)),
        "fig6b" => single(name, preset_spec((o[0], o[4]), IncidentSpec::Cc, 0.5 * (o[1] + o[4]), 0.02)),
        other => Err(Error::UnknownPreset(other.into())),
    }
}

/// All curves of a figure panel, e.g. `fig5a` is the TM₁₁ and CC curves.
pub fn figure_curves(figure: &str) -> Result<Vec<LabeledSpec>> {
    let names: &[&str] = match figure {
        "fig5a" => &["fig5a_tm11", "fig5a_cc"],
        "fig5b" => &["fig5b_A", "fig5b_B", "fig5b_C"],
        other if PRESET_NAMES.contains(&other) => return figure_preset(other),
        other => return Err(Error::UnknownPreset(other.into())),
    };
    let mut curves = Vec::new();
    for name in names {
        curves.extend(figure_preset(name)?);
    }
    Ok(curves)
}
