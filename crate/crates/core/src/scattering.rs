//! On-shell single-photon scattering over the open channels at energy `E`.
//!
//! The emitter couples only to the controllable channel (CC), the unit vector
//! along `g_j sqrt(ρ_j)`. Any incident vector is scattered by the rank-one map
//!
//! ```text
//! Φ^(L) = −iΓ/D · ⟨cc, φ_in⟩ cc,      Φ^(R) = φ_in + Φ^(L),
//! D(E) = E − ω_a − Δ(E) + iΓ(E),
//! ```
//!
//! which uses `Γ(E) = 2π Σ_j ρ_j g_j²`. Vectors orthogonal to the CC (the
//! scattering-free channels) pass through untouched.
//!
//! Phase convention: couplings are real and the CC has a positive first
//! entry. Only `|u_e|²` is observable.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modes::{wavenumber_at_energy, ChannelSet, TmMode};
use crate::self_energy::{self_energy, LambTruncation, SelfEnergyValue, SystemContext, TlsParams};

/// Amplitudes over the open channels at one energy, in ordering order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelVector {
    pub energy: f64,
    pub amplitudes: Vec<Complex64>,
}

impl ChannelVector {
    pub fn new(energy: f64, amplitudes: Vec<Complex64>) -> Self {
        Self { energy, amplitudes }
    }

    pub fn from_real(energy: f64, amplitudes: &[f64]) -> Self {
        Self::new(energy, amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// A normalized incident vector.
    pub fn incident(energy: f64, amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm_sqr(&amplitudes).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput(format!(
                "incident vector must have a finite nonzero norm, got {norm}"
            )));
        }
        Ok(Self::new(energy, amplitudes.into_iter().map(|a| a / norm).collect()))
    }

    /// Unit vector in channel `index` out of `len` open channels.
    pub fn basis(energy: f64, len: usize, index: usize) -> Result<Self> {
        if index >= len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: index + 1,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self::new(energy, amplitudes))
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &ChannelVector) -> Result<Complex64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scaled(&self, factor: Complex64) -> ChannelVector {
        ChannelVector::new(self.energy, self.amplitudes.iter().map(|a| a * factor).collect())
    }
}

fn norm_sqr(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

/// Unit CC vector plus an orthonormal basis of the scattering-free subspace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelDecomposition {
    pub cc: ChannelVector,
    pub sfc_basis: Vec<ChannelVector>,
}

fn cc_components(channels: &ChannelSet) -> Vec<f64> {
    let mut weights = channels.weighted_couplings();
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    let sign = if weights[0] < 0.0 { -1.0 } else { 1.0 };
    for w in &mut weights {
        *w *= sign / norm;
    }
    weights
}

// Columns 2..n of the Householder reflection taking e₁ onto `cc`.
fn sfc_components(cc: &[f64]) -> Vec<Vec<f64>> {
    let n = cc.len();
    let tail: f64 = cc[1..].iter().map(|c| c * c).sum();
    if tail == 0.0 {
        return (1..n)
            .map(|i| (0..n).map(|r| if r == i { 1.0 } else { 0.0 }).collect())
            .collect();
    }
    // v = cc − e₁ with v₀ = −tail/(1 + cc₀), free of cancellation.
    let mut v = cc.to_vec();
    v[0] = -tail / (1.0 + cc[0]);
    let v_norm_sqr = v[0] * v[0] + tail;
    (1..n)
        .map(|col| {
            let scale = 2.0 * v[col] / v_norm_sqr;
            let mut column: Vec<f64> = (0..n)
                .map(|row| if row == col { 1.0 } else { 0.0 } - scale * v[row])
                .collect();
            if let Some(first) = column.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    column.iter_mut().for_each(|x| *x = -*x);
                }
            }
            column
        })
        .collect()
}

pub fn cc_from_channels(channels: &ChannelSet) -> ChannelVector {
    ChannelVector::from_real(channels.energy, &cc_components(channels))
}

/// The controllable channel at `energy`.
pub fn cc_vector(energy: f64, ctx: &SystemContext) -> Result<ChannelVector> {
    Ok(cc_from_channels(&ctx.channel_set(energy)?))
}

/// Orthonormal basis of the complement of the CC; empty with one open channel.
pub fn sfc_basis(energy: f64, ctx: &SystemContext) -> Result<Vec<ChannelVector>> {
    Ok(decomposition(energy, ctx)?.sfc_basis)
}

pub fn decomposition(energy: f64, ctx: &SystemContext) -> Result<ChannelDecomposition> {
    let channels = ctx.channel_set(energy)?;
    let cc = cc_components(&channels);
    let sfc_basis = sfc_components(&cc)
        .iter()
        .map(|column| ChannelVector::from_real(energy, column))
        .collect();
    Ok(ChannelDecomposition {
        cc: ChannelVector::from_real(energy, &cc),
        sfc_basis,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterOutcome {
    /// Right-going (transmitted) amplitudes `Φ^(R)`.
    pub phi_right: ChannelVector,
    /// Left-going (reflected) amplitudes `Φ^(L)`.
    pub phi_left: ChannelVector,
    /// Emitter excitation amplitude `⟨cc, φ_in⟩ sqrt(Γ/2π) / D`.
    pub u_e: Complex64,
    pub self_energy: SelfEnergyValue,
}

/// `D(E) = E − ω_a − Δ(E) + iΓ(E)`.
pub fn resonance_denominator(se: &SelfEnergyValue, tls: &TlsParams) -> Complex64 {
    let (re, im) = se.denominator(tls);
    Complex64::new(re, im)
}

/// The rank-one scattering map for precomputed channels and self-energy.
pub fn scatter_with(
    incident: &ChannelVector,
    tls: &TlsParams,
    channels: &ChannelSet,
    se: &SelfEnergyValue,
) -> Result<ScatterOutcome> {
    if incident.len() != channels.len() {
        return Err(Error::DimensionMismatch {
            expected: channels.len(),
            got: incident.len(),
        });
    }
    let cc = cc_from_channels(channels);
    let overlap = cc.inner(incident)?;
    let d = resonance_denominator(se, tls);
    let reflection = Complex64::new(0.0, -se.gamma) / d;
    let phi_left = cc.scaled(reflection * overlap);
    let phi_right = ChannelVector::new(
        incident.energy,
        incident
            .amplitudes
            .iter()
            .zip(&phi_left.amplitudes)
            .map(|(a, l)| a + l)
            .collect(),
    );
    let u_e = overlap * (se.gamma / (2.0 * PI)).sqrt() / d;
    Ok(ScatterOutcome {
        phi_right,
        phi_left,
        u_e,
        self_energy: *se,
    })
}

/// Scatters `incident` (amplitudes over the open channels at its energy).
pub fn scatter(
    incident: &ChannelVector,
    tls: &TlsParams,
    ctx: &SystemContext,
    truncation: LambTruncation,
) -> Result<ScatterOutcome> {
    let channels = ctx.channel_set(incident.energy)?;
    if incident.len() != channels.len() {
        return Err(Error::DimensionMismatch {
            expected: channels.len(),
            got: incident.len(),
        });
    }
    let se = self_energy(incident.energy, ctx, truncation)?;
    scatter_with(incident, tls, &channels, &se)
}

/// Reflection amplitude `r = −iΓ/D` in the single-channel window `(Ω₁, Ω₂)`.
pub fn single_mode_reflection(
    energy: f64,
    tls: &TlsParams,
    ctx: &SystemContext,
    truncation: LambTruncation,
) -> Result<Complex64> {
    let ordering = ctx.ordering_at(energy, 2)?;
    let (lo, hi) = (ordering.modes[0].cutoff, ordering.modes[1].cutoff);
    if !(energy > lo && energy < hi) {
        return Err(Error::OutOfSingleChannelWindow { energy, lo, hi });
    }
    let outcome = scatter(&ChannelVector::from_real(energy, &[1.0]), tls, ctx, truncation)?;
    Ok(outcome.phi_left.amplitudes[0])
}

/// Propagation direction of an outgoing wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// On-shell S-matrix element from channel `mode_in` into `mode_out` going
/// in `direction`:
/// `δ_{j'j} δ_{dir,+} − 2πi sqrt(ρ_{j'} ρ_j) g_{j'} g_j / D(E)`.
pub fn s_matrix_element(
    mode_out: (u32, u32),
    direction: Direction,
    mode_in: (u32, u32),
    energy: f64,
    tls: &TlsParams,
    ctx: &SystemContext,
    truncation: LambTruncation,
) -> Result<Complex64> {
    let channels = ctx.channel_set(energy)?;
    let locate = |(m, n): (u32, u32)| -> Result<usize> {
        if let Some(i) = channels.channels.iter().position(|c| c.mode.m == m && c.mode.n == n) {
            return Ok(i);
        }
        let mode = TmMode::new(m, n, &ctx.geometry)?;
        if !mode.is_coupled() {
            return Err(Error::InvalidInput(format!("{} does not couple to the emitter", mode.label())));
        }
        wavenumber_at_energy(&mode, energy)?;
        Err(Error::InvalidInput(format!(
            "{} is not part of the {:?} ordering",
            mode.label(),
            ctx.policy
        )))
    };
    let j_out = locate(mode_out)?;
    let j_in = locate(mode_in)?;
    let se = self_energy(energy, ctx, truncation)?;
    let weights = channels.weighted_couplings();
    let d = resonance_denominator(&se, tls);
    let scattered = Complex64::new(0.0, -2.0 * PI * (weights[j_out] * weights[j_in])) / d;
    let direct = if j_out == j_in && direction == Direction::Forward {
        1.0
    } else {
        0.0
    };
    Ok(scattered + direct)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelTransport {
    pub reflectance: f64,
    pub transmittance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportSummary {
    pub per_channel: Vec<ChannelTransport>,
    pub total_r: f64,
    pub total_t: f64,
    /// `1 − R_i − T_i` when the photon enters in the single channel `i`.
    pub loss_from_incident_channel: Option<f64>,
}

pub fn transport_summary(outcome: &ScatterOutcome, incident: &ChannelVector) -> Result<TransportSummary> {
    let n = incident.len();
    for got in [outcome.phi_left.len(), outcome.phi_right.len()] {
        if got != n {
            return Err(Error::DimensionMismatch { expected: n, got });
        }
    }
    if outcome.phi_left.energy != incident.energy {
        return Err(Error::InvalidInput(format!(
            "outcome at E = {} does not match incident E = {}",
            outcome.phi_left.energy, incident.energy
        )));
    }
    let per_channel: Vec<ChannelTransport> = outcome
        .phi_left
        .amplitudes
        .iter()
        .zip(&outcome.phi_right.amplitudes)
        .map(|(l, r)| ChannelTransport {
            reflectance: l.norm_sqr(),
            transmittance: r.norm_sqr(),
        })
        .collect();
    let mut occupied = incident
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0);
    let loss_from_incident_channel = match (occupied.next(), occupied.next()) {
        (Some((i, _)), None) => {
            Some(1.0 - per_channel[i].reflectance - per_channel[i].transmittance)
        }
        _ => None,
    };
    Ok(TransportSummary {
        total_r: per_channel.iter().map(|c| c.reflectance).sum(),
        total_t: per_channel.iter().map(|c| c.transmittance).sum(),
        per_channel,
        loss_from_incident_channel,
    })
}
