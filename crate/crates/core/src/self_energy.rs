//! Emitter self-energy `Σ(E) = Δ(E) − iΓ(E)` and the resonance condition
//! `E − ω_a − Δ(E) = 0`.
//!
//! With `|g_{j,k}|² = g²Ω_j²/ω_{j,k}` and the substitution `k = Ω_j sinh t`
//! each mode contributes
//!
//! ```text
//! Δ_j(E) = 2 g² Ω_j² ∫₀^∞ dt / (E − Ω_j cosh t)
//! Γ_j(E) = 2π g² Ω_j² / sqrt(E² − Ω_j²)        (open channels only)
//! ```
//!
//! The `Δ_j` integral is a principal value at `t_p = arcosh(E/Ω_j)` when the
//! channel is open and strictly negative when it is closed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{
    channel_set, check_away_from_cutoffs, enumerate_modes, ChannelSet, CouplingConfig,
    ModeOrdering, OrderingPolicy, TmMode, WaveguideGeometry, CUTOFF_EPSILON,
};
use crate::numerics::{
    integrate_with_breakpoints, pv_integral, try_find_roots, QuadratureResult, Tolerance,
    DEFAULT_REL_TOL, DEFAULT_ROOT_TOL,
};

/// Upper limit of the `t` integral. The neglected tail is below `4e^{-T_MAX}/Ω`.
pub const T_MAX: f64 = 40.0;

/// Resonance scan density, grid points per unit energy.
pub const SCAN_POINTS_PER_UNIT: f64 = 2000.0;

const MIN_SCAN_POINTS: usize = 64;

/// Bare two-level transition frequency `ω_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TlsParams {
    omega_a: f64,
}

impl TlsParams {
    pub fn new(omega_a: f64) -> Result<Self> {
        if !(omega_a.is_finite() && omega_a > 0.0) {
            return Err(Error::InvalidInput(format!(
                "ω_a must be positive and finite, got {omega_a}"
            )));
        }
        Ok(Self { omega_a })
    }

    pub fn omega_a(&self) -> f64 {
        self.omega_a
    }
}

/// Which modes enter the Lamb shift `Δ(E)`.
///
/// The full mode sum diverges, so `Δ` is always truncated. `OpenChannels`
/// keeps the channels propagating at `E`; `Lowest(n)` keeps the first `n`
/// modes of the ordering and must cover every open channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambTruncation {
    #[default]
    OpenChannels,
    Lowest(usize),
}

impl LambTruncation {
    pub fn mode_count(&self, open_count: usize) -> usize {
        match *self {
            LambTruncation::OpenChannels => open_count,
            LambTruncation::Lowest(n) => n,
        }
    }
}

impl std::fmt::Display for LambTruncation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LambTruncation::OpenChannels => write!(f, "open"),
            LambTruncation::Lowest(n) => write!(f, "{n}"),
        }
    }
}

impl std::str::FromStr for LambTruncation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" | "open_channels" => Ok(Self::OpenChannels),
            n => n
                .parse::<usize>()
                .map(Self::Lowest)
                .map_err(|_| Error::InvalidInput(format!("bad Lamb truncation `{s}`"))),
        }
    }
}

/// The waveguide–emitter system without the emitter frequency: geometry,
/// coupling and mode ordering policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemContext {
    pub geometry: WaveguideGeometry,
    pub coupling: CouplingConfig,
    pub policy: OrderingPolicy,
}

impl SystemContext {
    pub fn new(geometry: WaveguideGeometry, coupling: CouplingConfig, policy: OrderingPolicy) -> Self {
        Self {
            geometry,
            coupling,
            policy,
        }
    }

    /// An ordering holding every mode with cutoff up to just above `energy`
    /// and at least `min_modes` modes.
    pub fn ordering_at(&self, energy: f64, min_modes: usize) -> Result<ModeOrdering> {
        match self.policy {
            OrderingPolicy::PaperFigure => {
                let full = enumerate_modes(&self.geometry, f64::INFINITY, self.policy)?;
                if min_modes > full.len() {
                    return Err(Error::TruncationExceedsOrdering {
                        requested: min_modes,
                        available: full.len(),
                    });
                }
                Ok(full)
            }
            OrderingPolicy::Physical => {
                let e_max = energy.max(0.0) * (1.0 + 1e-6) + 1e-6;
                let ordering = enumerate_modes(&self.geometry, e_max, self.policy)?;
                if ordering.len() >= min_modes {
                    Ok(ordering)
                } else {
                    ModeOrdering::lowest(&self.geometry, self.policy, min_modes)
                }
            }
        }
    }

    pub fn channel_set(&self, energy: f64) -> Result<ChannelSet> {
        channel_set(energy, &self.coupling, &self.ordering_at(energy, 0)?)
    }

    /// Number of open channels at `energy`, zero below the lowest cutoff.
    pub fn open_count(&self, energy: f64) -> Result<usize> {
        let ordering = self.ordering_at(energy, 0)?;
        check_away_from_cutoffs(energy, &ordering)?;
        Ok(ordering.modes.iter().filter(|m| m.cutoff < energy).count())
    }

    /// Cutoffs of the ordering lying strictly inside `(lo, hi)`, ascending.
    pub fn cutoffs_between(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let ordering = self.ordering_at(hi, 0)?;
        let mut cutoffs: Vec<f64> = ordering
            .modes
            .iter()
            .map(|m| m.cutoff)
            .filter(|&c| c > lo && c < hi)
            .collect();
        cutoffs.sort_by(f64::total_cmp);
        cutoffs.dedup();
        Ok(cutoffs)
    }
}

/// `∫₀^{T_MAX} dt / (E − Ω cosh t)`; a principal value when `Ω < E`.
pub fn mode_integral(energy: f64, cutoff: f64, rel_tol: f64) -> Result<QuadratureResult> {
    if (energy - cutoff).abs() <= CUTOFF_EPSILON {
        return Err(Error::InvalidInput(format!(
            "mode integral is singular at E = Ω = {cutoff}"
        )));
    }
    if energy > cutoff {
        let k = ((energy - cutoff) * (energy + cutoff)).sqrt();
        let pole = (k / cutoff).asinh();
        if pole >= T_MAX {
            return Err(Error::InvalidInput(format!(
                "E/Ω = {} is beyond the integration range",
                energy / cutoff
            )));
        }
        // E − Ω cosh t = −2Ω sinh((t + t_p)/2) sinh((t − t_p)/2), exact near the pole.
        let kernel = |t: f64| -1.0 / (2.0 * cutoff * (0.5 * (t + pole)).sinh() * (0.5 * (t - pole)).sinh());
        pv_integral(kernel, pole, 0.0, T_MAX, rel_tol)
    } else {
        let gap = energy - cutoff;
        let kernel = |t: f64| {
            let s = (0.5 * t).sinh();
            1.0 / (gap - 2.0 * cutoff * s * s)
        };
        // Peak at t = 0 with width sqrt(2(Ω − E)/Ω).
        let width = (2.0 * (cutoff - energy) / cutoff).sqrt();
        let mut points = vec![0.0];
        let mut edge = width;
        while edge < 0.5 * T_MAX {
            points.push(edge);
            edge *= 4.0;
        }
        points.push(T_MAX);
        integrate_with_breakpoints(&kernel, &points, Tolerance::relative(rel_tol))
    }
}

/// Contribution `Δ_j(E)` of one mode to the Lamb shift.
pub fn mode_delta(energy: f64, mode: &TmMode, coupling: &CouplingConfig) -> Result<f64> {
    let integral = mode_integral(energy, mode.cutoff, DEFAULT_REL_TOL)?;
    Ok(2.0 * coupling.g_squared() * mode.cutoff * mode.cutoff * integral.value)
}

/// Contribution `2π g² Ω_j² / k_j` of one open channel to `Γ(E)`.
pub fn mode_gamma(energy: f64, mode: &TmMode, coupling: &CouplingConfig) -> f64 {
    let k = ((energy - mode.cutoff) * (energy + mode.cutoff)).sqrt();
    2.0 * PI * coupling.g_squared() * mode.cutoff * mode.cutoff / k
}

/// Decay rate `Γ(E)`: zero below the lowest cutoff.
pub fn gamma(energy: f64, ctx: &SystemContext) -> Result<f64> {
    let ordering = ctx.ordering_at(energy, 0)?;
    check_away_from_cutoffs(energy, &ordering)?;
    Ok(ordering
        .modes
        .iter()
        .filter(|m| m.cutoff < energy)
        .map(|m| mode_gamma(energy, m, &ctx.coupling))
        .sum())
}

/// `2π Σ_j ρ_j g_{j,k_j}²` over the open channels; equal to `Γ(E)`.
pub fn gamma_from_channels(channels: &ChannelSet) -> f64 {
    2.0 * PI
        * channels
            .channels
            .iter()
            .map(|c| c.rho * c.g_onshell * c.g_onshell)
            .sum::<f64>()
}

/// Lamb shift `Δ(E)` truncated to the lowest `n_modes_lamb` modes of the ordering.
pub fn delta(energy: f64, ctx: &SystemContext, n_modes_lamb: usize) -> Result<f64> {
    let ordering = ctx.ordering_at(energy, n_modes_lamb)?;
    check_away_from_cutoffs(energy, &ordering)?;
    let open = ordering.modes.iter().filter(|m| m.cutoff < energy).count();
    if n_modes_lamb < open {
        return Err(Error::TruncationTooSmall {
            requested: n_modes_lamb,
            open,
        });
    }
    ordering.modes[..n_modes_lamb]
        .iter()
        .map(|mode| mode_delta(energy, mode, &ctx.coupling))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfEnergyValue {
    pub energy: f64,
    pub delta: f64,
    pub gamma: f64,
    /// Number of modes summed in `delta`.
    pub modes_used: usize,
    pub open_count: usize,
}

impl SelfEnergyValue {
    /// `E − ω_a − Δ(E) + iΓ(E)` split into real and imaginary parts.
    pub fn denominator(&self, tls: &TlsParams) -> (f64, f64) {
        (self.energy - tls.omega_a - self.delta, self.gamma)
    }
}

pub fn self_energy(
    energy: f64,
    ctx: &SystemContext,
    truncation: LambTruncation,
) -> Result<SelfEnergyValue> {
    let open_count = ctx.open_count(energy)?;
    let modes_used = truncation.mode_count(open_count);
    Ok(SelfEnergyValue {
        energy,
        delta: delta(energy, ctx, modes_used)?,
        gamma: gamma(energy, ctx)?,
        modes_used,
        open_count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceResult {
    /// Roots of `E − ω_a − Δ(E)`, ascending.
    pub roots: Vec<f64>,
    pub interval: (f64, f64),
    /// `ω_A = ω_a + Δ(ω_a)`; `None` when `ω_a` sits on a cutoff.
    pub weak_coupling_estimate: Option<f64>,
    pub truncation: LambTruncation,
}

/// Solves `E − ω_a − Δ(E) = 0` on `(lo, hi)`, splitting the scan at every
/// cutoff and keeping clear of the excluded neighbourhoods.
pub fn resonance_energies(
    lo: f64,
    hi: f64,
    tls: &TlsParams,
    ctx: &SystemContext,
    truncation: LambTruncation,
) -> Result<ResonanceResult> {
    if !(lo < hi) || !(lo > 0.0) {
        return Err(Error::InvalidInput(format!(
            "resonance interval must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let margin = 2.0 * CUTOFF_EPSILON;
    let mut edges = vec![lo];
    edges.extend(ctx.cutoffs_between(lo, hi)?);
    edges.push(hi);
    let all_cutoffs = ctx.cutoffs_between(lo - 1.0, hi + 1.0)?;
    let near_cutoff = |x: f64| all_cutoffs.iter().any(|c| (x - c).abs() <= margin);

    let detuning = |e: f64| -> Result<f64> {
        let value = self_energy(e, ctx, truncation)?;
        Ok(e - tls.omega_a - value.delta)
    };

    let mut roots = Vec::new();
    for pair in edges.windows(2) {
        let (mut a, mut b) = (pair[0], pair[1]);
        if near_cutoff(a) {
            a += margin;
        }
        if near_cutoff(b) {
            b -= margin;
        }
        if !(a < b) {
            continue;
        }
        let points = ((b - a) * SCAN_POINTS_PER_UNIT).ceil() as usize;
        roots.extend(try_find_roots(
            detuning,
            a,
            b,
            points.max(MIN_SCAN_POINTS),
            DEFAULT_ROOT_TOL,
        )?);
    }
    roots.sort_by(f64::total_cmp);

    let weak_coupling_estimate = self_energy(tls.omega_a, ctx, truncation)
        .ok()
        .map(|v| tls.omega_a + v.delta);
    Ok(ResonanceResult {
        roots,
        interval: (lo, hi),
        weak_coupling_estimate,
        truncation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(g2: f64, policy: OrderingPolicy) -> SystemContext {
        SystemContext::new(
            WaveguideGeometry::default(),
            CouplingConfig::new(g2).unwrap(),
            policy,
        )
    }

    // Closed forms of the per-mode integral, used as a third route.
    fn integral_closed_form(e: f64, omega: f64) -> f64 {
        if e > omega {
            let k = (e * e - omega * omega).sqrt();
            (k / omega).asinh() / k
        } else {
            let q = (omega * omega - e * e).sqrt();
            -2.0 / q * ((omega + e) / (omega - e)).sqrt().atan()
        }
    }

    #[test]
    fn mode_integral_matches_closed_form() {
        for &(e, omega) in &[
            (3.0, 5f64.sqrt()),
            (3.0, 13f64.sqrt()),
            (2.3, 5f64.sqrt()),
            (7.0, 37f64.sqrt()),
            (5.0, 61f64.sqrt()),
            (20.0, 5f64.sqrt()),
            (5f64.sqrt() + 1e-7, 5f64.sqrt()),
            (13f64.sqrt() - 1e-7, 13f64.sqrt()),
        ] {
            let got = mode_integral(e, omega, 1e-10).unwrap().value;
            let want = integral_closed_form(e, omega);
            assert!(
                ((got - want) / want).abs() < 1e-9,
                "E={e} Ω={omega}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn gamma_single_channel() {
        let c = ctx(0.01, OrderingPolicy::Physical);
        let g = gamma(3.0, &c).unwrap();
        assert!((g - 2.0 * PI * 0.01 * 5.0 / 2.0).abs() < 1e-15);
        assert!((g - 0.157080).abs() < 1e-6);
        assert_eq!(gamma(2.0, &c).unwrap(), 0.0);
    }

    #[test]
    fn gamma_matches_channel_identity() {
        let c = ctx(0.013, OrderingPolicy::Physical);
        for e in [2.5, 3.9, 5.2, 6.0, 7.1, 9.0, 11.3] {
            let direct = gamma(e, &c).unwrap();
            let via = gamma_from_channels(&c.channel_set(e).unwrap());
            assert!(((direct - via) / direct).abs() < 1e-13, "E={e}");
        }
    }

    #[test]
    fn gamma_rejects_cutoff() {
        let c = ctx(0.01, OrderingPolicy::Physical);
        assert!(matches!(
            gamma(5f64.sqrt(), &c),
            Err(Error::CutoffSingularity { .. })
        ));
    }

    #[test]
    fn gamma_diverges_at_threshold() {
        let c = ctx(0.01, OrderingPolicy::Physical);
        let omega1 = 5f64.sqrt();
        assert!(gamma(omega1 * (1.0 + 1e-6), &c).unwrap() >= 10.0);
        let (x1, x2) = (1e-8, 1e-4);
        let slope = (gamma(omega1 + x2, &c).unwrap().ln() - gamma(omega1 + x1, &c).unwrap().ln())
            / (x2.ln() - x1.ln());
        assert!((slope + 0.5).abs() < 0.01, "slope {slope}");
    }

    #[test]
    fn delta_closed_channels_are_negative() {
        let c = ctx(0.01, OrderingPolicy::Physical);
        let value = self_energy(2.0, &c, LambTruncation::Lowest(5)).unwrap();
        assert_eq!(value.gamma, 0.0);
        assert_eq!(value.open_count, 0);
        assert!(value.delta < 0.0);
    }

    #[test]
    fn open_count_at_five() {
        let c = ctx(0.01, OrderingPolicy::Physical);
        let value = self_energy(5.0, &c, LambTruncation::Lowest(5)).unwrap();
        assert_eq!(value.open_count, 2);
        assert_eq!(value.modes_used, 5);
    }

    #[test]
    fn truncation_too_small() {
        let c = ctx(0.01, OrderingPolicy::Physical);
        assert!(matches!(
            delta(5.0, &c, 1),
            Err(Error::TruncationTooSmall { requested: 1, open: 2 })
        ));
        let five_mode = ctx(0.01, OrderingPolicy::PaperFigure);
        assert!(matches!(
            delta(5.0, &five_mode, 6),
            Err(Error::TruncationExceedsOrdering { .. })
        ));
    }

    #[test]
    fn open_truncation_is_energy_dependent() {
        let c = ctx(0.01, OrderingPolicy::PaperFigure);
        let v = self_energy(4.0, &c, LambTruncation::OpenChannels).unwrap();
        assert_eq!(v.modes_used, 2);
        assert!(v.delta > 0.0);
        let below = self_energy(2.0, &c, LambTruncation::OpenChannels).unwrap();
        assert_eq!(below.delta, 0.0);
    }

    #[test]
    fn adding_closed_mode_lowers_delta() {
        let c = ctx(0.01, OrderingPolicy::Physical);
        let mut previous = delta(5.0, &c, 2).unwrap();
        for n in 3..9 {
            let next = delta(5.0, &c, n).unwrap();
            assert!(next < previous, "n={n}");
            previous = next;
        }
    }

    #[test]
    fn pure_and_bit_identical() {
        let c = ctx(0.02, OrderingPolicy::PaperFigure);
        let a = self_energy(4.4, &c, LambTruncation::Lowest(5)).unwrap();
        let b = self_energy(4.4, &c, LambTruncation::Lowest(5)).unwrap();
        assert_eq!(a.delta.to_bits(), b.delta.to_bits());
        assert_eq!(a.gamma.to_bits(), b.gamma.to_bits());
    }

    #[test]
    fn single_channel_blue_shift() {
        let c = ctx(0.01, OrderingPolicy::PaperFigure);
        let (o1, o2) = (5f64.sqrt(), 13f64.sqrt());
        let tls = TlsParams::new(0.5 * (o1 + o2)).unwrap();
        let res = resonance_energies(o1, o2, &tls, &c, LambTruncation::OpenChannels).unwrap();
        assert_eq!(res.roots.len(), 1);
        assert!(res.roots[0] > tls.omega_a());
        let f = res.roots[0] - tls.omega_a()
            - delta(res.roots[0], &c, 1).unwrap();
        assert!(f.abs() <= 1e-10);
    }

    #[test]
    fn detuning_rises_below_each_cutoff() {
        // With closed modes in the sum, Δ → −∞ just below every cutoff.
        let c = ctx(0.01, OrderingPolicy::PaperFigure);
        let tls = TlsParams::new(4.0).unwrap();
        for omega in [13f64.sqrt(), 37f64.sqrt(), 45f64.sqrt()] {
            let f = |e: f64| e - tls.omega_a() - delta(e, &c, 5).unwrap();
            assert!(f(omega - 1e-8) > f(omega - 1e-4));
            assert!(f(omega - 1e-8) > 0.0);
        }
    }
}
