//! Rectangular-waveguide TM modes: cutoffs, ordering, dispersion and the
//! mode-resolved dipole coupling of an emitter at the cross-section centre.
//!
//! Energies are dimensionless multiples of `π/a` (with `ħ = c = 1`), so the
//! cutoff of TM_mn is `sqrt(m² + (a/b)² n²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Energies closer than this to a cutoff are rejected by the scattering
/// operations: `Γ(E)` diverges there.
pub const CUTOFF_EPSILON: f64 = 1e-9;

/// `(m, n)` pairs of the five-mode sequence used by the published spectra.
pub const PAPER_FIGURE_MODES: [(u32, u32); 5] = [(1, 1), (3, 1), (1, 3), (3, 3), (5, 3)];

/// Cross-section of the guide, described by its aspect ratio `a/b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideGeometry {
    aspect_ratio: f64,
}

impl WaveguideGeometry {
    pub fn new(aspect_ratio: f64) -> Result<Self> {
        if !(aspect_ratio.is_finite() && aspect_ratio > 0.0) {
            return Err(Error::InvalidInput(format!(
                "aspect ratio must be positive and finite, got {aspect_ratio}"
            )));
        }
        Ok(Self { aspect_ratio })
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.aspect_ratio
    }
}

impl Default for WaveguideGeometry {
    /// `a = 2b`.
    fn default() -> Self {
        Self { aspect_ratio: 2.0 }
    }
}

/// `sin(mπ/2)·sin(nπ/2)`, evaluated exactly on the integers.
pub fn mode_sign(m: u32, n: u32) -> i32 {
    let half_sine = |k: u32| -> i32 {
        match k % 4 {
            1 => 1,
            3 => -1,
            _ => 0,
        }
    };
    half_sine(m) * half_sine(n)
}

/// Cutoff `Ω_mn` in units of `π/a`.
pub fn cutoff_frequency(m: u32, n: u32, geom: &WaveguideGeometry) -> f64 {
    cutoff_squared(m, n, geom).sqrt()
}

fn cutoff_squared(m: u32, n: u32, geom: &WaveguideGeometry) -> f64 {
    let (m, n) = (f64::from(m), f64::from(n));
    let r = geom.aspect_ratio;
    m * m + r * r * n * n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TmMode {
    pub m: u32,
    pub n: u32,
    pub cutoff: f64,
    /// Coupling sign `sin(mπ/2)·sin(nπ/2)`; zero for any even index.
    pub sign: i32,
}

impl TmMode {
    pub fn new(m: u32, n: u32, geom: &WaveguideGeometry) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput(format!(
                "mode indices must be positive, got ({m}, {n})"
            )));
        }
        Ok(Self {
            m,
            n,
            cutoff: cutoff_frequency(m, n, geom),
            sign: mode_sign(m, n),
        })
    }

    pub fn is_coupled(&self) -> bool {
        self.sign != 0
    }

    pub fn label(&self) -> String {
        format!("TM{}{}", self.m, self.n)
    }
}

/// `sqrt(E² − Ω²)`: inverse of the dispersion `ω = sqrt(Ω² + k²)`.
pub fn wavenumber_at_energy(mode: &TmMode, energy: f64) -> Result<f64> {
    if !(energy > mode.cutoff) {
        return Err(Error::Evanescent {
            energy,
            cutoff: mode.cutoff,
            m: mode.m,
            n: mode.n,
        });
    }
    Ok(((energy - mode.cutoff) * (energy + mode.cutoff)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingPolicy {
    /// Every coupled (odd, odd) mode by ascending cutoff, ties broken by `(m, n)`.
    Physical,
    /// The fixed five-mode list behind the published figures.
    PaperFigure,
}

impl std::str::FromStr for OrderingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "physical" => Ok(Self::Physical),
            "paper_figure" | "paper-figure" => Ok(Self::PaperFigure),
            other => Err(Error::InvalidInput(format!("unknown ordering policy `{other}`"))),
        }
    }
}

/// Ordered list of coupled modes; index `j` in this list is the channel number.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOrdering {
    pub policy: OrderingPolicy,
    pub modes: Vec<TmMode>,
    /// Every mode of the policy with cutoff strictly below this value is present.
    pub coverage: f64,
}

impl ModeOrdering {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// The first `count` modes of the policy.
    pub fn lowest(geom: &WaveguideGeometry, policy: OrderingPolicy, count: usize) -> Result<Self> {
        match policy {
            OrderingPolicy::PaperFigure => {
                if count > PAPER_FIGURE_MODES.len() {
                    return Err(Error::TruncationExceedsOrdering {
                        requested: count,
                        available: PAPER_FIGURE_MODES.len(),
                    });
                }
                let mut ordering = enumerate_modes(geom, f64::INFINITY, policy)?;
                ordering.coverage = if count == ordering.len() {
                    f64::INFINITY
                } else {
                    ordering.modes[count].cutoff
                };
                ordering.modes.truncate(count);
                Ok(ordering)
            }
            OrderingPolicy::Physical => {
                let mut e_max = 2.0 * cutoff_frequency(1, 1, geom);
                loop {
                    let mut ordering = enumerate_modes(geom, e_max, policy)?;
                    if ordering.len() > count {
                        ordering.coverage = ordering.modes[count].cutoff;
                        ordering.modes.truncate(count);
                        return Ok(ordering);
                    }
                    e_max *= 2.0;
                }
            }
        }
    }
}

/// Coupled modes with cutoff `<= e_max` under `policy`.
pub fn enumerate_modes(
    geom: &WaveguideGeometry,
    e_max: f64,
    policy: OrderingPolicy,
) -> Result<ModeOrdering> {
    if !(e_max > 0.0) {
        return Err(Error::InvalidInput(format!("e_max must be positive, got {e_max}")));
    }
    let modes = match policy {
        OrderingPolicy::PaperFigure => PAPER_FIGURE_MODES
            .iter()
            .map(|&(m, n)| TmMode::new(m, n, geom))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|mode| mode.cutoff <= e_max)
            .collect(),
        OrderingPolicy::Physical => {
            let r = geom.aspect_ratio;
            let e2 = e_max * e_max;
            let mut found = Vec::new();
            let mut n = 1u32;
            while r * r * f64::from(n * n) + 1.0 <= e2 {
                let mut m = 1u32;
                while cutoff_squared(m, n, geom) <= e2 {
                    found.push((cutoff_squared(m, n, geom), m, n));
                    m += 2;
                }
                n += 2;
            }
            found.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
            found
                .into_iter()
                .map(|(_, m, n)| TmMode::new(m, n, geom))
                .collect::<Result<Vec<_>>>()?
        }
    };
    let coverage = match policy {
        OrderingPolicy::PaperFigure if modes.len() == PAPER_FIGURE_MODES.len() => f64::INFINITY,
        _ => e_max,
    };
    Ok(ModeOrdering {
        policy,
        modes,
        coverage,
    })
}

/// Dipole coupling constant `g²` (dimensionless).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    g_squared: f64,
}

impl CouplingConfig {
    pub fn new(g_squared: f64) -> Result<Self> {
        if !(g_squared.is_finite() && g_squared > 0.0) {
            return Err(Error::InvalidInput(format!(
                "g² must be positive and finite, got {g_squared}"
            )));
        }
        Ok(Self { g_squared })
    }

    /// `g = d / sqrt(π A)` from a real dipole element and the cross-section area.
    pub fn from_dipole(dipole: f64, area: f64) -> Result<Self> {
        if !(area > 0.0) {
            return Err(Error::InvalidInput(format!("area must be positive, got {area}")));
        }
        Self::new(dipole * dipole / (std::f64::consts::PI * area))
    }

    pub fn g_squared(&self) -> f64 {
        self.g_squared
    }

    pub fn g(&self) -> f64 {
        self.g_squared.sqrt()
    }

    /// `g_{j,k} = −g Ω_j sign_j / sqrt(ω_{j,k})` evaluated at `ω = energy`.
    pub fn mode_coupling(&self, mode: &TmMode, energy: f64) -> f64 {
        -self.g() * mode.cutoff * f64::from(mode.sign) / energy.sqrt()
    }
}

/// An open channel at a fixed energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Channel {
    pub mode: TmMode,
    /// Longitudinal wavenumber `k_j = sqrt(E² − Ω_j²)`.
    pub k: f64,
    /// One-dimensional density-of-states weight `ρ_j = E / k_j`.
    pub rho: f64,
    /// On-shell coupling `g_{j,k_j}`.
    pub g_onshell: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSet {
    pub energy: f64,
    pub channels: Vec<Channel>,
}

impl ChannelSet {
    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// The vector `g_j sqrt(ρ_j)` over the open channels.
    pub fn weighted_couplings(&self) -> Vec<f64> {
        self.channels.iter().map(|c| c.g_onshell * c.rho.sqrt()).collect()
    }
}

/// Rejects energies within [`CUTOFF_EPSILON`] of any cutoff in `ordering`.
pub fn check_away_from_cutoffs(energy: f64, ordering: &ModeOrdering) -> Result<()> {
    match ordering
        .modes
        .iter()
        .find(|mode| (energy - mode.cutoff).abs() <= CUTOFF_EPSILON)
    {
        Some(mode) => Err(Error::CutoffSingularity {
            energy,
            cutoff: mode.cutoff,
            m: mode.m,
            n: mode.n,
            epsilon: CUTOFF_EPSILON,
        }),
        None => Ok(()),
    }
}

/// Open channels at `energy` under `ordering`.
pub fn channel_set(
    energy: f64,
    coupling: &CouplingConfig,
    ordering: &ModeOrdering,
) -> Result<ChannelSet> {
    if !energy.is_finite() || energy <= 0.0 {
        return Err(Error::InvalidInput(format!("energy must be positive, got {energy}")));
    }
    if energy + CUTOFF_EPSILON >= ordering.coverage {
        return Err(Error::InvalidInput(format!(
            "mode ordering only covers cutoffs below {}, E = {energy}",
            ordering.coverage
        )));
    }
    check_away_from_cutoffs(energy, ordering)?;
    let channels = ordering
        .modes
        .iter()
        .filter(|mode| mode.cutoff < energy)
        .map(|mode| {
            let k = wavenumber_at_energy(mode, energy)?;
            Ok(Channel {
                mode: *mode,
                k,
                rho: energy / k,
                g_onshell: coupling.mode_coupling(mode, energy),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if channels.is_empty() {
        return Err(Error::NoOpenChannel {
            energy,
            lowest_cutoff: ordering.modes.first().map_or(f64::NAN, |m| m.cutoff),
        });
    }
    Ok(ChannelSet { energy, channels })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> WaveguideGeometry {
        WaveguideGeometry::default()
    }

    #[test]
    fn cutoffs_match_published_values() {
        assert!((cutoff_frequency(1, 1, &geom()) - 2.23607).abs() < 5e-6);
        assert!((cutoff_frequency(3, 1, &geom()) - 3.60555).abs() < 5e-6);
        assert!((cutoff_frequency(5, 1, &geom()) - 29f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sign_agrees_with_sines() {
        for m in 1..20 {
            for n in 1..20 {
                let direct = (f64::from(m) * std::f64::consts::FRAC_PI_2).sin()
                    * (f64::from(n) * std::f64::consts::FRAC_PI_2).sin();
                assert!((f64::from(mode_sign(m, n)) - direct).abs() < 1e-9, "({m},{n})");
                if m % 2 == 1 && n % 2 == 1 {
                    let expected = if ((m - 1) / 2 + (n - 1) / 2) % 2 == 0 { 1 } else { -1 };
                    assert_eq!(mode_sign(m, n), expected);
                }
            }
        }
    }

    #[test]
    fn physical_enumeration_to_seven() {
        let ordering = enumerate_modes(&geom(), 7.0, OrderingPolicy::Physical).unwrap();
        let mn: Vec<_> = ordering.modes.iter().map(|m| (m.m, m.n)).collect();
        assert_eq!(mn, vec![(1, 1), (3, 1), (5, 1), (1, 3), (3, 3)]);
        let expected = [5f64, 13.0, 29.0, 37.0, 45.0].map(f64::sqrt);
        for (mode, want) in ordering.modes.iter().zip(expected) {
            assert!((mode.cutoff - want).abs() < 1e-14);
        }
    }

    #[test]
    fn paper_figure_enumeration() {
        let ordering = enumerate_modes(&geom(), 8.0, OrderingPolicy::PaperFigure).unwrap();
        let mn: Vec<_> = ordering.modes.iter().map(|m| (m.m, m.n)).collect();
        assert_eq!(mn, PAPER_FIGURE_MODES.to_vec());
        let short = enumerate_modes(&geom(), 4.0, OrderingPolicy::PaperFigure).unwrap();
        assert_eq!(short.len(), 2);
    }

    #[test]
    fn degenerate_cutoffs_break_ties_lexicographically() {
        let ordering = enumerate_modes(&geom(), 9.3, OrderingPolicy::Physical).unwrap();
        let pos = |m, n| ordering.modes.iter().position(|x| x.m == m && x.n == n).unwrap();
        assert!(pos(7, 3) < pos(9, 1));
        assert_eq!(pos(7, 3) + 1, pos(9, 1));
        assert_eq!(ordering.modes[pos(7, 3)].cutoff, ordering.modes[pos(9, 1)].cutoff);
    }

    #[test]
    fn empty_enumeration_below_first_cutoff() {
        let ordering = enumerate_modes(&geom(), 2.0, OrderingPolicy::Physical).unwrap();
        assert!(ordering.is_empty());
    }

    #[test]
    fn lowest_modes() {
        let physical = ModeOrdering::lowest(&geom(), OrderingPolicy::Physical, 6).unwrap();
        assert_eq!(physical.len(), 6);
        assert_eq!((physical.modes[5].m, physical.modes[5].n), (7, 1));
        assert!((physical.coverage - 61f64.sqrt()).abs() < 1e-14);
        assert!(matches!(
            ModeOrdering::lowest(&geom(), OrderingPolicy::PaperFigure, 6),
            Err(Error::TruncationExceedsOrdering { .. })
        ));
    }

    #[test]
    fn single_channel_at_three() {
        let ordering = enumerate_modes(&geom(), 10.0, OrderingPolicy::Physical).unwrap();
        let coupling = CouplingConfig::new(0.01).unwrap();
        let set = channel_set(3.0, &coupling, &ordering).unwrap();
        assert_eq!(set.len(), 1);
        let ch = set.channels[0];
        assert!((ch.k - 2.0).abs() < 1e-15);
        assert!((ch.rho - 1.5).abs() < 1e-15);
        assert!((ch.g_onshell + 0.1 * 5f64.sqrt() / 3f64.sqrt()).abs() < 1e-15);
        assert!((ch.g_onshell + 0.12910).abs() < 5e-6);
    }

    #[test]
    fn channel_set_errors() {
        let ordering = enumerate_modes(&geom(), 10.0, OrderingPolicy::Physical).unwrap();
        let coupling = CouplingConfig::new(0.01).unwrap();
        let omega1 = cutoff_frequency(1, 1, &geom());
        assert!(matches!(
            channel_set(omega1, &coupling, &ordering),
            Err(Error::CutoffSingularity { m: 1, n: 1, .. })
        ));
        assert!(matches!(
            channel_set(2.0, &coupling, &ordering),
            Err(Error::NoOpenChannel { .. })
        ));
        assert!(matches!(
            channel_set(12.0, &coupling, &ordering),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn wavenumbers() {
        let m11 = TmMode::new(1, 1, &geom()).unwrap();
        let m31 = TmMode::new(3, 1, &geom()).unwrap();
        assert!((wavenumber_at_energy(&m11, 3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((wavenumber_at_energy(&m31, 5.0).unwrap() - 12f64.sqrt()).abs() < 1e-14);
        assert!(matches!(
            wavenumber_at_energy(&m11, m11.cutoff),
            Err(Error::Evanescent { .. })
        ));
    }

    #[test]
    fn coupling_from_dipole() {
        let c = CouplingConfig::from_dipole(0.5, 2.0).unwrap();
        assert!((c.g_squared() - 0.25 / (2.0 * std::f64::consts::PI)).abs() < 1e-16);
        assert!(CouplingConfig::new(0.0).is_err());
        assert!(WaveguideGeometry::new(-1.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cutoffs_grow_with_indices(m in 0u32..30, n in 0u32..30, r in 0.2f64..5.0) {
                let g = WaveguideGeometry::new(r).unwrap();
                let (m, n) = (2 * m + 1, 2 * n + 1);
                let c = cutoff_frequency(m, n, &g);
                prop_assert!(c > 0.0);
                prop_assert!(c < cutoff_frequency(m + 2, n, &g));
                prop_assert!(c < cutoff_frequency(m, n + 2, &g));
            }

            #[test]
            fn channel_dispersion_identities(e in 2.3f64..20.0) {
                let ordering = enumerate_modes(&geom(), 25.0, OrderingPolicy::Physical).unwrap();
                let coupling = CouplingConfig::new(0.01).unwrap();
                if let Ok(set) = channel_set(e, &coupling, &ordering) {
                    for ch in &set.channels {
                        prop_assert!((ch.rho * ch.k - e).abs() <= 1e-12 * e);
                        let lhs = ch.k * ch.k + ch.mode.cutoff * ch.mode.cutoff;
                        prop_assert!((lhs - e * e).abs() <= 1e-12 * e * e);
                    }
                }
            }

            #[test]
            fn physical_contains_paper_figure(e_max in 0.5f64..12.0) {
                let physical = enumerate_modes(&geom(), e_max, OrderingPolicy::Physical).unwrap();
                let five_mode = enumerate_modes(&geom(), e_max, OrderingPolicy::PaperFigure).unwrap();
                for mode in &five_mode.modes {
                    prop_assert!(physical.modes.iter().any(|p| p.m == mode.m && p.n == mode.n));
                }
                prop_assert!(!five_mode.modes.iter().any(|p| (p.m, p.n) == (5, 1) || (p.m, p.n) == (7, 1)));
            }
        }
    }
}
