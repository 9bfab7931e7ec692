//! Named experiments reproducing the constant-error scans and the noisy
//! infidelity scans.
//!
//! A preset replaces the physics of the base configuration (trap, drive,
//! schedule, model, errors, noise, heating) and keeps its numerical settings:
//! truncations, integrator, ensemble and output.

use std::fmt;
use std::str::FromStr;

use super::config::{DriveNoise, HeatingConfig, MagneticNoise, NoiseConfig};
use super::{Plan, Point, RunConfig, Series};
use crate::constants::two_pi;
use crate::controls::valid_dd_amplitudes;
use crate::models::ModelKind;
use crate::propagate::Dissipation;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Fidelity against a constant qubit frequency offset ε.
    Fig1a,
    /// Fidelity against a constant relative carrier offset, n_PF ∈ {0, 1}.
    Fig1b,
    /// Fidelity against a constant relative Rabi-frequency offset.
    Fig1c,
    /// Infidelity against Ω_DD for both parameter panels and all noise settings.
    Fig3,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig1a, Preset::Fig1b, Preset::Fig1c, Preset::Fig3];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1a => "fig1a",
            Preset::Fig1b => "fig1b",
            Preset::Fig1c => "fig1c",
            Preset::Fig3 => "fig3",
        }
    }

    pub fn plan(self, base: &RunConfig) -> Result<Plan> {
        match self {
            Preset::Fig1a => fig1a(base),
            Preset::Fig1b => fig1b(base),
            Preset::Fig1c => fig1c(base),
            Preset::Fig3 => fig3(base),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset '{s}' (expected fig1a, fig1b, fig1c or fig3)")))
    }
}

/// Half-width of the ε scan (Hz).
pub const FIG1A_EPSILON_SPAN_HZ: f64 = 10e3;
/// Half-width of the relative amplitude scans of fig1b and fig1c.
pub const FIG1_RELATIVE_SPAN: f64 = 0.02;
/// Carrier used in the constant-error scans (Hz).
pub const FIG1_CARRIER_HZ: f64 = 49e3;
/// Upper end of the Ω_DD axis of fig3 (Hz).
pub const FIG3_CARRIER_MAX_HZ: f64 = 80e3;
/// (τ, T₂) pairs of the magnetic noise settings (s).
pub const FIG3_MAGNETIC: [(f64, f64); 3] = [(0.05e-3, 0.5e-3), (0.1e-3, 1e-3), (0.2e-3, 2e-3)];

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Keeps the numerical settings of `base` and clears its physics.
fn numerics_of(base: &RunConfig) -> RunConfig {
    let mut c = base.clone();
    c.errors = Default::default();
    c.noise = NoiseConfig::default();
    c.heating = None;
    c.model = Default::default();
    c
}

/// Single-mode model at g_B = 20.9 T/m, ν = 138 kHz, Ω = 26 kHz, motion in
/// the vacuum.
fn fig1_base(base: &RunConfig) -> RunConfig {
    let mut c = numerics_of(base);
    c.physical.trap_frequency_hz = 138e3;
    c.physical.gradient_t_per_m = 20.9;
    c.physical.nbar_initial = 0.0;
    c.schedule.rabi_hz = 26e3;
    c.schedule.loops = 1;
    c.schedule.phase_flips = 1;
    c.schedule.carrier_hz = FIG1_CARRIER_HZ;
    c.schedule.gate_angle = std::f64::consts::PI / 8.0;
    c.schedule.alignment = Default::default();
    c.model.kind = ModelKind::Simplified;
    c
}

fn series(name: &str, values: &[f64], base: &RunConfig, set: impl Fn(&mut RunConfig, f64)) -> Series {
    let points = values
        .iter()
        .map(|&v| {
            let mut c = base.clone();
            set(&mut c, v);
            Point { value: v, config: c }
        })
        .collect();
    Series { name: name.into(), points }
}

fn fig1a(base: &RunConfig) -> Result<Plan> {
    let c = fig1_base(base);
    let eps = linspace(-FIG1A_EPSILON_SPAN_HZ, FIG1A_EPSILON_SPAN_HZ, 21);
    let set_eps = |c: &mut RunConfig, v: f64| {
        c.errors.epsilon1_hz = v;
        c.errors.epsilon2_hz = v;
    };
    let mut bare = c.clone();
    bare.schedule.carrier_hz = 0.0;
    let mut plain = c.clone();
    plain.model.phase_modulation = false;
    Ok(Plan {
        label: "fig1a".into(),
        series: vec![
            series("no_carrier", &eps, &bare, set_eps),
            series("carrier_unmodulated", &eps, &plain, set_eps),
            series("carrier_modulated", &eps, &c, set_eps),
        ],
    })
}

fn fig1b(base: &RunConfig) -> Result<Plan> {
    let c = fig1_base(base);
    let offsets = linspace(-FIG1_RELATIVE_SPAN, FIG1_RELATIVE_SPAN, 9);
    let flips = |n: u32| {
        let mut c = c.clone();
        c.schedule.phase_flips = n;
        c
    };
    let set = |c: &mut RunConfig, v: f64| c.errors.carrier_rel = v;
    Ok(Plan {
        label: "fig1b".into(),
        series: vec![series("npf0", &offsets, &flips(0), set), series("npf1", &offsets, &flips(1), set)],
    })
}

fn fig1c(base: &RunConfig) -> Result<Plan> {
    let c = fig1_base(base);
    let offsets = linspace(-FIG1_RELATIVE_SPAN, FIG1_RELATIVE_SPAN, 9);
    Ok(Plan {
        label: "fig1c".into(),
        series: vec![series("carrier_modulated", &offsets, &c, |c, v| c.errors.rabi_rel = v)],
    })
}

/// One parameter regime of the noisy scans.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Panel {
    pub name: &'static str,
    pub trap_hz: f64,
    pub gradient: f64,
    pub rabi_hz: f64,
    pub drive_tau_s: f64,
    pub drive_relative: f64,
    pub heating_per_s: f64,
}

pub const LEFT_PANEL: Panel = Panel {
    name: "left",
    trap_hz: 138e3,
    gradient: 20.9,
    rabi_hz: 37e3,
    drive_tau_s: 0.5e-3,
    drive_relative: 0.005,
    heating_per_s: 300.0,
};

pub const RIGHT_PANEL: Panel = Panel {
    name: "right",
    trap_hz: 207e3,
    gradient: 38.5,
    rabi_hz: 26.6e3,
    drive_tau_s: 1e-3,
    drive_relative: 0.0025,
    heating_per_s: 200.0,
};

/// Noiseless full model of a panel: both modes thermal with n̄ = 1, 31 flips.
pub fn panel_config(base: &RunConfig, panel: &Panel) -> RunConfig {
    let mut c = numerics_of(base);
    c.physical.trap_frequency_hz = panel.trap_hz;
    c.physical.gradient_t_per_m = panel.gradient;
    c.physical.nbar_initial = 1.0;
    c.schedule.rabi_hz = panel.rabi_hz;
    c.schedule.loops = 1;
    c.schedule.phase_flips = 31;
    c.schedule.carrier_hz = 0.0;
    c.schedule.gate_angle = std::f64::consts::PI / 8.0;
    c.schedule.alignment = Default::default();
    c.model.kind = ModelKind::Full;
    c
}

/// Adds the magnetic, drive and heating errors of a panel.
pub fn with_panel_noise(c: &RunConfig, panel: &Panel, tau: f64, t2: f64, dissipation: Dissipation) -> RunConfig {
    let mut c = c.clone();
    c.noise.magnetic = Some(MagneticNoise { tau_s: tau, t2_s: t2, correlated: false });
    c.noise.drive =
        Some(DriveNoise { tau_s: panel.drive_tau_s, relative_amplitude: panel.drive_relative, independent_tones: false });
    c.heating = Some(HeatingConfig { ndot_per_s: panel.heating_per_s, temperature_k: 300.0, dissipation });
    c
}

/// Ω_DD axis of a panel (Hz): zero followed by every feasible carrier up to
/// [`FIG3_CARRIER_MAX_HZ`].
pub fn carrier_axis(c: &RunConfig) -> Result<Vec<f64>> {
    let s = c.solve()?;
    let grid = valid_dd_amplitudes(&s, 1.0, two_pi(FIG3_CARRIER_MAX_HZ))?;
    Ok(std::iter::once(0.0).chain(grid.into_iter().map(|w| w / two_pi(1.0))).collect())
}

pub fn magnetic_series_name(panel: &Panel, tau: f64, t2: f64) -> String {
    let ms = |x: f64| (x * 1e9).round() / 1e6;
    format!("{}_tau{}ms_t2_{}ms", panel.name, ms(tau), ms(t2))
}

fn fig3(base: &RunConfig) -> Result<Plan> {
    let mut out = Vec::new();
    for panel in [LEFT_PANEL, RIGHT_PANEL] {
        let c = panel_config(base, &panel);
        let axis = carrier_axis(&c)?;
        let set = |c: &mut RunConfig, v: f64| c.schedule.carrier_hz = v;
        out.push(series(&format!("{}_modulated", panel.name), &axis, &c, set));
        let mut plain = c.clone();
        plain.model.phase_modulation = false;
        out.push(series(&format!("{}_unmodulated", panel.name), &axis, &plain, set));
        for (tau, t2) in FIG3_MAGNETIC {
            let noisy = with_panel_noise(&c, &panel, tau, t2, base.dissipation());
            out.push(series(&magnetic_series_name(&panel, tau, t2), &axis, &noisy, set));
        }
    }
    Ok(Plan { label: "fig3".into(), series: out })
}
