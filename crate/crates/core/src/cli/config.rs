//! JSON run configuration. Frequencies are given in Hz and converted to rad/s
//! on load; everything else is SI.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constants::{two_pi, ATOMIC_MASS_UNIT, GAMMA_E, YB171_HYPERFINE, YB171_MASS_AMU};
use crate::controls::{solve_schedule, ControlSchedule, FlipAlignment, PhysicalParams, ScheduleRequest};
use crate::models::{DriveOptions, ErrorSample, ModelKind};
use crate::noise::{calibrate_ou_from_t2, heating_channel, Correlation, LindbladChannel, NoiseModel, OUParams};
use crate::propagate::{Dissipation, InitialMotion, IntegratorConfig};
use crate::qops::CM_MODE;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub physical: PhysicalConfig,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub model: ModelConfig,
    /// Constant control errors added on top of any noise.
    #[serde(default)]
    pub errors: ConstantErrors,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub heating: Option<HeatingConfig>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConfig {
    pub trap_frequency_hz: f64,
    pub gradient_t_per_m: f64,
    #[serde(default = "default_mass")]
    pub ion_mass_amu: f64,
    #[serde(default = "default_n_cm")]
    pub n_cm: usize,
    #[serde(default = "default_n_br")]
    pub n_br: usize,
    #[serde(default = "default_nbar")]
    pub nbar_initial: f64,
}

fn default_mass() -> f64 {
    YB171_MASS_AMU
}
fn default_n_cm() -> usize {
    15
}
fn default_n_br() -> usize {
    5
}
fn default_nbar() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub rabi_hz: f64,
    #[serde(default = "default_loops")]
    pub loops: u32,
    #[serde(default = "default_flips")]
    pub phase_flips: u32,
    /// Requested carrier amplitude; snapped to the nearest feasible value.
    #[serde(default)]
    pub carrier_hz: f64,
    #[serde(default = "default_angle")]
    pub gate_angle: f64,
    #[serde(default)]
    pub alignment: FlipAlignment,
}

fn default_loops() -> u32 {
    1
}
fn default_flips() -> u32 {
    31
}
fn default_angle() -> f64 {
    PI / 8.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub crosstalk: bool,
    pub breathing_mode: bool,
    pub phase_modulation: bool,
    pub pi_pulses: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { kind: ModelKind::Full, crosstalk: true, breathing_mode: true, phase_modulation: true, pi_pulses: true }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantErrors {
    pub epsilon1_hz: f64,
    pub epsilon2_hz: f64,
    pub rabi_rel: f64,
    pub carrier_rel: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub magnetic: Option<MagneticNoise>,
    pub drive: Option<DriveNoise>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagneticNoise {
    pub tau_s: f64,
    pub t2_s: f64,
    /// Common-mode field noise (ε₁ = ε₂) instead of independent qubits.
    #[serde(default)]
    pub correlated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveNoise {
    pub tau_s: f64,
    /// Stationary relative amplitude error δ_Ω.
    pub relative_amplitude: f64,
    #[serde(default)]
    pub independent_tones: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatingConfig {
    pub ndot_per_s: f64,
    #[serde(default = "default_temperature")]
    pub temperature_k: f64,
    #[serde(default)]
    pub dissipation: Dissipation,
}

fn default_temperature() -> f64 {
    300.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_realizations: usize,
    pub master_seed: u64,
    pub initial_motion: InitialMotion,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig { n_realizations: 20, master_seed: 0, initial_motion: InitialMotion::Sampled }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => config_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Structural checks that do not need the schedule solver.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_err(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_err(format!("{name} must be positive, got {v}")))
            }
        };
        positive("physical.trap_frequency_hz", self.physical.trap_frequency_hz)?;
        positive("physical.ion_mass_amu", self.physical.ion_mass_amu)?;
        positive("schedule.rabi_hz", self.schedule.rabi_hz)?;
        if !(self.schedule.carrier_hz >= 0.0) {
            return Err(config_err("schedule.carrier_hz must be >= 0"));
        }
        for (name, v) in [
            ("errors.epsilon1_hz", self.errors.epsilon1_hz),
            ("errors.epsilon2_hz", self.errors.epsilon2_hz),
            ("errors.rabi_rel", self.errors.rabi_rel),
            ("errors.carrier_rel", self.errors.carrier_rel),
        ] {
            if !v.is_finite() {
                return Err(config_err(format!("{name} must be finite")));
            }
        }
        if let Some(m) = self.noise.magnetic {
            positive("noise.magnetic.tau_s", m.tau_s)?;
            positive("noise.magnetic.t2_s", m.t2_s)?;
        }
        if let Some(d) = self.noise.drive {
            positive("noise.drive.tau_s", d.tau_s)?;
            if !(d.relative_amplitude >= 0.0) {
                return Err(config_err("noise.drive.relative_amplitude must be >= 0"));
            }
        }
        if let Some(h) = self.heating {
            if !(h.ndot_per_s >= 0.0) {
                return Err(config_err("heating.ndot_per_s must be >= 0"));
            }
            positive("heating.temperature_k", h.temperature_k)?;
        }
        if self.ensemble.n_realizations == 0 {
            return Err(config_err("ensemble.n_realizations must be >= 1"));
        }
        let fixed = !matches!(self.model.kind, ModelKind::Full | ModelKind::Simplified);
        if fixed && (self.noise_model()?.is_active() || self.error_sample() != ErrorSample::default()) {
            return Err(config_err(format!(
                "model.kind {:?} does not accept control errors or noise",
                self.model.kind
            )));
        }
        self.integrator.validate().map_err(|e| config_err(e.to_string()))?;
        self.physical_params().validate().map_err(|e| config_err(e.to_string()))
    }

    pub fn physical_params(&self) -> PhysicalParams {
        let p = &self.physical;
        PhysicalParams {
            trap_frequency: two_pi(p.trap_frequency_hz),
            gradient: p.gradient_t_per_m,
            ion_mass: p.ion_mass_amu * ATOMIC_MASS_UNIT,
            gamma_e: GAMMA_E,
            hyperfine: YB171_HYPERFINE,
            n_cm: p.n_cm,
            n_br: p.n_br,
            nbar_initial: p.nbar_initial,
        }
    }

    pub fn schedule_request(&self) -> ScheduleRequest {
        let s = &self.schedule;
        ScheduleRequest {
            rabi: two_pi(s.rabi_hz),
            loops: s.loops,
            phase_flips: s.phase_flips,
            carrier: two_pi(s.carrier_hz),
            gate_angle: s.gate_angle,
            alignment: s.alignment,
        }
    }

    /// Solves and validates the control schedule.
    pub fn solve(&self) -> Result<ControlSchedule> {
        let s = solve_schedule(&self.physical_params(), &self.schedule_request())
            .map_err(|e| config_err(format!("schedule: {e}")))?;
        s.validate().map_err(|e| config_err(format!("schedule: {e}")))?;
        Ok(s)
    }

    pub fn drive_options(&self) -> DriveOptions {
        DriveOptions {
            crosstalk: self.model.crosstalk,
            breathing_mode: self.model.breathing_mode,
            phase_modulation: self.model.phase_modulation,
        }
    }

    pub fn error_sample(&self) -> ErrorSample {
        ErrorSample {
            eps1: two_pi(self.errors.epsilon1_hz),
            eps2: two_pi(self.errors.epsilon2_hz),
            rabi_rel: self.errors.rabi_rel,
            carrier_rel: self.errors.carrier_rel,
        }
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        let mut n = NoiseModel::default();
        if let Some(m) = self.noise.magnetic {
            n.magnetic = Some(calibrate_ou_from_t2(m.tau_s, m.t2_s).map_err(|e| config_err(e.to_string()))?);
            n.magnetic_correlation = if m.correlated { Correlation::Correlated } else { Correlation::Independent };
        }
        if let Some(d) = self.noise.drive {
            n.drive = Some(OUParams::new(d.tau_s, d.relative_amplitude).map_err(|e| config_err(e.to_string()))?);
            n.independent_tones = d.independent_tones;
        }
        Ok(n)
    }

    pub fn channels(&self) -> Result<Vec<LindbladChannel>> {
        match self.heating {
            Some(h) if h.ndot_per_s > 0.0 => Ok(vec![heating_channel(
                h.ndot_per_s,
                two_pi(self.physical.trap_frequency_hz),
                h.temperature_k,
                CM_MODE,
            )
            .map_err(|e| config_err(e.to_string()))?]),
            _ => Ok(Vec::new()),
        }
    }

    pub fn dissipation(&self) -> Dissipation {
        self.heating.map(|h| h.dissipation).unwrap_or_default()
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
