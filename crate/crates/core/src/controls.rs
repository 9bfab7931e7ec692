//! Trap constants and the commensurate control program of the gate.
//!
//! A schedule fixes the bichromatic drive (Ω, δ), the gate detuning ξ, the
//! carrier amplitude on its feasibility grid, the phase-flip times and the two
//! refocusing π pulses. All frequencies are angular (rad/s).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{
    ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE, GAMMA_E, HBAR, VACUUM_PERMITTIVITY, YB171_HYPERFINE,
    YB171_MASS_AMU,
};
use crate::models::bessel::{j0, j1, j1_inverse};
use crate::{Error, Result};

/// Relative tolerance used when checking integer period counts.
pub const COMMENSURABILITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Axial trap frequency ν (rad/s).
    pub trap_frequency: f64,
    /// Magnetic field gradient g_B (T/m).
    pub gradient: f64,
    /// Ion mass M (kg).
    pub ion_mass: f64,
    /// Gyromagnetic factor γ_e (rad s⁻¹ T⁻¹).
    pub gamma_e: f64,
    /// Hyperfine splitting ω₀ (rad/s).
    pub hyperfine: f64,
    /// Fock-space truncation of the c.m. mode.
    pub n_cm: usize,
    /// Fock-space truncation of the breathing mode.
    pub n_br: usize,
    /// Initial thermal occupation of both modes.
    pub nbar_initial: f64,
}

impl PhysicalParams {
    /// ¹⁷¹Yb⁺ pair with the default truncations N_c.m. = 15, N_br = 5 and n̄ = 1.
    pub fn ytterbium(trap_frequency: f64, gradient: f64) -> Self {
        Self {
            trap_frequency,
            gradient,
            ion_mass: YB171_MASS_AMU * ATOMIC_MASS_UNIT,
            gamma_e: GAMMA_E,
            hyperfine: YB171_HYPERFINE,
            n_cm: 15,
            n_br: 5,
            nbar_initial: 1.0,
        }
    }

    pub fn with_truncation(mut self, n_cm: usize, n_br: usize) -> Self {
        self.n_cm = n_cm;
        self.n_br = n_br;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("trap_frequency", self.trap_frequency),
            ("ion_mass", self.ion_mass),
            ("gamma_e", self.gamma_e),
            ("hyperfine", self.hyperfine),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gradient >= 0.0) {
            return Err(Error::InvalidArgument(format!("gradient must be >= 0, got {}", self.gradient)));
        }
        if self.n_cm < 2 || self.n_br < 2 {
            return Err(Error::InvalidArgument("mode truncations must be >= 2".into()));
        }
        if !(self.nbar_initial >= 0.0) {
            return Err(Error::InvalidArgument("initial thermal occupation must be >= 0".into()));
        }
        Ok(())
    }

    pub fn lamb_dicke(&self) -> f64 {
        lamb_dicke(self)
    }

    pub fn qubit_splitting(&self) -> f64 {
        qubit_splitting(self)
    }
}

/// η = (γ_e g_B / 8ν) √(ħ / Mν)
pub fn lamb_dicke(p: &PhysicalParams) -> f64 {
    let nu = p.trap_frequency;
    p.gamma_e * p.gradient / (8.0 * nu) * (HBAR / (p.ion_mass * nu)).sqrt()
}

/// Equilibrium distance of two ions in a harmonic well.
pub fn ion_spacing(p: &PhysicalParams) -> f64 {
    let coulomb = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (4.0 * PI * VACUUM_PERMITTIVITY);
    (2.0 * coulomb / (p.ion_mass * p.trap_frequency.powi(2))).cbrt()
}

/// Δω = ω₂ − ω₁ = (γ_e g_B / 2) · spacing
pub fn qubit_splitting(p: &PhysicalParams) -> f64 {
    0.5 * p.gamma_e * p.gradient * ion_spacing(p)
}

/// Where phase flips may sit relative to the bichromatic period 2π/δ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipAlignment {
    /// Inter-flip intervals are multiples of π/δ.
    HalfPeriod,
    /// Inter-flip intervals are multiples of 2π/δ, so every flip lands on a
    /// zero of the phase modulation.
    #[default]
    FullPeriod,
}

/// Inputs of [`solve_schedule`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRequest {
    /// Requested bichromatic Rabi frequency Ω (rad/s).
    pub rabi: f64,
    /// Number of phase-space loops n.
    pub loops: u32,
    /// Number of carrier phase flips n_PF.
    pub phase_flips: u32,
    /// Requested carrier amplitude Ω_DD (rad/s); zero disables the carrier.
    pub carrier: f64,
    /// Target gate angle θ (rad).
    pub gate_angle: f64,
    #[serde(default)]
    pub alignment: FlipAlignment,
}

impl ScheduleRequest {
    pub fn new(rabi: f64, loops: u32, phase_flips: u32, carrier: f64, gate_angle: f64) -> Self {
        Self { rabi, loops, phase_flips, carrier, gate_angle, alignment: FlipAlignment::default() }
    }
}

/// Complete control program of one gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    /// Trap frequency ν the schedule was solved for (rad/s).
    pub trap_frequency: f64,
    /// Lamb-Dicke parameter η of the trap.
    pub lamb_dicke: f64,
    /// Bichromatic Rabi frequency Ω (rad/s).
    pub rabi: f64,
    /// Bichromatic detuning δ = ν + ξ (rad/s).
    pub detuning: f64,
    /// Gate detuning ξ = δ/N = ν/(N−1) (rad/s).
    pub gate_detuning: f64,
    /// Integer N.
    pub ratio: u64,
    /// Number of loops n.
    pub loops: u32,
    /// t_gate = 2πn/ξ (s).
    pub gate_time: f64,
    /// Carrier amplitude Ω_DD (rad/s).
    pub carrier: f64,
    /// Requested carrier amplitude before snapping to the grid (rad/s).
    pub carrier_requested: f64,
    /// Effective carrier Ω̃_DD (rad/s).
    pub effective_carrier: f64,
    /// Number of phase flips n_PF.
    pub phase_flips: u32,
    /// Flip times, strictly increasing inside (0, t_gate).
    pub flip_times: Vec<f64>,
    /// Times of the refocusing π pulses.
    pub pi_pulse_times: Vec<f64>,
    /// Modulation depth φ_m = 4Ω_DD J₁ / (δ J₀) (rad).
    pub phase_amplitude: f64,
    pub alignment: FlipAlignment,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Smallest step of N that keeps every flip interval and the mid-gate π pulse
/// on the required multiples of the bichromatic period.
fn ratio_quantum(loops: u32, phase_flips: u32, alignment: FlipAlignment) -> u64 {
    let n = loops as u64;
    let segs = phase_flips as u64 + 1;
    // segment length in units of π/δ is 2nN/segs
    let per_segment = match alignment {
        FlipAlignment::HalfPeriod => segs / gcd(2 * n, segs),
        FlipAlignment::FullPeriod => segs / gcd(n, segs),
    };
    // φ(t_gate/2) = 0 requires nN even
    let mid_pulse = 2 / gcd(n, 2);
    lcm(per_segment, mid_pulse)
}

/// Jacobi-Anger argument 2Ω/δ.
fn bessel_argument(rabi: f64, detuning: f64) -> f64 {
    2.0 * rabi / detuning
}

/// Ω̃_DD = J₀ Ω_DD (1 + 2J₁²/J₀²), Bessel functions at 2Ω/δ.
pub fn effective_dd(carrier: f64, rabi: f64, detuning: f64) -> Result<f64> {
    if !(detuning > 0.0) {
        return Err(Error::InvalidArgument(format!("detuning must be positive, got {detuning}")));
    }
    let x = bessel_argument(rabi, detuning);
    let (b0, b1) = (j0(x), j1(x));
    Ok(b0 * carrier * (1.0 + 2.0 * b1 * b1 / (b0 * b0)))
}

/// θ_n = 2πn η² ν² J₁(2Ω/δ)² / ξ².
pub fn gate_angle(s: &ControlSchedule) -> f64 {
    let b1 = j1(bessel_argument(s.rabi, s.detuning));
    let coupling = s.lamb_dicke * s.trap_frequency * b1;
    2.0 * PI * s.loops as f64 * coupling * coupling / (s.gate_detuning * s.gate_detuning)
}

/// Leading small-argument form 2πn η² Ω² / ξ².
pub fn gate_angle_small_argument(s: &ControlSchedule) -> f64 {
    2.0 * PI * s.loops as f64 * (s.lamb_dicke * s.rabi / s.gate_detuning).powi(2)
}

pub fn solve_schedule(p: &PhysicalParams, req: &ScheduleRequest) -> Result<ControlSchedule> {
    p.validate()?;
    if !(req.rabi > 0.0) {
        return Err(Error::InvalidArgument("target Rabi frequency must be positive".into()));
    }
    if req.loops == 0 {
        return Err(Error::InvalidArgument("loops must be >= 1".into()));
    }
    if !(req.gate_angle > 0.0 && req.gate_angle < PI / 2.0) {
        return Err(Error::InvalidArgument(format!("gate angle {} outside (0, π/2)", req.gate_angle)));
    }
    if !(req.carrier >= 0.0) {
        return Err(Error::InvalidArgument("carrier amplitude must be >= 0".into()));
    }
    let eta = lamb_dicke(p);
    if !(eta > 0.0) {
        return Err(Error::Infeasible("Lamb-Dicke parameter is zero".into()));
    }
    let nu = p.trap_frequency;
    let n = req.loops as f64;

    let xi0 = req.rabi * eta * (2.0 * PI * n / req.gate_angle).sqrt();
    let quantum = ratio_quantum(req.loops, req.phase_flips, req.alignment);
    let raw = nu / xi0 + 1.0;
    if raw < 2.0 {
        return Err(Error::Infeasible(format!("N = {raw:.3} < 2: gate detuning exceeds the trap frequency")));
    }
    let ratio = ((raw / quantum as f64).round() as u64).max(1) * quantum;
    let xi = nu / (ratio - 1) as f64;
    let delta = nu * ratio as f64 / (ratio - 1) as f64;

    // exact angle: J₁(2Ω/δ) = ξ √(θ / 2πn) / (ην)
    let target_j1 = xi * (req.gate_angle / (2.0 * PI * n)).sqrt() / (eta * nu);
    let x = j1_inverse(target_j1)
        .map_err(|e| Error::Infeasible(format!("cannot reach the gate angle: {e}")))?;
    let rabi = 0.5 * x * delta;
    let gate_time = 2.0 * PI * n / xi;

    let segments = req.phase_flips as usize + 1;
    let flip_times: Vec<f64> = (1..segments)
        .map(|k| gate_time * k as f64 / segments as f64)
        .collect();

    let mut s = ControlSchedule {
        trap_frequency: nu,
        lamb_dicke: eta,
        rabi,
        detuning: delta,
        gate_detuning: xi,
        ratio,
        loops: req.loops,
        gate_time,
        carrier: 0.0,
        carrier_requested: req.carrier,
        effective_carrier: 0.0,
        phase_flips: req.phase_flips,
        flip_times,
        pi_pulse_times: vec![0.5 * gate_time, gate_time],
        phase_amplitude: 0.0,
        alignment: req.alignment,
    };

    if req.carrier > 0.0 {
        let step = carrier_grid_step(&s);
        let per_unit = effective_dd(1.0, rabi, delta)?;
        let k = ((req.carrier * per_unit / step).round() as u64).max(1);
        let carrier = k as f64 * step / per_unit;
        if (carrier - req.carrier).abs() > 0.5 * req.carrier {
            return Err(Error::Infeasible(format!(
                "no feasible carrier within 50% of {:.1} Hz (grid step {:.1} Hz)",
                req.carrier / (2.0 * PI),
                step / per_unit / (2.0 * PI)
            )));
        }
        s.set_carrier(carrier)?;
    }
    s.validate()?;
    Ok(s)
}

/// Spacing of the feasible Ω̃_DD grid, (n_PF + 1)·ξ/n.
fn carrier_grid_step(s: &ControlSchedule) -> f64 {
    (s.phase_flips as f64 + 1.0) * s.gate_detuning / s.loops as f64
}

/// Feasible carrier amplitudes Ω_DD inside `[lo, hi]`, ascending.
pub fn valid_dd_amplitudes(s: &ControlSchedule, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(lo <= hi) || hi <= 0.0 {
        return Err(Error::InvalidArgument(format!("empty carrier range [{lo}, {hi}]")));
    }
    let step = carrier_grid_step(s);
    let per_unit = effective_dd(1.0, s.rabi, s.detuning)?;
    let k_lo = ((lo.max(0.0) * per_unit / step).ceil() as u64).max(1);
    let k_hi = (hi * per_unit / step).floor() as u64;
    Ok((k_lo..=k_hi).map(|k| k as f64 * step / per_unit).collect())
}

impl ControlSchedule {
    /// Replaces the carrier amplitude and the quantities derived from it.
    pub fn set_carrier(&mut self, carrier: f64) -> Result<()> {
        let x = bessel_argument(self.rabi, self.detuning);
        self.carrier = carrier;
        self.effective_carrier = effective_dd(carrier, self.rabi, self.detuning)?;
        self.phase_amplitude = 4.0 * carrier * j1(x) / (self.detuning * j0(x));
        Ok(())
    }

    /// Same drive and timing with the carrier and all phase flips removed.
    pub fn without_carrier(&self) -> ControlSchedule {
        let mut s = self.clone();
        s.carrier = 0.0;
        s.carrier_requested = 0.0;
        s.effective_carrier = 0.0;
        s.phase_amplitude = 0.0;
        s.phase_flips = 0;
        s.flip_times.clear();
        s
    }

    /// Difference between the snapped and requested carrier (rad/s).
    pub fn carrier_delta(&self) -> f64 {
        self.carrier - self.carrier_requested
    }

    /// Index of the flip segment containing `t`; a flip time belongs to the
    /// segment it opens.
    pub fn segment_at(&self, t: f64) -> usize {
        self.flip_times.partition_point(|&tf| tf <= t)
    }

    /// f(t) = ±1, starting at +1 and changing sign at every flip.
    pub fn flip_sign(&self, segment: usize) -> f64 {
        if segment % 2 == 0 { 1.0 } else { -1.0 }
    }

    /// Unsigned modulation φ(t) = φ_m sin²(δt/2).
    pub fn phase_envelope(&self, t: f64) -> f64 {
        let s = (0.5 * self.detuning * t).sin();
        self.phase_amplitude * s * s
    }

    /// Ω̃_DD · t_gate / 2π
    pub fn carrier_cycles(&self) -> f64 {
        self.effective_carrier * self.gate_time / (2.0 * PI)
    }

    /// Checks every commensurability invariant of the schedule.
    pub fn validate(&self) -> Result<()> {
        let near_int = |x: f64| (x - x.round()).abs() <= COMMENSURABILITY_TOL * x.abs().max(1.0);
        let fail = |msg: String| Err(Error::Infeasible(msg));
        if self.ratio < 2 {
            return fail(format!("N = {} < 2", self.ratio));
        }
        let n1 = (self.ratio - 1) as f64;
        let xi_err = (self.gate_detuning - self.trap_frequency / n1).abs();
        let delta_err = (self.detuning - self.ratio as f64 * self.gate_detuning).abs();
        if xi_err > 1e-12 * self.trap_frequency || delta_err > 1e-9 * self.detuning {
            return fail("detunings violate ξ = δ/N = ν/(N−1)".into());
        }
        let bichromatic_cycles = self.detuning * self.gate_time / (2.0 * PI);
        if !near_int(bichromatic_cycles) {
            return fail(format!("δ·t_gate/2π = {bichromatic_cycles} is not an integer"));
        }
        if self.effective_carrier != 0.0 && !near_int(self.carrier_cycles()) {
            return fail(format!("Ω̃_DD·t_gate/2π = {} is not an integer", self.carrier_cycles()));
        }
        let mut prev = 0.0;
        for (k, &t) in self.flip_times.iter().chain(std::iter::once(&self.gate_time)).enumerate() {
            if !(t > prev) || t > self.gate_time * (1.0 + 1e-12) {
                return fail(format!("flip time {k} not strictly increasing inside (0, t_gate)"));
            }
            let interval = t - prev;
            if self.effective_carrier != 0.0 {
                let c = interval * self.effective_carrier / (2.0 * PI);
                if !near_int(c) {
                    return fail(format!("segment {k} holds {c} carrier periods"));
                }
            }
            let unit = match self.alignment {
                FlipAlignment::HalfPeriod => PI / self.detuning,
                FlipAlignment::FullPeriod => 2.0 * PI / self.detuning,
            };
            if !near_int(interval / unit) {
                return fail(format!("segment {k} is {} modulation units", interval / unit));
            }
            prev = t;
        }
        if self.flip_times.len() != self.phase_flips as usize {
            return fail("flip count does not match n_PF".into());
        }
        Ok(())
    }
}

/// f(t)·φ(t) for 0 ≤ t ≤ t_gate.
pub fn phase_modulation(t: f64, s: &ControlSchedule) -> Result<f64> {
    let slack = 1e-12 * s.gate_time;
    if !(t >= -slack && t <= s.gate_time + slack) {
        return Err(Error::InvalidArgument(format!("t = {t} outside the gate window")));
    }
    Ok(s.flip_sign(s.segment_at(t)) * s.phase_envelope(t))
}
