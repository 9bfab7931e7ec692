//! Ornstein-Uhlenbeck fluctuations of the qubit frequencies and drive
//! amplitudes, and the thermal heating channel of the c.m. mode.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HBAR};
use crate::models::{ErrorSample, ErrorSource};
use crate::qops::{embed, ladder, HilbertLayout, Operator};
use crate::{Error, Result};

/// Noise grid spacing as a fraction of the correlation time.
pub const SAMPLES_PER_TAU: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OUParams {
    /// Correlation time (s).
    pub tau: f64,
    /// Stationary standard deviation (rad/s, or dimensionless for relative
    /// amplitude noise).
    pub sigma: f64,
}

impl OUParams {
    pub fn new(tau: f64, sigma: f64) -> Result<Self> {
        let p = OUParams { tau, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) || !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "OU parameters need tau > 0 and sigma >= 0, got tau={} sigma={}",
                self.tau, self.sigma
            )));
        }
        Ok(())
    }

    /// Variance of the accumulated phase, χ(t) = σ²τ²(t/τ − 1 + e^{−t/τ}).
    /// Free-induction coherence under ε(t)σᶻ/2 is e^{−χ(t)}.
    pub fn dephasing(&self, t: f64) -> f64 {
        let r = t / self.tau;
        // t/τ − 1 + e^{−t/τ} loses all digits for small r; use its series.
        let g = if r < 1e-3 {
            r * r / 2.0 - r * r * r / 6.0 + r.powi(4) / 24.0
        } else {
            r - 1.0 + (-r).exp()
        };
        (self.sigma * self.tau).powi(2) * g
    }

    /// Autocorrelation ⟨x(t)x(t+Δ)⟩/σ².
    pub fn autocorrelation(&self, lag: f64) -> f64 {
        (-lag.abs() / self.tau).exp()
    }
}

/// σ such that χ(T₂) = 1.
pub fn calibrate_ou_from_t2(tau: f64, t2: f64) -> Result<OUParams> {
    if !(tau > 0.0) || !(t2 > 0.0) {
        return Err(Error::InvalidArgument(format!("need tau, T2 > 0, got {tau}, {t2}")));
    }
    let unit = OUParams { tau, sigma: 1.0 };
    OUParams::new(tau, 1.0 / unit.dephasing(t2).sqrt())
}

/// Exact discrete OU path `x_0 … x_steps` started from the stationary law.
pub fn ou_sample_path(p: &OUParams, dt: f64, steps: usize, rng: &mut impl rand::Rng) -> Result<Vec<f64>> {
    p.validate()?;
    if !(dt > 0.0) || steps == 0 {
        return Err(Error::InvalidArgument(format!("need dt > 0 and steps >= 1, got {dt}, {steps}")));
    }
    let mu = (-dt / p.tau).exp();
    // 1 − μ² without cancellation for dt ≪ τ
    let kick = p.sigma * (-(-2.0 * dt / p.tau).exp_m1()).sqrt();
    let n0: f64 = StandardNormal.sample(rng);
    let mut x = p.sigma * n0;
    let mut path = Vec::with_capacity(steps + 1);
    path.push(x);
    for _ in 0..steps {
        let n: f64 = StandardNormal.sample(rng);
        x = mu * x + kick * n;
        path.push(x);
    }
    Ok(path)
}

/// Values on a uniform grid starting at t = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl SampledPath {
    pub fn sample(p: &OUParams, t_end: f64, rng: &mut impl rand::Rng) -> Result<Self> {
        let dt = p.tau / SAMPLES_PER_TAU;
        let steps = ((t_end / dt).ceil() as usize).max(1);
        Ok(SampledPath { dt, values: ou_sample_path(p, dt, steps, rng)? })
    }

    pub fn end_time(&self) -> f64 {
        self.dt * (self.values.len() - 1) as f64
    }

    /// Linear interpolation; clamps outside the grid.
    pub fn at(&self, t: f64) -> f64 {
        let x = (t / self.dt).max(0.0);
        let k = x.floor() as usize;
        if k + 1 >= self.values.len() {
            return *self.values.last().expect("non-empty path");
        }
        let w = x - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correlation {
    /// ε₁ and ε₂ drawn independently.
    #[default]
    Independent,
    /// ε₁ = ε₂ (common-mode field noise).
    Correlated,
}

/// Which stochastic channels are active.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Qubit frequency noise ε₁, ε₂ (rad/s).
    pub magnetic: Option<OUParams>,
    pub magnetic_correlation: Correlation,
    /// Relative drive amplitude noise δΩ_rel.
    pub drive: Option<OUParams>,
    /// Draw separate paths for Ω and Ω_DD instead of a common one.
    pub independent_tones: bool,
}

impl NoiseModel {
    pub fn is_active(&self) -> bool {
        self.magnetic.is_some_and(|p| p.sigma > 0.0) || self.drive.is_some_and(|p| p.sigma > 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for p in [self.magnetic, self.drive].into_iter().flatten() {
            p.validate()?;
        }
        Ok(())
    }

    /// Samples every active channel over `[0, t_end]` from `seed`.
    pub fn realize(&self, t_end: f64, seed: u64) -> Result<NoiseRealization> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = NoiseRealization { seed, ..Default::default() };
        if let Some(p) = self.magnetic {
            r.eps1 = Some(SampledPath::sample(&p, t_end, &mut rng)?);
            r.eps2 = match self.magnetic_correlation {
                Correlation::Independent => Some(SampledPath::sample(&p, t_end, &mut rng)?),
                Correlation::Correlated => r.eps1.clone(),
            };
        }
        if let Some(p) = self.drive {
            r.rabi_rel = Some(SampledPath::sample(&p, t_end, &mut rng)?);
            r.carrier_rel = if self.independent_tones {
                Some(SampledPath::sample(&p, t_end, &mut rng)?)
            } else {
                r.rabi_rel.clone()
            };
        }
        Ok(r)
    }
}

/// One draw of all noise channels.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseRealization {
    pub seed: u64,
    pub eps1: Option<SampledPath>,
    pub eps2: Option<SampledPath>,
    pub rabi_rel: Option<SampledPath>,
    pub carrier_rel: Option<SampledPath>,
}

impl NoiseRealization {
    fn channels(&self) -> [Option<&SampledPath>; 4] {
        [self.eps1.as_ref(), self.eps2.as_ref(), self.rabi_rel.as_ref(), self.carrier_rel.as_ref()]
    }

    /// Shortest time covered by every sampled channel.
    pub fn covered_until(&self) -> f64 {
        self.channels().iter().flatten().map(|p| p.end_time()).fold(f64::INFINITY, f64::min)
    }
}

impl ErrorSource for NoiseRealization {
    fn sample(&self, t: f64) -> ErrorSample {
        let v = |p: &Option<SampledPath>| p.as_ref().map_or(0.0, |p| p.at(t));
        ErrorSample {
            eps1: v(&self.eps1),
            eps2: v(&self.eps2),
            rabi_rel: v(&self.rabi_rel),
            carrier_rel: v(&self.carrier_rel),
        }
    }

    fn bound(&self) -> ErrorSample {
        let m = |p: &Option<SampledPath>| p.as_ref().map_or(0.0, SampledPath::max_abs);
        ErrorSample {
            eps1: m(&self.eps1),
            eps2: m(&self.eps2),
            rabi_rel: m(&self.rabi_rel),
            carrier_rel: m(&self.carrier_rel),
        }
    }
}

/// Bose occupation N̄ = 1/(e^{ħν/k_BT} − 1).
pub fn bose_occupation(trap_frequency: f64, temperature: f64) -> f64 {
    1.0 / (HBAR * trap_frequency / (BOLTZMANN * temperature)).exp_m1()
}

/// Thermalizing dissipator of one mode with rate Γ toward occupation N̄:
/// jump operators √(Γ(N̄+1))·a and √(ΓN̄)·a†.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindbladChannel {
    pub gamma: f64,
    pub nbar: f64,
    /// Layout slot of the damped mode.
    pub mode: usize,
}

impl LindbladChannel {
    pub fn new(gamma: f64, nbar: f64, mode: usize) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) || !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(Error::InvalidArgument(format!("channel needs Γ, N̄ >= 0, got {gamma}, {nbar}")));
        }
        Ok(LindbladChannel { gamma, nbar, mode })
    }

    /// ṅ̄ = ΓN̄
    pub fn heating_rate(&self) -> f64 {
        self.gamma * self.nbar
    }

    /// Jump operators embedded on `layout`; zero-rate operators are omitted.
    pub fn jump_operators(&self, layout: &HilbertLayout) -> Result<Vec<Operator>> {
        let a = embed(&ladder(layout.dim(self.mode))?, self.mode, layout)?;
        let mut ops = Vec::new();
        let down = self.gamma * (self.nbar + 1.0);
        let up = self.gamma * self.nbar;
        if down > 0.0 {
            ops.push(a.scale_real(down.sqrt()));
        }
        if up > 0.0 {
            ops.push(a.adjoint().scale_real(up.sqrt()));
        }
        Ok(ops)
    }
}

/// Channel with heating rate `ndot` (phonons/s) toward the bath at `temperature`.
pub fn heating_channel(ndot: f64, trap_frequency: f64, temperature: f64, mode: usize) -> Result<LindbladChannel> {
    if !(ndot >= 0.0) || !(trap_frequency > 0.0) || !(temperature > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "heating channel needs ndot >= 0, ν > 0, T > 0 (got {ndot}, {trap_frequency}, {temperature})"
        )));
    }
    let nbar = bose_occupation(trap_frequency, temperature);
    LindbladChannel::new(ndot / nbar, nbar, mode)
}
