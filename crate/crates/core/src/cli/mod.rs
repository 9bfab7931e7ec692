//! Run configuration, presets, sweeps and output files.
//!
//! Every command is turned into a [`Plan`] first: a list of named series, each
//! a list of points with a fully resolved configuration. Planning solves and
//! validates every schedule, so configuration problems surface before any
//! integration starts.

pub mod app;
pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use config::RunConfig;
pub use presets::Preset;

use crate::analysis::{calibrate_target, FidelityReport};
use crate::controls::ControlSchedule;
use crate::models::{
    second_order_couplings, second_order_effective, BichromaticFrameModel, DrivenIonModel,
    GateModel, Generator, GeneratorSum, ModelKind, StaticGenerator,
};
use crate::models::bessel::j0;
use crate::propagate::{run_ensemble, InitialMotion, Pulse, SimModel, TrajectorySpec};
use crate::{Error, Result};

/// Truncations used by `--fast`.
pub const FAST_TRUNCATION: (usize, usize) = (10, 3);
/// Realizations used by `--full`.
pub const FULL_REALIZATIONS: usize = 100;

/// One CSV row to compute.
#[derive(Clone, Debug)]
pub struct Point {
    pub value: f64,
    pub config: RunConfig,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<Point>,
}

#[derive(Clone, Debug)]
pub struct Plan {
    /// File stem of the outputs.
    pub label: String,
    pub series: Vec<Series>,
}

/// Command-line overrides applied to every point after presets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub realizations: Option<usize>,
    pub full: bool,
    pub fast: bool,
}

impl Overrides {
    pub fn apply(&self, c: &mut RunConfig) {
        if let Some(s) = self.seed {
            c.ensemble.master_seed = s;
        }
        if self.full {
            c.ensemble.n_realizations = FULL_REALIZATIONS;
        }
        if let Some(k) = self.realizations {
            c.ensemble.n_realizations = k;
        }
        if self.fast {
            (c.physical.n_cm, c.physical.n_br) = FAST_TRUNCATION;
        }
    }
}

impl Plan {
    pub fn single(label: &str, value: f64, config: RunConfig) -> Plan {
        Plan { label: label.into(), series: vec![Series { name: String::new(), points: vec![Point { value, config }] }] }
    }

    pub fn apply(&mut self, o: &Overrides) {
        for p in self.series.iter_mut().flat_map(|s| s.points.iter_mut()) {
            o.apply(&mut p.config);
        }
    }
}

/// A point ready to integrate.
pub struct Prepared {
    pub value: f64,
    pub schedule: ControlSchedule,
    pub spec: TrajectorySpec,
    pub n_realizations: usize,
    pub seed: u64,
}

/// True when every trajectory of the point would be identical.
fn deterministic(spec: &TrajectorySpec) -> bool {
    let motion_fixed = spec.initial != InitialMotion::Sampled || spec.nbar == 0.0;
    !spec.noise.is_active() && !spec.channels.iter().any(|c| c.gamma > 0.0) && motion_fixed
}

fn build_model(c: &RunConfig, s: &ControlSchedule) -> Result<SimModel> {
    let p = c.physical_params();
    let fixed = |g: Arc<dyn Generator>| Ok(SimModel::Fixed(g));
    match c.model.kind {
        ModelKind::Full => Ok(SimModel::Driven(DrivenIonModel::full(&p, s, c.drive_options())?.with_errors(c.error_sample()))),
        ModelKind::Simplified => Ok(SimModel::Driven(
            DrivenIonModel::simplified(&p, s, c.model.phase_modulation)?.with_errors(c.error_sample()),
        )),
        ModelKind::BichromaticFrame => fixed(Arc::new(BichromaticFrameModel::new(s, p.n_cm)?)),
        ModelKind::Gate => fixed(Arc::new(GateModel::new(s, p.n_cm)?)),
        ModelKind::SecondOrder => {
            let gate: Arc<dyn Generator> = Arc::new(GateModel::new(s, p.n_cm)?);
            let (g_nu, g_c) =
                second_order_couplings(s.lamb_dicke, s.trap_frequency, s.effective_carrier, j0(2.0 * s.rabi / s.detuning))?;
            let h = second_order_effective(g_nu, g_c, gate.layout())?;
            let extra: Arc<dyn Generator> = Arc::new(StaticGenerator::new(&h)?);
            fixed(Arc::new(GeneratorSum::new(vec![gate, extra])?))
        }
    }
}

/// Resolves the configuration of one point. Errors are configuration errors.
pub fn prepare(value: f64, c: &RunConfig) -> Result<Prepared> {
    let cfg = |e: Error| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    };
    c.validate()?;
    let schedule = c.solve()?;
    let model = build_model(c, &schedule).map_err(cfg)?;
    let noise = c.noise_model()?;
    let channels = c.channels()?;
    let p = c.physical_params();
    let pulses = if c.model.pi_pulses { Pulse::refocusing(&schedule.pi_pulse_times) } else { Vec::new() };
    let spec = TrajectorySpec {
        model,
        gate_time: schedule.gate_time,
        pulses,
        noise,
        channels,
        dissipation: c.dissipation(),
        initial: c.ensemble.initial_motion,
        nbar: p.nbar_initial,
        // replaced by the calibrated target when the point runs
        target: crate::analysis::ideal_bell_state(),
        integrator: c.integrator,
    };
    let n_realizations = if deterministic(&spec) { 1 } else { c.ensemble.n_realizations };
    Ok(Prepared { value, schedule, spec, n_realizations, seed: c.ensemble.master_seed })
}

/// Result of one CSV row.
#[derive(Clone, Debug, Serialize)]
pub struct PointResult {
    pub value: f64,
    pub mean_fidelity: f64,
    pub stderr: f64,
    pub log10_infidelity: Option<f64>,
    pub n_realizations: usize,
    pub seed: u64,
    pub schedule: ControlSchedule,
    pub fidelities: Vec<f64>,
    pub max_norm_drift: f64,
    pub steps: usize,
}

pub fn run_prepared(p: &Prepared, config: &RunConfig) -> Result<PointResult> {
    let mut spec = p.spec.clone();
    spec.target = calibrate_target(&config.physical_params(), &p.schedule, &config.integrator)?;
    let e = run_ensemble(&spec, p.n_realizations, p.seed)?;
    let FidelityReport { mean_fidelity, stderr, n_realizations, log10_infidelity, fidelities } = e.report;
    Ok(PointResult {
        value: p.value,
        mean_fidelity,
        stderr,
        log10_infidelity,
        n_realizations,
        seed: p.seed,
        schedule: p.schedule.clone(),
        fidelities,
        max_norm_drift: e.trajectories.iter().map(|t| t.diagnostics.norm_drift).fold(0.0, f64::max),
        steps: e.trajectories.iter().map(|t| t.diagnostics.steps).sum(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesResult {
    pub name: String,
    pub points: Vec<PointResult>,
}

#[derive(Clone, Debug)]
pub struct PlanResult {
    pub label: String,
    pub series: Vec<SeriesResult>,
    pub wall_time_s: f64,
}

/// Prepares every point (configuration errors) and then integrates them
/// (runtime errors, tagged with the series and value).
pub fn execute(plan: &Plan) -> std::result::Result<PlanResult, CliError> {
    let start = Instant::now();
    let mut prepared = Vec::new();
    for (si, s) in plan.series.iter().enumerate() {
        for pt in &s.points {
            let p = prepare(pt.value, &pt.config)
                .map_err(|e| CliError::Config(format!("series '{}', value {}: {e}", s.name, pt.value)))?;
            prepared.push((si, p, &pt.config));
        }
    }
    let results: Vec<PointResult> = prepared
        .par_iter()
        .map(|(si, p, c)| {
            run_prepared(p, c).map_err(|e| CliError::Runtime(format!("series '{}', value {}: {e}", plan.series[*si].name, p.value)))
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut series: Vec<SeriesResult> =
        plan.series.iter().map(|s| SeriesResult { name: s.name.clone(), points: Vec::new() }).collect();
    for ((si, _, _), r) in prepared.iter().zip(results) {
        series[*si].points.push(r);
    }
    Ok(PlanResult { label: plan.label.clone(), series, wall_time_s: start.elapsed().as_secs_f64() })
}

/// Failure classes with distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => CliError::Config(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}
