//! Single noisy trajectories of the full gate and seeded ensembles of them.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evolve_jumps, evolve_lindblad_with, evolve_state_with, Diagnostics, IntegratorConfig, Pulse};
use crate::analysis::{bell_fidelity, infidelity_stats, FidelityReport};
use crate::models::{DrivenIonModel, Generator};
use crate::noise::{LindbladChannel, NoiseModel};
use crate::qops::{
    thermal_populations, DensityMatrix, HilbertLayout, QubitState, StateVector, CM_MODE,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dissipation {
    #[default]
    QuantumJump,
    Lindblad,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialMotion {
    /// One Fock configuration per trajectory drawn from the thermal law.
    #[default]
    Sampled,
    /// Exact thermal mixture: every Fock configuration weighted by its
    /// probability (deterministic, costs one run per configuration).
    ThermalAverage,
    /// All modes in the vacuum.
    Ground,
}

/// Model integrated by a trajectory.
#[derive(Clone)]
pub enum SimModel {
    /// Driven model accepting sampled noise paths.
    Driven(DrivenIonModel),
    /// Any other generator; noise must be off.
    Fixed(Arc<dyn Generator>),
}

impl SimModel {
    pub fn layout(&self) -> &HilbertLayout {
        match self {
            SimModel::Driven(m) => m.layout(),
            SimModel::Fixed(g) => g.layout(),
        }
    }
}

/// Everything a trajectory needs besides its seed.
#[derive(Clone)]
pub struct TrajectorySpec {
    pub model: SimModel,
    pub gate_time: f64,
    pub pulses: Vec<Pulse>,
    pub noise: NoiseModel,
    pub channels: Vec<LindbladChannel>,
    pub dissipation: Dissipation,
    pub initial: InitialMotion,
    /// Mean initial occupation of every motional mode.
    pub nbar: f64,
    /// Two-qubit target state.
    pub target: StateVector,
    pub integrator: IntegratorConfig,
}

#[derive(Clone, Debug)]
pub struct TrajectoryResult {
    pub index: usize,
    pub seed: u64,
    pub fidelity: f64,
    /// Final two-qubit state after tracing out the modes.
    pub qubits: DensityMatrix,
    /// Initial Fock numbers (sampled runs only).
    pub fock: Option<Vec<usize>>,
    pub jumps: usize,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug)]
pub struct EnsembleResult {
    pub report: FidelityReport,
    pub trajectories: Vec<TrajectoryResult>,
    pub master_seed: u64,
}

/// Seed of trajectory `index`: splitmix64 of the master seed offset by the index.
pub fn trajectory_seed(master: u64, index: usize) -> u64 {
    let mut z = master.wrapping_add((index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mode_slots(layout: &HilbertLayout) -> std::ops::Range<usize> {
    CM_MODE..layout.subsystems()
}

/// (weight, Fock numbers) pairs describing the initial motional state.
fn initial_configurations(
    layout: &HilbertLayout,
    nbar: f64,
    initial: InitialMotion,
    rng: &mut impl Rng,
) -> Result<Vec<(f64, Vec<usize>)>> {
    let slots: Vec<usize> = mode_slots(layout).collect();
    if initial == InitialMotion::Ground || nbar == 0.0 {
        return Ok(vec![(1.0, vec![0; slots.len()])]);
    }
    let pops: Vec<Vec<f64>> =
        slots.iter().map(|&s| thermal_populations(layout.dim(s), nbar)).collect::<Result<_>>()?;
    match initial {
        InitialMotion::Sampled => {
            let fock = pops
                .iter()
                .map(|p| {
                    let mut u: f64 = rng.random();
                    for (n, w) in p.iter().enumerate() {
                        if u < *w {
                            return n;
                        }
                        u -= w;
                    }
                    p.len() - 1
                })
                .collect();
            Ok(vec![(1.0, fock)])
        }
        _ => {
            let mut configs = vec![(1.0, Vec::new())];
            for p in &pops {
                let mut next = Vec::with_capacity(configs.len() * p.len());
                for (w, f) in &configs {
                    for (n, pn) in p.iter().enumerate() {
                        let mut g = f.clone();
                        g.push(n);
                        next.push((w * pn, g));
                    }
                }
                configs = next;
            }
            configs.retain(|(w, _)| *w > 0.0);
            Ok(configs)
        }
    }
}

pub fn run_trajectory(spec: &TrajectorySpec, index: usize, seed: u64) -> Result<TrajectoryResult> {
    spec.integrator.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise_seed: u64 = rng.random();
    let generator: Box<dyn Generator> = match &spec.model {
        SimModel::Driven(m) if spec.noise.is_active() => {
            Box::new(m.with_noise(Arc::new(spec.noise.realize(spec.gate_time, noise_seed)?)))
        }
        SimModel::Driven(m) => Box::new(m.clone()),
        SimModel::Fixed(_) if spec.noise.is_active() => {
            return Err(Error::InvalidArgument("noise requires a driven model".into()))
        }
        SimModel::Fixed(g) => Box::new(g.clone()),
    };
    let layout = generator.layout().clone();
    let dissipative = spec.channels.iter().any(|c| c.gamma > 0.0);
    let configs = initial_configurations(&layout, spec.nbar, spec.initial, &mut rng)?;
    let fock = (spec.initial == InitialMotion::Sampled && configs.len() == 1).then(|| configs[0].1.clone());

    let ground = |f: &[usize]| StateVector::qubits_with_fock(&layout, QubitState::Ground, QubitState::Ground, f);
    let mut parts = Vec::with_capacity(configs.len());
    let mut diag = Diagnostics::default();
    let mut jumps = 0;
    let mut merge = |d: Diagnostics| {
        diag.steps += d.steps;
        diag.max_step = diag.max_step.max(d.max_step);
        diag.norm_drift = diag.norm_drift.max(d.norm_drift);
    };

    if dissipative && spec.dissipation == Dissipation::Lindblad {
        let rho0 = DensityMatrix::mixture(
            &configs.iter().map(|(w, f)| Ok((*w, ground(f)?.to_density()))).collect::<Result<Vec<_>>>()?,
        )?;
        let (rho, d) = evolve_lindblad_with(
            &rho0,
            &*generator,
            &spec.channels,
            0.0,
            spec.gate_time,
            &spec.integrator,
            &spec.pulses,
        )?;
        merge(d);
        parts.push((1.0, crate::qops::partial_trace(&rho, &[0, 1])?));
    } else {
        for (w, f) in &configs {
            let psi0 = ground(f)?;
            let psi = if dissipative {
                let (psi, d, n) = evolve_jumps(
                    &psi0,
                    &*generator,
                    &spec.channels,
                    0.0,
                    spec.gate_time,
                    &spec.integrator,
                    &spec.pulses,
                    &mut rng,
                )?;
                jumps += n;
                merge(d);
                psi
            } else {
                let (psi, d) = evolve_state_with(&psi0, &*generator, 0.0, spec.gate_time, &spec.integrator, &spec.pulses)?;
                merge(d);
                psi
            };
            parts.push((*w, psi.reduced(&[0, 1])?));
        }
    }
    let qubits = DensityMatrix::mixture(&parts)?;
    let fidelity = bell_fidelity(&qubits, &spec.target)?;
    Ok(TrajectoryResult { index, seed, fidelity, qubits, fock, jumps, diagnostics: diag })
}

/// Runs `n` independent trajectories in parallel; results are ordered by index.
pub fn run_ensemble(spec: &TrajectorySpec, n: usize, master_seed: u64) -> Result<EnsembleResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("n_realizations must be >= 1".into()));
    }
    let trajectories: Vec<TrajectoryResult> = (0..n)
        .into_par_iter()
        .map(|i| {
            let seed = trajectory_seed(master_seed, i);
            run_trajectory(spec, i, seed).map_err(|e| Error::Trajectory { index: i, seed, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    let report = infidelity_stats(&trajectories)?;
    Ok(EnsembleResult { report, trajectories, master_seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..100).map(|i| trajectory_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_eq!(a[3], trajectory_seed(7, 3));
        assert_ne!(trajectory_seed(7, 0), trajectory_seed(8, 0));
    }

    #[test]
    fn thermal_configurations_sum_to_one() {
        let l = HilbertLayout::qubits_cm_br(6, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = initial_configurations(&l, 1.0, InitialMotion::ThermalAverage, &mut rng).unwrap();
        assert_eq!(c.len(), 18);
        assert!((c.iter().map(|x| x.0).sum::<f64>() - 1.0).abs() < 1e-14);
        let s = initial_configurations(&l, 1.0, InitialMotion::Sampled, &mut rng).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].1[0] < 6 && s[0].1[1] < 3);
        let g = initial_configurations(&l, 1.0, InitialMotion::Ground, &mut rng).unwrap();
        assert_eq!(g[0].1, vec![0, 0]);
    }
}
