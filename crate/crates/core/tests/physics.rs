//! Cross-checks between models and between the two dissipative solvers.

use std::f64::consts::PI;
use std::sync::Arc;

use mwgate::analysis::{bell_fidelity, calibrate_target, ideal_bell_state};
use mwgate::cli::presets::Preset;
use mwgate::cli::{execute, Plan, RunConfig};
use mwgate::constants::two_pi;
use mwgate::controls::{solve_schedule, valid_dd_amplitudes, PhysicalParams, ScheduleRequest};
use mwgate::models::{BichromaticFrameModel, DrivenIonModel, GateModel, Generator};
use mwgate::noise::{heating_channel, NoiseModel};
use mwgate::propagate::{
    evolve_lindblad, evolve_state_with, run_ensemble, Dissipation, InitialMotion, IntegratorConfig, Pulse, SimModel,
    TrajectorySpec,
};
use mwgate::qops::{partial_trace, HilbertLayout, QubitState, StateVector, CM_MODE};
use mwgate::C64;

fn right_panel() -> PhysicalParams {
    PhysicalParams::ytterbium(two_pi(207e3), 38.5)
}

#[test]
fn quantum_jumps_reproduce_the_master_equation() {
    let p = right_panel();
    let s = solve_schedule(&p, &ScheduleRequest::new(two_pi(26.6e3), 1, 0, 0.0, PI / 8.0)).unwrap();
    let g: Arc<dyn Generator> = Arc::new(GateModel::new(&s, 12).unwrap());
    let ch = heating_channel(200.0, p.trap_frequency, 300.0, CM_MODE).unwrap();
    let cfg = IntegratorConfig::default();
    let psi0 = StateVector::qubits_with_fock(g.layout(), QubitState::Ground, QubitState::Ground, &[0]).unwrap();
    let rho = evolve_lindblad(&psi0.to_density(), &*g, &[ch], 0.0, s.gate_time, &cfg).unwrap();
    let exact = bell_fidelity(&partial_trace(&rho, &[0, 1]).unwrap(), &ideal_bell_state()).unwrap();
    let spec = TrajectorySpec {
        model: SimModel::Fixed(g),
        gate_time: s.gate_time,
        pulses: Vec::new(),
        noise: NoiseModel::default(),
        channels: vec![ch],
        dissipation: Dissipation::QuantumJump,
        initial: InitialMotion::Ground,
        nbar: 0.0,
        target: ideal_bell_state(),
        integrator: cfg,
    };
    let e = run_ensemble(&spec, 800, 11).unwrap();
    let z = (e.report.mean_fidelity - exact) / e.report.stderr;
    assert!(z.abs() < 3.0, "jumps {} ± {}, master equation {exact}", e.report.mean_fidelity, e.report.stderr);
    assert!(e.trajectories.iter().any(|t| t.jumps > 0));
}

#[test]
fn target_follows_the_gate_convention() {
    // |gg⟩ → (|gg⟩ + i|ee⟩)/√2 up to the small second-order corrections
    let p = right_panel();
    let s = solve_schedule(&p, &ScheduleRequest::new(two_pi(26.6e3), 1, 31, 0.0, PI / 8.0)).unwrap();
    let t = calibrate_target(&p, &s, &IntegratorConfig::default()).unwrap();
    let l = HilbertLayout::qubits();
    let gg = t.amplitudes()[l.flat_index(&[1, 1])];
    let ee = t.amplitudes()[l.flat_index(&[0, 0])];
    assert!(gg.im.abs() < 1e-12 && gg.re > 0.0);
    let ratio = ee / gg;
    assert!((ratio - C64::new(0.0, 1.0)).norm() < 1e-3, "{ratio}");
    assert!(t.inner(&ideal_bell_state()).norm_sqr() > 1.0 - 1e-6);
}

#[test]
fn driven_model_agrees_with_the_target() {
    let p = right_panel().with_truncation(15, 5);
    let s = solve_schedule(&p, &ScheduleRequest::new(two_pi(26.6e3), 1, 31, 0.0, PI / 8.0)).unwrap();
    let target = calibrate_target(&p, &s, &IntegratorConfig::default()).unwrap();
    let m = DrivenIonModel::simplified(&p, &s, true).unwrap();
    let psi0 = StateVector::qubits_with_fock(m.layout(), QubitState::Ground, QubitState::Ground, &[0]).unwrap();
    let pulses = Pulse::refocusing(&s.pi_pulse_times);
    let (psi, _) = evolve_state_with(&psi0, &m, 0.0, s.gate_time, &IntegratorConfig::default(), &pulses).unwrap();
    let f = bell_fidelity(&psi.reduced(&[0, 1]).unwrap(), &target).unwrap();
    // only the second-order spin-spin shift separates the two
    assert!(f > 0.99 && f < 1.0, "{f}");
}

#[test]
fn lab_frame_matches_the_bichromatic_frame() {
    let p = right_panel().with_truncation(10, 3);
    let bare = solve_schedule(&p, &ScheduleRequest::new(two_pi(26.6e3), 1, 31, 0.0, PI / 8.0)).unwrap();
    let carrier = valid_dd_amplitudes(&bare, two_pi(30e3), two_pi(80e3)).unwrap()[0];
    let s = solve_schedule(&p, &ScheduleRequest::new(two_pi(26.6e3), 1, 31, carrier, PI / 8.0)).unwrap();
    let cfg = IntegratorConfig::default();
    let target = calibrate_target(&p, &s, &cfg).unwrap();
    let pulses = Pulse::refocusing(&s.pi_pulse_times);
    let run = |g: &dyn Generator| {
        let psi0 = StateVector::qubits_with_fock(g.layout(), QubitState::Ground, QubitState::Ground, &[0]).unwrap();
        let (psi, _) = evolve_state_with(&psi0, g, 0.0, s.gate_time, &cfg, &pulses).unwrap();
        bell_fidelity(&psi.reduced(&[0, 1]).unwrap(), &target).unwrap()
    };
    let lab = run(&DrivenIonModel::simplified(&p, &s, true).unwrap());
    let frame = run(&BichromaticFrameModel::new(&s, p.n_cm).unwrap());
    assert!((lab - frame).abs() < 1e-4, "lab {lab} frame {frame}");
    assert!(1.0 - lab < 2e-3, "{lab}");
}

#[test]
fn carrier_and_modulation_widen_the_detuning_window() {
    let base = RunConfig::from_json(
        r#"{"schema_version": 1,
            "physical": {"trap_frequency_hz": 138e3, "gradient_t_per_m": 20.9, "n_cm": 8},
            "schedule": {"rabi_hz": 26e3}}"#,
    )
    .unwrap();
    let mut plan = Preset::Fig1a.plan(&base).unwrap();
    for s in &mut plan.series {
        s.points.retain(|p| [-3e3, 0.0, 3e3].contains(&p.value));
    }
    let r = execute(&Plan { label: "fig1a".into(), series: plan.series }).unwrap();
    let f = |name: &str, i: usize| r.series.iter().find(|s| s.name == name).unwrap().points[i].mean_fidelity;
    for i in [0, 2] {
        assert!(f("carrier_modulated", i) > f("carrier_unmodulated", i));
        assert!(f("carrier_unmodulated", i) > f("no_carrier", i));
    }
    assert!(f("carrier_modulated", 1) > 0.99);
    assert!(f("no_carrier", 1) > 0.99);
}
