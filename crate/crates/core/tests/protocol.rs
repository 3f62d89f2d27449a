use cavent::amplitudes::{amplitude, AmplitudePair, CavityParams};
use cavent::entanglement::wootters;
use cavent::protocol::{
    bell_from_state, design, find_tbar, run_bell_extraction, solve_omega2, swapped_design,
    w_fidelity, BellMeasurement, DesignInputs, TbarRule, DEFAULT_F_THRESHOLD, W_TARGET_E,
};
use cavent::quantum_state::{
    evolve_state, five_component_view, measure, reduce, InitialState, JointState, Subsystem,
};
use cavent::Error;
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

#[test]
fn design_point_numbers() {
    let d = design(&DesignInputs::reference(1.0).unwrap()).unwrap();
    assert_eq!(d.t_bar, 3.0);
    assert!((d.f1_at_tbar - 0.9922).abs() < 1e-3, "{}", d.f1_at_tbar);
    assert!((d.omega2 - 0.396).abs() < 5e-3, "{}", d.omega2);
    assert!((d.e2_at_tbar.norm() - FRAC_1_SQRT_2).abs() < 1e-9);
    assert!(d.w.fidelity >= 0.985, "{:?}", d.w);
    assert!(d.w.joint_fidelity >= 0.985, "{:?}", d.w);
    assert!(!d.w.precondition_warning);
    assert!(!d.phase_warning);

    let a2g = d.bell(BellMeasurement::Atom2Ground).unwrap();
    assert!(a2g.fidelity >= 0.98);
    assert!((a2g.probability - 2.0 / 3.0).abs() < 0.02);
    let c2v = d.bell(BellMeasurement::Cavity2Vacuum).unwrap();
    assert!(c2v.fidelity >= 0.98);
    for b in &d.bell_outcomes {
        assert!((0.0..=1.0).contains(&b.probability));
        assert!((0.0..=1.0 + 1e-12).contains(&b.fidelity));
    }
}

#[test]
fn design_point_photon_branches_are_balanced() {
    let d = design(&DesignInputs::reference(1.0).unwrap()).unwrap();
    let init = d.inputs.init;
    let (p1, p2) = d.inputs.lab_cavities(d.omega2);
    let five = five_component_view(&evolve_state(&init, &p1, &p2, d.t_bar).unwrap()).unwrap();
    assert!((five.photon1.norm() - five.both_photons.norm()).abs() < 1e-3);
}

#[test]
fn threshold_rule_time_and_solver_residual() {
    let p = CavityParams::resonant(1.0, 1.0).unwrap();
    let t = find_tbar(&p, DEFAULT_F_THRESHOLD).unwrap();
    // First reach is earlier, but |F| dips back below 0.99 before 2t there.
    assert!(amplitude(&p, t).unwrap().f_mag >= DEFAULT_F_THRESHOLD - 1e-9);
    assert!(t > 3.0 && t < 5.0, "{t}");
    let om = solve_omega2(1.0, 0.0, t, W_TARGET_E).unwrap();
    let e = amplitude(&CavityParams::resonant(om, 1.0).unwrap(), t).unwrap().e_abs();
    assert!((e - W_TARGET_E).abs() < 1e-9);
}

#[test]
fn threshold_zero_pipeline_fails_in_solver() {
    let inputs = DesignInputs {
        tbar_rule: TbarRule::Threshold(0.0),
        ..DesignInputs::reference(1.0).unwrap()
    };
    assert!(matches!(design(&inputs), Err(Error::Solver(_))));
}

#[test]
fn cavity2_vacuum_leaves_atom2_cavity1_entangled() {
    let d = design(&DesignInputs::reference(1.0).unwrap()).unwrap();
    let (p1, p2) = d.inputs.lab_cavities(d.omega2);
    let st = evolve_state(&d.inputs.init, &p1, &p2, d.t_bar).unwrap();
    let (post, _) = measure(&st, Subsystem::R2, 0).unwrap();
    let c = wootters(&reduce(&post, (Subsystem::A2, Subsystem::R1)).unwrap()).unwrap();
    assert!(c > 0.98, "{c}");
}

#[test]
fn born_probabilities_match_amplitude_sums() {
    let d = design(&DesignInputs::reference(1.0).unwrap()).unwrap();
    let (p1, p2) = d.inputs.lab_cavities(d.omega2);
    let st = evolve_state(&d.inputs.init, &p1, &p2, d.t_bar).unwrap();
    for m in BellMeasurement::ALL {
        let (sub, outcome) = m.projection();
        let direct: f64 = (0..16)
            .filter(|i| ((i >> sub.shift()) & 1) as u8 == outcome)
            .map(|i| st.amplitude(i).norm_sqr())
            .sum();
        let o = run_bell_extraction(&d, &d.inputs.init, &p1, &p2, m).unwrap();
        assert!((o.probability - direct).abs() < 1e-12, "{m:?}");
        assert!(o.probability <= 1.0);
    }
}

#[test]
fn swapped_design_is_an_involution() {
    let inputs = DesignInputs::reference(1.0).unwrap();
    let direct = design(&inputs).unwrap();
    let once = swapped_design(&inputs).unwrap();
    let twice = swapped_design(&inputs.swapped()).unwrap();
    assert_eq!(direct, twice);
    assert!((once.w.fidelity - direct.w.fidelity).abs() < 1e-12);
    assert!((once.omega2 - direct.omega2).abs() < 1e-12);
    for (a, b) in once.bell_outcomes.iter().zip(&direct.bell_outcomes) {
        assert!((a.probability - b.probability).abs() < 1e-12);
        assert!((a.fidelity - b.fidelity).abs() < 1e-12);
    }
    // The swapped laboratory order puts the emitter in cavity 2.
    let (p1, p2) = once.inputs.lab_cavities(once.omega2);
    assert_eq!(p2, inputs.emitter);
    assert_eq!(p1.omega, once.omega2);
}

#[test]
fn w_fidelity_degrades_with_residual_emitter_amplitude() {
    let init = InitialState::new(1.0 / 3.0, 0.0).unwrap();
    let half = AmplitudePair::from_excited(Complex64::new(FRAC_1_SQRT_2, 0.0));
    let fids: Vec<_> = [0.0, 0.05, 0.1, 0.2]
        .iter()
        .map(|&e1| {
            let pair = AmplitudePair::from_excited(Complex64::new(e1, 0.0));
            w_fidelity(&JointState::from_pairs(&init, &pair, &half)).unwrap()
        })
        .collect();
    assert!((fids[0].fidelity - 1.0).abs() < 1e-14);
    for w in fids.windows(2) {
        assert!(w[1].fidelity < w[0].fidelity, "{fids:?}");
        assert!(w[1].joint_fidelity < w[0].joint_fidelity, "{fids:?}");
    }
}

#[test]
fn w_fidelity_is_reservoir_gauge_invariant() {
    let d = design(&DesignInputs::reference(1.0).unwrap()).unwrap();
    let (p1, p2) = d.inputs.lab_cavities(d.omega2);
    let st = evolve_state(&d.inputs.init, &p1, &p2, d.t_bar).unwrap();
    let base = w_fidelity(&st).unwrap();
    // Both photon branches carry the cavity 1 photon, so this phase only moves
    // them against the ground branch.
    let rotated = st.with_local_phase(Subsystem::R1, 0.7);
    let r = w_fidelity(&rotated).unwrap();
    assert!((r.atom1_ground_probability - base.atom1_ground_probability).abs() < 1e-12);
    assert!((r.phase_corrected - base.phase_corrected).abs() < 1e-12);
}

#[test]
fn nonzero_phi_keeps_probabilities_and_lowers_fidelity() {
    let base = DesignInputs::reference(1.0).unwrap();
    let phased = DesignInputs {
        init: InitialState::new(1.0 / 3.0, 1.0).unwrap(),
        ..base
    };
    let a = design(&base).unwrap();
    let b = design(&phased).unwrap();
    assert!(b.phase_warning);
    assert!(b.w.fidelity < a.w.fidelity);
    for (x, y) in a.bell_outcomes.iter().zip(&b.bell_outcomes) {
        assert!((x.probability - y.probability).abs() < 1e-12);
    }
}

#[test]
fn synthetic_w_measurements_are_exact() {
    let init = InitialState::new(1.0 / 3.0, 0.0).unwrap();
    let emitted = AmplitudePair {
        e: Complex64::new(0.0, 0.0),
        f_mag: 1.0,
    };
    let half = AmplitudePair::from_excited(Complex64::new(FRAC_1_SQRT_2, 0.0));
    let st = JointState::from_pairs(&init, &emitted, &half);
    let o = bell_from_state(&st, BellMeasurement::Atom2Ground).unwrap();
    assert!((o.probability - 2.0 / 3.0).abs() < 1e-14);
    assert!((o.fidelity - 1.0).abs() < 1e-14);
}
