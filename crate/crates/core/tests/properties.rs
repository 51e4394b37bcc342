use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DVector;
use proptest::prelude::*;

use qlight::analysis::{
    log_negativity, photon_statistics, quadrature_operator, quadrature_pdf, wigner, GridSpec,
};
use qlight::fock::{
    beam_splitter, displacement, fidelity, ladder, partial_trace, phase_rotation, single_mode_squeeze,
    two_mode_squeeze, LadderKind,
};
use qlight::herald::{
    apply_ideal, herald_physical, subtract_ideal, Coupling, DetectorModel, OperatorSuperposition, Outcome,
};
use qlight::plan::{
    parse_plan, print_plan, CircuitPlan, FidelityTarget, Input, MeasureKind, Measurement, Stage,
};
use qlight::states::{coherent_amplitudes, make_state, Parity, StateSpec};
use qlight::{Ket, ModeSpace, QuantumState, C64};

fn random_ket(space: ModeSpace, support: usize, amps: &[(f64, f64)]) -> Ket {
    let v = Ket::from_fn(space, |idx| {
        if space.occupation(idx).iter().all(|&n| n <= support) {
            let (re, im) = amps[(idx * 7) % amps.len()];
            C64::new(re, im)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    v.normalize().unwrap().0
}

fn amps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..40)
        .prop_filter("nonzero", |a| a.iter().any(|&(r, i)| r.abs() + i.abs() > 0.05))
}

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(r, i)| C64::new(r, i))
}

fn detector() -> impl Strategy<Value = DetectorModel> {
    prop_oneof![
        (0usize..6).prop_map(|n| DetectorModel::Projective { n }),
        (0.05..=1.0f64, 0.0..0.2f64).prop_map(|(efficiency, dark_rate)| DetectorModel::OnOff { efficiency, dark_rate }),
        (0.05..=1.0f64, 1usize..6).prop_map(|(efficiency, max_count)| DetectorModel::Pnr { efficiency, max_count }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn commutator_is_identity_except_top_level(cutoff in 1usize..25) {
        let space = ModeSpace::single(cutoff).unwrap();
        let a = ladder(LadderKind::Annihilate, cutoff).unwrap();
        let ad = ladder(LadderKind::Create, cutoff).unwrap();
        let c = a.compose(&ad).unwrap().add(&ad.compose(&a).unwrap().scale(C64::new(-1.0, 0.0))).unwrap();
        for r in 0..cutoff {
            for k in 0..cutoff {
                let want = if r == k { 1.0 } else { 0.0 };
                prop_assert!((c.matrix()[(r, k)] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
        prop_assert_eq!(space.levels(), cutoff + 1);
    }

    #[test]
    fn generator_exponentials_are_unitary_with_margin(
        tau in -PI..PI, zeta in -0.3..0.3f64, alpha in complex(), theta in -PI..PI,
    ) {
        let one = ModeSpace::single(30).unwrap();
        let two = ModeSpace::new(2, 12).unwrap();
        prop_assert!(beam_splitter(tau, (0, 1), &two).unwrap().unitarity_defect(5) < 1e-10);
        prop_assert!(displacement(alpha, 0, &one).unwrap().unitarity_defect(5) < 1e-10);
        prop_assert!(phase_rotation(theta, 0, &one).unwrap().unitarity_defect(0) < 1e-12);
        // Squeezers couple every level; unitarity holds on states far below the cutoff.
        let s = single_mode_squeeze(zeta, 0, &ModeSpace::single(60).unwrap()).unwrap();
        prop_assert!(s.unitarity_defect(50) < 1e-10);
        let t = two_mode_squeeze(zeta, (0, 1), &ModeSpace::new(2, 20).unwrap()).unwrap();
        prop_assert!(t.unitarity_defect(14) < 1e-10);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor(a in amps(), b in amps()) {
        let space = ModeSpace::single(5).unwrap();
        let psi = random_ket(space, 5, &a);
        let phi = random_ket(space, 5, &b);
        let joint = QuantumState::Pure(phi.tensor(&psi).unwrap());
        let reduced = partial_trace(&joint, &[1]).unwrap();
        prop_assert!(reduced.max_abs_diff(&psi.to_density()) < 1e-12);
    }

    #[test]
    fn quadrature_variances_are_nonnegative(a in amps()) {
        let space = ModeSpace::single(8).unwrap();
        let state = QuantumState::Pure(random_ket(space, 8, &a));
        for k in 0..16 {
            let theta = PI * k as f64 / 16.0;
            let x = quadrature_operator(theta, 8).unwrap();
            let mean = state.expectation(&x).unwrap().re;
            let second = state.expectation(&x.compose(&x).unwrap()).unwrap().re;
            prop_assert!(second - mean * mean >= -1e-12);
        }
    }

    #[test]
    fn constructors_match_generated_states(alpha in complex(), lambda in 0.01..0.5f64) {
        let one = ModeSpace::single(40).unwrap();
        let coherent = make_state(&StateSpec::Coherent { alpha }, &one).unwrap();
        let displaced = displacement(alpha, 0, &one).unwrap().apply(&Ket::vacuum(one)).unwrap();
        prop_assert!(coherent.as_ket().unwrap().max_abs_diff(&displaced) < 1e-9);

        let two = ModeSpace::new(2, 25).unwrap();
        let epr = make_state(&StateSpec::Epr { lambda }, &two).unwrap();
        let squeezed = two_mode_squeeze(lambda.atanh(), (0, 1), &two).unwrap().apply(&Ket::vacuum(two)).unwrap();
        prop_assert!(epr.as_ket().unwrap().max_abs_diff(&squeezed) < 1e-8);
    }

    #[test]
    fn cat_normalization(re in -2.0..2.0f64, im in -2.0..2.0f64, odd in any::<bool>()) {
        let alpha = C64::new(re, im);
        prop_assume!(alpha.norm() > 0.05);
        let plus = coherent_amplitudes(alpha, 60);
        let minus = coherent_amplitudes(-alpha, 60);
        let sign = if odd { -1.0 } else { 1.0 };
        let sum: Vec<C64> = plus.iter().zip(&minus).map(|(p, m)| p + m * sign).collect();
        let norm: f64 = sum.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 2.0 * (1.0 + sign * (-2.0 * alpha.norm_sqr()).exp())).abs() < 1e-10);

        let space = ModeSpace::single(60).unwrap();
        let parity = if odd { Parity::Odd } else { Parity::Even };
        let cat = make_state(&StateSpec::Cat { alpha, parity }, &space).unwrap();
        let direct = QuantumState::Pure(Ket::new(space, DVector::from_vec(sum)).unwrap().normalize().unwrap().0);
        prop_assert!(fidelity(&cat, &direct).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn subtracted_squeezed_vacuum_is_odd(lambda in 0.01..0.7f64) {
        let space = ModeSpace::single(90).unwrap();
        let out = subtract_ideal(&make_state(&StateSpec::SqueezedVacuum { lambda }, &space).unwrap(), 0).unwrap();
        let ket = out.state.as_ket().unwrap();
        for n in (0..=90).step_by(2) {
            prop_assert!(ket.amplitudes()[n].norm() < 1e-15);
        }
    }

    #[test]
    fn povms_are_complete(det in detector(), cutoff in 1usize..20) {
        let povm = det.povm(cutoff).unwrap();
        for n in 0..=cutoff {
            let total: f64 = povm.iter().map(|(_, e)| e[n]).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            prop_assert!(povm.iter().all(|(_, e)| e[n] >= -1e-15));
        }
    }

    #[test]
    fn click_and_no_click_probabilities_sum_to_one(
        a in amps(), r in 0.01..0.99f64, eta in 0.05..=1.0f64, dark in 0.0..0.1f64,
    ) {
        let space = ModeSpace::single(10).unwrap();
        let state = QuantumState::Pure(random_ket(space, 4, &a));
        let det = DetectorModel::OnOff { efficiency: eta, dark_rate: dark };
        let coupling = Coupling::BeamSplitter { reflectivity: r };
        let p = |o| herald_physical(&state, 0, coupling, det, o).map(|h| h.probability().unwrap()).unwrap_or(0.0);
        prop_assert!((p(Outcome::Click) + p(Outcome::NoClick) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn delocalized_subtraction_keeps_coherent_pairs_separable(alpha in complex(), beta in complex(), phi in -PI..PI) {
        let one = ModeSpace::single(20).unwrap();
        let pair = make_state(&StateSpec::Coherent { alpha }, &one).unwrap()
            .tensor(&make_state(&StateSpec::Coherent { alpha: beta }, &one).unwrap()).unwrap();
        let c = C64::new(FRAC_1_SQRT_2, 0.0);
        match apply_ideal(&pair, &OperatorSuperposition::delocalized_subtract((0, 1), c, c, phi)) {
            Ok(out) => prop_assert!(log_negativity(&out.state, &[0]).unwrap().abs() < 1e-9),
            Err(e) => prop_assert!(e.is_herald_impossible()),
        }
    }

    #[test]
    fn photon_statistics_sum_to_one(a in amps()) {
        let state = QuantumState::Pure(random_ket(ModeSpace::new(2, 6).unwrap(), 6, &a));
        let total: f64 = photon_statistics(&state).joint().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn wigner_marginals_match_quadrature_distributions(a in amps()) {
        let state = QuantumState::Pure(random_ket(ModeSpace::single(6).unwrap(), 6, &a));
        let grid = GridSpec { x_range: (-4.0, 4.0), p_range: (-9.0, 9.0), nx: 17, np: 181 };
        let w = wigner(&state, 0, &grid).unwrap();
        let pdf = quadrature_pdf(&state, 0, 0.0, &w.xs).unwrap();
        for (m, p) in w.x_marginal().iter().zip(&pdf) {
            prop_assert!((m - p).abs() < 1e-4);
        }
        let swapped = GridSpec { x_range: grid.p_range, p_range: grid.x_range, nx: grid.np, np: grid.nx };
        let w = wigner(&state, 0, &swapped).unwrap();
        let pdf = quadrature_pdf(&state, 0, PI / 2.0, &w.ps).unwrap();
        for (m, p) in w.p_marginal().iter().zip(&pdf) {
            prop_assert!((m - p).abs() < 1e-4);
        }
    }

    #[test]
    fn log_negativity_ignores_local_displacements(
        alpha in 0.0..0.6f64, phi in -PI..PI, beta in (-0.4..0.4f64, -0.4..0.4f64), theta in -PI..PI,
    ) {
        let space = ModeSpace::new(2, 22).unwrap();
        let state = make_state(&StateSpec::TwoModeAddedCoherent { alpha: C64::new(alpha, 0.0), phi }, &space).unwrap();
        let before = log_negativity(&state, &[0]).unwrap();
        let d = displacement(C64::new(beta.0, beta.1), 0, &space).unwrap();
        let r = phase_rotation(theta, 1, &space).unwrap();
        let moved = QuantumState::Pure(r.apply(&d.apply(state.as_ket().unwrap()).unwrap()).unwrap());
        prop_assert!((log_negativity(&moved, &[0]).unwrap() - before).abs() < 1e-8);
    }

    #[test]
    fn delocalized_subtraction_raises_entanglement_of_pairs(lambda in 0.05..0.55f64) {
        let space = ModeSpace::new(2, 30).unwrap();
        let epr = make_state(&StateSpec::Epr { lambda }, &space).unwrap();
        let c = C64::new(FRAC_1_SQRT_2, 0.0);
        let out = apply_ideal(&epr, &OperatorSuperposition::delocalized_subtract((0, 1), c, c, 0.0)).unwrap();
        prop_assert!(log_negativity(&out.state, &[0]).unwrap() > log_negativity(&epr, &[0]).unwrap());
    }
}

fn stage() -> impl Strategy<Value = Stage> {
    let mode = 0usize..2;
    prop_oneof![
        (-3.0..3.0f64).prop_map(|tau| Stage::BeamSplitter { modes: (0, 1), tau }),
        (-0.5..0.5f64).prop_map(|zeta| Stage::TwoModeSqueeze { modes: (1, 0), zeta }),
        (mode.clone(), -0.5..0.5f64).prop_map(|(mode, zeta)| Stage::Squeeze { mode, zeta }),
        (mode.clone(), complex()).prop_map(|(mode, alpha)| Stage::Displace { mode, alpha }),
        (mode.clone(), -PI..PI).prop_map(|(mode, theta)| Stage::Phase { mode, theta }),
        (mode.clone(), 0.01..1.0f64).prop_map(|(mode, eta)| Stage::Loss { mode, eta }),
        mode.clone().prop_map(|mode| Stage::Add { mode }),
        (mode.clone(), complex()).prop_map(|(mode, gamma)| Stage::DisplacedSubtract { mode, gamma }),
        (complex(), complex(), -PI..PI).prop_map(|(c1, c2, phi)| Stage::DelocalizedAdd { modes: (0, 1), c1, c2, phi }),
        (mode.clone(), complex(), complex()).prop_map(|(mode, a, b)| Stage::AffineNumber { mode, a, b }),
        (mode.clone(), 0.01..0.99f64, detector())
            .prop_map(|(mode, reflectivity, detector)| Stage::SubtractPhysical { mode, reflectivity, detector }),
        (mode, 0.01..0.99f64, detector()).prop_map(|(mode, zeta, detector)| Stage::AddPhysical { mode, zeta, detector }),
    ]
}

fn measurement() -> impl Strategy<Value = MeasureKind> {
    prop_oneof![
        Just(MeasureKind::State { modes: vec![] }),
        complex().prop_map(|alpha| MeasureKind::Fidelity {
            modes: vec![1],
            target: FidelityTarget::State(StateSpec::Coherent { alpha })
        }),
        prop::collection::vec(complex(), 1..4)
            .prop_map(|a| MeasureKind::Fidelity { modes: vec![0], target: FidelityTarget::Amplitudes(a) }),
        (0.5..8.0f64, 2usize..300).prop_map(|(w, points)| MeasureKind::Wigner { mode: 0, half_width: Some(w), points }),
        Just(MeasureKind::LogNegativity { part: vec![0] }),
        (1usize..20, 1usize..5000).prop_map(|(phases, samples)| MeasureKind::Homodyne { mode: 1, phases, samples }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_plans_parse_back_unchanged(
        seed in 0u64..=i64::MAX as u64,
        cutoff in 1usize..30,
        alpha in complex(),
        stages in prop::collection::vec(stage(), 0..6),
        kinds in prop::collection::vec(measurement(), 0..4),
        herald in prop::option::of((detector(), 0usize..4)),
    ) {
        let mut stages = stages;
        if let Some((detector, n)) = herald {
            let outcome = match detector {
                DetectorModel::OnOff { .. } => Outcome::Click,
                DetectorModel::Projective { n } => Outcome::Count(n),
                DetectorModel::Pnr { max_count, .. } => Outcome::Count(n.min(max_count)),
            };
            stages.push(Stage::Herald { detections: vec![qlight::plan::Detection { mode: 2, detector, outcome }] });
        }
        let plan = CircuitPlan {
            seed,
            modes: 3,
            cutoff,
            inputs: vec![Input { modes: vec![1], state: StateSpec::Coherent { alpha } }],
            stages,
            measurements: kinds
                .into_iter()
                .enumerate()
                .map(|(i, kind)| Measurement { name: format!("m{i}"), kind })
                .collect(),
        };
        let text = print_plan(&plan);
        let back = parse_plan(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &plan);
        prop_assert_eq!(print_plan(&back), text);
    }
}
