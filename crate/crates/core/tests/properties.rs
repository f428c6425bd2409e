use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use qagents::analysis::{general_qft_circuit, phase_invariant_fidelity, reconstruct, DenseUnitary};
use qagents::dump::{circuit_file, parse_circuits};
use qagents::framework::{Action, FrameworkError, InteractionSpec, RegisterLayout, Round};
use qagents::grad::{compare_gradients, finite_difference, gradient, Objective};
use qagents::pqc::{build_policy, LayerKind, ParamCircuit};
use qagents::statevec::StateVector;
use qagents::tasks::coinflip::{Cheater, CoinFlipTask, CHEAT_OPTIMUM};
use qagents::tasks::games::{classical_game_bound, game_reward, Game, GameTask};
use qagents::tasks::qft::qft_target;
use qagents::tasks::QftTask;

fn layer_subset() -> impl Strategy<Value = Vec<LayerKind>> {
    proptest::sample::subsequence(LayerKind::ALL.to_vec(), 1..=6)
}

fn circuit_and_params() -> impl Strategy<Value = (ParamCircuit, Vec<f64>)> {
    (1usize..=4, layer_subset()).prop_flat_map(|(n, layers)| {
        let c = build_policy(n, &layers).unwrap();
        let k = c.n_params();
        (Just(c), proptest::collection::vec(-PI..PI, k))
    })
}

fn random_state(n: usize) -> impl Strategy<Value = StateVector> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("zero vector", |v| {
        StateVector::normalized(v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn circuits_preserve_norm((c, p) in circuit_and_params()) {
        let psi = c.apply(&p, &StateVector::basis(c.n_qubits(), 0).unwrap()).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        let u = reconstruct(&c, &p).unwrap();
        prop_assert!(u.unitarity_error() < 1e-9);
    }

    #[test]
    fn adjoint_inverts((c, p) in circuit_and_params()) {
        let both = [p.clone(), p].concat();
        let u = reconstruct(&c.then(&c.adjoint()).unwrap(), &both).unwrap();
        let id = DenseUnitary::identity(c.n_qubits());
        prop_assert!((phase_invariant_fidelity(&u, &id).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn adjoint_gradient_matches_differences((c, p) in circuit_and_params()) {
        let mut task = QftTask::new(c.n_qubits());
        task.layers = c.layers().to_vec();
        let ep = task.episode_with(c).unwrap();
        let g = gradient(&ep, &p).unwrap();
        let num = finite_difference(|x| ep.value(x).unwrap(), &p, 1e-5);
        let check = compare_gradients(&g, &num);
        prop_assert!(check.within(1e-6), "{check}");
    }

    #[test]
    fn process_fidelity_is_symmetric_and_phase_blind(
        (c, p) in circuit_and_params(),
        alpha in -PI..PI,
    ) {
        let u = reconstruct(&c, &p).unwrap();
        let id = DenseUnitary::identity(c.n_qubits());
        let a = phase_invariant_fidelity(&u, &id).unwrap();
        let b = phase_invariant_fidelity(&id, &u).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        let phase = C64::from_polar(1.0, alpha);
        let shifted = DenseUnitary::from_matrix(u.matrix() * phase).unwrap();
        prop_assert!((phase_invariant_fidelity(&u, &shifted).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circuit_file_round_trips((c, p) in circuit_and_params()) {
        let text = circuit_file(&c, &p, Some("x"));
        let back = parse_circuits(&text).unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(back[0].circuit.gates(), c.gates());
        prop_assert_eq!(back[0].circuit.window(), c.window());
        prop_assert_eq!(back[0].circuit.n_params(), c.n_params());
        prop_assert_eq!(&back[0].params, &p);
    }

    #[test]
    fn confinement_rejects_reach_violations(
        n_a in 0usize..3, n_m in 1usize..3, n_b in 1usize..3, width in 1usize..4,
    ) {
        let layout = RegisterLayout::new(n_a, n_m, n_b).unwrap();
        let n = layout.n_qubits();
        prop_assume!(width <= n);
        for offset in 0..=n - width {
            let p = build_policy(width, &[LayerKind::RYPhaseShift]).unwrap().at_offset(offset);
            let inside = offset + width <= n_a + n_m;
            let res = InteractionSpec::new(layout, vec![p], vec![Round::new(Some(Action::Policy(0)), None)]);
            if inside {
                prop_assert!(res.is_ok());
            } else {
                let is_confinement = matches!(res, Err(FrameworkError::Confinement { .. }));
                prop_assert!(is_confinement);
            }
        }
    }

    #[test]
    fn exact_qft_extends_by_linearity(n in 1usize..=4, psi in random_state(4)) {
        // the first 2^n amplitudes, renormalized, as an n-qubit input
        let amps: Vec<C64> = psi.amplitudes()[..1 << n].to_vec();
        prop_assume!(amps.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3);
        let input = StateVector::normalized(amps).unwrap();
        let c = general_qft_circuit(n).unwrap();
        let out = c.apply(&[], &input).unwrap();
        let mut want = vec![C64::new(0.0, 0.0); 1 << n];
        for (x, a) in input.amplitudes().iter().enumerate() {
            for (k, t) in qft_target(n, x).amplitudes().iter().enumerate() {
                want[k] += a * t;
            }
        }
        let want = StateVector::from_amplitudes(want).unwrap();
        prop_assert!(out.fidelity(&want).unwrap() > 1.0 - 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn product_preparations_stay_classical(
        game in prop_oneof![Just(Game::Chsh), Just(Game::ConflictingInterest)],
        prep in proptest::collection::vec(-PI..PI, 4),
        seed_params in proptest::collection::vec(-PI..PI, 96),
    ) {
        let task = GameTask::new(game);
        let policies = task.policies().unwrap();
        // product state: single-qubit rotations only
        let shared = build_policy(2, &[LayerKind::RYPhaseShift]).unwrap().with_window(vec![1, 2]).unwrap();
        let a = &policies[1];
        let b = &policies[2];
        let mut params = prep.clone();
        params.extend(seed_params.iter().cycle().take(a.n_params() + b.n_params()));
        let p = game_reward(&task, &shared, a, b, &params).unwrap();
        prop_assert!(p.mean() <= classical_game_bound(game) + 1e-9, "{} > bound", p.mean());
    }

    #[test]
    fn cheating_never_beats_three_quarters(
        alice in any::<bool>(),
        ancilla in any::<bool>(),
        raw in proptest::collection::vec(-PI..PI, 160),
    ) {
        let mut task = CoinFlipTask::new(if alice { Cheater::Alice } else { Cheater::Bob });
        task.ancilla = ancilla;
        let ep = task.episode().unwrap();
        let params: Vec<f64> = raw.iter().cycle().take(ep.num_params()).copied().collect();
        let r = ep.run(&params).unwrap();
        prop_assert!((0.0..=CHEAT_OPTIMUM + 1e-9).contains(&r), "{r}");
    }

    #[test]
    fn episodes_are_deterministic((c, p) in circuit_and_params()) {
        let ep = QftTask::new(c.n_qubits()).episode_with(c).unwrap();
        let a = ep.value_and_gradient(&p).unwrap();
        let b = ep.value_and_gradient(&p).unwrap();
        prop_assert_eq!(a.0.to_bits(), b.0.to_bits());
        prop_assert!(a.1.iter().zip(&b.1).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
